//! Arm-selection rules.
//!
//! Score-based rules read everything from the maintained `V⁻¹` through
//! rank-one identities, with `v = [V⁻¹]_ii`:
//!
//! | rule       | criterion                          | score maximized            |
//! |------------|------------------------------------|----------------------------|
//! | `valko`    | largest `‖e_i‖_{V⁻¹}`              | `v`                        |
//! | `maxdiff`  | largest drop of own squared width  | `v - v/(1+v) = v²/(1+v)`   |
//! | `mintrace` | smallest `Tr((V + e_ie_iᵀ)⁻¹)`      | `-(Tr V⁻¹ - ‖V⁻¹e_i‖²/(1+v))` |
//! | `mindet`   | smallest `det((V + e_ie_iᵀ)⁻¹)`     | `ln(1+v)`                  |
//! | `jvmo`     | largest joint variance drop        | `‖Row_i V⁻¹‖²/(1+v)`       |
//!
//! Ties go to the lowest arm index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::DesignState;
use crate::linalg::argmax_lowest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Cyclic,
    Valko,
    MaxDiff,
    MinTrace,
    MinDet,
    Jvmo,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Cyclic,
        PolicyKind::Valko,
        PolicyKind::MaxDiff,
        PolicyKind::MinTrace,
        PolicyKind::MinDet,
        PolicyKind::Jvmo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Cyclic => "cyclic",
            PolicyKind::Valko => "valko",
            PolicyKind::MaxDiff => "maxdiff",
            PolicyKind::MinTrace => "mintrace",
            PolicyKind::MinDet => "mindet",
            PolicyKind::Jvmo => "jvmo",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown policy {s:?}")))
    }
}

/// A policy plus the small amount of per-run state the cyclic rule needs.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: PolicyKind,
    // Component served by the previous cyclic pull.
    last_component: Option<usize>,
}

impl Sampler {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            last_component: None,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Pick the next arm from `active` (sorted ascending).
    pub fn next_arm(
        &mut self,
        state: &DesignState,
        active: &[usize],
        components: &[Vec<usize>],
    ) -> Result<usize> {
        if active.is_empty() {
            return Err(Error::EmptyActiveSet);
        }
        match self.kind {
            PolicyKind::Cyclic => Ok(self.cyclic(state, active, components)),
            kind => score_select(kind, state, active),
        }
    }

    /// Round-robin over components; within the chosen component the
    /// lowest-index active arm among those with the fewest pulls. Only arms
    /// at the global minimum count are eligible, so no active arm is pulled
    /// twice before every other active arm has caught up. Each round (all
    /// active counts equal) restarts at the first component, so a fixed
    /// active set is visited in the same order every round.
    fn cyclic(&mut self, state: &DesignState, active: &[usize], components: &[Vec<usize>]) -> usize {
        let counts = state.counts();
        let min_count = active.iter().map(|&a| counts[a]).min().unwrap();
        let k = components.len();
        let new_round = active.iter().all(|&a| counts[a] == min_count);
        let start = match self.last_component {
            Some(c) if !new_round => c + 1,
            _ => 0,
        };
        for offset in 0..k {
            let c = (start + offset) % k;
            let pick = components[c]
                .iter()
                .copied()
                .filter(|a| counts[*a] == min_count)
                .find(|a| active.binary_search(a).is_ok());
            if let Some(arm) = pick {
                self.last_component = Some(c);
                return arm;
            }
        }
        unreachable!("some active arm attains the minimum count")
    }
}

/// Stateless selection for the score-based rules.
pub fn score_select(kind: PolicyKind, state: &DesignState, active: &[usize]) -> Result<usize> {
    if active.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let scores = scores(kind, state, active)?;
    Ok(argmax_lowest(active.iter().copied().zip(scores)).unwrap())
}

/// Per-arm scores (larger is better) for `active`, in order.
pub fn scores(kind: PolicyKind, state: &DesignState, active: &[usize]) -> Result<Vec<f64>> {
    let vinv = state.vinv().ok_or(Error::SingularDesign { component: 0 })?;
    let diag = |i: usize| vinv[(i, i)];
    let row_norm_sq = |i: usize| vinv.row(i).norm_squared();
    let out = match kind {
        PolicyKind::Cyclic => {
            return Err(Error::InvalidParameter("cyclic has no score".into()));
        }
        PolicyKind::Valko => active.iter().map(|&i| diag(i)).collect(),
        PolicyKind::MaxDiff => active
            .iter()
            .map(|&i| {
                let v = diag(i);
                v - v / (1.0 + v)
            })
            .collect(),
        PolicyKind::MinTrace => {
            let trace = vinv.trace();
            active
                .iter()
                .map(|&i| -(trace - row_norm_sq(i) / (1.0 + diag(i))))
                .collect()
        }
        PolicyKind::MinDet => active.iter().map(|&i| diag(i).ln_1p()).collect(),
        PolicyKind::Jvmo => active
            .iter()
            .map(|&i| row_norm_sq(i) / (1.0 + diag(i)))
            .collect(),
    };
    Ok(out)
}

pub fn next_arm(
    sampler: &mut Sampler,
    state: &DesignState,
    active: &[usize],
    components: &[Vec<usize>],
) -> Result<usize> {
    sampler.next_arm(state, active, components)
}
