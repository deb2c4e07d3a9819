//! Laplacian-regularized mean estimation.
//!
//! The estimate minimizes `Σ_t (r_t - μ_{π_t})² + ρ⟨μ, Lμ⟩`, whose closed
//! form is `μ̂ = V⁻¹ x` with `V = diag(t) + ρL` and `x = Σ_t r_t e_{π_t}`.
//! `V` is invertible exactly when every connected component has been
//! sampled at least once. Once it is, `V⁻¹` is maintained by rank-one
//! Sherman–Morrison updates and refreshed from scratch periodically.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::linalg;

/// Number of rank-one updates between full re-inversions of `V`.
pub const REFRESH_INTERVAL: usize = 512;

/// Confidence parameters shared by all arms of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams {
    /// Sub-Gaussian scale of the reward noise.
    pub sigma: f64,
    /// Failure probability, in (0, 1).
    pub delta: f64,
    /// Certified upper bound on `√⟨μ, Lμ⟩`.
    pub epsilon: f64,
    /// Total number of arms.
    pub n: usize,
}

impl ConfidenceParams {
    pub fn new(sigma: f64, delta: f64, epsilon: f64, n: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one arm".into()));
        }
        Ok(Self {
            sigma,
            delta,
            epsilon,
            n,
        })
    }

    /// `β(t) = 2σ√(14 ln(2n(t+1)²/δ)) + ρε`.
    pub fn beta(&self, t: u64, rho: f64) -> f64 {
        let t1 = t as f64 + 1.0;
        let log = (2.0 * self.n as f64 * t1 * t1 / self.delta).ln();
        2.0 * self.sigma * (14.0 * log).sqrt() + rho * self.epsilon
    }
}

/// Estimated means with their confidence radii.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub mu_hat: Vec<f64>,
    pub widths: Vec<f64>,
}

/// Design-matrix state of one run.
#[derive(Debug, Clone)]
pub struct DesignState {
    rho: f64,
    rho_laplacian: DMatrix<f64>,
    counts: Vec<u64>,
    v: DMatrix<f64>,
    vinv: Option<DMatrix<f64>>,
    x: DVector<f64>,
    component_of: Vec<usize>,
    component_samples: Vec<u64>,
    updates_since_refresh: usize,
}

impl DesignState {
    /// Fresh state with no samples: `V = ρL`, `x = 0`.
    pub fn new(laplacian: &Laplacian, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
        }
        let n = laplacian.n();
        let components = laplacian.components();
        let mut component_of = vec![0; n];
        for (c, part) in components.iter().enumerate() {
            for &i in part {
                component_of[i] = c;
            }
        }
        let rho_laplacian = laplacian.matrix() * rho;
        Ok(Self {
            rho,
            v: rho_laplacian.clone(),
            rho_laplacian,
            counts: vec![0; n],
            vinv: None,
            x: DVector::zeros(n),
            component_samples: vec![0; components.len()],
            component_of,
            updates_since_refresh: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_pulls(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Maintained `V⁻¹`, present once the state is identifiable.
    pub fn vinv(&self) -> Option<&DMatrix<f64>> {
        self.vinv.as_ref()
    }

    pub fn reward_sums(&self) -> &DVector<f64> {
        &self.x
    }

    /// True iff every connected component holds at least one sample,
    /// equivalently `V ≻ 0`.
    pub fn is_identifiable(&self) -> bool {
        self.component_samples.iter().all(|&c| c > 0)
    }

    /// Samples drawn so far from the component containing `arm`.
    pub fn component_pulls(&self, arm: usize) -> u64 {
        self.component_samples[self.component_of[arm]]
    }

    pub fn record_pull(&mut self, arm: usize, reward: f64) -> Result<()> {
        let n = self.n();
        if arm >= n {
            return Err(Error::ArmOutOfRange { arm, n });
        }
        self.counts[arm] += 1;
        self.component_samples[self.component_of[arm]] += 1;
        self.v[(arm, arm)] = self.rho_laplacian[(arm, arm)] + self.counts[arm] as f64;
        self.x[arm] += reward;

        let fresh_enough = self.updates_since_refresh + 1 < REFRESH_INTERVAL;
        match self.vinv.as_mut() {
            Some(vinv) if fresh_enough => {
                sherman_morrison_unit(vinv, arm);
                self.updates_since_refresh += 1;
            }
            _ => {
                if self.is_identifiable() {
                    self.refresh()?;
                }
            }
        }
        Ok(())
    }

    /// Recompute `V⁻¹` from `V` by a full factorization.
    pub fn refresh(&mut self) -> Result<()> {
        if let Some(c) = self.component_samples.iter().position(|&c| c == 0) {
            return Err(Error::SingularDesign { component: c });
        }
        self.vinv = Some(linalg::spd_inverse(&self.v)?);
        self.updates_since_refresh = 0;
        Ok(())
    }

    fn require_vinv(&self) -> Result<&DMatrix<f64>> {
        match &self.vinv {
            Some(v) => Ok(v),
            None => Err(Error::SingularDesign {
                component: self
                    .component_samples
                    .iter()
                    .position(|&c| c == 0)
                    .unwrap_or(0),
            }),
        }
    }

    /// `μ̂ = V⁻¹ x`.
    pub fn mean_estimate(&self) -> Result<Vec<f64>> {
        let vinv = self.require_vinv()?;
        Ok((vinv * &self.x).iter().copied().collect())
    }

    /// `β(t_arm) √([V⁻¹]_{arm,arm})`.
    pub fn confidence_width(&self, params: &ConfidenceParams, arm: usize) -> Result<f64> {
        let n = self.n();
        if arm >= n {
            return Err(Error::ArmOutOfRange { arm, n });
        }
        let vinv = self.require_vinv()?;
        Ok(params.beta(self.counts[arm], self.rho) * vinv[(arm, arm)].max(0.0).sqrt())
    }

    pub fn estimate(&self, params: &ConfidenceParams) -> Result<MeanEstimate> {
        let mu_hat = self.mean_estimate()?;
        let widths = (0..self.n())
            .map(|a| self.confidence_width(params, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(MeanEstimate { mu_hat, widths })
    }

    /// `diag(counts) + ρL`, rebuilt from the counts alone.
    pub fn rebuild_v(&self) -> DMatrix<f64> {
        let mut v = self.rho_laplacian.clone();
        for (i, &c) in self.counts.iter().enumerate() {
            v[(i, i)] += c as f64;
        }
        v
    }
}

/// `V⁻¹ ← V⁻¹ - (V⁻¹ e_a)(V⁻¹ e_a)ᵀ / (1 + [V⁻¹]_aa)` for symmetric `V⁻¹`.
fn sherman_morrison_unit(vinv: &mut DMatrix<f64>, a: usize) {
    let col: DVector<f64> = vinv.column(a).into_owned();
    let denom = 1.0 + col[a];
    vinv.ger(-1.0 / denom, &col, &col, 1.0);
}

pub fn init_design(laplacian: &Laplacian, rho: f64) -> Result<DesignState> {
    DesignState::new(laplacian, rho)
}
