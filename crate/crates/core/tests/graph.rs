mod common;

use common::{laplacian_from_edges, random_connected, random_graph};
use grub_core::graph::{gamma_closeness, smoothness, Closeness, Laplacian};
use grub_core::{Error, SimilarityGraph};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn small_laplacians() {
    let k3 = SimilarityGraph::complete(3).laplacian();
    let expected = DMatrix::from_row_slice(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.]);
    assert_eq!(k3.matrix(), &expected);
    let p3 = SimilarityGraph::path(3).laplacian();
    let expected = DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.]);
    assert_eq!(p3.matrix(), &expected);
    let one = SimilarityGraph::edgeless(1).laplacian();
    assert_eq!(one.matrix(), &DMatrix::zeros(1, 1));
}

#[test]
fn component_examples() {
    assert_eq!(SimilarityGraph::complete(3).components(), &[vec![0, 1, 2]]);
    let g = SimilarityGraph::from_edges(4, &[(2, 3, 1.0), (0, 1, 1.0)]).unwrap();
    assert_eq!(g.components(), &[vec![0, 1], vec![2, 3]]);
    let mut edges = Vec::new();
    for c in 0..10 {
        for u in 0..10 {
            for v in u + 1..10 {
                edges.push((10 * c + u, 10 * c + v, 1.0));
            }
        }
    }
    let g = SimilarityGraph::from_edges(100, &edges).unwrap();
    assert_eq!(g.component_count(), 10);
    assert!(g.components().iter().all(|c| c.len() == 10));
}

#[test]
fn invalid_graphs_rejected() {
    assert!(matches!(
        SimilarityGraph::from_edges(3, &[(0, 1, -1.0)]),
        Err(Error::InvalidGraph(_))
    ));
    assert!(SimilarityGraph::from_edges(3, &[(0, 1, 0.0)]).is_err());
    assert!(SimilarityGraph::from_edges(3, &[(0, 0, 1.0)]).is_err());
    assert!(SimilarityGraph::from_edges(3, &[(0, 3, 1.0)]).is_err());
    assert!(SimilarityGraph::from_edges(3, &[(0, 1, 1.0), (1, 0, 2.0)]).is_err());
    let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
    assert!(SimilarityGraph::from_adjacency(asym).is_err());
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
    assert!(Laplacian::from_matrix(bad).is_err());
}

#[test]
fn edge_list_round_trip_and_errors() {
    let text = "# comment\nn 4\n0 1 1.5\n\n2 3 1\n";
    let g = SimilarityGraph::parse_edge_list(text).unwrap();
    assert_eq!(g.n(), 4);
    assert_eq!(g.weight(0, 1), 1.5);
    let again = SimilarityGraph::parse_edge_list(&g.to_edge_list()).unwrap();
    assert_eq!(g, again);
    for bad in [
        "0 1 1\n",
        "n 2\n0 1 1\n1 0 1\n",
        "n 2\n0 1 0\n",
        "n 2\n0 1\n",
        "n 2\n0 2 1\n",
        "n x\n",
        "n 2\n0 1 abc\n",
    ] {
        assert!(SimilarityGraph::parse_edge_list(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn smoothness_examples() {
    let p3 = SimilarityGraph::path(3).laplacian();
    assert_eq!(smoothness(&[0.0, 1.0, 3.0], &p3).unwrap(), 5.0);
    assert_eq!(smoothness(&[2.0, 2.0, 2.0], &p3).unwrap(), 0.0);
    let edge = SimilarityGraph::path(2).laplacian();
    assert_eq!(smoothness(&[0.0, 1.0], &edge).unwrap(), 1.0);
    assert!(matches!(
        smoothness(&[0.0, 1.0], &p3),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn nullity_equals_component_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let p = rng.random_range(0.0..0.5);
        let g = random_graph(&mut rng, n, p);
        let l = g.laplacian();
        assert_eq!(l.nullity(), g.component_count());
        assert!(l.min_eigenvalue() >= -1e-9);
        // Row sums vanish and each component indicator is in the kernel.
        for i in 0..n {
            assert!(l.matrix().row(i).sum().abs() < 1e-12);
        }
        for c in g.components() {
            let mut ind = DVector::zeros(n);
            for &i in c {
                ind[i] = 1.0;
            }
            assert!(l.quadratic_form(&ind).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn quadratic_form_is_edge_sum(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 0.4);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let by_edges: f64 = g.edges().iter().map(|&(u, v, w)| w * (x[u] - x[v]).powi(2)).sum();
        let q = g.laplacian().quadratic_form(&DVector::from_vec(x));
        prop_assert!((q - by_edges).abs() <= 1e-9 * (1.0 + by_edges));
        prop_assert!(q >= -1e-9);
        prop_assert!((laplacian_from_edges(&g) - g.laplacian().matrix()).amax() < 1e-12);
    }

    #[test]
    fn adding_an_edge_never_lowers_the_form(seed in any::<u64>(), n in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, 0.3);
        let missing: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| g.weight(u, v) == 0.0)
            .collect();
        prop_assume!(!missing.is_empty());
        let (u, v) = missing[rng.random_range(0..missing.len())];
        let h = g.with_edge(u, v, rng.random_range(0.1..3.0)).unwrap();
        for _ in 0..10 {
            let x = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
            prop_assert!(h.laplacian().quadratic_form(&x) >= g.laplacian().quadratic_form(&x) - 1e-12);
        }
    }
}

#[test]
fn gamma_identity_and_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.random_range(2..8);
        let g = random_connected(&mut rng, n, 0.4);
        let l = g.laplacian();
        assert!(gamma_closeness(&l, &l).unwrap().gamma().unwrap() < 1e-9);
        let scaled = l.scaled(1.5);
        assert!((gamma_closeness(&l, &scaled).unwrap().gamma().unwrap() - 0.5).abs() < 1e-9);
    }
}

/// γ for two connected 3-node Laplacians from the 2×2 generalized
/// eigenproblem on the difference basis {e0 - e1, e1 - e2}.
fn gamma_by_quadratic(ld: &DMatrix<f64>, lh: &DMatrix<f64>) -> f64 {
    let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, -1.0, 1.0, 0.0, -1.0]);
    let a = b.transpose() * lh * &b;
    let m = b.transpose() * ld * &b;
    // det(A - λM) = 0 as a quadratic in λ.
    let qa = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let qb = -(a[(0, 0)] * m[(1, 1)] + a[(1, 1)] * m[(0, 0)] - a[(0, 1)] * m[(1, 0)] - a[(1, 0)] * m[(0, 1)]);
    let qc = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
    let l1 = (-qb - disc) / (2.0 * qa);
    let l2 = (-qb + disc) / (2.0 * qa);
    (1.0 - l1.min(l2)).max(l1.max(l2) - 1.0)
}

#[test]
fn gamma_complete_vs_path() {
    let k3 = SimilarityGraph::complete(3).laplacian();
    let p3 = SimilarityGraph::path(3).laplacian();
    let measured = gamma_closeness(&k3, &p3).unwrap().gamma().unwrap();
    let oracle = gamma_by_quadratic(k3.matrix(), p3.matrix());
    assert!((measured - oracle).abs() < 1e-9);
    assert!((measured - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn gamma_matches_quadratic_oracle_on_random_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let d = random_connected(&mut rng, 3, 0.7);
        let h = random_connected(&mut rng, 3, 0.7);
        let measured = gamma_closeness(&d.laplacian(), &h.laplacian()).unwrap().gamma().unwrap();
        let oracle = gamma_by_quadratic(d.laplacian().matrix(), h.laplacian().matrix());
        assert!((measured - oracle).abs() < 1e-8, "{measured} vs {oracle}");
    }
}

#[test]
fn gamma_incompatible_and_mismatch() {
    let k3 = SimilarityGraph::complete(3).laplacian();
    let split = SimilarityGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap().laplacian();
    assert_eq!(gamma_closeness(&k3, &split).unwrap(), Closeness::Incompatible);
    let k4 = SimilarityGraph::complete(4).laplacian();
    assert!(gamma_closeness(&k3, &k4).is_err());
}
