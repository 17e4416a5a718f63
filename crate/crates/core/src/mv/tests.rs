use super::*;
use crate::quadrature::{integrate_fn, Tolerance};
use crate::special::{norm_cdf, norm_pdf};

fn sample(lambda: Vec<f64>, n: usize, seed: u64) -> MVSample {
    sample_mvsn(&MVSNSpec::standard(lambda).unwrap(), n, seed).unwrap()
}

#[test]
fn rejects_bad_specs() {
    assert!(MVSNSpec::new(vec![0.0, 0.0], vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![0.0, 0.0]).is_err());
    assert!(MVSNSpec::new(vec![0.0, 0.0], vec![vec![1.0, 0.5], vec![0.4, 1.0]], vec![0.0, 0.0]).is_err());
    assert!(MVSNSpec::new(vec![0.0], vec![vec![1.0]], vec![0.0, 1.0]).is_err());
    assert!(MVSNSpec::standard(vec![]).is_err());
    let spec = MVSNSpec::standard(vec![1.0, 1.0]).unwrap();
    assert!(sample_mvsn(&spec, 0, 1).is_err());
}

#[test]
fn same_seed_same_points() {
    let spec = MVSNSpec::standard(vec![3.0, -1.0]).unwrap();
    let a = sample_mvsn(&spec, 3, 7).unwrap();
    let b = sample_mvsn(&spec, 3, 7).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, sample_mvsn(&spec, 3, 8).unwrap());
}

#[test]
fn symmetric_sample_is_centred() {
    let n = 100_000;
    let s = sample(vec![0.0, 0.0], n, 11);
    for m in s.mean() {
        assert!(m.abs() < 4.0 / (n as f64).sqrt(), "{m}");
    }
}

#[test]
fn first_coordinate_skews_right() {
    let n = 100_000;
    let s = sample(vec![5.0, 0.0], n, 12);
    let x: Vec<f64> = s.rows().map(|r| r[0]).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n as f64;
    let skew = m3 / m2.powf(1.5);
    assert!(skew > 3.0 * (6.0 / n as f64).sqrt(), "{skew}");
    // marginal skew-normal with δ = 5/√26: mean δ√(2/π)
    let delta = 5.0 / 26f64.sqrt();
    assert!((mean - delta * (2.0 / std::f64::consts::PI).sqrt()).abs() < 4.0 / (n as f64).sqrt());
}

/// Probability of the box `[a1, b1] × [a2, b2]` for `2 φ(z₁)φ(z₂) Φ(λ₁z₁ + λ₂z₂)`.
fn box_probability(lam: [f64; 2], (a1, b1): (f64, f64), (a2, b2): (f64, f64)) -> f64 {
    let tol = Tolerance::new(1e-10, 1e-13);
    let outer = |z1: f64| {
        let inner = |z2: f64| norm_pdf(z2) * norm_cdf(lam[0] * z1 + lam[1] * z2);
        2.0 * norm_pdf(z1) * integrate_fn(inner, a2, b2, tol).unwrap().value
    };
    integrate_fn(outer, a1, b1, tol).unwrap().value
}

#[test]
fn binned_goodness_of_fit() {
    let lam = [2.0, -1.0];
    let spec = MVSNSpec::new(
        vec![0.5, -1.0],
        vec![vec![2.0, 0.6], vec![0.6, 1.0]],
        lam.to_vec(),
    )
    .unwrap();
    let n = 100_000;
    let s = sample_mvsn(&spec, n, 2024).unwrap();
    // back to the standardized coordinates z = Σ^{−1/2}(y − μ)
    let f = spec.factors().unwrap();
    let edges = [f64::NEG_INFINITY, -1.0, -0.4, 0.2, 0.8, 1.5, f64::INFINITY];
    let bin = |v: f64| edges.windows(2).position(|w| v >= w[0] && v < w[1]).unwrap();
    let mut counts = [[0usize; 6]; 6];
    for r in s.rows() {
        let d = nalgebra::DVector::from_fn(2, |i, _| r[i] - spec.mu[i]);
        let z = &f.inv_root * d;
        counts[bin(z[0])][bin(z[1])] += 1;
    }
    let mut chi2 = 0.0;
    let mut total_p = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let p = box_probability(lam, (edges[i], edges[i + 1]), (edges[j], edges[j + 1]));
            total_p += p;
            let e = p * n as f64;
            chi2 += (counts[i][j] as f64 - e).powi(2) / e;
        }
    }
    assert!((total_p - 1.0).abs() < 1e-8, "{total_p}");
    // 35 degrees of freedom; the 0.1% critical value is 66.6
    assert!(chi2 < 66.6, "chi2 = {chi2}");
}

#[test]
fn density_reduces_to_normal_and_integrates_to_one() {
    let spec = MVSNSpec::standard(vec![0.0, 0.0]).unwrap();
    let v = spec.pdf(&[0.3, -0.7]).unwrap();
    assert!((v - norm_pdf(0.3) * norm_pdf(-0.7)).abs() < 1e-15);

    let spec = MVSNSpec::new(vec![1.0, 0.0], vec![vec![1.5, -0.3], vec![-0.3, 0.8]], vec![4.0, 1.0]).unwrap();
    let tol = Tolerance::new(1e-9, 1e-12);
    let inf = f64::INFINITY;
    let total = integrate_fn(
        |x| integrate_fn(|y| spec.pdf(&[x, y]).unwrap(), -inf, inf, tol).unwrap().value,
        -inf,
        inf,
        tol,
    )
    .unwrap()
    .value;
    assert!((total - 1.0).abs() < 1e-7, "{total}");
}

#[test]
fn density_grid_shape() {
    let spec = MVSNSpec::standard(vec![5.0, 5.0]).unwrap();
    let g = spec.density_grid((-3.0, 3.0), (-2.0, 2.0), 5).unwrap();
    assert_eq!(g.len(), 25);
    assert_eq!(g[0][..2], [-3.0, -2.0]);
    assert_eq!(g[1][..2], [-3.0, -1.0]);
    assert_eq!(g[24][..2], [3.0, 2.0]);
    assert!(MVSNSpec::standard(vec![1.0]).unwrap().density_grid((0.0, 1.0), (0.0, 1.0), 3).is_err());
}

#[test]
fn quadratic_case_is_the_sample_mean() {
    let s = sample(vec![5.0, -2.0], 20_000, 3);
    let nu = mv_pmean(&s, 2.0, 1e-12).unwrap();
    for (a, b) in nu.iter().zip(s.mean()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn fermat_point_matches_grid_search() {
    let pts = [[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]];
    let s = MVSample::from_points(&pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap();
    let nu = mv_pmean(&s, 1.0, 1e-12).unwrap();
    let cost = |x: f64, y: f64| pts.iter().map(|p| ((x - p[0]).powi(2) + (y - p[1]).powi(2)).sqrt()).sum::<f64>();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=1000 {
        for j in 0..=800 {
            let (x, y) = (i as f64 * 1e-3, j as f64 * 1e-3);
            let c = cost(x, y);
            if c < best.0 {
                best = (c, x, y);
            }
        }
    }
    assert!((nu[0] - best.1).abs() <= 1e-3 && (nu[1] - best.2).abs() <= 1e-3, "{nu:?} vs {best:?}");
    // at the Fermat point the three unit vectors to the vertices sum to zero
    let pull: Vec<f64> = (0..2)
        .map(|k| {
            pts.iter()
                .map(|p| {
                    let d = ((nu[0] - p[0]).powi(2) + (nu[1] - p[1]).powi(2)).sqrt();
                    (p[k] - nu[k]) / d
                })
                .sum()
        })
        .collect();
    assert!(pull[0].hypot(pull[1]) < 1e-9);
}

#[test]
fn median_at_a_sample_point() {
    // one vertex carries enough weight to be the geometric median
    let pts = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let s = MVSample::from_points(&pts).unwrap();
    let nu = mv_pmean(&s, 1.0, 1e-12).unwrap();
    assert!(nu[0].abs() < 1e-9 && nu[1].abs() < 1e-9, "{nu:?}");
}

#[test]
fn objective_never_increases() {
    let s = sample(vec![5.0, 5.0], 5_000, 4);
    for p in [1.0, 1.5, 3.0, 7.0] {
        let r = mv_pmean_with(&s, p, MvSolveOptions::default()).unwrap();
        assert!(r.converged, "p = {p}");
        // exact monotonicity up to rounding in the last few bits
        assert!(r.objective_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)), "p = {p}");
    }
}

#[test]
fn symmetric_law_keeps_means_at_centre() {
    let n = 50_000;
    let s = sample(vec![0.0, 0.0], n, 5);
    for p in [1.0, 2.0, 4.0] {
        let nu = mv_pmean(&s, p, 1e-10).unwrap();
        for v in nu {
            assert!(v.abs() < 5.0 / (n as f64).sqrt(), "p = {p}: {v}");
        }
    }
}

#[test]
fn rejects_bad_p() {
    let s = sample(vec![1.0, 0.0], 10, 1);
    assert!(matches!(mv_pmean(&s, 0.5, 1e-10), Err(Error::Domain(_))));
    assert!(mv_pmean(&s, f64::NAN, 1e-10).is_err());
}

#[test]
fn trajectory_is_reproducible_and_unit() {
    let spec = MVSNSpec::standard(vec![5.0, 5.0]).unwrap();
    let grid = [1.0, 2.0, 3.0];
    let a = trajectory(&spec, &grid, 20_000, 9).unwrap();
    let b = trajectory(&spec, &grid, 20_000, 9).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    for (_, tau) in a.reliable_tangents() {
        let len = tau.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!((len - 1.0).abs() < 1e-12);
    }
    assert!(a.entries.iter().all(|e| e.converged));
    let csv = a.to_csv();
    assert!(csv.starts_with("p,nu_1,nu_2,tau_1,tau_2,reliable\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn symmetric_trajectory_has_no_reliable_tangents() {
    let spec = MVSNSpec::standard(vec![0.0, 0.0]).unwrap();
    let t = trajectory(&spec, &[1.0, 2.0, 3.0], 20_000, 10).unwrap();
    assert_eq!(t.reliable_tangents().count(), 0);
    assert!(matches!(colinearity_score(&t, &[1.0, 0.0]), Err(Error::Undefined(_))));
}

#[test]
fn single_tangent_score_is_its_cosine() {
    let t = MVTrajectory {
        entries: vec![TrajectoryEntry {
            p: 1.0,
            nu: vec![0.0, 0.0],
            converged: true,
        }],
        tangents: vec![Tangent {
            p: 1.0,
            tau: Some(vec![0.6, 0.8]),
            delta_norm: 1.0,
            jackknife_se: 0.0,
        }],
    };
    assert!((colinearity_score(&t, &[2.0, 0.0]).unwrap() - 0.6).abs() < 1e-15);
    assert!(colinearity_score(&t, &[0.0, 0.0]).is_err());
}

#[test]
fn trajectory_rejects_bad_grids() {
    let s = sample(vec![1.0, 0.0], 100, 1);
    let o = TrajectoryOptions::default();
    assert!(trajectory_with(&s, &[], o).is_err());
    assert!(trajectory_with(&s, &[2.0, 1.0], o).is_err());
    assert!(trajectory_with(&s, &[0.5, 1.0], o).is_err());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn translation_and_rotation_equivariance(
            seed in 0u64..1000,
            p in 1.0f64..6.0,
            shift in prop::array::uniform2(-5.0f64..5.0),
            angle in 0.0f64..std::f64::consts::TAU,
        ) {
            let s = sample(vec![3.0, -1.0], 400, seed);
            let base = mv_pmean(&s, p, 1e-12).unwrap();
            let rows: Vec<Vec<f64>> = s.rows().map(|r| vec![r[0] + shift[0], r[1] + shift[1]]).collect();
            let moved = mv_pmean(&MVSample::from_points(&rows).unwrap(), p, 1e-12).unwrap();
            for i in 0..2 {
                prop_assert!((moved[i] - base[i] - shift[i]).abs() < 1e-9);
            }
            let (c, sn) = (angle.cos(), angle.sin());
            let rows: Vec<Vec<f64>> = s.rows().map(|r| vec![c * r[0] - sn * r[1], sn * r[0] + c * r[1]]).collect();
            let turned = mv_pmean(&MVSample::from_points(&rows).unwrap(), p, 1e-12).unwrap();
            let expect = [c * base[0] - sn * base[1], sn * base[0] + c * base[1]];
            for i in 0..2 {
                prop_assert!((turned[i] - expect[i]).abs() < 1e-8);
            }
        }
    }
}
