use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dist::DistributionSpec;
use crate::piecewise::{PiecewisePolyDensity, PolyPiece, Rational};
use crate::pmean::{dnu_sign, p_grid, trace_curve, DnuSign};

fn spec(text: &str) -> DistributionSpec {
    text.parse().unwrap()
}

fn half_grid() -> Vec<f64> {
    p_grid(1.0, 6.0, 0.5).unwrap()
}

/// Simpson's rule on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn levy_single_crossing_at_median() {
    let prof = crossing_profile(&spec("levy(mu=0,lambda=1)"), 1.0).unwrap();
    assert_eq!(prof.crossing_count, 1);
    assert!(prof.satisfies_l2);
    assert!(prof.nu > 2.0 / 3.0);
}

#[test]
fn normal_has_no_crossing() {
    let prof = crossing_profile(&spec("normal(mu=0,sigma=1)"), 2.0).unwrap();
    assert_eq!(prof.crossing_count, 0);
    assert!(prof.c_p.is_none());
    assert!(!prof.satisfies_l2);
}

#[test]
fn chi_squared_ratio_peak_matches_critical_point() {
    // log f(ν−x) − log f(ν+x) = (k/2−1)·log((ν−x)/(ν+x)) + x peaks at √(ν² − (k−2)ν)
    let prof = crossing_profile(&spec("chi_squared(k=5)"), 1.0).unwrap();
    let nu = prof.nu;
    let peak = (nu * nu - 3.0 * nu).sqrt();
    assert!((prof.ratio_peak.unwrap() - peak).abs() < 1e-7, "{prof:?}");
    assert!(prof.c_p.unwrap() > peak);
}

#[test]
fn densities_balance_at_crossing() {
    for (text, p) in [
        ("gamma(shape=3,scale=1)", 2.0),
        ("levy(mu=0,lambda=1)", 1.3),
        ("weibull(k=2,lambda=1)", 4.0),
        ("skew_normal(alpha=2)", 3.0),
    ] {
        let prof = crossing_profile(&spec(text), p).unwrap();
        let r = prof.residual_at_crossing.unwrap();
        assert!(r.abs() <= 1e-8 * prof.density_at_nu, "{text}: {r}");
    }
}

#[test]
fn monotone_density_examples() {
    let v = check_monotone_density(&spec("weibull(k=0.8,lambda=1)")).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert_eq!(v.grade, Some(Grade::Analytic));
    let v = check_monotone_density(&spec("chi_squared(k=2)")).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert!(check_monotone_density(&spec("weibull(k=2,lambda=1)")).is_none());
    assert!(check_monotone_density(&spec("uniform(a=0,b=1)")).is_none());
    let mirrored = spec("exponential(rate=1)").affine(-1.0, 0.0).unwrap();
    assert_eq!(check_monotone_density(&mirrored).unwrap().conclusion, Conclusion::TrulyNegative);
}

#[test]
fn monotone_density_is_exact_for_step_densities() {
    let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let d = PiecewisePolyDensity::new(vec![
        PolyPiece::new(q(0, 1), q(1, 1), vec![q(3, 5)]),
        PolyPiece::new(q(1, 1), q(2, 1), vec![q(2, 5)]),
    ])
    .unwrap();
    let v = check_monotone_density(&DistributionSpec::piecewise(d).unwrap()).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert_eq!(v.grade, Some(Grade::Analytic));
}

#[test]
fn sampled_monotonicity_sees_a_far_mode() {
    // the Lévy mode sits far below the bulk of a uniform grid
    assert!(check_monotone_density(&spec("levy(mu=0,lambda=1)")).is_none());
    assert!(check_monotone_density(&spec("log_logistic(beta=1.5)")).is_none());
}

#[test]
fn clopen_levy() {
    let s = spec("levy(mu=0,lambda=1)");
    let c = clopen_threshold(&s).unwrap();
    assert!((c - 2.0 / 3.0).abs() < 1e-15);
    let v = clopen_certify(&s, c, &p_grid(1.0, 1.45, 0.05).unwrap()).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert_eq!(v.grade, Some(Grade::Analytic));
    assert!(v.evidence.iter().all(|e| e.pass));
}

#[test]
fn clopen_chi_squared_seven() {
    let s = spec("chi_squared(k=7)");
    assert_eq!(clopen_threshold(&s), Some(5.0));
    let v = clopen_certify(&s, 5.0, &half_grid()).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    let nu1 = v.evidence[0].numbers["nu1"];
    // independent median: bisection on a Simpson-integrated CDF
    let pdf = |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            x.powf(2.5) * (-x / 2.0).exp() / (2f64.powf(3.5) * 3.323_350_970_447_843)
        }
    };
    let (mut a, mut b) = (5.0, 8.0);
    for _ in 0..50 {
        let m = 0.5 * (a + b);
        if simpson(pdf, 0.0, m, 20_000) < 0.5 {
            a = m;
        } else {
            b = m;
        }
    }
    assert!((nu1 - a).abs() < 1e-6, "{nu1} vs {a}");
    assert!((nu1 - 6.346).abs() < 1e-3);
}

#[test]
fn clopen_weibull_past_threshold_is_refuted() {
    let s = spec("weibull(k=3.3,lambda=1)");
    let v = clopen_certify(&s, clopen_threshold(&s).unwrap(), &half_grid()).unwrap();
    assert_eq!(v.conclusion, Conclusion::NotTrulyPositive);
    match v.witness {
        Some(Witness::MedianBelowMode { nu0, nu1 }) => assert!(nu1 < nu0),
        other => panic!("unexpected witness {other:?}"),
    }
}

#[test]
fn log_logistic_corollary_path() {
    let (report, v) = inflection_criterion(&spec("log_logistic(beta=1.5)"), Relaxations::default()).unwrap();
    assert_eq!(report.path, InflectionPath::OneInflection);
    assert!(report.theta2.unwrap() < 1.0);
    assert!((report.median.unwrap() - 1.0).abs() < 1e-12);
    let v = v.unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert_eq!(v.grade, Some(Grade::Analytic));
}

#[test]
fn log_logistic_past_two_leaves_corollary() {
    let s = spec("log_logistic(beta=2.5)");
    let (lo, _) = s.family().log_logistic_inflection_brackets().unwrap();
    assert!(lo > 0.0);
    let (report, v) = inflection_criterion(&s, Relaxations::default()).unwrap();
    assert_eq!(report.path, InflectionPath::TwoInflections);
    assert!(report.theta1.unwrap() > 0.0);
    assert!(!report.upper_bound_check);
    assert_ne!(v.unwrap().conclusion, Conclusion::TrulyPositive);
}

#[test]
fn log_logistic_one_is_monotone() {
    let s = spec("log_logistic(beta=1)");
    let (report, v) = inflection_criterion(&s, Relaxations::default()).unwrap();
    assert_eq!(report.path, InflectionPath::Inapplicable);
    assert!(v.is_none());
    let m = check_monotone_density(&s).unwrap();
    assert_eq!(m.conclusion, Conclusion::TrulyPositive);
}

#[test]
fn two_inflection_levy_passes_theorem() {
    let (report, v) = inflection_criterion(&spec("levy(mu=0,lambda=1)"), Relaxations::default()).unwrap();
    assert_eq!(report.path, InflectionPath::TwoInflections);
    assert!(report.lower_bound_check && report.upper_bound_check && report.median_condition);
    assert_eq!(v.unwrap().grade, Some(Grade::Numeric));
}

#[test]
fn relaxations_use_the_crossing_point() {
    let relax = Relaxations {
        median_via_crossing: true,
        mode_via_crossing: false,
        upper_from_crossing: true,
    };
    let (report, _) = inflection_criterion(&spec("levy(mu=0,lambda=1)"), relax).unwrap();
    let c1 = report.c1.unwrap();
    let direct = crossing_profile(&spec("levy(mu=0,lambda=1)"), 1.0).unwrap().c_p.unwrap();
    assert_eq!(c1, direct);
    assert!(report.median_condition);
}

#[test]
fn convex_transform_examples() {
    let lambda = 2.0;
    let base = DistributionSpec::exponential(lambda).unwrap();
    let k = 1.5;
    let (v, pareto) = convex_transform_verdict(&base, &ConvexMap::scaled_exp(k).with_moment_sup(lambda)).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    for y in [1.6, 2.0, 3.0, 10.0] {
        let want = 1.0 - (k / y).powf(lambda);
        assert!((pareto.cdf(y) - want).abs() < 1e-12);
    }
    let (_, sq) = convex_transform_verdict(&base, &ConvexMap::square()).unwrap();
    for y in [0.01, 0.3, 1.0, 4.0] {
        // Weibull(1/2, 1/λ²)
        let want = 1.0 - (-(y * lambda * lambda).sqrt()).exp();
        assert!((sq.cdf(y) - want).abs() < 1e-12);
        assert!((sq.pdf(y) - lambda * (-lambda * y.sqrt()).exp() / (2.0 * y.sqrt())).abs() < 1e-12);
    }
    let (id, _) = convex_transform_verdict(&base, &ConvexMap::identity()).unwrap();
    let mono = check_monotone_density(&base).unwrap();
    assert_eq!((id.conclusion, id.grade), (mono.conclusion, mono.grade));
}

#[test]
fn convex_transform_preconditions() {
    let base = DistributionSpec::exponential(1.0).unwrap();
    let sqrt = ConvexMap::new("sqrt", f64::sqrt, |y| y * y, |y| 2.0 * y);
    assert!(matches!(convex_transform_verdict(&base, &sqrt), Err(crate::Error::Precondition(_))));
    let hump = spec("weibull(k=2,lambda=1)");
    assert!(matches!(
        convex_transform_verdict(&hump, &ConvexMap::square()),
        Err(crate::Error::Precondition(_))
    ));
}

#[test]
fn skew_normal_numeric_verdicts() {
    let g = half_grid();
    let pos = numeric_certify(&spec("skew_normal(alpha=5)"), &g, 0.0).unwrap();
    assert_eq!(pos.conclusion, Conclusion::TrulyPositive);
    assert_eq!(pos.grade, Some(Grade::Numeric));
    let neg = numeric_certify(&spec("skew_normal(alpha=-5)"), &g, 0.0).unwrap();
    assert_eq!(neg.conclusion, Conclusion::TrulyNegative);
    let sym = numeric_certify(&spec("skew_normal(alpha=0)"), &g, 0.0).unwrap();
    assert_eq!(sym.conclusion, Conclusion::Symmetric);
}

#[test]
fn skew_normal_mirror() {
    for a in [0.5, 2.0, 5.0] {
        let pos = skew_verdict(&DistributionSpec::skew_normal(a).unwrap(), &VerdictOptions::default()).unwrap();
        let neg = skew_verdict(&DistributionSpec::skew_normal(-a).unwrap(), &VerdictOptions::default()).unwrap();
        assert_eq!(pos.conclusion, Conclusion::TrulyPositive, "alpha = {a}");
        assert_eq!(neg.conclusion, Conclusion::TrulyNegative, "alpha = {a}");
    }
}

#[test]
fn short_grids_are_rejected() {
    let r = numeric_certify(&spec("gamma(shape=0.5,scale=1)"), &[1.0, 2.0, 3.0], 0.0);
    assert!(matches!(r, Err(crate::Error::Precondition(_))));
    let g = default_certify_grid(&spec("levy(mu=0,lambda=1)")).unwrap();
    assert!(g.len() >= MIN_CERTIFY_POINTS);
    assert!((g[g.len() - 1] - 1.45).abs() < 1e-12);
}

#[test]
fn weibull_threshold_by_numeric_certification() {
    let g = half_grid();
    for k in [0.5, 1.5, 3.2] {
        let v = numeric_certify(&DistributionSpec::weibull(k, 1.0).unwrap(), &g, 0.0).unwrap();
        assert_eq!(v.conclusion, Conclusion::TrulyPositive, "k = {k}");
    }
    for k in [3.3, 6.0] {
        let v = numeric_certify(&DistributionSpec::weibull(k, 1.0).unwrap(), &g, 0.0).unwrap();
        assert_eq!(v.conclusion, Conclusion::NotTrulyPositive, "k = {k}");
        assert!(matches!(v.witness, Some(Witness::MedianBelowMode { .. })));
    }
}

#[test]
fn weibull_approaching_threshold_stays_non_decreasing() {
    let threshold = 1.0 / (1.0 - std::f64::consts::LN_2);
    let g = half_grid();
    for n in 1..=6 {
        let k = threshold - 0.5f64.powi(n);
        let c = trace_curve(&DistributionSpec::weibull(k, 1.0).unwrap(), &g).unwrap();
        for w in c.points.windows(2) {
            assert!(w[1].nu > w[0].nu, "k = {k}");
        }
    }
    let c = trace_curve(&DistributionSpec::weibull(threshold, 1.0).unwrap(), &g).unwrap();
    for w in c.points.windows(2) {
        assert!(w[1].nu - w[0].nu > -10.0 * 1e-10);
    }
}

#[test]
fn half_line_laws_are_never_truly_negative() {
    for text in [
        "exponential(rate=2)",
        "gamma(shape=4,scale=1)",
        "weibull(k=5,lambda=1)",
        "chi_squared(k=4)",
        "pareto(k=1,lambda=3)",
        "log_logistic(beta=3)",
    ] {
        let v = skew_verdict(&spec(text), &VerdictOptions::default()).unwrap();
        assert_ne!(v.conclusion, Conclusion::TrulyNegative, "{text}");
    }
}

#[test]
fn single_crossing_implies_increase() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..50 {
        let s = match rng.random_range(0..4) {
            0 => DistributionSpec::gamma(rng.random_range(1.2..6.0), 1.0).unwrap(),
            1 => DistributionSpec::weibull(rng.random_range(1.1..3.2), 1.0).unwrap(),
            2 => DistributionSpec::skew_normal(rng.random_range(-4.0..4.0)).unwrap(),
            _ => DistributionSpec::beta(rng.random_range(1.5..4.0), rng.random_range(1.5..4.0)).unwrap(),
        };
        let p = rng.random_range(1.0..5.0);
        let prof = crossing_profile(&s, p).unwrap();
        if prof.satisfies_l2 {
            checked += 1;
            assert_eq!(dnu_sign(&s, p).unwrap(), DnuSign::Increasing, "{} p = {p}", s.describe());
        }
    }
    assert!(checked >= 10);
}

#[test]
fn verdict_pipeline_orders_stages() {
    let v = skew_verdict(&spec("weibull(k=2,lambda=1)"), &VerdictOptions::default()).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert_eq!(v.evidence[0].criterion, "clopen_threshold");
    let v = skew_verdict(&spec("weibull(k=4,lambda=1)"), &VerdictOptions::default()).unwrap();
    assert_eq!(v.conclusion, Conclusion::NotTrulyPositive);
    assert!(matches!(v.witness, Some(Witness::MedianBelowMode { .. })));
    let v = skew_verdict(&spec("log_logistic(beta=1.5)"), &VerdictOptions::default()).unwrap();
    assert_eq!(v.evidence[0].criterion, "inflection_points");
    let v = skew_verdict(&spec("gamma(shape=3,scale=1)"), &VerdictOptions::default()).unwrap();
    assert_eq!(v.conclusion, Conclusion::TrulyPositive);
    assert!(v.evidence.iter().all(|e| e.pass));
    assert!(!v.earlier_stages.is_empty());
}

#[test]
fn verdict_json_round_trip() {
    let v = skew_verdict(&spec("weibull(k=4,lambda=1)"), &VerdictOptions::default()).unwrap();
    let text = v.to_json().unwrap();
    assert!(text.contains("\"conclusion\": \"not_truly_positive\""));
    assert!(text.contains("\"kind\": \"median_below_mode\""));
    let back: SkewVerdict = serde_json::from_str(&text).unwrap();
    assert_eq!(back, v);
}
