use std::fmt;
use std::sync::Arc;

use super::{check_monotone_density, Conclusion, Evidence, SkewVerdict};
use crate::dist::{DistributionSpec, PowerEnvelope, UserDensity};
use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A convex, strictly increasing map `u` with its inverse `w` and `w′`.
#[derive(Clone)]
pub struct ConvexMap {
    pub name: String,
    u: RealFn,
    w: RealFn,
    w_prime: RealFn,
    moment_sup: f64,
    envelope: Option<PowerEnvelope>,
}

impl fmt::Debug for ConvexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexMap").field("name", &self.name).finish()
    }
}

impl ConvexMap {
    pub fn new(
        name: impl Into<String>,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            u: Arc::new(u),
            w: Arc::new(w),
            w_prime: Arc::new(w_prime),
            moment_sup: f64::INFINITY,
            envelope: None,
        }
    }

    /// Declares the moment ceiling of the pushforward when it is finite.
    pub fn with_moment_sup(mut self, q: f64) -> Self {
        self.moment_sup = q;
        self
    }

    /// Declares a power bound on the pushforward's upper tail.
    pub fn with_envelope(mut self, envelope: PowerEnvelope) -> Self {
        self.envelope = Some(envelope);
        self
    }

    /// `x ↦ x`.
    pub fn identity() -> Self {
        Self::new("x", |x| x, |y| y, |_| 1.0)
    }

    /// `x ↦ x²` on the positive half-line.
    pub fn square() -> Self {
        Self::new("x^2", |x| x * x, f64::sqrt, |y| 0.5 / y.sqrt())
    }

    /// `x ↦ k·eˣ`.
    pub fn scaled_exp(k: f64) -> Self {
        Self::new(format!("{k}*exp(x)"), move |x| k * x.exp(), move |y| (y / k).ln(), |y| 1.0 / y)
    }

    pub fn apply(&self, x: f64) -> f64 {
        (self.u)(x)
    }
}

/// Convex-transform criterion: when `X` has a decreasing density and `u`
/// is convex and strictly increasing, `u(X)` is truly positively skewed.
///
/// Returns the verdict with the pushforward distribution, whose density is
/// `f_X(w(y))·w′(y)` and CDF `F_X(w(y))`.
pub fn convex_transform_verdict(base: &DistributionSpec, map: &ConvexMap) -> Result<(SkewVerdict, DistributionSpec)> {
    let mono = check_monotone_density(base);
    let grade = match &mono {
        Some(v) if v.conclusion == Conclusion::TrulyPositive => v.grade,
        _ => None,
    };
    if grade.is_none() {
        return Err(Error::Precondition(format!(
            "{} does not have a decreasing density on its support",
            base.describe()
        )));
    }

    // spot checks on 100 points spread over the bulk of the base law
    let xs: Vec<f64> = (0..100).map(|i| base.quantile(0.0005 + 0.999 * i as f64 / 99.0)).collect();
    let mut worst: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let y = xs[(i * 37 + 11) % xs.len()];
        let (ux, uy, um) = (map.apply(x), map.apply(y), map.apply(0.5 * (x + y)));
        let gap = um - 0.5 * (ux + uy);
        if gap > 1e-12 * (1.0 + ux.abs().max(uy.abs())) {
            return Err(Error::Precondition(format!(
                "{} fails midpoint convexity at ({x}, {y})",
                map.name
            )));
        }
        worst = worst.max(gap);
    }
    for w in xs.windows(2) {
        if w[1] > w[0] && !(map.apply(w[1]) > map.apply(w[0])) {
            return Err(Error::Precondition(format!(
                "{} is not strictly increasing at {}",
                map.name, w[0]
            )));
        }
    }

    let sup = base.support();
    let (lo, hi) = (map.apply(sup.lower), map.apply(sup.upper));
    let (b1, b2, m) = (base.clone(), base.clone(), map.clone());
    let m2 = map.clone();
    let mut user = UserDensity::new(
        format!("{}({})", map.name, base.describe()),
        lo,
        hi,
        move |y| {
            let x = (m.w)(y);
            b1.pdf(x) * (m.w_prime)(y)
        },
    )
    .with_cdf(move |y| b2.cdf((m2.w)(y)))
    .with_moment_sup(map.moment_sup);
    if let Some(env) = map.envelope {
        user = user.with_envelope(env);
    }
    let pushed = DistributionSpec::user(user)?;

    let mut v = SkewVerdict::new(&pushed, Conclusion::TrulyPositive, grade);
    v.evidence.push(
        Evidence::new("convex_transform", format!("u = {} applied to {}", map.name, base.describe()), true)
            .with("convexity_worst_gap", worst)
            .note("base density decreasing; u convex and strictly increasing at 100 spot checks"),
    );
    Ok((v, pushed))
}
