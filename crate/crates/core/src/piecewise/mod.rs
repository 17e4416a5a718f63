//! Piecewise-polynomial densities with exact rational coefficients.
//!
//! Pieces are half-open intervals `[a, b)` carrying a polynomial in the
//! absolute coordinate `x`. Convolution is carried out symbolically, so a
//! density built from rational inputs stays exact until it is evaluated.

mod lab;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lab::{
    closure_grid, counterexample_density, counterexample_report, linear_closure_check, linear_density,
    CounterexampleReport, LinearClosureReport,
};

pub type Rational = BigRational;

/// Best rational approximation of `x` by continued fractions, exact for
/// short decimals such as `0.6 → 3/5`.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("{x} has no rational value")));
    }
    let neg = x < 0.0;
    let mut rem = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let target = x.abs();
    for _ in 0..64 {
        let a = rem.floor();
        let ai = BigInt::from(a as u64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let approx = p1.to_f64().unwrap() / q1.to_f64().unwrap();
        if (approx - target).abs() <= 1e-15 * target.max(1e-300) || q1 > BigInt::from(1_000_000_000_000u64) {
            break;
        }
        let frac = rem - a;
        if frac == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    let r = BigRational::new(p1, q1);
    Ok(if neg { -r } else { r })
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn eval_f64(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn eval_exact(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

fn antiderivative(coeffs: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero()];
    for (i, c) in coeffs.iter().enumerate() {
        out.push(c / Rational::from_integer(BigInt::from(i + 1)));
    }
    out
}

fn derivative(coeffs: &[Rational]) -> Vec<Rational> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
        .collect()
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_assign(acc: &mut Vec<Rational>, other: &[Rational], sign: &Rational) {
    if acc.len() < other.len() {
        acc.resize(other.len(), Rational::zero());
    }
    for (i, c) in other.iter().enumerate() {
        acc[i] += c * sign;
    }
}

fn trim(mut coeffs: Vec<Rational>) -> Vec<Rational> {
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(Rational::zero());
    }
    coeffs
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// One polynomial piece on `[a, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPiece {
    pub a: Rational,
    pub b: Rational,
    /// Coefficients in ascending powers of the absolute coordinate.
    pub coeffs: Vec<Rational>,
}

impl PolyPiece {
    pub fn new(a: Rational, b: Rational, coeffs: Vec<Rational>) -> Self {
        Self {
            a,
            b,
            coeffs: trim(coeffs),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn mass(&self) -> Rational {
        let anti = antiderivative(&self.coeffs);
        eval_exact(&anti, &self.b) - eval_exact(&anti, &self.a)
    }
}

#[derive(Debug, Clone)]
struct FloatPiece {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
    deriv: Vec<f64>,
    anti: Vec<f64>,
    anti_at_a: f64,
    mass_before: f64,
}

/// Monotonicity summary of a piecewise density over its support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monotonicity {
    pub non_increasing: bool,
    pub non_decreasing: bool,
    pub strict_drop: bool,
    pub strict_rise: bool,
    /// True when the check is exact (every piece has degree at most two).
    pub exact: bool,
}

/// A density made of finitely many polynomial pieces on bounded intervals.
#[derive(Clone)]
pub struct PiecewisePolyDensity {
    pieces: Vec<PolyPiece>,
    float: Vec<FloatPiece>,
}

impl fmt::Debug for PiecewisePolyDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewisePolyDensity").field("pieces", &self.pieces).finish()
    }
}

impl PartialEq for PiecewisePolyDensity {
    fn eq(&self, other: &Self) -> bool {
        self.pieces == other.pieces
    }
}

impl PiecewisePolyDensity {
    /// Validates contiguity, non-negativity and unit mass.
    pub fn new(pieces: Vec<PolyPiece>) -> Result<Self> {
        let d = Self::new_unchecked(pieces)?;
        let mass = d.total_mass_exact();
        let residual = to_f64(&(mass - Rational::one())).abs();
        if residual > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "piecewise density integrates to 1 + {residual:e}"
            )));
        }
        for p in &d.float {
            for i in 0..=64 {
                let x = p.a + (p.b - p.a) * (i as f64) / 64.0;
                let v = eval_f64(&p.coeffs, x);
                if v < -1e-12 {
                    return Err(Error::InvalidParameter(format!("piecewise density is negative at x = {x}")));
                }
            }
        }
        Ok(d)
    }

    fn new_unchecked(pieces: Vec<PolyPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter("piecewise density needs at least one piece".into()));
        }
        for p in &pieces {
            if p.b <= p.a {
                return Err(Error::InvalidParameter(format!("empty interval [{}, {})", p.a, p.b)));
            }
        }
        for w in pieces.windows(2) {
            if w[0].b != w[1].a {
                return Err(Error::InvalidParameter(format!(
                    "pieces are not contiguous at {} / {}",
                    w[0].b, w[1].a
                )));
            }
        }
        let mut float = Vec::with_capacity(pieces.len());
        let mut acc = Rational::zero();
        for p in &pieces {
            let anti = antiderivative(&p.coeffs);
            let anti_f: Vec<f64> = anti.iter().map(to_f64).collect();
            let a = to_f64(&p.a);
            float.push(FloatPiece {
                a,
                b: to_f64(&p.b),
                coeffs: p.coeffs.iter().map(to_f64).collect(),
                deriv: derivative(&p.coeffs).iter().map(to_f64).collect(),
                anti_at_a: eval_f64(&anti_f, a),
                anti: anti_f,
                mass_before: to_f64(&acc),
            });
            acc += p.mass();
        }
        Ok(Self { pieces, float })
    }

    pub fn pieces(&self) -> &[PolyPiece] {
        &self.pieces
    }

    pub fn lower(&self) -> f64 {
        self.float[0].a
    }

    pub fn upper(&self) -> f64 {
        self.float[self.float.len() - 1].b
    }

    /// Piece boundaries, including both ends of the support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.float.iter().map(|p| p.a).collect();
        v.push(self.upper());
        v
    }

    pub fn total_mass_exact(&self) -> Rational {
        self.pieces.iter().map(PolyPiece::mass).fold(Rational::zero(), |a, b| a + b)
    }

    /// `∫ x f(x) dx`, exactly.
    pub fn mean_exact(&self) -> Rational {
        let x = vec![Rational::zero(), Rational::one()];
        self.pieces
            .iter()
            .map(|p| {
                let anti = antiderivative(&poly_mul(&x, &p.coeffs));
                eval_exact(&anti, &p.b) - eval_exact(&anti, &p.a)
            })
            .fold(Rational::zero(), |a, b| a + b)
    }

    fn locate(&self, x: f64) -> Option<&FloatPiece> {
        if !(x >= self.lower() && x < self.upper()) {
            return None;
        }
        let idx = self.float.partition_point(|p| p.a <= x);
        self.float.get(idx.saturating_sub(1))
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.locate(x).map_or(0.0, |p| eval_f64(&p.coeffs, x).max(0.0))
    }

    /// `f′/f` inside a piece; `None` where the density vanishes.
    pub fn log_derivative(&self, x: f64) -> Option<f64> {
        let p = self.locate(x)?;
        let v = eval_f64(&p.coeffs, x);
        (v > 0.0).then(|| eval_f64(&p.deriv, x) / v)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower() {
            return 0.0;
        }
        if x >= self.upper() {
            return 1.0;
        }
        let p = self.locate(x).expect("x inside support");
        (p.mass_before + eval_f64(&p.anti, x) - p.anti_at_a).clamp(0.0, 1.0)
    }

    pub fn monotonicity(&self) -> Monotonicity {
        let mut m = Monotonicity {
            non_increasing: true,
            non_decreasing: true,
            strict_drop: false,
            strict_rise: false,
            exact: self.pieces.iter().all(|p| p.degree() <= 2),
        };
        let note_slope = |s: f64, m: &mut Monotonicity| {
            if s > 0.0 {
                m.non_increasing = false;
                m.strict_rise = true;
            } else if s < 0.0 {
                m.non_decreasing = false;
                m.strict_drop = true;
            }
        };
        for (i, (p, fp)) in self.pieces.iter().zip(&self.float).enumerate() {
            let d = derivative(&p.coeffs);
            if p.degree() <= 2 {
                for end in [&p.a, &p.b] {
                    let s = to_f64(&eval_exact(&d, end));
                    note_slope(s, &mut m);
                }
            } else {
                for k in 0..=256 {
                    let x = fp.a + (fp.b - fp.a) * (k as f64) / 256.0;
                    note_slope(eval_f64(&fp.deriv, x), &mut m);
                }
            }
            if i + 1 < self.pieces.len() {
                let left = eval_exact(&p.coeffs, &p.b);
                let next = &self.pieces[i + 1];
                let right = eval_exact(&next.coeffs, &next.a);
                note_slope(to_f64(&(right - left)), &mut m);
            }
        }
        m
    }

    /// Exact convolution of two piecewise-polynomial densities.
    pub fn convolve(&self, other: &PiecewisePolyDensity) -> Result<PiecewisePolyDensity> {
        let mut sums: Vec<Rational> = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                for x in [&p.a, &p.b] {
                    for y in [&q.a, &q.b] {
                        sums.push(x + y);
                    }
                }
            }
        }
        sums.sort();
        sums.dedup();

        let mut out = Vec::new();
        for w in sums.windows(2) {
            let (z0, z1) = (&w[0], &w[1]);
            let zm = (z0 + z1) / Rational::from_integer(BigInt::from(2));
            let mut acc: Vec<Rational> = vec![Rational::zero()];
            for p in &self.pieces {
                for q in &other.pieces {
                    // x ranges over [max(a, z−d), min(b, z−c)]
                    if zm <= &p.a + &q.a || zm >= &p.b + &q.b {
                        continue;
                    }
                    let lo = if zm.clone() - &q.b > p.a {
                        (Rational::one(), -q.b.clone())
                    } else {
                        (Rational::zero(), p.a.clone())
                    };
                    let hi = if zm.clone() - &q.a < p.b {
                        (Rational::one(), -q.a.clone())
                    } else {
                        (Rational::zero(), p.b.clone())
                    };
                    let anti = pair_antiderivative(&p.coeffs, &q.coeffs);
                    let upper = substitute_linear(&anti, &hi.0, &hi.1);
                    let lower = substitute_linear(&anti, &lo.0, &lo.1);
                    poly_add_assign(&mut acc, &upper, &Rational::one());
                    poly_add_assign(&mut acc, &lower, &-Rational::one());
                }
            }
            out.push(PolyPiece::new(z0.clone(), z1.clone(), acc));
        }
        // Leading and trailing zero pieces cannot occur, but interior ones can.
        let d = Self::new_unchecked(out)?;
        let residual = to_f64(&(d.total_mass_exact() - Rational::one())).abs();
        if residual > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "convolution mass residual {residual:e}; inputs must be normalized"
            )));
        }
        Ok(d)
    }

    pub fn to_json(&self) -> PiecewiseJson {
        PiecewiseJson(
            self.pieces
                .iter()
                .map(|p| PieceJson {
                    interval: [RationalRepr::from(&p.a), RationalRepr::from(&p.b)],
                    coefficients: p.coeffs.iter().map(RationalRepr::from).collect(),
                })
                .collect(),
        )
    }

    pub fn from_json(json: &PiecewiseJson) -> Result<Self> {
        let pieces = json
            .0
            .iter()
            .map(|p| {
                Ok(PolyPiece::new(
                    p.interval[0].to_rational()?,
                    p.interval[1].to_rational()?,
                    p.coefficients.iter().map(RationalRepr::to_rational).collect::<Result<_>>()?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pieces)
    }
}

/// Antiderivative in `x` of `P(x)·Q(z − x)` as a bivariate table `[x power][z power]`.
fn pair_antiderivative(p: &[Rational], q: &[Rational]) -> Vec<Vec<Rational>> {
    let dx = p.len() + q.len();
    let dz = q.len();
    let mut b = vec![vec![Rational::zero(); dz]; dx];
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            for m in 0..=j {
                let mut c = pi * qj * Rational::from_integer(binomial(j, m));
                if m % 2 == 1 {
                    c = -c;
                }
                b[i + m][j - m] += c;
            }
        }
    }
    let mut anti = vec![vec![Rational::zero(); dz]; dx + 1];
    for (i, row) in b.into_iter().enumerate() {
        let k = Rational::from_integer(BigInt::from(i + 1));
        for (j, c) in row.into_iter().enumerate() {
            anti[i + 1][j] = c / &k;
        }
    }
    anti
}

/// Evaluates the bivariate table at `x = slope·z + offset`, giving a polynomial in `z`.
fn substitute_linear(table: &[Vec<Rational>], slope: &Rational, offset: &Rational) -> Vec<Rational> {
    let lin = vec![offset.clone(), slope.clone()];
    let mut power = vec![Rational::one()];
    let mut out: Vec<Rational> = vec![Rational::zero()];
    for row in table {
        let mut zpart: Vec<Rational> = row.clone();
        if zpart.is_empty() {
            zpart.push(Rational::zero());
        }
        let term = poly_mul(&power, &zpart);
        poly_add_assign(&mut out, &term, &Rational::one());
        power = poly_mul(&power, &lin);
    }
    out
}

/// A number written either as a JSON number or as an exact `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalRepr {
    Number(f64),
    Text(String),
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        if r.denom().is_one() {
            RationalRepr::Text(r.numer().to_string())
        } else {
            RationalRepr::Text(format!("{}/{}", r.numer(), r.denom()))
        }
    }
}

impl RationalRepr {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalRepr::Number(x) => rational_from_f64(*x),
            RationalRepr::Text(s) => parse_rational(s),
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse {
        token: s.to_string(),
        expected: "an integer, a fraction `p/q`, or a decimal".into(),
    };
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = t.parse::<BigInt>() {
        return Ok(Rational::from_integer(n));
    }
    // Decimal literal, read exactly.
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(bad)?;
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(n, d);
    Ok(if sign < 0 { -r } else { r })
}

/// JSON form: a list of `{ "interval": [a, b], "coefficients": [c0, c1, ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PiecewiseJson(pub Vec<PieceJson>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceJson {
    pub interval: [RationalRepr; 2],
    pub coefficients: Vec<RationalRepr>,
}

/// Uniform density on `[a, b)` as a single constant piece.
pub fn uniform_piece(a: Rational, b: Rational) -> Result<PiecewisePolyDensity> {
    let h = Rational::one() / (&b - &a);
    PiecewisePolyDensity::new(vec![PolyPiece::new(a, b, vec![h])])
}
