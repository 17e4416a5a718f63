//! Sufficient criteria for true skewness and auditable verdicts.
//!
//! Each criterion returns a [`SkewVerdict`] whose evidence list records every
//! check that was evaluated, with the numbers behind it. [`skew_verdict`]
//! runs them in a fixed order: monotone density, clopen threshold,
//! inflection points, then numeric certification of the traced curve.

mod clopen;
mod crossing;
mod inflection;
mod monotone;
mod numeric;
mod transform;

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::Result;

pub use clopen::{clopen_certify, clopen_threshold};
pub use crossing::{crossing_profile, CrossingProfile};
pub use inflection::{inflection_criterion, InflectionPath, InflectionReport, Relaxations};
pub use monotone::check_monotone_density;
pub use numeric::{default_certify_grid, numeric_certify, MIN_CERTIFY_POINTS};
pub use transform::{convex_transform_verdict, ConvexMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    TrulyPositive,
    TrulyNegative,
    Symmetric,
    NotTrulyPositive,
    Indeterminate,
}

impl Conclusion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Conclusion::TrulyPositive => "truly_positive",
            Conclusion::TrulyNegative => "truly_negative",
            Conclusion::Symmetric => "symmetric",
            Conclusion::NotTrulyPositive => "not_truly_positive",
            Conclusion::Indeterminate => "indeterminate",
        }
    }

    pub fn is_conclusive(&self) -> bool {
        *self != Conclusion::Indeterminate
    }
}

/// How a conclusion is backed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    /// The criterion holds by closed-form or exact checks.
    Analytic,
    /// The criterion was verified on a finite grid.
    Numeric,
    /// A counterexample was found.
    Refuted,
}

/// A concrete reason a distribution is not truly positively skewed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The median does not exceed the mode.
    MedianBelowMode { nu0: f64, nu1: f64 },
    /// `ν` decreases at `p`, certified beyond the error bounds.
    Decrease { p: f64, difference: f64, uncertainty: f64 },
}

/// One evaluated check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub criterion: String,
    /// p range or parameter condition the check covers.
    pub scope: String,
    pub pass: bool,
    pub numbers: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Evidence {
    pub fn new(criterion: &str, scope: impl Into<String>, pass: bool) -> Self {
        Self {
            criterion: criterion.to_string(),
            scope: scope.into(),
            pass,
            numbers: BTreeMap::new(),
            note: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.numbers.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewVerdict {
    pub distribution: String,
    pub conclusion: Conclusion,
    /// Absent for indeterminate verdicts.
    pub grade: Option<Grade>,
    /// Checks of the criterion that decided the verdict.
    pub evidence: Vec<Evidence>,
    /// Checks of earlier pipeline stages that were inconclusive.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub earlier_stages: Vec<Evidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl SkewVerdict {
    pub(crate) fn new(spec: &DistributionSpec, conclusion: Conclusion, grade: Option<Grade>) -> Self {
        Self {
            distribution: spec.describe(),
            conclusion,
            grade,
            evidence: Vec::new(),
            earlier_stages: Vec::new(),
            witness: None,
        }
    }

    pub(crate) fn indeterminate(spec: &DistributionSpec, evidence: Vec<Evidence>) -> Self {
        Self {
            evidence,
            ..Self::new(spec, Conclusion::Indeterminate, None)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Options for [`skew_verdict`].
#[derive(Debug, Clone, Default)]
pub struct VerdictOptions {
    /// Grid for the numeric stage; defaults to [`default_certify_grid`].
    pub grid: Option<Vec<f64>>,
    /// Minimum slope `dν/dp` demanded by the numeric stage.
    pub min_slope: f64,
    pub relaxations: Relaxations,
}

/// Runs monotone → clopen → inflection → numeric and returns the first
/// conclusive verdict. Evidence of inconclusive earlier stages is kept in
/// `earlier_stages`.
pub fn skew_verdict(spec: &DistributionSpec, opts: &VerdictOptions) -> Result<SkewVerdict> {
    let mut evidence = Vec::new();
    let finish = |mut v: SkewVerdict, evidence: Vec<Evidence>| {
        v.earlier_stages = evidence;
        v
    };

    if let Some(v) = check_monotone_density(spec) {
        if v.conclusion.is_conclusive() {
            return Ok(finish(v, evidence));
        }
        evidence.extend(v.evidence);
    }

    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => default_certify_grid(spec)?,
    };

    if let Some(c) = clopen_threshold(spec) {
        let v = clopen_certify(spec, c, &grid)?;
        if v.conclusion.is_conclusive() {
            return Ok(finish(v, evidence));
        }
        evidence.extend(v.evidence);
    }

    let (_, v) = inflection_criterion(spec, opts.relaxations)?;
    if let Some(v) = v {
        if v.conclusion.is_conclusive() {
            return Ok(finish(v, evidence));
        }
        evidence.extend(v.evidence);
    }

    let v = numeric_certify(spec, &grid, opts.min_slope)?;
    Ok(finish(v, evidence))
}

pub(crate) fn fmt_range(grid: &[f64]) -> String {
    match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => format!("p in [{a}, {b}] ({} points)", grid.len()),
        _ => "empty grid".into(),
    }
}
