use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::piecewise::{PiecewiseJson, PiecewisePolyDensity};
use crate::pmean::p_grid;

/// Output format of the main product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A p grid, either `{start, stop, step}` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

impl GridSpec {
    /// Parses `start:stop:step` or a comma-separated list.
    pub fn parse(text: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim().parse::<f64>().map_err(|_| Error::Parse {
                token: t.to_string(),
                expected: "a real number in the p grid".into(),
            })
        };
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    token: text.to_string(),
                    expected: "`start:stop:step`".into(),
                });
            }
            Ok(GridSpec::Range {
                start: num(parts[0])?,
                stop: num(parts[1])?,
                step: num(parts[2])?,
            })
        } else {
            Ok(GridSpec::List(text.split(',').map(num).collect::<Result<_>>()?))
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::Range { start, stop, step } => p_grid(*start, *stop, *step),
            GridSpec::List(v) => {
                if v.is_empty() || v.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter("p list must be non-empty and strictly increasing".into()));
                }
                Ok(v.clone())
            }
        }
    }
}

/// One number or a list of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Numbers {
    One(f64),
    Many(Vec<f64>),
}

impl Numbers {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Numbers::One(x) => vec![*x],
            Numbers::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Settings of one command. Every field is optional; values loaded with
/// `--config` take precedence over flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Mini-language string, or the path of a piecewise JSON density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<GridSpec>,
    /// Relative tolerance of the root solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Step height for `counterexample`, skewness vector for `mvsn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Numbers>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    /// Points per axis of the `mvsn` density grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        overlay!(self, top, command, distribution, p_grid, tol, min_slope, seed, lambda, n, mu, sigma, density_grid);
        if let Some(o) = &top.output {
            let mut out = self.output.take().unwrap_or_default();
            if o.path.is_some() {
                out.path = o.path.clone();
            }
            if o.format.is_some() {
                out.format = o.format;
            }
            self.output = Some(out);
        }
        self
    }

    /// Reads a config file, accepting either a bare config or a manifest
    /// written by a previous run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let inner = match value.get("config") {
            Some(c) if value.get("results").is_some() => c.clone(),
            _ => value,
        };
        Ok(serde_json::from_value(inner)?)
    }

    pub fn out_path(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }

    pub fn format(&self) -> Option<Format> {
        self.output.as_ref().and_then(|o| o.format)
    }

    /// The distribution, read from a piecewise JSON file when the text names
    /// an existing `.json` file.
    pub fn distribution(&self) -> Result<DistributionSpec> {
        let text = self
            .distribution
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("missing --dist".into()))?;
        let path = Path::new(text);
        if path.extension().is_some_and(|e| e == "json") && path.is_file() {
            let json: PiecewiseJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            return DistributionSpec::piecewise(PiecewisePolyDensity::from_json(&json)?);
        }
        DistributionSpec::parse(text)
    }
}

/// Run manifest: the resolved config plus headline results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub results: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Parses `a,b,c` into reals.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Error::Parse {
                token: t.to_string(),
                expected: "a comma-separated list of reals".into(),
            })
        })
        .collect()
}

/// Parses `a,b;c,d` into matrix rows.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';').map(parse_vector).collect()
}
