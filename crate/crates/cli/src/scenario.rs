//! Scenario documents: one body, one operation, its parameters and a seed.

use std::path::{Path, PathBuf};

use polyapprox::shape::constants;
use polyapprox::{ConvexBody, ConvexBodySpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Invalid { path: PathBuf, field: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Volumes,
    Net,
    Caps,
    ApproxEps,
    ApproxN,
    ApproxScaled,
    Shape,
    Certificate,
    Sweep,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub l: Vec<f64>,
    /// Index pair `(i, j)` for certificates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[usize; 2]>,
    /// Certificate `ε` as a multiple of the measured ratio, instead of `eps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Monte-Carlo sample count (Kubota projections, cap shells).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    /// Multiplies every upper bound before checking; below 1 it tightens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub operation: Operation,
    pub body: ConvexBodySpec,
    #[serde(default)]
    pub params: Params,
    pub seed: u64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    /// Parses and validates; `path` only labels diagnostics.
    pub fn parse(text: &str, path: &Path) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate().map_err(|(field, message)| ScenarioError::Invalid {
            path: path.to_path_buf(),
            field,
            message,
        })?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), (String, String)> {
        let bad = |field: &str, message: String| Err((field.to_string(), message));
        if self.name.trim().is_empty() {
            return bad("name", "must not be empty".into());
        }
        if let Err(e) = ConvexBody::from_spec(&self.body) {
            return bad("body", e.to_string());
        }
        let d = self.body.dim;
        let p = &self.params;
        if let Some(s) = p.bound_scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad("params.bound_scale", format!("must be positive, got {s}"));
            }
        }
        for (field, v) in [("params.samples", p.samples), ("params.trials", p.trials), ("params.oversample", p.oversample)] {
            if v == Some(0) {
                return bad(field, "must be positive".into());
            }
        }
        let unit = |field: &str, values: &[f64]| -> Result<(), (String, String)> {
            if values.is_empty() {
                return bad(field, "required for this operation".into());
            }
            for (k, &v) in values.iter().enumerate() {
                if !(v > 0.0 && v < 1.0) {
                    return bad(&format!("{field}[{k}]"), format!("must lie in (0, 1), got {v}"));
                }
            }
            Ok(())
        };
        match self.operation {
            Operation::Volumes => Ok(()),
            Operation::Net | Operation::Caps => unit("params.deltas", &p.deltas),
            Operation::ApproxEps => unit("params.eps", &p.eps),
            Operation::ApproxN | Operation::ApproxScaled | Operation::Sweep => {
                if p.n.is_empty() {
                    return bad("params.n", "required for this operation".into());
                }
                if let Some(k) = p.n.iter().position(|&n| n < 2 * d) {
                    return bad(&format!("params.n[{k}]"), format!("need at least {} facets", 2 * d));
                }
                Ok(())
            }
            Operation::Shape => {
                if p.l.is_empty() {
                    return bad("params.l", "required for this operation".into());
                }
                let threshold = constants(d).map_err(|e| ("body.dim".to_string(), e.to_string()))?.c12bisbis;
                if let Some(k) = p.l.iter().position(|&l| !(l > threshold)) {
                    return bad(&format!("params.l[{k}]"), format!("must exceed c12bisbis = {threshold}"));
                }
                Ok(())
            }
            Operation::Certificate => {
                let Some([i, j]) = p.pair else {
                    return bad("params.pair", "required for this operation".into());
                };
                let j0 = d / 2;
                if !(1 <= i && i < j && j <= j0) {
                    return bad("params.pair", format!("need 1 <= i < j <= {j0} in dimension {d}"));
                }
                match (p.eps.is_empty(), p.eps_factor) {
                    (true, None) => bad("params.eps", "give eps or eps_factor".into()),
                    (false, Some(_)) => bad("params.eps_factor", "give eps or eps_factor, not both".into()),
                    (true, Some(f)) if !(f > 0.0) => bad("params.eps_factor", format!("must be positive, got {f}")),
                    (false, None) => match p.eps.iter().position(|&e| !(e > 0.0)) {
                        Some(k) => bad(&format!("params.eps[{k}]"), "must be positive".into()),
                        None => Ok(()),
                    },
                    _ => Ok(()),
                }
            }
        }
    }
}
