//! Reports: every inequality is recorded with both sides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scenario::Scenario;

/// One row of the report: a value and the bounds it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
    pub stderr: Option<f64>,
    pub seed: u64,
}

/// Collects checks for one scenario, applying the upper-bound scale.
#[derive(Debug)]
pub struct Recorder {
    seed: u64,
    bound_scale: f64,
    pub checks: Vec<Check>,
}

impl Recorder {
    pub fn new(seed: u64, bound_scale: f64) -> Self {
        Self { seed, bound_scale, checks: Vec::new() }
    }

    fn push(&mut self, quantity: String, value: f64, lower: Option<f64>, upper: Option<f64>, pass: bool, stderr: Option<f64>) {
        self.checks.push(Check { quantity, value, lower, upper, pass, stderr, seed: self.seed });
    }

    /// A reported value with no claim attached.
    pub fn info(&mut self, quantity: impl Into<String>, value: f64, stderr: Option<f64>) {
        self.push(quantity.into(), value, None, None, true, stderr);
    }

    pub fn below(&mut self, quantity: impl Into<String>, value: f64, upper: f64, strict: bool, stderr: Option<f64>) {
        let upper = upper * self.bound_scale;
        let pass = if strict { value < upper } else { value <= upper };
        self.push(quantity.into(), value, None, Some(upper), pass, stderr);
    }

    pub fn above(&mut self, quantity: impl Into<String>, value: f64, lower: f64, strict: bool, stderr: Option<f64>) {
        let pass = if strict { value > lower } else { value >= lower };
        self.push(quantity.into(), value, Some(lower), None, pass, stderr);
    }

    /// Open interval check.
    pub fn between(&mut self, quantity: impl Into<String>, value: f64, lower: f64, upper: f64, stderr: Option<f64>) {
        let upper = upper * self.bound_scale;
        let pass = lower < value && value < upper;
        self.push(quantity.into(), value, Some(lower), Some(upper), pass, stderr);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub samples_scale: f64,
    pub results: Vec<Check>,
    /// Raw outputs of the dispatched operation.
    pub details: serde_json::Value,
    pub error: Option<String>,
    pub passed: bool,
    pub elapsed_secs: f64,
}

impl Report {
    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")
    }

    /// Flat CSV with the stable columns `quantity,value,lower,upper,pass,stderr,seed`.
    pub fn write_csv(&self, path: &Path) -> csv::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        self.csv_rows(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn csv_rows<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record(["quantity", "value", "lower", "upper", "pass", "stderr", "seed"])?;
        for c in &self.results {
            w.write_record([
                c.quantity.clone(),
                c.value.to_string(),
                opt(c.lower),
                opt(c.upper),
                c.pass.to_string(),
                opt(c.stderr),
                c.seed.to_string(),
            ])?;
        }
        if self.error.is_some() {
            w.write_record(["error", "NaN", "", "", "false", "", &self.seed.to_string()])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictness_and_scale() {
        let mut r = Recorder::new(7, 1.0);
        r.below("a", 1.0, 1.0, true, None);
        r.below("b", 1.0, 1.0, false, None);
        r.above("c", 0.0, 0.0, true, None);
        r.between("d", 0.5, 0.0, 1.0, Some(0.1));
        assert_eq!(r.checks.iter().map(|c| c.pass).collect::<Vec<_>>(), [false, true, false, true]);
        assert!(r.checks.iter().all(|c| c.seed == 7));

        let mut tight = Recorder::new(0, 0.25);
        tight.below("x", 0.5, 1.0, false, None);
        assert_eq!(tight.checks[0].upper, Some(0.25));
        assert!(!tight.checks[0].pass);
    }
}
