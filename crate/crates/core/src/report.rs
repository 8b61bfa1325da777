//! Structured results shared by the experiment functions and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Report layout version, bumped whenever a field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// One named comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub defect: f64,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckRecord {
    /// Passes when `defect ≤ tolerance` (NaN never passes).
    pub fn within(name: impl Into<String>, defect: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value: defect,
            defect,
            tolerance: Some(tolerance),
            pass: defect <= tolerance,
            note: None,
        }
    }

    pub fn with_value(name: impl Into<String>, value: f64, defect: f64, tolerance: f64) -> Self {
        Self {
            value,
            ..Self::within(name, defect, tolerance)
        }
    }

    /// A recorded number that does not affect the verdict.
    pub fn informational(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            defect: 0.0,
            tolerance: None,
            pass: true,
            note: None,
        }
    }

    /// A check that could not be evaluated; it does not fail the run.
    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: 0.0,
            defect: 0.0,
            tolerance: None,
            pass: true,
            note: Some(format!("skipped: {}", reason.into())),
        }
    }

    pub fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn is_skipped(&self) -> bool {
        self.note.as_deref().is_some_and(|n| n.starts_with("skipped"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub schema_version: u32,
    pub parameters: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            schema_version: SCHEMA_VERSION,
            parameters: BTreeMap::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: ExperimentReport) {
        for check in other.checks {
            self.push(check);
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest defect among checks that carry a tolerance.
    pub fn max_defect(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.tolerance.is_some())
            .map(|c| c.defect)
            .fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl std::fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} [{}]", self.experiment, if self.pass { "PASS" } else { "FAIL" })?;
        for (k, v) in &self.parameters {
            writeln!(f, "  {k} = {v}")?;
        }
        for c in &self.checks {
            let status = if !c.pass {
                "FAIL"
            } else if c.is_skipped() {
                "skip"
            } else if c.tolerance.is_none() {
                "info"
            } else {
                "ok"
            };
            write!(f, "  [{status:>4}] {}: value {:.6e}", c.name, c.value)?;
            if let Some(tol) = c.tolerance {
                write!(f, ", defect {:.3e} (tol {tol:.1e})", c.defect)?;
            }
            if let Some(note) = &c.note {
                write!(f, " ({note})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_tracks_failures() {
        let mut r = ExperimentReport::new("demo").param("seed", 7);
        r.push(CheckRecord::within("a", 1e-13, 1e-12));
        r.push(CheckRecord::informational("b", 3.0));
        r.push(CheckRecord::skipped("c", "J = 0"));
        assert!(r.pass);
        r.push(CheckRecord::within("d", f64::NAN, 1.0));
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        assert!(r.check("c").unwrap().is_skipped());
    }

    #[test]
    fn json_round_trip() {
        let mut r = ExperimentReport::new("demo");
        r.push(CheckRecord::within("a", 0.5, 1.0).noted("x"));
        let text = serde_json::to_string(&r).unwrap();
        let back: ExperimentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }
}
