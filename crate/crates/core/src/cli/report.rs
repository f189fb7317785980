//! Run reports: JSON for machines, CSV summary for spreadsheets.

use serde::{Deserialize, Serialize};

use crate::convert::{Theorem1Report, Theorem2Report};

use super::config::ExperimentConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One bound comparison: bound, measured value, tolerance, verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// `measured ≤ bound + tolerance`.
    pub fn upper(name: impl Into<String>, bound: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            bound,
            measured,
            tolerance,
            pass: measured <= bound + tolerance,
        }
    }

    /// `measured ≥ bound − tolerance`.
    pub fn lower(name: impl Into<String>, bound: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            bound,
            measured,
            tolerance,
            pass: measured >= bound - tolerance,
        }
    }
}

/// The canonical run artifact. Byte-stable for a fixed (config, seed,
/// version): no timestamps and no unordered containers; wall-clock timing
/// goes to stderr, never into this structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theorem1: Vec<Theorem1Report>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theorem2: Vec<Theorem2Report>,
    pub checks: Vec<CheckRow>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, seed: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            theorem1: Vec::new(),
            theorem2: Vec::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn push_check(&mut self, row: CheckRow) {
        self.pass &= row.pass;
        self.checks.push(row);
    }

    pub fn to_json(&self) -> super::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat check table for spreadsheets.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,bound,measured,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.name, c.bound, c.measured, c.tolerance, c.pass
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
seed = 1
pipeline = "primitives-suite"

[task]
builtin = "equality"
bits = 2
"#,
        )
        .unwrap()
    }

    #[test]
    fn report_round_trips_through_json() {
        let mut report = RunReport::new(sample_config(), 1);
        report.push_check(CheckRow::upper("demo", 1.0, 0.5, 0.0));
        report.push_check(CheckRow::lower("floor", 0.25, 0.3, 1e-9));
        let json = report.to_json().unwrap();
        let back: RunReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_json().unwrap(), json);
        assert!(back.pass);
    }

    #[test]
    fn failing_check_fails_report() {
        let mut report = RunReport::new(sample_config(), 1);
        report.push_check(CheckRow::upper("too-big", 1.0, 1.5, 0.0));
        assert!(!report.pass);
        assert!(report.to_csv().contains("too-big,1,1.5,0,false"));
    }
}
