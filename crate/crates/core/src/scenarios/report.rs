use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::hilbert::linalg::{self, CMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value - expected| <= tolerance`.
    Approx,
    /// `value <= tolerance`.
    AtMost,
    /// `value >= expected - tolerance`.
    AtLeast,
}

/// Pass/fail verdict with the computed value and the tolerance it was held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, expected: Option<f64>, tolerance: f64, comparison: Comparison) -> Self {
        let passed = value.is_finite()
            && match comparison {
                Comparison::Approx => expected.is_some_and(|e| (value - e).abs() <= tolerance),
                Comparison::AtMost => value <= tolerance,
                Comparison::AtLeast => expected.is_some_and(|e| value >= e - tolerance),
            };
        Self {
            name: name.into(),
            value,
            expected,
            tolerance,
            comparison,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// Tabulated curve, emitted by the command line as a companion CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns
                .iter()
                .map(|(n, u)| Column {
                    name: n.to_string(),
                    unit: u.to_string(),
                })
                .collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header `name [unit]`, `.` decimals, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self
            .columns
            .iter()
            .map(|c| format!("{} [{}]", c.name, c.unit))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(",")).expect("write to string");
        }
        out
    }
}

/// Labelled real table, `values[row][column]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(rows: Vec<String>, columns: Vec<String>, values: Vec<Vec<f64>>) -> Self {
        Self { rows, columns, values }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, Value>,
    pub scalars: BTreeMap<String, f64>,
    pub spectra: BTreeMap<String, Vec<f64>>,
    pub tables: BTreeMap<String, Table>,
    /// Row-major `[re, im]` entries.
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
    pub curves: BTreeMap<String, Curve>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ScenarioReport {
    pub fn new(scenario: &str, seed: u64, inputs: BTreeMap<String, Value>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.to_string(),
            seed,
            inputs,
            scalars: BTreeMap::new(),
            spectra: BTreeMap::new(),
            tables: BTreeMap::new(),
            matrices: BTreeMap::new(),
            curves: BTreeMap::new(),
            checks: vec![],
            notes: vec![],
            passed: true,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub(crate) fn insert_matrix(&mut self, name: &str, m: &CMatrix) {
        self.matrices.insert(name.to_string(), linalg::to_rows(m));
    }

    pub(crate) fn finalize(&mut self) {
        self.passed = self.checks.iter().all(|c| c.passed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::new("a", 1.0, Some(1.0 + 1e-13), 1e-12, Comparison::Approx).passed);
        assert!(!Check::new("a", 1.0, Some(1.1), 1e-12, Comparison::Approx).passed);
        assert!(Check::new("b", 0.04, None, 0.05, Comparison::AtMost).passed);
        assert!(!Check::new("b", f64::NAN, None, 0.05, Comparison::AtMost).passed);
        assert!(Check::new("c", 0.95, Some(0.95), 0.0, Comparison::AtLeast).passed);
        assert!(!Check::new("c", 0.94, Some(0.95), 0.0, Comparison::AtLeast).passed);
    }

    #[test]
    fn csv_layout() {
        let mut c = Curve::new(&[("N", "count"), ("survival", "probability")]);
        c.push(vec![1.0, 0.5]);
        c.push(vec![2.0, 0.25]);
        assert_eq!(c.to_csv(), "N [count],survival [probability]\n1.0,0.5\n2.0,0.25\n");
    }

    #[test]
    fn report_json_round_trip() {
        let mut r = ScenarioReport::new("x", 3, BTreeMap::new());
        r.scalars.insert("v".into(), 0.5);
        r.checks.push(Check::new("v", 0.5, Some(0.5), 0.0, Comparison::Approx));
        r.finalize();
        let back: ScenarioReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(back.passed);
    }
}
