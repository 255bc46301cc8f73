//! Thought-experiment drivers and no-go constructions assembled from the
//! lower layers, each producing a [`ScenarioReport`] with pass/fail checks.

pub mod bell;
pub mod config;
pub mod epr;
pub mod ghz;
pub mod kochen_specker;
pub mod measurement;
pub mod myrvold;
pub mod no_communication;
pub mod pbr;
pub mod report;
pub mod zeno;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::linalg::CMatrix;

pub use config::{ParamSpec, Params, ScenarioConfig};
pub use report::{Check, Column, Comparison, Curve, ScenarioReport, Table, SCHEMA_VERSION};

/// Execution context handed to a scenario driver.
pub struct Run<'a> {
    pub params: Params,
    pub seed: u64,
    overrides: &'a BTreeMap<String, f64>,
    scale: f64,
    report: ScenarioReport,
}

impl Run<'_> {
    fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.overrides.get(name).copied().unwrap_or(default) * self.scale
    }

    pub fn approx(&mut self, name: &str, value: f64, expected: f64, default_tol: f64) -> bool {
        let tol = self.tolerance(name, default_tol);
        self.push(Check::new(name, value, Some(expected), tol, Comparison::Approx))
    }

    pub fn at_most(&mut self, name: &str, value: f64, bound: f64) -> bool {
        let tol = self.tolerance(name, bound);
        self.push(Check::new(name, value, None, tol, Comparison::AtMost))
    }

    pub fn at_least(&mut self, name: &str, value: f64, bound: f64, default_slack: f64) -> bool {
        let tol = self.tolerance(name, default_slack);
        self.push(Check::new(name, value, Some(bound), tol, Comparison::AtLeast))
    }

    /// Exact count comparison.
    pub fn count(&mut self, name: &str, value: usize, expected: usize) -> bool {
        self.push(Check::new(name, value as f64, Some(expected as f64), 0.0, Comparison::Approx))
    }

    fn push(&mut self, c: Check) -> bool {
        let ok = c.passed;
        self.report.checks.push(c);
        ok
    }

    pub fn scalar(&mut self, name: &str, value: f64) -> Result<()> {
        finite(name, &[value])?;
        self.report.scalars.insert(name.to_string(), value);
        Ok(())
    }

    pub fn spectrum(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        finite(name, &values)?;
        self.report.spectra.insert(name.to_string(), values);
        Ok(())
    }

    pub fn table(&mut self, name: &str, table: Table) -> Result<()> {
        for row in &table.values {
            finite(name, row)?;
        }
        self.report.tables.insert(name.to_string(), table);
        Ok(())
    }

    pub fn matrix(&mut self, name: &str, m: &CMatrix) -> Result<()> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidModel(format!("`{name}` has non-finite entries")));
        }
        self.report.insert_matrix(name, m);
        Ok(())
    }

    pub fn curve(&mut self, name: &str, curve: Curve) -> Result<()> {
        for row in &curve.rows {
            finite(name, row)?;
        }
        self.report.curves.insert(name.to_string(), curve);
        Ok(())
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.report.notes.push(text.into());
    }
}

fn finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("`{name}` has non-finite values")))
    }
}

struct Entry {
    name: &'static str,
    description: &'static str,
    params: fn() -> Vec<ParamSpec>,
    run: fn(&mut Run) -> Result<()>,
}

const REGISTRY: [Entry; 9] = [
    Entry {
        name: "von_neumann_measurement",
        description: "Pointer coupling plus environment decoherence; Born weights, off-diagonal suppression and persistence",
        params: measurement::params,
        run: measurement::run,
    },
    Entry {
        name: "epr_bohm",
        description: "Spin-singlet correlations and epistemic states before and after a local measurement",
        params: epr::params,
        run: epr::run,
    },
    Entry {
        name: "bell_check",
        description: "Bell inequality for the singlet versus all deterministic anti-correlated local strategies",
        params: bell::params,
        run: bell::run,
    },
    Entry {
        name: "ghz_mermin",
        description: "GHZ eigenvalue equations and exhaustive search over local instruction sets",
        params: ghz::params,
        run: ghz::run,
    },
    Entry {
        name: "myrvold",
        description: "Two-wing qubit-detector state, local Hadamard transport and parent spectra",
        params: myrvold::params,
        run: myrvold::run,
    },
    Entry {
        name: "quantum_zeno",
        description: "Survival under repeated projective resets and the exponential-decay limit",
        params: zeno::params,
        run: zeno::run,
    },
    Entry {
        name: "kochen_specker",
        description: "Pauli-product magic square: commutation, line products and value assignments",
        params: kochen_specker::params,
        run: kochen_specker::run,
    },
    Entry {
        name: "pbr",
        description: "Entangled two-qubit measurement basis with one excluded outcome per product state",
        params: pbr::params,
        run: pbr::run,
    },
    Entry {
        name: "no_communication",
        description: "Local operations on B leave the reduced state of A unchanged",
        params: no_communication::params,
        run: no_communication::run,
    },
];

/// Registry entry as shown by `list`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub parameters: Vec<ParamSpec>,
    pub default_config: ScenarioConfig,
}

pub fn scenario_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.name).collect()
}

pub fn list_scenarios() -> Vec<ScenarioInfo> {
    REGISTRY
        .iter()
        .map(|e| {
            let parameters = (e.params)();
            let default_config = ScenarioConfig {
                name: e.name.to_string(),
                parameters: parameters.iter().map(|p| (p.name.to_string(), p.default.clone())).collect(),
                tolerances: BTreeMap::new(),
            };
            ScenarioInfo {
                name: e.name,
                description: e.description,
                parameters,
                default_config,
            }
        })
        .collect()
}

pub fn default_config(name: &str) -> Result<ScenarioConfig> {
    list_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .map(|s| s.default_config)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioReport> {
    run_scenario_scaled(cfg, seed, 1.0)
}

/// Runs a scenario with every check tolerance multiplied by `tolerance_scale`.
pub fn run_scenario_scaled(cfg: &ScenarioConfig, seed: u64, tolerance_scale: f64) -> Result<ScenarioReport> {
    let entry = REGISTRY
        .iter()
        .find(|e| e.name == cfg.name)
        .ok_or_else(|| Error::UnknownScenario(cfg.name.clone()))?;
    if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
        return Err(Error::Config(format!("tolerance scale must be positive, got {tolerance_scale}")));
    }
    if let Some((k, v)) = cfg.tolerances.iter().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Config(format!("tolerance `{k}` must be non-negative, got {v}")));
    }
    let params = Params::resolve(&(entry.params)(), &cfg.parameters)?;
    let report = ScenarioReport::new(entry.name, seed, params.values().clone());
    let mut run = Run {
        params,
        seed,
        overrides: &cfg.tolerances,
        scale: tolerance_scale,
        report,
    };
    (entry.run)(&mut run)?;
    let mut report = run.report;
    if let Some(k) = cfg.tolerances.keys().find(|k| report.check(k).is_none()) {
        return Err(Error::Config(format!("tolerance override `{k}` names no check of `{}`", cfg.name)));
    }
    report.finalize();
    Ok(report)
}

/// Validates a direction vector and returns it unchanged.
pub(crate) fn unit_vector(n: [f64; 3]) -> Result<[f64; 3]> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnitVector(norm));
    }
    Ok(n)
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_nine_unique_names() {
        let names = scenario_names();
        assert_eq!(names.len(), 9);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 9);
        for info in list_scenarios() {
            assert!(!info.parameters.is_empty() || info.default_config.parameters.is_empty());
        }
    }

    #[test]
    fn every_default_config_passes() {
        for name in scenario_names() {
            let report = run_scenario(&default_config(name).unwrap(), 0).unwrap();
            assert!(report.passed, "{name}: {:?}", report.failed_checks());
            assert!(!report.checks.is_empty(), "{name}");
        }
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(run_scenario(&ScenarioConfig::new("nope"), 0), Err(Error::UnknownScenario(_))));
        let cfg = ScenarioConfig::new("pbr").with_tolerance("no_such_check", 1.0);
        assert!(matches!(run_scenario(&cfg, 0), Err(Error::Config(_))));
        let cfg = ScenarioConfig::new("pbr").with_parameter("bogus", 1);
        assert!(matches!(run_scenario(&cfg, 0), Err(Error::Config(_))));
        assert!(run_scenario_scaled(&ScenarioConfig::new("pbr"), 0, 0.0).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        for name in ["epr_bohm", "no_communication"] {
            let cfg = default_config(name).unwrap();
            let a = run_scenario(&cfg, 9).unwrap().to_json();
            let b = run_scenario(&cfg, 9).unwrap().to_json();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unit_vector_validation() {
        assert!(matches!(unit_vector([0.0; 3]), Err(Error::ZeroVector)));
        assert!(matches!(unit_vector([1.0, 1.0, 0.0]), Err(Error::NotUnitVector(_))));
        assert!(unit_vector([0.6, 0.8, 0.0]).is_ok());
    }
}
