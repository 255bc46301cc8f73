use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Named scenario with parameter and tolerance overrides.
///
/// Complex numbers are `[re, im]` lists and direction vectors are 3-element lists.
/// Tolerance keys are check names from the scenario report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn with_parameter(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn with_tolerance(mut self, check: impl Into<String>, tolerance: f64) -> Self {
        self.tolerances.insert(check.into(), tolerance);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Declared scenario parameter with its default value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub default: Value,
}

impl ParamSpec {
    pub fn new(name: &'static str, description: &'static str, default: impl Into<Value>) -> Self {
        Self {
            name,
            description,
            default: default.into(),
        }
    }
}

/// Parameters after merging overrides onto the declared defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    pub fn resolve(specs: &[ParamSpec], given: &BTreeMap<String, Value>) -> Result<Self> {
        if let Some(unknown) = given.keys().find(|k| !specs.iter().any(|s| s.name == k.as_str())) {
            let known: Vec<&str> = specs.iter().map(|s| s.name).collect();
            return Err(Error::Config(format!(
                "unknown parameter `{unknown}` (expected one of: {})",
                known.join(", ")
            )));
        }
        let values = specs
            .iter()
            .map(|s| (s.name.to_string(), given.get(s.name).unwrap_or(&s.default).clone()))
            .collect();
        Ok(Self { values })
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    fn get(&self, name: &str) -> Result<&Value> {
        self.values
            .get(name)
            .ok_or_else(|| Error::Config(format!("parameter `{name}` is not declared")))
    }

    pub fn f64(&self, name: &str) -> Result<f64> {
        number(self.get(name)?, name)
    }

    pub fn usize(&self, name: &str) -> Result<usize> {
        count(self.get(name)?, name)
    }

    pub fn string(&self, name: &str) -> Result<String> {
        self.get(name)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Config(format!("`{name}` must be a string")))
    }

    pub fn vec3(&self, name: &str) -> Result<[f64; 3]> {
        let v = self.f64_list(name)?;
        v.try_into()
            .map_err(|_| Error::Config(format!("`{name}` must be a 3-element list")))
    }

    pub fn f64_list(&self, name: &str) -> Result<Vec<f64>> {
        list(self.get(name)?, name)?.iter().map(|x| number(x, name)).collect()
    }

    pub fn usize_list(&self, name: &str) -> Result<Vec<usize>> {
        list(self.get(name)?, name)?.iter().map(|x| count(x, name)).collect()
    }

    /// Entries may be plain numbers or `[re, im]` pairs.
    pub fn complex_list(&self, name: &str) -> Result<Vec<Complex64>> {
        list(self.get(name)?, name)?
            .iter()
            .map(|x| match x {
                Value::Array(pair) if pair.len() == 2 => {
                    Ok(Complex64::new(number(&pair[0], name)?, number(&pair[1], name)?))
                }
                other => Ok(Complex64::new(number(other, name)?, 0.0)),
            })
            .collect()
    }
}

fn number(v: &Value, name: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("`{name}` must be a finite number, got {v}")))
}

fn count(v: &Value, name: &str) -> Result<usize> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| Error::Config(format!("`{name}` must be a non-negative integer, got {v}")))
}

fn list<'a>(v: &'a Value, name: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Config(format!("`{name}` must be a list, got {v}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn specs() -> Vec<ParamSpec> {
        vec![
            ParamSpec::new("a", "direction", json!([0.0, 0.0, 1.0])),
            ParamSpec::new("k", "count", 3),
            ParamSpec::new("amps", "amplitudes", json!([1.0, [0.0, 1.0]])),
        ]
    }

    #[test]
    fn defaults_and_overrides() {
        let given = BTreeMap::from([("k".to_string(), json!(7))]);
        let p = Params::resolve(&specs(), &given).unwrap();
        assert_eq!(p.usize("k").unwrap(), 7);
        assert_eq!(p.vec3("a").unwrap(), [0.0, 0.0, 1.0]);
        let amps = p.complex_list("amps").unwrap();
        assert_eq!(amps, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let given = BTreeMap::from([("zz".to_string(), json!(1))]);
        assert!(matches!(Params::resolve(&specs(), &given), Err(Error::Config(_))));
        let given = BTreeMap::from([("k".to_string(), json!(-1))]);
        let p = Params::resolve(&specs(), &given).unwrap();
        assert!(p.usize("k").is_err());
        let given = BTreeMap::from([("a".to_string(), json!([1.0, 2.0]))]);
        assert!(Params::resolve(&specs(), &given).unwrap().vec3("a").is_err());
    }

    #[test]
    fn config_round_trip() {
        let cfg = ScenarioConfig::new("epr_bohm")
            .with_parameter("eps", 0.0)
            .with_tolerance("correlation", 1e-9);
        assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert!(ScenarioConfig::from_json("{\"name\": 1}").is_err());
        assert!(ScenarioConfig::from_json("{\"name\": \"x\", \"bogus\": 1}").is_err());
    }
}
