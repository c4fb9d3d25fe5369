//! Run parameters from a key=value or JSON file, overridden by `-p key=value`.

use std::collections::BTreeMap;
use std::path::Path;

use harvest_core::quadrature::QuadratureSettings;
use harvest_core::Scenario;

use crate::CliError;

/// Every key any subcommand reads. Anything else is rejected.
pub const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "kappa",
    "sigma",
    "omega",
    "L",
    "eta0",
    "a",
    "w",
    "g",
    "a_lo",
    "a_hi",
    "a_n",
    "w_lo",
    "w_hi",
    "w_n",
    "axis",
    "delta_lo",
    "delta_hi",
    "delta_min",
    "delta_max",
    "n",
    "deltas",
    "shots",
    "scale",
    "target",
    "delta",
    "ln_measured",
    "abs_tol",
    "rel_tol",
    "truncation_radius",
    "max_subdivisions",
    "epsilon_ladder",
];

/// Raw parameters plus a record of the values each command resolved.
#[derive(Debug, Default)]
pub struct Params {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<(), CliError> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::Validation(format!("unknown parameter '{key}'")))
    }
}

fn parse_flat(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_json(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::Validation("config JSON must be an object".into()))?;
    let mut out = BTreeMap::new();
    for (k, v) in obj {
        let s = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            serde_json::Value::Array(items) => items
                .iter()
                .map(|x| match x {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            serde_json::Value::Null | serde_json::Value::Object(_) => {
                return Err(CliError::Validation(format!("config key '{k}' must be a scalar or list")));
            }
        };
        out.insert(k.clone(), s);
    }
    Ok(out)
}

impl Params {
    /// Loads `path` (JSON if it starts with `{`) and applies overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut raw = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
                if text.trim_start().starts_with('{') {
                    parse_json(&text)?
                } else {
                    parse_flat(&text)?
                }
            }
            None => BTreeMap::new(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::Validation(format!("parameter '{o}': expected key=value")))?;
            raw.insert(k.trim().to_string(), v.trim().to_string());
        }
        for k in raw.keys() {
            check_key(k)?;
        }
        Ok(Params {
            raw,
            resolved: BTreeMap::new(),
        })
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.raw.insert(key.to_string(), value);
    }

    pub fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
        s.parse::<f64>()
            .map_err(|_| CliError::Validation(format!("parameter '{key}': '{s}' is not a number")))
    }

    pub fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw.get(key).cloned() {
            Some(s) => {
                let v = Self::parse_f64(key, &s)?;
                self.record(key, format!("{v:?}"));
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_opt(key)?.unwrap_or(default);
        self.record(key, format!("{v:?}"));
        Ok(v)
    }

    pub fn f64_req(&mut self, key: &str) -> Result<f64, CliError> {
        self.f64_opt(key)?
            .ok_or_else(|| CliError::Validation(format!("missing parameter '{key}'")))
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        let v = match self.raw.get(key) {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| CliError::Validation(format!("parameter '{key}': '{s}' is not a count")))?,
            None => default,
        };
        self.record(key, format!("{v:?}"));
        Ok(v)
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> String {
        let v = self.raw.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn list_req(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        let s = self
            .raw
            .get(key)
            .cloned()
            .ok_or_else(|| CliError::Validation(format!("missing parameter '{key}'")))?;
        let v = s
            .split(',')
            .map(|t| Self::parse_f64(key, t.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        self.record(key, v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","));
        Ok(v)
    }

    pub fn scenario(&mut self, default: Option<Scenario>) -> Result<Scenario, CliError> {
        let s = match (self.raw.get("scenario"), default) {
            (Some(s), _) => Scenario::from_name(s).ok_or_else(|| CliError::Validation(format!("unknown scenario '{s}'")))?,
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::Validation("missing parameter 'scenario'".into())),
        };
        self.record("scenario", s.name().to_string());
        Ok(s)
    }

    /// Quadrature knobs, defaulting each one independently.
    pub fn settings(&mut self) -> Result<QuadratureSettings, CliError> {
        let d = QuadratureSettings::default();
        let mut s = QuadratureSettings {
            abs_tol: self.f64_or("abs_tol", d.abs_tol)?,
            rel_tol: self.f64_or("rel_tol", d.rel_tol)?,
            truncation_radius: self.f64_or("truncation_radius", d.truncation_radius)?,
            max_subdivisions: self.usize_or("max_subdivisions", d.max_subdivisions)?,
            epsilon_ladder: d.epsilon_ladder.clone(),
        };
        if self.has("epsilon_ladder") {
            s.epsilon_ladder = self.list_req("epsilon_ladder")?;
        } else {
            self.record(
                "epsilon_ladder",
                s.epsilon_ladder.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
            );
        }
        s.validate().map_err(CliError::from_validation)?;
        Ok(s)
    }
}
