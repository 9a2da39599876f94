//! Experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const MAX_DIM: usize = 64;

/// Environment variable that replaces the seed of a configuration file.
pub const SEED_ENV: &str = "SEQMEAS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckName {
    Jcheck,
    Chain,
    Klein,
    Luders,
    Minimal,
    Jarzynski,
    Dilation,
    Counterexample,
}

impl CheckName {
    pub const ALL: [CheckName; 8] = [
        CheckName::Jcheck,
        CheckName::Chain,
        CheckName::Klein,
        CheckName::Luders,
        CheckName::Minimal,
        CheckName::Jarzynski,
        CheckName::Dilation,
        CheckName::Counterexample,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Jcheck => "jcheck",
            CheckName::Chain => "chain",
            CheckName::Klein => "klein",
            CheckName::Luders => "luders",
            CheckName::Minimal => "minimal",
            CheckName::Jarzynski => "jarzynski",
            CheckName::Dilation => "dilation",
            CheckName::Counterexample => "counterexample",
        }
    }

    /// Key of the random stream. Checks that look at the same instances share it.
    pub fn stream_key(self) -> &'static str {
        match self {
            CheckName::Jcheck | CheckName::Chain => "sequential-model",
            CheckName::Luders | CheckName::Minimal => "luders-instance",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown check {s:?}")))
    }
}

/// Per-check replacement of the global `trials` and `dims`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials: u64,
    /// Replaces every pinned residual bound when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default = "default_betas")]
    pub beta_values: Vec<f64>,
    pub check_set: Vec<CheckName>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<CheckName, CheckOverride>,
}

fn default_betas() -> Vec<f64> {
    vec![0.1, 1.0, 10.0]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            dims: (2..=8).collect(),
            trials: 1000,
            tol: None,
            beta_values: default_betas(),
            check_set: CheckName::ALL.to_vec(),
            overrides: BTreeMap::new(),
        }
    }
}

fn check_dims(dims: &[usize], what: &str) -> Result<(), HarnessError> {
    if dims.is_empty() {
        return Err(HarnessError::Config(format!("{what}: empty dimension list")));
    }
    if let Some(d) = dims.iter().find(|&&d| !(1..=MAX_DIM).contains(&d)) {
        return Err(HarnessError::Config(format!(
            "{what}: dimension {d} outside 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

impl ExperimentConfig {
    /// The configuration used by the acceptance suite: 1000 trials over
    /// dimensions 2..=8, 300 Jarzynski trials over 2..=6 and 300 dilations
    /// over 2x2 and 3x3.
    pub fn acceptance(seed: u64) -> Self {
        let mut overrides = BTreeMap::new();
        overrides.insert(
            CheckName::Jarzynski,
            CheckOverride {
                trials: Some(300),
                dims: Some((2..=6).collect()),
            },
        );
        overrides.insert(
            CheckName::Dilation,
            CheckOverride {
                trials: Some(300),
                dims: Some(vec![2, 3]),
            },
        );
        ExperimentConfig {
            seed,
            overrides,
            ..ExperimentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        check_dims(&self.dims, "dims")?;
        if self.trials < 1 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(HarnessError::Config(format!("tol {t} must be positive")));
            }
        }
        if self.beta_values.is_empty() || self.beta_values.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            return Err(HarnessError::Config(format!(
                "beta values {:?} must be positive",
                self.beta_values
            )));
        }
        if self.check_set.is_empty() {
            return Err(HarnessError::Config("empty check set".into()));
        }
        for (name, o) in &self.overrides {
            if let Some(d) = &o.dims {
                check_dims(d, name.as_str())?;
            }
            if o.trials == Some(0) {
                return Err(HarnessError::Config(format!("{name}: trials must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn trials_for(&self, check: CheckName) -> u64 {
        self.overrides
            .get(&check)
            .and_then(|o| o.trials)
            .unwrap_or(self.trials)
    }

    pub fn dims_for(&self, check: CheckName) -> &[usize] {
        self.overrides
            .get(&check)
            .and_then(|o| o.dims.as_deref())
            .unwrap_or(&self.dims)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `SEQMEAS_SEED` from `value` (as read from the environment).
    pub fn apply_seed_override(&mut self, value: Option<&str>) -> Result<(), HarnessError> {
        if let Some(v) = value {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("{SEED_ENV}={v:?} is not a u64")))?;
        }
        Ok(())
    }
}

/// Parses `2,4,8` and ranges such as `2..8` or `2-8` (inclusive).
pub fn parse_dims(s: &str) -> Result<Vec<usize>, HarnessError> {
    let bad = || HarnessError::Config(format!("cannot parse dimensions {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    check_dims(&out, "dims")?;
    Ok(out)
}

pub fn parse_betas(s: &str) -> Result<Vec<f64>, HarnessError> {
    let out: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| HarnessError::Config(format!("cannot parse beta list {s:?}")))?;
    if out.is_empty() || out.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(HarnessError::Config(format!("beta values {s:?} must be positive")));
    }
    Ok(out)
}
