//! Running checks over seeded trials and collecting the report.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{bounds, evaluate, generate, Bound, Evaluation, Instance, TrialContext};
use crate::config::{CheckName, ExperimentConfig};
use crate::rng::trial_rng;
use crate::HarnessError;

/// Everything needed to rerun one failed trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureBundle {
    pub check: CheckName,
    pub seed: u64,
    pub trial: u64,
    pub context: TrialContext,
    /// Absent when generation itself failed.
    pub instance: Option<Instance>,
    pub residuals: BTreeMap<String, f64>,
    pub violated: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub trials: u64,
    pub bounds: BTreeMap<String, Bound>,
    pub max_residuals: BTreeMap<String, f64>,
    /// Number of trials with each flag set.
    pub counters: BTreeMap<String, u64>,
    pub failures: Vec<FailureBundle>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub checks: BTreeMap<CheckName, CheckReport>,
    pub duration_seconds: f64,
    pub pass: bool,
}

impl ExperimentReport {
    /// Report content without the wall-clock duration.
    pub fn content(&self) -> (&ExperimentConfig, &BTreeMap<CheckName, CheckReport>, bool) {
        (&self.config, &self.checks, self.pass)
    }
}

struct TrialOutcome {
    instance: Option<Instance>,
    evaluation: Option<Evaluation>,
    error: Option<String>,
}

fn context(config: &ExperimentConfig, check: CheckName) -> TrialContext {
    TrialContext {
        dims: config.dims_for(check).to_vec(),
        beta_values: config.beta_values.clone(),
    }
}

fn run_trial(check: CheckName, seed: u64, ctx: &TrialContext, trial: u64) -> TrialOutcome {
    let mut rng = trial_rng(seed, check.stream_key(), trial);
    let instance = match generate(check, ctx, trial, &mut rng) {
        Ok(i) => i,
        Err(e) => {
            return TrialOutcome {
                instance: None,
                evaluation: None,
                error: Some(format!("generation: {e}")),
            }
        }
    };
    match evaluate(check, &instance) {
        Ok(ev) => TrialOutcome {
            instance: Some(instance),
            evaluation: Some(ev),
            error: None,
        },
        Err(e) => TrialOutcome {
            instance: Some(instance),
            evaluation: None,
            error: Some(format!("evaluation: {e}")),
        },
    }
}

fn violations(ev: &Evaluation, bounds: &BTreeMap<String, Bound>) -> Vec<String> {
    bounds
        .iter()
        .filter(|(k, b)| ev.residuals.get(*k).is_some_and(|r| !b.admits(*r)))
        .map(|(k, _)| k.clone())
        .collect()
}

pub fn run_check(config: &ExperimentConfig, check: CheckName) -> CheckReport {
    let trials = if check == CheckName::Counterexample {
        1
    } else {
        config.trials_for(check)
    };
    let ctx = context(config, check);
    let bounds = bounds(check, config.tol);
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(check, config.seed, &ctx, t))
        .collect();

    let mut max_residuals: BTreeMap<String, f64> = BTreeMap::new();
    let mut counters: BTreeMap<String, u64> = BTreeMap::new();
    let mut failures = Vec::new();
    for (trial, out) in (0u64..).zip(outcomes) {
        let violated = out
            .evaluation
            .as_ref()
            .map(|ev| violations(ev, &bounds))
            .unwrap_or_default();
        if let Some(ev) = &out.evaluation {
            for (k, &r) in &ev.residuals {
                let m = max_residuals.entry(k.clone()).or_insert(0.0);
                *m = m.max(r);
            }
            for (k, &f) in &ev.flags {
                *counters.entry(k.clone()).or_insert(0) += u64::from(f);
            }
        }
        if out.error.is_some() || !violated.is_empty() {
            failures.push(FailureBundle {
                check,
                seed: config.seed,
                trial,
                context: ctx.clone(),
                instance: out.instance,
                residuals: out.evaluation.map(|e| e.residuals).unwrap_or_default(),
                violated,
                error: out.error,
            });
        }
    }
    CheckReport {
        trials,
        bounds,
        max_residuals,
        counters,
        pass: failures.is_empty(),
        failures,
    }
}

pub fn run_suite(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let mut checks = BTreeMap::new();
    for &check in &config.check_set {
        checks.insert(check, run_check(config, check));
    }
    let pass = checks.values().all(|c| c.pass);
    Ok(ExperimentReport {
        config: config.clone(),
        checks,
        duration_seconds: start.elapsed().as_secs_f64(),
        pass,
    })
}

/// Reruns a failed trial, regenerating the instance when the bundle has none.
pub fn replay(bundle: &FailureBundle) -> Result<Evaluation, HarnessError> {
    let instance = match &bundle.instance {
        Some(i) => i.clone(),
        None => {
            let mut rng = trial_rng(bundle.seed, bundle.check.stream_key(), bundle.trial);
            generate(bundle.check, &bundle.context, bundle.trial, &mut rng)?
        }
    };
    Ok(evaluate(bundle.check, &instance)?)
}
