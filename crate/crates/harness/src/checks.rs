//! Instance generation and evaluation for each check.
//!
//! A check turns a trial's random stream into an [`Instance`], then reduces the
//! instance to named residuals. Residuals are compared against [`Bound`]s;
//! flags feed the per-check counters of the report.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use seqmeas_core::entropy::{
    counterexample_pair, is_minimal_pair, klein_check, luders_entropy_check,
    minimal_identity_check, relative_entropy, von_neumann_entropy, KLEIN_TOL, MINIMALITY_TOL,
    SUPPORT_SIGMA,
};
use seqmeas_core::linalg::{hermitian_eigendecomposition, json_matrix, trace_of_product, ComplexMatrix};
use seqmeas_core::quantum::{
    build_sequential_model, dilation_analysis, spectral_projectors, two_point_work_protocol,
    DensityOperator, ProjectorFamily, Unitary, DEFAULT_CLUSTER_TOL,
};
use seqmeas_core::stat_model::SequentialModel;
use seqmeas_core::Result;

use crate::config::CheckName;
use crate::generate::{
    random_density, random_hamiltonian, random_pvm, random_simplex, random_unitary, rank_policy,
    state_of_family,
};
use crate::rng::TrialRng;

/// Entropy of the fixed entangled counterexample's product state.
pub const COUNTEREXAMPLE_S_SIGMA: f64 = 1.1246703;

/// Largest accepted residual; `strict` means the residual must stay below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub limit: f64,
    pub strict: bool,
}

impl Bound {
    const fn below(limit: f64) -> Self {
        Bound { limit, strict: true }
    }

    const fn at_most(limit: f64) -> Self {
        Bound { limit, strict: false }
    }

    pub fn admits(&self, residual: f64) -> bool {
        if self.strict {
            residual < self.limit
        } else {
            residual <= self.limit
        }
    }
}

/// Residual bounds of a check. Residuals without a bound are informational.
pub fn pinned_bounds(check: CheckName) -> Vec<(&'static str, Bound)> {
    match check {
        CheckName::Jcheck => vec![
            ("j_equation", Bound::below(1e-9)),
            ("j_reverse", Bound::below(1e-9)),
            ("model_validity", Bound::at_most(1e-10)),
        ],
        CheckName::Chain => vec![
            ("lower", Bound::at_most(1e-10)),
            ("upper", Bound::at_most(1e-10)),
            ("minimal_tightness", Bound::below(1e-12)),
        ],
        CheckName::Klein => vec![
            ("klein", Bound::at_most(KLEIN_TOL)),
            ("self", Bound::below(1e-12)),
            ("consistency_entropy", Bound::below(1e-10)),
            ("consistency_cross", Bound::below(1e-10)),
        ],
        CheckName::Luders => vec![
            ("gap", Bound::at_most(1e-10)),
            ("minimality", Bound::below(MINIMALITY_TOL)),
        ],
        CheckName::Minimal => vec![
            ("identity", Bound::below(1e-9)),
            ("order", Bound::at_most(1e-10)),
        ],
        CheckName::Jarzynski => vec![("jarzynski", Bound::below(1e-9))],
        CheckName::Dilation => vec![
            ("first", Bound::at_most(1e-9)),
            ("second", Bound::at_most(1e-9)),
        ],
        CheckName::Counterexample => vec![
            ("clusters", Bound::below(1e-12)),
            ("s_rho", Bound::below(1e-12)),
            ("s_sigma", Bound::at_most(1e-6)),
            ("identity", Bound::below(1e-9)),
            ("marginal_q", Bound::below(1e-12)),
            ("marginal_p_tilde", Bound::below(1e-12)),
            ("minimal_verdict", Bound::at_most(0.0)),
        ],
    }
}

/// Pinned bounds, or all limits replaced by `tol` when given.
pub fn bounds(check: CheckName, tol: Option<f64>) -> BTreeMap<String, Bound> {
    pinned_bounds(check)
        .into_iter()
        .map(|(k, b)| {
            let b = match tol {
                Some(limit) => Bound { limit, ..b },
                None => b,
            };
            (k.to_string(), b)
        })
        .collect()
}

/// Quantum data of a two-measurement experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialInstance {
    pub rho0: DensityOperator,
    pub first: ProjectorFamily,
    pub u: Unitary,
    pub second: ProjectorFamily,
    pub p_tilde: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInstance {
    pub rho: DensityOperator,
    pub sigma: DensityOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LudersInstance {
    pub rho: DensityOperator,
    pub family: ProjectorFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkInstance {
    #[serde(with = "json_matrix")]
    pub h0: ComplexMatrix,
    #[serde(with = "json_matrix")]
    pub h1: ComplexMatrix,
    pub u: Unitary,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationInstance {
    pub rho: DensityOperator,
    pub u_total: Unitary,
    pub ancilla_family: ProjectorFamily,
    pub phi: DensityOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Sequential(SequentialInstance),
    Pair(PairInstance),
    Luders(LudersInstance),
    Work(WorkInstance),
    Dilation(DilationInstance),
    Fixed,
}

/// What a trial is drawn from besides its random stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialContext {
    pub dims: Vec<usize>,
    pub beta_values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub residuals: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
}

impl Evaluation {
    fn residual(&mut self, key: &str, value: f64) {
        // JSON has no NaN or infinity; either would also fail any bound.
        let value = if value.is_nan() { f64::MAX } else { value.min(f64::MAX) };
        self.residuals.insert(key.to_string(), value);
    }

    fn flag(&mut self, key: &str, value: bool) {
        self.flags.insert(key.to_string(), value);
    }
}

fn pick<T: Copy>(items: &[T], k: u64) -> T {
    items[(k % items.len() as u64) as usize]
}

pub fn generate(
    check: CheckName,
    ctx: &TrialContext,
    trial: u64,
    rng: &mut TrialRng,
) -> Result<Instance> {
    match check {
        CheckName::Jcheck | CheckName::Chain => {
            generate_sequential(pick(&ctx.dims, trial), trial, rng).map(Instance::Sequential)
        }
        CheckName::Klein => generate_pair(pick(&ctx.dims, trial), trial, rng).map(Instance::Pair),
        CheckName::Luders | CheckName::Minimal => {
            generate_luders(pick(&ctx.dims, trial), trial, rng).map(Instance::Luders)
        }
        CheckName::Jarzynski => {
            let nb = ctx.beta_values.len() as u64;
            let beta = pick(&ctx.beta_values, trial);
            let dim = pick(&ctx.dims, trial / nb);
            generate_work(dim, beta, rng).map(Instance::Work)
        }
        CheckName::Dilation => {
            generate_dilation(pick(&ctx.dims, trial), trial, rng).map(Instance::Dilation)
        }
        CheckName::Counterexample => Ok(Instance::Fixed),
    }
}

/// Initial state built from the first family, so that every populated
/// outcome selects `P_i / d(i)`. Every third trial has one weight set to zero.
fn generate_sequential(dim: usize, trial: u64, rng: &mut TrialRng) -> Result<SequentialInstance> {
    let first = random_pvm(dim, &rank_policy(dim, trial, rng), rng)?;
    let second_policy = rng.random_range(0..2);
    let second = random_pvm(dim, &rank_policy(dim, second_policy, rng), rng)?;
    let mut weights: Vec<f64> = (0..first.len()).map(|_| rng.random_range(0.05..1.0)).collect();
    if trial.is_multiple_of(3) && weights.len() > 1 {
        let k = rng.random_range(0..weights.len());
        weights[k] = 0.0;
    }
    let rho0 = state_of_family(&first, &weights)?;
    let u = random_unitary(dim, rng)?;
    let p_tilde = random_simplex(second.len(), rng);
    Ok(SequentialInstance {
        rho0,
        first,
        u,
        second,
        p_tilde,
    })
}

/// Odd trials draw a random-rank `rho`; every fourth trial a random-rank `sigma`.
fn generate_pair(dim: usize, trial: u64, rng: &mut TrialRng) -> Result<PairInstance> {
    let rho_rank = if trial % 2 == 1 { rng.random_range(1..=dim) } else { dim };
    let sigma_rank = if trial % 4 == 3 { rng.random_range(1..=dim) } else { dim };
    Ok(PairInstance {
        rho: random_density(dim, Some(rho_rank), rng)?,
        sigma: random_density(dim, Some(sigma_rank), rng)?,
    })
}

fn generate_luders(dim: usize, trial: u64, rng: &mut TrialRng) -> Result<LudersInstance> {
    let family = random_pvm(dim, &rank_policy(dim, trial, rng), rng)?;
    let rank = if trial % 4 >= 2 { rng.random_range(1..=dim) } else { dim };
    Ok(LudersInstance {
        rho: random_density(dim, Some(rank), rng)?,
        family,
    })
}

fn generate_work(dim: usize, beta: f64, rng: &mut TrialRng) -> Result<WorkInstance> {
    Ok(WorkInstance {
        h0: random_hamiltonian(dim, rng)?,
        h1: random_hamiltonian(dim, rng)?,
        u: random_unitary(dim, rng)?,
        beta,
    })
}

/// Object and ancilla of equal dimension `d`.
fn generate_dilation(d: usize, trial: u64, rng: &mut TrialRng) -> Result<DilationInstance> {
    let rank = if trial % 2 == 1 { rng.random_range(1..=d) } else { d };
    Ok(DilationInstance {
        rho: random_density(d, Some(rank), rng)?,
        u_total: random_unitary(d * d, rng)?,
        ancilla_family: random_pvm(d, &rank_policy(d, trial / 2, rng), rng)?,
        phi: random_density(d, Some(1), rng)?,
    })
}

fn mismatch(check: CheckName) -> seqmeas_core::Error {
    seqmeas_core::Error::InvalidInput(format!("instance kind does not belong to check {check}"))
}

pub fn evaluate(check: CheckName, instance: &Instance) -> Result<Evaluation> {
    match (check, instance) {
        (CheckName::Jcheck, Instance::Sequential(s)) => eval_jcheck(s),
        (CheckName::Chain, Instance::Sequential(s)) => eval_chain(s),
        (CheckName::Klein, Instance::Pair(p)) => eval_klein(p),
        (CheckName::Luders, Instance::Luders(l)) => eval_luders(l),
        (CheckName::Minimal, Instance::Luders(l)) => eval_minimal(l),
        (CheckName::Jarzynski, Instance::Work(w)) => eval_jarzynski(w),
        (CheckName::Dilation, Instance::Dilation(d)) => eval_dilation(d),
        (CheckName::Counterexample, Instance::Fixed) => eval_counterexample(),
        _ => Err(mismatch(check)),
    }
}

pub fn sequential_model(s: &SequentialInstance) -> Result<SequentialModel> {
    build_sequential_model(&s.rho0, &s.first, &s.u, &s.second, &s.p_tilde)
}

/// J-equation residuals of a model given directly.
pub fn evaluate_model(model: &SequentialModel) -> Evaluation {
    let mut ev = Evaluation::default();
    ev.residual("j_equation", model.j_equation_residual());
    ev.residual("j_reverse", model.j_equation_reverse_residual());
    ev.residual("model_validity", model.validate(0.0).max_residual());
    ev.flag("regularized", model.x().contains(&0.0));
    ev
}

fn eval_jcheck(s: &SequentialInstance) -> Result<Evaluation> {
    Ok(evaluate_model(&sequential_model(s)?))
}

fn eval_chain(s: &SequentialInstance) -> Result<Evaluation> {
    let model = sequential_model(s)?;
    let chain = model.entropy_chain()?;
    let minimal = model.minimal_case()?.entropy_chain()?;
    let mut ev = Evaluation::default();
    ev.residual("lower", chain.lower_gap_violation());
    ev.residual("upper", chain.upper_gap_violation());
    let tight = match minimal.cross.finite() {
        Some(cross) => (minimal.h_q - cross).abs(),
        None => f64::MAX,
    };
    ev.residual("minimal_tightness", tight);
    ev.flag("regularized", model.x().contains(&0.0));
    Ok(ev)
}

/// `Tr(rho log sigma)` through the matrix logarithm of a full-rank `sigma`.
pub fn trace_rho_log_sigma(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let log_sigma = hermitian_eigendecomposition(sigma.matrix())?.apply_function(f64::ln);
    Ok(trace_of_product(rho.matrix(), &log_sigma).re)
}

fn eval_klein(p: &PairInstance) -> Result<Evaluation> {
    let mut ev = Evaluation::default();
    let klein = klein_check(&p.rho, &p.sigma, DEFAULT_CLUSTER_TOL)?;
    ev.residual("klein", klein.residual);
    ev.flag("infinite", klein.value.is_infinite());
    let rel = relative_entropy(&p.rho, &p.sigma, DEFAULT_CLUSTER_TOL)?;
    ev.flag("support_boundary", rel.near_support_boundary);
    let own = relative_entropy(&p.rho, &p.rho, DEFAULT_CLUSTER_TOL)?;
    ev.residual("self", own.value.finite().map_or(f64::MAX, f64::abs));

    // The statistical model of rho's and sigma's own eigenprojections with no
    // evolution in between; only when sigma has full support.
    let r = spectral_projectors(p.rho.matrix(), DEFAULT_CLUSTER_TOL)?;
    let s = spectral_projectors(p.sigma.matrix(), DEFAULT_CLUSTER_TOL)?;
    let full = s.eigenvalues.iter().all(|&v| v > SUPPORT_SIGMA);
    ev.flag("consistency", full);
    if full {
        let p_tilde: Vec<f64> = s
            .eigenvalues
            .iter()
            .zip(s.degeneracies())
            .map(|(&v, &d)| v * d as f64)
            .collect();
        let id = Unitary::identity(p.rho.dim());
        let model = build_sequential_model(&p.rho, &r.family, &id, &s.family, &p_tilde)?;
        let chain = model.entropy_chain()?;
        ev.residual(
            "consistency_entropy",
            (chain.h_p - von_neumann_entropy(&p.rho)).abs(),
        );
        let oracle = -trace_rho_log_sigma(&p.rho, &p.sigma)?;
        ev.residual(
            "consistency_cross",
            chain.cross.finite().map_or(f64::MAX, |c| (c - oracle).abs()),
        );
    }
    Ok(ev)
}

fn eval_luders(l: &LudersInstance) -> Result<Evaluation> {
    let check = luders_entropy_check(&l.rho, &l.family, DEFAULT_CLUSTER_TOL)?;
    let mut ev = Evaluation::default();
    ev.residual("gap", (-check.gap).max(0.0));
    ev.residual("minimality", check.minimality.max_residual());
    ev.flag("minimal_pair", check.minimality.is_minimal);
    Ok(ev)
}

fn eval_minimal(l: &LudersInstance) -> Result<Evaluation> {
    let check = luders_entropy_check(&l.rho, &l.family, DEFAULT_CLUSTER_TOL)?;
    let mut ev = Evaluation::default();
    ev.residual("identity", check.identity_residual.unwrap_or(f64::MAX));
    ev.residual("order", (check.s_before - check.s_after).max(0.0));
    ev.flag("minimal_pair", check.minimality.is_minimal);
    Ok(ev)
}

fn eval_jarzynski(w: &WorkInstance) -> Result<Evaluation> {
    let stats = two_point_work_protocol(&w.h0, &w.h1, &w.u, w.beta, DEFAULT_CLUSTER_TOL)?;
    let mut ev = Evaluation::default();
    ev.residual("jarzynski", stats.residual());
    ev.residual("relative", stats.residual() / stats.rhs);
    ev.flag("regularized", stats.model.x().contains(&0.0));
    Ok(ev)
}

fn eval_dilation(d: &DilationInstance) -> Result<Evaluation> {
    let report = dilation_analysis(&d.rho, &d.u_total, &d.ancilla_family, &d.phi)?;
    let mut ev = Evaluation::default();
    ev.residual("first", report.first_violation());
    ev.residual("second", report.second_violation());
    ev.flag("object_entropy_decrease", report.s31 < report.s1);
    Ok(ev)
}

fn eval_counterexample() -> Result<Evaluation> {
    let (rho, sigma) = counterexample_pair();
    let mut ev = Evaluation::default();
    let minimality = is_minimal_pair(&rho, &sigma, DEFAULT_CLUSTER_TOL, MINIMALITY_TOL)?;

    // expected (eigenvalue, degeneracy, q, p~) per cluster, ascending
    let expected = [
        (1.0 / 16.0, 1, 0.25, 1.0 / 16.0),
        (3.0 / 16.0, 2, 0.0, 3.0 / 8.0),
        (9.0 / 16.0, 1, 0.75, 9.0 / 16.0),
    ];
    let (mut clusters, mut q, mut pt) = (0.0f64, 0.0f64, 0.0f64);
    if minimality.clusters.len() != expected.len() {
        clusters = 1.0;
    }
    for (c, (value, deg, eq, ept)) in minimality.clusters.iter().zip(expected) {
        clusters = clusters.max((c.eigenvalue - value).abs());
        if c.degeneracy != deg {
            clusters = clusters.max(1.0);
        }
        q = q.max((c.q - eq).abs());
        pt = pt.max((c.p_tilde - ept).abs());
    }
    ev.residual("clusters", clusters);
    ev.residual("marginal_q", q);
    ev.residual("marginal_p_tilde", pt);
    ev.residual("minimal_verdict", if minimality.is_minimal { 1.0 } else { 0.0 });
    ev.residual("s_rho", von_neumann_entropy(&rho).abs());
    ev.residual(
        "s_sigma",
        (von_neumann_entropy(&sigma) - COUNTEREXAMPLE_S_SIGMA).abs(),
    );
    ev.residual(
        "identity",
        minimal_identity_check(&rho, &sigma, DEFAULT_CLUSTER_TOL).unwrap_or(f64::MAX),
    );
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;

    fn ctx() -> TrialContext {
        TrialContext {
            dims: vec![2, 3, 4],
            beta_values: vec![0.1, 1.0, 10.0],
        }
    }

    #[test]
    fn every_check_generates_and_evaluates() {
        for check in CheckName::ALL {
            for trial in 0..6 {
                let mut rng = trial_rng(5, check.stream_key(), trial);
                let inst = generate(check, &ctx(), trial, &mut rng).unwrap();
                let ev = evaluate(check, &inst).unwrap();
                let b = bounds(check, None);
                for (k, bound) in &b {
                    if let Some(r) = ev.residuals.get(k) {
                        assert!(bound.admits(*r), "{check} trial {trial}: {k} = {r:e}");
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_instance_is_rejected() {
        assert!(evaluate(CheckName::Klein, &Instance::Fixed).is_err());
    }

    #[test]
    fn tol_override_replaces_limits() {
        let b = bounds(CheckName::Chain, Some(1e-3));
        assert!(b.values().all(|b| b.limit == 1e-3));
        assert!(Bound::below(1.0).admits(0.5) && !Bound::below(1.0).admits(1.0));
        assert!(Bound::at_most(0.0).admits(0.0));
        assert!(!Bound::at_most(1.0).admits(f64::NAN));
    }

    #[test]
    fn instances_round_trip_through_json() {
        for check in [CheckName::Jcheck, CheckName::Klein, CheckName::Luders, CheckName::Jarzynski, CheckName::Dilation] {
            let mut rng = trial_rng(1, check.stream_key(), 3);
            let inst = generate(check, &ctx(), 3, &mut rng).unwrap();
            let text = serde_json::to_string(&inst).unwrap();
            let back: Instance = serde_json::from_str(&text).unwrap();
            assert_eq!(back, inst);
            let a = evaluate(check, &inst).unwrap();
            let b = evaluate(check, &back).unwrap();
            assert_eq!(a, b);
        }
    }
}
