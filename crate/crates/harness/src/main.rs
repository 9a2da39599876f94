use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqmeas_core::entropy::{
    counterexample_pair, is_minimal_pair, relative_entropy, von_neumann_entropy, MINIMALITY_TOL,
};
use seqmeas_core::quantum::DEFAULT_CLUSTER_TOL;
use seqmeas_core::stat_model::SequentialModel;
use seqmeas_harness::checks::{bounds, evaluate_model, Bound};
use seqmeas_harness::config::{parse_betas, parse_dims, CheckOverride, SEED_ENV};
use seqmeas_harness::suite::CheckReport;
use seqmeas_harness::{
    replay, run_suite, CheckName, ExperimentConfig, ExperimentReport, FailureBundle, HarnessError,
};

#[derive(Parser)]
#[command(name = "seqmeas", version, about = "Seeded checks of sequential-measurement identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Dimensions, e.g. `2,4,8` or `2..8`.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Defaults to $SEQMEAS_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces every residual bound of the check.
    #[arg(long)]
    tol: Option<f64>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// J-equation over random quantum-built models, or on one model file.
    Jcheck {
        #[command(flatten)]
        common: Common,
        /// JSON model `{"pi": [[..]], "x": [..], "x_tilde": [..]}`, `pi[j][i]`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Modified-Shannon entropy chain.
    Chain(Common),
    /// Relative-entropy positivity and the model/quantum entropy identities.
    Klein(Common),
    /// Entropy increase under the non-selective Lüders channel.
    Luders(Common),
    /// Relative entropy of Lüders minimal pairs.
    Minimal(Common),
    /// Two-point work statistics.
    Jarzynski {
        #[command(flatten)]
        common: Common,
        /// Inverse temperatures, e.g. `0.1,1,10`.
        #[arg(long)]
        beta: Option<String>,
    },
    /// Entropy bookkeeping of random ancilla dilations.
    Dilation(Common),
    /// The fixed entangled pair whose entropies satisfy the identity without minimality.
    Counterexample {
        #[arg(long)]
        json: bool,
    },
    /// Run a JSON configuration.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Rerun one failure bundle taken from a report.
    Replay {
        #[arg(long)]
        bundle: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

fn single_check_config(
    check: CheckName,
    common: &Common,
    beta: Option<&str>,
) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::acceptance(0);
    cfg.apply_seed_override(env_seed().as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.check_set = vec![check];
    cfg.tol = common.tol;
    if let Some(b) = beta {
        cfg.beta_values = parse_betas(b)?;
    }
    let mut o = cfg.overrides.remove(&check).unwrap_or_default();
    if let Some(d) = &common.dims {
        o.dims = Some(parse_dims(d)?);
    }
    if let Some(t) = common.trials {
        o.trials = Some(t);
    }
    if o != CheckOverride::default() {
        cfg.overrides.insert(check, o);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fmt_bound(b: &Bound) -> String {
    format!("{} {:.14e}", if b.strict { "<" } else { "<=" }, b.limit)
}

fn print_check(name: CheckName, c: &CheckReport) {
    println!(
        "{name}: {} ({} trials, {} failures)",
        if c.pass { "PASS" } else { "FAIL" },
        c.trials,
        c.failures.len()
    );
    for (k, r) in &c.max_residuals {
        match c.bounds.get(k) {
            Some(b) => println!("  max {k:<22} {r:.14e}  {}", fmt_bound(b)),
            None => println!("  max {k:<22} {r:.14e}"),
        }
    }
    for (k, n) in &c.counters {
        println!("  count {k:<20} {n}");
    }
    for f in c.failures.iter().take(5) {
        match &f.error {
            Some(e) => println!("  trial {}: {e}", f.trial),
            None => println!("  trial {}: {}", f.trial, f.violated.join(", ")),
        }
    }
}

fn emit(report: &ExperimentReport, json: bool, out: Option<&Path>) -> Result<ExitCode, HarnessError> {
    let text = serde_json::to_string_pretty(report)?;
    if let Some(path) = out {
        write(path, &text)?;
    }
    if json {
        println!("{text}");
    } else {
        println!("seed {}", report.config.seed);
        for (name, c) in &report.checks {
            print_check(*name, c);
        }
        println!("duration {:.14e} s", report.duration_seconds);
        println!("{}", if report.pass { "PASS" } else { "FAIL" });
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_single(check: CheckName, common: &Common, beta: Option<&str>) -> Result<ExitCode, HarnessError> {
    let cfg = single_check_config(check, common, beta)?;
    let report = run_suite(&cfg)?;
    emit(&report, common.json, common.out.as_deref())
}

fn run_model(path: &Path, common: &Common) -> Result<ExitCode, HarnessError> {
    let model: SequentialModel = serde_json::from_str(&read(path)?)?;
    let ev = evaluate_model(&model);
    let b = bounds(CheckName::Jcheck, common.tol);
    let mut pass = true;
    for (k, r) in &ev.residuals {
        let ok = b.get(k).is_none_or(|bound| bound.admits(*r));
        pass &= ok;
        println!("{k:<16} {r:.14e}  {}", if ok { "ok" } else { "FAIL" });
    }
    for (k, f) in &ev.flags {
        println!("{k:<16} {f}");
    }
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn print_matrix(name: &str, m: &seqmeas_core::linalg::ComplexMatrix) {
    println!("{name} =");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:>22.14e}", m[(i, j)].re))
            .collect();
        println!("  [{}]", row.join(" "));
    }
}

fn run_counterexample(json: bool) -> Result<ExitCode, HarnessError> {
    let (rho, sigma) = counterexample_pair();
    let s_rho = von_neumann_entropy(&rho);
    let s_sigma = von_neumann_entropy(&sigma);
    let rel = relative_entropy(&rho, &sigma, DEFAULT_CLUSTER_TOL)?.value;
    let minimality = is_minimal_pair(&rho, &sigma, DEFAULT_CLUSTER_TOL, MINIMALITY_TOL)?;
    if json {
        let v = serde_json::json!({
            "rho": rho,
            "sigma": sigma,
            "s_rho": s_rho,
            "s_sigma": s_sigma,
            "rel_entropy": rel,
            "is_minimal": minimality.is_minimal,
            "clusters": minimality.clusters,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        print_matrix("rho", rho.matrix());
        print_matrix("sigma", sigma.matrix());
        println!("S(rho)        {s_rho:.14e}");
        println!("S(sigma)      {s_sigma:.14e}");
        println!("S(rho||sigma) {rel:.14}");
        println!("minimal pair  {}", minimality.is_minimal);
        for c in &minimality.clusters {
            println!(
                "  eigenvalue {:.14e} (x{}): Tr(sigma Q) {:.14e}  Tr(rho Q) {:.14e}",
                c.eigenvalue, c.degeneracy, c.p_tilde, c.q
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_replay(path: &Path) -> Result<ExitCode, HarnessError> {
    let bundle: FailureBundle = serde_json::from_str(&read(path)?)?;
    let ev = replay(&bundle)?;
    let mut identical = true;
    for (k, r) in &ev.residuals {
        let recorded = bundle.residuals.get(k);
        identical &= recorded.is_some_and(|v| v.to_bits() == r.to_bits());
        match recorded {
            Some(v) => println!("{k:<22} {r:.14e}  recorded {v:.14e}"),
            None => println!("{k:<22} {r:.14e}"),
        }
    }
    println!("{}", if identical { "reproduced" } else { "differs" });
    Ok(if identical { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Jcheck { common, model } => match model {
            Some(path) => run_model(&path, &common),
            None => run_single(CheckName::Jcheck, &common, None),
        },
        Command::Chain(c) => run_single(CheckName::Chain, &c, None),
        Command::Klein(c) => run_single(CheckName::Klein, &c, None),
        Command::Luders(c) => run_single(CheckName::Luders, &c, None),
        Command::Minimal(c) => run_single(CheckName::Minimal, &c, None),
        Command::Jarzynski { common, beta } => run_single(CheckName::Jarzynski, &common, beta.as_deref()),
        Command::Dilation(c) => run_single(CheckName::Dilation, &c, None),
        Command::Counterexample { json } => run_counterexample(json),
        Command::Suite { config, out, json } => {
            let mut cfg = ExperimentConfig::from_json(&read(&config)?)?;
            cfg.apply_seed_override(env_seed().as_deref())?;
            let report = run_suite(&cfg)?;
            emit(&report, json, out.as_deref())
        }
        Command::Replay { bundle } => run_replay(&bundle),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
