//! Batch experiment runner behind the `varsolve` binary.

mod config;

pub use config::{
    ConfigError, ExperimentConfig, Family, Mode, NetworkConfig, NetworkTarget, OracleConfig, PairConfig, ProblemRef,
    ToleranceStop,
};

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::network::{log_log_slope, random_trig, rate_csv, rate_study};
use crate::oracle::{fd_minimize, golden_names, FdProblem};
use crate::solver::{solve, solve_pair, ConvergenceReport, PairReport, SolverConfig, StopReason};
use crate::spectral::{embed_sine_to_trig, to_grid, SineFunction};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "varsolve",
    version,
    about = "Spectral descent experiments with Barron-norm certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run experiment configs and write their artifacts.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config files; combined with any --config.
    pub configs: Vec<PathBuf>,
    #[arg(long = "config")]
    pub config_flags: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Replaces the config seeds with `seed, seed+1, …` of the same count.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the registered golden problems and exit.
    #[arg(long)]
    pub list: bool,
    /// Evaluate invariants without writing artifacts.
    #[arg(long)]
    pub check: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl InvariantResult {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub config: String,
    pub status: &'static str,
    pub violated: Vec<String>,
    pub invariants: Vec<InvariantResult>,
}

/// Result of one experiment before anything touches the filesystem.
#[derive(Debug)]
pub struct Outcome {
    pub name: String,
    pub invariants: Vec<InvariantResult>,
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.invariants.iter().all(|i| i.passed)
    }

    pub fn record(&self) -> RunRecord {
        let violated: Vec<String> = self
            .invariants
            .iter()
            .filter(|i| !i.passed)
            .map(|i| i.name.clone())
            .collect();
        RunRecord {
            config: self.name.clone(),
            status: if violated.is_empty() { "pass" } else { "fail" },
            violated,
            invariants: self.invariants.clone(),
        }
    }

    pub fn artifact(&self, suffix: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|(n, _)| n.ends_with(suffix))
            .map(|(_, s)| s.as_str())
    }
}

fn solver_config(cfg: &ExperimentConfig, r: &config::Resolved) -> SolverConfig<f64> {
    let mut s = SolverConfig::new(cfg.w)
        .with_grid_factor(cfg.grid_points() / cfg.w)
        .with_policy(cfg.policy);
    s = match &cfg.tolerance {
        Some(t) => s.with_tolerance(t.tol, t.max_iter),
        None => s.with_schedule(cfg.eps),
    };
    if let Some(t) = cfg.iterations {
        s = s.with_iterations(t);
    }
    if let Some(eta) = cfg.eta {
        s = s.with_eta(eta);
    }
    if r.u_star.is_some() || r.energy.is_some() {
        s = s.with_reference(r.u_star.clone(), r.energy);
    }
    s
}

/// Solver failures that correspond to a named invariant.
fn solver_failure(e: &Error) -> InvariantResult {
    let name = match e {
        Error::EnergyIncrease { .. } => "energy-monotone",
        Error::BoxEscape { .. } => "value-box",
        _ => "solver",
    };
    InvariantResult::new(name, false, e.to_string())
}

fn report_invariants(rep: &ConvergenceReport, cfg: &ExperimentConfig, out: &mut Vec<InvariantResult>) {
    let s = &rep.summary;
    out.push(InvariantResult::new(
        "energy-monotone",
        s.energy_monotone,
        format!("final energy {:e}", s.final_energy),
    ));
    out.push(InvariantResult::new(
        "ledger-dominance",
        s.ledger_dominated,
        match s.certificate_value {
            Some(v) => format!("certificate {v:e} at bandlimit {}", s.final_bandlimit),
            None => format!("no certificate at bandlimit {}", s.final_bandlimit),
        },
    ));
    if s.final_gap.is_some() {
        out.push(InvariantResult::new(
            "rate-soundness",
            s.rate_violations == 0,
            format!(
                "{} steps above stated rate {:.6}; max contraction {:?}",
                s.rate_violations, s.stated_rate, s.max_contraction
            ),
        ));
    }
    if s.stop_reason == StopReason::Schedule && cfg.iterations.is_none() {
        if let Some(gap) = s.final_gap {
            let target = cfg.eps * s.lambda / 2.0;
            out.push(InvariantResult::new(
                "target-gap",
                gap <= target,
                format!("gap {gap:e} after {} steps, target {target:e}", s.iterations),
            ));
        }
    }
}

/// Runs one experiment in memory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, ConfigError> {
    let name = cfg.name().to_string();
    let r = cfg.resolve()?;
    let scfg = solver_config(cfg, &r);
    let u0 = SineFunction::zero(r.spec.dim(), 1);
    let mut inv = Vec::new();
    let mut artifacts = Vec::new();

    let approx = cfg.resolve_approx()?;
    let solved: Result<(SineFunction<f64>, ConvergenceReport, Option<PairReport>), Error> = match &approx {
        None => solve(&r.spec, &r.f, &u0, &scfg).map(|(u, rep)| (u, rep, None)),
        Some(a) => solve_pair(&r.spec, a, &r.f, &u0, &scfg).map(|(u, _, p)| (u, p.exact.clone(), Some(p))),
    };
    let solution = match solved {
        Ok((u, rep, pair)) => {
            report_invariants(&rep, cfg, &mut inv);
            artifacts.push((format!("{name}.csv"), rep.to_csv()));
            artifacts.push((format!("{name}.summary.json"), rep.summary_json()));
            artifacts.push((
                format!("{name}.ledger.json"),
                serde_json::to_string_pretty(&rep.ledger).expect("ledger serializes"),
            ));
            if let Some(p) = pair {
                inv.push(InvariantResult::new(
                    "drift-bound",
                    p.drift_within_bound(),
                    format!("eps_L {:e}, R {:e}", p.eps_l, p.radius),
                ));
                let mut csv = String::from("t,drift,drift_bound\n");
                for d in &p.drift {
                    csv.push_str(&format!("{},{:e},{:e}\n", d.t, d.measured, d.bound));
                }
                artifacts.push((format!("{name}.drift.csv"), csv));
            }
            Some(u)
        }
        Err(e) => {
            inv.push(solver_failure(&e));
            None
        }
    };

    if let (Some(o), Some(u)) = (&cfg.oracle, &solution) {
        inv.push(oracle_check(&r, u, o));
    }

    if let Some(n) = &cfg.network {
        let target = match &n.target {
            NetworkTarget::Solution => solution
                .as_ref()
                .map(embed_sine_to_trig)
                .ok_or(Error::Empty("no solution".into())),
            NetworkTarget::Random { dim, w, terms } => random_trig(*dim, *w, *terms, cfg.seeds[0]),
        };
        match target.and_then(|f| rate_study(&f, &n.widths, &cfg.seeds, n.activation, n.quadrature).map(|p| (f, p))) {
            Ok((f, points)) => {
                let c = crate::barron::barron_norm(&f);
                let worst = points.iter().map(|p| p.max_weight_sum).fold(0.0, f64::max);
                inv.push(InvariantResult::new(
                    "weight-budget",
                    worst <= 2.0 * c * (1.0 + 1e-12),
                    format!("max sum |c_i| {worst:e}, 2C {:e}", 2.0 * c),
                ));
                if let Some(slope) = log_log_slope(&points) {
                    inv.push(InvariantResult::new(
                        "network-slope",
                        (slope + 1.0).abs() <= n.slope_tol,
                        format!("slope {slope:.4}"),
                    ));
                }
                artifacts.push((format!("{name}.network.csv"), rate_csv(&points)));
            }
            Err(e) => inv.push(InvariantResult::new("network", false, e.to_string())),
        }
    }

    Ok(Outcome {
        name,
        invariants: inv,
        artifacts,
    })
}

fn oracle_check(r: &config::Resolved, u: &SineFunction<f64>, o: &OracleConfig) -> InvariantResult {
    let run = || -> crate::Result<(f64, f64)> {
        let p = FdProblem::from_sine(r.spec.clone(), &r.f, o.nodes)?;
        let sol = fd_minimize(&p, o.tol)?;
        let spectral = to_grid(u, o.nodes)?;
        let norm = sol.l2_norm();
        Ok((
            sol.l2_distance(spectral.values()) / norm.max(f64::MIN_POSITIVE),
            sol.residual,
        ))
    };
    match run() {
        Ok((rel, res)) => InvariantResult::new(
            "oracle-agreement",
            rel <= o.agreement,
            format!("relative L2 difference {rel:e} (FD residual {res:e})"),
        ),
        Err(e) => InvariantResult::new("oracle-agreement", false, e.to_string()),
    }
}

fn write_outcome(dir: &Path, outcome: &Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (file, contents) in &outcome.artifacts {
        std::fs::write(dir.join(file), contents)?;
    }
    let record = serde_json::to_string_pretty(&outcome.record()).expect("record serializes");
    std::fs::write(dir.join(format!("{}.result.json", outcome.name)), record)
}

/// Worker pool capped by `VS_THREADS` when set.
fn pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("VS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

/// Executes `run` and returns the process exit code.
pub fn execute(args: RunArgs) -> i32 {
    if args.list {
        for n in golden_names() {
            println!("{n}");
        }
        return EXIT_PASS;
    }
    let paths: Vec<PathBuf> = args.configs.iter().chain(&args.config_flags).cloned().collect();
    if paths.is_empty() {
        eprintln!("error: no config given");
        return EXIT_CONFIG;
    }
    let mut configs = Vec::with_capacity(paths.len());
    for p in &paths {
        match ExperimentConfig::load(p) {
            Ok(mut c) => {
                if let Some(s) = args.seed {
                    let n = c.seeds.len() as u64;
                    c.seeds = (s..s + n).collect();
                }
                configs.push(c);
            }
            Err(e) => {
                let rec = serde_json::json!({
                    "config": p.display().to_string(),
                    "status": "config-error",
                    "error": e.to_string(),
                });
                println!("{rec}");
                return EXIT_CONFIG;
            }
        }
    }
    let results: Vec<Result<Outcome, ConfigError>> =
        pool().install(|| configs.par_iter().map(run_experiment).collect());
    let mut code = EXIT_PASS;
    for (cfg, res) in configs.iter().zip(results) {
        match res {
            Ok(outcome) => {
                if !args.check {
                    let dir = args
                        .out_dir
                        .clone()
                        .or_else(|| cfg.out_dir.clone())
                        .unwrap_or_else(|| PathBuf::from("out"));
                    if let Err(e) = write_outcome(&dir, &outcome) {
                        eprintln!("error: writing artifacts for {}: {e}", outcome.name);
                        return EXIT_CONFIG;
                    }
                }
                println!(
                    "{}",
                    serde_json::to_string(&outcome.record()).expect("record serializes")
                );
                if !outcome.passed() && code == EXIT_PASS {
                    code = EXIT_INVARIANT;
                }
            }
            Err(e) => {
                let rec = serde_json::json!({"config": cfg.name(), "status": "config-error", "error": e.to_string()});
                println!("{rec}");
                code = EXIT_CONFIG;
            }
        }
    }
    code
}

pub fn main_from_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(Cli {
            command: Command::Run(a),
        }) => execute(a),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}
