//! `evolve` — run and inspect evolving-feedback regret experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.
//! `EVOLVE_STRICT_GAMMA=1` aborts runs whose tuned regularizer violates
//! the bandit admissibility condition instead of warning.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evolve_core::environments::{Environment, RoundEvents};
use evolve_core::harness::{
    bound_overlay, prepare, run_episodes, run_sweep, summarize, trace_from_file, trace_to_file,
    write_round_csv, write_summary_csv, write_sweep_csv, BoundOverlay, ExperimentConfig,
    HarnessError, TraceFile,
};
use evolve_core::metrics::{d_partials, lambda_partials};
use evolve_core::oracle::{
    best_action_hindsight, exhaustive_regret_small, grid_argmin_simplex, mc_unbiasedness,
    OracleError, OracleResult,
};
use evolve_core::solver::RegularizerParams;
use evolve_core::types::{validate_trace, ActionDistribution, LossVector};

#[derive(Parser)]
#[command(
    name = "evolve",
    version,
    about = "Regret minimization under retroactively evolving feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write rounds.csv, summary.csv, curve.csv and
    /// accuracy.json into the output directory.
    Run {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Also write one trace JSON per seed under `<out>/traces/`.
        #[arg(long)]
        emit_traces: bool,
    },
    /// Run a parameter sweep and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Assignment like delay=0,5,25 (see the README for parameters).
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check every trace invariant and print the violations found.
    Validate {
        /// Trace file (JSON) as written by `run --emit-traces`.
        #[arg(long)]
        trace: PathBuf,
        /// Override the declared evolution horizon.
        #[arg(long)]
        d_max: Option<usize>,
    },
    /// Brute-force reference computations.
    Oracle {
        #[command(subcommand)]
        oracle: OracleCmd,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Grid + pairwise-descent reference for the simplex argmin.
    GridArgmin {
        /// Comma-separated cumulative losses, one per action.
        #[arg(long, value_delimiter = ',')]
        loss: Vec<f64>,
        #[arg(long)]
        eta: f64,
        /// Log-barrier weight (default 0). Mutually exclusive with --gamma.
        #[arg(long, conflicts_with = "gamma")]
        barrier: Option<f64>,
        /// Barrier as 1/gamma.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Best fixed action on a JSON table of true losses `[[..K..] x T]`.
    Hindsight {
        #[arg(long)]
        losses: PathBuf,
    },
    /// Monte Carlo unbiasedness check of the importance-weighted estimator.
    McUnbiasedness {
        #[arg(long, value_delimiter = ',')]
        feedback: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        probs: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact expected regret of a small configuration (K^T <= 4096) by
    /// action-path enumeration. Uses the environment and learner of the
    /// given experiment config; seeds are ignored.
    ExhaustiveRegret {
        #[arg(long)]
        config: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        let code = match &e {
            OracleError::Solver(_) => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error(format!("reading {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| config_error(format!("parsing {what} {}: {e}", path.display())))
}

fn load_experiment(path: &Path) -> Result<ExperimentConfig, CliError> {
    let mut cfg: ExperimentConfig = read_json(path, "config")?;
    if std::env::var("EVOLVE_STRICT_GAMMA").as_deref() == Ok("1") {
        cfg.strict_gamma = true;
    }
    Ok(cfg)
}

fn cmd_run(config_path: &Path, out: &Path, emit_traces: bool) -> Result<(), CliError> {
    let cfg = load_experiment(config_path)?;
    let overlay = cfg.bound_overlay;
    let display_c = cfg.bound_display_constant;
    let ctx = prepare(cfg)?;
    for warning in &ctx.warnings {
        eprintln!("warning: {warning}");
    }
    let seeds = ctx.config.seeds.seeds();
    let traces = run_episodes(&ctx)?;
    let result = summarize(&ctx, &traces)?;

    fs::create_dir_all(out).map_err(HarnessError::Io)?;
    let mut rounds = Vec::new();
    write_round_csv(&mut rounds, &traces, &seeds, result.curve.comparator)
        .map_err(HarnessError::Io)?;
    fs::write(out.join("rounds.csv"), rounds).map_err(HarnessError::Io)?;

    let mut summary = Vec::new();
    write_summary_csv(&mut summary, std::slice::from_ref(&result.summary))
        .map_err(HarnessError::Io)?;
    fs::write(out.join("summary.csv"), summary).map_err(HarnessError::Io)?;

    let dp = d_partials(&ctx.commitment);
    let lp = lambda_partials(&ctx.commitment);
    let k = ctx.commitment.k();
    let cor1 = bound_overlay(BoundOverlay::Cor1, k, &dp, &lp, display_c);
    let cor2 = bound_overlay(BoundOverlay::Cor2, k, &dp, &lp, display_c);
    let mut curve = String::from("t,mean_regret,stderr,bound_cor1,bound_cor2_shape\n");
    for t in 1..=ctx.commitment.horizon() {
        curve.push_str(&format!(
            "{t},{},{},{},{}\n",
            result.curve.mean[t - 1],
            result.curve.stderr[t - 1],
            cor1[t - 1],
            cor2[t - 1]
        ));
    }
    fs::write(out.join("curve.csv"), curve).map_err(HarnessError::Io)?;

    let accuracy = serde_json::to_string_pretty(&result.accuracy)
        .map_err(HarnessError::Json)?;
    fs::write(out.join("accuracy.json"), accuracy).map_err(HarnessError::Io)?;

    if emit_traces {
        let dir = out.join("traces");
        fs::create_dir_all(&dir).map_err(HarnessError::Io)?;
        for (trace, seed) in traces.iter().zip(&seeds) {
            let file = trace_to_file(trace, ctx.d_max);
            let json = serde_json::to_string(&file).map_err(HarnessError::Json)?;
            fs::write(dir.join(format!("seed_{}.json", seed.0)), json)
                .map_err(HarnessError::Io)?;
        }
    }

    let overlay_name = match overlay {
        BoundOverlay::Cor1 => "first-order (exact constants)",
        BoundOverlay::Cor2 => "second-order (shape only)",
        BoundOverlay::None => "none",
    };
    println!(
        "T={} seeds={} mean_regret={:.4} stderr={:.4} D={:.4} lambda_sum={:.4} overlay={overlay_name}",
        ctx.commitment.horizon(),
        seeds.len(),
        result.curve.final_mean(),
        result.curve.final_stderr(),
        result.accuracy.d,
        result.accuracy.lambda_sum,
    );
    println!("wrote rounds.csv, summary.csv, curve.csv, accuracy.json to {}", out.display());
    Ok(())
}

fn cmd_sweep(config_path: &Path, vary: &str, out: &Path) -> Result<(), CliError> {
    let cfg = load_experiment(config_path)?;
    let (param, values_text) = vary
        .split_once('=')
        .ok_or_else(|| config_error("--vary expects param=v1,v2,..."))?;
    let values: Vec<f64> = values_text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| config_error(format!("value {v:?} in --vary: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(config_error("--vary needs at least one value"));
    }
    let rows = run_sweep(&cfg, param, &values);
    fs::create_dir_all(out).map_err(HarnessError::Io)?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows).map_err(HarnessError::Io)?;
    fs::write(out.join("sweep.csv"), csv).map_err(HarnessError::Io)?;
    for row in &rows {
        match (&row.summary, &row.error) {
            (Some(s), _) => println!(
                "{param}={}: mean_regret={:.4} stderr={:.4} D={:.4}",
                row.value, s.mean_regret, s.stderr, s.d
            ),
            (None, Some(e)) => println!("{param}={}: failed: {e}", row.value),
            _ => {}
        }
    }
    println!("wrote sweep.csv to {}", out.display());
    Ok(())
}

fn cmd_validate(trace_path: &Path, d_max_override: Option<usize>) -> Result<(), CliError> {
    let file: TraceFile = read_json(trace_path, "trace")?;
    let (trace, file_d_max) = trace_from_file(&file)?;
    let d_max = match d_max_override {
        Some(d) => evolve_core::types::EvolutionHorizon::Bounded(d),
        None => file_d_max,
    };
    let report = validate_trace(&trace, d_max);
    for violation in &report {
        println!("{violation}");
    }
    println!(
        "{} violation(s) in {} (T={}, K={}, d_max={d_max})",
        report.len(),
        trace_path.display(),
        trace.commitment.horizon(),
        trace.commitment.k(),
    );
    Ok(())
}

fn print_oracle_result(result: &OracleResult) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(result).map_err(HarnessError::Json)?;
    println!("{json}");
    Ok(())
}

fn cmd_oracle(cmd: OracleCmd) -> Result<(), CliError> {
    match cmd {
        OracleCmd::GridArgmin {
            loss,
            eta,
            barrier,
            gamma,
            resolution,
        } => {
            let barrier = match (barrier, gamma) {
                (Some(b), None) => b,
                (None, Some(g)) => {
                    if g <= 0.0 {
                        return Err(config_error("gamma must be positive"));
                    }
                    1.0 / g
                }
                (None, None) => 0.0,
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let params = RegularizerParams::new(eta, barrier)
                .map_err(|e| config_error(e.to_string()))?;
            let dist = grid_argmin_simplex(&loss, &params, resolution)?;
            print_oracle_result(&OracleResult {
                value: serde_json::json!(dist.probs()),
                method: format!(
                    "barycentric grid (resolution {resolution}) refined by 200 pairwise line-search sweeps"
                ),
                resolution: resolution as u64,
            })
        }
        OracleCmd::Hindsight { losses } => {
            let table: Vec<Vec<f64>> = read_json(&losses, "loss table")?;
            let vectors: Vec<LossVector> = table
                .into_iter()
                .map(|row| LossVector::new(row).map_err(|e| config_error(e.to_string())))
                .collect::<Result<_, _>>()?;
            let (action, total) = best_action_hindsight(&vectors)?;
            print_oracle_result(&OracleResult {
                value: serde_json::json!({ "action": action + 1, "total_loss": total }),
                method: "exhaustive column scan, ties to the lowest index".into(),
                resolution: vectors.len() as u64,
            })
        }
        OracleCmd::McUnbiasedness {
            feedback,
            probs,
            samples,
            seed,
        } => {
            let feedback = LossVector::new(feedback).map_err(|e| config_error(e.to_string()))?;
            let p = ActionDistribution::new(probs).map_err(|e| config_error(e.to_string()))?;
            let r = mc_unbiasedness(&feedback, &p, samples, seed)?;
            print_oracle_result(&OracleResult {
                value: serde_json::json!({
                    "mean": r.mean,
                    "stderr": r.stderr,
                    "sigma_deviation": r.sigma_deviation,
                    "max_sigma_deviation": r.max_sigma_deviation(),
                }),
                method: "Monte Carlo over the sampling distribution".into(),
                resolution: samples as u64,
            })
        }
        OracleCmd::ExhaustiveRegret { config } => {
            let cfg = load_experiment(&config)?;
            let env = Environment::new(cfg.environment.clone()).map_err(HarnessError::Env)?;
            let commitment = env.materialize().map_err(HarnessError::Env)?;
            let events = RoundEvents::from_commitment(&commitment);
            let built = cfg
                .learner
                .build(
                    commitment.k(),
                    commitment.horizon(),
                    commitment.declared_horizon(),
                )
                .map_err(HarnessError::LearnerConfig)?;
            let regret = exhaustive_regret_small(&commitment, &events, built.learner.as_ref())?;
            print_oracle_result(&OracleResult {
                value: serde_json::json!({ "expected_regret": regret }),
                method: "exact action-path enumeration".into(),
                resolution: (commitment.k() as u64).pow(commitment.horizon() as u32),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            emit_traces,
        } => cmd_run(&config, &out, emit_traces),
        Command::Sweep { config, vary, out } => cmd_sweep(&config, &vary, &out),
        Command::Validate { trace, d_max } => cmd_validate(&trace, d_max),
        Command::Oracle { oracle } => cmd_oracle(oracle),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
