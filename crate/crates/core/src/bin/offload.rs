use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use offload_core::harness::{child_rng, write_records, EpisodeRecord, ExperimentConfig, Scenario};
use offload_core::oracle::{exhaustive_optimum, scores_match, tiny_config};
use offload_core::{run_ga, run_sweep, Error, MetricsReport, PolicyKind};

/// Largest search space the `oracle` command will enumerate.
const ORACLE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "offload", version, about = "IoT-edge-cloud task offloading simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one episode and print its metrics.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append-free CSV with a header and this episode's row.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured experiment grid and write a CSV.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Defaults to `sweep.output` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration file.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare the GA against exhaustive search on a small instance.
    Oracle {
        /// Scenario and GA settings; the built-in tiny instance when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds to check, starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        runs: u64,
    },
}

fn load(path: Option<&Path>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn print_report(policy: PolicyKind, seed: u64, r: &MetricsReport, objective: f64) {
    println!("policy              {policy}");
    println!("seed                {seed}");
    println!("satisfaction_ratio  {:.4}", r.satisfaction_ratio);
    let per: Vec<String> = r.per_subnet_sr.iter().map(|v| format!("{v:.3}")).collect();
    println!("per_subnet_sr       [{}]", per.join(", "));
    println!("jfi                 {:.4}", r.jfi);
    println!(
        "comm_util           {:.4} (std {:.4})",
        r.comm_util_mean, r.comm_util_std
    );
    println!(
        "comp_util           {:.4} (std {:.4})",
        r.comp_util_mean, r.comp_util_std
    );
    println!("local_ratio         {:.4}", r.local_ratio);
    println!("objective           {objective}");
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run {
            config,
            policy,
            seed,
            out,
        } => {
            let exp = load(config.as_deref())?;
            let result = offload_core::run_episode(policy, &exp.scenario, &exp.ga, exp.random_retries(), seed)?;
            print_report(policy, seed, &result.report, result.objective);
            if let Some(path) = out {
                let rec = EpisodeRecord::from_outcome(policy, &exp.scenario, seed, Ok(result));
                write_records(&path, &[rec])?;
            }
        }
        Command::Sweep { config, out } => {
            let exp = load(config.as_deref())?;
            let path = out.or_else(|| exp.sweep.output.clone()).ok_or_else(|| Error::Config {
                field: "sweep.output",
                reason: "no output path given".into(),
            })?;
            let rows = run_sweep(&exp, &path)?;
            println!("wrote {rows} rows to {}", path.display());
        }
        Command::Validate { config } => {
            load(config.as_deref())?;
            println!("configuration ok");
        }
        Command::Oracle { config, seed, runs } => {
            let mut exp = load(config.as_deref())?;
            if config.is_none() {
                exp.scenario = tiny_config();
            }
            let mut matched = [0u64; 2];
            for s in seed..seed + runs {
                let scenario = Scenario::draw(&exp.scenario, s)?;
                let inst = scenario.instance();
                for (k, policy) in [PolicyKind::Minimum, PolicyKind::Deterministic].into_iter().enumerate() {
                    let oracle = exhaustive_optimum(policy, &inst, &exp.ga, ORACLE_LIMIT)?;
                    let ga = run_ga(policy, &inst, &exp.ga, &mut child_rng(s, "solver"))?;
                    let ok = scores_match(ga.best_score, oracle.best_score);
                    matched[k] += ok as u64;
                    println!(
                        "seed {s:>4} {policy:<13} oracle {:<14.9} ga {:<14.9} {}",
                        oracle.best_score,
                        ga.best_score,
                        if ok { "match" } else { "MISS" }
                    );
                }
            }
            println!(
                "minimum matched {}/{runs}, deterministic matched {}/{runs}",
                matched[0], matched[1]
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
