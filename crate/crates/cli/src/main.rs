//! `phlab`: run, list and describe the certification experiments.
//!
//! Exit status: 0 when every gate passes, 1 on a failed gate, 2 on an
//! invalid configuration, 3 on any other error. The thread count is read
//! from `PHLAB_THREADS`.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parabolic_hardy::verify;

use config::RunConfig;
use runner::RunError;

#[derive(Parser)]
#[command(name = "phlab", version, about = "Parabolic Hardy space laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or `all`.
    Run {
        experiment: Option<String>,
        /// `key = value` config file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..=2))]
        n: Option<u64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// List the experiment catalogue.
    List,
    /// Show the parameters and statement of one experiment.
    Describe { experiment: String },
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("PHLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("PHLAB_THREADS={v:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn describe(id: &str) -> Option<String> {
    let e = verify::experiment_info(id)?;
    let mut s = format!("{}\n  {}\n\ncertifies:\n  {}\n\nparameters:\n", e.id, e.summary, e.statement);
    for (name, default, meaning) in e.parameters {
        s.push_str(&format!("  {name:<20} default {default:<6} {meaning}\n"));
    }
    Some(s)
}

fn resolve(
    experiment: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    n: Option<u64>,
    tmax: Option<f64>,
    out: Option<PathBuf>,
    tol: Option<f64>,
) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = config {
        cfg.load(&path).map_err(|e| e.to_string())?;
    }
    if experiment.is_some() {
        cfg.experiment = experiment;
    }
    if let Some(s) = seed {
        cfg.params.seed = s;
    }
    if let Some(n) = n {
        cfg.params.n = n as usize;
    }
    if tmax.is_some() {
        cfg.params.t_max = tmax;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    if tol.is_some() {
        cfg.params.tol = tol;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("phlab: {e}");
        return ExitCode::from(2);
    }
    match cli.command {
        Command::List => {
            for e in verify::EXPERIMENTS {
                println!("{:<22} {}", e.id, e.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Describe { experiment } => match describe(&experiment) {
            Some(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("phlab: unknown experiment {experiment:?}; see `phlab list`");
                ExitCode::from(2)
            }
        },
        Command::Run {
            experiment,
            config,
            seed,
            n,
            tmax,
            out,
            tol,
        } => {
            let cfg = match resolve(experiment, config, seed, n, tmax, out, tol) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("phlab: {e}");
                    return ExitCode::from(2);
                }
            };
            match runner::run(&cfg) {
                Ok(reports) => {
                    for r in &reports {
                        println!("{:<22} {} -> {}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.dir.display());
                    }
                    if reports.iter().all(|r| r.pass) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(RunError::Invalid(e)) => {
                    eprintln!("phlab: invalid configuration: {e}");
                    ExitCode::from(2)
                }
                Err(RunError::Failed(e)) => {
                    eprintln!("phlab: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describe_contains_statement() {
        for e in verify::EXPERIMENTS {
            assert!(describe(e.id).unwrap().contains(e.statement));
        }
        assert!(describe("missing").is_none());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "experiment = lp-probe\nseed = 4\ntol = 0.5\n").unwrap();
        let c = resolve(None, Some(path), Some(8), None, None, None, None).unwrap();
        assert_eq!(c.experiment.as_deref(), Some("lp-probe"));
        assert_eq!(c.params.seed, 8);
        assert_eq!(c.params.tol, Some(0.5));
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        assert!(Cli::try_parse_from(["phlab", "run", "certify-T", "--n", "3"]).is_err());
    }
}
