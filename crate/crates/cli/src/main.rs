//! `strepr`: run strategic-representation experiments from configs or flags.
//!
//! Exit codes: 0 ok, 1 I/O, 2 usage or config, 3 not realizable, 4 parse,
//! 5 size or divisibility guard, 6 any other domain error.

mod config;
mod experiments;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{Config, ConfigError};
use crate::experiments::Outcome;

#[derive(Parser, Debug)]
#[command(name = "strepr", version, about = "Strategic representation games, exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment named in a config file; writes report.txt and any CSV.
    Run {
        config: PathBuf,
        /// Override `user.type` (naive, agnostic, strategic)
        #[arg(long)]
        user: Option<String>,
        /// Override `user.k`
        #[arg(long)]
        k: Option<usize>,
        /// Override `user.seed`
        #[arg(long)]
        seed: Option<u64>,
        /// Override `user.delta`
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Learn an order-k choice function with zero empirical error.
    Learn {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        k: usize,
        /// Choice-function file to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Payoffs of a choice function under a distribution and value table.
    Payoff {
        #[arg(long)]
        choice: PathBuf,
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        value: PathBuf,
        #[arg(long, default_value = "strategic")]
        responder: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Induced complexity of a value table.
    Complexity {
        #[arg(long = "value-table")]
        value_table: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diminishing-returns error bound for k = 1..=k2.
    DrCurve {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k2: usize,
        /// CSV file to write
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form system payoff for k = 1..=k2.
    SysCurve {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k2: usize,
        /// CSV file to write
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generalization bound for the order-k learner.
    GenBound {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long = "C", default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The agnostic user's decision on a dataset.
    Agnostic {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use strepr::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::NotRealizable { .. } => 3,
                E::Parse { .. } => 4,
                E::UniverseTooLarge(_) | E::SearchSpaceTooLarge(_) | E::MemoCapExceeded { .. } | E::DivisibilityViolated(_) => 5,
                _ => 6,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    6
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

fn run_config(path: &Path, overrides: Vec<(&str, String)>) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config `{}`", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut cfg = Config::parse(&text, &base)?;
    for (k, v) in overrides {
        cfg.override_with(k, v)?;
    }
    let outcome = experiments::run(&cfg)?;
    let dir = match cfg.get("output.dir") {
        Some(d) => cfg.resolve(d),
        None => cfg.base().to_path_buf(),
    };
    fs::create_dir_all(&dir).with_context(|| format!("output.dir: cannot create `{}`", dir.display()))?;
    let report = outcome.report.render();
    write(&dir.join("report.txt"), &report)?;
    if let Some(csv) = &outcome.csv {
        write(&dir.join("curve.csv"), csv)?;
    }
    if let Some(choice) = &outcome.choice {
        write(&dir.join("choice.txt"), choice)?;
    }
    print!("{report}");
    Ok(())
}

/// Prints the report; `--out` gets the CSV or choice file when there is one,
/// otherwise the report itself.
fn emit(outcome: Outcome, out: Option<&Path>) -> Result<()> {
    let report = outcome.report.render();
    if let Some(out) = out {
        let body = outcome.choice.as_ref().or(outcome.csv.as_ref()).unwrap_or(&report);
        write(out, body)?;
    }
    print!("{report}");
    Ok(())
}

fn run_flags(pairs: Vec<(&str, String)>, out: Option<&Path>) -> Result<()> {
    let cfg = Config::from_pairs(pairs)?;
    emit(experiments::run(&cfg)?, out)
}

fn curve_pairs(name: &str, q: usize, n: usize, k2: usize) -> Vec<(&'static str, String)> {
    vec![
        ("experiment", name.to_string()),
        ("instance.q", q.to_string()),
        ("instance.n", n.to_string()),
        ("instance.k2", k2.to_string()),
    ]
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            user,
            k,
            seed,
            delta,
        } => {
            let mut overrides = Vec::new();
            if let Some(u) = user {
                overrides.push(("user.type", u));
            }
            if let Some(k) = k {
                overrides.push(("user.k", k.to_string()));
            }
            if let Some(s) = seed {
                overrides.push(("user.seed", s.to_string()));
            }
            if let Some(d) = delta {
                overrides.push(("user.delta", d.to_string()));
            }
            run_config(&config, overrides)
        }
        Command::Learn { data, k, out } => run_flags(
            vec![
                ("experiment", "learn".into()),
                ("data.path", path_str(&data)),
                ("user.k", k.to_string()),
            ],
            Some(&out),
        ),
        Command::Payoff {
            choice,
            dist,
            value,
            responder,
            out,
        } => run_flags(
            vec![
                ("experiment", "payoff".into()),
                ("choice.path", path_str(&choice)),
                ("distribution.source", "file".into()),
                ("distribution.path", path_str(&dist)),
                ("value.path", path_str(&value)),
                ("responder", responder),
            ],
            out.as_deref(),
        ),
        Command::Complexity { value_table, out } => run_flags(
            vec![("experiment", "complexity".into()), ("value.path", path_str(&value_table))],
            out.as_deref(),
        ),
        Command::DrCurve { q, n, k2, out } => run_flags(curve_pairs("dr-curve", q, n, k2), out.as_deref()),
        Command::SysCurve { q, n, k2, out } => run_flags(curve_pairs("sys-curve", q, n, k2), out.as_deref()),
        Command::GenBound {
            q,
            k,
            m,
            delta,
            epsilon,
            c,
            out,
        } => run_flags(
            vec![
                ("experiment", "gen-bound".into()),
                ("instance.q", q.to_string()),
                ("user.k", k.to_string()),
                ("bound.m", m.to_string()),
                ("bound.delta", delta.to_string()),
                ("bound.epsilon", epsilon.to_string()),
                ("bound.c", c.to_string()),
            ],
            out.as_deref(),
        ),
        Command::Agnostic { data, delta, seed, out } => run_flags(
            vec![
                ("experiment", "agnostic".into()),
                ("data.path", path_str(&data)),
                ("user.delta", delta.to_string()),
                ("user.seed", seed.to_string()),
            ],
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // clap's message spans several lines; keep the reason on one.
            let msg = e.to_string();
            let reason: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.is_empty() && !l.starts_with("Usage:"))
                .collect();
            eprintln!("error: {}", reason.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
