//! Batch and service entry points for the simulator.

// `!(x > y)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod export;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lusim_core::config::{load_configs, ConfigSet, Severity};

/// Process exit status. No other codes are ever returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Ok = 0,
    Config = 1,
    Runtime = 2,
    Protocol = 3,
}

impl From<Exit> for std::process::ExitCode {
    fn from(e: Exit) -> Self {
        std::process::ExitCode::from(e as u8)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Failure {
            exit,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Exit::Config, message)
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self::new(Exit::Runtime, message)
    }

    pub fn protocol(message: impl Into<String>) -> Self {
        Self::new(Exit::Protocol, message)
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Debug, Parser)]
#[command(name = "lusim", version, about = "Cell-free network channel simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct ConfigArgs {
    #[arg(long, default_value = "configs/gscm.json")]
    pub gscm: PathBuf,
    #[arg(long, default_value = "configs/radio.json")]
    pub radio: PathBuf,
    #[arg(long, default_value = "configs/scenario.json")]
    pub scenario: PathBuf,
    /// Replaces every seed in the documents.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and cross-check the configuration documents.
    Validate {
        #[command(flatten)]
        configs: ConfigArgs,
    },
    /// Spawn, filter and associate MPCs and write them to a spawn file.
    Spawn {
        #[command(flatten)]
        configs: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Step the scenario and log every (BS, UE) channel per step.
    Run {
        #[command(flatten)]
        configs: ConfigArgs,
        /// Spawn file to load instead of spawning in memory.
        #[arg(long)]
        spawn: Option<PathBuf>,
        /// Channel log path; defaults to the scenario's `channel_log_path`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seconds; overrides the scenario duration.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Serve the engine protocol until a Shutdown arrives.
    Serve {
        #[command(flatten)]
        configs: ConfigArgs,
        #[arg(long)]
        spawn: Option<PathBuf>,
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Per-record statistics of a channel log.
    Export {
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tx: Option<u32>,
        #[arg(long)]
        rx: Option<u32>,
        /// Earliest timestamp kept, seconds.
        #[arg(long)]
        from: Option<f64>,
        /// Latest timestamp kept, seconds.
        #[arg(long)]
        to: Option<f64>,
    },
    /// Relay datagrams between the system simulator and the engine.
    Proxy {
        /// Listen address.
        #[arg(long)]
        endpoint: Option<String>,
        /// Engine address, bound as the second peer in advance.
        #[arg(long)]
        engine: Option<String>,
    },
    /// Drive a serving engine with the system-level simulator.
    Syssim {
        #[command(flatten)]
        configs: ConfigArgs,
        /// Engine (or proxy) address.
        #[arg(long)]
        endpoint: Option<String>,
        /// JSON policy document.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Results path; defaults to the scenario's `results_path`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Send Shutdown to the engine when done.
        #[arg(long)]
        shutdown: bool,
    },
}

/// Loads the trio, applies `--seed` and fails on any error-level cross-check.
/// Warnings go to stderr.
pub fn load(args: &ConfigArgs) -> Result<ConfigSet, Failure> {
    let mut configs = load_configs(&args.gscm, &args.radio, &args.scenario)
        .map_err(|errs| Failure::config(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")))?;
    if let Some(seed) = args.seed {
        configs.override_seed(seed);
    }
    let diags = configs.cross_check();
    let mut errors = Vec::new();
    for d in &diags {
        match d.severity {
            Severity::Warning => eprintln!("{d}"),
            Severity::Error => errors.push(d.to_string()),
        }
    }
    if errors.is_empty() {
        Ok(configs)
    } else {
        Err(Failure::config(errors.join("\n")))
    }
}

pub fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Validate { configs } => commands::validate(&configs),
        Command::Spawn { configs, out } => commands::spawn(&configs, &out),
        Command::Run {
            configs,
            spawn,
            out,
            duration,
        } => commands::run(&configs, spawn.as_deref(), out.as_deref(), duration),
        Command::Serve {
            configs,
            spawn,
            endpoint,
        } => commands::serve(&configs, spawn.as_deref(), endpoint.as_deref()),
        Command::Export {
            log,
            format,
            out,
            tx,
            rx,
            from,
            to,
        } => {
            let selector = export::Selector { tx, rx, from, to };
            export::export(&log, format, &selector, out.as_deref())
        }
        Command::Proxy { endpoint, engine } => commands::proxy(endpoint.as_deref(), engine.as_deref()),
        Command::Syssim {
            configs,
            endpoint,
            policy,
            out,
            shutdown,
        } => commands::syssim(
            &configs,
            endpoint.as_deref(),
            policy.as_deref(),
            out.as_deref(),
            shutdown,
        ),
    }
}
