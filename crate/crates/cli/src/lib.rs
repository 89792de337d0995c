//! The `courl` command line: configuration layering, subcommand dispatch,
//! atomic output, and exit codes.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use courl_core::synth::RNG_ALGORITHM;
use courl_core::{Error, Result};

use crate::config::{Overrides, RunConfig};
use crate::output::{digest_inputs, unix_now, RunMetadata};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "courl", version, about = "Detect coordinated accounts from co-shared URLs")]
pub struct Cli {
    /// Config file: TOML, or JSON when the name ends in .json. Flags override it.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Corpus statistics: hashtag, mention, domain, and language tables.
    Stats,
    /// Build the user-URL matrix and similarity network snapshots.
    Build,
    /// Full detection: network, centrality, percentile flagging, clusters.
    Detect,
    /// Account- and content-level forensics for a flagged set.
    Characterize,
    /// Generate a labeled synthetic corpus.
    Synth,
    /// Score a flagged set against ground truth.
    Eval,
    /// Detection quality over a synthetic parameter grid.
    Sweep,
    /// Convert a stored network snapshot to edge-list CSV or GraphML.
    Export,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Build => "build",
            Command::Detect => "detect",
            Command::Characterize => "characterize",
            Command::Synth => "synth",
            Command::Eval => "eval",
            Command::Sweep => "sweep",
            Command::Export => "export",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) => EXIT_CONFIG,
        Error::EmptyMatrix | Error::EmptyGraph => EXIT_EMPTY,
        Error::Io { .. } | Error::Format { .. } | Error::Json(_) | Error::Csv(_) => EXIT_IO,
    }
}

/// Resolve the configuration: defaults, then the file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(cli.overrides.clone());
    cfg.validate()?;
    Ok(cfg)
}

/// Run one command and commit its outputs. Returns the one-line summary.
pub fn execute(cli: &Cli) -> Result<String> {
    let cfg = resolve_config(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;

    let command = cli.command;
    let keys = commands::input_keys(command.name());
    let inputs: Vec<(&str, &Option<PathBuf>)> = keys
        .iter()
        .map(|&k| {
            let slot = match k {
                "posts" => &cfg.posts,
                "profiles" => &cfg.profiles,
                "suspended" => &cfg.suspended,
                "expansions" => &cfg.expansions,
                "flagged" => &cfg.flagged,
                "truth" => &cfg.truth,
                _ => &cfg.network,
            };
            (k, slot)
        })
        .collect();

    let (done, digests) = pool.install(|| -> Result<_> {
        let done = match command {
            Command::Stats => commands::stats(&cfg),
            Command::Build => commands::build(&cfg),
            Command::Detect => commands::detect(&cfg),
            Command::Characterize => commands::characterize_cmd(&cfg),
            Command::Synth => commands::synth(&cfg),
            Command::Eval => commands::eval(&cfg),
            Command::Sweep => commands::sweep_cmd(&cfg),
            Command::Export => commands::export(&cfg),
        }?;
        Ok((done, digest_inputs(&inputs)?))
    })?;

    let mut outputs = done.outputs;
    let mut names = outputs.names();
    names.push("run.json".into());
    let meta = RunMetadata {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        created_unix: unix_now(),
        threads: pool.current_num_threads(),
        seed: cfg.seed,
        rng: RNG_ALGORITHM,
        config: &cfg,
        inputs: digests,
        summary: done.summary,
        outputs: names,
    };
    outputs.add_json("run.json", &meta)?;
    outputs.commit(&cfg.output)?;
    Ok(format!("{}; outputs in {}", done.message, cfg.output.display()))
}

/// Entry point shared by the binary and tests. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("courl {}: {e}", cli.command.name());
            exit_code(&e)
        }
    }
}
