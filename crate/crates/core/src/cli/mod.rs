//! The `ecg-beatnet` command line.
//!
//! ```text
//! ecg-beatnet [--config PATH] [--data-dir DIR] [--seed N] [--records A,B,..]
//!             [--format text|json] [--strict] <fetch|inspect|segment|train|eval|predict>
//! ```
//!
//! Settings resolve as flag, then `ECG_BEATNET_DATA` (data directory only),
//! then the config file, then the built-in defaults. Exit codes: 0 success,
//! 1 usage or configuration error, 2 data or parse error, 3 network error.

mod commands;
mod config;
mod fetch;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{locate_record, Format};
pub use config::{Overrides, RunConfig, SplitConfig, DEFAULT_BASE_URL};
pub use fetch::{fetch_records, FetchOptions, FileAction, FileEntry, FileOutcome, Manifest, MANIFEST_NAME, RECORD_EXTENSIONS};

use crate::dataset::DatasetError;
use crate::model::ModelError;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NETWORK: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ecg-beatnet", version, about = "Five-class ECG beat classification on MIT-BIH")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory holding the WFDB record files.
    #[arg(long, global = true, env = "ECG_BEATNET_DATA", value_name = "DIR")]
    data_dir: Option<PathBuf>,
    /// Seed for the split and the model initialization.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated record names, replacing the configured list.
    #[arg(long, global = true, value_delimiter = ',', value_name = "NAMES")]
    records: Option<Vec<String>>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Treat checksum and split-seed warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download .hea, .dat and .atr files and record their digests.
    Fetch {
        /// Server directory holding the record files.
        #[arg(long, env = "ECG_BEATNET_BASE_URL")]
        base_url: Option<String>,
        /// Concurrent downloads.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
    /// Summarize one record: leads, annotation histogram, beat classes.
    Inspect {
        /// Record name in the data directory, or a path to the record.
        record: String,
        /// Annotation file extension.
        #[arg(long, default_value = "atr")]
        annotations: String,
    },
    /// Preprocess every configured record into the beat-window cache.
    Segment,
    /// Train on the cache and write the best-validation checkpoint.
    Train {
        /// Overrides the configured epoch count.
        #[arg(long)]
        epochs: Option<usize>,
        /// Defaults to model.ebnc in the output directory.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Per-epoch JSON-lines log.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on the held-out test bucket.
    Eval {
        /// Defaults to model.ebnc in the output directory.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Defaults to eval.json in the output directory.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Classify every annotated beat of one record.
    Predict {
        /// Record name in the data directory, or a path to the record.
        record: String,
        /// Defaults to model.ebnc in the output directory.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Annotation file extension supplying the beat positions.
        #[arg(long, default_value = "atr")]
        annotations: String,
    },
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Dataset(DatasetError::InvalidConfig(_) | DatasetError::BadFractions(_))
        | Error::Model(ModelError::InvalidConfig(_) | ModelError::ConfigMismatch { .. }) => EXIT_USAGE,
        Error::Network(_) => EXIT_NETWORK,
        _ => EXIT_DATA,
    }
}

fn resolve(cli: &Cli) -> crate::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let epochs = match cli.command {
        Command::Train { epochs, .. } => epochs,
        _ => None,
    };
    cfg.apply(&Overrides {
        data_dir: cli.data_dir.clone(),
        seed: cli.seed,
        records: cli.records.clone(),
        epochs,
    });
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> crate::Result<()> {
    let cfg = resolve(&cli)?;
    let mut ctx = commands::Ctx {
        out,
        err,
        format: cli.format,
        strict: cli.strict,
    };
    match cli.command {
        Command::Fetch { base_url, jobs } => {
            let opts = FetchOptions {
                base_url: base_url.unwrap_or_else(|| cfg.base_url.clone()),
                jobs,
                ..Default::default()
            };
            commands::fetch(&mut ctx, &cfg, &opts)
        }
        Command::Inspect { record, annotations } => commands::inspect(&mut ctx, &cfg, &record, &annotations),
        Command::Segment => commands::segment(&mut ctx, &cfg),
        Command::Train { checkpoint, log, .. } => {
            let ck = checkpoint.unwrap_or_else(|| cfg.checkpoint_path());
            let log = log.unwrap_or_else(|| cfg.log_path());
            commands::train_cmd(&mut ctx, &cfg, &ck, &log)
        }
        Command::Eval { checkpoint, report } => {
            let ck = checkpoint.unwrap_or_else(|| cfg.checkpoint_path());
            let report = report.unwrap_or_else(|| cfg.report_path());
            commands::eval_cmd(&mut ctx, &cfg, &ck, &report)
        }
        Command::Predict {
            record,
            checkpoint,
            annotations,
        } => {
            let ck = checkpoint.unwrap_or_else(|| cfg.checkpoint_path());
            commands::predict_cmd(&mut ctx, &cfg, &ck, &record, &annotations)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if informational {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
