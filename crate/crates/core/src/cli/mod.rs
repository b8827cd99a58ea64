//! Command-line front end. [`run`] parses arguments, dispatches, and maps the
//! outcome onto the process exit status.

mod args;
mod commands;
mod simulate;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub use args::parse_sweep;

/// Success.
pub const EXIT_OK: i32 = 0;
/// Invalid arguments, input or configuration.
pub const EXIT_INVALID: i32 = 1;
/// The run completed but channel failures exceeded the threshold.
pub const EXIT_CHANNEL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Codec(#[from] crate::codec::CodecError),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
    #[error(transparent)]
    Report(#[from] crate::report::ReportError),
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Whether a completed run is dominated by channel failures.
pub(crate) enum Outcome {
    Done,
    ChannelFailures,
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_INVALID,
            };
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::ChannelFailures) => {
            let _ = writeln!(err, "channel failures exceeded the threshold");
            EXIT_CHANNEL
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}
