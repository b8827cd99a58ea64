use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::channel::{DecoderKind, LdpcConfig, Modulation};
use crate::ingest::TrackFormat;
use crate::pipeline::CbrMode;

#[derive(Parser, Debug)]
#[command(
    name = "oarvc",
    version,
    about = "OAR semantic video codec and channel simulator"
)]
pub(crate) struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub(crate) enum Command {
    /// Annotation tracks to OAR groups of pictures (jsonl, one GoP per line).
    Extract(ExtractArgs),
    /// Tracks or OAR jsonl to a bitstream container.
    Encode(EncodeArgs),
    /// Bitstream container back to OAR jsonl.
    Decode(DecodeArgs),
    /// A bitstream container or an image through the coded channel.
    Transmit(TransmitArgs),
    /// Monte Carlo sweep over SNR and channel configurations.
    Simulate(SimulateArgs),
    /// Render a synthetic scene with its tracks and OAR ground truth.
    Synth(SynthArgs),
    /// Rate accounting and report aggregation.
    Report(ReportArgs),
}

fn parse_ldpc(s: &str) -> Result<LdpcConfig, String> {
    s.parse()
        .map_err(|e: crate::channel::ChannelError| e.to_string())
}

fn parse_mod(s: &str) -> Result<Modulation, String> {
    s.parse()
        .map_err(|e: crate::channel::ChannelError| e.to_string())
}

fn parse_decoder(s: &str) -> Result<DecoderKind, String> {
    s.parse()
        .map_err(|e: crate::channel::ChannelError| e.to_string())
}

fn parse_cbr_mode(s: &str) -> Result<CbrMode, String> {
    s.parse()
        .map_err(|e: crate::pipeline::PipelineError| e.to_string())
}

fn parse_format(s: &str) -> Result<TrackFormat, String> {
    s.parse()
}

/// Parsed SNR sweep.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Sweep(pub Vec<f64>);

fn parse_sweep_arg(s: &str) -> Result<Sweep, String> {
    parse_sweep(s).map(Sweep)
}

/// `start:stop:step` (inclusive), a comma list, or a single value.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number {t:?}"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [a, b, c] => {
            let (a, b, c) = (num(a)?, num(b)?, num(c)?);
            if !(c > 0.0) || b < a {
                return Err(format!(
                    "bad sweep {s:?}: need start <= stop and a positive step"
                ));
            }
            let n = ((b - a) / c + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * c).collect()
        }
        [_] => s.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("bad sweep {s:?}")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("bad sweep {s:?}"));
    }
    Ok(values)
}

#[derive(Args, Debug, Clone)]
pub(crate) struct TrackArgs {
    /// Track file.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// jsonl or detrac.
    #[arg(long, default_value = "jsonl", value_parser = parse_format)]
    pub format: TrackFormat,
    /// Background forefront rectangles, jsonl.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long = "w", alias = "width", default_value_t = 960)]
    pub width: u32,
    #[arg(long = "h", alias = "height", default_value_t = 540)]
    pub height: u32,
    /// Frames per group of pictures.
    #[arg(long, default_value_t = 15)]
    pub gop: u32,
}

#[derive(Args, Debug)]
pub(crate) struct ExtractArgs {
    #[command(flatten)]
    pub tracks: TrackArgs,
    /// Output jsonl; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub(crate) struct EncodeArgs {
    #[command(flatten)]
    pub tracks: TrackArgs,
    /// Treat the input as OAR jsonl written by `extract`.
    #[arg(long)]
    pub oar: bool,
    /// Angle quantisation bits.
    #[arg(long, default_value_t = 8)]
    pub q: u8,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 25.0)]
    pub fps: f64,
}

#[derive(Args, Debug)]
pub(crate) struct DecodeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum Payload {
    /// A bitstream container.
    Oar,
    /// A PPM frame, sent through the image codec.
    Image,
}

#[derive(Args, Debug, Clone)]
pub(crate) struct LinkArgs {
    #[arg(long, alias = "ldpc-rate", default_value = "1/3", value_parser = parse_ldpc)]
    pub ldpc: LdpcConfig,
    #[arg(long = "mod", default_value = "4qam", value_parser = parse_mod)]
    pub modulation: Modulation,
    #[arg(long, default_value = "sum-product", value_parser = parse_decoder)]
    pub decoder: DecoderKind,
    #[arg(long, default_value = "ideal", value_parser = parse_cbr_mode)]
    pub cbr_mode: CbrMode,
    /// Exit with status 2 when the failure fraction exceeds this.
    #[arg(long, default_value_t = 0.5)]
    pub fail_threshold: f64,
}

#[derive(Args, Debug)]
pub(crate) struct TransmitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Payload::Oar)]
    pub kind: Payload,
    #[command(flatten)]
    pub link: LinkArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub snr: f64,
    #[arg(long)]
    pub seed: u64,
    /// Image codec for `--kind image`: raw, ppm or external.
    #[arg(long, default_value = "ppm")]
    pub codec: String,
    #[arg(long, default_value_t = 50)]
    pub quality: u32,
    /// Received container or frame. Lost streams are left out.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub(crate) struct SimulateArgs {
    /// SNR points in dB: `start:stop:step`, a comma list, or one value.
    #[arg(long, default_value = "0:20:5", allow_hyphen_values = true, value_parser = parse_sweep_arg)]
    pub snr: Sweep,
    /// OAR-path LDPC rates, comma separated.
    #[arg(long, alias = "ldpc-rate", default_value = "1/3", value_delimiter = ',', value_parser = parse_ldpc)]
    pub ldpc: Vec<LdpcConfig>,
    /// OAR-path constellations, comma separated.
    #[arg(long = "mod", default_value = "4qam", value_delimiter = ',', value_parser = parse_mod)]
    pub modulation: Vec<Modulation>,
    #[arg(long, default_value = "sum-product", value_parser = parse_decoder)]
    pub decoder: DecoderKind,
    #[arg(long, default_value = "ideal", value_parser = parse_cbr_mode)]
    pub cbr_mode: CbrMode,
    /// GoPs per sweep point.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long = "w", alias = "width", default_value_t = 64)]
    pub width: u32,
    #[arg(long = "h", alias = "height", default_value_t = 48)]
    pub height: u32,
    #[arg(long, default_value_t = 15)]
    pub gop: u32,
    #[arg(long, default_value_t = 4)]
    pub objects: usize,
    #[arg(long, default_value_t = 8)]
    pub q: u8,
    #[arg(long, default_value_t = 25.0)]
    pub fps: f64,
    /// Also send the reference frame and score the reconstruction.
    #[arg(long)]
    pub with_reference: bool,
    #[arg(long, default_value = "2/3", value_parser = parse_ldpc)]
    pub ref_ldpc: LdpcConfig,
    #[arg(long, default_value = "16qam", value_parser = parse_mod)]
    pub ref_mod: Modulation,
    #[arg(long, default_value = "raw")]
    pub codec: String,
    #[arg(long, default_value_t = 50)]
    pub quality: u32,
    /// Exit with status 2 when the overall failure fraction exceeds this.
    #[arg(long)]
    pub fail_threshold: Option<f64>,
    #[arg(long, default_value = "waterfall")]
    pub experiment: String,
    /// CSV output (with a `.json` sidecar); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum Motion {
    /// Mixed sizes, speeds and rotations.
    Traffic,
    /// Pure integer translation along lanes.
    Rigid,
}

#[derive(Args, Debug)]
pub(crate) struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub objects: usize,
    #[arg(long = "w", alias = "width", default_value_t = 128)]
    pub width: u32,
    #[arg(long = "h", alias = "height", default_value_t = 96)]
    pub height: u32,
    #[arg(long, default_value_t = 15)]
    pub gop: u32,
    #[arg(long, value_enum, default_value_t = Motion::Traffic)]
    pub motion: Motion,
    /// Directory for tracks.jsonl, oar.jsonl and the PPM renders.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub(crate) enum ReportMode {
    /// CBR of one payload.
    Cbr,
    /// CBR of a stream at a given bit rate.
    Sequence,
    /// Bit accounting of a bitstream container.
    Account,
    /// Merge CSV tables into one sorted table.
    Aggregate,
}

#[derive(Args, Debug)]
pub(crate) struct ReportArgs {
    #[arg(long, value_enum)]
    pub mode: ReportMode,
    #[arg(long)]
    pub bits: Option<u64>,
    #[arg(long)]
    pub kbps: Option<f64>,
    #[arg(long, default_value_t = 25.0)]
    pub fps: f64,
    #[arg(long = "ldpc-rate", alias = "ldpc", default_value = "1/3", value_parser = parse_ldpc)]
    pub ldpc: LdpcConfig,
    #[arg(long = "mod", default_value = "4qam", value_parser = parse_mod)]
    pub modulation: Modulation,
    #[arg(long = "w", alias = "width", default_value_t = 512)]
    pub width: u32,
    #[arg(long = "h", alias = "height", default_value_t = 512)]
    pub height: u32,
    /// Source frames the payload stands for.
    #[arg(long, default_value_t = 1)]
    pub frames: u32,
    #[arg(long, default_value = "ideal", value_parser = parse_cbr_mode)]
    pub cbr_mode: CbrMode,
    /// Input container (`account`) or CSV tables (`aggregate`).
    #[arg(long = "in", num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
