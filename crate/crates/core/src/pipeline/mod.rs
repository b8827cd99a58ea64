//! Sender-to-receiver orchestration: the reference frame over an image codec
//! and the OAR stream over their own code and constellation, bandwidth
//! accounting, and the feature-map modulation operator.

mod cbr;
mod e2e;
mod feature;
mod image;
mod transmit;

use thiserror::Error;

pub use cbr::{cbr, channel_symbols, payload_cbr, sequence_cbr, source_symbols, CbrMode};
pub use e2e::{gop_seeds, run_end_to_end, EndToEnd, GopInput, TransmissionResult};
pub use feature::{foreground_multiplier, oar_modulate, FeatureMap, DEFAULT_BIAS, DEFAULT_GAIN};
pub use image::{ImageCodec, CODEC_ENV};
pub use transmit::{
    transmit_oar, transmit_reference, OarOutcome, PathOutcome, PathPlan, ReferenceOutcome,
    ReferencePlan, TransmissionPlan,
};

use crate::channel::ChannelError;
use crate::codec::CodecError;
use crate::raster::RasterError;
use crate::reconstruct::ReconError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("source size is zero")]
    ZeroSource,
    #[error("shape: {0}")]
    Shape(String),
    #[error("multiplier {0} outside (0, 1)")]
    Multiplier(f64),
    #[error("external image codec: {0}")]
    ExternalCodec(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Recon(#[from] ReconError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}
