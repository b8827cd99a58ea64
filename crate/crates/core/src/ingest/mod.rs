//! Ground-truth OAR sequences from annotation tracks or a synthetic scene.

mod relations;
mod sequence;
mod synthetic;
mod tracks;

use std::path::PathBuf;

use thiserror::Error;

pub use relations::identify_relations;
pub use sequence::build_oar_sequence;
pub use synthetic::{
    generate_synthetic, synthetic_background, ObjectProgram, SyntheticScene, SyntheticSceneSpec,
};
pub use tracks::{
    parse_mask, parse_mask_str, parse_tracks, parse_tracks_str, write_tracks_jsonl, ForegroundMask,
    Rect, TrackFormat, TrackRecord,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("xml {locus}: {message}")]
    Xml { locus: String, message: String },
    #[error("duplicate record for object {id} in frame {frame}")]
    DuplicateRecord { frame: u32, id: u32 },
    #[error("gop length must be at least 2, got {0}")]
    GopLength(u32),
    #[error("mask rectangle {0:?} lies outside the {1}x{2} frame")]
    MaskOutside(Rect, u32, u32),
    #[error("invalid synthetic scene: {0}")]
    Scene(String),
}
