//! Object-attribute-relation (OAR) video semantic codec and channel simulator.
//!
//! Foreground semantics of each frame are described as a small directed graph
//! (objects, their attributes, and pairwise relations). A group of pictures
//! is coded as one reference frame plus a predictive OAR bitstream, protected
//! by an LDPC code, mapped onto a Gray-labelled QAM constellation and sent over
//! an AWGN channel. The receiver rebuilds frames from the reference and the
//! decoded OAR sequence with a deterministic layout, warp, and fusion chain.
//!
//! Numeric kernels that do not depend on the pixel grid (graph propagation,
//! layouts, feature modulation, LLR decoding) are generic over [`Scalar`];
//! the aliases below fix the common concrete choices.

pub mod channel;
pub mod cli;
pub mod codec;
pub mod graph;
pub mod ingest;
pub mod oar;
pub mod pipeline;
pub mod raster;
pub mod reconstruct;
pub mod report;
mod scalar;

pub use scalar::Scalar;

pub use oar::{
    Attributes, Category, FrameViolation, GopStream, OarFrame, ObjectId, Relation, RelationLabel,
    BACKGROUND,
};
pub use raster::RasterFrame;

/// Dense layout with single-precision features.
pub type Layout32 = graph::Layout<f32>;
/// Dense layout with double-precision features.
pub type Layout64 = graph::Layout<f64>;
/// Per-object features, single precision.
pub type ObjectFeature32 = graph::ObjectFeature<f32>;
/// Per-object features, double precision.
pub type ObjectFeature64 = graph::ObjectFeature<f64>;
/// Embedding tables, single precision.
pub type EmbeddingTables32 = graph::EmbeddingTables<f32>;
/// Embedding tables, double precision.
pub type EmbeddingTables64 = graph::EmbeddingTables<f64>;
/// Graph weights, single precision.
pub type GraphWeights32 = graph::GraphWeights<f32>;
/// Graph weights, double precision.
pub type GraphWeights64 = graph::GraphWeights<f64>;
/// Dense feature map used by the modulation operator, single precision.
pub type FeatureMap32 = pipeline::FeatureMap<f32>;
/// Dense feature map used by the modulation operator, double precision.
pub type FeatureMap64 = pipeline::FeatureMap<f64>;
