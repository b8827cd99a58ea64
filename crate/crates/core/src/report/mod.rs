//! Pixel and semantic quality metrics and experiment tables.

mod fidelity;
mod metrics;
mod table;

use thiserror::Error;

pub use fidelity::{metric_oar_fidelity, OarFidelity};
pub use metrics::{metric_psnr, metric_ssim, mse};
pub use table::{Record, Report};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("frame shape: {0}")]
    Shape(String),
    #[error("metric region covers no pixel")]
    EmptyRegion,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
