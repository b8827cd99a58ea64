//! Embedding, graph propagation and dense layouts for OAR frames.

mod embed;
mod gcn;
mod io;
mod layout;

use thiserror::Error;

pub use embed::{embed, Embedded, EmbeddingDims, EmbeddingTables};
pub use gcn::{graph_compute, Affine, GcnLayer, GraphWeights, ObjectFeature};
pub use io::{load_model, save_model, GraphModel, Manifest};
pub use layout::{build_layout, build_layout_scaled, layout_cover, Layout};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("weights file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Matrix<T>, GraphError> {
        if data.len() != rows * cols {
            return Err(GraphError::Config(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}
