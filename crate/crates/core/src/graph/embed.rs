use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, Matrix};
use crate::codec::{angle_bin, QuantParams};
use crate::oar::{Category, OarFrame, RelationLabel, BACKGROUND};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbeddingDims {
    pub d_c: usize,
    pub d_theta: usize,
    pub d_r: usize,
}

impl Default for EmbeddingDims {
    fn default() -> Self {
        EmbeddingDims {
            d_c: 32,
            d_theta: 16,
            d_r: 16,
        }
    }
}

impl EmbeddingDims {
    pub fn node(&self) -> usize {
        self.d_c + self.d_theta
    }
}

/// Projection tables for category, angle bin and relation label.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTables<T> {
    /// `categories × d_c`
    pub w_c: Matrix<T>,
    /// `2^q × d_θ`
    pub w_theta: Matrix<T>,
    /// `relation labels × d_r`
    pub w_r: Matrix<T>,
}

fn uniform_matrix<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<T> {
    let data = (0..rows * cols)
        .map(|_| T::of(rng.gen_range(-1.0..1.0)))
        .collect();
    Matrix { rows, cols, data }
}

impl<T: Scalar> EmbeddingTables<T> {
    /// Uniform `[-1, 1)` entries from a seeded generator.
    pub fn seeded(seed: u64, dims: EmbeddingDims, q: QuantParams) -> EmbeddingTables<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmbeddingTables {
            w_c: uniform_matrix(&mut rng, Category::COUNT, dims.d_c),
            w_theta: uniform_matrix(&mut rng, q.angle_bins() as usize, dims.d_theta),
            w_r: uniform_matrix(&mut rng, RelationLabel::COUNT, dims.d_r),
        }
    }

    pub fn dims(&self) -> EmbeddingDims {
        EmbeddingDims {
            d_c: self.w_c.cols,
            d_theta: self.w_theta.cols,
            d_r: self.w_r.cols,
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.w_c.rows != Category::COUNT {
            return Err(GraphError::Config(format!(
                "W_c has {} rows",
                self.w_c.rows
            )));
        }
        if self.w_r.rows != RelationLabel::COUNT {
            return Err(GraphError::Config(format!(
                "W_r has {} rows",
                self.w_r.rows
            )));
        }
        if !self.w_theta.rows.is_power_of_two() || self.w_theta.rows < 2 {
            return Err(GraphError::Config(format!(
                "W_θ has {} rows",
                self.w_theta.rows
            )));
        }
        Ok(())
    }
}

/// Node and edge vectors of one frame. Node 0 is the background; objects
/// follow in frame order.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedded<T> {
    pub nodes: Vec<Vec<T>>,
    pub edges: Vec<Vec<T>>,
    /// `(subject node, edge, object node)` per relation.
    pub triples: Vec<(usize, usize, usize)>,
}

pub fn embed<T: Scalar>(
    frame: &OarFrame,
    tables: &EmbeddingTables<T>,
    q: QuantParams,
) -> Result<Embedded<T>, GraphError> {
    tables.validate()?;
    let bins = q.angle_bins() as usize;
    if tables.w_theta.rows != bins {
        return Err(GraphError::Config(format!(
            "angle table has {} rows, q = {} needs {bins}",
            tables.w_theta.rows,
            q.q_angle()
        )));
    }
    let node = |c: Category, angle: Option<f64>| -> Vec<T> {
        let mut v = tables.w_c.row(c.code() as usize).to_vec();
        match angle {
            Some(a) => v.extend_from_slice(tables.w_theta.row(angle_bin(a, q) as usize)),
            None => v.extend(std::iter::repeat_n(T::zero(), tables.w_theta.cols)),
        }
        v
    };
    let mut nodes = Vec::with_capacity(frame.len() + 1);
    nodes.push(node(Category::Background, None));
    for (_, a) in frame.iter() {
        nodes.push(node(a.category, Some(a.angle)));
    }
    let index = |id| -> Result<usize, GraphError> {
        if id == BACKGROUND {
            return Ok(0);
        }
        frame
            .objects
            .iter()
            .position(|o| *o == id)
            .map(|p| p + 1)
            .ok_or_else(|| GraphError::Config(format!("relation endpoint {id} not in frame")))
    };
    let mut edges = Vec::with_capacity(frame.relations.len());
    let mut triples = Vec::with_capacity(frame.relations.len());
    for r in &frame.relations {
        triples.push((index(r.subject)?, edges.len(), index(r.object)?));
        edges.push(tables.w_r.row(r.label.code() as usize).to_vec());
    }
    Ok(Embedded {
        nodes,
        edges,
        triples,
    })
}
