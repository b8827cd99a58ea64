use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::embed::{Embedded, EmbeddingDims};
use super::{GraphError, Matrix};
use crate::Scalar;

/// Output dimension of the default network.
pub const DEFAULT_FEATURE_DIM: usize = 64;

/// `y = W x + b` with `W` of shape `out × in`.
#[derive(Clone, Debug, PartialEq)]
pub struct Affine<T> {
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Affine<T> {
    fn seeded(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Affine<T> {
        let a = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| T::of(rng.gen_range(-a..a)))
            .collect();
        let bias = (0..outputs)
            .map(|_| T::of(rng.gen_range(-0.1..0.1)))
            .collect();
        Affine {
            weight: Matrix {
                rows: outputs,
                cols: inputs,
                data,
            },
            bias,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.cols
    }

    pub fn outputs(&self) -> usize {
        self.weight.rows
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.inputs());
        (0..self.outputs())
            .map(|r| {
                self.weight
                    .row(r)
                    .iter()
                    .zip(x)
                    .fold(self.bias[r], |acc, (&w, &v)| acc + w * v)
            })
            .collect()
    }
}

/// One propagation round: a triple map from `2·d_in + d_edge` to `2·d_in`
/// followed by a projection from `d_in` to `d_out`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnLayer<T> {
    pub triple: Affine<T>,
    pub project: Affine<T>,
}

impl<T: Scalar> GcnLayer<T> {
    pub fn node_dim(&self) -> usize {
        self.project.inputs()
    }

    pub fn edge_dim(&self) -> usize {
        self.triple.inputs() - 2 * self.node_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.project.outputs()
    }

    fn check(&self) -> Result<(), GraphError> {
        let d = self.node_dim();
        if self.triple.outputs() != 2 * d || self.triple.inputs() < 2 * d {
            return Err(GraphError::Config(format!(
                "triple map {}→{} does not fit node dimension {d}",
                self.triple.inputs(),
                self.triple.outputs()
            )));
        }
        if self.triple.bias.len() != self.triple.outputs()
            || self.project.bias.len() != self.project.outputs()
        {
            return Err(GraphError::Config("bias length mismatch".into()));
        }
        Ok(())
    }

    fn forward(
        &self,
        nodes: &[Vec<T>],
        edges: &[Vec<T>],
        triples: &[(usize, usize, usize)],
    ) -> Vec<Vec<T>> {
        let d = self.node_dim();
        let mut candidates: Vec<Vec<Vec<T>>> = vec![Vec::new(); nodes.len()];
        let mut input = Vec::with_capacity(self.triple.inputs());
        for &(s, e, o) in triples {
            input.clear();
            input.extend_from_slice(&nodes[s]);
            input.extend_from_slice(&edges[e]);
            input.extend_from_slice(&nodes[o]);
            let mut out = self.triple.apply(&input);
            for v in &mut out {
                *v = v.max(T::zero());
            }
            let for_object = out.split_off(d);
            candidates[s].push(out);
            candidates[o].push(for_object);
        }
        let half = T::of(0.5);
        nodes
            .iter()
            .zip(candidates)
            .map(|(f, mut cands)| {
                if cands.is_empty() {
                    return self.project.apply(f);
                }
                // fixed summation order keeps the result independent of edge order
                cands.sort_by(|a, b| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x.total_cmp_scalar(y))
                        .find(|o| *o != Ordering::Equal)
                        .unwrap_or(Ordering::Equal)
                });
                let count = T::of(cands.len() as f64);
                let mut mean = vec![T::zero(); d];
                for c in &cands {
                    for (m, &v) in mean.iter_mut().zip(c) {
                        *m = *m + v;
                    }
                }
                let mixed: Vec<T> = mean
                    .iter()
                    .zip(f)
                    .map(|(&m, &x)| (x + m / count) * half)
                    .collect();
                self.project.apply(&mixed)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphWeights<T> {
    pub layers: Vec<GcnLayer<T>>,
}

impl<T: Scalar> GraphWeights<T> {
    /// Two layers, node embedding → `feature_dim` → `feature_dim`.
    pub fn seeded(seed: u64, dims: EmbeddingDims, feature_dim: usize) -> GraphWeights<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(2);
        let mut d_in = dims.node();
        for _ in 0..2 {
            layers.push(GcnLayer {
                triple: Affine::seeded(&mut rng, 2 * d_in + dims.d_r, 2 * d_in),
                project: Affine::seeded(&mut rng, d_in, feature_dim),
            });
            d_in = feature_dim;
        }
        GraphWeights { layers }
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.output_dim())
    }

    pub fn validate(&self, node_dim: usize, edge_dim: usize) -> Result<(), GraphError> {
        if self.layers.is_empty() {
            return Err(GraphError::Config("no layers".into()));
        }
        let mut d = node_dim;
        for (i, l) in self.layers.iter().enumerate() {
            l.check()?;
            if l.node_dim() != d || l.edge_dim() != edge_dim {
                return Err(GraphError::Config(format!(
                    "layer {i} expects node/edge dims {}/{}, got {d}/{edge_dim}",
                    l.node_dim(),
                    l.edge_dim()
                )));
            }
            d = l.output_dim();
        }
        Ok(())
    }
}

/// Deep feature of one graph node.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectFeature<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> ObjectFeature<T> {
    pub fn new(values: Vec<T>) -> ObjectFeature<T> {
        ObjectFeature { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Runs every layer over the embedded graph; returns one feature per node,
/// node 0 being the background. Repeated identical triples count once.
pub fn graph_compute<T: Scalar>(
    graph: &Embedded<T>,
    weights: &GraphWeights<T>,
) -> Result<Vec<ObjectFeature<T>>, GraphError> {
    let node_dim = graph.nodes.first().map_or(0, Vec::len);
    let edge_dim = match graph.edges.first() {
        Some(e) => e.len(),
        None => weights.layers.first().map_or(0, |l| l.edge_dim()),
    };
    if graph.nodes.iter().any(|n| n.len() != node_dim)
        || graph.edges.iter().any(|e| e.len() != edge_dim)
    {
        return Err(GraphError::Config("ragged node or edge vectors".into()));
    }
    weights.validate(node_dim, edge_dim)?;
    for &(s, e, o) in &graph.triples {
        if s >= graph.nodes.len() || o >= graph.nodes.len() || e >= graph.edges.len() {
            return Err(GraphError::Config(format!(
                "triple ({s}, {e}, {o}) out of range"
            )));
        }
    }
    let mut triples = graph.triples.clone();
    triples.sort_by(|a, b| {
        (a.0, a.2)
            .cmp(&(b.0, b.2))
            .then_with(|| cmp_vec(&graph.edges[a.1], &graph.edges[b.1]))
    });
    triples.dedup_by(|a, b| a.0 == b.0 && a.2 == b.2 && graph.edges[a.1] == graph.edges[b.1]);

    let mut nodes = graph.nodes.clone();
    for layer in &weights.layers {
        nodes = layer.forward(&nodes, &graph.edges, &triples);
    }
    Ok(nodes.into_iter().map(ObjectFeature::new).collect())
}

fn cmp_vec<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp_scalar(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: usize, triples: Vec<(usize, usize, usize)>) -> Embedded<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(nodes as u64);
        let dims = EmbeddingDims::default();
        Embedded {
            nodes: (0..nodes)
                .map(|_| (0..dims.node()).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect(),
            edges: (0..3)
                .map(|_| (0..dims.d_r).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect(),
            triples,
        }
    }

    fn weights() -> GraphWeights<f64> {
        GraphWeights::seeded(3, EmbeddingDims::default(), DEFAULT_FEATURE_DIM)
    }

    #[test]
    fn empty_graph_is_projection_only() {
        let g = graph(3, vec![]);
        let w = weights();
        let out = graph_compute(&g, &w).unwrap();
        for (f, n) in out.iter().zip(&g.nodes) {
            let expected = w.layers[1].project.apply(&w.layers[0].project.apply(n));
            assert_eq!(f.values, expected);
            assert_eq!(f.dim(), 64);
        }
    }

    #[test]
    fn duplicate_triples_count_once() {
        let w = weights();
        let once = graph_compute(&graph(4, vec![(1, 0, 2), (3, 2, 0)]), &w).unwrap();
        let twice = graph_compute(&graph(4, vec![(1, 0, 2), (3, 2, 0), (1, 0, 2)]), &w).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn single_relation_by_hand() {
        // one layer, identity-free check of the mean/average rule
        let g = graph(2, vec![(0, 1, 1)]);
        let w = weights();
        let l = &w.layers[0];
        let mut input = g.nodes[0].clone();
        input.extend_from_slice(&g.edges[1]);
        input.extend_from_slice(&g.nodes[1]);
        let t: Vec<f64> = l
            .triple
            .apply(&input)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        let d = l.node_dim();
        let s_new: Vec<f64> = g.nodes[0]
            .iter()
            .zip(&t[..d])
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        let layers = GraphWeights {
            layers: vec![l.clone()],
        };
        let out = graph_compute(&g, &layers).unwrap();
        assert_eq!(out[0].values, l.project.apply(&s_new));
    }

    #[test]
    fn dimension_errors() {
        let mut g = graph(2, vec![(0, 0, 1)]);
        g.nodes[1].pop();
        assert!(graph_compute(&g, &weights()).is_err());
        let g = graph(2, vec![(0, 5, 1)]);
        assert!(graph_compute(&g, &weights()).is_err());
        let w = GraphWeights::<f64>::seeded(
            3,
            EmbeddingDims {
                d_c: 8,
                d_theta: 8,
                d_r: 16,
            },
            64,
        );
        assert!(graph_compute(&graph(2, vec![]), &w).is_err());
    }
}
