//! Weights file: little-endian, self-describing.
//!
//! ```text
//! "OARW" | version u32 | tensor count u32
//! per tensor: name length u16 | name | rank u8 | dims u32 × rank | f32 × prod(dims)
//! ```
//!
//! A text manifest with the dimensions is written next to it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::embed::{EmbeddingDims, EmbeddingTables};
use super::gcn::{Affine, GcnLayer, GraphWeights, DEFAULT_FEATURE_DIM};
use super::{GraphError, Matrix};
use crate::codec::QuantParams;
use crate::Scalar;

const MAGIC: &[u8; 4] = b"OARW";
const VERSION: u32 = 1;

/// Embedding tables and graph weights travelling together.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphModel<T> {
    pub q: QuantParams,
    pub tables: EmbeddingTables<T>,
    pub weights: GraphWeights<T>,
}

impl<T: Scalar> GraphModel<T> {
    /// Default dimensions (32/16/16, D = 64) from one seed.
    pub fn seeded(seed: u64, q: QuantParams) -> GraphModel<T> {
        GraphModel::seeded_with(seed, q, EmbeddingDims::default(), DEFAULT_FEATURE_DIM)
    }

    pub fn seeded_with(
        seed: u64,
        q: QuantParams,
        dims: EmbeddingDims,
        feature_dim: usize,
    ) -> GraphModel<T> {
        GraphModel {
            q,
            tables: EmbeddingTables::seeded(seed, dims, q),
            weights: GraphWeights::seeded(seed ^ 0x5eed_9c4b, dims, feature_dim),
        }
    }

    pub fn manifest(&self) -> Manifest {
        let d = self.tables.dims();
        Manifest {
            d_c: d.d_c,
            d_theta: d.d_theta,
            d_r: d.d_r,
            q_angle: self.q.q_angle(),
            feature_dim: self.weights.output_dim(),
            layers: self
                .weights
                .layers
                .iter()
                .map(|l| (l.triple.inputs(), l.triple.outputs(), l.project.outputs()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        self.tables.validate()?;
        if self.tables.w_theta.rows as u64 != self.q.angle_bins() {
            return Err(GraphError::Config("angle table does not match q".into()));
        }
        let d = self.tables.dims();
        self.weights.validate(d.node(), d.d_r)
    }
}

/// Dimensions recorded beside a weights file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub d_c: usize,
    pub d_theta: usize,
    pub d_r: usize,
    pub q_angle: u8,
    pub feature_dim: usize,
    /// `(triple inputs, triple outputs, projection outputs)` per layer.
    pub layers: Vec<(usize, usize, usize)>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format oarw {VERSION}");
        let _ = writeln!(s, "d_c {}", self.d_c);
        let _ = writeln!(s, "d_theta {}", self.d_theta);
        let _ = writeln!(s, "d_r {}", self.d_r);
        let _ = writeln!(s, "q_angle {}", self.q_angle);
        let _ = writeln!(s, "feature_dim {}", self.feature_dim);
        let _ = writeln!(s, "layers {}", self.layers.len());
        for (i, (a, b, c)) in self.layers.iter().enumerate() {
            let _ = writeln!(s, "layer{i} triple {a}x{b} project {c}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Manifest, GraphError> {
        let mut kv = BTreeMap::new();
        let mut layers = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f[0].starts_with("layer") && f[0] != "layers" {
                let bad = || GraphError::Format(format!("manifest line {line:?}"));
                let (a, b) = f.get(2).and_then(|s| s.split_once('x')).ok_or_else(bad)?;
                let c = f.get(4).ok_or_else(bad)?;
                let p = |s: &str| s.parse::<usize>().map_err(|_| bad());
                layers.push((p(a)?, p(b)?, p(c)?));
            } else if f.len() >= 2 {
                kv.insert(f[0].to_string(), f[f.len() - 1].to_string());
            }
        }
        let get = |k: &str| -> Result<usize, GraphError> {
            kv.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| GraphError::Format(format!("manifest lacks {k}")))
        };
        Ok(Manifest {
            d_c: get("d_c")?,
            d_theta: get("d_theta")?,
            d_r: get("d_r")?,
            q_angle: get("q_angle")? as u8,
            feature_dim: get("feature_dim")?,
            layers,
        })
    }
}

pub fn manifest_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".manifest");
    PathBuf::from(p)
}

fn put_tensor<T: Scalar>(out: &mut Vec<u8>, name: &str, dims: &[usize], data: &[T]) {
    out.extend_from_slice(&(name.len() as u16).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.push(dims.len() as u8);
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in data {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
}

pub fn save_model<T: Scalar>(model: &GraphModel<T>, path: &Path) -> Result<(), GraphError> {
    let mut tensors: Vec<(String, Vec<usize>, &[T])> = vec![
        (
            "w_c".into(),
            vec![model.tables.w_c.rows, model.tables.w_c.cols],
            &model.tables.w_c.data,
        ),
        (
            "w_theta".into(),
            vec![model.tables.w_theta.rows, model.tables.w_theta.cols],
            &model.tables.w_theta.data,
        ),
        (
            "w_r".into(),
            vec![model.tables.w_r.rows, model.tables.w_r.cols],
            &model.tables.w_r.data,
        ),
    ];
    for (i, l) in model.weights.layers.iter().enumerate() {
        for (part, a) in [("triple", &l.triple), ("project", &l.project)] {
            tensors.push((
                format!("layer{i}.{part}.weight"),
                vec![a.weight.rows, a.weight.cols],
                &a.weight.data,
            ));
            tensors.push((format!("layer{i}.{part}.bias"), vec![a.bias.len()], &a.bias));
        }
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32 + 1).to_le_bytes());
    put_tensor::<T>(
        &mut out,
        "q_angle",
        &[1],
        &[T::of(model.q.q_angle() as f64)],
    );
    for (name, dims, data) in &tensors {
        put_tensor(&mut out, name, dims, data);
    }
    std::fs::File::create(path)?.write_all(&out)?;
    std::fs::write(manifest_path(path), model.manifest().to_text())?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], GraphError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end =
            end.ok_or_else(|| GraphError::Format(format!("truncated at byte {}", self.at)))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, GraphError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
}

/// Loads a weights file; a manifest beside it, when present, must agree.
pub fn load_model<T: Scalar>(path: &Path) -> Result<GraphModel<T>, GraphError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut c = Cursor {
        bytes: &bytes,
        at: 0,
    };
    if c.take(4)? != MAGIC {
        return Err(GraphError::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(GraphError::Format(format!("version {version}")));
    }
    let count = c.u32()?;
    let mut tensors: BTreeMap<String, (Vec<usize>, Vec<T>)> = BTreeMap::new();
    for _ in 0..count {
        let len = u16::from_le_bytes(c.take(2)?.try_into().expect("2 bytes")) as usize;
        let name = String::from_utf8(c.take(len)?.to_vec())
            .map_err(|_| GraphError::Format("tensor name is not UTF-8".into()))?;
        let rank = c.take(1)?[0] as usize;
        let dims: Vec<usize> = (0..rank)
            .map(|_| c.u32().map(|d| d as usize))
            .collect::<Result<_, _>>()?;
        let total: usize = dims.iter().product();
        let raw = c.take(
            total
                .checked_mul(4)
                .ok_or_else(|| GraphError::Format("tensor too large".into()))?,
        )?;
        let data = raw
            .chunks_exact(4)
            .map(|b| T::of(f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64))
            .collect();
        tensors.insert(name, (dims, data));
    }
    if c.at != bytes.len() {
        return Err(GraphError::Format("trailing bytes".into()));
    }
    type Tensor<T> = (Vec<usize>, Vec<T>);
    fn take<T>(
        tensors: &mut BTreeMap<String, Tensor<T>>,
        name: &str,
    ) -> Result<Tensor<T>, GraphError> {
        tensors
            .remove(name)
            .ok_or_else(|| GraphError::Format(format!("missing tensor {name}")))
    }
    let matrix = |(dims, data): (Vec<usize>, Vec<T>)| -> Result<Matrix<T>, GraphError> {
        match dims[..] {
            [r, c] => Matrix::from_vec(r, c, data),
            _ => Err(GraphError::Format(format!(
                "expected a matrix, got shape {dims:?}"
            ))),
        }
    };
    let q = take(&mut tensors, "q_angle")?.1[0].as_f64() as u8;
    let q = QuantParams::new(q).map_err(|e| GraphError::Config(e.to_string()))?;
    let tables = EmbeddingTables {
        w_c: matrix(take(&mut tensors, "w_c")?)?,
        w_theta: matrix(take(&mut tensors, "w_theta")?)?,
        w_r: matrix(take(&mut tensors, "w_r")?)?,
    };
    let mut layers = Vec::new();
    for i in 0.. {
        let weight = format!("layer{i}.triple.weight");
        if !tensors.contains_key(&weight) {
            break;
        }
        let mut affine = |part: &str| -> Result<Affine<T>, GraphError> {
            Ok(Affine {
                weight: matrix(take(&mut tensors, &format!("layer{i}.{part}.weight"))?)?,
                bias: take(&mut tensors, &format!("layer{i}.{part}.bias"))?.1,
            })
        };
        layers.push(GcnLayer {
            triple: affine("triple")?,
            project: affine("project")?,
        });
    }
    let model = GraphModel {
        q,
        tables,
        weights: GraphWeights { layers },
    };
    model.validate()?;
    let mp = manifest_path(path);
    if mp.exists() {
        let m = Manifest::parse(&std::fs::read_to_string(&mp)?)?;
        if m != model.manifest() {
            return Err(GraphError::Config(format!(
                "manifest {} disagrees with weights",
                mp.display()
            )));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.oarw");
        let m = GraphModel::<f32>::seeded(42, QuantParams::default());
        save_model(&m, &path).unwrap();
        let back: GraphModel<f32> = load_model(&path).unwrap();
        assert_eq!(back, m);
        let text = std::fs::read_to_string(manifest_path(&path)).unwrap();
        assert!(text.contains("d_c 32"));
        assert_eq!(Manifest::parse(&text).unwrap(), m.manifest());
    }

    #[test]
    fn manifest_mismatch_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.oarw");
        let m = GraphModel::<f64>::seeded(1, QuantParams::default());
        save_model(&m, &path).unwrap();
        std::fs::write(
            manifest_path(&path),
            m.manifest().to_text().replace("d_r 16", "d_r 8"),
        )
        .unwrap();
        assert!(matches!(
            load_model::<f64>(&path),
            Err(GraphError::Config(_))
        ));
    }

    #[test]
    fn corrupt_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.oarw");
        std::fs::write(&path, b"OARW\x01\x00\x00\x00\x05\x00\x00\x00").unwrap();
        assert!(matches!(
            load_model::<f32>(&path),
            Err(GraphError::Format(_))
        ));
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(load_model::<f32>(&path).is_err());
    }
}
