//! Gray-labelled square constellations and max-log soft demapping.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::awgn::ChannelConfig;
use super::ChannelError;
use crate::Scalar;

/// LLR magnitude used when the noise variance is zero.
pub const NOISELESS_LLR: f64 = 1.0e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "bpsk")]
    Bpsk,
    #[serde(rename = "4qam")]
    Qam4,
    #[serde(rename = "16qam")]
    Qam16,
    #[serde(rename = "64qam")]
    Qam64,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [
        Modulation::Bpsk,
        Modulation::Qam4,
        Modulation::Qam16,
        Modulation::Qam64,
    ];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qam4 => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }

    /// Bits carried on each real axis.
    fn axis_bits(self) -> usize {
        match self {
            Modulation::Bpsk => 1,
            m => m.bits_per_symbol() / 2,
        }
    }

    fn is_real(self) -> bool {
        self == Modulation::Bpsk
    }

    /// Amplitude scale giving unit mean energy.
    pub fn norm(self) -> f64 {
        match self {
            Modulation::Bpsk => 1.0,
            Modulation::Qam4 => 1.0 / 2f64.sqrt(),
            Modulation::Qam16 => 1.0 / 10f64.sqrt(),
            Modulation::Qam64 => 1.0 / 42f64.sqrt(),
        }
    }

    /// Normalised amplitudes of one axis indexed by their Gray label.
    fn axis_levels(self) -> Vec<f64> {
        let m = self.axis_bits();
        let l = 1usize << m;
        let mut by_label = vec![0.0; l];
        for i in 0..l {
            by_label[i ^ (i >> 1)] = (l as f64 - 1.0 - 2.0 * i as f64) * self.norm();
        }
        by_label
    }

    /// Constellation point for each label, most significant bit first.
    pub fn constellation(self) -> Vec<Complex64> {
        let levels = self.axis_levels();
        if self.is_real() {
            return levels.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        }
        let m = self.axis_bits();
        (0..1usize << self.bits_per_symbol())
            .map(|label| Complex64::new(levels[label >> m], levels[label & ((1 << m) - 1)]))
            .collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            Modulation::Bpsk => "bpsk",
            Modulation::Qam4 => "4qam",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
        }
    }
}

impl FromStr for Modulation {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Modulation::Bpsk),
            "4qam" | "qpsk" | "qam4" => Ok(Modulation::Qam4),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            "64qam" | "qam64" => Ok(Modulation::Qam64),
            other => Err(ChannelError::Config(format!(
                "unknown modulation {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Channel symbols plus what the receiver needs to undo the mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolBlock {
    pub symbols: Vec<Complex64>,
    pub scheme: Modulation,
    /// Bits that entered the mapper, padding excluded.
    pub bit_count: usize,
    pub padding: usize,
    /// Factor applied after mapping to make the block's mean power 1.
    pub scale: f64,
    /// Channel the block went through, if any.
    pub channel: Option<ChannelConfig>,
}

impl SymbolBlock {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.symbols.is_empty() {
            return 0.0;
        }
        self.symbols.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.symbols.len() as f64
    }
}

/// Maps 0/1 values onto symbols, zero-padding to whole symbols.
pub fn modulate(bits: &[u8], scheme: Modulation) -> SymbolBlock {
    let bps = scheme.bits_per_symbol();
    let padding = (bps - bits.len() % bps) % bps;
    let points = scheme.constellation();
    let mut symbols = Vec::with_capacity(bits.len().div_ceil(bps));
    for chunk in bits.chunks(bps) {
        let mut label = 0usize;
        for i in 0..bps {
            label = label << 1 | chunk.get(i).map_or(0, |b| (b & 1) as usize);
        }
        symbols.push(points[label]);
    }
    let mut block = SymbolBlock {
        symbols,
        scheme,
        bit_count: bits.len(),
        padding,
        scale: 1.0,
        channel: None,
    };
    let p = block.mean_power();
    if p > 0.0 {
        let s = 1.0 / p.sqrt();
        for x in &mut block.symbols {
            *x *= s;
        }
        block.scale = s;
    }
    block
}

#[inline]
fn axis_llrs<T: Scalar>(y: f64, levels: &[f64], bits: usize, inv: f64, out: &mut Vec<T>) {
    for b in (0..bits).rev() {
        let (mut d0, mut d1) = (f64::INFINITY, f64::INFINITY);
        for (label, &a) in levels.iter().enumerate() {
            let d = (y - a) * (y - a);
            if label >> b & 1 == 0 {
                d0 = d0.min(d);
            } else {
                d1 = d1.min(d);
            }
        }
        let l = if inv.is_infinite() {
            (d1 - d0).signum() * NOISELESS_LLR * ((d1 - d0) != 0.0) as u8 as f64
        } else {
            (d1 - d0) * inv
        };
        out.push(T::of(l));
    }
}

/// Max-log LLRs for each transmitted bit (padding dropped). `noise_var` is
/// the total complex noise variance `σ²` seen on the normalised block;
/// BPSK sees it on the real axis alone.
pub fn demodulate_llr<T: Scalar>(block: &SymbolBlock, noise_var: f64) -> Vec<T> {
    let scheme = block.scheme;
    let levels = scheme.axis_levels();
    let m = scheme.axis_bits();
    let var = noise_var / (block.scale * block.scale);
    let inv = if var > 0.0 {
        if scheme.is_real() {
            1.0 / (2.0 * var)
        } else {
            1.0 / var
        }
    } else {
        f64::INFINITY
    };
    let mut out = Vec::with_capacity(block.len() * scheme.bits_per_symbol());
    for s in &block.symbols {
        let y = s / block.scale;
        axis_llrs(y.re, &levels, m, inv, &mut out);
        if !scheme.is_real() {
            axis_llrs(y.im, &levels, m, inv, &mut out);
        }
    }
    out.truncate(block.bit_count);
    out
}

pub fn hard_decide<T: Scalar>(llrs: &[T]) -> Vec<u8> {
    llrs.iter().map(|&l| (l < T::zero()) as u8).collect()
}
