use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::modulation::SymbolBlock;

/// AWGN channel at unit signal power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// `+inf` gives a noiseless channel.
    pub snr_db: f64,
    pub seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, seed: u64) -> ChannelConfig {
        ChannelConfig { snr_db, seed }
    }

    pub fn noiseless() -> ChannelConfig {
        ChannelConfig::new(f64::INFINITY, 0)
    }

    /// `σ² = 10^(−snr/10)`.
    pub fn noise_var(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    pub fn with_seed(self, seed: u64) -> ChannelConfig {
        ChannelConfig { seed, ..self }
    }
}

/// Adds Gaussian noise: `σ²/2` per axis for complex schemes, `σ²` on the
/// real axis for BPSK. Noise is `σ·z` with `z` drawn from the seed alone,
/// so one seed gives the same realisation at every SNR, only rescaled.
pub fn awgn(block: &SymbolBlock, cfg: &ChannelConfig) -> SymbolBlock {
    let var = cfg.noise_var();
    let mut out = block.clone();
    out.channel = Some(*cfg);
    if var == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let real_only = block.scheme.bits_per_symbol() == 1;
    if real_only {
        let s = var.sqrt();
        for x in &mut out.symbols {
            let z: f64 = rng.sample(StandardNormal);
            x.re += s * z;
        }
    } else {
        let s = (var / 2.0).sqrt();
        for x in &mut out.symbols {
            let zr: f64 = rng.sample(StandardNormal);
            let zi: f64 = rng.sample(StandardNormal);
            *x += Complex64::new(s * zr, s * zi);
        }
    }
    out
}

/// Dumps symbols as little-endian `f32` (re, im) pairs.
pub fn write_trace<W: Write>(symbols: &[Complex64], mut out: W) -> std::io::Result<()> {
    for s in symbols {
        out.write_all(&(s.re as f32).to_le_bytes())?;
        out.write_all(&(s.im as f32).to_le_bytes())?;
    }
    Ok(())
}
