use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::channel::{LdpcConfig, Modulation};

/// How channel symbols are counted for bandwidth accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CbrMode {
    /// `ceil(bits / rate / bits_per_symbol)`: exact code rate, no block padding.
    #[default]
    Ideal,
    /// Symbols physically sent: whole codewords, last block zero-padded.
    Block,
}

impl FromStr for CbrMode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" => Ok(CbrMode::Ideal),
            "block" => Ok(CbrMode::Block),
            other => Err(PipelineError::Config(format!(
                "unknown cbr mode {other:?} (expected ideal or block)"
            ))),
        }
    }
}

impl fmt::Display for CbrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CbrMode::Ideal => "ideal",
            CbrMode::Block => "block",
        })
    }
}

/// `W · H · 3 · frames`.
pub fn source_symbols(width: u32, height: u32, frames: u32) -> u64 {
    width as u64 * height as u64 * 3 * frames as u64
}

/// Channel symbols charged for `info_bits` under `mode`.
pub fn channel_symbols(
    info_bits: u64,
    ldpc: &LdpcConfig,
    scheme: Modulation,
    mode: CbrMode,
) -> u64 {
    let bps = scheme.bits_per_symbol() as u128;
    match mode {
        CbrMode::Ideal => {
            let num = info_bits as u128 * ldpc.n as u128;
            num.div_ceil(ldpc.k as u128 * bps) as u64
        }
        CbrMode::Block => {
            let (blocks, _) = ldpc.blocks_for(info_bits as usize);
            (blocks as u128 * ldpc.n as u128).div_ceil(bps) as u64
        }
    }
}

/// Channel bandwidth ratio: channel symbols over source symbols.
pub fn cbr(symbols: u64, width: u32, height: u32, frames: u32) -> Result<f64, PipelineError> {
    let source = source_symbols(width, height, frames);
    if source == 0 {
        return Err(PipelineError::ZeroSource);
    }
    Ok(symbols as f64 / source as f64)
}

/// CBR of `info_bits` sent once against a `width × height × frames` source.
pub fn payload_cbr(
    info_bits: u64,
    ldpc: &LdpcConfig,
    scheme: Modulation,
    mode: CbrMode,
    width: u32,
    height: u32,
    frames: u32,
) -> Result<f64, PipelineError> {
    cbr(
        channel_symbols(info_bits, ldpc, scheme, mode),
        width,
        height,
        frames,
    )
}

/// Long-run CBR of a stream at `kbps` and `fps`. Per-frame bits are averaged,
/// so no rounding to whole symbols takes place.
pub fn sequence_cbr(
    kbps: f64,
    fps: f64,
    ldpc: &LdpcConfig,
    scheme: Modulation,
    width: u32,
    height: u32,
) -> Result<f64, PipelineError> {
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(PipelineError::Config(format!(
            "frame rate must be positive, got {fps}"
        )));
    }
    if !(kbps >= 0.0 && kbps.is_finite()) {
        return Err(PipelineError::Config(format!(
            "bit rate must be non-negative, got {kbps}"
        )));
    }
    let source = source_symbols(width, height, 1);
    if source == 0 {
        return Err(PipelineError::ZeroSource);
    }
    let bits_per_frame = kbps * 1000.0 / fps;
    let symbols =
        bits_per_frame * ldpc.n as f64 / (ldpc.k as f64 * scheme.bits_per_symbol() as f64);
    Ok(symbols / source as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_frame_oar() {
        let l = LdpcConfig::rate_1_3();
        assert_eq!(
            channel_symbols(366, &l, Modulation::Qam4, CbrMode::Ideal),
            549
        );
        let r = payload_cbr(366, &l, Modulation::Qam4, CbrMode::Ideal, 512, 512, 1).unwrap();
        assert_abs_diff_eq!(r, 549.0 / 786432.0);
        assert_abs_diff_eq!(r, 6.98e-4, epsilon = 5e-7);
        let r = payload_cbr(219, &l, Modulation::Qam4, CbrMode::Ideal, 512, 512, 1).unwrap();
        assert_abs_diff_eq!(r, 4.18e-4, epsilon = 5e-7);
    }

    #[test]
    fn block_mode_counts_codewords() {
        let l = LdpcConfig::rate_1_3();
        assert_eq!(
            channel_symbols(366, &l, Modulation::Qam4, CbrMode::Block),
            2304
        );
        assert_eq!(
            channel_symbols(1537, &l, Modulation::Qam4, CbrMode::Block),
            4608
        );
        assert_eq!(channel_symbols(0, &l, Modulation::Qam4, CbrMode::Ideal), 0);
    }

    #[test]
    fn sequence_rates() {
        let l = LdpcConfig::rate_1_3();
        let a = sequence_cbr(3.5, 25.0, &l, Modulation::Qam4, 512, 512).unwrap();
        assert_abs_diff_eq!(a, 210.0 / 786432.0, epsilon = 1e-15);
        let b = sequence_cbr(2.2, 25.0, &l, Modulation::Qam4, 512, 512).unwrap();
        assert_abs_diff_eq!(b, 1.68e-4, epsilon = 5e-7);
        assert!(sequence_cbr(3.5, 0.0, &l, Modulation::Qam4, 512, 512).is_err());
    }

    #[test]
    fn raw_frame_half_rate_16qam() {
        let l = LdpcConfig::rate_1_2();
        let bits = 512 * 512 * 3 * 8;
        let r = payload_cbr(bits, &l, Modulation::Qam16, CbrMode::Ideal, 512, 512, 1).unwrap();
        assert_eq!(r, 4.0);
    }

    #[test]
    fn zero_source_rejected() {
        assert!(matches!(cbr(1, 0, 4, 1), Err(PipelineError::ZeroSource)));
        assert!("ideal".parse::<CbrMode>().is_ok() && "x".parse::<CbrMode>().is_err());
    }
}
