use serde::Serialize;

use super::gop::parse_stream;
use super::{Bitstream, CodecError, CRC_BITS, HEADER_BITS};

/// Bit budget of one coded GoP.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BitAccount {
    pub total_bits: usize,
    pub header_bits: usize,
    pub crc_bits: usize,
    /// Payload bits of each frame record, frame 1 first.
    pub frame_bits: Vec<usize>,
    /// `total_bits / T`, header and CRC amortised.
    pub bits_per_frame: f64,
    pub kbps: f64,
    pub gop_length: u32,
}

/// Rate of `total_bits` spread over `frames` frames played at `fps`.
pub fn kbps(total_bits: f64, frames: u32, fps: f64) -> Result<f64, CodecError> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(CodecError::FrameRate(fps));
    }
    if frames == 0 {
        return Err(CodecError::Invalid("zero frames".into()));
    }
    Ok(total_bits / (frames as f64 / fps) / 1000.0)
}

pub fn bit_account(bits: &Bitstream, fps: f64) -> Result<BitAccount, CodecError> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(CodecError::FrameRate(fps));
    }
    let parsed = parse_stream(bits)?;
    let t = parsed.header.gop_length;
    let total = bits.bit_len();
    Ok(BitAccount {
        total_bits: total,
        header_bits: HEADER_BITS,
        crc_bits: CRC_BITS,
        frame_bits: parsed.frame_bits,
        bits_per_frame: total as f64 / t as f64,
        kbps: kbps(total as f64, t, fps)?,
        gop_length: t,
    })
}
