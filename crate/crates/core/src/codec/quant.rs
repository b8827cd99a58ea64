use super::CodecError;
use crate::oar::{GopStream, OarFrame};

/// Source quantisation. Coordinates are already integral; only the angle is
/// quantised, onto `2^q_angle` bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantParams {
    q_angle: u8,
}

impl Default for QuantParams {
    fn default() -> Self {
        QuantParams { q_angle: 8 }
    }
}

impl QuantParams {
    pub fn new(q_angle: u8) -> Result<QuantParams, CodecError> {
        if !(1..=16).contains(&q_angle) {
            return Err(CodecError::QuantBits(q_angle));
        }
        Ok(QuantParams { q_angle })
    }

    pub fn q_angle(&self) -> u8 {
        self.q_angle
    }

    pub fn angle_bins(&self) -> u64 {
        1 << self.q_angle
    }

    /// Width of one angle bin in degrees.
    pub fn bin_width(&self) -> f64 {
        360.0 / self.angle_bins() as f64
    }
}

/// `round(θ · 2^q / 360) mod 2^q`, rounding half up.
pub fn angle_bin(angle: f64, params: QuantParams) -> u64 {
    let bins = params.angle_bins();
    let b = (angle * bins as f64 / 360.0 + 0.5).floor();
    (b as i64).rem_euclid(bins as i64) as u64
}

pub fn bin_angle(bin: u64, params: QuantParams) -> f64 {
    bin as f64 * 360.0 / params.angle_bins() as f64
}

pub fn quantize_frame(frame: &OarFrame, params: QuantParams) -> OarFrame {
    let mut out = frame.clone();
    for a in out.attributes.values_mut() {
        a.angle = bin_angle(angle_bin(a.angle, params), params);
    }
    out
}

pub fn quantize_gop(gop: &GopStream, params: QuantParams) -> GopStream {
    GopStream {
        frames: gop
            .frames
            .iter()
            .map(|f| quantize_frame(f, params))
            .collect(),
        ..gop.clone()
    }
}
