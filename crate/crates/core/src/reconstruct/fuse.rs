use super::warp::round_channel;
use super::ReconError;
use crate::raster::RasterFrame;

/// Per-pixel weight of the synthesised branch, every value in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionMask {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl FusionMask {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<FusionMask, ReconError> {
        if data.len() != width as usize * height as usize {
            return Err(ReconError::Mask(format!(
                "{} values for {width}x{height}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ReconError::Mask(format!("weight {v} outside [0, 1]")));
        }
        Ok(FusionMask {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: u32, height: u32, value: f64) -> Result<FusionMask, ReconError> {
        FusionMask::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn from_holes(width: u32, height: u32, holes: &[bool]) -> FusionMask {
        FusionMask {
            width,
            height,
            data: holes.iter().map(|&h| h as u8 as f64).collect(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

fn check(synth: &RasterFrame, warped: &RasterFrame, mask: &FusionMask) -> Result<(), ReconError> {
    synth.same_shape(warped).map_err(|_| ReconError::Shape {
        expected: (synth.width(), synth.height()),
        found: (warped.width(), warped.height()),
    })?;
    if (mask.width, mask.height) != (synth.width(), synth.height()) {
        return Err(ReconError::Shape {
            expected: (synth.width(), synth.height()),
            found: (mask.width, mask.height),
        });
    }
    Ok(())
}

/// `W ⊙ synth + (1 − W) ⊙ warped` before rounding, channel-interleaved.
/// Evaluated as `warped + W (synth − warped)`: with integer branches both
/// endpoints are exact and monotone rounding keeps every value inside them.
pub fn fuse_exact(
    synth: &RasterFrame,
    warped: &RasterFrame,
    mask: &FusionMask,
) -> Result<Vec<f64>, ReconError> {
    check(synth, warped, mask)?;
    Ok(synth
        .as_raw()
        .iter()
        .zip(warped.as_raw())
        .enumerate()
        .map(|(i, (&s, &w))| {
            let m = mask.data[i / 3];
            w as f64 + m * (s as f64 - w as f64)
        })
        .collect())
}

/// Convex combination of the two branches, rounded half up.
pub fn fuse(
    synth: &RasterFrame,
    warped: &RasterFrame,
    mask: &FusionMask,
) -> Result<RasterFrame, ReconError> {
    let exact = fuse_exact(synth, warped, mask)?;
    let data = exact.into_iter().map(round_channel).collect();
    Ok(RasterFrame::from_raw(synth.width(), synth.height(), data).expect("same shape as inputs"))
}
