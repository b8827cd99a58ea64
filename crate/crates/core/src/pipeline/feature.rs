use super::PipelineError;
use crate::graph::{layout_cover, Layout};
use crate::oar::OarFrame;
use crate::Scalar;

pub const DEFAULT_GAIN: f64 = 4.0;
pub const DEFAULT_BIAS: f64 = 0.0;

/// `H × W × C` map, row-major, channels innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap<T> {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<T>,
    ) -> Result<FeatureMap<T>, PipelineError> {
        if data.len() != height * width * channels {
            return Err(PipelineError::Shape(format!(
                "{} values for {height}x{width}x{channels}",
                data.len()
            )));
        }
        Ok(FeatureMap {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: T) -> FeatureMap<T> {
        FeatureMap {
            height,
            width,
            channels,
            data: vec![value; height * width * channels],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[T] {
        let o = (i * self.width + j) * self.channels;
        &self.data[o..o + self.channels]
    }
}

impl<T: Scalar> From<Layout<T>> for FeatureMap<T> {
    fn from(l: Layout<T>) -> Self {
        FeatureMap {
            height: l.height,
            width: l.width,
            channels: l.depth,
            data: l.data,
        }
    }
}

/// `input ⊙ multiplier`. The multiplier is either `H × W × C` or `H × W × 1`
/// (broadcast over channels) and every value must lie strictly inside `(0, 1)`.
pub fn oar_modulate<T: Scalar>(
    input: &FeatureMap<T>,
    multiplier: &FeatureMap<T>,
) -> Result<FeatureMap<T>, PipelineError> {
    if (input.height, input.width) != (multiplier.height, multiplier.width)
        || (multiplier.channels != 1 && multiplier.channels != input.channels)
    {
        return Err(PipelineError::Shape(format!(
            "multiplier {}x{}x{} does not broadcast to {}x{}x{}",
            multiplier.height,
            multiplier.width,
            multiplier.channels,
            input.height,
            input.width,
            input.channels
        )));
    }
    if let Some(m) = multiplier
        .data
        .iter()
        .find(|m| !(**m > T::zero() && **m < T::one()))
    {
        return Err(PipelineError::Multiplier(m.as_f64()));
    }
    let c = input.channels;
    let data = if multiplier.channels == c {
        input
            .data
            .iter()
            .zip(&multiplier.data)
            .map(|(&x, &m)| x * m)
            .collect()
    } else {
        input
            .data
            .iter()
            .enumerate()
            .map(|(i, &x)| x * multiplier.data[i / c])
            .collect()
    };
    Ok(FeatureMap { data, ..*input })
}

/// `σ(a · fg + b)` per cell, `fg` the foreground support of `frame` on the
/// layout grid downscaled by `factor`. Result is `H' × W' × 1`.
pub fn foreground_multiplier<T: Scalar>(
    frame: &OarFrame,
    height: usize,
    width: usize,
    factor: usize,
    gain: f64,
    bias: f64,
) -> Result<FeatureMap<T>, PipelineError> {
    if factor == 0 {
        return Err(PipelineError::Config(
            "downscale factor must be positive".into(),
        ));
    }
    let (rows, cols) = (height.div_ceil(factor), width.div_ceil(factor));
    let mut fg = vec![false; rows * cols];
    for (_, a) in frame.iter() {
        if let Some((ri, rj)) = layout_cover(a, height, width, factor) {
            for i in ri {
                for j in rj.clone() {
                    fg[i * cols + j] = true;
                }
            }
        }
    }
    let sigma = |z: f64| T::of(1.0 / (1.0 + (-z).exp()));
    let (on, off) = (sigma(gain + bias), sigma(bias));
    let data = fg.into_iter().map(|f| if f { on } else { off }).collect();
    FeatureMap::new(rows, cols, 1, data)
}
