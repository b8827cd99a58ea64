use super::flow::FlowField;
use super::ReconError;
use crate::raster::RasterFrame;

/// Bilinear sample at continuous pixel coordinates (pixel centres on the
/// integer grid), edges clamped. Returns unrounded channel values.
#[inline]
pub fn sample_bilinear(img: &RasterFrame, x: f64, y: f64) -> [f64; 3] {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as i64, y0 as i64);
    let p00 = img.get_clamped(x0, y0);
    if fx == 0.0 && fy == 0.0 {
        return p00.map(f64::from);
    }
    let p10 = img.get_clamped(x0 + 1, y0);
    let p01 = img.get_clamped(x0, y0 + 1);
    let p11 = img.get_clamped(x0 + 1, y0 + 1);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = top * (1.0 - fy) + bottom * fy;
    }
    out
}

#[inline]
pub fn round_channel(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Backward warp: output pixel `p` samples `image` at `p + flow(p)`.
pub fn warp(image: &RasterFrame, flow: &FlowField) -> Result<RasterFrame, ReconError> {
    if image.width() != flow.width || image.height() != flow.height {
        return Err(ReconError::Shape {
            expected: (image.width(), image.height()),
            found: (flow.width, flow.height),
        });
    }
    let mut out = image.clone();
    for y in 0..image.height() {
        for x in 0..image.width() {
            let [dx, dy] = flow.get(x, y);
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            let v = sample_bilinear(image, x as f64 + dx, y as f64 + dy);
            out.put(x, y, v.map(round_channel));
        }
    }
    Ok(out)
}
