use super::ReportError;
use crate::oar::BBox;
use crate::raster::RasterFrame;

const SSIM_RADIUS: usize = 5;
const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;
const PEAK: f64 = 255.0;

/// Pixels inside at least one box, or every pixel when `region` is `None`.
fn region_mask(width: u32, height: u32, region: Option<&[BBox]>) -> Result<Vec<bool>, ReportError> {
    let n = width as usize * height as usize;
    let Some(boxes) = region else {
        return Ok(vec![true; n]);
    };
    let mut mask = vec![false; n];
    for b in boxes {
        let c = b.clip(width, height);
        for y in c.y0..c.y1 {
            for x in c.x0..c.x1 {
                mask[y as usize * width as usize + x as usize] = true;
            }
        }
    }
    if !mask.iter().any(|m| *m) {
        return Err(ReportError::EmptyRegion);
    }
    Ok(mask)
}

fn check(a: &RasterFrame, b: &RasterFrame) -> Result<(), ReportError> {
    a.same_shape(b)
        .map_err(|e| ReportError::Shape(e.to_string()))?;
    if a.width() == 0 || a.height() == 0 {
        return Err(ReportError::Shape("empty frame".into()));
    }
    Ok(())
}

pub fn mse(a: &RasterFrame, b: &RasterFrame, region: Option<&[BBox]>) -> Result<f64, ReportError> {
    check(a, b)?;
    let mask = region_mask(a.width(), a.height(), region)?;
    let (mut sum, mut count) = (0.0, 0usize);
    for (i, (pa, pb)) in a
        .as_raw()
        .chunks_exact(3)
        .zip(b.as_raw().chunks_exact(3))
        .enumerate()
    {
        if mask[i] {
            for c in 0..3 {
                let d = pa[c] as f64 - pb[c] as f64;
                sum += d * d;
            }
            count += 3;
        }
    }
    Ok(sum / count as f64)
}

/// `10 · log10(255² / MSE)`; `f64::INFINITY` for identical inputs.
pub fn metric_psnr(
    a: &RasterFrame,
    b: &RasterFrame,
    region: Option<&[BBox]>,
) -> Result<f64, ReportError> {
    let m = mse(a, b, region)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (PEAK * PEAK / m).log10())
}

fn gaussian() -> [f64; 2 * SSIM_RADIUS + 1] {
    let mut g = [0.0; 2 * SSIM_RADIUS + 1];
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - SSIM_RADIUS as f64;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.map(|v| v / s)
}

/// Separable Gaussian blur; the window is cut at the borders and renormalised.
fn blur(src: &[f64], w: usize, h: usize, g: &[f64]) -> Vec<f64> {
    let r = SSIM_RADIUS as isize;
    let pass = |src: &[f64], along_x: bool| {
        let mut out = vec![0.0; src.len()];
        for y in 0..h {
            for x in 0..w {
                let (mut acc, mut norm) = (0.0, 0.0);
                for k in -r..=r {
                    let (xx, yy) = if along_x {
                        (x as isize + k, y as isize)
                    } else {
                        (x as isize, y as isize + k)
                    };
                    if xx < 0 || yy < 0 || xx >= w as isize || yy >= h as isize {
                        continue;
                    }
                    let wt = g[(k + r) as usize];
                    acc += wt * src[yy as usize * w + xx as usize];
                    norm += wt;
                }
                out[y * w + x] = acc / norm;
            }
        }
        out
    };
    pass(&pass(src, true), false)
}

/// Mean SSIM over the three channels, Gaussian window 11×11 with σ = 1.5.
/// With `region`, only window centres inside the boxes are averaged.
pub fn metric_ssim(
    a: &RasterFrame,
    b: &RasterFrame,
    region: Option<&[BBox]>,
) -> Result<f64, ReportError> {
    check(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    let mask = region_mask(a.width(), a.height(), region)?;
    let g = gaussian();
    let c1 = (K1 * PEAK).powi(2);
    let c2 = (K2 * PEAK).powi(2);
    let mut total = 0.0;
    for c in 0..3 {
        let x: Vec<f64> = a
            .as_raw()
            .iter()
            .skip(c)
            .step_by(3)
            .map(|&v| v as f64)
            .collect();
        let y: Vec<f64> = b
            .as_raw()
            .iter()
            .skip(c)
            .step_by(3)
            .map(|&v| v as f64)
            .collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
        let (mx, my) = (blur(&x, w, h, &g), blur(&y, w, h, &g));
        let (sxx, syy, sxy) = (
            blur(&xx, w, h, &g),
            blur(&yy, w, h, &g),
            blur(&xy, w, h, &g),
        );
        let (mut sum, mut count) = (0.0, 0usize);
        for i in 0..w * h {
            if !mask[i] {
                continue;
            }
            let vx = sxx[i] - mx[i] * mx[i];
            let vy = syy[i] - my[i] * my[i];
            let cov = sxy[i] - mx[i] * my[i];
            let s = ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2))
                / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
            sum += s;
            count += 1;
        }
        total += sum / count as f64;
    }
    Ok(total / 3.0)
}
