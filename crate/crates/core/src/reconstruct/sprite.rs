use crate::oar::{BBox, Category};
use crate::raster::RasterFrame;

/// Body colour per category code.
pub const PALETTE: [[u8; 3]; Category::COUNT] = [
    [200, 48, 40],   // car
    [232, 176, 32],  // bus
    [44, 96, 200],   // van
    [64, 168, 88],   // others
    [128, 128, 128], // background, never painted as a sprite
];

pub fn palette(category: Category) -> [u8; 3] {
    PALETTE[category.code() as usize]
}

/// Sprite colour at pixel `(px, py)` for an object occupying `bbox` and
/// heading along `angle` degrees (image axes, y down).
pub fn sprite_pixel(bbox: BBox, category: Category, angle: f64, px: i64, py: i64) -> [u8; 3] {
    let half_w = bbox.width() as f64 / 2.0;
    let half_h = bbox.height() as f64 / 2.0;
    let u = (px as f64 + 0.5 - (bbox.x0 as f64 + half_w)) / half_w;
    let v = (py as f64 + 0.5 - (bbox.y0 as f64 + half_h)) / half_h;
    let (s, c) = angle.to_radians().sin_cos();
    let front = u * c + v * s;
    let body = palette(category);
    let k = if front > 0.55 {
        0.45
    } else {
        1.0 - 0.2 * (u * u + v * v).min(2.0) / 2.0
    };
    body.map(|ch| (ch as f64 * k + 0.5).floor().clamp(0.0, 255.0) as u8)
}

/// Paints an oriented category sprite over `bbox`, clipped to the canvas.
/// The pattern is laid out against the full box, so a box extending past
/// the border shows only its visible part.
pub fn paint_sprite(img: &mut RasterFrame, bbox: BBox, category: Category, angle: f64) {
    if bbox.is_empty() {
        return;
    }
    let vis = bbox.clip(img.width(), img.height());
    for py in vis.y0..vis.y1 {
        for px in vis.x0..vis.x1 {
            let rgb = sprite_pixel(bbox, category, angle, px, py);
            img.put(px as u32, py as u32, rgb);
        }
    }
}
