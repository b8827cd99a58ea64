use super::flow::BoxMap;
use super::sprite::paint_sprite;
use super::warp::{round_channel, sample_bilinear};
use super::ReconError;
use crate::oar::OarFrame;
use crate::raster::RasterFrame;

/// Reference frame with its foreground boxes filled from row neighbours:
/// linear between the nearest uncovered pixels left and right, or a copy of
/// the one side that exists. Fully covered rows copy the nearest filled row.
pub fn background_plate(reference: &RasterFrame, oar: &OarFrame) -> RasterFrame {
    let (w, h) = (reference.width(), reference.height());
    let mut covered = vec![false; w as usize * h as usize];
    for (_, a) in oar.iter() {
        let b = a.bbox().clip(w, h);
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                covered[y as usize * w as usize + x as usize] = true;
            }
        }
    }
    let mut out = reference.clone();
    let mut empty_rows = Vec::new();
    for y in 0..h {
        let row = &covered[y as usize * w as usize..(y as usize + 1) * w as usize];
        if row.iter().all(|c| *c) {
            empty_rows.push(y);
            continue;
        }
        let mut x = 0;
        while x < w {
            if !row[x as usize] {
                x += 1;
                continue;
            }
            let start = x;
            while x < w && row[x as usize] {
                x += 1;
            }
            let left = start.checked_sub(1).map(|l| reference.get(l, y));
            let right = (x < w).then(|| reference.get(x, y));
            for xi in start..x {
                let rgb = match (left, right) {
                    (Some(l), Some(r)) => {
                        let t = (xi - start + 1) as f64 / (x - start + 1) as f64;
                        [0, 1, 2].map(|c| round_channel(l[c] as f64 * (1.0 - t) + r[c] as f64 * t))
                    }
                    (Some(v), None) | (None, Some(v)) => v,
                    (None, None) => unreachable!("row has an uncovered pixel"),
                };
                out.put(xi, y, rgb);
            }
        }
    }
    if empty_rows.len() == h as usize {
        return RasterFrame::filled(w, h, [128, 128, 128]);
    }
    let filled: Vec<u32> = (0..h)
        .filter(|y| empty_rows.binary_search(y).is_err())
        .collect();
    for y in empty_rows {
        let src = *filled
            .iter()
            .min_by_key(|&&f| ((f as i64 - y as i64).abs(), f))
            .expect("some row is filled");
        for x in 0..w {
            let v = out.get(x, src);
            out.put(x, y, v);
        }
    }
    out
}

/// Paints the background plate, then each object back to front: objects
/// present in the reference frame by resampling their reference crop onto
/// the current box, new objects as category sprites.
pub fn synthesize(
    frame: &OarFrame,
    reference_oar: &OarFrame,
    reference: &RasterFrame,
    background: &RasterFrame,
) -> Result<RasterFrame, ReconError> {
    reference
        .same_shape(background)
        .map_err(|_| ReconError::Shape {
            expected: (reference.width(), reference.height()),
            found: (background.width(), background.height()),
        })?;
    let (w, h) = (reference.width(), reference.height());
    let mut out = background.clone();
    for id in frame.depth_order() {
        let a = &frame.attributes[&id];
        match reference_oar.get(id).filter(|r| r.category == a.category) {
            Some(r) => {
                let map = BoxMap::new(a, r);
                let rb = r.bbox().clip(w, h);
                if rb.is_empty() {
                    paint_sprite(&mut out, a.bbox(), a.category, a.angle);
                    continue;
                }
                let b = a.bbox().clip(w, h);
                for y in b.y0..b.y1 {
                    for x in b.x0..b.x1 {
                        let q = map.apply_pixel(x as u32, y as u32);
                        // keep samples on the visible part of the reference crop
                        let sx = (q[0] - 0.5).clamp(rb.x0 as f64, (rb.x1 - 1) as f64);
                        let sy = (q[1] - 0.5).clamp(rb.y0 as f64, (rb.y1 - 1) as f64);
                        let v = sample_bilinear(reference, sx, sy);
                        out.put(x as u32, y as u32, v.map(round_channel));
                    }
                }
            }
            None => paint_sprite(&mut out, a.bbox(), a.category, a.angle),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oar::{Attributes, Category};

    fn obj(x: u32, y: u32, w: u32, h: u32, category: Category) -> Attributes {
        Attributes {
            x,
            y,
            w,
            h,
            angle: 0.0,
            category,
        }
    }

    fn noise(w: u32, h: u32) -> RasterFrame {
        let mut img = RasterFrame::new(w, h);
        for y in 0..h {
            for x in 0..w {
                img.put(
                    x,
                    y,
                    [(x * 31 + y * 17) as u8, (x * x + y) as u8, (y * 45) as u8],
                );
            }
        }
        img
    }

    #[test]
    fn plate_interpolates_rows() {
        let mut img = RasterFrame::filled(6, 2, [0, 0, 0]);
        img.put(1, 0, [10, 10, 10]);
        img.put(5, 0, [50, 50, 50]);
        let mut oar = OarFrame::empty(1);
        oar.push(1, obj(2, 0, 3, 1, Category::Car));
        let plate = background_plate(&img, &oar);
        assert_eq!(plate.get(2, 0), [20, 20, 20]);
        assert_eq!(plate.get(3, 0), [30, 30, 30]);
        assert_eq!(plate.get(4, 0), [40, 40, 40]);
        assert_eq!(plate.get(0, 1), img.get(0, 1));
    }

    #[test]
    fn plate_edge_and_full_rows() {
        let img = noise(5, 3);
        let mut oar = OarFrame::empty(1);
        oar.push(1, obj(0, 0, 5, 1, Category::Car));
        oar.push(2, obj(3, 1, 2, 1, Category::Car));
        let plate = background_plate(&img, &oar);
        assert_eq!(plate.get(4, 1), img.get(2, 1));
        for x in 0..5 {
            assert_eq!(plate.get(x, 0), plate.get(x, 1));
        }
    }

    #[test]
    fn empty_frame_gives_plate() {
        let img = noise(8, 8);
        let plate = noise(8, 8);
        assert_eq!(
            synthesize(&OarFrame::empty(2), &OarFrame::empty(1), &img, &plate).unwrap(),
            plate
        );
    }

    #[test]
    fn unchanged_object_copies_crop() {
        let img = noise(16, 12);
        let mut oar = OarFrame::empty(1);
        oar.push(3, obj(4, 2, 6, 5, Category::Van));
        let plate = background_plate(&img, &oar);
        let out = synthesize(&oar, &oar, &img, &plate).unwrap();
        for y in 2..7 {
            for x in 4..10 {
                assert_eq!(out.get(x, y), img.get(x, y));
            }
        }
    }

    #[test]
    fn new_object_is_a_sprite() {
        let img = noise(16, 12);
        let plate = img.clone();
        let mut cur = OarFrame::empty(2);
        cur.push(8, obj(1, 1, 10, 6, Category::Bus));
        let out = synthesize(&cur, &OarFrame::empty(1), &img, &plate).unwrap();
        let mut expected = plate.clone();
        paint_sprite(&mut expected, cur.attributes[&8].bbox(), Category::Bus, 0.0);
        assert_eq!(out, expected);
    }

    #[test]
    fn translated_object_moves_crop() {
        let img = noise(20, 10);
        let mut r = OarFrame::empty(1);
        r.push(1, obj(2, 2, 5, 4, Category::Car));
        let mut c = OarFrame::empty(2);
        c.push(1, obj(9, 3, 5, 4, Category::Car));
        let out = synthesize(&c, &r, &img, &img).unwrap();
        for y in 0..4 {
            for x in 0..5 {
                assert_eq!(out.get(9 + x, 3 + y), img.get(2 + x, 2 + y));
            }
        }
    }
}
