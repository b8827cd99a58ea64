//! Frame reconstruction from a reference frame and a decoded OAR sequence.
//!
//! Each frame after the first fuses two branches: the previous output warped
//! along an OAR-derived flow, and a synthesis painted from a background plate
//! and reference crops. The synthesis branch is used where the flow has no
//! valid source pixel.

mod flow;
mod fuse;
mod sprite;
mod synth;
mod warp;

use thiserror::Error;

pub use flow::{flow_and_holes, flow_from_oar, owner_map, BoxMap, FlowField};
pub use fuse::{fuse, fuse_exact, FusionMask};
pub use sprite::{paint_sprite, palette, sprite_pixel, PALETTE};
pub use synth::{background_plate, synthesize};
pub use warp::{round_channel, sample_bilinear, warp};

use crate::oar::GopStream;
use crate::raster::RasterFrame;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: (u32, u32),
        found: (u32, u32),
    },
    #[error("fusion mask: {0}")]
    Mask(String),
    #[error("group of pictures has no frames")]
    EmptyGop,
}

/// Rebuilds all `T` frames; frame 1 is the reference itself.
pub fn reconstruct_gop(
    gop: &GopStream,
    reference: &RasterFrame,
) -> Result<Vec<RasterFrame>, ReconError> {
    if (reference.width(), reference.height()) != (gop.width, gop.height) {
        return Err(ReconError::Shape {
            expected: (gop.width, gop.height),
            found: (reference.width(), reference.height()),
        });
    }
    let first = gop.frames.first().ok_or(ReconError::EmptyGop)?;
    let plate = background_plate(reference, first);
    let mut out = Vec::with_capacity(gop.frames.len());
    out.push(reference.clone());
    for pair in gop.frames.windows(2) {
        let (prev, curr) = (&pair[0], &pair[1]);
        let (flow, holes) = flow_and_holes(prev, curr, gop.width, gop.height);
        let warped = warp(out.last().expect("frame 1 pushed"), &flow)?;
        let synth = synthesize(curr, first, reference, &plate)?;
        let mask = FusionMask::from_holes(gop.width, gop.height, &holes);
        out.push(fuse(&synth, &warped, &mask)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_synthetic, ObjectProgram, SyntheticSceneSpec};
    use crate::oar::Category;

    #[test]
    fn static_scene_repeats_reference() {
        let mut spec = SyntheticSceneSpec::new(1, 64, 48, 6);
        spec.objects
            .push(ObjectProgram::fixed(1, Category::Car, 5.0, 6.0, 20.0, 10.0));
        spec.objects.push(ObjectProgram::fixed(
            2,
            Category::Bus,
            15.0,
            10.0,
            30.0,
            20.0,
        ));
        let scene = generate_synthetic(&spec).unwrap();
        let frames = reconstruct_gop(&scene.gop, &scene.frames[0]).unwrap();
        assert!(frames.iter().all(|f| *f == scene.frames[0]));
    }

    #[test]
    fn translation_is_exact_inside_boxes() {
        let mut spec = SyntheticSceneSpec::new(1, 64, 32, 8);
        let mut p = ObjectProgram::fixed(1, Category::Van, 4.0, 6.0, 12.0, 8.0);
        p.velocity = (3.0, 1.0);
        spec.objects.push(p);
        let scene = generate_synthetic(&spec).unwrap();
        let frames = reconstruct_gop(&scene.gop, &scene.frames[0]).unwrap();
        for (t, f) in scene.gop.frames.iter().enumerate() {
            let b = f.attributes[&1].bbox();
            for y in b.y0..b.y1 {
                for x in b.x0..b.x1 {
                    assert_eq!(
                        frames[t].get(x as u32, y as u32),
                        scene.frames[t].get(x as u32, y as u32)
                    );
                }
            }
        }
    }

    #[test]
    fn birth_paints_sprite_at_box() {
        let mut spec = SyntheticSceneSpec::new(1, 48, 32, 4);
        let mut p = ObjectProgram::fixed(4, Category::Bus, 10.0, 8.0, 14.0, 9.0);
        p.appear_at = 3;
        spec.objects.push(p);
        let scene = generate_synthetic(&spec).unwrap();
        let frames = reconstruct_gop(&scene.gop, &scene.frames[0]).unwrap();
        let mut sprite = RasterFrame::new(48, 32);
        let a = scene.gop.frames[2].attributes[&4];
        paint_sprite(&mut sprite, a.bbox(), a.category, a.angle);
        let b = a.bbox();
        for y in b.y0..b.y1 {
            for x in b.x0..b.x1 {
                assert_eq!(
                    frames[2].get(x as u32, y as u32),
                    sprite.get(x as u32, y as u32)
                );
            }
        }
        assert_eq!(frames[1], scene.frames[0]);
    }

    #[test]
    fn reference_shape_checked() {
        let gop = GopStream::new(8, 8, vec![crate::oar::OarFrame::empty(1)]);
        assert!(reconstruct_gop(&gop, &RasterFrame::new(8, 9)).is_err());
    }
}
