use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{identify_relations, ForegroundMask, IngestError};
use crate::oar::{Attributes, BBox, Category, GopStream, OarFrame, ObjectId};
use crate::raster::RasterFrame;
use crate::reconstruct::paint_sprite;

/// Scripted motion of one synthetic object.
///
/// Geometry evolves from `appear_at`: the box center moves with constant
/// `velocity`, the angle turns by `rotation_rate` degrees per frame and both
/// sides scale by `(1 + scale_rate)` per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectProgram {
    pub id: ObjectId,
    pub category: Category,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub angle: f64,
    pub velocity: (f64, f64),
    pub rotation_rate: f64,
    pub scale_rate: f64,
    pub appear_at: u32,
}

impl ObjectProgram {
    pub fn fixed(id: ObjectId, category: Category, x: f64, y: f64, w: f64, h: f64) -> Self {
        ObjectProgram {
            id,
            category,
            x,
            y,
            w,
            h,
            angle: 0.0,
            velocity: (0.0, 0.0),
            rotation_rate: 0.0,
            scale_rate: 0.0,
            appear_at: 1,
        }
    }

    /// Unclipped, rounded box and angle at frame `t` (1-based), if born.
    fn state(&self, t: u32) -> Option<(BBox, f64)> {
        if t < self.appear_at {
            return None;
        }
        let k = (t - self.appear_at) as f64;
        let (x, y, w, h) = if self.scale_rate == 0.0 {
            (
                self.x + self.velocity.0 * k,
                self.y + self.velocity.1 * k,
                self.w,
                self.h,
            )
        } else {
            let s = (1.0 + self.scale_rate).powf(k);
            let (w, h) = (self.w * s, self.h * s);
            let cx = self.x + self.w / 2.0 + self.velocity.0 * k;
            let cy = self.y + self.h / 2.0 + self.velocity.1 * k;
            (cx - w / 2.0, cy - h / 2.0, w, h)
        };
        let r = |v: f64| (v + 0.5).floor() as i64;
        let bbox = BBox::from_xywh(r(x), r(y), r(w).max(1), r(h).max(1));
        let angle = (self.angle + self.rotation_rate * k).rem_euclid(360.0);
        let angle = if angle >= 360.0 { 0.0 } else { angle };
        Some((bbox, angle))
    }
}

/// Deterministic desk-scale scene description.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSceneSpec {
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub gop_length: u32,
    pub objects: Vec<ObjectProgram>,
    pub mask: ForegroundMask,
}

impl SyntheticSceneSpec {
    pub fn new(seed: u64, width: u32, height: u32, gop_length: u32) -> Self {
        SyntheticSceneSpec {
            seed,
            width,
            height,
            gop_length,
            objects: Vec::new(),
            mask: ForegroundMask::default(),
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    /// Rigid horizontal translation: one object per lane, integer velocities,
    /// every box inside the canvas for the whole group of pictures.
    pub fn rigid_lanes(seed: u64, count: usize, width: u32, height: u32, gop_length: u32) -> Self {
        let mut spec = SyntheticSceneSpec::new(seed, width, height, gop_length);
        if count == 0 {
            return spec;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lane = height as i64 / count as i64;
        let span = gop_length.saturating_sub(1) as i64;
        for i in 0..count {
            let h = rng
                .gen_range((lane * 45 / 100).max(2)..=(lane * 80 / 100).max(2))
                .min(lane.max(1));
            let top = i as i64 * lane + (lane - h) / 2;
            let w = rng.gen_range((width as i64 / 12).max(4)..=(width as i64 / 5).max(4));
            let mut vx: i64 = rng.gen_range(-3..=3);
            let lo = (-vx * span).max(0);
            let hi = (width as i64 - w).min(width as i64 - w - vx * span);
            if hi < lo {
                vx = 0;
            }
            let x = if hi < lo {
                rng.gen_range(0..=(width as i64 - w).max(0))
            } else {
                rng.gen_range(lo..=hi)
            };
            let angle = match vx.signum() {
                1 => 0.0,
                -1 => 180.0,
                _ => 90.0,
            };
            spec.objects.push(ObjectProgram {
                id: i as ObjectId + 1,
                category: Category::FOREGROUND[rng.gen_range(0..4)],
                x: x as f64,
                y: top as f64,
                w: w as f64,
                h: h as f64,
                angle,
                velocity: (vx as f64, 0.0),
                rotation_rate: 0.0,
                scale_rate: 0.0,
                appear_at: 1,
            });
        }
        spec
    }

    /// Dense free-moving traffic: overlaps, rotation, scaling, late births and
    /// exits. Used to stress the source codec.
    pub fn traffic(seed: u64, count: usize, width: u32, height: u32, gop_length: u32) -> Self {
        let mut spec = SyntheticSceneSpec::new(seed, width, height, gop_length);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (fw, fh) = (width as f64, height as f64);
        for i in 0..count {
            let w = rng.gen_range((fw / 20.0).max(2.0)..=(fw / 6.0).max(3.0));
            let h = rng.gen_range((fh / 20.0).max(2.0)..=(fh / 6.0).max(3.0));
            spec.objects.push(ObjectProgram {
                id: i as ObjectId + 1,
                category: Category::FOREGROUND[rng.gen_range(0..4)],
                x: rng.gen_range(0.0..(fw - w).max(1.0)),
                y: rng.gen_range(0.0..(fh - h).max(1.0)),
                w,
                h,
                angle: rng.gen_range(0.0..360.0),
                velocity: (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)),
                rotation_rate: rng.gen_range(-5.0..5.0),
                scale_rate: rng.gen_range(-0.02..0.02),
                appear_at: if rng.gen_bool(0.2) {
                    rng.gen_range(1..=gop_length.max(1))
                } else {
                    1
                },
            });
        }
        spec
    }

    fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: String| Err(IngestError::Scene(m));
        if self.width == 0 || self.height == 0 {
            return bad(format!("canvas {}x{}", self.width, self.height));
        }
        if self.width > u16::MAX as u32 || self.height > u16::MAX as u32 {
            return bad("canvas larger than 65535".into());
        }
        if self.gop_length < 2 {
            return Err(IngestError::GopLength(self.gop_length));
        }
        let mut ids = HashSet::new();
        for p in &self.objects {
            if p.id == 0 || !ids.insert(p.id) {
                return bad(format!("object id {} reserved or repeated", p.id));
            }
            if p.category == Category::Background {
                return bad(format!("object {} uses the background category", p.id));
            }
            if !(p.w > 0.0 && p.h > 0.0) || p.appear_at < 1 {
                return bad(format!("object {} has an empty box or birth frame 0", p.id));
            }
            let finite = [
                p.x,
                p.y,
                p.angle,
                p.velocity.0,
                p.velocity.1,
                p.rotation_rate,
                p.scale_rate,
            ];
            if finite.iter().any(|v| !v.is_finite()) || p.scale_rate <= -1.0 {
                return bad(format!("object {} has a non-finite program", p.id));
            }
        }
        Ok(())
    }
}

/// Output of [`generate_synthetic`].
#[derive(Clone, Debug)]
pub struct SyntheticScene {
    pub gop: GopStream,
    /// Ground-truth renders, one per frame.
    pub frames: Vec<RasterFrame>,
    /// The flat plate every frame is painted on.
    pub background: RasterFrame,
}

/// Smooth gradient plate. Linear along rows so row-neighbour inpainting
/// restores it up to integer rounding.
pub fn synthetic_background(width: u32, height: u32, seed: u64) -> RasterFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb4c6_9a1d_2f3e_5071);
    let base: [i64; 3] = [
        rng.gen_range(96..120),
        rng.gen_range(100..124),
        rng.gen_range(96..120),
    ];
    let mut img = RasterFrame::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let gx = x as i64 * 24 / width.max(1) as i64;
            let gy = y as i64 * 16 / height.max(1) as i64;
            let px = [
                (base[0] + gx + gy) as u8,
                (base[1] + gx) as u8,
                (base[2] + gy) as u8,
            ];
            img.put(x, y, px);
        }
    }
    img
}

/// Evaluates the scene programs into an OAR group of pictures and the
/// matching rendered frames. Objects that leave the canvas entirely never
/// come back.
pub fn generate_synthetic(spec: &SyntheticSceneSpec) -> Result<SyntheticScene, IngestError> {
    spec.validate()?;
    let background = synthetic_background(spec.width, spec.height, spec.seed);
    let mut exited: HashSet<ObjectId> = HashSet::new();
    let mut frames = Vec::with_capacity(spec.gop_length as usize);
    let mut renders = Vec::with_capacity(spec.gop_length as usize);
    for t in 1..=spec.gop_length {
        let mut frame = OarFrame::empty(t);
        let mut full_boxes = std::collections::HashMap::new();
        for p in &spec.objects {
            if exited.contains(&p.id) {
                continue;
            }
            let Some((bbox, angle)) = p.state(t) else {
                continue;
            };
            let clipped = bbox.clip(spec.width, spec.height);
            if clipped.is_empty() {
                exited.insert(p.id);
                continue;
            }
            full_boxes.insert(p.id, bbox);
            frame.push(
                p.id,
                Attributes {
                    x: clipped.x0 as u32,
                    y: clipped.y0 as u32,
                    w: clipped.width() as u32,
                    h: clipped.height() as u32,
                    angle,
                    category: p.category,
                },
            );
        }
        frame.relations = identify_relations(&frame, &spec.mask);
        let mut img = background.clone();
        for id in frame.depth_order() {
            let a = &frame.attributes[&id];
            paint_sprite(&mut img, full_boxes[&id], a.category, a.angle);
        }
        frames.push(frame);
        renders.push(img);
    }
    Ok(SyntheticScene {
        gop: GopStream::new(spec.width, spec.height, frames),
        frames: renders,
        background,
    })
}
