//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use oarvc::ingest::{identify_relations, ForegroundMask, Rect};
use oarvc::{
    Attributes, Category, GopStream, OarFrame, ObjectId, Relation, RelationLabel, BACKGROUND,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_attrs(r: &mut ChaCha8Rng, width: u32, height: u32) -> Attributes {
    Attributes {
        x: r.gen_range(0..width),
        y: r.gen_range(0..height),
        w: r.gen_range(1..=width.min(200)),
        h: r.gen_range(1..=height.min(200)),
        angle: r.gen_range(0.0..360.0),
        category: Category::FOREGROUND[r.gen_range(0..4)],
    }
}

fn step(r: &mut ChaCha8Rng, a: &Attributes, width: u32, height: u32) -> Attributes {
    let jitter = |r: &mut ChaCha8Rng, v: u32, lo: u32, hi: u32| -> u32 {
        let d: i64 = if r.gen_bool(0.05) {
            r.gen_range(-300..=300)
        } else {
            r.gen_range(-4..=4)
        };
        (v as i64 + d).clamp(lo as i64, hi as i64) as u32
    };
    let mut b = *a;
    b.x = jitter(r, a.x, 0, width - 1);
    b.y = jitter(r, a.y, 0, height - 1);
    b.w = jitter(r, a.w, 1, width);
    b.h = jitter(r, a.h, 1, height);
    b.angle = (a.angle + r.gen_range(-20.0..20.0)).rem_euclid(360.0);
    if b.angle >= 360.0 {
        b.angle = 0.0;
    }
    if r.gen_bool(0.03) {
        b.category = Category::FOREGROUND[r.gen_range(0..4)];
    }
    b
}

fn random_relations(
    r: &mut ChaCha8Rng,
    frame: &OarFrame,
    width: u32,
    height: u32,
) -> Vec<Relation> {
    if r.gen_bool(0.5) {
        let mut mask = ForegroundMask::default();
        for _ in 0..r.gen_range(0..3) {
            let x = r.gen_range(0..width);
            let y = r.gen_range(0..height);
            mask.rects.push(Rect {
                x,
                y,
                w: r.gen_range(1..=width - x),
                h: r.gen_range(1..=height - y),
            });
        }
        return identify_relations(frame, &mask).into_iter().collect();
    }
    let mut ends: Vec<ObjectId> = frame.objects.clone();
    ends.push(BACKGROUND);
    let mut out = Vec::new();
    if ends.len() < 2 {
        return out;
    }
    for _ in 0..r.gen_range(0..=2 * frame.len()) {
        let s = *ends.choose(r).unwrap();
        let o = *ends.choose(r).unwrap();
        if s != o {
            out.push(Relation::new(s, o, RelationLabel::ALL[r.gen_range(0..3)]));
        }
    }
    out
}

/// Valid random group of pictures with births, deaths, category changes,
/// seam-crossing angles, shuffled object order and arbitrary relations.
pub fn random_gop(seed: u64) -> GopStream {
    let mut r = rng(seed);
    let width = if r.gen_bool(0.2) {
        r.gen_range(1..=16)
    } else {
        r.gen_range(16..=1920)
    };
    let height = if r.gen_bool(0.2) {
        r.gen_range(1..=16)
    } else {
        r.gen_range(16..=1080)
    };
    let t = r.gen_range(2..=20u32);
    let mut next_id: ObjectId = 1;
    let mut live: Vec<(ObjectId, Attributes)> = Vec::new();
    let mut frames = Vec::with_capacity(t as usize);
    for index in 1..=t {
        let mut kept = Vec::with_capacity(live.len());
        for (id, a) in live {
            if r.gen_bool(0.9) {
                kept.push((id, step(&mut r, &a, width, height)));
            }
        }
        live = kept;
        let births = if index == 1 {
            r.gen_range(0..=8)
        } else {
            r.gen_range(0..=2)
        };
        for _ in 0..births {
            next_id += if r.gen_bool(0.1) {
                r.gen_range(1..2000)
            } else {
                r.gen_range(0..3)
            };
            live.push((next_id, random_attrs(&mut r, width, height)));
            next_id += 1;
        }
        if r.gen_bool(0.3) {
            live.shuffle(&mut r);
        }
        let mut frame = OarFrame::empty(index);
        for (id, a) in &live {
            frame.push(*id, *a);
        }
        frame.relations = random_relations(&mut r, &frame, width, height)
            .into_iter()
            .collect();
        frames.push(frame);
    }
    let g = GopStream::new(width, height, frames);
    g.validate()
        .expect("generator emits valid groups of pictures");
    g
}

/// Worst box IoU against the sent OAR and worst in-box PSNR against the
/// ground-truth renders, for a rigid-lane scene sent through the source
/// codec and rebuilt from its first render.
pub fn rigid_fidelity(seed: u64, gop_length: u32) -> (f64, f64) {
    use oarvc::codec::{decode_gop, encode_gop, QuantParams};
    use oarvc::ingest::{generate_synthetic, SyntheticSceneSpec};
    use oarvc::reconstruct::reconstruct_gop;
    use oarvc::report::metric_psnr;

    let spec = SyntheticSceneSpec::rigid_lanes(seed, 4, 160, 120, gop_length);
    let scene = generate_synthetic(&spec).expect("scene");
    let q = QuantParams::default();
    let decoded = decode_gop(&encode_gop(&scene.gop, q).expect("encode")).expect("decode");
    let frames = reconstruct_gop(&decoded, &scene.frames[0]).expect("reconstruct");
    let mut iou = 1.0f64;
    let mut psnr = f64::INFINITY;
    for (t, (sent, got)) in scene.gop.frames.iter().zip(&decoded.frames).enumerate() {
        for (id, a) in sent.iter() {
            let b = got.get(id).map_or(0.0, |b| a.bbox().iou(&b.bbox()));
            iou = iou.min(b);
        }
        let boxes: Vec<_> = got
            .iter()
            .map(|(_, a)| a.bbox().clip(decoded.width, decoded.height))
            .collect();
        if boxes.is_empty() {
            continue;
        }
        psnr = psnr.min(metric_psnr(&frames[t], &scene.frames[t], Some(&boxes)).expect("psnr"));
    }
    (iou, psnr)
}

pub fn random_raster(r: &mut ChaCha8Rng, width: u32, height: u32) -> oarvc::RasterFrame {
    let data = (0..width * height * 3).map(|_| r.gen()).collect();
    oarvc::RasterFrame::from_raw(width, height, data).expect("sized buffer")
}

/// Small frame with random, freely overlapping boxes.
pub fn small_frame(seed: u64) -> (OarFrame, usize, usize) {
    let mut r = rng(seed);
    let (height, width) = (r.gen_range(1..40usize), r.gen_range(1..40usize));
    let mut f = OarFrame::empty(1);
    for id in 1..=r.gen_range(0..7u32) {
        let x = r.gen_range(0..width as u32);
        let y = r.gen_range(0..height as u32);
        f.push(
            id * 3,
            Attributes {
                x,
                y,
                w: r.gen_range(1..=width as u32),
                h: r.gen_range(1..=height as u32),
                angle: 0.0,
                category: Category::FOREGROUND[r.gen_range(0..4)],
            },
        );
    }
    (f, height, width)
}

pub fn integer_features(
    seed: u64,
    count: usize,
    dim: usize,
) -> Vec<oarvc::graph::ObjectFeature<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            oarvc::graph::ObjectFeature::new(
                (0..dim).map(|_| r.gen_range(-1000..1000) as f64).collect(),
            )
        })
        .collect()
}

/// Inclusive-corner coverage, the layout's own support rule.
pub fn covering(f: &OarFrame, i: usize, j: usize) -> Vec<usize> {
    f.iter()
        .enumerate()
        .filter(|(_, (_, a))| {
            let (i, j) = (i as u32, j as u32);
            a.y <= i && i <= a.y + a.h && a.x <= j && j <= a.x + a.w
        })
        .map(|(k, _)| k)
        .collect()
}
