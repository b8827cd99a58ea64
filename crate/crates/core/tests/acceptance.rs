//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use oarvc::channel::{
    demodulate_llr, hard_decide, modulate, trial_seed, ChannelConfig, LdpcConfig, Modulation,
};
use oarvc::codec::{decode_gop, encode_gop, quantize_gop, QuantParams};
use oarvc::graph::{build_layout, embed, graph_compute, Embedded, GraphModel, ObjectFeature};
use oarvc::ingest::{generate_synthetic, synthetic_background, SyntheticSceneSpec};
use oarvc::pipeline::{
    sequence_cbr, transmit_oar, transmit_reference, ImageCodec, PathPlan, ReferencePlan,
    TransmissionPlan,
};
use oarvc::reconstruct::{fuse, fuse_exact, warp, FlowField, FusionMask};
use oarvc::{Attributes, Category, OarFrame};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 0.05e-4
}

fn cbr_report() -> Verdict {
    let mut detail = Vec::new();
    let mut ok = true;
    for (bits, want) in [("366", 6.98e-4), ("219", 4.18e-4)] {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_oarvc"))
            .args([
                "report",
                "--mode",
                "cbr",
                "--bits",
                bits,
                "--ldpc-rate",
                "1/3",
                "--mod",
                "4qam",
                "--w",
                "512",
                "--h",
                "512",
            ])
            .output()
            .map_err(|e| e.to_string())?;
        let took = start.elapsed();
        let text = String::from_utf8_lossy(&out.stdout).trim().to_string();
        let got: f64 = text
            .parse()
            .map_err(|_| format!("unparsable output {text:?}"))?;
        ok &= out.status.success() && close(got, want) && took < Duration::from_secs(1);
        detail.push(format!(
            "{bits} bits -> {text} in {:.3}s",
            took.as_secs_f64()
        ));
    }
    ensure(ok, detail.join(", "))
}

fn sequence_report() -> Verdict {
    let mut detail = Vec::new();
    let mut ok = true;
    for (kbps, want) in [(3.5, 2.67e-4), (2.2, 1.68e-4)] {
        let got = sequence_cbr(
            kbps,
            25.0,
            &LdpcConfig::rate_1_3(),
            Modulation::Qam4,
            512,
            512,
        )
        .map_err(|e| e.to_string())?;
        ok &= close(got, want);
        detail.push(format!("{kbps} kbps -> {got:.3e}"));
    }
    ensure(ok, detail.join(", "))
}

fn distortion_free_oar() -> Verdict {
    const TRIALS: u64 = 1000;
    let start = Instant::now();
    let plan = TransmissionPlan::default();
    let q = QuantParams::new(plan.q_angle).unwrap();
    let failures: u64 = (0..TRIALS)
        .into_par_iter()
        .map(|i| {
            let scene = generate_synthetic(&SyntheticSceneSpec::traffic(
                trial_seed(1001, i),
                6,
                960,
                540,
                15,
            ))
            .unwrap();
            let bits = encode_gop(&scene.gop, q).unwrap();
            let out =
                transmit_oar::<f32>(&bits, &plan, &ChannelConfig::new(0.0, trial_seed(2002, i)))
                    .unwrap();
            let intact = out.gop.as_ref() == Some(&quantize_gop(&scene.gop, q));
            (!intact) as u64
        })
        .sum();
    let rate = failures as f64 / TRIALS as f64;
    let took = start.elapsed();
    ensure(
        rate <= 1e-3 && took <= Duration::from_secs(300),
        format!(
            "{failures}/{TRIALS} GoPs lost at 0 dB (rate 1/3, 4qam) in {:.1}s",
            took.as_secs_f64()
        ),
    )
}

fn cliff_effect() -> Verdict {
    const TRIALS: u64 = 200;
    let plan = TransmissionPlan {
        reference: ReferencePlan {
            codec: ImageCodec::Raw,
            path: PathPlan::new(LdpcConfig::rate_2_3(), Modulation::Qam16),
        },
        ..TransmissionPlan::default()
    };
    let grid = [0.0, 5.0, 10.0, 15.0, 20.0];
    let success: Vec<f64> = grid
        .iter()
        .map(|&snr| {
            let ok: u64 = (0..TRIALS)
                .into_par_iter()
                .map(|i| {
                    let frame = synthetic_background(16, 16, trial_seed(3003, i));
                    let out = transmit_reference::<f32>(
                        &frame,
                        &plan,
                        &ChannelConfig::new(snr, trial_seed(4004, i)),
                    )
                    .unwrap();
                    (out.frame.as_ref() == Some(&frame)) as u64
                })
                .sum();
            ok as f64 / TRIALS as f64
        })
        .collect();
    let monotone = success.windows(2).all(|w| w[1] >= w[0]);
    let span = success[4] - success[0];
    ensure(
        monotone && span >= 0.9,
        format!("success {success:?}, span {span:.3}"),
    )
}

fn codec_round_trip() -> Verdict {
    const GOPS: u64 = 500;
    let start = Instant::now();
    let q = QuantParams::default();
    let mut mismatches = 0;
    let mut nondeterministic = 0;
    let mut shrunk = 0;
    for seed in 0..GOPS {
        let g = common::random_gop(seed);
        let s = encode_gop(&g, q).unwrap();
        mismatches += (decode_gop(&s).unwrap() != quantize_gop(&g, q)) as u32;
        nondeterministic += (encode_gop(&g.clone(), q).unwrap() != s) as u32;
        let mut h = g.clone();
        let mut r = common::rng(seed ^ 0xacce);
        let t = r.gen_range(0..h.frames.len());
        let id = g
            .frames
            .iter()
            .flat_map(|f| f.objects.iter().copied())
            .max()
            .unwrap_or(0)
            + 1;
        h.frames[t].push(
            id,
            Attributes {
                x: r.gen_range(0..g.width),
                y: r.gen_range(0..g.height),
                w: 1,
                h: 1,
                angle: r.gen_range(0.0..360.0),
                category: Category::Bus,
            },
        );
        shrunk += (encode_gop(&h, q).unwrap().bit_len() < s.bit_len()) as u32;
    }
    let took = start.elapsed();
    ensure(
        mismatches + nondeterministic + shrunk == 0 && took < Duration::from_secs(30),
        format!(
            "{GOPS} GoPs: {mismatches} mismatches, {nondeterministic} nondeterministic, {shrunk} shrank on insert, {:.2}s",
            took.as_secs_f64()
        ),
    )
}

fn layout_exactness() -> Verdict {
    let (mut outside, mut single, mut overlap) = (0usize, 0usize, 0usize);
    for seed in 0..100 {
        let (frame, h, w) = common::small_frame(seed);
        let feats = common::integer_features(seed ^ 1, frame.len(), 4);
        let layout = build_layout(&feats, &frame, h, w).map_err(|e| e.to_string())?;
        for i in 0..h {
            for j in 0..w {
                let cover = common::covering(&frame, i, j);
                let want: Vec<f64> = (0..4)
                    .map(|d| cover.iter().map(|&k| feats[k].values[d]).sum())
                    .collect();
                let cell = layout.at(i, j);
                let good = match cover.len() {
                    0 => layout.is_zero_at(i, j),
                    _ => cell == want.as_slice(),
                };
                if !good {
                    return Err(format!(
                        "seed {seed}: cell ({i},{j}) under {} boxes is {cell:?}",
                        cover.len()
                    ));
                }
                match cover.len() {
                    0 => outside += 1,
                    1 => single += 1,
                    _ => overlap += 1,
                }
            }
        }
    }
    ensure(
        single > 0 && overlap > 0 && outside > 0,
        format!("100 frames exact: {outside} empty, {single} single, {overlap} overlapping cells"),
    )
}

fn reconstruction_fidelity() -> Verdict {
    let mut worst_iou = 1.0f64;
    let mut worst_psnr = f64::INFINITY;
    for seed in 0..10 {
        let (iou, psnr) = common::rigid_fidelity(seed, 10);
        worst_iou = worst_iou.min(iou);
        worst_psnr = worst_psnr.min(psnr);
    }
    ensure(
        worst_iou == 1.0 && worst_psnr >= 30.0,
        format!("10 rigid scenes: min IoU {worst_iou}, min in-box PSNR {worst_psnr:.2} dB"),
    )
}

fn fusion_identities() -> Verdict {
    for seed in 0..200u64 {
        let mut r = common::rng(seed);
        let (w, h) = (r.gen_range(1..32), r.gen_range(1..32));
        let s = common::random_raster(&mut r, w, h);
        let p = common::random_raster(&mut r, w, h);
        let exact =
            |f: &oarvc::RasterFrame| f.as_raw().iter().map(|&v| v as f64).collect::<Vec<_>>();
        let zero = FusionMask::constant(w, h, 0.0).unwrap();
        let one = FusionMask::constant(w, h, 1.0).unwrap();
        if fuse_exact(&s, &p, &zero).unwrap() != exact(&p) || fuse(&s, &p, &zero).unwrap() != p {
            return Err(format!("seed {seed}: W = 0 is not the warped branch"));
        }
        if fuse_exact(&s, &p, &one).unwrap() != exact(&s) || fuse(&s, &p, &one).unwrap() != s {
            return Err(format!("seed {seed}: W = 1 is not the synthesised branch"));
        }
        let m: Vec<f64> = (0..w * h).map(|_| r.gen_range(0.0..=1.0)).collect();
        let mixed = fuse_exact(&s, &p, &FusionMask::new(w, h, m).unwrap()).unwrap();
        let convex = mixed
            .iter()
            .zip(s.as_raw().iter().zip(p.as_raw()))
            .all(|(v, (&a, &b))| a.min(b) as f64 <= *v && *v <= a.max(b) as f64);
        if !convex {
            return Err(format!("seed {seed}: fused value outside its branches"));
        }
        if warp(&s, &FlowField::zeros(w, h)).unwrap() != s {
            return Err(format!("seed {seed}: zero-flow warp changed the image"));
        }
    }
    Ok("200 random frame pairs: W=0, W=1, convexity and zero-flow warp exact".into())
}

fn permute(g: &Embedded<f64>, perm: &[usize]) -> Embedded<f64> {
    let mut nodes = vec![Vec::new(); g.nodes.len()];
    for (k, n) in g.nodes.iter().enumerate() {
        nodes[perm[k]] = n.clone();
    }
    Embedded {
        nodes,
        edges: g.edges.clone(),
        triples: g
            .triples
            .iter()
            .map(|&(s, e, o)| (perm[s], e, perm[o]))
            .collect(),
    }
}

fn graph_equivariance() -> Verdict {
    let features = |f: &OarFrame, seed: u64| {
        let model = GraphModel::<f64>::seeded(seed, QuantParams::default());
        graph_compute(&embed(f, &model.tables, model.q).unwrap(), &model.weights).unwrap()
    };
    let bits = |v: &[ObjectFeature<f64>]| -> Vec<u64> {
        v.iter()
            .flat_map(|f| f.values.iter().map(|x| x.to_bits()))
            .collect()
    };
    let mut nodes = 0;
    for seed in 0..100u64 {
        let gop = common::random_gop(seed);
        let frame = &gop.frames[gop.frames.len() - 1];
        let model = GraphModel::<f64>::seeded(seed, QuantParams::default());
        let g = embed(frame, &model.tables, model.q).unwrap();
        let out = graph_compute(&g, &model.weights).unwrap();
        let mut perm: Vec<usize> = (0..g.nodes.len()).collect();
        perm.shuffle(&mut common::rng(seed ^ 0xe9));
        let moved = graph_compute(&permute(&g, &perm), &model.weights).unwrap();
        if out.iter().enumerate().any(|(k, f)| moved[perm[k]] != *f) {
            return Err(format!("seed {seed}: node permutation changed features"));
        }
        let mut shuffled = frame.clone();
        shuffled.objects.shuffle(&mut common::rng(seed ^ 0x5f));
        let again = features(&shuffled, seed);
        for (k, id) in frame.objects.iter().enumerate() {
            let at = shuffled.objects.iter().position(|o| o == id).unwrap();
            if again[at + 1] != out[k + 1] {
                return Err(format!(
                    "seed {seed}: object {id} feature moved with insertion order"
                ));
            }
        }
        if bits(&features(frame, seed)) != bits(&out) {
            return Err(format!("seed {seed}: rerun not bit-identical"));
        }
        nodes += out.len();
    }
    Ok(format!(
        "100 frames, {nodes} nodes: permutation-exact and bit-identical on rerun"
    ))
}

fn constellation_contracts() -> Verdict {
    let mut detail = Vec::new();
    for m in Modulation::ALL {
        let points = m.constellation();
        let energy = points.iter().map(|c| c.norm_sqr()).sum::<f64>() / points.len() as f64;
        if (energy - 1.0).abs() > 1e-12 {
            return Err(format!("{}: mean energy {energy}", m.label()));
        }
        let dmin = (0..points.len())
            .flat_map(|a| {
                (0..points.len())
                    .filter(move |&b| b != a)
                    .map(move |b| (a, b))
            })
            .map(|(a, b)| (points[a] - points[b]).norm())
            .fold(f64::INFINITY, f64::min);
        let mut pairs = 0;
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                if (points[a] - points[b]).norm() <= dmin * (1.0 + 1e-9) {
                    pairs += 1;
                    if (a ^ b).count_ones() != 1 {
                        return Err(format!(
                            "{}: neighbours {a:b} and {b:b} differ in more than one bit",
                            m.label()
                        ));
                    }
                }
            }
        }
        let mut r = common::rng(m.bits_per_symbol() as u64);
        for trial in 0..10_000 {
            let len = r.gen_range(1..200);
            let bits: Vec<u8> = (0..len).map(|_| r.gen_range(0..=1)).collect();
            let back = hard_decide(&demodulate_llr::<f64>(&modulate(&bits, m), 0.0));
            if back != bits {
                return Err(format!(
                    "{}: string {trial} did not survive the noiseless round trip",
                    m.label()
                ));
            }
        }
        detail.push(format!("{} ({pairs} neighbour pairs)", m.label()));
    }
    Ok(format!(
        "unit energy, Gray adjacency, 10^4 round trips: {}",
        detail.join(", ")
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("CBR accounting", cbr_report),
        ("sequence CBR", sequence_report),
        ("distortion-free OAR path", distortion_free_oar),
        ("cliff effect", cliff_effect),
        ("source codec round trip", codec_round_trip),
        ("layout exactness", layout_exactness),
        ("reconstruction fidelity", reconstruction_fidelity),
        ("fusion and warp identities", fusion_identities),
        ("graph equivariance and determinism", graph_equivariance),
        ("constellation contracts", constellation_contracts),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.1}s]", n + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.1}s]", n + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
