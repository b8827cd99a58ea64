use std::io::Write;

use rayon::prelude::*;

use super::args::SimulateArgs;
use super::commands::{say, write_file};
use super::{CliError, Outcome};
use crate::channel::{trial_seed, ChannelConfig};
use crate::codec::{encode_gop, Bitstream};
use crate::ingest::{generate_synthetic, SyntheticScene, SyntheticSceneSpec};
use crate::pipeline::{
    cbr, gop_seeds, run_end_to_end, transmit_oar, GopInput, ImageCodec, PathPlan, ReferencePlan,
    TransmissionPlan,
};
use crate::report::{metric_oar_fidelity, metric_ssim, mse, OarFidelity, Record, Report};

/// Salt separating scene seeds from channel seeds.
const SCENE_SALT: u64 = 0x5CE7_E5EE_D000_0001;

struct Trial {
    failed: bool,
    total_cbr: f64,
    oar_bits: usize,
    blocks: usize,
    failed_blocks: usize,
    bits: usize,
    bit_errors: usize,
    fidelity: OarFidelity,
    /// Summed squared error and sample count, plus per-frame SSIM values.
    pixels: Option<(f64, usize, Vec<f64>)>,
}

fn score_frames(
    truth: &SyntheticScene,
    frames: &[crate::raster::RasterFrame],
) -> Result<(f64, usize, Vec<f64>), CliError> {
    let (mut se, mut n, mut ssim) = (0.0, 0usize, Vec::new());
    for (f, g) in frames.iter().zip(&truth.frames) {
        let samples = f.as_raw().len();
        se += mse(f, g, None)? * samples as f64;
        n += samples;
        ssim.push(metric_ssim(f, g, None)?);
    }
    Ok((se, n, ssim))
}

pub(crate) fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    if a.trials == 0 {
        return Err(CliError::Invalid("--trials must be positive".into()));
    }
    if let Some(t) = a.fail_threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Invalid(format!(
                "failure threshold {t} outside [0, 1]"
            )));
        }
    }
    let codec = ImageCodec::resolve(&a.codec, a.quality)?;
    let scenes = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let spec = SyntheticSceneSpec::traffic(
                trial_seed(a.seed ^ SCENE_SALT, i as u64),
                a.objects,
                a.width,
                a.height,
                a.gop,
            );
            generate_synthetic(&spec)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let q = crate::codec::QuantParams::new(a.q)?;
    let streams: Vec<Bitstream> = scenes
        .iter()
        .map(|s| encode_gop(&s.gop, q))
        .collect::<Result<_, _>>()?;
    let inputs: Vec<GopInput> = scenes
        .iter()
        .map(|s| GopInput {
            gop: s.gop.clone(),
            reference: s.frames[0].clone(),
        })
        .collect();

    let config = serde_json::json!({
        "snr_db": a.snr.0,
        "ldpc": a.ldpc.iter().map(|l| l.name.clone()).collect::<Vec<_>>(),
        "modulation": a.modulation.iter().map(|m| m.label()).collect::<Vec<_>>(),
        "decoder": format!("{:?}", a.decoder),
        "cbr_mode": a.cbr_mode.to_string(),
        "trials": a.trials,
        "seed": a.seed,
        "width": a.width,
        "height": a.height,
        "gop": a.gop,
        "objects": a.objects,
        "q_angle": a.q,
        "fps": a.fps,
        "with_reference": a.with_reference,
        "reference": if a.with_reference {
            serde_json::json!({"ldpc": a.ref_ldpc.name, "modulation": a.ref_mod.label(), "codec": codec.id()})
        } else {
            serde_json::Value::Null
        },
    });
    let mut report = Report::new(a.experiment.clone(), config);
    let (mut all_trials, mut all_failures) = (0usize, 0usize);

    for ldpc in &a.ldpc {
        for &m in &a.modulation {
            let plan = TransmissionPlan {
                oar: PathPlan::new(ldpc.clone().with_decoder(a.decoder), m),
                reference: ReferencePlan {
                    codec: codec.clone(),
                    path: PathPlan::new(a.ref_ldpc.clone().with_decoder(a.decoder), a.ref_mod),
                },
                cbr_mode: a.cbr_mode,
                q_angle: a.q,
                fps: a.fps,
            };
            plan.validate()?;
            for &snr in &a.snr.0 {
                let channel = ChannelConfig::new(snr, a.seed);
                let trials: Vec<Trial> = if a.with_reference {
                    run_end_to_end::<f32>(&inputs, &plan, &channel)?
                        .into_iter()
                        .zip(&scenes)
                        .map(|(e, s)| {
                            let r = &e.result;
                            Ok(Trial {
                                failed: e.frames.is_none(),
                                total_cbr: r.total_cbr,
                                oar_bits: r.oar_bits,
                                blocks: r.oar_link.blocks + r.reference_link.blocks,
                                failed_blocks: r.oar_link.failed_blocks
                                    + r.reference_link.failed_blocks,
                                bits: r.oar_bits + r.reference_bits,
                                bit_errors: r.oar_link.bit_errors + r.reference_link.bit_errors,
                                fidelity: metric_oar_fidelity(&s.gop, r.gop.as_ref()),
                                pixels: e
                                    .frames
                                    .as_deref()
                                    .map(|f| score_frames(s, f))
                                    .transpose()?,
                            })
                        })
                        .collect::<Result<_, CliError>>()?
                } else {
                    streams
                        .par_iter()
                        .zip(&scenes)
                        .enumerate()
                        .map(|(i, (bits, s))| {
                            let ch = channel.with_seed(gop_seeds(a.seed, i).0);
                            let r = transmit_oar::<f32>(bits, &plan, &ch)?;
                            Ok(Trial {
                                failed: !r.success(),
                                total_cbr: cbr(
                                    r.path.symbols,
                                    s.gop.width,
                                    s.gop.height,
                                    s.gop.gop_length,
                                )?,
                                oar_bits: r.path.info_bits,
                                blocks: r.path.link.blocks,
                                failed_blocks: r.path.link.failed_blocks,
                                bits: r.path.info_bits,
                                bit_errors: r.path.link.bit_errors,
                                fidelity: metric_oar_fidelity(&s.gop, r.gop.as_ref()),
                                pixels: None,
                            })
                        })
                        .collect::<Result<_, CliError>>()?
                };
                let n = trials.len() as f64;
                let failures = trials.iter().filter(|t| t.failed).count();
                all_trials += trials.len();
                all_failures += failures;
                let mean = |f: &dyn Fn(&Trial) -> f64| trials.iter().map(f).sum::<f64>() / n;
                let scored: Vec<&(f64, usize, Vec<f64>)> =
                    trials.iter().filter_map(|t| t.pixels.as_ref()).collect();
                let (psnr, ssim) = if scored.is_empty() {
                    (None, None)
                } else {
                    let se: f64 = scored.iter().map(|p| p.0).sum();
                    let count: usize = scored.iter().map(|p| p.1).sum();
                    let mse = se / count as f64;
                    let psnr = if mse == 0.0 {
                        f64::INFINITY
                    } else {
                        10.0 * (255.0f64 * 255.0 / mse).log10()
                    };
                    let all: Vec<f64> = scored.iter().flat_map(|p| p.2.iter().copied()).collect();
                    (Some(psnr), Some(all.iter().sum::<f64>() / all.len() as f64))
                };
                let blocks: usize = trials.iter().map(|t| t.blocks).sum();
                let bits: usize = trials.iter().map(|t| t.bits).sum();
                report.push(Record {
                    snr_db: snr,
                    cbr: mean(&|t| t.total_cbr),
                    kbps: mean(&|t| t.oar_bits as f64 * a.fps / a.gop as f64 / 1000.0),
                    trials: trials.len(),
                    failures,
                    fer: trials.iter().map(|t| t.failed_blocks).sum::<usize>() as f64
                        / blocks.max(1) as f64,
                    ber: trials.iter().map(|t| t.bit_errors).sum::<usize>() as f64
                        / bits.max(1) as f64,
                    psnr,
                    ssim,
                    box_iou: Some(mean(&|t| t.fidelity.box_iou)),
                    category_accuracy: Some(mean(&|t| t.fidelity.category_accuracy)),
                    angle_mae: Some(mean(&|t| t.fidelity.angle_mae)),
                    seed: a.seed,
                });
            }
        }
    }
    report.sort();
    match &a.out {
        Some(p) => {
            write_file(p, report.to_csv()?.as_bytes())?;
            write_file(&Report::sidecar_path(p), report.sidecar_json()?.as_bytes())?;
            say(
                out,
                &serde_json::json!({"rows": report.records.len(), "out": p.display().to_string()})
                    .to_string(),
            )?;
        }
        None => {
            out.write_all(report.to_csv()?.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    match a.fail_threshold {
        Some(t) if all_failures as f64 / all_trials as f64 > t => Ok(Outcome::ChannelFailures),
        _ => Ok(Outcome::Done),
    }
}
