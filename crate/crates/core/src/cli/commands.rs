use std::io::Write;
use std::path::Path;

use super::args::{
    Command, Motion, Payload, ReportArgs, ReportMode, SynthArgs, TrackArgs, TransmitArgs,
};
use super::{CliError, Outcome};
use crate::channel::{trial_seed, ChannelConfig};
use crate::codec::{
    bit_account, decode_gop, encode_gop, read_container, write_container, QuantParams,
};
use crate::ingest::{
    build_oar_sequence, generate_synthetic, parse_mask, parse_tracks, write_tracks_jsonl,
    ForegroundMask, SyntheticSceneSpec, TrackRecord,
};
use crate::oar::GopStream;
use crate::pipeline::{
    cbr, payload_cbr, sequence_cbr, source_symbols, transmit_oar, transmit_reference, ImageCodec,
    PathPlan, ReferencePlan, TransmissionPlan,
};
use crate::raster::RasterFrame;
use crate::report::Report;

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(target: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match target {
        Some(p) => write_file(p, text.as_bytes()),
        None => out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

pub(crate) fn say(out: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn load_gops(t: &TrackArgs) -> Result<Vec<GopStream>, CliError> {
    let records = parse_tracks(&t.input, t.format)?;
    let mask = match &t.mask {
        Some(p) => parse_mask(p)?,
        None => ForegroundMask::default(),
    };
    Ok(build_oar_sequence(
        &records, &mask, t.width, t.height, t.gop,
    )?)
}

fn gops_jsonl(gops: &[GopStream]) -> Result<String, CliError> {
    let mut s = String::new();
    for g in gops {
        s.push_str(&serde_json::to_string(g)?);
        s.push('\n');
    }
    Ok(s)
}

fn read_oar_jsonl(path: &Path) -> Result<Vec<GopStream>, CliError> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| CliError::Invalid(format!("{}: not UTF-8", path.display())))?;
    let mut gops = Vec::new();
    for (n, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let g: GopStream = serde_json::from_str(line)
            .map_err(|e| CliError::Invalid(format!("{} line {}: {e}", path.display(), n + 1)))?;
        g.validate()
            .map_err(|e| CliError::Invalid(format!("{} line {}: {e}", path.display(), n + 1)))?;
        gops.push(g);
    }
    Ok(gops)
}

fn check_threshold(t: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(CliError::Invalid(format!(
            "failure threshold {t} outside [0, 1]"
        )));
    }
    Ok(())
}

pub(crate) fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<Outcome, CliError> {
    match cmd {
        Command::Extract(a) => {
            let gops = load_gops(&a.tracks)?;
            emit(a.out.as_deref(), &gops_jsonl(&gops)?, out)?;
        }
        Command::Encode(a) => {
            let gops = if a.oar {
                read_oar_jsonl(&a.tracks.input)?
            } else {
                load_gops(&a.tracks)?
            };
            let q = QuantParams::new(a.q)?;
            let streams = gops
                .iter()
                .map(|g| encode_gop(g, q))
                .collect::<Result<Vec<_>, _>>()?;
            write_file(&a.out, &write_container(&streams))?;
            let bits: usize = streams.iter().map(|s| s.bit_len()).sum();
            let frames: u32 = gops.iter().map(|g| g.gop_length).sum();
            let kbps = if frames == 0 {
                0.0
            } else {
                crate::codec::kbps(bits as f64, frames, a.fps)?
            };
            say(out, &serde_json::json!({"gops": gops.len(), "bits": bits, "frames": frames, "kbps": kbps}).to_string())?;
        }
        Command::Decode(a) => {
            let streams = read_container(&read_file(&a.input)?)?;
            let gops = streams
                .iter()
                .map(decode_gop)
                .collect::<Result<Vec<_>, _>>()?;
            emit(a.out.as_deref(), &gops_jsonl(&gops)?, out)?;
        }
        Command::Transmit(a) => return transmit(&a, out),
        Command::Simulate(a) => return super::simulate::simulate(&a, out),
        Command::Synth(a) => synth(&a, out)?,
        Command::Report(a) => report(&a, out)?,
    }
    Ok(Outcome::Done)
}

fn transmit(a: &TransmitArgs, out: &mut dyn Write) -> Result<Outcome, CliError> {
    check_threshold(a.link.fail_threshold)?;
    let path = PathPlan::new(
        a.link.ldpc.clone().with_decoder(a.link.decoder),
        a.link.modulation,
    );
    let mut plan = TransmissionPlan {
        cbr_mode: a.link.cbr_mode,
        ..TransmissionPlan::default()
    };
    let (trials, failures, summary) = match a.kind {
        Payload::Oar => {
            plan.oar = path;
            let streams = read_container(&read_file(&a.input)?)?;
            let (mut received, mut failures) = (Vec::new(), 0usize);
            let (mut symbols, mut source) = (0u64, 0u64);
            let (mut blocks, mut failed_blocks, mut bits, mut errors) =
                (0usize, 0usize, 0usize, 0usize);
            for (i, s) in streams.iter().enumerate() {
                let gop = decode_gop(s)?;
                let ch = ChannelConfig::new(a.snr, trial_seed(a.seed, i as u64));
                let r = transmit_oar::<f64>(s, &plan, &ch)?;
                symbols += r.path.symbols;
                source += source_symbols(gop.width, gop.height, gop.gop_length);
                blocks += r.path.link.blocks;
                failed_blocks += r.path.link.failed_blocks;
                bits += r.path.info_bits;
                errors += r.path.link.bit_errors;
                match r.stream {
                    Some(rx) => received.push(rx),
                    None => failures += 1,
                }
            }
            if let Some(p) = &a.out {
                write_file(p, &write_container(&received))?;
            }
            let summary = serde_json::json!({
                "kind": "oar",
                "streams": streams.len(),
                "failures": failures,
                "fer": failed_blocks as f64 / blocks.max(1) as f64,
                "ber": errors as f64 / bits.max(1) as f64,
                "symbols": symbols,
                "cbr": if source == 0 { 0.0 } else { symbols as f64 / source as f64 },
            });
            (streams.len(), failures, summary)
        }
        Payload::Image => {
            plan.reference = ReferencePlan {
                codec: ImageCodec::resolve(&a.codec, a.quality)?,
                path,
            };
            let frame = RasterFrame::load_ppm(&a.input)?;
            let r = transmit_reference::<f64>(&frame, &plan, &ChannelConfig::new(a.snr, a.seed))?;
            if let (Some(p), Some(f)) = (&a.out, &r.frame) {
                f.save_ppm(p)?;
            }
            let summary = serde_json::json!({
                "kind": "image",
                "codec": plan.reference.codec.id(),
                "success": r.success(),
                "bits": r.path.info_bits,
                "blocks": r.path.link.blocks,
                "failed_blocks": r.path.link.failed_blocks,
                "symbols": r.path.symbols,
                "cbr": cbr(r.path.symbols, frame.width(), frame.height(), 1)?,
            });
            (1, !r.success() as usize, summary)
        }
    };
    say(out, &summary.to_string())?;
    if trials > 0 && failures as f64 / trials as f64 > a.link.fail_threshold {
        return Ok(Outcome::ChannelFailures);
    }
    Ok(Outcome::Done)
}

fn synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = match a.motion {
        Motion::Traffic => SyntheticSceneSpec::traffic(a.seed, a.objects, a.width, a.height, a.gop),
        Motion::Rigid => {
            SyntheticSceneSpec::rigid_lanes(a.seed, a.objects, a.width, a.height, a.gop)
        }
    };
    let scene = generate_synthetic(&spec)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| CliError::Io {
        path: a.out_dir.display().to_string(),
        source,
    })?;
    for (t, f) in scene.frames.iter().enumerate() {
        f.save_ppm(&a.out_dir.join(format!("frame_{:03}.ppm", t + 1)))?;
    }
    scene
        .background
        .save_ppm(&a.out_dir.join("background.ppm"))?;
    let records: Vec<TrackRecord> = scene
        .gop
        .frames
        .iter()
        .flat_map(|f| {
            f.iter().map(|(id, at)| TrackRecord {
                frame_index: f.frame_index,
                id,
                x: at.x as f64,
                y: at.y as f64,
                w: at.w as f64,
                h: at.h as f64,
                angle: Some(at.angle),
                category: at.category,
            })
        })
        .collect();
    let mut tracks = Vec::new();
    write_tracks_jsonl(&records, &mut tracks).expect("writing to a Vec cannot fail");
    write_file(&a.out_dir.join("tracks.jsonl"), &tracks)?;
    write_file(
        &a.out_dir.join("oar.jsonl"),
        gops_jsonl(std::slice::from_ref(&scene.gop))?.as_bytes(),
    )?;
    say(
        out,
        &serde_json::json!({
            "frames": scene.frames.len(),
            "objects": spec.object_count(),
            "records": records.len(),
            "dir": a.out_dir.display().to_string(),
        })
        .to_string(),
    )
}

fn report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    match a.mode {
        ReportMode::Cbr => {
            let bits = a
                .bits
                .ok_or_else(|| CliError::Invalid("--mode cbr needs --bits".into()))?;
            let r = payload_cbr(
                bits,
                &a.ldpc,
                a.modulation,
                a.cbr_mode,
                a.width,
                a.height,
                a.frames,
            )?;
            say(out, &format!("{r:.2e}"))
        }
        ReportMode::Sequence => {
            let kbps = a
                .kbps
                .ok_or_else(|| CliError::Invalid("--mode sequence needs --kbps".into()))?;
            let r = sequence_cbr(kbps, a.fps, &a.ldpc, a.modulation, a.width, a.height)?;
            say(out, &format!("{r:.2e}"))
        }
        ReportMode::Account => {
            let [input] = a.input.as_slice() else {
                return Err(CliError::Invalid(
                    "--mode account needs exactly one --in".into(),
                ));
            };
            let mut text = String::new();
            for s in read_container(&read_file(input)?)? {
                text.push_str(&serde_json::to_string(&bit_account(&s, a.fps)?)?);
                text.push('\n');
            }
            emit(a.out.as_deref(), &text, out)
        }
        ReportMode::Aggregate => aggregate(a, out),
    }
}

/// Concatenates CSV tables with identical headers, ordered by `snr_db` then
/// `cbr` when those columns exist. Ties keep input order.
fn aggregate(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.input.is_empty() {
        return Err(CliError::Invalid(
            "--mode aggregate needs at least one --in".into(),
        ));
    }
    let mut header: Option<csv::StringRecord> = None;
    let mut rows = Vec::new();
    for p in &a.input {
        let bytes = read_file(p)?;
        let mut r = csv::Reader::from_reader(bytes.as_slice());
        let h = r.headers()?.clone();
        match &header {
            Some(first) if *first != h => {
                return Err(CliError::Invalid(format!(
                    "{}: header differs from {}",
                    p.display(),
                    a.input[0].display()
                )))
            }
            Some(_) => {}
            None => header = Some(h),
        }
        for rec in r.records() {
            rows.push(rec?);
        }
    }
    let header = header.expect("at least one input");
    let col = |name: &str| header.iter().position(|h| h == name);
    let key = |rec: &csv::StringRecord, c: Option<usize>| {
        c.and_then(|i| rec.get(i))
            .and_then(|v| v.parse::<f64>().ok())
            .unwrap_or(f64::NAN)
    };
    let (snr, rate) = (col("snr_db"), col("cbr"));
    rows.sort_by(|x, y| {
        key(x, snr)
            .total_cmp(&key(y, snr))
            .then(key(x, rate).total_cmp(&key(y, rate)))
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in &rows {
        w.write_record(r)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let body = String::from_utf8(body).expect("csv output is UTF-8");
    emit(a.out.as_deref(), &body, out)?;
    if let Some(p) = &a.out {
        let side = serde_json::json!({
            "sources": a.input.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "rows": rows.len(),
        });
        write_file(
            &Report::sidecar_path(p),
            serde_json::to_string_pretty(&side)?.as_bytes(),
        )?;
    }
    Ok(())
}
