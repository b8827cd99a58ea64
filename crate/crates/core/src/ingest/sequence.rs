use std::collections::{BTreeMap, HashMap, HashSet};

use super::{identify_relations, ForegroundMask, IngestError, TrackRecord};
use crate::oar::{Attributes, BBox, GopStream, OarFrame, ObjectId};

#[inline]
fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

fn normalize_degrees(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    // rem_euclid may return exactly 360.0 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

#[derive(Default)]
struct Heading {
    center: Option<(f64, f64)>,
    angle: Option<f64>,
}

impl Heading {
    /// Annotated angle if present, else the displacement direction when the
    /// object moved at least one pixel, else the previous angle, else 0.
    fn next(&mut self, rec: &TrackRecord) -> f64 {
        let center = (rec.x + rec.w / 2.0, rec.y + rec.h / 2.0);
        let angle = match (rec.angle, self.center) {
            (Some(a), _) => normalize_degrees(a),
            (None, Some((px, py))) => {
                let (dx, dy) = (center.0 - px, center.1 - py);
                if dx.hypot(dy) >= 1.0 {
                    normalize_degrees(dy.atan2(dx).to_degrees().round())
                } else {
                    self.angle.unwrap_or(0.0)
                }
            }
            (None, None) => self.angle.unwrap_or(0.0),
        };
        self.center = Some(center);
        self.angle = Some(angle);
        angle
    }
}

/// Groups annotation records into consecutive groups of pictures.
///
/// Frames span the first to the last annotated frame index; a trailing
/// partial group is dropped. Box coordinates are rounded half-up and clipped
/// to the canvas; boxes left empty by clipping are dropped.
pub fn build_oar_sequence(
    records: &[TrackRecord],
    mask: &ForegroundMask,
    width: u32,
    height: u32,
    gop_length: u32,
) -> Result<Vec<GopStream>, IngestError> {
    if gop_length < 2 {
        return Err(IngestError::GopLength(gop_length));
    }
    if width == 0 || height == 0 || width > u16::MAX as u32 || height > u16::MAX as u32 {
        return Err(IngestError::Scene(format!(
            "canvas {width}x{height} unsupported"
        )));
    }
    let canvas = BBox::from_xywh(0, 0, width as i64, height as i64);
    for r in &mask.rects {
        let b = r.bbox();
        if b.is_empty() || b.intersect(&canvas) != b {
            return Err(IngestError::MaskOutside(*r, width, height));
        }
    }

    let mut sorted: Vec<&TrackRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.frame_index, r.id));
    let mut seen = HashSet::new();
    for r in &sorted {
        if !seen.insert((r.frame_index, r.id)) {
            return Err(IngestError::DuplicateRecord {
                frame: r.frame_index,
                id: r.id,
            });
        }
    }
    let (Some(first), Some(last)) = (sorted.first(), sorted.last()) else {
        return Ok(Vec::new());
    };
    let (first, last) = (first.frame_index, last.frame_index);

    let mut by_frame: BTreeMap<u32, OarFrame> = (first..=last)
        .map(|f| (f, OarFrame::empty(f - first + 1)))
        .collect();
    let mut headings: HashMap<ObjectId, Heading> = HashMap::new();
    for r in sorted {
        let angle = headings.entry(r.id).or_default().next(r);
        let x0 = round_half_up(r.x);
        let y0 = round_half_up(r.y);
        let b = BBox {
            x0,
            y0,
            x1: x0 + round_half_up(r.w),
            y1: y0 + round_half_up(r.h),
        }
        .intersect(&canvas);
        if b.is_empty() {
            continue;
        }
        let frame = by_frame
            .get_mut(&r.frame_index)
            .expect("frame range covers records");
        frame.push(
            r.id,
            Attributes {
                x: b.x0 as u32,
                y: b.y0 as u32,
                w: b.width() as u32,
                h: b.height() as u32,
                angle,
                category: r.category,
            },
        );
    }

    let frames: Vec<OarFrame> = by_frame.into_values().collect();
    let gops = frames
        .chunks_exact(gop_length as usize)
        .map(|chunk| {
            let frames = chunk
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let mut f = f.clone();
                    f.frame_index = i as u32 + 1;
                    f.relations = identify_relations(&f, mask);
                    f
                })
                .collect();
            GopStream::new(width, height, frames)
        })
        .collect();
    Ok(gops)
}
