use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::oar::{BBox, Category, ObjectId};

/// One annotated box of one object in one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackRecord {
    pub frame_index: u32,
    pub id: ObjectId,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub angle: Option<f64>,
    pub category: Category,
}

/// Axis-aligned pixel rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn bbox(&self) -> BBox {
        BBox::from_xywh(self.x as i64, self.y as i64, self.w as i64, self.h as i64)
    }
}

/// Background regions at the spatial forefront of a scene. Objects overlapping
/// one of them are occluded by the background.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForegroundMask {
    pub rects: Vec<Rect>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackFormat {
    Jsonl,
    DetracXml,
}

impl FromStr for TrackFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(TrackFormat::Jsonl),
            "detrac" | "detrac_xml" | "xml" => Ok(TrackFormat::DetracXml),
            other => Err(format!("unknown track format {other:?}")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTrack {
    frame: u32,
    id: u32,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default)]
    cat: Option<String>,
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Reads a track file; records come back sorted by `(frame, id)`.
pub fn parse_tracks(path: &Path, format: TrackFormat) -> Result<Vec<TrackRecord>, IngestError> {
    parse_tracks_str(&read(path)?, format)
}

pub fn parse_tracks_str(text: &str, format: TrackFormat) -> Result<Vec<TrackRecord>, IngestError> {
    let mut records = match format {
        TrackFormat::Jsonl => parse_jsonl(text)?,
        TrackFormat::DetracXml => parse_detrac(text)?,
    };
    records.sort_by_key(|r| (r.frame_index, r.id));
    Ok(records)
}

fn check_record(r: &TrackRecord) -> Result<(), String> {
    if r.frame_index < 1 {
        return Err("frame index must be >= 1".into());
    }
    if r.id == 0 {
        return Err("object id 0 is reserved for the background".into());
    }
    for (name, v) in [("x", r.x), ("y", r.y), ("w", r.w), ("h", r.h)] {
        if !v.is_finite() {
            return Err(format!("{name} is not finite"));
        }
    }
    if r.w <= 0.0 || r.h <= 0.0 {
        return Err("box size must be positive".into());
    }
    if let Some(a) = r.angle {
        if !a.is_finite() {
            return Err("angle is not finite".into());
        }
    }
    Ok(())
}

fn parse_jsonl(text: &str) -> Result<Vec<TrackRecord>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| IngestError::Line {
            line: line_no,
            message,
        };
        let t: JsonTrack = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let rec = TrackRecord {
            frame_index: t.frame,
            id: t.id,
            x: t.x,
            y: t.y,
            w: t.w,
            h: t.h,
            angle: t.angle,
            category: Category::from_label(t.cat.as_deref().unwrap_or("others")),
        };
        check_record(&rec).map_err(err)?;
        out.push(rec);
    }
    Ok(out)
}

fn parse_detrac(text: &str) -> Result<Vec<TrackRecord>, IngestError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| IngestError::Xml {
        locus: "document".into(),
        message: e.to_string(),
    })?;
    let mut out = Vec::new();
    for frame in doc.descendants().filter(|n| n.has_tag_name("frame")) {
        let locus = |node: roxmltree::Node| {
            let pos = doc.text_pos_at(node.range().start);
            format!("<{}> at {}:{}", node.tag_name().name(), pos.row, pos.col)
        };
        let num: u32 = attr(frame, "num").ok_or_else(|| IngestError::Xml {
            locus: locus(frame),
            message: "missing or bad num".into(),
        })?;
        for target in frame.descendants().filter(|n| n.has_tag_name("target")) {
            let bad = |message: &str| IngestError::Xml {
                locus: locus(target),
                message: message.into(),
            };
            let id: u32 = attr(target, "id").ok_or_else(|| bad("missing or bad id"))?;
            let b = target
                .children()
                .find(|n| n.has_tag_name("box"))
                .ok_or_else(|| bad("missing <box>"))?;
            let get = |name| attr::<f64>(b, name).ok_or_else(|| bad("bad <box> geometry"));
            let attribute = target.children().find(|n| n.has_tag_name("attribute"));
            let rec = TrackRecord {
                frame_index: num,
                id,
                x: get("left")?,
                y: get("top")?,
                w: get("width")?,
                h: get("height")?,
                angle: attribute.and_then(|a| attr(a, "orientation")),
                category: Category::from_label(
                    attribute
                        .and_then(|a| a.attribute("vehicle_type"))
                        .unwrap_or("others"),
                ),
            };
            check_record(&rec).map_err(|m| bad(&m))?;
            out.push(rec);
        }
    }
    Ok(out)
}

fn attr<T: FromStr>(node: roxmltree::Node, name: &str) -> Option<T> {
    node.attribute(name)?.trim().parse().ok()
}

/// Writes records in the canonical jsonl interchange format.
pub fn write_tracks_jsonl<W: Write>(records: &[TrackRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        let t = JsonTrack {
            frame: r.frame_index,
            id: r.id,
            x: r.x,
            y: r.y,
            w: r.w,
            h: r.h,
            angle: r.angle,
            cat: Some(r.category.label().to_string()),
        };
        serde_json::to_writer(&mut out, &t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Mask file: one `{"x":..,"y":..,"w":..,"h":..}` rectangle per line.
pub fn parse_mask(path: &Path) -> Result<ForegroundMask, IngestError> {
    parse_mask_str(&read(path)?)
}

pub fn parse_mask_str(text: &str) -> Result<ForegroundMask, IngestError> {
    let mut rects = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: Rect = serde_json::from_str(line).map_err(|e| IngestError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        rects.push(r);
    }
    Ok(ForegroundMask { rects })
}
