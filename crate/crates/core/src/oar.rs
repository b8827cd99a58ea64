//! OAR domain types: objects, attributes, relations, and groups of pictures.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Track identifier of a foreground object.
pub type ObjectId = u32;

/// Sentinel object standing for the scene background. Reserved in every frame.
pub const BACKGROUND: ObjectId = 0;

/// Object category vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Car,
    Bus,
    Van,
    Others,
    Background,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Car,
        Category::Bus,
        Category::Van,
        Category::Others,
        Category::Background,
    ];

    /// Categories a foreground object may take.
    pub const FOREGROUND: [Category; 4] = [
        Category::Car,
        Category::Bus,
        Category::Van,
        Category::Others,
    ];

    pub const COUNT: usize = 5;

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Category> {
        Category::ALL.get(code as usize).copied()
    }

    /// Maps an annotation label onto the vocabulary. Anything unrecognised,
    /// including "background", becomes [`Category::Others`].
    pub fn from_label(label: &str) -> Category {
        match label.trim().to_ascii_lowercase().as_str() {
            "car" => Category::Car,
            "bus" => Category::Bus,
            "van" => Category::Van,
            _ => Category::Others,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Category::Car => "car",
            Category::Bus => "bus",
            Category::Van => "van",
            Category::Others => "others",
            Category::Background => "background",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Relation vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationLabel {
    Occlusion,
    In,
    Null,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 3] = [
        RelationLabel::Occlusion,
        RelationLabel::In,
        RelationLabel::Null,
    ];

    pub const COUNT: usize = 3;

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<RelationLabel> {
        RelationLabel::ALL.get(code as usize).copied()
    }
}

/// Pixel-grid attributes of one object.
///
/// The box covers the half-open pixel range `[x, x + w) × [y, y + h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attributes {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    /// Orientation in degrees, `[0, 360)`.
    pub angle: f64,
    pub category: Category,
}

impl Attributes {
    pub fn bbox(&self) -> BBox {
        BBox {
            x0: self.x as i64,
            y0: self.y as i64,
            x1: self.x as i64 + self.w as i64,
            y1: self.y as i64 + self.h as i64,
        }
    }

    /// Bottom edge `y + h`, the depth key: larger means closer to the camera.
    pub fn bottom(&self) -> u64 {
        self.y as u64 + self.h as u64
    }
}

/// Half-open integer rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BBox {
    pub fn from_xywh(x: i64, y: i64, w: i64, h: i64) -> BBox {
        BBox {
            x0: x,
            y0: y,
            x1: x + w,
            y1: y + h,
        }
    }

    pub fn width(&self) -> i64 {
        (self.x1 - self.x0).max(0)
    }

    pub fn height(&self) -> i64 {
        (self.y1 - self.y0).max(0)
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    pub fn intersect(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        }
    }

    pub fn intersection_area(&self, other: &BBox) -> i64 {
        self.intersect(other).area()
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Clips to the canvas `[0, width) × [0, height)`.
    pub fn clip(&self, width: u32, height: u32) -> BBox {
        self.intersect(&BBox {
            x0: 0,
            y0: 0,
            x1: width as i64,
            y1: height as i64,
        })
    }
}

/// Directed relation `subject --label--> object`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub subject: ObjectId,
    pub object: ObjectId,
    pub label: RelationLabel,
}

impl Relation {
    pub fn new(subject: ObjectId, object: ObjectId, label: RelationLabel) -> Relation {
        Relation {
            subject,
            object,
            label,
        }
    }
}

/// One frame's OAR tuple.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct OarFrame {
    pub frame_index: u32,
    pub objects: Vec<ObjectId>,
    pub attributes: BTreeMap<ObjectId, Attributes>,
    pub relations: BTreeSet<Relation>,
}

impl OarFrame {
    pub fn empty(frame_index: u32) -> OarFrame {
        OarFrame {
            frame_index,
            ..OarFrame::default()
        }
    }

    /// Appends an object; replaces its attributes if the ID is already present.
    pub fn push(&mut self, id: ObjectId, attrs: Attributes) {
        if self.attributes.insert(id, attrs).is_none() {
            self.objects.push(id);
        }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, id: ObjectId) -> Option<&Attributes> {
        self.attributes.get(&id)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.attributes.contains_key(&id)
    }

    /// Objects in the listed order, paired with their attributes.
    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, &Attributes)> + '_ {
        self.objects
            .iter()
            .map(move |id| (*id, &self.attributes[id]))
    }

    /// Object IDs sorted back to front: smaller bottom edge first; among equal
    /// bottoms the larger ID is painted first so the smaller ID ends in front.
    pub fn depth_order(&self) -> Vec<ObjectId> {
        let mut ids = self.objects.clone();
        ids.sort_by(|a, b| {
            let (pa, pb) = (&self.attributes[a], &self.attributes[b]);
            pa.bottom().cmp(&pb.bottom()).then(b.cmp(a))
        });
        ids
    }

    /// Checks every value-space and referential invariant against the canvas.
    pub fn validate(&self, width: u32, height: u32) -> Result<(), FrameViolation> {
        validate_frame(self, width, height)
    }
}

/// Returns `true` when `a` is in front of `b` under the bottom-edge depth rule
/// (ties broken by the smaller ID).
pub fn is_in_front(a: (ObjectId, &Attributes), b: (ObjectId, &Attributes)) -> bool {
    match a.1.bottom().cmp(&b.1.bottom()) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a.0 < b.0,
    }
}

/// First violated frame invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameViolation {
    #[error("frame index must be >= 1")]
    FrameIndex,
    #[error("object id 0 is reserved for the background")]
    ReservedId,
    #[error("duplicate object id {0}")]
    DuplicateObject(ObjectId),
    #[error("object {0} has no attributes")]
    MissingAttributes(ObjectId),
    #[error("attributes recorded for object {0} which is not listed")]
    OrphanAttributes(ObjectId),
    #[error("object {id}: {field} exceeds {bound} ({value} > {limit})")]
    ExceedsBound {
        id: ObjectId,
        field: &'static str,
        bound: &'static str,
        value: u32,
        limit: u32,
    },
    #[error("object {id}: {field} must be positive")]
    NonPositive { id: ObjectId, field: &'static str },
    #[error("object {id}: angle {angle} outside [0, 360)")]
    AngleRange { id: ObjectId, angle: f64 },
    #[error("object {id}: bounding box does not intersect the frame")]
    EmptyIntersection { id: ObjectId },
    #[error("object {id}: foreground object uses the background category")]
    BackgroundCategory { id: ObjectId },
    #[error("dangling relation endpoint {id} ({role})")]
    DanglingEndpoint { id: ObjectId, role: &'static str },
    #[error("relation {0} -> {0} points at itself")]
    SelfRelation(ObjectId),
}

impl FrameViolation {
    /// Object the violation concerns, if any.
    pub fn object(&self) -> Option<ObjectId> {
        use FrameViolation::*;
        match *self {
            FrameIndex | ReservedId => None,
            DuplicateObject(id)
            | MissingAttributes(id)
            | OrphanAttributes(id)
            | SelfRelation(id) => Some(id),
            ExceedsBound { id, .. }
            | NonPositive { id, .. }
            | AngleRange { id, .. }
            | EmptyIntersection { id }
            | BackgroundCategory { id }
            | DanglingEndpoint { id, .. } => Some(id),
        }
    }

    /// Offending field name.
    pub fn field(&self) -> &'static str {
        use FrameViolation::*;
        match self {
            FrameIndex => "frame_index",
            ReservedId | DuplicateObject(_) | MissingAttributes(_) | OrphanAttributes(_) => {
                "objects"
            }
            ExceedsBound { field, .. } | NonPositive { field, .. } => field,
            AngleRange { .. } => "angle",
            EmptyIntersection { .. } => "bbox",
            BackgroundCategory { .. } => "category",
            DanglingEndpoint { role, .. } => role,
            SelfRelation(_) => "relations",
        }
    }
}

/// Validates one frame against a `width × height` canvas.
pub fn validate_frame(frame: &OarFrame, width: u32, height: u32) -> Result<(), FrameViolation> {
    if frame.frame_index < 1 {
        return Err(FrameViolation::FrameIndex);
    }
    let mut seen = HashSet::with_capacity(frame.objects.len());
    for &id in &frame.objects {
        if id == BACKGROUND {
            return Err(FrameViolation::ReservedId);
        }
        if !seen.insert(id) {
            return Err(FrameViolation::DuplicateObject(id));
        }
        let a = frame
            .attributes
            .get(&id)
            .ok_or(FrameViolation::MissingAttributes(id))?;
        validate_attributes(id, a, width, height)?;
    }
    if let Some(id) = frame.attributes.keys().find(|id| !seen.contains(id)) {
        return Err(FrameViolation::OrphanAttributes(*id));
    }
    for r in &frame.relations {
        if r.subject == r.object {
            return Err(FrameViolation::SelfRelation(r.subject));
        }
        if r.subject != BACKGROUND && !seen.contains(&r.subject) {
            return Err(FrameViolation::DanglingEndpoint {
                id: r.subject,
                role: "subject",
            });
        }
        if r.object != BACKGROUND && !seen.contains(&r.object) {
            return Err(FrameViolation::DanglingEndpoint {
                id: r.object,
                role: "object",
            });
        }
    }
    Ok(())
}

fn validate_attributes(
    id: ObjectId,
    a: &Attributes,
    width: u32,
    height: u32,
) -> Result<(), FrameViolation> {
    let bound = |field, bound, value, limit| FrameViolation::ExceedsBound {
        id,
        field,
        bound,
        value,
        limit,
    };
    if a.x > width {
        return Err(bound("x", "W", a.x, width));
    }
    if a.y > height {
        return Err(bound("y", "H", a.y, height));
    }
    if a.w == 0 {
        return Err(FrameViolation::NonPositive { id, field: "w" });
    }
    if a.h == 0 {
        return Err(FrameViolation::NonPositive { id, field: "h" });
    }
    if a.w > width {
        return Err(bound("w", "W", a.w, width));
    }
    if a.h > height {
        return Err(bound("h", "H", a.h, height));
    }
    if !(a.angle >= 0.0 && a.angle < 360.0) {
        return Err(FrameViolation::AngleRange { id, angle: a.angle });
    }
    if a.bbox().clip(width, height).is_empty() {
        return Err(FrameViolation::EmptyIntersection { id });
    }
    if a.category == Category::Background {
        return Err(FrameViolation::BackgroundCategory { id });
    }
    Ok(())
}

/// Group of pictures: `T` OAR frames sharing one coded reference frame.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct GopStream {
    pub width: u32,
    pub height: u32,
    pub gop_length: u32,
    pub frames: Vec<OarFrame>,
    /// Coded reference frame bytes. Not part of the OAR bitstream.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_payload: Vec<u8>,
}

/// Structural problem with a [`GopStream`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GopViolation {
    #[error("canvas must be non-empty, got {0}x{1}")]
    EmptyCanvas(u32, u32),
    #[error("expected {expected} frames, found {found}")]
    FrameCount { expected: u32, found: usize },
    #[error("frame at position {position} carries index {index}")]
    FrameIndex { position: usize, index: u32 },
    #[error("frame {frame}: {source}")]
    Frame {
        frame: u32,
        #[source]
        source: FrameViolation,
    },
}

impl GopStream {
    pub fn new(width: u32, height: u32, frames: Vec<OarFrame>) -> GopStream {
        GopStream {
            width,
            height,
            gop_length: frames.len() as u32,
            frames,
            reference_payload: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), GopViolation> {
        if self.width == 0 || self.height == 0 {
            return Err(GopViolation::EmptyCanvas(self.width, self.height));
        }
        if self.frames.len() != self.gop_length as usize {
            return Err(GopViolation::FrameCount {
                expected: self.gop_length,
                found: self.frames.len(),
            });
        }
        for (pos, f) in self.frames.iter().enumerate() {
            if f.frame_index as usize != pos + 1 {
                return Err(GopViolation::FrameIndex {
                    position: pos,
                    index: f.frame_index,
                });
            }
            f.validate(self.width, self.height)
                .map_err(|source| GopViolation::Frame {
                    frame: f.frame_index,
                    source,
                })?;
        }
        Ok(())
    }

    /// Source symbol count `W · H · 3` of one frame.
    pub fn frame_source_symbols(&self) -> u64 {
        self.width as u64 * self.height as u64 * 3
    }
}
