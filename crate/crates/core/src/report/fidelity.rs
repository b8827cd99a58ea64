use serde::Serialize;

use crate::oar::GopStream;

/// Semantic agreement between a sent and a received OAR group of pictures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OarFidelity {
    /// Mean IoU over ID-matched objects.
    pub box_iou: f64,
    pub category_accuracy: f64,
    /// Mean circular angle error of matched objects, degrees.
    pub angle_mae: f64,
    /// Relation F1, pooled over frames.
    pub relation_f1: f64,
    /// Fraction of sent objects found by ID in the received stream.
    pub matched: f64,
}

fn angle_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Scores a received stream against the sent one. A lost stream, or one of a
/// different shape, scores zero everywhere.
pub fn metric_oar_fidelity(sent: &GopStream, received: Option<&GopStream>) -> OarFidelity {
    let Some(rx) = received else {
        return OarFidelity::default();
    };
    if (rx.width, rx.height, rx.frames.len()) != (sent.width, sent.height, sent.frames.len()) {
        return OarFidelity::default();
    }
    let (mut iou, mut correct, mut angle, mut matched, mut objects) =
        (0.0, 0usize, 0.0, 0usize, 0usize);
    let (mut common, mut sent_rel, mut rx_rel) = (0usize, 0usize, 0usize);
    for (s, r) in sent.frames.iter().zip(&rx.frames) {
        for (id, a) in s.iter() {
            objects += 1;
            if let Some(b) = r.get(id) {
                matched += 1;
                iou += a.bbox().iou(&b.bbox());
                correct += (a.category == b.category) as usize;
                angle += angle_error(a.angle, b.angle);
            }
        }
        common += s.relations.intersection(&r.relations).count();
        sent_rel += s.relations.len();
        rx_rel += r.relations.len();
    }
    let mean = |v: f64| {
        if matched == 0 {
            1.0
        } else {
            v / matched as f64
        }
    };
    OarFidelity {
        box_iou: mean(iou),
        category_accuracy: mean(correct as f64),
        angle_mae: if matched == 0 {
            0.0
        } else {
            angle / matched as f64
        },
        relation_f1: if sent_rel + rx_rel == 0 {
            1.0
        } else {
            2.0 * common as f64 / (sent_rel + rx_rel) as f64
        },
        matched: if objects == 0 {
            1.0
        } else {
            matched as f64 / objects as f64
        },
    }
}
