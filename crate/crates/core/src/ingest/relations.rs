use std::collections::BTreeSet;

use super::ForegroundMask;
use crate::oar::{is_in_front, OarFrame, Relation, RelationLabel, BACKGROUND};

/// Geometric relation identification.
///
/// Every overlapping object pair yields one occlusion relation pointing from
/// the front object to the back one (front = larger bottom edge, ties to the
/// smaller ID). Objects touching a forefront mask rectangle are occluded by the
/// background, and every object is `in` the background.
pub fn identify_relations(frame: &OarFrame, mask: &ForegroundMask) -> BTreeSet<Relation> {
    let mut ids = frame.objects.clone();
    ids.sort_unstable();
    let mut out = BTreeSet::new();
    for (i, &a) in ids.iter().enumerate() {
        let pa = &frame.attributes[&a];
        let ba = pa.bbox();
        for &b in &ids[i + 1..] {
            let pb = &frame.attributes[&b];
            if ba.intersection_area(&pb.bbox()) > 0 {
                let (front, back) = if is_in_front((a, pa), (b, pb)) {
                    (a, b)
                } else {
                    (b, a)
                };
                out.insert(Relation::new(front, back, RelationLabel::Occlusion));
            }
        }
        if mask
            .rects
            .iter()
            .any(|r| r.bbox().intersection_area(&ba) > 0)
        {
            out.insert(Relation::new(BACKGROUND, a, RelationLabel::Occlusion));
        }
        out.insert(Relation::new(a, BACKGROUND, RelationLabel::In));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Rect;
    use crate::oar::{Attributes, Category};

    fn frame(boxes: &[(u32, u32, u32, u32, u32)]) -> OarFrame {
        let mut f = OarFrame::empty(1);
        for &(id, x, y, w, h) in boxes {
            f.push(
                id,
                Attributes {
                    x,
                    y,
                    w,
                    h,
                    angle: 0.0,
                    category: Category::Car,
                },
            );
        }
        f
    }

    fn rel(s: u32, o: u32, l: RelationLabel) -> Relation {
        Relation::new(s, o, l)
    }

    #[test]
    fn disjoint_boxes_only_in() {
        let f = frame(&[(1, 0, 0, 10, 10), (2, 20, 20, 10, 10)]);
        let r = identify_relations(&f, &ForegroundMask::default());
        let want: BTreeSet<_> = [
            rel(1, BACKGROUND, RelationLabel::In),
            rel(2, BACKGROUND, RelationLabel::In),
        ]
        .into();
        assert_eq!(r, want);
    }

    #[test]
    fn touching_edges_do_not_overlap() {
        let f = frame(&[(1, 0, 0, 10, 10), (2, 10, 0, 10, 10)]);
        assert_eq!(identify_relations(&f, &ForegroundMask::default()).len(), 2);
    }

    #[test]
    fn lower_bottom_edge_is_in_front() {
        // A: bottom 300, B: bottom 250, overlapping.
        let f = frame(&[(1, 100, 200, 100, 100), (2, 150, 150, 100, 100)]);
        let r = identify_relations(&f, &ForegroundMask::default());
        let want: BTreeSet<_> = [
            rel(1, 2, RelationLabel::Occlusion),
            rel(1, BACKGROUND, RelationLabel::In),
            rel(2, BACKGROUND, RelationLabel::In),
        ]
        .into();
        assert_eq!(r, want);
    }

    #[test]
    fn tie_goes_to_smaller_id() {
        let f = frame(&[(7, 0, 0, 10, 10), (3, 5, 0, 10, 10)]);
        let r = identify_relations(&f, &ForegroundMask::default());
        assert!(r.contains(&rel(3, 7, RelationLabel::Occlusion)));
        assert!(!r.contains(&rel(7, 3, RelationLabel::Occlusion)));
    }

    #[test]
    fn mask_overlap_is_background_occlusion() {
        let f = frame(&[(4, 0, 0, 10, 10)]);
        let mask = ForegroundMask {
            rects: vec![Rect {
                x: 5,
                y: 5,
                w: 20,
                h: 20,
            }],
        };
        let r = identify_relations(&f, &mask);
        let want: BTreeSet<_> = [
            rel(BACKGROUND, 4, RelationLabel::Occlusion),
            rel(4, BACKGROUND, RelationLabel::In),
        ]
        .into();
        assert_eq!(r, want);
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let a = frame(&[(1, 0, 0, 30, 30), (2, 10, 10, 30, 30), (3, 20, 5, 30, 40)]);
        let b = frame(&[(3, 20, 5, 30, 40), (1, 0, 0, 30, 30), (2, 10, 10, 30, 30)]);
        let m = ForegroundMask::default();
        let ra = identify_relations(&a, &m);
        assert_eq!(ra, identify_relations(&b, &m));
        for r in &ra {
            if r.label == RelationLabel::Occlusion {
                assert!(!ra.contains(&rel(r.object, r.subject, RelationLabel::Occlusion)));
            }
        }
    }
}
