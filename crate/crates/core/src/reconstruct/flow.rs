use crate::oar::{Attributes, OarFrame, ObjectId};

/// Backward displacement per pixel: pixel `p` of the current frame comes from
/// `p + flow(p)` in the previous one. Row-major `(dx, dy)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    pub width: u32,
    pub height: u32,
    pub data: Vec<[f64; 2]>,
}

impl FlowField {
    pub fn zeros(width: u32, height: u32) -> FlowField {
        FlowField {
            width,
            height,
            data: vec![[0.0; 2]; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [f64; 2] {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    fn set(&mut self, x: u32, y: u32, v: [f64; 2]) {
        let w = self.width as usize;
        self.data[y as usize * w + x as usize] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v[0] == 0.0 && v[1] == 0.0)
    }
}

/// Affine map of one object's box onto an earlier box of the same object:
/// translate between centres, undo the rotation, rescale by the size ratio.
/// Points are continuous, pixel `(x, y)` having its centre at `(x + ½, y + ½)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxMap {
    to_center: [f64; 2],
    from_center: [f64; 2],
    scale: [f64; 2],
    cos: f64,
    sin: f64,
}

fn center(a: &Attributes) -> [f64; 2] {
    [a.x as f64 + a.w as f64 / 2.0, a.y as f64 + a.h as f64 / 2.0]
}

impl BoxMap {
    /// Map from the box `from` (current frame) onto `to` (earlier frame).
    pub fn new(from: &Attributes, to: &Attributes) -> BoxMap {
        let delta = (from.angle - to.angle).to_radians();
        BoxMap {
            to_center: center(to),
            from_center: center(from),
            scale: [to.w as f64 / from.w as f64, to.h as f64 / from.h as f64],
            cos: delta.cos(),
            sin: delta.sin(),
        }
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.to_center == self.from_center && self.scale == [1.0, 1.0] && self.sin == 0.0
    }

    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let u = [p[0] - self.from_center[0], p[1] - self.from_center[1]];
        let (u, v) = if self.sin == 0.0 && self.cos == 1.0 {
            (u[0], u[1])
        } else {
            // rotate by -delta
            (
                self.cos * u[0] + self.sin * u[1],
                -self.sin * u[0] + self.cos * u[1],
            )
        };
        [
            self.to_center[0] + self.scale[0] * u,
            self.to_center[1] + self.scale[1] * v,
        ]
    }

    /// Map for the centre of pixel `(x, y)`.
    #[inline]
    pub fn apply_pixel(&self, x: u32, y: u32) -> [f64; 2] {
        if self.is_identity() {
            return [x as f64 + 0.5, y as f64 + 0.5];
        }
        self.apply([x as f64 + 0.5, y as f64 + 0.5])
    }
}

/// Front-most object per pixel under the depth rule; `None` is background.
pub fn owner_map(frame: &OarFrame, width: u32, height: u32) -> Vec<Option<ObjectId>> {
    let mut owners = vec![None; width as usize * height as usize];
    for id in frame.depth_order() {
        let b = frame.attributes[&id].bbox().clip(width, height);
        for y in b.y0..b.y1 {
            let row = y as usize * width as usize;
            for o in &mut owners[row + b.x0 as usize..row + b.x1 as usize] {
                *o = Some(id);
            }
        }
    }
    owners
}

fn maps<'a>(prev: &'a OarFrame, curr: &'a OarFrame) -> impl Fn(ObjectId) -> Option<BoxMap> + 'a {
    move |id| {
        let a = &curr.attributes[&id];
        prev.get(id)
            .filter(|p| p.category == a.category)
            .map(|p| BoxMap::new(a, p))
    }
}

pub fn flow_from_oar(prev: &OarFrame, curr: &OarFrame, width: u32, height: u32) -> FlowField {
    flow_and_holes(prev, curr, width, height).0
}

/// Flow plus the pixels that have no valid backward correspondence: births,
/// disoccluded background, and object points that land outside their earlier
/// box or behind another object there.
pub fn flow_and_holes(
    prev: &OarFrame,
    curr: &OarFrame,
    width: u32,
    height: u32,
) -> (FlowField, Vec<bool>) {
    let mut flow = FlowField::zeros(width, height);
    let mut holes = vec![false; width as usize * height as usize];
    let before = owner_map(prev, width, height);
    let now = owner_map(curr, width, height);
    let map_of = maps(prev, curr);
    let cache: std::collections::HashMap<ObjectId, Option<BoxMap>> =
        curr.objects.iter().map(|&id| (id, map_of(id))).collect();
    for y in 0..height {
        for x in 0..width {
            let i = y as usize * width as usize + x as usize;
            match now[i] {
                None => holes[i] = before[i].is_some(),
                Some(id) => match cache[&id] {
                    None => holes[i] = true,
                    Some(m) => {
                        let q = m.apply_pixel(x, y);
                        flow.set(x, y, [q[0] - (x as f64 + 0.5), q[1] - (y as f64 + 0.5)]);
                        let pb = prev.attributes[&id].bbox();
                        let (qx, qy) = (q[0].floor(), q[1].floor());
                        let inside = qx >= pb.x0 as f64
                            && qx < pb.x1 as f64
                            && qy >= pb.y0 as f64
                            && qy < pb.y1 as f64
                            && qx >= 0.0
                            && qy >= 0.0
                            && qx < width as f64
                            && qy < height as f64;
                        holes[i] = !inside
                            || before[qy as usize * width as usize + qx as usize] != Some(id);
                    }
                },
            }
        }
    }
    (flow, holes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oar::Category;

    fn frame(objs: &[(ObjectId, u32, u32, u32, u32, f64)]) -> OarFrame {
        let mut f = OarFrame::empty(1);
        for &(id, x, y, w, h, angle) in objs {
            f.push(
                id,
                Attributes {
                    x,
                    y,
                    w,
                    h,
                    angle,
                    category: Category::Car,
                },
            );
        }
        f
    }

    #[test]
    fn identical_frames_zero_flow() {
        let f = frame(&[(1, 2, 2, 5, 5, 30.0), (2, 4, 4, 3, 3, 0.0)]);
        let (flow, holes) = flow_and_holes(&f, &f, 16, 16);
        assert!(flow.is_zero());
        assert!(holes.iter().all(|h| !h));
    }

    #[test]
    fn translation_sign() {
        let a = frame(&[(1, 2, 3, 4, 4, 0.0)]);
        let b = frame(&[(1, 4, 3, 4, 4, 0.0)]);
        let (flow, holes) = flow_and_holes(&a, &b, 16, 16);
        for y in 3..7 {
            for x in 4..8 {
                assert_eq!(flow.get(x, y), [-2.0, 0.0]);
                assert!(!holes[(y * 16 + x) as usize]);
            }
        }
        assert_eq!(flow.get(3, 3), [0.0, 0.0]);
        // uncovered strip behind the object
        assert!(holes[(3 * 16 + 2) as usize] && holes[(3 * 16 + 3) as usize]);
        assert!(!holes[(3 * 16 + 8) as usize]);
    }

    #[test]
    fn birth_has_zero_flow_and_holes() {
        let a = frame(&[]);
        let b = frame(&[(5, 1, 1, 3, 2, 0.0)]);
        let (flow, holes) = flow_and_holes(&a, &b, 8, 8);
        assert!(flow.is_zero());
        assert_eq!(holes.iter().filter(|h| **h).count(), 6);
    }

    #[test]
    fn scale_and_rotation_map_centres() {
        let from = Attributes {
            x: 10,
            y: 10,
            w: 20,
            h: 10,
            angle: 90.0,
            category: Category::Bus,
        };
        let to = Attributes {
            x: 0,
            y: 0,
            w: 10,
            h: 10,
            angle: 0.0,
            ..from
        };
        let m = BoxMap::new(&from, &to);
        assert_eq!(m.apply([20.0, 15.0]), [5.0, 5.0]);
        // heading direction of the current box maps onto the earlier heading
        let q = m.apply([20.0, 16.0]);
        assert!(
            (q[0] - 5.5).abs() < 1e-12 && (q[1] - 5.0).abs() < 1e-12,
            "{q:?}"
        );
    }

    #[test]
    fn occluded_source_is_a_hole() {
        // object 1 was hidden behind object 2 at its old spot
        let a = frame(&[(1, 0, 0, 4, 4, 0.0), (2, 0, 0, 4, 6, 0.0)]);
        let b = frame(&[(1, 8, 0, 4, 4, 0.0), (2, 0, 0, 4, 6, 0.0)]);
        let (_, holes) = flow_and_holes(&a, &b, 16, 8);
        assert!(holes[8]);
    }

    #[test]
    fn owners_follow_depth() {
        let f = frame(&[(1, 0, 0, 4, 4, 0.0), (2, 2, 0, 4, 2, 0.0)]);
        let o = owner_map(&f, 8, 4);
        assert_eq!(o[2], Some(1));
        assert_eq!(o[5], Some(2));
        assert_eq!(o[7], None);
    }
}
