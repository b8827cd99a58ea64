use super::gcn::ObjectFeature;
use super::GraphError;
use crate::oar::{Attributes, OarFrame};
use crate::Scalar;

/// `H × W × D` feature map, row-major with the feature axis innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout<T> {
    pub height: usize,
    pub width: usize,
    pub depth: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Layout<T> {
    pub fn zeros(height: usize, width: usize, depth: usize) -> Layout<T> {
        Layout {
            height,
            width,
            depth,
            data: vec![T::zero(); height * width * depth],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &[T] {
        let o = (i * self.width + j) * self.depth;
        &self.data[o..o + self.depth]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut [T] {
        let o = (i * self.width + j) * self.depth;
        &mut self.data[o..o + self.depth]
    }

    pub fn is_zero_at(&self, i: usize, j: usize) -> bool {
        self.at(i, j).iter().all(|v| v.is_zero())
    }
}

/// Cells `(rows, cols)` covered by a box on a grid downscaled by `factor`.
/// Both ends are inclusive, `y ≤ i ≤ y + h` and `x ≤ j ≤ x + w`, clipped
/// to the grid.
pub fn layout_cover(
    a: &Attributes,
    height: usize,
    width: usize,
    factor: usize,
) -> Option<(
    std::ops::RangeInclusive<usize>,
    std::ops::RangeInclusive<usize>,
)> {
    let rows = height.div_ceil(factor);
    let cols = width.div_ceil(factor);
    if rows == 0 || cols == 0 {
        return None;
    }
    let i0 = a.y as usize / factor;
    let j0 = a.x as usize / factor;
    if i0 >= rows || j0 >= cols {
        return None;
    }
    let i1 = ((a.y + a.h) as usize / factor).min(rows - 1);
    let j1 = ((a.x + a.w) as usize / factor).min(cols - 1);
    Some((i0..=i1, j0..=j1))
}

/// Expands each foreground feature over its box and sums the per-object maps.
pub fn build_layout<T: Scalar>(
    features: &[ObjectFeature<T>],
    frame: &OarFrame,
    height: usize,
    width: usize,
) -> Result<Layout<T>, GraphError> {
    build_layout_scaled(features, frame, height, width, 1)
}

pub fn build_layout_scaled<T: Scalar>(
    features: &[ObjectFeature<T>],
    frame: &OarFrame,
    height: usize,
    width: usize,
    factor: usize,
) -> Result<Layout<T>, GraphError> {
    if factor == 0 {
        return Err(GraphError::Config(
            "layout downscale factor must be positive".into(),
        ));
    }
    if features.len() != frame.len() {
        return Err(GraphError::Config(format!(
            "{} features for {} objects",
            features.len(),
            frame.len()
        )));
    }
    let depth = features.first().map_or(0, |f| f.dim());
    if features.iter().any(|f| f.dim() != depth) {
        return Err(GraphError::Config("features differ in dimension".into()));
    }
    let mut layout = Layout::zeros(height.div_ceil(factor), width.div_ceil(factor), depth);
    for ((_, a), f) in frame.iter().zip(features) {
        let Some((rows, cols)) = layout_cover(a, height, width, factor) else {
            continue;
        };
        for i in rows {
            for j in cols.clone() {
                for (l, &v) in layout.at_mut(i, j).iter_mut().zip(&f.values) {
                    *l = *l + v;
                }
            }
        }
    }
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oar::Category;

    fn obj(x: u32, y: u32, w: u32, h: u32) -> Attributes {
        Attributes {
            x,
            y,
            w,
            h,
            angle: 0.0,
            category: Category::Car,
        }
    }

    #[test]
    fn empty_frame_is_zero() {
        let l = build_layout::<f32>(&[], &OarFrame::empty(1), 4, 5).unwrap();
        assert_eq!(l.data.len(), 0);
        assert_eq!((l.height, l.width), (4, 5));
    }

    #[test]
    fn single_and_overlap() {
        let mut f = OarFrame::empty(1);
        f.push(1, obj(1, 1, 2, 2));
        f.push(2, obj(3, 3, 3, 1));
        let fa = ObjectFeature::new(vec![1.0f64, 2.0]);
        let fb = ObjectFeature::new(vec![10.0, 20.0]);
        let l = build_layout(&[fa, fb], &f, 6, 6).unwrap();
        assert_eq!(l.at(1, 1), &[1.0, 2.0]);
        // inclusive far corner of box 1 is shared with box 2's top-left
        assert_eq!(l.at(3, 3), &[11.0, 22.0]);
        assert_eq!(l.at(4, 5), &[10.0, 20.0]);
        assert!(l.is_zero_at(0, 0));
        assert!(l.is_zero_at(5, 5));
        assert!(l.is_zero_at(1, 4));
    }

    #[test]
    fn clipped_at_border_and_downscaled() {
        let mut f = OarFrame::empty(1);
        f.push(1, obj(4, 4, 4, 4));
        let feat = [ObjectFeature::new(vec![1.0f32])];
        let l = build_layout(&feat, &f, 8, 8).unwrap();
        assert_eq!(l.at(7, 7), &[1.0]);
        let l = build_layout_scaled(&feat, &f, 8, 8, 4).unwrap();
        assert_eq!((l.height, l.width), (2, 2));
        assert_eq!(l.at(1, 1), &[1.0]);
        assert!(l.is_zero_at(0, 1));
    }

    #[test]
    fn feature_count_must_match() {
        let mut f = OarFrame::empty(1);
        f.push(1, obj(0, 0, 1, 1));
        assert!(build_layout::<f64>(&[], &f, 4, 4).is_err());
    }
}
