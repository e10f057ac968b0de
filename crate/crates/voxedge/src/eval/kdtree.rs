//! Exact nearest-neighbor search over 3D points.
//!
//! A kd-tree with cycling split axes, stored as a flat array where every
//! subtree occupies a contiguous range and its root sits at the range
//! midpoint. Queries are exact: pruning uses the true axis-distance bound, so
//! results match a full scan (same distances, computed by the same formula).

/// Squared Euclidean distance, summed in fixed axis order.
#[inline]
pub(crate) fn dist_sq(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub struct KdTree {
    /// Points rearranged so that for any subtree range the median element
    /// (by the range's split axis) sits at the midpoint.
    pts: Vec<[f64; 3]>,
}

impl KdTree {
    /// Build from a non-empty point set.
    pub fn build(points: &[[f64; 3]]) -> Self {
        assert!(!points.is_empty(), "kd-tree needs at least one point");
        let mut pts = points.to_vec();
        build_range(&mut pts, 0);
        Self { pts }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Distance from `query` to its nearest stored point.
    pub fn nearest_distance(&self, query: [f64; 3]) -> f64 {
        let mut best = f64::INFINITY;
        nearest_in(&self.pts, 0, query, &mut best);
        best.sqrt()
    }
}

fn build_range(pts: &mut [[f64; 3]], depth: usize) {
    if pts.len() <= 1 {
        return;
    }
    let axis = depth % 3;
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    let (left, right) = pts.split_at_mut(mid);
    build_range(left, depth + 1);
    build_range(&mut right[1..], depth + 1);
}

fn nearest_in(pts: &[[f64; 3]], depth: usize, query: [f64; 3], best: &mut f64) {
    if pts.is_empty() {
        return;
    }
    let mid = pts.len() / 2;
    let node = pts[mid];
    let d = dist_sq(query, node);
    if d < *best {
        *best = d;
    }
    if pts.len() == 1 {
        return;
    }
    let axis = depth % 3;
    let delta = query[axis] - node[axis];
    let (near, far) = if delta < 0.0 {
        (&pts[..mid], &pts[mid + 1..])
    } else {
        (&pts[mid + 1..], &pts[..mid])
    };
    nearest_in(near, depth + 1, query, best);
    if delta * delta < *best {
        nearest_in(far, depth + 1, query, best);
    }
}
