use std::collections::HashMap;

use super::{Norm, Point};

/// Uniform-grid bucket index over a fixed point list.
///
/// Cells have side `cell`; since every ℓp norm dominates ℓ∞, any point within
/// norm-distance `< cell` of a query lies in the query's cell or one of its
/// immediate neighbours.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl SpatialIndex {
    pub fn new(points: &[Point], cell: f64) -> Self {
        let mut idx = SpatialIndex {
            cell,
            buckets: HashMap::new(),
        };
        for (i, p) in points.iter().enumerate() {
            idx.insert(p, i);
        }
        idx
    }

    pub fn empty(cell: f64) -> Self {
        SpatialIndex {
            cell,
            buckets: HashMap::new(),
        }
    }

    fn key(&self, p: &Point) -> Vec<i64> {
        p.coords()
            .iter()
            .map(|c| (c / self.cell).floor() as i64)
            .collect()
    }

    pub fn insert(&mut self, p: &Point, id: usize) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Calls `visit` with every stored id in the 3ⁿ block of cells around `q`.
    /// Stops early when `visit` returns `true`.
    pub fn scan_near(&self, q: &Point, mut visit: impl FnMut(usize) -> bool) -> bool {
        let base = self.key(q);
        let n = base.len();
        let mut offset = vec![-1i64; n];
        let mut key = base.clone();
        loop {
            for i in 0..n {
                key[i] = base[i] + offset[i];
            }
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    if visit(id) {
                        return true;
                    }
                }
            }
            // odometer over {-1,0,1}^n
            let mut i = 0;
            loop {
                if i == n {
                    return false;
                }
                offset[i] += 1;
                if offset[i] <= 1 {
                    break;
                }
                offset[i] = -1;
                i += 1;
            }
        }
    }

    /// First stored point at distance `< radius` from `q`; `radius ≤ cell`.
    pub fn find_within(
        &self,
        points: &[Point],
        norm: Norm,
        q: &Point,
        radius: f64,
    ) -> Option<(usize, f64)> {
        debug_assert!(radius <= self.cell * (1.0 + 1e-12));
        let mut hit = None;
        self.scan_near(q, |id| {
            let d = norm.dist(&points[id], q);
            if d < radius {
                hit = Some((id, d));
                true
            } else {
                false
            }
        });
        hit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_neighbours_across_cells() {
        let pts: Vec<Point> = (0..10).map(|i| Point::scalar(i as f64 * 0.3)).collect();
        let idx = SpatialIndex::new(&pts, 0.2);
        let (id, d) = idx.find_within(&pts, Norm::L2, &Point::scalar(0.61), 0.2).unwrap();
        assert_eq!(id, 2);
        assert!((d - 0.01).abs() < 1e-12);
        assert!(idx.find_within(&pts, Norm::L2, &Point::scalar(0.75), 0.1).is_none());
    }

    #[test]
    fn negative_coordinates() {
        let pts = vec![
            Point::new(vec![-0.05, -0.05]).unwrap(),
            Point::new(vec![0.5, 0.5]).unwrap(),
        ];
        let idx = SpatialIndex::new(&pts, 0.1);
        assert_eq!(
            idx.find_within(&pts, Norm::Inf, &Point::new(vec![0.01, 0.01]).unwrap(), 0.1)
                .map(|h| h.0),
            Some(0)
        );
    }
}
