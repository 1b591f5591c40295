use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{ConvexBody, Norm, Point};

/// Unit directions `e_z` such that `[z, z + (s/3)·e_z]` stays inside the body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionField {
    pub v: Point,
    pub w: Point,
    pub s: f64,
    pub norm: Norm,
}

impl DirectionField {
    /// Field from an explicit pair `v, w ∈ C` with `‖w − v‖ > 2s/3`.
    pub fn new(body: &ConvexBody, s: f64, v: Point, w: Point) -> Result<Self> {
        let norm = body.norm();
        if !(s > 0.0 && s <= body.diameter()) {
            return Err(Error::Geometry(format!(
                "scale {s} must lie in (0, diam C = {}]",
                body.diameter()
            )));
        }
        if !body.contains(&v) || !body.contains(&w) {
            return Err(Error::Geometry("field anchors must lie in the body".into()));
        }
        if norm.dist(&v, &w) <= 2.0 * s / 3.0 {
            return Err(Error::Geometry(format!(
                "anchors {v} and {w} are not more than 2s/3 apart"
            )));
        }
        Ok(DirectionField { v, w, s, norm })
    }

    /// Field anchored at the farthest pair of extreme points of the body.
    pub fn auto(body: &ConvexBody, s: f64) -> Result<Self> {
        let norm = body.norm();
        let pts = body.extreme_points();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = norm.dist(&pts[i], &pts[j]);
                if best.is_none_or(|(_, _, b)| d > b) {
                    best = Some((i, j, d));
                }
            }
        }
        let (i, j, _) = best.ok_or_else(|| Error::Geometry("body has a single extreme point".into()))?;
        Self::new(body, s, pts[i].clone(), pts[j].clone())
    }

    pub fn at(&self, z: &Point) -> Point {
        let to_v = &self.v - z;
        let dv = self.norm.norm(&to_v);
        if dv >= self.s / 3.0 {
            to_v.scaled(1.0 / dv)
        } else {
            let to_w = &self.w - z;
            to_w.scaled(1.0 / self.norm.norm(&to_w))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_branch_rule() {
        let c = ConvexBody::cube(2, 0.0, 1.0, Norm::Inf).unwrap();
        let f = DirectionField::new(&c, 0.6, p(&[0., 0.]), p(&[1., 1.])).unwrap();
        assert_eq!(f.at(&p(&[0.1, 0.1])), p(&[1., 1.]));
        assert_eq!(f.at(&p(&[0.9, 0.9])), p(&[-1., -1.]));
        assert_eq!(f.at(&p(&[0., 0.])), p(&[1., 1.]));
    }

    #[test]
    fn auto_uses_far_pair() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let f = DirectionField::auto(&c, 0.5).unwrap();
        assert_eq!(f.at(&Point::scalar(0.5)), Point::scalar(-1.0));
        assert!(DirectionField::auto(&c, 3.0).is_err());
    }

    #[test]
    fn close_anchors_rejected() {
        let c = ConvexBody::interval(0.0, 1.0).unwrap();
        assert!(DirectionField::new(&c, 0.9, Point::scalar(0.0), Point::scalar(0.5)).is_err());
    }

    #[test]
    fn segments_stay_inside() {
        let c = ConvexBody::hull(
            vec![p(&[0., 0.]), p(&[2., 0.]), p(&[0., 1.])],
            Norm::L1,
        )
        .unwrap();
        let s = 1.2;
        let f = DirectionField::auto(&c, s).unwrap();
        let mut rng = crate::rng::from_seed(11);
        for _ in 0..500 {
            let z = c.sample(&mut rng).unwrap();
            let e = f.at(&z);
            assert!((Norm::L1.norm(&e) - 1.0).abs() < 1e-12);
            for k in 1..=20 {
                let q = z.offset(&e, s / 3.0 * k as f64 / 20.0);
                assert!(c.contains(&q), "{z} {e}");
            }
        }
    }
}
