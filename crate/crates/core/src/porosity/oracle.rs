use std::sync::Arc;

use rand::Rng as _;

use crate::error::Result;
use crate::gauge::Ladder;
use crate::mapping::MapExpr;
use crate::rng::Rng;
use crate::space::{ConvexBody, Point};

use super::eset::{e_set_member, ESetParams};

/// A subset `P` of an ambient convex body, given by membership.
pub trait SetOracle: Send + Sync {
    fn contains(&self, p: &Point) -> bool;
    fn ambient(&self) -> &ConvexBody;
    /// Exact `dist(p, P)` when the set has known gap structure.
    fn distance(&self, _p: &Point) -> Option<f64> {
        None
    }
    fn name(&self) -> String;
}

/// Uniform point of `B(center, radius) ∩ M`, or `None` after repeated rejection.
pub fn sample_in_ball(body: &ConvexBody, center: &Point, radius: f64, rng: &mut Rng) -> Option<Point> {
    let norm = body.norm();
    for _ in 0..256 {
        let coords: Vec<f64> = center
            .coords()
            .iter()
            .map(|c| c + radius * (2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        let p = Point::new(coords).ok()?;
        if norm.dist(&p, center) < radius && body.contains(&p) {
            return Some(p);
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct EmptySet {
    pub ambient: ConvexBody,
}

impl SetOracle for EmptySet {
    fn contains(&self, _p: &Point) -> bool {
        false
    }
    fn ambient(&self) -> &ConvexBody {
        &self.ambient
    }
    fn distance(&self, _p: &Point) -> Option<f64> {
        Some(f64::INFINITY)
    }
    fn name(&self) -> String {
        "empty".into()
    }
}

#[derive(Debug, Clone)]
pub struct FiniteSet {
    pub ambient: ConvexBody,
    pub points: Vec<Point>,
}

impl SetOracle for FiniteSet {
    fn contains(&self, p: &Point) -> bool {
        self.points.iter().any(|q| q == p)
    }
    fn ambient(&self) -> &ConvexBody {
        &self.ambient
    }
    fn distance(&self, p: &Point) -> Option<f64> {
        let norm = self.ambient.norm();
        Some(self.points.iter().map(|q| norm.dist(p, q)).fold(f64::INFINITY, f64::min))
    }
    fn name(&self) -> String {
        format!("finite({})", self.points.len())
    }
}

/// `{1/n : n ∈ ℤ∖{0}}` on the line.
#[derive(Debug, Clone)]
pub struct Reciprocals {
    pub ambient: ConvexBody,
}

impl Reciprocals {
    pub fn new(ambient: ConvexBody) -> Result<Self> {
        if ambient.dim() != 1 {
            return Err(crate::error::input("the reciprocal set lives on the line"));
        }
        Ok(Reciprocals { ambient })
    }

    /// Distance from `x` to the set; `0` is a limit point.
    pub fn dist_to(x: f64) -> f64 {
        let a = x.abs();
        if a == 0.0 {
            return 0.0;
        }
        if a >= 1.0 {
            return a - 1.0;
        }
        let n = (1.0 / a).floor();
        [n - 1.0, n, n + 1.0, n + 2.0]
            .into_iter()
            .filter(|m| *m >= 1.0)
            .map(|m| (a - 1.0 / m).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

impl SetOracle for Reciprocals {
    fn contains(&self, p: &Point) -> bool {
        let x = p[0];
        if x == 0.0 {
            return false;
        }
        let m = (1.0 / x).round();
        m != 0.0 && 1.0 / m == x
    }
    fn ambient(&self) -> &ConvexBody {
        &self.ambient
    }
    fn distance(&self, p: &Point) -> Option<f64> {
        Some(Self::dist_to(p[0]))
    }
    fn name(&self) -> String {
        "reciprocals".into()
    }
}

/// Dyadic rationals, hence every representable point: dense in the ambient body.
#[derive(Debug, Clone)]
pub struct Rationals {
    pub ambient: ConvexBody,
}

impl SetOracle for Rationals {
    fn contains(&self, p: &Point) -> bool {
        p.is_finite()
    }
    fn ambient(&self) -> &ConvexBody {
        &self.ambient
    }
    fn distance(&self, _p: &Point) -> Option<f64> {
        Some(0.0)
    }
    fn name(&self) -> String {
        "rationals".into()
    }
}

/// The whole ambient body.
#[derive(Debug, Clone)]
pub struct WholeSet {
    pub ambient: ConvexBody,
}

impl SetOracle for WholeSet {
    fn contains(&self, p: &Point) -> bool {
        self.ambient.contains(p)
    }
    fn ambient(&self) -> &ConvexBody {
        &self.ambient
    }
    fn distance(&self, p: &Point) -> Option<f64> {
        Some(if self.ambient.contains(p) { 0.0 } else { f64::INFINITY })
    }
    fn name(&self) -> String {
        "whole".into()
    }
}

/// Points where a map is at most `λ`-Lipschitz at every ladder scale in `[l, J_max]`.
#[derive(Debug, Clone)]
pub struct ESet {
    pub map: Arc<MapExpr>,
    pub ladder: Ladder,
    pub params: ESetParams,
    pub ambient: ConvexBody,
}

impl SetOracle for ESet {
    fn contains(&self, p: &Point) -> bool {
        e_set_member(&self.map, p, &self.ladder, &self.params, &self.ambient)
            .map(|r| r.member)
            .unwrap_or(false)
    }
    fn ambient(&self) -> &ConvexBody {
        &self.ambient
    }
    fn name(&self) -> String {
        format!("e-set(λ={}, l={}, J={})", self.params.lambda, self.params.l, self.params.j_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reciprocal_distance_against_enumeration() {
        for i in 1..2000 {
            let x = -1.2 + 2.4 * i as f64 / 2000.0;
            let brute = (1..5000)
                .flat_map(|n| [1.0 / n as f64, -1.0 / n as f64])
                .map(|p| (x - p).abs())
                .fold(x.abs(), f64::min);
            let d = Reciprocals::dist_to(x);
            assert!((d - brute).abs() < 1e-12 || d < 1e-7, "{x}: {d} vs {brute}");
        }
    }

    #[test]
    fn reciprocal_membership() {
        let r = Reciprocals::new(ConvexBody::interval(-1.0, 1.0).unwrap()).unwrap();
        assert!(r.contains(&Point::scalar(0.5)));
        assert!(r.contains(&Point::scalar(-0.25)));
        assert!(!r.contains(&Point::scalar(0.0)));
        assert!(!r.contains(&Point::scalar(0.4)));
    }
}
