use serde::{Deserialize, Serialize};

use super::{ConvexBody, Norm, Point, SpatialIndex};
use crate::error::{input, param, Result};
use crate::rng;

/// A finite `s`-separated family of points of `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub points: Vec<Point>,
    pub separation: f64,
    /// Covering radius relative to the candidate stream the net was built from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
}

impl Net {
    /// Wraps a user-supplied point family, checking separation exhaustively.
    pub fn new(points: Vec<Point>, separation: f64, norm: Norm) -> Result<Self> {
        if points.is_empty() {
            return Err(input("net must contain at least one point"));
        }
        if !(separation > 0.0) {
            return Err(param(format!("separation must be positive, got {separation}")));
        }
        let net = Net {
            points,
            separation,
            density: None,
        };
        if let Some((i, j, d)) = net.separation_violation(norm) {
            return Err(param(format!(
                "points {i} and {j} are {d} apart, less than the separation {separation}"
            )));
        }
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest pairwise distance, `∞` for a single point.
    pub fn min_pairwise(&self, norm: Norm) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min(norm.dist(a, b));
            }
        }
        best
    }

    /// First pair closer than the separation, by exhaustive search.
    pub fn separation_violation(&self, norm: Norm) -> Option<(usize, usize, f64)> {
        for (i, a) in self.points.iter().enumerate() {
            for (j, b) in self.points.iter().enumerate().skip(i + 1) {
                let d = norm.dist(a, b);
                if d < self.separation {
                    return Some((i, j, d));
                }
            }
        }
        None
    }

    /// Distance from `q` to the nearest net point together with its index.
    pub fn nearest(&self, norm: Norm, q: &Point) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, norm.dist(p, q)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("net is non-empty")
    }

    /// Largest distance from a candidate to the net.
    pub fn covering_radius(&self, norm: Norm, candidates: &[Point]) -> f64 {
        candidates
            .iter()
            .map(|c| self.nearest(norm, c).1)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("net serializes")
    }
}

/// Greedy saturation: scan the candidates in order, keeping each one that is
/// at distance `≥ s` from everything kept so far.
///
/// The result is `s`-separated and every candidate lies within `s` of it.
pub fn greedy_net(
    body: &ConvexBody,
    s: f64,
    candidates: impl IntoIterator<Item = Point>,
) -> Result<Net> {
    if !(s > 0.0) {
        return Err(param(format!("separation must be positive, got {s}")));
    }
    if s > body.diameter() * (1.0 + 1e-12) {
        return Err(param(format!(
            "separation {s} exceeds the body diameter {}",
            body.diameter()
        )));
    }
    let norm = body.norm();
    let mut points: Vec<Point> = Vec::new();
    let mut index = SpatialIndex::empty(s);
    let mut seen = 0usize;
    for c in candidates {
        seen += 1;
        if c.dim() != body.dim() || !body.contains_within(&c, 1e-12) {
            return Err(input(format!("candidate {c} is not a member of the body")));
        }
        if index.find_within(&points, norm, &c, s).is_none() {
            index.insert(&c, points.len());
            points.push(c);
        }
    }
    if seen == 0 {
        return Err(input("empty candidate stream"));
    }
    Ok(Net {
        points,
        separation: s,
        density: Some(s),
    })
}

/// Lattice of spacing `h` over the bounding box, restricted to `C`, followed by
/// the extreme points of `C`.
pub fn grid_candidates(body: &ConvexBody, h: f64) -> Result<Vec<Point>> {
    if !(h > 0.0) {
        return Err(param(format!("grid spacing must be positive, got {h}")));
    }
    let (lo, hi) = body.bounding_box();
    let n = body.dim();
    let counts: Vec<usize> = (0..n)
        .map(|i| ((hi[i] - lo[i]) / h).ceil() as usize + 1)
        .collect();
    let total: f64 = counts.iter().map(|&c| c as f64).product();
    if total > 5e6 {
        return Err(param(format!("grid of {total} points is too large")));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; n];
    loop {
        let p = Point::raw(
            (0..n)
                .map(|i| (lo[i] + idx[i] as f64 * h).min(hi[i]))
                .collect(),
        );
        if body.contains(&p) {
            out.push(p);
        }
        let mut i = 0;
        loop {
            if i == n {
                out.extend(body.extreme_points());
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < counts[i] {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `count` independent samples of `C`.
pub fn sampled_candidates(body: &ConvexBody, count: usize, seed: u64) -> Result<Vec<Point>> {
    let mut rng = rng::from_seed(seed);
    (0..count).map(|_| body.sample(&mut rng)).collect()
}

/// Greedy net over a lattice four times finer than the separation.
pub fn lattice_net(body: &ConvexBody, s: f64) -> Result<Net> {
    greedy_net(body, s, grid_candidates(body, s / 4.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_trace_on_unit_interval() {
        let c = ConvexBody::interval(0.0, 1.0).unwrap();
        let cands: Vec<Point> = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
            .iter()
            .map(|&x| Point::scalar(x))
            .collect();
        let net = greedy_net(&c, 0.4, cands).unwrap();
        let xs: Vec<f64> = net.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.4, 0.8]);
    }

    #[test]
    fn wide_separation_gives_single_point() {
        let c = ConvexBody::interval(0.0, 1.0).unwrap();
        let cands: Vec<Point> = [0.2, 0.3, 0.35].iter().map(|&x| Point::scalar(x)).collect();
        let net = greedy_net(&c, 0.9, cands).unwrap();
        assert_eq!(net.len(), 1);
    }

    #[test]
    fn errors() {
        let c = ConvexBody::interval(0.0, 1.0).unwrap();
        assert!(greedy_net(&c, 0.5, Vec::new()).is_err());
        assert!(greedy_net(&c, 0.5, vec![Point::scalar(2.0)]).is_err());
        assert!(greedy_net(&c, 0.0, vec![Point::scalar(0.5)]).is_err());
        assert!(Net::new(vec![Point::scalar(0.0), Point::scalar(0.1)], 0.5, Norm::L2).is_err());
    }

    #[test]
    fn lattice_net_separated_and_dense() {
        let c = ConvexBody::cube(2, -1.0, 1.0, Norm::Inf).unwrap();
        let cands = grid_candidates(&c, 0.05).unwrap();
        let net = greedy_net(&c, 0.3, cands.clone()).unwrap();
        assert!(net.separation_violation(Norm::Inf).is_none());
        assert!(net.covering_radius(Norm::Inf, &cands) < 0.3);
        let back: Net = serde_json::from_str(&net.to_json()).unwrap();
        assert_eq!(back, net);
    }
}
