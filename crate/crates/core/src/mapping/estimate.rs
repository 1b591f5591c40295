use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::{MapExpr, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::rng::{derive, from_seed, Rng};
use crate::space::{lattice_net, ConvexBody, Norm, Point};

/// Relative separation below which a sampled quotient measures rounding
/// error rather than the map.
pub const PAIR_RESOLUTION: f64 = 1e-5;

/// Number of dyadic shells `r, r/2, …` used by the local estimator.
pub const SHELL_LEVELS: i32 = 12;

/// Largest sampled difference quotient, a lower bound on the true constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipEstimate {
    pub lower_bound: f64,
    pub witness: Option<(Point, Point)>,
    pub samples: usize,
}

impl LipEstimate {
    fn empty() -> Self {
        LipEstimate {
            lower_bound: 0.0,
            witness: None,
            samples: 0,
        }
    }

    fn offer(&mut self, q: f64, x: &Point, y: &Point) {
        self.samples += 1;
        if q > self.lower_bound || self.witness.is_none() {
            self.lower_bound = self.lower_bound.max(q);
            self.witness = Some((x.clone(), y.clone()));
        }
    }
}

fn quotient(m: &MapExpr, norm: Norm, x: &Point, fx: &Point, y: &Point) -> Option<f64> {
    let d = norm.dist(x, y);
    (d > 0.0).then(|| norm.dist(fx, &m.eval(y, norm)) / d)
}

/// Whether `x` and `y` are far enough apart, relative to `diam C + ‖x‖`, for
/// their quotient to be accurate to about `1e-10`.
pub fn resolvable(x: &Point, y: &Point, body: &ConvexBody) -> bool {
    let norm = body.norm();
    norm.dist(x, y) >= PAIR_RESOLUTION * (body.diameter() + norm.norm(x))
}

/// Point on the segment from `x` towards `w` at distance `min(radius, ‖w − x‖)`.
fn toward(x: &Point, w: &Point, radius: f64, norm: Norm) -> Option<Point> {
    let dir = w - x;
    let len = norm.norm(&dir);
    (len > 0.0).then(|| x.offset(&dir, radius.min(len) / len))
}

/// Max quotient over sampled pairs, half uniform and half close together.
/// Pairs that are not [`resolvable`] are skipped.
pub fn lip_global_est(m: &MapExpr, body: &ConvexBody, pairs: usize, seed: u64) -> Result<LipEstimate> {
    if pairs == 0 {
        return Err(Error::Estimation("no pairs requested".into()));
    }
    let norm = body.norm();
    let mut rng = from_seed(seed);
    let mut est = LipEstimate::empty();
    for i in 0..pairs {
        let x = body.sample(&mut rng)?;
        let w = body.sample(&mut rng)?;
        let y = if i % 2 == 0 {
            w
        } else {
            let t = 10f64.powf(-4.0 * rng.gen::<f64>());
            match toward(&x, &w, t * norm.dist(&x, &w), norm) {
                Some(y) => y,
                None => continue,
            }
        };
        if !resolvable(&x, &y, body) {
            continue;
        }
        let fx = m.eval(&x, norm);
        if let Some(q) = quotient(m, norm, &x, &fx, &y) {
            est.offer(q, &x, &y);
        }
    }
    if est.samples == 0 {
        return Err(Error::Estimation("all sampled pairs coincide".into()));
    }
    Ok(est)
}

/// Candidate points around `x` on the shells `r·2^-k` and uniformly inside `B(x, r)`.
pub fn local_candidates(
    x: &Point,
    r: f64,
    body: &ConvexBody,
    samples: usize,
    rng: &mut Rng,
) -> Result<Vec<Point>> {
    let norm = body.norm();
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let w = body.sample(rng)?;
        let radius = if i % 2 == 0 {
            r * 2f64.powi(-((i / 2) as i32 % SHELL_LEVELS))
        } else {
            r * rng.gen::<f64>()
        };
        if let Some(y) = toward(x, &w, radius, norm) {
            out.push(y);
        }
    }
    Ok(out)
}

/// Max quotient at `x` over the candidates within distance `r`.
pub fn lip_local_from(m: &MapExpr, x: &Point, r: f64, candidates: &[Point], norm: Norm) -> LipEstimate {
    let fx = m.eval(x, norm);
    let mut est = LipEstimate::empty();
    for y in candidates {
        let d = norm.dist(x, y);
        if d > 0.0 && d <= r {
            if let Some(q) = quotient(m, norm, x, &fx, y) {
                est.offer(q, x, y);
            }
        }
    }
    est
}

/// Sampled lower bound for the Lipschitz constant of `m` witnessed at `x` at scale `r`.
pub fn lip_local_scale(
    m: &MapExpr,
    x: &Point,
    r: f64,
    body: &ConvexBody,
    samples: usize,
    seed: u64,
) -> Result<LipEstimate> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("scale must be positive, got {r}")));
    }
    if !body.contains_within(x, MEMBERSHIP_TOL) {
        return Err(Error::Domain(format!("{x} is not in the body")));
    }
    let candidates = local_candidates(x, r, body, samples, &mut from_seed(seed))?;
    let est = lip_local_from(m, x, r, &candidates, body.norm());
    if est.samples == 0 {
        return Err(Error::Estimation(format!("no admissible point near {x} at scale {r}")));
    }
    Ok(est)
}

/// Sampled lower bound for `sup_x ‖m1(x) − m2(x)‖`; extreme points of the body
/// are always included.
pub fn sup_dist_est(m1: &MapExpr, m2: &MapExpr, body: &ConvexBody, samples: usize, seed: u64) -> Result<f64> {
    let norm = body.norm();
    let mut rng = from_seed(seed);
    let gap = |x: &Point| norm.dist(&m1.eval(x, norm), &m2.eval(x, norm));
    let mut best = body.extreme_points().iter().map(gap).fold(0.0, f64::max);
    for _ in 0..samples {
        best = best.max(gap(&body.sample(&mut rng)?));
    }
    Ok(best)
}

/// Fraction of grid points where the sampled quotient at scale `r` exceeds
/// `lambda`. Without a grid, a greedy net of separation `r/2` is used.
pub fn r_set_density(
    m: &MapExpr,
    body: &ConvexBody,
    lambda: f64,
    r: f64,
    grid: Option<&[Point]>,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = lattice_net(body, (r / 2.0).min(body.diameter()))?.points;
            &owned
        }
    };
    if grid.is_empty() {
        return Err(Error::Input("density grid is empty".into()));
    }
    let hits = grid
        .par_iter()
        .enumerate()
        .filter(|(i, x)| {
            lip_local_scale(m, x, r, body, samples, derive(seed, *i as u64))
                .map(|e| e.lower_bound > lambda)
                .unwrap_or(false)
        })
        .count();
    Ok(hits as f64 / grid.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::flat_rescale;
    use std::sync::Arc;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn ramp() -> Arc<MapExpr> {
        MapExpr::compose(
            MapExpr::affine_contraction(flat_rescale(0.5, 1.0), p(&[0.0])).unwrap(),
            MapExpr::flat_collapse(vec![p(&[0.0])], 0.5, 1.0, Norm::L2).unwrap(),
        )
    }

    #[test]
    fn ramp_is_the_hinge() {
        let c = ConvexBody::interval(0.0, 1.0).unwrap();
        let m = ramp();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            let y = m.evaluate(&p(&[x]), &c).unwrap()[0];
            assert!((y - (x - 0.5).max(0.0)).abs() < 1e-15, "{x}");
        }
        assert_eq!(m.certificate(), 1.0);
    }

    #[test]
    fn global_examples() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let half = MapExpr::radial_scale(0.5).unwrap();
        let e = lip_global_est(&half, &c, 100, 1).unwrap();
        assert!((e.lower_bound - 0.5).abs() < 1e-12);
        let e = lip_global_est(&MapExpr::Identity, &c, 100, 1).unwrap();
        assert!((e.lower_bound - 1.0).abs() < 1e-12);
        let flat = MapExpr::flat_collapse(vec![p(&[0.0])], 0.25, 0.5, Norm::L2).unwrap();
        let e = lip_global_est(&flat, &c, 10_000, 3).unwrap();
        assert!((1.8..=2.0 + 1e-9).contains(&e.lower_bound), "{}", e.lower_bound);
        assert!(e.witness.is_some());
    }

    #[test]
    fn flat_global_matches_brute_force_grid() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let flat = MapExpr::flat_collapse(vec![p(&[0.0])], 0.25, 0.5, Norm::L2).unwrap();
        let pts: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 / 100.0).collect();
        let mut best: f64 = 0.0;
        for &a in &pts {
            for &b in &pts {
                if a != b {
                    let fa = flat.eval(&p(&[a]), Norm::L2)[0];
                    let fb = flat.eval(&p(&[b]), Norm::L2)[0];
                    best = best.max((fa - fb).abs() / (a - b).abs());
                }
            }
        }
        assert!((best - 2.0).abs() < 1e-9);
        let e = lip_global_est(&flat, &c, 10_000, 3).unwrap();
        assert!(e.lower_bound <= best + 1e-9);
    }

    #[test]
    fn local_examples() {
        let c = ConvexBody::interval(0.0, 1.0).unwrap();
        let m = ramp();
        let e = lip_local_scale(&m, &p(&[0.9]), 0.1, &c, 200, 5).unwrap();
        assert!((e.lower_bound - 1.0).abs() < 1e-9);
        let e = lip_local_scale(&m, &p(&[0.2]), 0.1, &c, 200, 5).unwrap();
        assert_eq!(e.lower_bound, 0.0);
        let half = MapExpr::radial_scale(0.5).unwrap();
        let e = lip_local_scale(&half, &p(&[0.3]), 0.05, &c, 50, 5).unwrap();
        assert!((e.lower_bound - 0.5).abs() < 1e-12);
        assert!(lip_local_scale(&half, &p(&[1.5]), 0.05, &c, 50, 5).is_err());
    }

    #[test]
    fn sup_dist_examples() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let id = MapExpr::Identity;
        let zero = MapExpr::Constant { value: p(&[0.0]) };
        let half = MapExpr::radial_scale(0.5).unwrap();
        assert_eq!(sup_dist_est(&id, &zero, &c, 10, 1).unwrap(), 1.0);
        assert_eq!(sup_dist_est(&half, &half, &c, 10, 1).unwrap(), 0.0);
        assert_eq!(sup_dist_est(&id, &half, &c, 10, 1).unwrap(), 0.5);
        assert_eq!(
            sup_dist_est(&id, &half, &c, 100, 9).unwrap(),
            sup_dist_est(&half, &id, &c, 100, 9).unwrap()
        );
    }

    #[test]
    fn density_extremes() {
        let c = ConvexBody::cube(2, 0.0, 1.0, Norm::L2).unwrap();
        let d = r_set_density(&MapExpr::Identity, &c, 0.9, 0.1, None, 20, 1).unwrap();
        assert_eq!(d, 1.0);
        let k = MapExpr::Constant { value: p(&[0.5, 0.5]) };
        assert_eq!(r_set_density(&k, &c, 0.1, 0.1, None, 20, 1).unwrap(), 0.0);
        assert!(r_set_density(&k, &c, 0.1, 0.1, Some(&[]), 20, 1).is_err());
    }
}
