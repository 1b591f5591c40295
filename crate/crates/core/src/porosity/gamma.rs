use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::oracle::{sample_in_ball, SetOracle};
use crate::gauge::Gauge;
use crate::rng::{derive, from_seed, Rng};
use crate::space::Point;

/// Membership probes used to certify a hole when no exact distance is known.
pub const DEFAULT_PROBES: usize = 1000;
const SHRINK_STEPS: i32 = 20;
const CANDIDATE_LEVELS: i32 = 8;

/// Nested dyadic lattice on `B(q, r)` followed by uniform points of the ball.
struct CenterStream<'a> {
    q: &'a Point,
    r: f64,
    level: u32,
    index: u64,
    rng: Rng,
    lattice_done: bool,
}

impl<'a> CenterStream<'a> {
    fn new(q: &'a Point, r: f64, seed: u64) -> Self {
        CenterStream {
            q,
            r,
            level: 0,
            index: 0,
            rng: from_seed(seed),
            lattice_done: false,
        }
    }
}

impl Iterator for CenterStream<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let n = self.q.dim() as u32;
        while !self.lattice_done {
            let side = 2u64.pow(self.level + 1) + 1;
            let Some(count) = side.checked_pow(n).filter(|c| *c <= 1 << 24) else {
                self.lattice_done = true;
                break;
            };
            if self.index >= count {
                self.level += 1;
                self.index = 0;
                continue;
            }
            let mut rem = self.index;
            self.index += 1;
            let half = (side / 2) as i64;
            let ks: Vec<i64> = (0..n)
                .map(|_| {
                    let k = (rem % side) as i64 - half;
                    rem /= side;
                    k
                })
                .collect();
            if self.level > 0 && ks.iter().all(|k| k % 2 == 0) {
                continue;
            }
            let h = self.r / half as f64;
            let coords = self.q.coords().iter().zip(&ks).map(|(c, k)| c + h * *k as f64);
            return Some(Point::raw(coords.collect()));
        }
        let coords = self
            .q
            .coords()
            .iter()
            .map(|c| c + self.r * (2.0 * self.rng.gen::<f64>() - 1.0));
        Some(Point::raw(coords.collect()))
    }
}

fn hole_clear(set: &dyn SetOracle, center: &Point, radius: f64, probes: usize, rng: &mut Rng) -> bool {
    if let Some(d) = set.distance(center) {
        if d < radius {
            return false;
        }
    }
    let body = set.ambient();
    (0..probes).all(|_| match sample_in_ball(body, center, radius, rng) {
        Some(p) => !set.contains(&p),
        None => true,
    })
}

/// Re-checks a hole `B(center, radius) ∩ P = ∅` with fresh probes.
pub fn verify_hole(set: &dyn SetOracle, center: &Point, radius: f64, probes: usize, seed: u64) -> bool {
    hole_clear(set, center, radius, probes, &mut from_seed(seed))
}

/// Lower estimate of the largest hole radius inside `B(q, r)`, `None` when
/// no hole of positive radius was found.
pub fn gamma_est(q: &Point, r: f64, set: &dyn SetOracle, trials: usize, seed: u64) -> Option<f64> {
    let body = set.ambient();
    let norm = body.norm();
    let mut probe_rng = from_seed(derive(seed, 1));
    let mut best: f64 = 0.0;
    for x in CenterStream::new(q, r, derive(seed, 0)).take(trials) {
        let room = r - norm.dist(&x, q);
        if room <= best || !body.contains(&x) {
            continue;
        }
        let s = match set.distance(&x) {
            Some(d) => room.min(d),
            None => (0..=SHRINK_STEPS)
                .map(|i| room * 2f64.powi(-i))
                .take_while(|s| *s > best)
                .find(|s| hole_clear(set, &x, *s, DEFAULT_PROBES / 10, &mut probe_rng))
                .unwrap_or(0.0),
        };
        best = best.max(s);
    }
    (best > 0.0).then_some(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PorousAtPoint,
    NotDetected,
}

/// A verified empty ball near `q` at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleWitness {
    pub scale: f64,
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PorosityVerdict {
    pub verdict: Verdict,
    /// The `α` or `β` that worked at every scale.
    pub constant: Option<f64>,
    pub witnesses: Vec<HoleWitness>,
}

impl PorosityVerdict {
    pub fn is_porous(&self) -> bool {
        self.verdict == Verdict::PorousAtPoint
    }

    fn not_detected() -> Self {
        PorosityVerdict {
            verdict: Verdict::NotDetected,
            constant: None,
            witnesses: Vec::new(),
        }
    }
}

/// Dyadic constants `2^-1, …, 2^-16`, largest first.
pub fn dyadic_constants() -> Vec<f64> {
    (1..=16).map(|i| 2f64.powi(-i)).collect()
}

/// `top·2^-1, …, top·2^-levels`
pub fn geometric_grid(top: f64, levels: i32) -> Vec<f64> {
    (1..=levels).map(|i| top * 2f64.powi(-i)).collect()
}

/// Unit directions: the coordinate axes both ways plus seeded random ones.
fn directions(q: &Point, set: &dyn SetOracle, extra: usize, seed: u64) -> Vec<Point> {
    let n = q.dim();
    let norm = set.ambient().norm();
    let mut out = Vec::new();
    for i in 0..n {
        let e = Point::unit(n, i);
        out.push(e.scaled(1.0 / norm.norm(&e)));
        out.push(e.scaled(-1.0 / norm.norm(&e)));
    }
    if n > 1 {
        let mut rng = from_seed(seed);
        for _ in 0..extra {
            let v = Point::raw((0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect());
            if let Some(u) = norm.normalize(&v) {
                out.push(u);
            }
        }
    }
    out
}

/// Points `q + ε·2^-i·u` inside the ambient body.
fn nearby(q: &Point, eps: f64, dirs: &[Point], set: &dyn SetOracle) -> Vec<(f64, Point)> {
    let mut out = Vec::new();
    for i in 0..=CANDIDATE_LEVELS {
        let d = eps * 2f64.powi(-i);
        for u in dirs {
            let p = q.offset(u, d);
            if set.ambient().contains(&p) {
                out.push((d, p));
            }
        }
    }
    out
}

/// Searches the dyadic `α` grid for holes `B(q', φ⁻¹(α·d(q,q'))) ∩ P = ∅`
/// with `0 < d(q,q') ≤ ε` at every `ε` of the grid.
pub fn upper_porous_at(
    set: &dyn SetOracle,
    q: &Point,
    phi: &Gauge,
    eps_grid: &[f64],
    trials: usize,
    seed: u64,
) -> PorosityVerdict {
    let dirs = directions(q, set, trials, derive(seed, 0));
    let mut rng = from_seed(derive(seed, 1));
    'alpha: for alpha in dyadic_constants() {
        let mut witnesses = Vec::new();
        for &eps in eps_grid {
            let found = nearby(q, eps, &dirs, set).into_iter().find_map(|(d, c)| {
                let radius = phi.inverse(alpha * d).ok()?;
                hole_clear(set, &c, radius, DEFAULT_PROBES, &mut rng).then_some((c, radius))
            });
            match found {
                Some((center, radius)) => witnesses.push(HoleWitness {
                    scale: eps,
                    center,
                    radius,
                }),
                None => continue 'alpha,
            }
        }
        return PorosityVerdict {
            verdict: Verdict::PorousAtPoint,
            constant: Some(alpha),
            witnesses,
        };
    }
    PorosityVerdict::not_detected()
}

/// Searches the dyadic `β` grid for holes `B(q', φ⁻¹(β·ε)) ∩ P = ∅` with
/// `d(q,q') ≤ ε` at every `ε` of the grid `ε₀·2^-1, …, ε₀·2^-levels`.
pub fn lower_porous_at(
    set: &dyn SetOracle,
    q: &Point,
    phi: &Gauge,
    eps0: f64,
    levels: i32,
    trials: usize,
    seed: u64,
) -> PorosityVerdict {
    let dirs = directions(q, set, trials, derive(seed, 0));
    let mut rng = from_seed(derive(seed, 1));
    let grid = geometric_grid(eps0, levels);
    'beta: for beta in dyadic_constants() {
        let mut witnesses = Vec::new();
        for &eps in &grid {
            let Ok(radius) = phi.inverse(beta * eps) else {
                continue 'beta;
            };
            let found = nearby(q, eps, &dirs, set)
                .into_iter()
                .map(|(_, c)| c)
                .find(|c| hole_clear(set, c, radius, DEFAULT_PROBES, &mut rng));
            match found {
                Some(center) => witnesses.push(HoleWitness {
                    scale: eps,
                    center,
                    radius,
                }),
                None => continue 'beta,
            }
        }
        return PorosityVerdict {
            verdict: Verdict::PorousAtPoint,
            constant: Some(beta),
            witnesses,
        };
    }
    PorosityVerdict::not_detected()
}
