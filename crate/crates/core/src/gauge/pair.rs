use serde::{Deserialize, Serialize};

use super::form::{Gauge, GaugeForm};
use super::majorant::least_concave_majorant;
use crate::error::{Error, Result};

/// Points of the verification grid of a pair.
pub const PAIR_GRID: usize = 1000;
const TABLE_POINTS: usize = 4000;
const TABLE_DECADES_BELOW: f64 = 16.0;
const TABLE_DECADES_ABOVE: f64 = 6.0;
const MAX_K_DOUBLINGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairBranch {
    /// `inf φ > 0`, `ξ(t) = t`.
    Identity,
    /// `ξ` is the concave majorant of `t/φ̂(t)`.
    Majorant,
}

/// Gauges `φ, ξ` on `(0, 1/K)` with `t/K ≤ φ(t)ξ(t) ≤ Kt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugePair {
    pub phi: Gauge,
    pub xi: Gauge,
    pub k: f64,
    pub branch: PairBranch,
    pub t0: Option<f64>,
    /// Measured two-sided constant between `ξ` and `t/φ̂(t)`.
    pub spread: Option<f64>,
}

/// Worst ratios of `φξ/t` over a log grid of `(0, 1/K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub passed: bool,
}

/// `n` log-spaced points of `(0, top)` spanning nine decades.
pub fn log_grid(top: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| top * (1.0 - 1e-12) * 10f64.powf(-9.0 * i as f64 / (n - 1).max(1) as f64))
        .collect()
}

impl GaugePair {
    pub fn check(&self, n: usize) -> PairCheck {
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio: f64 = 0.0;
        for t in log_grid(1.0 / self.k, n) {
            let r = self.phi.eval(t) * self.xi.eval(t) / t;
            min_ratio = min_ratio.min(r);
            max_ratio = max_ratio.max(r);
        }
        PairCheck {
            min_ratio,
            max_ratio,
            passed: min_ratio >= 1.0 / self.k && max_ratio <= self.k,
        }
    }

    /// `ξ(10⁻⁶)`, the vanishing-limit probe.
    pub fn xi_probe(&self) -> f64 {
        self.xi.eval(1e-6)
    }
}

fn power_of_two_above(x: f64) -> f64 {
    let mut k = 1.0;
    while k <= x {
        k *= 2.0;
    }
    k
}

/// A point near the middle of the domain where the one-sided slopes agree.
fn smooth_point(phi: &Gauge) -> Result<(f64, f64)> {
    let mid = if phi.eta.is_finite() { phi.eta / 2.0 } else { 1.0 };
    for k in 0..64 {
        let t = mid * (1.0 - k as f64 / 128.0);
        let (l, r) = phi.slopes(t);
        if (l - r).abs() < 1e-8 && l > 0.0 {
            return Ok((t, 0.5 * (l + r)));
        }
    }
    Err(Error::Gauge("no point with a stable derivative near the domain midpoint".into()))
}

/// Builds `ξ` and `K` for `φ`.
pub fn build_pair(phi: &Gauge) -> Result<GaugePair> {
    if !phi.form.superlinear_at_zero() {
        return Err(Error::Precondition("φ(t)/t stays bounded as t → 0".into()));
    }
    if phi.inf() > 0.0 {
        let k = power_of_two_above((1.0 / phi.eta).max(1.0 / phi.inf()).max(phi.sup()));
        let pair = GaugePair {
            phi: phi.restricted(1.0 / k)?,
            xi: Gauge::power(1.0, 1.0, 1.0 / k)?,
            k,
            branch: PairBranch::Identity,
            t0: None,
            spread: None,
        };
        return Ok(pair);
    }
    let (t0, slope) = smooth_point(phi)?;
    let hat = GaugeForm::Extended {
        base: Box::new(phi.form.clone()),
        t0,
        value: phi.eval(t0),
        slope,
    };
    let n = TABLE_POINTS;
    let span = TABLE_DECADES_BELOW + TABLE_DECADES_ABOVE;
    let ts: Vec<f64> = (0..n)
        .map(|i| t0 * 10f64.powf(-TABLE_DECADES_BELOW + span * i as f64 / (n - 1) as f64))
        .collect();
    let psi: Vec<f64> = ts.iter().map(|&t| t / hat.eval(t)).collect();
    let majorant = least_concave_majorant(&ts, &psi)?;
    let spread = ts
        .iter()
        .zip(&psi)
        .map(|(&t, &p)| majorant.eval(t) / p)
        .fold(1.0, f64::max);
    let cut = majorant.knots.partition_point(|k| k.0 <= t0);
    let mut knots = majorant.knots[..(cut + 1).min(majorant.knots.len())].to_vec();
    if knots.len() < 2 {
        knots = majorant.knots.clone();
    }
    let xi_form = GaugeForm::Table(super::form::PiecewiseLinear::new(knots)?);
    let xi_full = Gauge::new(xi_form, t0).map_err(|_| {
        Error::Gauge("the concave majorant is not strictly increasing below t0".into())
    })?;
    let mut k = power_of_two_above(spread.max(1.0 / t0).max(1.0 / phi.eta));
    for _ in 0..MAX_K_DOUBLINGS {
        let pair = GaugePair {
            phi: phi.restricted(1.0 / k)?,
            xi: xi_full.restricted(1.0 / k)?,
            k,
            branch: PairBranch::Majorant,
            t0: Some(t0),
            spread: Some(spread),
        };
        if pair.check(PAIR_GRID).passed {
            return Ok(pair);
        }
        k *= 2.0;
    }
    Err(Error::Gauge("no power of two K satisfies the pair inequalities".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_branch() {
        let phi = Gauge::one_plus_power(0.5, 1.0).unwrap();
        let pair = build_pair(&phi).unwrap();
        assert_eq!(pair.branch, PairBranch::Identity);
        // sup φ = 2 on (0,1), so K is the next power of two above it
        assert_eq!(pair.k, 4.0);
        assert_eq!(pair.xi.eval(0.01), 0.01);
        assert!(pair.check(PAIR_GRID).passed);
        assert!(pair.xi_probe() <= 1e-2);
    }

    #[test]
    fn sqrt_branch_tracks_sqrt() {
        let pair = build_pair(&Gauge::sqrt()).unwrap();
        assert_eq!(pair.branch, PairBranch::Majorant);
        let t0 = pair.t0.unwrap();
        assert!(pair.k > 1.0 / t0);
        for t in log_grid(1.0 / pair.k, 200) {
            let r = pair.xi.eval(t) / t.sqrt();
            assert!((0.5..=2.0).contains(&r), "{t} {r}");
        }
        assert!(pair.check(PAIR_GRID).passed);
        assert!(pair.xi_probe() <= 1e-2);
    }

    #[test]
    fn bounded_ratio_rejected() {
        let lin = Gauge::power(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(build_pair(&lin), Err(Error::Precondition(_))));
        let rat = Gauge::rational(1.0, 1.0).unwrap();
        assert!(matches!(build_pair(&rat), Err(Error::Precondition(_))));
    }

    #[test]
    fn xi_is_increasing_and_concave() {
        for phi in [
            Gauge::sqrt(),
            Gauge::power(1.0, 2.0 / 3.0, 1.0).unwrap(),
            Gauge::rational(0.5, 1.0).unwrap(),
        ] {
            let pair = build_pair(&phi).unwrap();
            assert_eq!(pair.xi.check_shape(1000), (true, true), "{phi}");
        }
    }
}
