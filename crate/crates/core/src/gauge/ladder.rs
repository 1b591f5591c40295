use serde::{Deserialize, Serialize};

use super::form::Gauge;
use super::pair::GaugePair;
use crate::error::{Error, Result};

pub const DEFAULT_RUNGS: usize = 20;
pub const DEFAULT_LADDER_TOL: f64 = 1e-12;
const MAX_HALVINGS: usize = 2000;
const MAX_BISECTIONS: usize = 200;

/// Scales `s_1 > s_2 > …` on which `φ⁻¹(s)/s` halves from rung to rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub phi: Gauge,
    pub rungs: Vec<f64>,
    /// Relative tolerance on the halving residual.
    pub tol: f64,
}

/// Ladder of `count` rungs starting at `¼·min{1, sup φ, diam}`.
pub fn ladder(phi: &Gauge, diam: f64, count: usize, tol: f64) -> Result<Ladder> {
    if count < 2 {
        return Err(Error::Input("a ladder needs at least two rungs".into()));
    }
    if phi.inf() > 0.0 {
        return Err(Error::Gauge("ladders need a gauge vanishing at 0".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Input("ladder tolerance must be positive".into()));
    }
    let s1 = 0.25 * 1f64.min(phi.sup()).min(diam);
    let mut l = Ladder {
        phi: phi.clone(),
        rungs: vec![s1],
        tol,
    };
    l.extend_to(count)?;
    Ok(l)
}

impl Ladder {
    pub fn len(&self) -> usize {
        self.rungs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rungs.is_empty()
    }

    /// `s_j`, 1-based.
    pub fn s(&self, j: usize) -> f64 {
        self.rungs[j - 1]
    }

    /// `φ⁻¹(s_j)`
    pub fn phi_inv(&self, j: usize) -> f64 {
        self.phi.inverse(self.s(j)).expect("rungs lie in the range of φ")
    }

    /// `φ⁻¹(s_j)/s_j`
    pub fn ratio(&self, j: usize) -> f64 {
        self.phi_inv(j) / self.s(j)
    }

    /// `|ratio(j+1) − ratio(j)/2| / ratio(j)`
    pub fn residual(&self, j: usize) -> f64 {
        let r = self.ratio(j);
        (self.ratio(j + 1) - r / 2.0).abs() / r
    }

    pub fn extend_to(&mut self, count: usize) -> Result<()> {
        while self.rungs.len() < count {
            let next = self.next_rung()?;
            self.rungs.push(next);
        }
        Ok(())
    }

    fn next_rung(&self) -> Result<f64> {
        let s = *self.rungs.last().expect("ladder is never empty");
        let ratio = |t: f64| self.phi.inverse(t).map(|v| v / t);
        let current = ratio(s)?;
        let target = current / 2.0;
        let slack = self.tol * current;
        let mut hi = s;
        let mut lo = s / 2.0;
        let mut bracketed = false;
        for _ in 0..MAX_HALVINGS {
            let r = ratio(lo)?;
            if (r - target).abs() <= slack {
                return Ok(lo);
            }
            if r < target {
                bracketed = true;
                break;
            }
            hi = lo;
            lo /= 2.0;
            if lo < f64::MIN_POSITIVE {
                break;
            }
        }
        if !bracketed {
            return Err(Error::Gauge(format!("cannot bracket the rung below {s}")));
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = (lo * hi).sqrt();
            let r = ratio(mid)?;
            if (r - target).abs() <= slack {
                return Ok(mid);
            }
            if r < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Gauge(format!("rung below {s} did not converge")))
    }
}

/// Rung selected for an accuracy `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub j: usize,
    pub ratio_j: f64,
    pub ratio_next: f64,
    pub phi_inv_sj: f64,
    /// `ξ⁻¹(ε/K)`, bounded above by `φ⁻¹(s_j)`.
    pub xi_bound: Option<f64>,
}

/// The unique `j ≥ k` with `ratio(j+1) < ε ≤ ratio(j)`.
pub fn select_j(l: &Ladder, epsilon: f64, k: usize, pair: Option<&GaugePair>) -> Result<Selection> {
    if k == 0 || k > l.len() {
        return Err(Error::Input(format!("start index {k} outside 1..={}", l.len())));
    }
    let top = l.ratio(k);
    if !(epsilon > 0.0 && epsilon <= top) {
        return Err(Error::Range {
            value: epsilon,
            lo: 0.0,
            hi: top,
        });
    }
    for j in k..l.len() {
        let next = l.ratio(j + 1);
        if next < epsilon {
            let xi_bound = pair.and_then(|p| p.xi.inverse(epsilon / p.k).ok());
            return Ok(Selection {
                j,
                ratio_j: l.ratio(j),
                ratio_next: next,
                phi_inv_sj: l.phi_inv(j),
                xi_bound,
            });
        }
    }
    Err(Error::LadderExhausted {
        needed: l.len() + 1,
        available: l.len(),
    })
}

/// [`select_j`], extending the ladder up to `max_len` rungs when needed.
pub fn select_j_extending(
    l: &mut Ladder,
    epsilon: f64,
    k: usize,
    pair: Option<&GaugePair>,
    max_len: usize,
) -> Result<Selection> {
    loop {
        match select_j(l, epsilon, k, pair) {
            Err(Error::LadderExhausted { .. }) if l.len() < max_len => {
                l.extend_to((2 * l.len()).min(max_len))?
            }
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::build_pair;

    #[test]
    fn sqrt_ladder_halves() {
        let l = ladder(&Gauge::sqrt(), 2.0, 20, DEFAULT_LADDER_TOL).unwrap();
        for j in 1..=20 {
            assert!((l.s(j) - 0.25 * 2f64.powi(-(j as i32 - 1))).abs() < 1e-10);
        }
        for j in 1..20 {
            assert!(l.residual(j) <= 1e-10);
        }
    }

    #[test]
    fn two_thirds_ladder_quarters() {
        let phi = Gauge::power(1.0, 2.0 / 3.0, 1.0).unwrap();
        let l = ladder(&phi, 2.0, 10, DEFAULT_LADDER_TOL).unwrap();
        for j in 1..10 {
            assert!((l.s(j + 1) / l.s(j) - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn selection_examples() {
        let l = ladder(&Gauge::sqrt(), 2.0, 20, DEFAULT_LADDER_TOL).unwrap();
        assert_eq!(select_j(&l, 0.2, 1, None).unwrap().j, 1);
        assert_eq!(select_j(&l, 0.1, 1, None).unwrap().j, 2);
        assert_eq!(select_j(&l, l.ratio(3), 3, None).unwrap().j, 3);
        assert!(matches!(select_j(&l, 0.3, 1, None), Err(Error::Range { .. })));
        assert!(matches!(
            select_j(&l, 1e-9, 1, None),
            Err(Error::LadderExhausted { .. })
        ));
    }

    #[test]
    fn extension_on_demand() {
        let mut l = ladder(&Gauge::sqrt(), 2.0, 4, DEFAULT_LADDER_TOL).unwrap();
        let sel = select_j_extending(&mut l, 1e-4, 1, None, 64).unwrap();
        assert!(sel.ratio_next < 1e-4 && 1e-4 <= sel.ratio_j);
        assert!(l.len() > 4);
    }

    #[test]
    fn xi_bound_below_phi_inverse() {
        let pair = build_pair(&Gauge::sqrt()).unwrap();
        let l = ladder(&pair.phi, 2.0, 30, DEFAULT_LADDER_TOL).unwrap();
        for eps in [0.05, 0.01, 0.003, 1e-4] {
            if eps > l.ratio(1) {
                continue;
            }
            let sel = select_j(&l, eps, 1, Some(&pair)).unwrap();
            assert!(sel.xi_bound.unwrap() <= sel.phi_inv_sj);
        }
    }

    #[test]
    fn rejects_nonvanishing_gauge() {
        let phi = Gauge::one_plus_power(0.5, 1.0).unwrap();
        assert!(ladder(&phi, 2.0, 5, DEFAULT_LADDER_TOL).is_err());
        assert!(ladder(&Gauge::sqrt(), 2.0, 1, DEFAULT_LADDER_TOL).is_err());
    }
}
