use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::Ladder;
use crate::mapping::{lip_local_scale, MapExpr};
use crate::rng::derive;
use crate::space::{ConvexBody, Point};

pub const DEFAULT_J_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ESetParams {
    pub lambda: f64,
    /// First ladder index examined.
    pub l: usize,
    /// Truncation of the sup over ladder indices.
    pub j_max: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ESetReport {
    pub member: bool,
    pub j_max: usize,
    /// Largest estimate seen and the index where it occurred.
    pub worst: Option<(usize, f64)>,
}

/// Whether the sampled `Lip(f, x, φ⁻¹(s_j))` stays `≤ λ` for all `j ∈ [l, J_max]`.
pub fn e_set_member(
    f: &MapExpr,
    x: &Point,
    ladder: &Ladder,
    p: &ESetParams,
    body: &ConvexBody,
) -> Result<ESetReport> {
    if p.l == 0 || p.l > p.j_max {
        return Err(Error::Input(format!("need 1 ≤ l ≤ J_max, got l={}, J_max={}", p.l, p.j_max)));
    }
    if ladder.len() < p.j_max {
        return Err(Error::LadderExhausted {
            needed: p.j_max,
            available: ladder.len(),
        });
    }
    let mut worst: Option<(usize, f64)> = None;
    for j in p.l..=p.j_max {
        let est = match lip_local_scale(f, x, ladder.phi_inv(j), body, p.samples, derive(p.seed, j as u64)) {
            Ok(e) => e.lower_bound,
            Err(Error::Estimation(_)) => 0.0,
            Err(e) => return Err(e),
        };
        if worst.is_none_or(|(_, w)| est > w) {
            worst = Some((j, est));
        }
        if est > p.lambda {
            return Ok(ESetReport {
                member: false,
                j_max: p.j_max,
                worst,
            });
        }
    }
    Ok(ESetReport {
        member: true,
        j_max: p.j_max,
        worst,
    })
}
