use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::eset::{e_set_member, ESetParams};
use super::oracle::sample_in_ball;
use crate::error::{param, Error, Result};
use crate::gauge::{select_j, GaugePair, Ladder};
use crate::mapping::MapExpr;
use crate::perturb::{village_perturb, Village, VillageSpec};
use crate::rng::{derive, from_seed};
use crate::space::{ConvexBody, Net, Point};

/// Upper porosity constant `α = (1 − λ)/(48(1 + diam))` of the exceptional sets.
pub fn hole_alpha(lambda: f64, diam: f64) -> f64 {
    (1.0 - lambda) / (48.0 * (1.0 + diam))
}

/// `β = (1 − λ)²(1 + λ)/(97(3 − λ)K(1 + diam))`
pub fn dual_beta(lambda: f64, k: f64, diam: f64) -> f64 {
    (1.0 - lambda).powi(2) * (1.0 + lambda) / (97.0 * (3.0 - lambda) * k * (1.0 + diam))
}

/// Radius `(1 − λ)φ⁻¹(s_j)/(48(1 + diam))` of the probe balls around net points.
pub fn dual_probe_radius(lambda: f64, phi_inv_sj: f64, diam: f64) -> f64 {
    (1.0 - lambda) * phi_inv_sj / (48.0 * (1.0 + diam))
}

/// Step `φ⁻¹(s_j)/(24(1 + diam))` from a net point to its partner `z`.
pub fn dual_z_offset(phi_inv_sj: f64, diam: f64) -> f64 {
    phi_inv_sj / (24.0 * (1.0 + diam))
}

/// `((1 + λ)² − 96(3 − λ)βK(1 + diam)) / ((1 + λ)(3 − λ))`
pub fn dual_closing(lambda: f64, beta: f64, k: f64, diam: f64) -> f64 {
    ((1.0 + lambda).powi(2) - 96.0 * (3.0 - lambda) * beta * k * (1.0 + diam))
        / ((1.0 + lambda) * (3.0 - lambda))
}

/// Closing bound minus `λ` at the prescribed `β`.
pub fn dual_margin(lambda: f64, k: f64, diam: f64) -> f64 {
    dual_closing(lambda, dual_beta(lambda, k, diam), k, diam) - lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    /// Number of perturbed maps `h` tested.
    pub maps: usize,
    /// Sampled points `y` per net point, besides the net point itself.
    pub probes: usize,
    /// Net points examined, in net order.
    pub max_points: usize,
    pub seed: u64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            maps: 20,
            probes: 20,
            max_points: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWitnessReport {
    pub j: usize,
    pub s_j: f64,
    pub phi_inv_sj: f64,
    pub beta: f64,
    /// `ξ⁻¹(βε)`, the sup-distance allowed for tested maps.
    pub tolerance: f64,
    pub probe_radius: f64,
    pub z_offset: f64,
    pub closing_bound: f64,
    pub min_quotient: f64,
    /// Largest `‖z − y‖/φ⁻¹(s_j)`; must stay below 1.
    pub max_reach: f64,
    pub passed: bool,
}

/// Perturbs `f` at the rung selected for `ε` and checks that every map within
/// `ξ⁻¹(βε)` of the perturbation has quotient `> λ` between each probe `y`
/// near a net point `x` and the partner `z` of `x`.
#[allow(clippy::too_many_arguments)]
pub fn dual_witness(
    f: Arc<MapExpr>,
    epsilon: f64,
    lambda: f64,
    ladder: &Ladder,
    nets: &[Net],
    pair: &GaugePair,
    k: usize,
    body: &ConvexBody,
    cfg: &WitnessConfig,
) -> Result<(Village, DualWitnessReport)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(param(format!("λ = {lambda} outside (0,1)")));
    }
    if f.certificate() > 1.0 {
        return Err(param("base map is not certified non-expansive"));
    }
    let top = ladder.ratio(k).min(1.0);
    if !(epsilon > 0.0 && epsilon < top) {
        return Err(Error::Range {
            value: epsilon,
            lo: 0.0,
            hi: top,
        });
    }
    let sel = select_j(ladder, epsilon, k, Some(pair))?;
    let j = sel.j;
    let net = nets.get(j - 1).ok_or_else(|| {
        Error::Input(format!("no net supplied for rung {j}"))
    })?;
    let s_j = ladder.s(j);
    let diam = body.diameter();
    let village = village_perturb(f, net, VillageSpec::new(s_j, epsilon, diam)?, body)?;
    let norm = body.norm();
    let beta = dual_beta(lambda, pair.k, diam);
    let tolerance = pair.xi.inverse(beta * epsilon)?;
    let phi_inv_sj = sel.phi_inv_sj;
    let probe_radius = dual_probe_radius(lambda, phi_inv_sj, diam);
    let z_offset = dual_z_offset(phi_inv_sj, diam);
    let closing_bound = dual_closing(lambda, beta, pair.k, diam);

    let mut rng = from_seed(cfg.seed);
    let tau = tolerance / diam;
    let maps: Vec<Arc<MapExpr>> = (0..cfg.maps)
        .map(|_| {
            let c = body.sample(&mut rng)?;
            MapExpr::convex_combo(1.0 - tau, village.map.clone(), MapExpr::constant(c))
        })
        .collect::<Result<_>>()?;
    let mut min_quotient = f64::INFINITY;
    let mut max_reach: f64 = 0.0;
    for x in net.points.iter().take(cfg.max_points) {
        let z = x.offset(&village.field.at(x), z_offset);
        let mut ys = vec![x.clone()];
        ys.extend((0..cfg.probes).filter_map(|_| sample_in_ball(body, x, probe_radius, &mut rng)));
        for y in &ys {
            let zy = norm.dist(&z, y);
            max_reach = max_reach.max(zy / phi_inv_sj);
            for h in &maps {
                let q = norm.dist(&h.eval(&z, norm), &h.eval(y, norm)) / zy;
                min_quotient = min_quotient.min(q);
            }
        }
    }
    let passed = min_quotient > lambda && min_quotient >= closing_bound - 1e-9 && max_reach < 1.0;
    let report = DualWitnessReport {
        j,
        s_j,
        phi_inv_sj,
        beta,
        tolerance,
        probe_radius,
        z_offset,
        closing_bound,
        min_quotient,
        max_reach,
        passed,
    };
    Ok((village, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleReport {
    pub alpha: f64,
    pub points: usize,
    /// Sampled points that themselves belong to the exceptional set.
    pub in_set: usize,
    pub holes: usize,
    /// Largest hole radius over the probe radius; at most 1.
    pub max_radius_ratio: f64,
    /// Probes that landed in the exceptional set; must be 0.
    pub violations: usize,
    pub passed: bool,
}

/// For each `z`, takes the nearest net point `x` and checks that
/// `B(x, φ⁻¹(α‖x − z‖))` avoids the exceptional set of `g`.
#[allow(clippy::too_many_arguments)]
pub fn verify_holes(
    g: &MapExpr,
    net: &Net,
    j: usize,
    ladder: &Ladder,
    params: &ESetParams,
    body: &ConvexBody,
    zs: &[Point],
    probes: usize,
) -> Result<HoleReport> {
    if !(params.l <= j && j <= params.j_max) {
        return Err(param(format!("rung {j} outside [l, J_max] = [{}, {}]", params.l, params.j_max)));
    }
    let norm = body.norm();
    let diam = body.diameter();
    let alpha = hole_alpha(params.lambda, diam);
    let s_j = ladder.s(j);
    let probe_radius = dual_probe_radius(params.lambda, ladder.phi_inv(j), diam);
    let mut rng = from_seed(derive(params.seed, 0x45));
    let mut report = HoleReport {
        alpha,
        points: zs.len(),
        in_set: 0,
        holes: 0,
        max_radius_ratio: 0.0,
        violations: 0,
        passed: false,
    };
    let is_member = |y: &Point| e_set_member(g, y, ladder, params, body).map(|r| r.member);
    for z in zs {
        if is_member(z)? {
            report.in_set += 1;
        }
        let (i, d) = net.nearest(norm, z);
        if d > s_j {
            return Err(Error::Geometry(format!("net is not {s_j}-dense at {z}")));
        }
        if d == 0.0 {
            continue;
        }
        let radius = ladder.phi.inverse(alpha * d)?;
        report.max_radius_ratio = report.max_radius_ratio.max(radius / probe_radius);
        let x = &net.points[i];
        let mut ys = vec![x.clone()];
        ys.extend((0..probes).filter_map(|_| sample_in_ball(body, x, radius, &mut rng)));
        for y in &ys {
            if is_member(y)? {
                report.violations += 1;
            }
        }
        report.holes += 1;
    }
    report.passed = report.violations == 0 && report.max_radius_ratio <= 1.0;
    Ok(report)
}
