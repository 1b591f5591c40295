use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::direction::DirectionField;
use crate::error::{param, Result};
use crate::mapping::{flat_rescale, MapExpr};
use crate::space::{ConvexBody, Net, Point};

/// Scalar parameters of a village perturbation at separation `s` and accuracy `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VillageSpec {
    pub s: f64,
    pub epsilon: f64,
    pub diam: f64,
    /// Collapse radius, `s/2`.
    pub radius: f64,
    /// Collapse and tent radius, `εr/(3(1 + diam))`.
    pub delta: f64,
    /// Radius on which the perturbation is an isometry at net points, `εs/(12(1 + diam))`.
    pub bump_radius: f64,
}

impl VillageSpec {
    pub fn new(s: f64, epsilon: f64, diam: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(param(format!("separation {s} outside (0,1)")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(param(format!("accuracy {epsilon} outside (0,1)")));
        }
        if !(diam > 0.0 && diam.is_finite()) {
            return Err(param(format!("diameter {diam} must be positive")));
        }
        let radius = s / 2.0;
        let delta = epsilon * radius / (3.0 * (1.0 + diam));
        let bump_radius = epsilon * s / (12.0 * (1.0 + diam));
        assert_eq!(bump_radius, delta / 2.0);
        Ok(VillageSpec {
            s,
            epsilon,
            diam,
            radius,
            delta,
            bump_radius,
        })
    }
}

/// A perturbation `g` of a base map together with everything used to build it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Village {
    pub spec: VillageSpec,
    pub base: Arc<MapExpr>,
    pub net: Net,
    pub anchor: Point,
    pub field: DirectionField,
    /// Tent directions `u_x`, one per net point.
    pub directions: Vec<Point>,
    pub map: Arc<MapExpr>,
}

/// Builds `g` from `f`: collapse the net balls flat, contract towards the
/// anchor by `1 − δ/r`, then raise a unit-slope tent on every collapsed ball.
pub fn village_perturb(
    base: Arc<MapExpr>,
    net: &Net,
    spec: VillageSpec,
    body: &ConvexBody,
) -> Result<Village> {
    let norm = body.norm();
    if net.len() < 2 {
        return Err(param("village net needs at least two points"));
    }
    if let Some((i, j, d)) = net.separation_violation(norm) {
        return Err(param(format!("net points {i} and {j} are {d} apart, below s")));
    }
    if net.separation < spec.s {
        return Err(param(format!(
            "net separation {} below village separation {}",
            net.separation, spec.s
        )));
    }
    let anchor = body.anchor();
    let field = DirectionField::auto(body, spec.s)?;
    let flat = MapExpr::flat_collapse(net.points.clone(), spec.delta, spec.radius, norm)?;
    let collapsed = MapExpr::compose(base.clone(), flat);
    let contracted = MapExpr::compose(
        MapExpr::affine_contraction(flat_rescale(spec.delta, spec.radius), anchor.clone())?,
        collapsed,
    );
    let directions: Vec<Point> = net
        .points
        .iter()
        .map(|x| field.at(&contracted.eval(x, norm)))
        .collect();
    let map = MapExpr::tent(
        contracted,
        net.points.clone(),
        directions.clone(),
        spec.delta,
        norm,
    )?;
    Ok(Village {
        spec,
        base,
        net: net.clone(),
        anchor,
        field,
        directions,
        map,
    })
}

/// A net point `x` and its partner `y_x = x + (εs/(24(1 + diam)))·e_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub x: Point,
    pub y: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetWitnesses {
    pub beta: f64,
    /// Lower bound on the `(x, y_x)` quotient of any `h` within `βε` of `g`.
    pub bound: f64,
    pub pairs: Vec<WitnessPair>,
}

/// Tolerance `β = (1 − λ)s/(96(1 + diam))` of the net witnesses.
pub fn net_witness_beta(lambda: f64, s: f64, diam: f64) -> f64 {
    (1.0 - lambda) * s / (96.0 * (1.0 + diam))
}

/// `1 − 48β(1 + diam)/s`
pub fn net_witness_bound(beta: f64, s: f64, diam: f64) -> f64 {
    1.0 - 48.0 * beta * (1.0 + diam) / s
}

/// Step from a net point to its witness partner, `εs/(24(1 + diam))`.
pub fn witness_offset(epsilon: f64, s: f64, diam: f64) -> f64 {
    epsilon * s / (24.0 * (1.0 + diam))
}

/// Witness pairs for the perturbation `g` of the net `net` at `(s, ε)`.
pub fn net_witnesses(
    g: &MapExpr,
    net: &Net,
    s: f64,
    epsilon: f64,
    lambda: f64,
    body: &ConvexBody,
) -> Result<NetWitnesses> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(param(format!("λ = {lambda} outside (0,1)")));
    }
    let spec = VillageSpec::new(s, epsilon, body.diameter())?;
    match g {
        MapExpr::Tent { centers, delta, .. }
            if centers.points() == net.points.as_slice() && *delta == spec.delta => {}
        _ => {
            return Err(param(
                "map is not the village perturbation of this net at these parameters",
            ))
        }
    }
    let field = DirectionField::auto(body, s)?;
    let diam = body.diameter();
    let step = witness_offset(epsilon, s, diam);
    let beta = net_witness_beta(lambda, s, diam);
    let pairs = net
        .points
        .iter()
        .map(|x| WitnessPair {
            x: x.clone(),
            y: x.offset(&field.at(x), step),
        })
        .collect();
    Ok(NetWitnesses {
        beta,
        bound: net_witness_bound(beta, s, diam),
        pairs,
    })
}
