use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::space::{ConvexBody, Norm, Point, SpatialIndex};

/// Slack allowed on domain and range membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Disjoint-ball centres with a lazily built lookup index.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "Vec<Point>", into = "Vec<Point>")]
pub struct Centers {
    points: Vec<Point>,
    index: OnceLock<SpatialIndex>,
}

impl Centers {
    pub fn new(points: Vec<Point>) -> Self {
        Centers {
            points,
            index: OnceLock::new(),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Centre at distance `< radius` from `z`, if any.
    fn lookup(&self, norm: Norm, z: &Point, radius: f64) -> Option<(usize, f64)> {
        if self.points.len() <= 4 {
            return self
                .points
                .iter()
                .enumerate()
                .map(|(i, c)| (i, norm.dist(c, z)))
                .find(|(_, d)| *d < radius);
        }
        self.index
            .get_or_init(|| SpatialIndex::new(&self.points, radius))
            .find_within(&self.points, norm, z, radius)
    }
}

impl PartialEq for Centers {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl From<Vec<Point>> for Centers {
    fn from(v: Vec<Point>) -> Self {
        Centers::new(v)
    }
}

impl From<Centers> for Vec<Point> {
    fn from(c: Centers) -> Self {
        c.points
    }
}

/// Descriptor of a mapping `C → C` built from non-expansive pieces.
///
/// Every node carries a structural Lipschitz bound, see
/// [`MapExpr::certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapExpr {
    Identity,
    Constant {
        value: Point,
    },
    /// `z ↦ anchor + scale·(z − anchor)`
    AffineContraction {
        scale: f64,
        anchor: Point,
    },
    /// `z ↦ factor·z`; needs `0 ∈ C`.
    RadialScale {
        factor: f64,
    },
    /// The flat collapse around each centre: constant on `B̄(x, δ)`, identity
    /// off `B(x, r)`, radial interpolation in between. Balls `B(x, r)` are
    /// pairwise disjoint.
    FlatCollapse {
        centers: Centers,
        delta: f64,
        radius: f64,
    },
    /// Tent bumps on top of `base`: inside `B(x, δ)` the value is
    /// `base(x) + τ(‖z − x‖)·u_x` with `τ(t) = min(t, δ − t)`; `base` must be
    /// constant on every `B̄(x, δ)`.
    Tent {
        base: Arc<MapExpr>,
        centers: Centers,
        directions: Vec<Point>,
        delta: f64,
    },
    /// `weight·left + (1 − weight)·right`
    ConvexCombo {
        weight: f64,
        left: Arc<MapExpr>,
        right: Arc<MapExpr>,
    },
    /// `outer ∘ inner`
    Compose {
        outer: Arc<MapExpr>,
        inner: Arc<MapExpr>,
    },
}

/// Contraction factor that exactly offsets the flat collapse bound:
/// `(1 − δ/r)·(1 + δ/(r − δ)) = 1`.
pub fn flat_rescale(delta: f64, radius: f64) -> f64 {
    1.0 - delta / radius
}

/// Lipschitz bound of the flat collapse, `1 + δ/(r − δ)`.
pub fn flat_bound(delta: f64, radius: f64) -> f64 {
    1.0 + delta / (radius - delta)
}

impl MapExpr {
    pub fn identity() -> Arc<Self> {
        Arc::new(MapExpr::Identity)
    }

    pub fn constant(value: Point) -> Arc<Self> {
        Arc::new(MapExpr::Constant { value })
    }

    pub fn affine_contraction(scale: f64, anchor: Point) -> Result<Arc<Self>> {
        if !(0.0..=1.0).contains(&scale) {
            return Err(param(format!("contraction scale {scale} outside [0,1]")));
        }
        Ok(Arc::new(MapExpr::AffineContraction { scale, anchor }))
    }

    pub fn radial_scale(factor: f64) -> Result<Arc<Self>> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(param(format!("radial factor {factor} outside [0,1]")));
        }
        Ok(Arc::new(MapExpr::RadialScale { factor }))
    }

    /// Multi-centre flat collapse; centres must be `2r`-separated.
    pub fn flat_collapse(
        centers: Vec<Point>,
        delta: f64,
        radius: f64,
        norm: Norm,
    ) -> Result<Arc<Self>> {
        if !(delta > 0.0 && delta < radius && radius.is_finite()) {
            return Err(param(format!("flat collapse needs 0 < δ < r, got δ={delta}, r={radius}")));
        }
        if centers.is_empty() {
            return Err(param("flat collapse needs at least one centre"));
        }
        check_disjoint(&centers, 2.0 * radius, norm)?;
        Ok(Arc::new(MapExpr::FlatCollapse {
            centers: Centers::new(centers),
            delta,
            radius,
        }))
    }

    pub fn tent(
        base: Arc<MapExpr>,
        centers: Vec<Point>,
        directions: Vec<Point>,
        delta: f64,
        norm: Norm,
    ) -> Result<Arc<Self>> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(param(format!("tent radius must be positive, got {delta}")));
        }
        if centers.len() != directions.len() || centers.is_empty() {
            return Err(param("tent needs one direction per centre"));
        }
        for u in &directions {
            if (norm.norm(u) - 1.0).abs() > 1e-12 {
                return Err(param(format!("tent direction {u} is not a unit vector")));
            }
        }
        check_disjoint(&centers, 2.0 * delta, norm)?;
        if !base.collapses_on(&centers, delta) {
            return Err(param(
                "tent base is not provably constant on the tent balls",
            ));
        }
        Ok(Arc::new(MapExpr::Tent {
            base,
            centers: Centers::new(centers),
            directions,
            delta,
        }))
    }

    pub fn convex_combo(weight: f64, left: Arc<MapExpr>, right: Arc<MapExpr>) -> Result<Arc<Self>> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(param(format!("combination weight {weight} outside [0,1]")));
        }
        Ok(Arc::new(MapExpr::ConvexCombo {
            weight,
            left,
            right,
        }))
    }

    pub fn compose(outer: Arc<MapExpr>, inner: Arc<MapExpr>) -> Arc<Self> {
        Arc::new(MapExpr::Compose { outer, inner })
    }

    /// Structural upper bound on `Lip(self)`.
    pub fn certificate(&self) -> f64 {
        match self {
            MapExpr::Identity => 1.0,
            MapExpr::Constant { .. } => 0.0,
            MapExpr::AffineContraction { scale, .. } => *scale,
            MapExpr::RadialScale { factor } => *factor,
            MapExpr::FlatCollapse { delta, radius, .. } => flat_bound(*delta, *radius),
            MapExpr::Tent { base, .. } => base.certificate().max(1.0),
            MapExpr::ConvexCombo {
                weight,
                left,
                right,
            } => {
                let (a, b) = (left.certificate(), right.certificate());
                (weight * a + (1.0 - weight) * b).min(a.max(b))
            }
            MapExpr::Compose { outer, inner } => {
                if let Some(c) = rescaled_flat_certificate(outer, inner) {
                    return c;
                }
                outer.certificate() * inner.certificate()
            }
        }
    }

    /// True when `self` is constant on each closed ball `B̄(x, δ)`, `x ∈ centers`.
    pub fn collapses_on(&self, centers: &[Point], delta: f64) -> bool {
        match self {
            MapExpr::Constant { .. } => true,
            MapExpr::FlatCollapse {
                centers: own,
                delta: d,
                ..
            } => *d >= delta && centers.iter().all(|c| own.points().contains(c)),
            MapExpr::Compose { inner, .. } => inner.collapses_on(centers, delta),
            MapExpr::ConvexCombo { left, right, .. } => {
                left.collapses_on(centers, delta) && right.collapses_on(centers, delta)
            }
            _ => false,
        }
    }

    /// Evaluates at `x ∈ C`.
    pub fn evaluate(&self, x: &Point, body: &ConvexBody) -> Result<Point> {
        if !body.contains_within(x, MEMBERSHIP_TOL) {
            return Err(Error::Domain(format!("{x} is not in the body")));
        }
        Ok(self.eval(x, body.norm()))
    }

    /// Unchecked evaluation for inputs already known to lie in `C`.
    pub fn eval(&self, z: &Point, norm: Norm) -> Point {
        match self {
            MapExpr::Identity => z.clone(),
            MapExpr::Constant { value } => value.clone(),
            MapExpr::AffineContraction { scale, anchor } => {
                anchor.offset(&(z - anchor), *scale)
            }
            MapExpr::RadialScale { factor } => z.scaled(*factor),
            MapExpr::FlatCollapse {
                centers,
                delta,
                radius,
            } => match centers.lookup(norm, z, *radius) {
                None => z.clone(),
                Some((i, d)) => {
                    let x = &centers.points()[i];
                    if d <= *delta {
                        x.clone()
                    } else {
                        let coef = radius * (d - delta) / ((radius - delta) * d);
                        x.offset(&(z - x), coef)
                    }
                }
            },
            MapExpr::Tent {
                base,
                centers,
                directions,
                delta,
            } => match centers.lookup(norm, z, *delta) {
                None => base.eval(z, norm),
                Some((i, d)) => {
                    let x = &centers.points()[i];
                    let apex = base.eval(x, norm);
                    let height = if d < delta / 2.0 { d } else { delta - d };
                    apex.offset(&directions[i], height)
                }
            },
            MapExpr::ConvexCombo {
                weight,
                left,
                right,
            } => {
                let a = left.eval(z, norm);
                let b = right.eval(z, norm);
                Point::raw(
                    a.coords()
                        .iter()
                        .zip(b.coords())
                        .map(|(p, q)| weight * p + (1.0 - weight) * q)
                        .collect(),
                )
            }
            MapExpr::Compose { outer, inner } => outer.eval(&inner.eval(z, norm), norm),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            MapExpr::Tent { base, .. } => 1 + base.depth(),
            MapExpr::ConvexCombo { left, right, .. } => 1 + left.depth().max(right.depth()),
            MapExpr::Compose { outer, inner } => 1 + outer.depth().max(inner.depth()),
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("expression serializes")
    }

    pub fn from_json(s: &str) -> Result<Arc<Self>> {
        Ok(Arc::new(serde_json::from_str(s)?))
    }
}

/// `affine(1 − δ/r) ∘ (f ∘ flat(δ, r))` and `affine(1 − δ/r) ∘ flat(δ, r)` have
/// exact bound `Lip(f)` resp. `1`; the generic product rule would round above.
fn rescaled_flat_certificate(outer: &MapExpr, inner: &MapExpr) -> Option<f64> {
    let MapExpr::AffineContraction { scale, .. } = outer else {
        return None;
    };
    let (rest, flat) = match inner {
        MapExpr::FlatCollapse { .. } => (None, inner),
        MapExpr::Compose { outer: f, inner: flat } => (Some(f.as_ref()), flat.as_ref()),
        _ => return None,
    };
    let MapExpr::FlatCollapse { delta, radius, .. } = flat else {
        return None;
    };
    (*scale == flat_rescale(*delta, *radius)).then(|| rest.map_or(1.0, |f| f.certificate()))
}

fn check_disjoint(centers: &[Point], min_gap: f64, norm: Norm) -> Result<()> {
    let index = SpatialIndex::new(centers, min_gap);
    for (i, c) in centers.iter().enumerate() {
        let mut clash = None;
        index.scan_near(c, |j| {
            if j != i && norm.dist(c, &centers[j]) < min_gap {
                clash = Some(j);
                true
            } else {
                false
            }
        });
        if let Some(j) = clash {
            return Err(param(format!(
                "centres {i} and {j} are closer than {min_gap}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let disc = ConvexBody::ball(p(&[0., 0.]), 1.0, Norm::L2, Norm::L2).unwrap();
        let x = p(&[0.3, 0.3]);
        assert_eq!(MapExpr::identity().evaluate(&x, &disc).unwrap(), x);
        assert_eq!(
            MapExpr::constant(p(&[0., 0.])).evaluate(&x, &disc).unwrap(),
            p(&[0., 0.])
        );
        let m = MapExpr::compose(
            MapExpr::radial_scale(0.5).unwrap(),
            MapExpr::radial_scale(0.8).unwrap(),
        );
        let y = m.evaluate(&p(&[1., 0.]), &disc).unwrap();
        assert!((y[0] - 0.4).abs() < 1e-15 && y[1] == 0.0);
        assert!(m.evaluate(&p(&[1., 1.]), &disc).is_err());
    }

    #[test]
    fn certificate_examples() {
        let flat = MapExpr::flat_collapse(vec![p(&[0.])], 0.25, 0.5, Norm::L2).unwrap();
        assert_eq!(flat.certificate(), 2.0);
        let m = MapExpr::compose(
            MapExpr::radial_scale(0.5).unwrap(),
            MapExpr::radial_scale(0.8).unwrap(),
        );
        assert!((m.certificate() - 0.4).abs() < 1e-15);
        assert_eq!(MapExpr::identity().certificate(), 1.0);
        assert_eq!(MapExpr::constant(p(&[0.])).certificate(), 0.0);
    }

    #[test]
    fn rescaled_flat_is_exactly_nonexpansive() {
        for (d, r) in [(0.1, 0.3), (1.0 / 3.0, 0.7), (0.0123, 0.25)] {
            let flat = MapExpr::flat_collapse(vec![p(&[0.])], d, r, Norm::L2).unwrap();
            let g = MapExpr::compose(
                MapExpr::affine_contraction(flat_rescale(d, r), p(&[0.])).unwrap(),
                flat,
            );
            assert_eq!(g.certificate(), 1.0);
        }
    }

    #[test]
    fn convex_combo_certificate_never_exceeds_max() {
        let a = MapExpr::identity();
        let b = MapExpr::identity();
        for w in [0.1, 0.3, 0.7, 0.123456789] {
            let c = MapExpr::convex_combo(w, a.clone(), b.clone()).unwrap();
            assert!(c.certificate() <= 1.0);
        }
    }

    #[test]
    fn flat_collapse_values() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let flat = MapExpr::flat_collapse(vec![p(&[0.])], 0.25, 0.5, Norm::L2).unwrap();
        assert_eq!(flat.evaluate(&p(&[0.1]), &c).unwrap(), p(&[0.]));
        assert_eq!(flat.evaluate(&p(&[0.75]), &c).unwrap(), p(&[0.75]));
        let mid = flat.evaluate(&p(&[0.375]), &c).unwrap();
        assert!((mid[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn tent_requires_collapsing_base() {
        let r = MapExpr::tent(
            MapExpr::identity(),
            vec![p(&[0.])],
            vec![p(&[1.])],
            0.1,
            Norm::L2,
        );
        assert!(r.is_err());
        let ok = MapExpr::tent(
            MapExpr::constant(p(&[0.])),
            vec![p(&[0.])],
            vec![p(&[1.])],
            0.1,
            Norm::L2,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn overlapping_centres_rejected() {
        assert!(MapExpr::flat_collapse(vec![p(&[0.]), p(&[0.5])], 0.1, 0.3, Norm::L2).is_err());
        assert!(MapExpr::flat_collapse(vec![p(&[0.]), p(&[0.6])], 0.1, 0.3, Norm::L2).is_ok());
    }

    #[test]
    fn json_tree_round_trip() {
        let m = MapExpr::compose(
            MapExpr::affine_contraction(0.5, p(&[0.0])).unwrap(),
            MapExpr::flat_collapse(vec![p(&[0.0])], 0.5, 1.0, Norm::L2).unwrap(),
        );
        let s = m.to_json();
        assert!(s.starts_with("{\"kind\":\"compose\""));
        let back = MapExpr::from_json(&s).unwrap();
        assert_eq!(*back, *m);
    }
}
