use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mapping::{MapExpr, MEMBERSHIP_TOL};
use crate::space::{ConvexBody, Point};

/// Parameters of a single-centre flat collapse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSpec {
    pub center: Point,
    pub delta: f64,
    pub radius: f64,
}

impl FlatSpec {
    pub fn new(center: Point, delta: f64, radius: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < radius && radius.is_finite()) {
            return Err(param(format!("need 0 < δ < r, got δ={delta}, r={radius}")));
        }
        Ok(FlatSpec {
            center,
            delta,
            radius,
        })
    }
}

/// Map that is constant on `B̄(center, δ)`, the identity off `B(center, r)`
/// and stretches the annulus radially in between.
pub fn flat_collapse(spec: &FlatSpec, body: &ConvexBody) -> Result<Arc<MapExpr>> {
    let FlatSpec {
        center,
        delta,
        radius,
    } = spec;
    if !body.contains_within(center, MEMBERSHIP_TOL) {
        return Err(Error::Domain(format!("collapse centre {center} is not in the body")));
    }
    MapExpr::flat_collapse(vec![center.clone()], *delta, *radius, body.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Norm;

    #[test]
    fn three_branches() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let spec = FlatSpec::new(Point::scalar(0.0), 0.25, 0.5).unwrap();
        let phi = flat_collapse(&spec, &c).unwrap();
        let at = |x: f64| phi.evaluate(&Point::scalar(x), &c).unwrap()[0];
        assert_eq!(at(0.1), 0.0);
        assert_eq!(at(0.75), 0.75);
        assert!((at(0.375) - 0.25).abs() < 1e-15);
        assert!((at(-0.375) + 0.25).abs() < 1e-15);
        assert_eq!(phi.certificate(), 2.0);
    }

    #[test]
    fn parameter_errors() {
        assert!(FlatSpec::new(Point::scalar(0.0), 0.5, 0.5).is_err());
        assert!(FlatSpec::new(Point::scalar(0.0), 0.0, 0.5).is_err());
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let far = FlatSpec::new(Point::scalar(3.0), 0.1, 0.5).unwrap();
        assert!(flat_collapse(&far, &c).is_err());
    }

    #[test]
    fn displacement_bounded_by_delta() {
        let c = ConvexBody::cube(2, -1.0, 1.0, Norm::Inf).unwrap();
        let spec = FlatSpec::new(Point::new(vec![0.2, -0.1]).unwrap(), 0.3, 0.7).unwrap();
        let phi = flat_collapse(&spec, &c).unwrap();
        let mut rng = crate::rng::from_seed(4);
        for _ in 0..1000 {
            let x = c.sample(&mut rng).unwrap();
            let y = phi.evaluate(&x, &c).unwrap();
            assert!(Norm::Inf.dist(&x, &y) <= 0.3 + 1e-12);
        }
    }
}
