use super::form::PiecewiseLinear;
use crate::error::{Error, Result};

/// Upper concave envelope of the points `(ts[i], vals[i])` together with the
/// origin. Collinear points are dropped so every interior knot is a strict
/// corner.
pub fn least_concave_majorant(ts: &[f64], vals: &[f64]) -> Result<PiecewiseLinear> {
    if ts.len() != vals.len() {
        return Err(Error::Input("abscissae and values differ in length".into()));
    }
    if ts.len() < 2 {
        return Err(Error::Input("need at least two grid points".into()));
    }
    if ts[0] <= 0.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("grid must be positive and strictly increasing".into()));
    }
    if vals.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Input("values must be positive and finite".into()));
    }
    let mut hull: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for p in ts.iter().copied().zip(vals.iter().copied()) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // b is not above the chord a→p
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    PiecewiseLinear::new(hull)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn chord_of_convex_graph() {
        let ts = grid(100);
        let vals: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let m = least_concave_majorant(&ts, &vals).unwrap();
        assert_eq!(m.knots.len(), 2);
        assert!((m.eval(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn concave_data_is_fixed() {
        let ts = grid(200);
        let vals: Vec<f64> = ts.iter().map(|t| t.sqrt()).collect();
        let m = least_concave_majorant(&ts, &vals).unwrap();
        for (t, v) in ts.iter().zip(&vals) {
            assert!((m.eval(*t) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn majorizes_and_is_minimal() {
        let ts = grid(300);
        let vals: Vec<f64> = ts.iter().map(|t| 1.0 + (20.0 * t).sin().abs() * t).collect();
        let m = least_concave_majorant(&ts, &vals).unwrap();
        assert!(m.is_concave());
        for (t, v) in ts.iter().zip(&vals) {
            assert!(m.eval(*t) >= v - 1e-12);
        }
        for skip in 1..m.knots.len() - 1 {
            let mut knots = m.knots.clone();
            let (t, v) = knots.remove(skip);
            let reduced = PiecewiseLinear::new(knots).unwrap();
            assert!(reduced.eval(t) < v);
        }
    }

    #[test]
    fn input_errors() {
        assert!(least_concave_majorant(&[1.0], &[1.0]).is_err());
        assert!(least_concave_majorant(&[1.0, 0.5], &[1.0, 1.0]).is_err());
        assert!(least_concave_majorant(&[0.5, 1.0], &[1.0, -1.0]).is_err());
    }
}
