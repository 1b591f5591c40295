use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// A point of ℝⁿ. Coordinates are finite by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(input("point must have dimension >= 1"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(input(format!("non-finite coordinate {c}")));
        }
        Ok(Point(coords))
    }

    /// Internal constructor for values computed from finite inputs.
    pub(crate) fn raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim.max(1)])
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Point(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self + t * dir`
    pub fn offset(&self, dir: &Point, t: f64) -> Point {
        Point(self.0.iter().zip(&dir.0).map(|(a, b)| a + t * b).collect())
    }

    pub fn scaled(&self, t: f64) -> Point {
        Point(self.0.iter().map(|a| a * t).collect())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = crate::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        debug_assert_eq!(self.dim(), rhs.dim());
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        debug_assert_eq!(self.dim(), rhs.dim());
        Point(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, t: f64) -> Point {
        self.scaled(t)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Affine combination `(1-t)x + t y` for `t ∈ [0,1]`.
///
/// Each coordinate is clamped to the closed interval spanned by the
/// endpoints, so rounding never leaves an axis-aligned box containing both.
pub fn segment_point(x: &Point, y: &Point, t: f64) -> Result<Point> {
    if x.dim() != y.dim() {
        return Err(input(format!(
            "dimension mismatch: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(input(format!("segment parameter {t} outside [0,1]")));
    }
    Ok(segment_unchecked(x, y, t))
}

pub(crate) fn segment_unchecked(x: &Point, y: &Point, t: f64) -> Point {
    if t == 0.0 {
        return x.clone();
    }
    if t == 1.0 {
        return y.clone();
    }
    Point(
        x.0.iter()
            .zip(&y.0)
            .map(|(&a, &b)| {
                let v = a + t * (b - a);
                v.clamp(a.min(b), a.max(b))
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn segment_examples() {
        assert_eq!(segment_point(&p(&[0., 0.]), &p(&[2., 2.]), 0.5).unwrap(), p(&[1., 1.]));
        assert_eq!(segment_point(&p(&[3., -1.]), &p(&[2., 2.]), 0.0).unwrap(), p(&[3., -1.]));
        let q = segment_point(&p(&[1., 0.]), &p(&[0., 1.]), 0.25).unwrap();
        assert!((q[0] - 0.75).abs() < 1e-15 && (q[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn segment_rejects_bad_parameter() {
        assert!(segment_point(&p(&[0.]), &p(&[1.]), 1.5).is_err());
        assert!(segment_point(&p(&[0.]), &p(&[1.]), -0.1).is_err());
        assert!(segment_point(&p(&[0.]), &p(&[1., 2.]), 0.1).is_err());
    }

    #[test]
    fn json_is_plain_array() {
        let s = serde_json::to_string(&p(&[0.1, -2.0])).unwrap();
        assert_eq!(s, "[0.1,-2.0]");
        let back: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p(&[0.1, -2.0]));
    }
}
