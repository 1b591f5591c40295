use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Point;
use crate::error::{input, Error, Result};

/// An ℓp norm on ℝⁿ, `p ∈ [1, ∞]`. `p = ∞` is carried symbolically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    P(f64),
    Inf,
}

impl Norm {
    pub const L1: Norm = Norm::P(1.0);
    pub const L2: Norm = Norm::P(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Norm::Inf)
        } else if p >= 1.0 {
            Ok(Norm::P(p))
        } else {
            Err(input(format!("norm exponent must be >= 1, got {p}")))
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Norm::P(p) => p,
            Norm::Inf => f64::INFINITY,
        }
    }

    /// Norm of a coordinate slice; assumes finite input.
    pub fn of(&self, v: &[f64]) -> f64 {
        match *self {
            Norm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::P(1.0) => v.iter().map(|x| x.abs()).sum(),
            Norm::P(p) => {
                let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                if p == 2.0 {
                    m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
                } else {
                    m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
                }
            }
        }
    }

    pub fn norm(&self, p: &Point) -> f64 {
        self.of(p.coords())
    }

    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        debug_assert_eq!(a.dim(), b.dim());
        match *self {
            Norm::Inf => a
                .coords()
                .iter()
                .zip(b.coords())
                .fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            Norm::P(1.0) => a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| (x - y).abs())
                .sum(),
            _ => self.norm(&(a - b)),
        }
    }

    /// `v / ‖v‖`, or `None` for the zero vector.
    pub fn normalize(&self, v: &Point) -> Option<Point> {
        let n = self.norm(v);
        (n > 0.0).then(|| v.scaled(1.0 / n))
    }

    /// `max{‖u‖_self : ‖u‖_other = 1}` in dimension `dim`.
    pub fn max_ratio_over(&self, other: Norm, dim: usize) -> f64 {
        let (p, q) = (self.exponent(), other.exponent());
        if p >= q {
            1.0
        } else {
            let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
            (dim as f64).powf(inv(p) - inv(q))
        }
    }
}

/// Checked ℓp norm of raw coordinates.
pub fn norm_eval(coords: &[f64], norm: Norm) -> Result<f64> {
    if coords.is_empty() {
        return Err(input("dimension must be >= 1"));
    }
    if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
        return Err(input(format!("non-finite coordinate {c}")));
    }
    Ok(norm.of(coords))
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(Norm::Inf),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| input(format!("cannot parse norm exponent '{s}'")))?;
                Norm::new(p)
            }
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Norm::P(p) => s.serialize_f64(*p),
            Norm::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Norm::new(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert_eq!(norm_eval(&[3.0, 4.0], Norm::L2).unwrap(), 5.0);
        assert_eq!(norm_eval(&[3.0, -4.0], Norm::Inf).unwrap(), 4.0);
        assert_eq!(norm_eval(&[3.0, -4.0], Norm::L1).unwrap(), 7.0);
    }

    #[test]
    fn non_integer_exponent() {
        let n = Norm::new(3.0).unwrap();
        let v = n.of(&[1.0, 1.0]);
        assert!((v - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(norm_eval(&[1.0, f64::INFINITY], Norm::L2).is_err());
        assert!(norm_eval(&[], Norm::L2).is_err());
        assert!(Norm::new(0.5).is_err());
    }

    #[test]
    fn parse_and_serde() {
        assert_eq!("inf".parse::<Norm>().unwrap(), Norm::Inf);
        assert_eq!("1.5".parse::<Norm>().unwrap(), Norm::P(1.5));
        assert_eq!(serde_json::to_string(&Norm::Inf).unwrap(), "\"inf\"");
        let n: Norm = serde_json::from_str("2.0").unwrap();
        assert_eq!(n, Norm::L2);
    }

    #[test]
    fn ratio_between_norms() {
        // unit ℓ∞ ball has ℓ2 diameter 2√n
        assert!((Norm::L2.max_ratio_over(Norm::Inf, 4) - 2.0).abs() < 1e-15);
        assert_eq!(Norm::Inf.max_ratio_over(Norm::L2, 4), 1.0);
    }
}
