use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration cap of the bisection inverse.
pub const BISECTION_MAX_ITER: usize = 200;
/// Default tolerance `|φ(t) − y|` of the bisection inverse.
pub const BISECTION_TOL: f64 = 1e-12;

/// Increasing piecewise-linear function through the given knots, extended
/// linearly past the last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Input("a piecewise-linear function needs two knots".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Input("knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Input("knot abscissae must increase strictly".into()));
        }
        Ok(PiecewiseLinear { knots })
    }

    fn segment(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|k| k.0 <= t);
        i.clamp(1, self.knots.len() - 1) - 1
    }

    pub fn slope(&self, i: usize) -> f64 {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        (b.1 - a.1) / (b.0 - a.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let (t0, v0) = self.knots[i];
        v0 + self.slope(i) * (t - t0)
    }

    /// Left and right slopes at `t`; they differ only at interior knots.
    pub fn slopes_at(&self, t: f64) -> (f64, f64) {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.0.total_cmp(&t)) {
            Ok(i) if i > 0 && i + 1 < n => (self.slope(i - 1), self.slope(i)),
            _ => {
                let s = self.slope(self.segment(t));
                (s, s)
            }
        }
    }

    /// Inverse on an increasing function.
    pub fn inverse(&self, y: f64) -> f64 {
        let i = self.knots.partition_point(|k| k.1 <= y);
        let i = i.clamp(1, self.knots.len() - 1) - 1;
        let (t0, v0) = self.knots[i];
        t0 + (y - v0) / self.slope(i)
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.knots.windows(2).all(|w| w[1].1 > w[0].1)
    }

    pub fn is_concave(&self) -> bool {
        (1..self.knots.len() - 1).all(|i| self.slope(i) <= self.slope(i - 1))
    }
}

/// Analytic description of a gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeForm {
    /// `coef·t^exponent`
    Power { coef: f64, exponent: f64 },
    /// `t^p / (1 + t^p)`
    Rational { exponent: f64 },
    /// `1 + t^p`
    OnePlusPower { exponent: f64 },
    Table(PiecewiseLinear),
    /// `base` up to `t0`, then the tangent line `value + slope·(t − t0)`.
    Extended {
        base: Box<GaugeForm>,
        t0: f64,
        value: f64,
        slope: f64,
    },
}

fn pow(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t
    } else if p == 0.5 {
        t.sqrt()
    } else {
        t.powf(p)
    }
}

fn root(y: f64, p: f64) -> f64 {
    if p == 1.0 {
        y
    } else if p == 0.5 {
        y * y
    } else {
        y.powf(1.0 / p)
    }
}

impl GaugeForm {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GaugeForm::Power { coef, exponent } => coef * pow(t, *exponent),
            GaugeForm::Rational { exponent } => {
                let u = pow(t, *exponent);
                u / (1.0 + u)
            }
            GaugeForm::OnePlusPower { exponent } => 1.0 + pow(t, *exponent),
            GaugeForm::Table(pl) => pl.eval(t),
            GaugeForm::Extended {
                base,
                t0,
                value,
                slope,
            } => {
                if t < *t0 {
                    base.eval(t)
                } else {
                    value + slope * (t - t0)
                }
            }
        }
    }

    fn inverse(&self, y: f64) -> f64 {
        match self {
            GaugeForm::Power { coef, exponent } => root(y / coef, *exponent),
            GaugeForm::Rational { exponent } => root(y / (1.0 - y), *exponent),
            GaugeForm::OnePlusPower { exponent } => root(y - 1.0, *exponent),
            GaugeForm::Table(pl) => pl.inverse(y),
            GaugeForm::Extended {
                base,
                t0,
                value,
                slope,
            } => {
                if y < *value {
                    base.inverse(y)
                } else {
                    t0 + (y - value) / slope
                }
            }
        }
    }

    /// One-sided derivatives `(φ'(t−), φ'(t+))`.
    pub fn slopes(&self, t: f64) -> (f64, f64) {
        let smooth = |d: f64| (d, d);
        match self {
            GaugeForm::Power { coef, exponent } => smooth(coef * exponent * pow(t, exponent - 1.0)),
            GaugeForm::Rational { exponent } => {
                let u = pow(t, *exponent);
                smooth(exponent * u / t / ((1.0 + u) * (1.0 + u)))
            }
            GaugeForm::OnePlusPower { exponent } => smooth(exponent * pow(t, exponent - 1.0)),
            GaugeForm::Table(pl) => pl.slopes_at(t),
            GaugeForm::Extended {
                base, t0, slope, ..
            } => {
                if t < *t0 {
                    base.slopes(t)
                } else if t == *t0 {
                    (base.slopes(t).0, *slope)
                } else {
                    smooth(*slope)
                }
            }
        }
    }

    /// `lim_{t→0} φ(t)`
    pub fn inf(&self) -> f64 {
        match self {
            GaugeForm::Power { .. } | GaugeForm::Rational { .. } => 0.0,
            GaugeForm::OnePlusPower { .. } => 1.0,
            GaugeForm::Table(pl) => pl.knots[0].1,
            GaugeForm::Extended { base, .. } => base.inf(),
        }
    }

    /// Whether `φ(t)/t` is unbounded as `t → 0`.
    pub fn superlinear_at_zero(&self) -> bool {
        match self {
            GaugeForm::Power { exponent, .. }
            | GaugeForm::Rational { exponent }
            | GaugeForm::OnePlusPower { exponent } => *exponent < 1.0 || self.inf() > 0.0,
            GaugeForm::Table(pl) => pl.knots[0].1 > 0.0,
            GaugeForm::Extended { base, .. } => base.superlinear_at_zero(),
        }
    }

    /// `lim_{t→∞} t/φ(t)` when finite.
    fn ratio_at_infinity(&self) -> Option<f64> {
        match self {
            GaugeForm::Power { coef, exponent } if *exponent == 1.0 => Some(1.0 / coef),
            GaugeForm::OnePlusPower { exponent } if *exponent == 1.0 => Some(1.0),
            GaugeForm::Table(pl) => {
                let s = pl.slope(pl.knots.len() - 2);
                (s > 0.0).then(|| 1.0 / s)
            }
            GaugeForm::Extended { slope, .. } if *slope > 0.0 => Some(1.0 / slope),
            _ => None,
        }
    }

    fn check(&self) -> Result<()> {
        let exponent_ok = |p: f64| p > 0.0 && p <= 1.0;
        let ok = match self {
            GaugeForm::Power { coef, exponent } => *coef > 0.0 && coef.is_finite() && exponent_ok(*exponent),
            GaugeForm::Rational { exponent } | GaugeForm::OnePlusPower { exponent } => exponent_ok(*exponent),
            GaugeForm::Table(pl) => {
                pl.knots[0].0 == 0.0 && pl.knots[0].1 >= 0.0 && pl.is_strictly_increasing() && pl.is_concave()
            }
            GaugeForm::Extended {
                base,
                t0,
                value,
                slope,
            } => {
                base.check()?;
                *t0 > 0.0 && *slope > 0.0 && (base.eval(*t0) - value).abs() <= 1e-12 * value.abs().max(1.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Gauge(format!("invalid gauge parameters: {self:?}")))
        }
    }
}

/// A strictly increasing concave function on `(0, η)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub form: GaugeForm,
    pub eta: f64,
}

impl Gauge {
    pub fn new(form: GaugeForm, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::Gauge(format!("domain bound must be positive, got {eta}")));
        }
        form.check()?;
        Ok(Gauge { form, eta })
    }

    pub fn power(coef: f64, exponent: f64, eta: f64) -> Result<Self> {
        Self::new(GaugeForm::Power { coef, exponent }, eta)
    }

    /// `√t` on `(0, 1)`.
    pub fn sqrt() -> Self {
        Self::power(1.0, 0.5, 1.0).expect("valid gauge")
    }

    pub fn rational(exponent: f64, eta: f64) -> Result<Self> {
        Self::new(GaugeForm::Rational { exponent }, eta)
    }

    pub fn one_plus_power(exponent: f64, eta: f64) -> Result<Self> {
        Self::new(GaugeForm::OnePlusPower { exponent }, eta)
    }

    pub fn table(knots: Vec<(f64, f64)>, eta: f64) -> Result<Self> {
        Self::new(GaugeForm::Table(PiecewiseLinear::new(knots)?), eta)
    }

    /// Same form on the smaller domain `(0, eta)`.
    pub fn restricted(&self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= self.eta) {
            return Err(Error::Gauge(format!("cannot restrict (0,{}) to (0,{eta})", self.eta)));
        }
        Ok(Gauge {
            form: self.form.clone(),
            eta,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.form.eval(t)
    }

    pub fn inf(&self) -> f64 {
        self.form.inf()
    }

    /// `lim_{t→η} φ(t)`
    pub fn sup(&self) -> f64 {
        if self.eta.is_finite() {
            self.eval(self.eta)
        } else {
            match self.form {
                GaugeForm::Rational { .. } => 1.0,
                _ => f64::INFINITY,
            }
        }
    }

    fn check_range(&self, y: f64) -> Result<()> {
        let (lo, hi) = (self.inf(), self.sup());
        if y > lo && y < hi {
            Ok(())
        } else {
            Err(Error::Range { value: y, lo, hi })
        }
    }

    /// `φ⁻¹(y)` from the closed form.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.check_range(y)?;
        Ok(self.form.inverse(y))
    }

    /// `φ⁻¹(y)` by bisection, to `|φ(t) − y| ≤ tol` or the iteration cap.
    pub fn inverse_bisect(&self, y: f64, tol: f64) -> Result<f64> {
        self.check_range(y)?;
        let mut lo = 0.0;
        let mut hi = if self.eta.is_finite() { self.eta } else { 1.0 };
        while self.eval(hi) < y {
            lo = hi;
            hi *= 2.0;
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..BISECTION_MAX_ITER {
            mid = 0.5 * (lo + hi);
            let v = self.eval(mid);
            if (v - y).abs() <= tol {
                break;
            }
            if v < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(mid)
    }

    /// `φ⁻¹(t)/t`
    pub fn inverse_ratio(&self, t: f64) -> Result<f64> {
        Ok(self.inverse(t)? / t)
    }

    pub fn slopes(&self, t: f64) -> (f64, f64) {
        self.form.slopes(t)
    }

    /// Strict increase and midpoint concavity on an `n`-point grid of the domain.
    pub fn check_shape(&self, n: usize) -> (bool, bool) {
        let top = if self.eta.is_finite() { self.eta } else { 1e6 };
        let grid: Vec<f64> = (1..=n).map(|i| top * i as f64 / (n + 1) as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| self.eval(t)).collect();
        let increasing = vals.windows(2).all(|w| w[1] > w[0]);
        let concave = grid.windows(2).zip(vals.windows(2)).all(|(t, v)| {
            self.eval(0.5 * (t[0] + t[1])) >= 0.5 * (v[0] + v[1]) - 1e-10
        });
        (increasing, concave)
    }
}

/// `K(φ) = sup t/φ(t)` over the domain.
pub fn gauge_k(phi: &Gauge) -> Result<f64> {
    if phi.eta.is_finite() {
        let t = phi.eta * (1.0 - 1e-9);
        Ok(t / phi.eval(t))
    } else {
        phi.form
            .ratio_at_infinity()
            .ok_or_else(|| Error::Gauge("t/φ(t) is unbounded on an infinite domain".into()))
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            GaugeForm::Power { coef, exponent } if *coef == 1.0 => write!(f, "pow:{exponent}")?,
            GaugeForm::Power { coef, exponent } => write!(f, "pow:{exponent}:{coef}")?,
            GaugeForm::Rational { exponent } => write!(f, "rational:{exponent}")?,
            GaugeForm::OnePlusPower { exponent } => write!(f, "oneplus:{exponent}")?,
            GaugeForm::Table(pl) => {
                let parts: Vec<String> = pl.knots.iter().map(|(t, v)| format!("{t},{v}")).collect();
                write!(f, "table:{}", parts.join(";"))?
            }
            GaugeForm::Extended { .. } => write!(f, "extended")?,
        }
        write!(f, "@{}", self.eta)
    }
}

impl FromStr for Gauge {
    type Err = Error;

    /// `sqrt`, `pow:p[:coef]`, `rational:p`, `oneplus:p` or `table:t,v;t,v;…`,
    /// each optionally followed by `@eta` (default 1).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("cannot parse gauge '{s}'"));
        let (body, eta) = match s.split_once('@') {
            Some((b, e)) => (b, e.parse::<f64>().map_err(|_| bad())?),
            None => (s, 1.0),
        };
        let mut parts = body.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let num = |i: usize| -> Result<f64> {
            rest.get(i).ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())
        };
        match kind {
            "sqrt" => Gauge::power(1.0, 0.5, eta),
            "pow" => Gauge::power(if rest.len() > 1 { num(1)? } else { 1.0 }, num(0)?, eta),
            "rational" => Gauge::rational(num(0)?, eta),
            "oneplus" => Gauge::one_plus_power(num(0)?, eta),
            "table" => {
                let knots = rest
                    .first()
                    .ok_or_else(bad)?
                    .split(';')
                    .map(|kv| {
                        let (t, v) = kv.split_once(',').ok_or_else(bad)?;
                        Ok((
                            t.trim().parse().map_err(|_| bad())?,
                            v.trim().parse().map_err(|_| bad())?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Gauge::table(knots, eta)
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_examples() {
        assert!((gauge_k(&Gauge::sqrt()).unwrap() - 1.0).abs() < 1e-9);
        assert!((gauge_k(&Gauge::power(1.0, 1.0, 1.0).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((gauge_k(&Gauge::power(2.0, 1.0, 1.0).unwrap()).unwrap() - 0.5).abs() < 1e-15);
        assert!(gauge_k(&Gauge::power(1.0, 0.5, f64::INFINITY).unwrap()).is_err());
        assert_eq!(gauge_k(&Gauge::power(2.0, 1.0, f64::INFINITY).unwrap()).unwrap(), 0.5);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Gauge::sqrt().inverse(0.5).unwrap(), 0.25);
        let r = Gauge::rational(1.0, 2.0).unwrap();
        assert!((r.inverse(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((r.inverse_bisect(0.5, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(matches!(Gauge::sqrt().inverse(1.5), Err(Error::Range { .. })));
        assert!(Gauge::sqrt().inverse(0.0).is_err());
        assert!(Gauge::one_plus_power(0.5, 1.0).unwrap().inverse(0.5).is_err());
    }

    #[test]
    fn closed_form_and_bisection_agree() {
        for g in [
            Gauge::sqrt(),
            Gauge::power(1.0, 2.0 / 3.0, 1.0).unwrap(),
            Gauge::rational(0.5, 1.0).unwrap(),
            Gauge::one_plus_power(0.3, 1.0).unwrap(),
            Gauge::table(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 1.2)], 1.0).unwrap(),
        ] {
            let (lo, hi) = (g.inf(), g.sup());
            for i in 1..100 {
                let y = lo + (hi - lo) * i as f64 / 100.0;
                let a = g.inverse(y).unwrap();
                let b = g.inverse_bisect(y, 1e-13).unwrap();
                assert!((g.eval(a) - y).abs() <= 1e-12, "{g} {y}");
                assert!((g.eval(b) - y).abs() <= 1e-12, "{g} {y}");
            }
        }
    }

    #[test]
    fn shape_flags() {
        assert_eq!(Gauge::sqrt().check_shape(1000), (true, true));
        assert_eq!(Gauge::rational(0.5, 1.0).unwrap().check_shape(1000), (true, true));
        assert!(Gauge::power(1.0, 1.5, 1.0).is_err());
        assert!(Gauge::table(vec![(0.0, 0.0), (0.5, 0.1), (1.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["sqrt", "pow:0.6666666666666666", "rational:0.5@2", "oneplus:0.5", "table:0,0;1,2;2,3@2"] {
            let g: Gauge = s.parse().unwrap();
            let back: Gauge = g.to_string().parse().unwrap();
            assert_eq!(g, back);
        }
        assert!("cube".parse::<Gauge>().is_err());
        assert!("pow:x".parse::<Gauge>().is_err());
    }

    #[test]
    fn table_slopes_at_knots() {
        let pl = PiecewiseLinear::new(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert_eq!(pl.slopes_at(1.0), (2.0, 1.0));
        assert_eq!(pl.slopes_at(0.5), (2.0, 2.0));
        assert_eq!(pl.eval(3.0), 4.0);
        assert_eq!(pl.inverse(2.5), 1.5);
    }
}
