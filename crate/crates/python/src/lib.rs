//! Python bindings: bodies, map expressions, gauges and the main estimators.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use nxlab_core::gauge::{self, DEFAULT_LADDER_TOL};
use nxlab_core::harness::{self, ExperimentConfig};
use nxlab_core::mapping::{self, GeneratorConfig};
use nxlab_core::perturb::{self, VillageSpec};
use nxlab_core::porosity;
use nxlab_core::rng::from_seed;
use nxlab_core::space::{self, Net, Norm, Point};
use nxlab_core::Error;

struct NxError(Error);

impl From<Error> for NxError {
    fn from(e: Error) -> Self {
        NxError(e)
    }
}

impl From<NxError> for PyErr {
    fn from(NxError(e): NxError) -> PyErr {
        match e {
            Error::Io(_) => PyIOError::new_err(e.to_string()),
            _ => PyValueError::new_err(e.to_string()),
        }
    }
}

type NxResult<T> = Result<T, NxError>;

fn point(coords: Vec<f64>) -> NxResult<Point> {
    Ok(Point::new(coords)?)
}

fn points(coords: Vec<Vec<f64>>) -> NxResult<Vec<Point>> {
    coords.into_iter().map(point).collect()
}

fn norm(p: f64) -> NxResult<Norm> {
    Ok(Norm::new(p)?)
}

#[pyclass(name = "ConvexBody", frozen)]
#[derive(Clone)]
struct PyBody {
    inner: space::ConvexBody,
}

#[pymethods]
impl PyBody {
    /// Parses `box[:lo:hi]`, `ball[:r[:p]]`, `simplex` or `hull:x,y;…`.
    #[new]
    #[pyo3(signature = (desc, dim=None, p=2.0))]
    fn new(desc: &str, dim: Option<usize>, p: f64) -> NxResult<Self> {
        Ok(PyBody {
            inner: harness::parse_body(desc, dim, norm(p)?)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (dim, lo=0.0, hi=1.0, p=2.0))]
    fn cube(dim: usize, lo: f64, hi: f64, p: f64) -> NxResult<Self> {
        Ok(PyBody {
            inner: space::ConvexBody::cube(dim, lo, hi, norm(p)?)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (center, radius, p=2.0))]
    fn ball(center: Vec<f64>, radius: f64, p: f64) -> NxResult<Self> {
        let n = norm(p)?;
        Ok(PyBody {
            inner: space::ConvexBody::ball(point(center)?, radius, n, n)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (vertices, p=2.0))]
    fn hull(vertices: Vec<Vec<f64>>, p: f64) -> NxResult<Self> {
        Ok(PyBody {
            inner: space::ConvexBody::hull(points(vertices)?, norm(p)?)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    fn contains(&self, x: Vec<f64>) -> NxResult<bool> {
        Ok(self.inner.contains(&point(x)?))
    }

    fn sample(&self, count: usize, seed: u64) -> NxResult<Vec<Vec<f64>>> {
        let mut rng = from_seed(seed);
        (0..count)
            .map(|_| Ok(self.inner.sample(&mut rng)?.into_coords()))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("ConvexBody({})", self.inner.to_json())
    }
}

#[pyclass(name = "MapExpr", frozen)]
#[derive(Clone)]
struct PyMap {
    inner: Arc<mapping::MapExpr>,
}

#[pymethods]
impl PyMap {
    #[staticmethod]
    fn identity() -> Self {
        PyMap {
            inner: mapping::MapExpr::identity(),
        }
    }

    #[staticmethod]
    fn constant(value: Vec<f64>) -> NxResult<Self> {
        Ok(PyMap {
            inner: mapping::MapExpr::constant(point(value)?),
        })
    }

    #[staticmethod]
    fn affine_contraction(scale: f64, anchor: Vec<f64>) -> NxResult<Self> {
        Ok(PyMap {
            inner: mapping::MapExpr::affine_contraction(scale, point(anchor)?)?,
        })
    }

    /// Random expression mapping `body` into itself with certificate at most 1.
    #[staticmethod]
    fn random(body: &PyBody, seed: u64) -> NxResult<Self> {
        Ok(PyMap {
            inner: mapping::random_nonexpansive(&GeneratorConfig::default(), &body.inner, seed)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> NxResult<Self> {
        Ok(PyMap {
            inner: mapping::MapExpr::from_json(text)?,
        })
    }

    #[getter]
    fn certificate(&self) -> f64 {
        self.inner.certificate()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn __call__(&self, x: Vec<f64>, body: &PyBody) -> NxResult<Vec<f64>> {
        Ok(self.inner.evaluate(&point(x)?, &body.inner)?.into_coords())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

#[pyclass(name = "Gauge", frozen)]
#[derive(Clone)]
struct PyGauge {
    inner: gauge::Gauge,
}

#[pymethods]
impl PyGauge {
    /// `sqrt`, `pow:p[:coef]`, `rational:p`, `oneplus:p` or `table:t,v;…`, optionally `@eta`.
    #[new]
    fn new(spec: &str) -> NxResult<Self> {
        Ok(PyGauge { inner: spec.parse()? })
    }

    fn __call__(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn inverse(&self, y: f64) -> NxResult<f64> {
        Ok(self.inner.inverse(y)?)
    }

    #[getter]
    fn inf(&self) -> f64 {
        self.inner.inf()
    }

    #[getter]
    fn sup(&self) -> f64 {
        self.inner.sup()
    }

    fn __repr__(&self) -> String {
        format!("Gauge('{}')", self.inner)
    }
}

#[pyfunction]
#[pyo3(signature = (coords, p=2.0))]
fn norm_eval(coords: Vec<f64>, p: f64) -> NxResult<f64> {
    Ok(space::norm_eval(&coords, norm(p)?)?)
}

/// Greedy `s`-separated net over the candidates, or over a grid of the body when none are given.
#[pyfunction]
#[pyo3(signature = (body, s, candidates=None))]
fn greedy_net(body: &PyBody, s: f64, candidates: Option<Vec<Vec<f64>>>) -> NxResult<Vec<Vec<f64>>> {
    let cands = match candidates {
        Some(c) => points(c)?,
        None => space::grid_candidates(&body.inner, s / 4.0)?,
    };
    let net = space::greedy_net(&body.inner, s, cands)?;
    Ok(net.points.into_iter().map(Point::into_coords).collect())
}

/// `(lower_bound, samples)` of the sampled global Lipschitz constant.
#[pyfunction]
fn lip_global_est(map: &PyMap, body: &PyBody, pairs: usize, seed: u64) -> NxResult<(f64, usize)> {
    let e = mapping::lip_global_est(&map.inner, &body.inner, pairs, seed)?;
    Ok((e.lower_bound, e.samples))
}

/// `(lower_bound, samples)` of the sampled Lipschitz constant at `x` on scale `r`.
#[pyfunction]
fn lip_local_est(
    map: &PyMap,
    x: Vec<f64>,
    r: f64,
    body: &PyBody,
    samples: usize,
    seed: u64,
) -> NxResult<(f64, usize)> {
    let e = mapping::lip_local_scale(&map.inner, &point(x)?, r, &body.inner, samples, seed)?;
    Ok((e.lower_bound, e.samples))
}

#[pyfunction]
fn sup_dist_est(f: &PyMap, g: &PyMap, body: &PyBody, samples: usize, seed: u64) -> NxResult<f64> {
    Ok(mapping::sup_dist_est(&f.inner, &g.inner, &body.inner, samples, seed)?)
}

/// Village perturbation of `map` over an `s`-separated net.
#[pyfunction]
fn village_perturb(map: &PyMap, net: Vec<Vec<f64>>, s: f64, epsilon: f64, body: &PyBody) -> NxResult<PyMap> {
    let b = &body.inner;
    let net = Net::new(points(net)?, s, b.norm())?;
    let spec = VillageSpec::new(s, epsilon, b.diameter())?;
    let v = perturb::village_perturb(map.inner.clone(), &net, spec, b)?;
    Ok(PyMap { inner: v.map })
}

/// `(phi, xi, k)` with `t/k ≤ φ(t)ξ(t) ≤ kt` on `(0, 1/k)`.
#[pyfunction]
fn build_pair(phi: &PyGauge) -> NxResult<(PyGauge, PyGauge, f64)> {
    let p = gauge::build_pair(&phi.inner)?;
    Ok((PyGauge { inner: p.phi }, PyGauge { inner: p.xi }, p.k))
}

/// Rungs `s_1 > s_2 > …` on which `φ⁻¹(s)/s` halves.
#[pyfunction]
#[pyo3(signature = (phi, diam, count=20))]
fn ladder(phi: &PyGauge, diam: f64, count: usize) -> NxResult<Vec<f64>> {
    Ok(gauge::ladder(&phi.inner, diam, count, DEFAULT_LADDER_TOL)?.rungs)
}

/// Largest hole radius found inside `B(q, r)` for a named set or a list of points.
#[pyfunction]
#[pyo3(signature = (set, q, r, body, trials=1000, seed=0))]
fn gamma_est(set: &str, q: Vec<f64>, r: f64, body: &PyBody, trials: usize, seed: u64) -> NxResult<Option<f64>> {
    let oracle = harness::named_set(set, body.inner.clone())?;
    Ok(porosity::gamma_est(&point(q)?, r, oracle.as_ref(), trials, seed))
}

/// Runs a verification suite and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (suite="all", trials=None, seed=0))]
fn run_verify(suite: &str, trials: Option<usize>, seed: u64) -> NxResult<String> {
    let cfg = ExperimentConfig {
        suite: suite.into(),
        trials,
        seed,
        ..Default::default()
    };
    Ok(harness::run_verify(&cfg)?.to_json()?)
}

#[pymodule]
fn nxlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBody>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyGauge>()?;
    m.add_function(wrap_pyfunction!(norm_eval, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_net, m)?)?;
    m.add_function(wrap_pyfunction!(lip_global_est, m)?)?;
    m.add_function(wrap_pyfunction!(lip_local_est, m)?)?;
    m.add_function(wrap_pyfunction!(sup_dist_est, m)?)?;
    m.add_function(wrap_pyfunction!(village_perturb, m)?)?;
    m.add_function(wrap_pyfunction!(build_pair, m)?)?;
    m.add_function(wrap_pyfunction!(ladder, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_est, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
