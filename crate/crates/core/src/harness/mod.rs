//! Experiment runner: verification suites, the typicality experiment, the
//! gauge pipeline, and report emission.

mod config;
mod dual;
mod report;
mod suites;
mod typical;

use std::time::Instant;

use serde::Serialize;

pub use config::{parse_body, ExperimentConfig, Format};
pub use report::{emit_report, CaseRecord, Check, Relation, Report};
pub use suites::{closing_sweep, random_body, test_gauges, DualSetup, LAMBDA_SWEEP, SUITES};
pub use typical::{level_net, typical_epsilon, typical_scale, BUMP_LAMBDA};

use crate::error::{Error, Result};
use crate::gauge::{build_pair, ladder, log_grid, Gauge, DEFAULT_LADDER_TOL, DEFAULT_RUNGS};
use crate::porosity::{
    geometric_grid, lower_porous_at, upper_porous_at, EmptySet, FiniteSet, PorosityVerdict,
    Rationals, Reciprocals, SetOracle, WholeSet,
};
use crate::rng::derive;
use crate::space::{ConvexBody, Point};

const TYPICAL_STREAM: u64 = 0x7970;
const DUAL_STREAM: u64 = 0x6475;

fn finish(suite: &str, cases: Vec<CaseRecord>, cfg: &ExperimentConfig, start: Instant) -> Report {
    let mut r = Report::new(suite, cases, cfg);
    if cfg.timing {
        r.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    r
}

/// Runs the suite named in the config, or every suite for `all`.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let names: Vec<&str> = if cfg.suite == "all" {
        SUITES.to_vec()
    } else {
        vec![cfg.suite.as_str()]
    };
    let mut cases = Vec::new();
    for name in names {
        cases.extend(suites::suite_cases(name, cfg).ok_or_else(|| {
            Error::Usage(format!("unknown suite '{name}'; expected one of {} or all", SUITES.join(", ")))
        })?);
    }
    Ok(finish(&cfg.suite, cases, cfg, start))
}

/// Village perturbations over nets of separation `2^{-j} diam C` at scales
/// `s_{j,k}`, with densities of the points where the map is locally
/// almost an isometry.
pub fn run_typical(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let cases = typical::typical_cases(cfg, derive(cfg.seed, TYPICAL_STREAM))?;
    Ok(finish("typical", cases, cfg, start))
}

/// Gauge pair, ladder, witness perturbation, hole checks and cover check for
/// the configured gauge. Gauges bounded away from zero take the typicality path.
pub fn run_dual(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let phi = cfg.phi()?;
    let pair = build_pair(&phi).map_err(|e| match e {
        Error::Precondition(m) => Error::Gauge(m),
        other => other,
    })?;
    if phi.inf() > 0.0 {
        let mut cases = typical::typical_cases(cfg, derive(cfg.seed, TYPICAL_STREAM))?;
        let mut c = CaseRecord::new("dual/reduced")
            .param("gauge", phi.to_string())
            .param("inf", phi.inf())
            .param("k", pair.k);
        c.gt("gauge_infimum", phi.inf(), 0.0);
        cases.push(c);
        return Ok(finish("dual", cases, cfg, start));
    }
    let setup = DualSetup::new(&phi, cfg.body_or("box")?)?;
    let cases = dual::dual_cases(cfg, &setup, derive(cfg.seed, DUAL_STREAM))?;
    Ok(finish("dual", cases, cfg, start))
}

/// Named test sets on an interval ambient body, or a finite set given as a
/// JSON list of coordinate lists.
pub fn named_set(name: &str, ambient: ConvexBody) -> Result<Box<dyn SetOracle>> {
    Ok(match name {
        "empty" => Box::new(EmptySet { ambient }),
        "reciprocals" => Box::new(Reciprocals::new(ambient)?),
        "rationals" => Box::new(Rationals { ambient }),
        "whole" => Box::new(WholeSet { ambient }),
        json if json.trim_start().starts_with('[') => {
            let coords: Vec<Vec<f64>> = serde_json::from_str(json)
                .map_err(|e| Error::Usage(format!("bad point list: {e}")))?;
            let points = coords.into_iter().map(Point::new).collect::<Result<Vec<_>>>()?;
            Box::new(FiniteSet { ambient, points })
        }
        other => return Err(Error::Usage(format!("unknown set '{other}'"))),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PorosityRun {
    pub set: String,
    pub q: Point,
    pub gauge: String,
    pub upper: PorosityVerdict,
    pub lower: PorosityVerdict,
}

/// Upper and lower porosity testers at `q` over a dyadic grid of `levels` scales below `eps0`.
pub fn run_porosity(
    set: &dyn SetOracle,
    q: &Point,
    phi: &Gauge,
    eps0: f64,
    levels: i32,
    seed: u64,
) -> Result<PorosityRun> {
    if !(eps0 > 0.0) || levels < 1 {
        return Err(Error::Usage("need eps0 > 0 and at least one level".into()));
    }
    if q.dim() != set.ambient().dim() {
        return Err(Error::Usage("point dimension differs from the ambient body".into()));
    }
    let grid = geometric_grid(eps0 * 2.0, levels);
    Ok(PorosityRun {
        set: set.name(),
        q: q.clone(),
        gauge: phi.to_string(),
        upper: upper_porous_at(set, q, phi, &grid, 8, derive(seed, 1)),
        lower: lower_porous_at(set, q, phi, eps0 * 2.0, levels, 8, derive(seed, 2)),
    })
}

/// CSV rows `t, φ(t), ξ(t), φξ/t` on the pair grid, followed by the ladder rungs.
pub fn gauge_table(phi: &Gauge, diam: f64, points: usize) -> Result<String> {
    let pair = build_pair(phi)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "index", "t", "phi", "xi", "ratio"])?;
    let mut ts = log_grid(1.0 / pair.k, points.max(2));
    ts.reverse();
    for (i, t) in ts.into_iter().enumerate() {
        let (p, x) = (pair.phi.eval(t), pair.xi.eval(t));
        w.write_record([
            "grid".to_string(),
            i.to_string(),
            format!("{t:?}"),
            format!("{p:?}"),
            format!("{x:?}"),
            format!("{:?}", p * x / t),
        ])?;
    }
    if phi.inf() == 0.0 {
        let l = ladder(phi, diam, DEFAULT_RUNGS, DEFAULT_LADDER_TOL)?;
        for j in 1..=l.len() {
            w.write_record([
                "rung".to_string(),
                j.to_string(),
                format!("{:?}", l.phi_inv(j)),
                format!("{:?}", l.s(j)),
                String::new(),
                format!("{:?}", l.ratio(j)),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
