use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::CaseRecord;
use crate::error::{Error, Result};
use crate::gauge::{build_pair, ladder, Gauge, GaugePair, Ladder, PAIR_GRID};
use crate::mapping::{
    flat_bound, lip_global_est, lip_local_from, local_candidates, random_nonexpansive, resolvable,
    sup_dist_est,
    GeneratorConfig, MapExpr, MEMBERSHIP_TOL,
};
use crate::perturb::{
    flat_collapse, net_witnesses, village_perturb, DirectionField, FlatSpec, Village, VillageSpec,
};
use crate::porosity::{
    dual_beta, dual_closing, dual_margin, dual_witness, gamma_est, geometric_grid,
    lower_porous_at, sample_in_ball, upper_porous_at, verify_hole, verify_holes, ESetParams,
    FiniteSet, Rationals, Reciprocals, SetOracle, Verdict, WholeSet, WitnessConfig,
    DEFAULT_J_MAX,
};
use crate::rng::{derive, from_seed, Rng};
use crate::space::{greedy_net, grid_candidates, sampled_candidates, ConvexBody, Net, Norm, Point};

pub const LAMBDA_SWEEP: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

pub const SUITES: [&str; 11] = [
    "flat",
    "tentpeg",
    "village",
    "witness",
    "elementary",
    "gauge",
    "phiinv",
    "porosity",
    "closing",
    "dual-witness",
    "holes",
];

const PAIRS: usize = 1000;
const EXACT_PROBES: usize = 100;
const VILLAGE_PAIRS: usize = 10_000;
const ISOMETRY_PROBES: usize = 100;
const MAX_NET_POINTS: usize = 64;
const WITNESS_MAPS: usize = 100;
const ROUND_TRIPS: usize = 1000;
const GAUGE_TOL: f64 = 1e-10;

/// Runs one named suite; `None` for an unknown name.
pub fn suite_cases(name: &str, cfg: &ExperimentConfig) -> Option<Vec<CaseRecord>> {
    let stream = SUITES.iter().position(|s| *s == name)? as u64 + 1;
    let seed = derive(cfg.seed, stream);
    let mut cases = match name {
        "flat" => per_case(name, cfg.trials_or(50), seed, |s| flat_case(cfg, s)),
        "tentpeg" => per_case(name, cfg.trials_or(20), seed, |s| tentpeg_case(cfg, s)),
        "village" => per_case(name, cfg.trials_or(20), seed, |s| village_case(cfg, s)),
        "witness" => per_case_indexed(name, cfg.trials_or(10), seed, |i, s| {
            witness_case(cfg, LAMBDA_SWEEP[i % LAMBDA_SWEEP.len()], s)
        }),
        "elementary" => per_case_indexed(name, cfg.trials_or(20), seed, |i, s| {
            elementary_case(cfg, LAMBDA_SWEEP[i % LAMBDA_SWEEP.len()], s)
        }),
        "gauge" => gauge_cases(cfg),
        "phiinv" => phiinv_cases(),
        "porosity" => porosity_cases(seed),
        "closing" => closing_cases(),
        "dual-witness" => per_case_indexed(name, cfg.trials_or(10), seed, |i, s| {
            dual_witness_case(cfg, i, s)
        }),
        "holes" => per_case_indexed(name, cfg.trials_or(5), seed, |i, s| holes_case(cfg, i, s)),
        _ => unreachable!(),
    };
    if !(cfg.tol > 0.0) {
        let mut c = CaseRecord::new(format!("{name}/config"));
        c.gt("tolerance", cfg.tol, 0.0);
        cases.push(c);
    }
    Some(cases)
}

fn per_case(
    name: &str,
    count: usize,
    seed: u64,
    run: impl Fn(u64) -> Result<CaseRecord> + Sync,
) -> Vec<CaseRecord> {
    per_case_indexed(name, count, seed, |_, s| run(s))
}

fn per_case_indexed(
    name: &str,
    count: usize,
    seed: u64,
    run: impl Fn(usize, u64) -> Result<CaseRecord> + Sync,
) -> Vec<CaseRecord> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let id = format!("{name}/{i:03}");
            let case_seed = derive(seed, i as u64);
            match run(i, case_seed) {
                Ok(mut c) => {
                    c.id = id;
                    c.param("seed", case_seed)
                }
                Err(e) => CaseRecord::errored(id, &e).param("seed", case_seed),
            }
        })
        .collect()
}

fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn random_norm(rng: &mut Rng) -> Norm {
    [Norm::L1, Norm::L2, Norm::Inf][rng.gen_range(0..3)]
}

fn random_point(rng: &mut Rng, n: usize, lo: f64, hi: f64) -> Point {
    Point::raw((0..n).map(|_| uniform(rng, lo, hi)).collect())
}

/// The configured body, or a random box, ball or polytope in dimension ≤ 3.
pub fn random_body(cfg: &ExperimentConfig, rng: &mut Rng) -> Result<ConvexBody> {
    if let Some(desc) = &cfg.body {
        return cfg.build_body(desc);
    }
    let n = cfg.dim.unwrap_or_else(|| rng.gen_range(1..=3));
    let norm = cfg.norm_p.unwrap_or_else(|| random_norm(rng));
    for _ in 0..16 {
        let body = match rng.gen_range(0..3) {
            0 => {
                let lo = random_point(rng, n, -2.0, 0.0);
                let hi = Point::raw(lo.coords().iter().map(|a| a + uniform(rng, 0.5, 3.0)).collect());
                ConvexBody::boxed(lo, hi, norm)
            }
            1 => {
                let center = random_point(rng, n, -1.0, 1.0);
                let radius = uniform(rng, 0.3, 1.5);
                ConvexBody::ball(center, radius, random_norm(rng), norm)
            }
            _ => {
                let count = n + 1 + rng.gen_range(0..3);
                ConvexBody::hull((0..count).map(|_| random_point(rng, n, -1.0, 1.0)).collect(), norm)
            }
        };
        if let Ok(b) = body {
            return Ok(b);
        }
    }
    Err(Error::DegenerateBody("no admissible random body after 16 draws".into()))
}

fn space_params(c: CaseRecord, body: &ConvexBody) -> CaseRecord {
    c.param("dim", body.dim())
        .param("norm", body.norm().to_string())
        .param("body", serde_json::to_value(body).expect("body serializes"))
        .param("diam", body.diameter())
}

fn flat_case(cfg: &ExperimentConfig, seed: u64) -> Result<CaseRecord> {
    let mut rng = from_seed(seed);
    let body = random_body(cfg, &mut rng)?;
    let norm = body.norm();
    let x0 = body.sample(&mut rng)?;
    let radius = uniform(&mut rng, 0.05, 0.5) * body.diameter();
    let delta = uniform(&mut rng, 0.05, 0.95) * radius;
    let phi = flat_collapse(&FlatSpec::new(x0.clone(), delta, radius)?, &body)?;
    let bound = flat_bound(delta, radius);

    let mut worst_quotient: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    let mut outside_range = 0;
    let mut seen = |x: &Point, fx: &Point| {
        worst_shift = worst_shift.max(norm.dist(x, fx));
        if !body.contains_within(fx, MEMBERSHIP_TOL) {
            outside_range += 1;
        }
    };
    for i in 0..PAIRS {
        let a = match i % 4 {
            0 | 3 => body.sample(&mut rng)?,
            _ => sample_in_ball(&body, &x0, radius, &mut rng).unwrap_or_else(|| x0.clone()),
        };
        let b = match i % 4 {
            0 => body.sample(&mut rng).ok(),
            1 => sample_in_ball(&body, &x0, radius, &mut rng),
            2 => sample_in_ball(&body, &a, 1e-3 * radius, &mut rng),
            _ => sample_in_ball(&body, &a, radius * rng.gen::<f64>(), &mut rng),
        }
        .unwrap_or_else(|| x0.clone());
        let (fa, fb) = (phi.eval(&a, norm), phi.eval(&b, norm));
        seen(&a, &fa);
        seen(&b, &fb);
        if resolvable(&a, &b, &body) {
            worst_quotient = worst_quotient.max(norm.dist(&fa, &fb) / norm.dist(&a, &b));
        }
    }
    let mut collapse_misses = 0;
    let mut identity_misses = 0;
    let mut identity_probes = 0;
    for _ in 0..EXACT_PROBES {
        if let Some(x) = sample_in_ball(&body, &x0, delta, &mut rng) {
            if phi.eval(&x, norm) != x0 {
                collapse_misses += 1;
            }
        }
    }
    let far = body
        .extreme_points()
        .into_iter()
        .chain((0..EXACT_PROBES).filter_map(|_| body.sample(&mut rng).ok()))
        .filter(|x| norm.dist(x, &x0) >= radius);
    for x in far {
        identity_probes += 1;
        if phi.eval(&x, norm) != x {
            identity_misses += 1;
        }
    }
    let mut c = space_params(CaseRecord::new(""), &body)
        .param("radius", radius)
        .param("delta", delta)
        .param("identity_probes", identity_probes);
    c.le("quotient", worst_quotient, bound + cfg.tol)
        .le("displacement", worst_shift, delta + 1e-12)
        .none("collapse_misses", collapse_misses)
        .none("identity_misses", identity_misses)
        .none("outside_range", outside_range)
        .le("certificate", phi.certificate(), bound);
    Ok(c)
}

fn tentpeg_case(cfg: &ExperimentConfig, seed: u64) -> Result<CaseRecord> {
    let mut rng = from_seed(seed);
    let body = random_body(cfg, &mut rng)?;
    let norm = body.norm();
    let s = uniform(&mut rng, 0.1, 1.0) * body.diameter();
    let field = DirectionField::auto(&body, s)?;
    let mut unit_error: f64 = 0.0;
    let mut segment_misses = 0;
    let zs = body
        .extreme_points()
        .into_iter()
        .chain([field.v.clone(), field.w.clone()])
        .chain((0..PAIRS).filter_map(|_| body.sample(&mut rng).ok()));
    for z in zs {
        let e = field.at(&z);
        unit_error = unit_error.max((norm.norm(&e) - 1.0).abs());
        for i in 1..=20 {
            let t = s / 3.0 * i as f64 / 20.0;
            if !body.contains_within(&z.offset(&e, t), MEMBERSHIP_TOL) {
                segment_misses += 1;
            }
        }
    }
    let mut c = space_params(CaseRecord::new(""), &body).param("s", s);
    c.le("unit_error", unit_error, 1e-12)
        .none("segment_misses", segment_misses);
    Ok(c)
}

/// Net of separation `s` over the extreme points and sampled points; `s` is
/// halved until the net has two points.
fn sampled_net(body: &ConvexBody, mut s: f64, seed: u64) -> Result<(Net, f64)> {
    let samples = sampled_candidates(body, 200, seed)?;
    loop {
        let cands = body.extreme_points().into_iter().chain(samples.iter().cloned());
        let net = greedy_net(body, s, cands)?;
        if net.len() >= 2 {
            return Ok((net, s));
        }
        s /= 2.0;
    }
}

struct VillageSetup {
    body: ConvexBody,
    base: Arc<MapExpr>,
    village: Village,
}

fn random_village(cfg: &ExperimentConfig, rng: &mut Rng, seed: u64) -> Result<VillageSetup> {
    let body = random_body(cfg, rng)?;
    let s = uniform(rng, 0.2, 0.5) * body.diameter().min(1.0);
    let (net, s) = sampled_net(&body, s, derive(seed, 1))?;
    let epsilon = uniform(rng, 0.05, 0.9);
    let base = random_nonexpansive(&GeneratorConfig::default(), &body, derive(seed, 2))?;
    let spec = VillageSpec::new(s, epsilon, body.diameter())?;
    let village = village_perturb(base.clone(), &net, spec, &body)?;
    Ok(VillageSetup { body, base, village })
}

fn village_params(c: CaseRecord, v: &Village) -> CaseRecord {
    c.param("s", v.spec.s)
        .param("epsilon", v.spec.epsilon)
        .param("delta", v.spec.delta)
        .param("bump_radius", v.spec.bump_radius)
        .param("net_points", v.net.len())
        .param("base", serde_json::from_str::<serde_json::Value>(&v.base.to_json()).expect("map json"))
}

fn village_case(cfg: &ExperimentConfig, seed: u64) -> Result<CaseRecord> {
    let mut rng = from_seed(seed);
    let VillageSetup { body, base, village } = random_village(cfg, &mut rng, seed)?;
    let norm = body.norm();
    let g = &village.map;
    let spec = village.spec;

    let mut isometry_gap: f64 = 0.0;
    let mut local_quotient: f64 = 0.0;
    let mut continuity_gap: f64 = 0.0;
    let mut net_shift: f64 = 0.0;
    for (i, x) in village.net.points.iter().take(MAX_NET_POINTS).enumerate() {
        let gx = g.eval(x, norm);
        net_shift = net_shift.max(norm.dist(&gx, &base.eval(x, norm)));
        for _ in 0..ISOMETRY_PROBES {
            if let Some(y) = sample_in_ball(&body, x, spec.bump_radius, &mut rng) {
                let gap = norm.dist(&g.eval(&y, norm), &gx) - norm.dist(&y, x);
                isometry_gap = isometry_gap.max(gap.abs());
            }
        }
        let mut local_rng = from_seed(derive(seed, 100 + i as u64));
        let near: Vec<Point> = local_candidates(x, spec.radius, &body, 256, &mut local_rng)?
            .into_iter()
            .filter(|y| resolvable(x, y, &body))
            .collect();
        local_quotient = local_quotient.max(lip_local_from(g, x, spec.radius, &near, norm).lower_bound);
        for t in [spec.delta / 2.0, spec.delta] {
            if let Some(w) = sample_in_ball(&body, x, spec.radius, &mut rng) {
                let Some(u) = norm.normalize(&(&w - x)) else { continue };
                let h = 1e-9 * spec.delta;
                let (a, b) = (x.offset(&u, t - h), x.offset(&u, t + h));
                if body.contains(&a) && body.contains(&b) {
                    let jump = norm.dist(&g.eval(&a, norm), &g.eval(&b, norm)) - norm.dist(&a, &b);
                    continuity_gap = continuity_gap.max(jump);
                }
            }
        }
    }
    let global = lip_global_est(g, &body, VILLAGE_PAIRS, derive(seed, 3))?;
    let sup = sup_dist_est(g, &base, &body, PAIRS, derive(seed, 4))?.max(net_shift);
    let mut outside_range = 0;
    for _ in 0..PAIRS {
        let x = body.sample(&mut rng)?;
        if !body.contains_within(&g.eval(&x, norm), MEMBERSHIP_TOL) {
            outside_range += 1;
        }
    }
    let mut c = village_params(space_params(CaseRecord::new(""), &body), &village);
    c.le("isometry_gap", isometry_gap, cfg.tol)
        .le("sampled_lipschitz", global.lower_bound, 1.0 + cfg.tol)
        .le("local_lipschitz", local_quotient, 1.0 + cfg.tol)
        .le("certificate", g.certificate(), 1.0)
        .le("sup_distance", sup, spec.epsilon)
        .le("continuity_gap", continuity_gap, cfg.tol)
        .none("outside_range", outside_range);
    Ok(c)
}

/// Quotient checks for maps within `βε` of the village map at the net witnesses.
fn witness_checks(
    c: &mut CaseRecord,
    body: &ConvexBody,
    village: &Village,
    lambda: f64,
    tol: f64,
    rng: &mut Rng,
) -> Result<()> {
    let norm = body.norm();
    let spec = village.spec;
    let w = net_witnesses(&village.map, &village.net, spec.s, spec.epsilon, lambda, body)?;
    let allowed = w.beta * spec.epsilon;
    let tau = allowed / body.diameter();
    let mut min_quotient = f64::INFINITY;
    let mut max_distance: f64 = 0.0;
    let mut outside = 0;
    for pair in &w.pairs {
        if !body.contains_within(&pair.y, MEMBERSHIP_TOL) {
            outside += 1;
        }
    }
    for _ in 0..WITNESS_MAPS {
        let target = body.sample(rng)?;
        let h = MapExpr::convex_combo(1.0 - tau, village.map.clone(), MapExpr::constant(target))?;
        for pair in &w.pairs {
            let (hx, hy) = (h.eval(&pair.x, norm), h.eval(&pair.y, norm));
            max_distance = max_distance
                .max(norm.dist(&hx, &village.map.eval(&pair.x, norm)))
                .max(norm.dist(&hy, &village.map.eval(&pair.y, norm)));
            min_quotient = min_quotient.min(norm.dist(&hx, &hy) / norm.dist(&pair.x, &pair.y));
        }
    }
    c.params.insert("lambda".into(), lambda.into());
    c.params.insert("beta".into(), w.beta.into());
    c.params.insert("maps".into(), WITNESS_MAPS.into());
    c.le("map_distance", max_distance, allowed * (1.0 + 1e-12))
        .gt("min_quotient_over_lambda", min_quotient, lambda)
        .ge("min_quotient_over_bound", min_quotient, w.bound - tol)
        .none("partners_outside", outside);
    Ok(())
}

fn witness_case(cfg: &ExperimentConfig, lambda: f64, seed: u64) -> Result<CaseRecord> {
    let mut rng = from_seed(seed);
    let VillageSetup { body, village, .. } = random_village(cfg, &mut rng, seed)?;
    let mut c = village_params(space_params(CaseRecord::new(""), &body), &village);
    witness_checks(&mut c, &body, &village, lambda, cfg.tol, &mut rng)?;
    Ok(c)
}

/// Two-point net `{x, y}` with `s = min{‖y − x‖, 1/2}`.
fn elementary_case(cfg: &ExperimentConfig, lambda: f64, seed: u64) -> Result<CaseRecord> {
    let mut rng = from_seed(seed);
    let body = random_body(cfg, &mut rng)?;
    let norm = body.norm();
    let x = body.sample(&mut rng)?;
    let mut y = body.sample(&mut rng)?;
    while norm.dist(&x, &y) == 0.0 {
        y = body.sample(&mut rng)?;
    }
    let s = norm.dist(&x, &y).min(0.5);
    let net = Net::new(vec![x, y], s, norm)?;
    let epsilon = uniform(&mut rng, 0.05, 0.9);
    let base = random_nonexpansive(&GeneratorConfig::default(), &body, derive(seed, 2))?;
    let village = village_perturb(base, &net, VillageSpec::new(s, epsilon, body.diameter())?, &body)?;
    let mut c = village_params(space_params(CaseRecord::new(""), &body), &village);
    witness_checks(&mut c, &body, &village, lambda, cfg.tol, &mut rng)?;
    Ok(c)
}

/// Gauges exercised by the gauge suites, by name.
pub fn test_gauges() -> Vec<(&'static str, Gauge)> {
    vec![
        ("sqrt", Gauge::sqrt()),
        ("pow-2/3", Gauge::power(1.0, 2.0 / 3.0, 1.0).expect("valid gauge")),
        ("rational-1/2", Gauge::rational(0.5, 1.0).expect("valid gauge")),
        ("oneplus-1/2", Gauge::one_plus_power(0.5, 1.0).expect("valid gauge")),
    ]
}

fn gauge_case(name: &str, phi: &Gauge, diam: f64) -> Result<CaseRecord> {
    let (lo, hi) = (phi.inf(), phi.sup());
    let mut closed: f64 = 0.0;
    let mut bisected: f64 = 0.0;
    for i in 0..ROUND_TRIPS {
        let y = lo + (hi - lo) * (i as f64 + 0.5) / ROUND_TRIPS as f64;
        closed = closed.max((phi.eval(phi.inverse(y)?) - y).abs());
        bisected = bisected.max((phi.eval(phi.inverse_bisect(y, 1e-12)?) - y).abs());
    }
    let (increasing, concave) = phi.check_shape(ROUND_TRIPS);
    let pair = build_pair(phi)?;
    let check = pair.check(PAIR_GRID);
    let mut c = CaseRecord::new(format!("gauge/{name}"))
        .param("gauge", phi.to_string())
        .param("k", pair.k)
        .param("branch", serde_json::to_value(pair.branch).expect("branch serializes"));
    c.le("round_trip", closed, GAUGE_TOL)
        .le("round_trip_bisection", bisected, GAUGE_TOL)
        .holds("increasing", increasing)
        .holds("concave", concave)
        .ge("pair_min_ratio", check.min_ratio, 1.0 / pair.k)
        .le("pair_max_ratio", check.max_ratio, pair.k);
    if lo == 0.0 {
        c.le("xi_near_zero", pair.xi.eval(1e-12), 1e-3);
        let l = ladder(phi, diam, 20, 1e-12)?;
        ladder_checks(&mut c, &l);
        if name == "sqrt" {
            let worst = (1..=l.len())
                .map(|j| (l.s(j) - 0.25 * 2f64.powi(1 - j as i32)).abs() / l.s(j))
                .fold(0.0, f64::max);
            c.le("ladder_closed_form", worst, GAUGE_TOL);
        }
    }
    Ok(c)
}

fn ladder_checks(c: &mut CaseRecord, l: &Ladder) {
    let worst = (1..l.len()).map(|j| l.residual(j)).fold(0.0, f64::max);
    let decreasing = l.rungs.windows(2).all(|w| w[1] < w[0]);
    c.le("ladder_residual", worst, GAUGE_TOL)
        .holds("ladder_decreasing", decreasing);
}

fn gauge_cases(cfg: &ExperimentConfig) -> Vec<CaseRecord> {
    let diam = cfg.body_or("box").map(|b| b.diameter()).unwrap_or(2.0);
    test_gauges()
        .par_iter()
        .map(|(name, phi)| {
            gauge_case(name, phi, diam).unwrap_or_else(|e| CaseRecord::errored(format!("gauge/{name}"), &e))
        })
        .collect()
}

/// `φ⁻¹(t)/t` on `t = 2^-m`: non-increasing as `t ↓ 0` and eventually small.
fn phiinv_cases() -> Vec<CaseRecord> {
    test_gauges()
        .into_iter()
        .filter(|(_, phi)| phi.inf() == 0.0)
        .map(|(name, phi)| {
            let id = format!("phiinv/{name}");
            let ratios: Result<Vec<f64>> = (2..=60).map(|m| phi.inverse_ratio(2f64.powi(-m))).collect();
            match ratios {
                Ok(r) => {
                    let rises = r.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
                    let mut c = CaseRecord::new(id).param("gauge", phi.to_string());
                    c.none("increases_towards_zero", rises)
                        .le("ratio_at_2^-60", *r.last().expect("sixty ratios"), 1e-3);
                    c
                }
                Err(e) => CaseRecord::errored(id, &e),
            }
        })
        .collect()
}

fn porosity_cases(seed: u64) -> Vec<CaseRecord> {
    let line = ConvexBody::interval(-1.0, 1.0).expect("interval");
    let linear = Gauge::power(1.0, 1.0, 10.0).expect("valid gauge");
    let reciprocals = Reciprocals::new(line.clone()).expect("interval ambient");
    let origin = FiniteSet {
        ambient: line.clone(),
        points: vec![Point::scalar(0.0)],
    };
    let whole = WholeSet { ambient: line.clone() };
    let dense = Rationals { ambient: line };
    let grid = geometric_grid(1.0, 24);
    let mut cases = Vec::new();

    let exact = (0.01 - 1.0 / 101.0) / 2.0;
    let g = gamma_est(&Point::scalar(0.0), 0.01, &reciprocals, 20_000, derive(seed, 1)).unwrap_or(0.0);
    let mut c = CaseRecord::new("porosity/reciprocals-gamma").param("analytic", exact / 0.01);
    c.le("gamma_over_r", g / 0.01, 0.01)
        .ge("gamma_over_analytic", g / exact, 0.9)
        .le("gamma_over_analytic_upper", g / exact, 1.0 + 1e-12);
    cases.push(c);

    let up = upper_porous_at(&reciprocals, &Point::scalar(0.0), &linear, &grid, 4, derive(seed, 2));
    let mut c = CaseRecord::new("porosity/reciprocals-upper-at-0");
    c.holds("not_detected", up.verdict == Verdict::NotDetected);
    cases.push(c);

    let low = lower_porous_at(&reciprocals, &Point::scalar(0.5), &linear, 0.125, 24, 4, derive(seed, 3));
    cases.push(verdict_case("porosity/reciprocals-lower-at-half", &reciprocals, &low, 0.25, seed));

    for (i, r) in [0.5, 0.1, 0.01, 1e-3].into_iter().enumerate() {
        let g = gamma_est(&Point::scalar(0.0), r, &origin, 100, derive(seed, 10 + i as u64)).unwrap_or(0.0);
        let mut c = CaseRecord::new(format!("porosity/origin-gamma-{i}")).param("r", r);
        c.le("relative_error", (g / r - 0.5).abs() / 0.5, 0.05);
        cases.push(c);
    }
    let up = upper_porous_at(&origin, &Point::scalar(0.0), &linear, &grid, 4, derive(seed, 20));
    cases.push(verdict_case("porosity/origin-upper", &origin, &up, 0.25, seed));
    let low = lower_porous_at(&origin, &Point::scalar(0.0), &linear, 0.5, 24, 4, derive(seed, 21));
    cases.push(verdict_case("porosity/origin-lower", &origin, &low, 0.25, seed));

    let q = Point::scalar(0.1);
    let mut c = CaseRecord::new("porosity/full-and-dense");
    c.holds("whole_not_detected", !upper_porous_at(&whole, &q, &linear, &grid, 4, derive(seed, 30)).is_porous())
        .holds("dense_not_detected", !lower_porous_at(&dense, &q, &linear, 0.5, 12, 4, derive(seed, 31)).is_porous());
    cases.push(c);
    cases
}

fn verdict_case(
    id: &str,
    set: &dyn SetOracle,
    v: &crate::porosity::PorosityVerdict,
    min_constant: f64,
    seed: u64,
) -> CaseRecord {
    let recheck_failures = v
        .witnesses
        .iter()
        .enumerate()
        .filter(|(i, w)| !verify_hole(set, &w.center, w.radius, 10_000, derive(seed, 1000 + *i as u64)))
        .count();
    let mut c = CaseRecord::new(id).param("witnesses", v.witnesses.len());
    c.holds("porous", v.is_porous())
        .ge("constant", v.constant.unwrap_or(0.0), min_constant)
        .none("recheck_failures", recheck_failures);
    c
}

/// Sweep of `λ`, `K` and `diam C` for the closing inequality.
pub fn closing_sweep() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for lambda in [0.1, 0.5, 0.9] {
        for k in [1.0, 4.0, 64.0] {
            for diam in [0.5, 2.0, 100.0] {
                out.push((lambda, k, diam));
            }
        }
    }
    out
}

fn closing_cases() -> Vec<CaseRecord> {
    closing_sweep()
        .into_iter()
        .enumerate()
        .map(|(i, (lambda, k, diam))| {
            let beta = dual_beta(lambda, k, diam);
            let closing = dual_closing(lambda, beta, k, diam);
            let oracle = (1.0 - lambda).powi(2) / (97.0 * (3.0 - lambda));
            let mut c = CaseRecord::new(format!("closing/{i:03}"))
                .param("lambda", lambda)
                .param("k", k)
                .param("diam", diam)
                .param("beta", beta);
            c.gt("closing_over_lambda", closing, lambda)
                .gt("margin", dual_margin(lambda, k, diam), 0.0)
                .le("margin_vs_closed_form", (dual_margin(lambda, k, diam) - oracle).abs(), 1e-14);
            c
        })
        .collect()
}

/// Ladder, pair and per-rung nets for a gauge vanishing at zero.
pub struct DualSetup {
    pub body: ConvexBody,
    pub pair: GaugePair,
    pub ladder: Ladder,
}

impl DualSetup {
    pub fn new(phi: &Gauge, body: ConvexBody) -> Result<Self> {
        let pair = build_pair(phi)?;
        let ladder = ladder(phi, body.diameter(), crate::gauge::DEFAULT_RUNGS, crate::gauge::DEFAULT_LADDER_TOL)?;
        Ok(DualSetup { body, pair, ladder })
    }

    /// Greedy nets of separation `s_1, …, s_upto` over a lattice a quarter of
    /// the separation, followed by `extra` candidates.
    pub fn nets(&self, upto: usize, extra: &[Point]) -> Result<Vec<Net>> {
        (1..=upto)
            .map(|j| {
                let s = self.ladder.s(j);
                let mut cands = grid_candidates(&self.body, s / 4.0)?;
                cands.extend(extra.iter().cloned());
                greedy_net(&self.body, s, cands)
            })
            .collect()
    }
}

fn dual_default_setup(cfg: &ExperimentConfig) -> Result<DualSetup> {
    DualSetup::new(&Gauge::sqrt(), cfg.body_or("box")?)
}

fn dual_witness_case(cfg: &ExperimentConfig, i: usize, seed: u64) -> Result<CaseRecord> {
    let setup = dual_default_setup(cfg)?;
    let lambda = LAMBDA_SWEEP[i % LAMBDA_SWEEP.len()];
    let epsilon = [0.2, 0.05, 0.01][i % 3];
    let sel = crate::gauge::select_j(&setup.ladder, epsilon, 1, Some(&setup.pair))?;
    let nets = setup.nets(sel.j, &[])?;
    let f = random_nonexpansive(&GeneratorConfig::default(), &setup.body, derive(seed, 1))?;
    let wcfg = WitnessConfig {
        seed: derive(seed, 2),
        ..WitnessConfig::default()
    };
    let (_, r) = dual_witness(f, epsilon, lambda, &setup.ladder, &nets, &setup.pair, 1, &setup.body, &wcfg)?;
    let mut c = space_params(CaseRecord::new(""), &setup.body)
        .param("gauge", "sqrt")
        .param("lambda", lambda)
        .param("epsilon", epsilon)
        .param("j", r.j)
        .param("beta", r.beta);
    c.gt("min_quotient_over_lambda", r.min_quotient, lambda)
        .ge("min_quotient_over_bound", r.min_quotient, r.closing_bound - cfg.tol)
        .le("reach", r.max_reach, 1.0);
    Ok(c)
}

fn holes_case(cfg: &ExperimentConfig, i: usize, seed: u64) -> Result<CaseRecord> {
    let setup = dual_default_setup(cfg)?;
    let lambda = LAMBDA_SWEEP[i % LAMBDA_SWEEP.len()];
    let epsilon = [0.05, 0.2, 0.01][i % 3];
    let sel = crate::gauge::select_j(&setup.ladder, epsilon, 1, Some(&setup.pair))?;
    let zs = sampled_candidates(&setup.body, 32, derive(seed, 3))?;
    let nets = setup.nets(sel.j, &zs)?;
    let f = random_nonexpansive(&GeneratorConfig::default(), &setup.body, derive(seed, 1))?;
    let wcfg = WitnessConfig {
        seed: derive(seed, 2),
        ..WitnessConfig::default()
    };
    let (village, _) = dual_witness(f, epsilon, lambda, &setup.ladder, &nets, &setup.pair, 1, &setup.body, &wcfg)?;
    let params = ESetParams {
        lambda,
        l: 1,
        j_max: DEFAULT_J_MAX.max(sel.j),
        samples: cfg.samples,
        seed: derive(seed, 4),
    };
    let r = verify_holes(&village.map, &nets[sel.j - 1], sel.j, &setup.ladder, &params, &setup.body, &zs, 20)?;
    let mut c = space_params(CaseRecord::new(""), &setup.body)
        .param("gauge", "sqrt")
        .param("lambda", lambda)
        .param("epsilon", epsilon)
        .param("j", sel.j)
        .param("alpha", r.alpha)
        .param("holes", r.holes);
    c.none("hole_violations", r.violations)
        .le("hole_radius_ratio", r.max_radius_ratio, 1.0);
    Ok(c)
}
