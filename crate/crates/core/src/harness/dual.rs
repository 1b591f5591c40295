use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::CaseRecord;
use super::suites::DualSetup;
use crate::error::{Error, Result};
use crate::gauge::{select_j, PAIR_GRID};
use crate::mapping::{lip_local_scale, random_nonexpansive, GeneratorConfig};
use crate::porosity::{dual_witness, e_set_member, verify_holes, ESetParams, WitnessConfig, DEFAULT_J_MAX};
use crate::rng::derive;
use crate::space::{sampled_candidates, Point};

const HOLE_PROBES: usize = 20;

pub(super) fn dual_cases(cfg: &ExperimentConfig, setup: &DualSetup, seed: u64) -> Result<Vec<CaseRecord>> {
    if cfg.grid == 0 {
        return Err(Error::Usage("the cover grid is empty".into()));
    }
    let mut cases = vec![stage_case(setup)];
    let sel = select_j(&setup.ladder, cfg.epsilon, cfg.k, Some(&setup.pair))?;
    let grid = sampled_candidates(&setup.body, cfg.grid, derive(seed, 0))?;
    let nets = setup.nets(sel.j, &grid)?;
    let params = |lambda: f64, stream: u64| ESetParams {
        lambda,
        l: cfg.k,
        j_max: DEFAULT_J_MAX.max(sel.j),
        samples: cfg.samples,
        seed: derive(seed, stream),
    };
    let maps = cfg.trials_or(3);
    let per_map: Vec<CaseRecord> = (0..maps)
        .into_par_iter()
        .map(|i| {
            let id = format!("dual/map-{i:03}");
            map_case(cfg, setup, &nets, &grid, &params(cfg.lambda, 100 + i as u64), derive(seed, 1 + i as u64))
                .map(|c| CaseRecord { id: id.clone(), ..c })
                .unwrap_or_else(|e| CaseRecord::errored(id, &e))
        })
        .collect();
    cases.extend(per_map);
    Ok(cases)
}

/// The pair inequality and the ladder halving property.
fn stage_case(setup: &DualSetup) -> CaseRecord {
    let check = setup.pair.check(PAIR_GRID);
    let l = &setup.ladder;
    let residual = (1..l.len()).map(|j| l.residual(j)).fold(0.0, f64::max);
    let mut c = CaseRecord::new("dual/gauge")
        .param("gauge", setup.pair.phi.to_string())
        .param("k", setup.pair.k)
        .param("rungs", l.len());
    c.ge("pair_min_ratio", check.min_ratio, 1.0 / setup.pair.k)
        .le("pair_max_ratio", check.max_ratio, setup.pair.k)
        .le("ladder_residual", residual, 1e-10);
    c
}

fn map_case(
    cfg: &ExperimentConfig,
    setup: &DualSetup,
    nets: &[crate::space::Net],
    grid: &[Point],
    params: &ESetParams,
    seed: u64,
) -> Result<CaseRecord> {
    let body = &setup.body;
    let f = random_nonexpansive(&GeneratorConfig::default(), body, derive(seed, 1))?;
    let wcfg = WitnessConfig {
        seed: derive(seed, 2),
        ..WitnessConfig::default()
    };
    let (village, w) = dual_witness(
        f.clone(),
        cfg.epsilon,
        cfg.lambda,
        &setup.ladder,
        nets,
        &setup.pair,
        cfg.k,
        body,
        &wcfg,
    )?;
    let g = &village.map;
    let holes = verify_holes(g, &nets[w.j - 1], w.j, &setup.ladder, params, body, grid, HOLE_PROBES)?;

    let mut members = 0;
    let mut cover_misses = 0;
    for z in grid {
        let report = e_set_member(g, z, &setup.ladder, params, body)?;
        let fails_everywhere = (params.l..=params.j_max).all(|j| {
            lip_local_scale(g, z, setup.ladder.phi_inv(j), body, params.samples, derive(params.seed, j as u64))
                .map_or(true, |e| e.lower_bound <= params.lambda)
        });
        if report.member {
            members += 1;
        }
        if fails_everywhere && !report.member {
            cover_misses += 1;
        }
    }
    let mut c = CaseRecord::new("")
        .param("lambda", cfg.lambda)
        .param("epsilon", cfg.epsilon)
        .param("j", w.j)
        .param("s_j", w.s_j)
        .param("beta", w.beta)
        .param("alpha", holes.alpha)
        .param("grid_points", grid.len())
        .param("e_set_members", members)
        .param("j_max", params.j_max);
    c.gt("min_quotient_over_lambda", w.min_quotient, cfg.lambda)
        .ge("min_quotient_over_bound", w.min_quotient, w.closing_bound - cfg.tol)
        .le("reach", w.max_reach, 1.0)
        .none("hole_violations", holes.violations)
        .le("hole_radius_ratio", holes.max_radius_ratio, 1.0)
        .none("cover_misses", cover_misses);
    Ok(c)
}
