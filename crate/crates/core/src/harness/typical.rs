use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::CaseRecord;
use super::suites::LAMBDA_SWEEP;
use crate::error::Result;
use crate::mapping::{r_set_density, random_nonexpansive, sup_dist_est, GeneratorConfig, MapExpr};
use crate::perturb::{village_perturb, VillageSpec};
use crate::rng::derive;
use crate::space::{lattice_net, sampled_candidates, ConvexBody, Net};

/// Net levels `j` and scale offsets `k` swept by the typicality run.
pub const TYPICAL_LEVELS: usize = 3;
pub const TYPICAL_OFFSETS: usize = 3;
/// Threshold for the bump-scale density at net points.
pub const BUMP_LAMBDA: f64 = 0.99;

/// `s_{j,k} = 2^{-j-k}·min{1, diam C}`
pub fn typical_scale(j: usize, k: usize, diam: f64) -> f64 {
    2f64.powi(-((j + k) as i32)) * diam.min(1.0)
}

/// `ε_j = 2^{-j}`
pub fn typical_epsilon(j: usize) -> f64 {
    2f64.powi(-(j as i32))
}

/// Net of separation `2^{-j}·diam C`.
pub fn level_net(body: &ConvexBody, j: usize) -> Result<Net> {
    lattice_net(body, body.diameter() * 2f64.powi(-(j as i32)))
}

pub(super) fn typical_cases(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<CaseRecord>> {
    let body = cfg.body_or("box")?;
    let nets = (1..=TYPICAL_LEVELS)
        .map(|j| level_net(&body, j))
        .collect::<Result<Vec<_>>>()?;
    let off_net = sampled_candidates(&body, cfg.grid.max(1), derive(seed, 0))?;
    let maps = cfg.trials_or(10);
    let jobs: Vec<(usize, usize, usize)> = (0..maps)
        .flat_map(|i| (1..=TYPICAL_LEVELS).flat_map(move |j| (1..=TYPICAL_OFFSETS).map(move |k| (i, j, k))))
        .collect();
    let cases = jobs
        .par_iter()
        .map(|&(i, j, k)| {
            let id = format!("typical/{i:03}/j{j}/k{k}");
            let case_seed = derive(derive(seed, 1 + i as u64), (j * 16 + k) as u64);
            typical_case(cfg, &body, &nets[j - 1], &off_net, i, j, k, seed, case_seed)
                .map(|c| CaseRecord { id: id.clone(), ..c })
                .unwrap_or_else(|e| CaseRecord::errored(id, &e))
        })
        .collect();
    Ok(cases)
}

#[allow(clippy::too_many_arguments)]
fn typical_case(
    cfg: &ExperimentConfig,
    body: &ConvexBody,
    net: &Net,
    off_net: &[crate::space::Point],
    map_index: usize,
    j: usize,
    k: usize,
    seed: u64,
    case_seed: u64,
) -> Result<CaseRecord> {
    let diam = body.diameter();
    let s = typical_scale(j, k, diam);
    let epsilon = typical_epsilon(j);
    let base = random_nonexpansive(&GeneratorConfig::default(), body, derive(seed, 1 + map_index as u64))?;
    let village = village_perturb(base.clone(), net, VillageSpec::new(s, epsilon, diam)?, body)?;
    let g = &village.map;
    let rho = village.spec.bump_radius;
    let at_net = |m: &MapExpr, lambda: f64, r: f64, stream: u64| {
        r_set_density(m, body, lambda, r, Some(&net.points), cfg.samples, derive(case_seed, stream))
    };
    let constant = MapExpr::constant(body.anchor());
    let mut c = CaseRecord::new("")
        .param("j", j)
        .param("k", k)
        .param("s", s)
        .param("epsilon", epsilon)
        .param("bump_radius", rho)
        .param("net_points", net.len())
        .param("base_density", at_net(&base, BUMP_LAMBDA, rho, 1)?)
        .param(
            "off_net_density",
            r_set_density(g, body, BUMP_LAMBDA, s, Some(off_net), cfg.samples, derive(case_seed, 2))?,
        );
    c.ge("net_density", at_net(g, BUMP_LAMBDA, rho, 3)?, 1.0)
        .ge("net_density_at_s", at_net(g, BUMP_LAMBDA, s, 4)?, 1.0)
        .le("constant_density", at_net(&constant, BUMP_LAMBDA, rho, 5)?, 0.0)
        .le("sup_distance", sup_dist_est(g, &base, body, 256, derive(case_seed, 6))?, epsilon);
    for (i, lambda) in LAMBDA_SWEEP.into_iter().enumerate() {
        c.ge(&format!("net_density@{lambda}"), at_net(g, lambda, rho, 10 + i as u64)?, 1.0);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_examples() {
        assert_eq!(typical_scale(2, 3, 2.0), 0.03125);
        assert_eq!(typical_scale(1, 1, 0.5), 0.125);
        assert_eq!(typical_epsilon(3), 0.125);
    }

    #[test]
    fn level_nets_are_separated() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let net = level_net(&c, 1).unwrap();
        assert!(net.separation_violation(c.norm()).is_none());
        assert_eq!(net.separation, 1.0);
        assert_eq!(net.len(), 3);
    }
}
