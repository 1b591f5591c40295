use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::expr::{flat_rescale, MapExpr};
use crate::error::{param, Result};
use crate::rng::{from_seed, Rng};
use crate::space::{ConvexBody, Point};

/// Relative weights of the node kinds drawn by [`random_nonexpansive`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodeWeights {
    pub identity: f64,
    pub constant: f64,
    pub affine: f64,
    pub radial: f64,
    pub flat: f64,
    pub combo: f64,
    pub compose: f64,
}

impl Default for NodeWeights {
    fn default() -> Self {
        NodeWeights {
            identity: 1.0,
            constant: 1.0,
            affine: 2.0,
            radial: 1.0,
            flat: 2.0,
            combo: 2.0,
            compose: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub max_depth: usize,
    pub weights: NodeWeights,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_depth: 3,
            weights: NodeWeights::default(),
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Identity,
    Constant,
    Affine,
    Radial,
    Flat,
    Combo,
    Compose,
}

/// Draws a random expression mapping `body` into itself with certificate ≤ 1.
pub fn random_nonexpansive(cfg: &GeneratorConfig, body: &ConvexBody, seed: u64) -> Result<Arc<MapExpr>> {
    let w = &cfg.weights;
    let all = [
        w.identity, w.constant, w.affine, w.radial, w.flat, w.combo, w.compose,
    ];
    if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(param("node weights must be finite and non-negative"));
    }
    if w.identity + w.constant + w.affine <= 0.0 {
        return Err(param("at least one leaf kind needs positive weight"));
    }
    let origin_inside = body.contains(&Point::zeros(body.dim()));
    Gen {
        body,
        weights: cfg.weights,
        origin_inside,
        rng: from_seed(seed),
    }
    .node(cfg.max_depth)
}

struct Gen<'a> {
    body: &'a ConvexBody,
    weights: NodeWeights,
    origin_inside: bool,
    rng: Rng,
}

impl Gen<'_> {
    fn pick(&mut self, depth: usize) -> Kind {
        let w = &self.weights;
        let radial = if self.origin_inside { w.radial } else { 0.0 };
        let mut table = vec![
            (Kind::Identity, w.identity),
            (Kind::Constant, w.constant),
            (Kind::Affine, w.affine),
        ];
        if depth > 0 {
            table.extend([
                (Kind::Radial, radial),
                (Kind::Flat, w.flat),
                (Kind::Combo, w.combo),
                (Kind::Compose, w.compose),
            ]);
        }
        let dist = WeightedIndex::new(table.iter().map(|(_, w)| *w)).expect("leaf weight is positive");
        table[dist.sample(&mut self.rng)].0
    }

    fn node(&mut self, depth: usize) -> Result<Arc<MapExpr>> {
        Ok(match self.pick(depth) {
            Kind::Identity => MapExpr::identity(),
            Kind::Constant => MapExpr::constant(self.body.sample(&mut self.rng)?),
            Kind::Affine => {
                let scale = self.rng.gen::<f64>();
                MapExpr::affine_contraction(scale, self.body.sample(&mut self.rng)?)?
            }
            Kind::Radial => MapExpr::radial_scale(self.rng.gen::<f64>())?,
            Kind::Flat => {
                let center = self.body.sample(&mut self.rng)?;
                let radius = self.body.diameter() * self.rng.gen_range(0.05..0.5);
                let delta = radius * self.rng.gen_range(0.1..0.9);
                let flat = MapExpr::flat_collapse(vec![center.clone()], delta, radius, self.body.norm())?;
                MapExpr::compose(
                    MapExpr::affine_contraction(flat_rescale(delta, radius), center)?,
                    flat,
                )
            }
            Kind::Combo => {
                let weight = self.rng.gen::<f64>();
                let left = self.node(depth - 1)?;
                let right = self.node(depth - 1)?;
                MapExpr::convex_combo(weight, left, right)?
            }
            Kind::Compose => {
                let outer = self.node(depth - 1)?;
                let inner = self.node(depth - 1)?;
                MapExpr::compose(outer, inner)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Norm;

    #[test]
    fn deterministic_per_seed() {
        let c = ConvexBody::cube(2, -1.0, 1.0, Norm::L2).unwrap();
        let cfg = GeneratorConfig::default();
        let a = random_nonexpansive(&cfg, &c, 7).unwrap();
        let b = random_nonexpansive(&cfg, &c, 7).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn depth_zero_is_a_leaf() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let cfg = GeneratorConfig {
            max_depth: 0,
            ..Default::default()
        };
        for seed in 0..50 {
            let m = random_nonexpansive(&cfg, &c, seed).unwrap();
            assert!(matches!(
                *m,
                MapExpr::Identity | MapExpr::Constant { .. } | MapExpr::AffineContraction { .. }
            ));
        }
    }

    #[test]
    fn certificates_at_most_one() {
        let c = ConvexBody::ball(Point::zeros(3), 1.0, Norm::Inf, Norm::L1).unwrap();
        for seed in 0..200 {
            let m = random_nonexpansive(&GeneratorConfig::default(), &c, seed).unwrap();
            assert!(m.certificate() <= 1.0, "{}", m.to_json());
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let c = ConvexBody::interval(-1.0, 1.0).unwrap();
        let mut cfg = GeneratorConfig::default();
        cfg.weights.identity = 0.0;
        cfg.weights.constant = 0.0;
        cfg.weights.affine = 0.0;
        assert!(random_nonexpansive(&cfg, &c, 1).is_err());
        cfg.weights.identity = f64::NAN;
        assert!(random_nonexpansive(&cfg, &c, 1).is_err());
    }
}
