use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::space::{ConvexBody, Norm, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a run depends on. Unset space fields mean "drawn at random per case".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: String,
    pub dim: Option<usize>,
    pub norm_p: Option<Norm>,
    pub body: Option<String>,
    /// Case count; each suite has its own default.
    pub trials: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub gauge: String,
    pub lambda: f64,
    pub epsilon: f64,
    pub k: usize,
    /// Grid size for off-net densities and the cover check.
    pub grid: usize,
    /// Sampled points per local Lipschitz estimate.
    pub samples: usize,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Record wall-clock time; makes reports differ between runs.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            suite: "all".into(),
            dim: None,
            norm_p: None,
            body: None,
            trials: None,
            seed: 0,
            tol: 1e-9,
            gauge: "sqrt".into(),
            lambda: 0.5,
            epsilon: 0.05,
            k: 1,
            grid: 64,
            samples: 64,
            format: Format::Json,
            out: None,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Usage(format!("bad config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    /// Rejects counts of zero and parameters outside their ranges. A
    /// non-positive tolerance is not rejected here; suites report it as a
    /// failed case.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Usage(m));
        if self.trials == Some(0) {
            return usage("trials must be at least 1".into());
        }
        if self.dim == Some(0) {
            return usage("dimension must be at least 1".into());
        }
        if self.samples == 0 {
            return usage("samples must be at least 1".into());
        }
        if self.k == 0 {
            return usage("k must be at least 1".into());
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return usage(format!("lambda {} outside (0,1)", self.lambda));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return usage(format!("epsilon {} outside (0,1)", self.epsilon));
        }
        if self.tol.is_nan() {
            return usage("tolerance is NaN".into());
        }
        if let Some(b) = &self.body {
            self.build_body(b)?;
        }
        self.phi()?;
        Ok(())
    }

    pub fn phi(&self) -> Result<Gauge> {
        self.gauge.parse()
    }

    pub fn build_body(&self, desc: &str) -> Result<ConvexBody> {
        parse_body(desc, self.dim, self.norm_p.unwrap_or(Norm::L2))
    }

    /// The configured body, or `default` when none is set.
    pub fn body_or(&self, default: &str) -> Result<ConvexBody> {
        self.build_body(self.body.as_deref().unwrap_or(default))
    }
}

/// Parses `box[:lo:hi]`, `ball[:r[:p]]`, `simplex` or `hull:x,y;x,y;…`.
/// Dimension defaults to 1 except for hulls, where it is read off the vertices.
pub fn parse_body(desc: &str, dim: Option<usize>, norm: Norm) -> Result<ConvexBody> {
    let bad = |why: &str| Error::Usage(format!("body '{desc}': {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let mut parts = desc.trim().splitn(2, ':');
    let kind = parts.next().unwrap_or_default();
    let rest = parts.next();
    let n = dim.unwrap_or(1);
    match (kind, rest) {
        ("box", None) => ConvexBody::cube(n, -1.0, 1.0, norm),
        ("box", Some(r)) => {
            let (lo, hi) = r.split_once(':').ok_or_else(|| bad("expected box:lo:hi"))?;
            ConvexBody::cube(n, num(lo)?, num(hi)?, norm)
        }
        ("ball", r) => {
            let fields: Vec<&str> = r.map(|r| r.split(':').collect()).unwrap_or_default();
            let radius = fields.first().map(|s| num(s)).transpose()?.unwrap_or(1.0);
            let ball_norm = match fields.get(1) {
                Some(p) => p.parse::<Norm>().map_err(|_| bad("bad ball exponent"))?,
                None => norm,
            };
            if fields.len() > 2 {
                return Err(bad("expected ball[:r[:p]]"));
            }
            ConvexBody::ball(Point::zeros(n), radius, ball_norm, norm)
        }
        ("simplex", None) => {
            let mut vertices = vec![Point::zeros(n)];
            vertices.extend((0..n).map(|i| Point::unit(n, i)));
            ConvexBody::hull(vertices, norm)
        }
        ("hull", Some(r)) => {
            let vertices = r
                .split(';')
                .map(|v| {
                    let coords = v.split(',').map(num).collect::<Result<Vec<f64>>>()?;
                    Point::new(coords)
                })
                .collect::<Result<Vec<Point>>>()?;
            if let (Some(d), Some(v)) = (dim, vertices.first()) {
                if v.dim() != d {
                    return Err(bad("vertex dimension differs from --dim"));
                }
            }
            ConvexBody::hull(vertices, norm)
        }
        _ => Err(bad("unknown body kind")),
    }
    .map_err(|e| match e {
        Error::Usage(_) => e,
        other => bad(&other.to_string()),
    })
}
