use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::point::segment_unchecked;
use super::{Norm, Point};
use crate::error::{input, Error, Result};
use crate::rng::Rng;

/// Barycentric tolerance for hull membership.
pub const HULL_TOL: f64 = 1e-12;
/// Rejection attempts before [`ConvexBody::sample`] gives up.
pub const MAX_REJECTION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Box { lo: Point, hi: Point },
    Ball { center: Point, radius: f64, ball_norm: Norm },
    Hull { vertices: Vec<Point> },
}

#[derive(Clone, Serialize, Deserialize)]
struct BodyRepr {
    #[serde(flatten)]
    shape: Shape,
    norm: Norm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
}

/// A compact convex body `C ⊂ ℝⁿ` together with the ambient norm of `X`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub struct ConvexBody {
    shape: Shape,
    norm: Norm,
    diameter: f64,
    hull: Option<HullData>,
}

impl PartialEq for ConvexBody {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.norm == other.norm
    }
}

impl TryFrom<BodyRepr> for ConvexBody {
    type Error = Error;
    fn try_from(r: BodyRepr) -> Result<Self> {
        ConvexBody::new(r.shape, r.norm)
    }
}

impl From<ConvexBody> for BodyRepr {
    fn from(b: ConvexBody) -> Self {
        BodyRepr {
            shape: b.shape,
            norm: b.norm,
            diameter: Some(b.diameter),
        }
    }
}

impl ConvexBody {
    pub fn new(shape: Shape, norm: Norm) -> Result<Self> {
        let hull = match &shape {
            Shape::Box { lo, hi } => {
                if lo.dim() != hi.dim() {
                    return Err(input("box corners differ in dimension"));
                }
                if lo.coords().iter().zip(hi.coords()).any(|(a, b)| a > b) {
                    return Err(input("box requires lo <= hi on every axis"));
                }
                None
            }
            Shape::Ball { radius, .. } => {
                if !(radius.is_finite() && *radius >= 0.0) {
                    return Err(input(format!("invalid ball radius {radius}")));
                }
                None
            }
            Shape::Hull { vertices } => {
                let Some(first) = vertices.first() else {
                    return Err(Error::DegenerateBody("hull without vertices".into()));
                };
                if vertices.iter().any(|v| v.dim() != first.dim()) {
                    return Err(input("hull vertices differ in dimension"));
                }
                Some(HullData::new(vertices))
            }
        };
        let diameter = diameter_of(&shape, norm);
        if !(diameter > 0.0) {
            return Err(Error::DegenerateBody(
                "body is a single point (diameter 0)".into(),
            ));
        }
        Ok(ConvexBody {
            shape,
            norm,
            diameter,
            hull,
        })
    }

    /// The interval `[lo, hi] ⊂ ℝ`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Point::new(vec![lo])?, Point::new(vec![hi])?, Norm::L2)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, norm: Norm) -> Result<Self> {
        Self::boxed(Point::new(vec![lo; dim])?, Point::new(vec![hi; dim])?, norm)
    }

    pub fn boxed(lo: Point, hi: Point, norm: Norm) -> Result<Self> {
        Self::new(Shape::Box { lo, hi }, norm)
    }

    pub fn ball(center: Point, radius: f64, ball_norm: Norm, norm: Norm) -> Result<Self> {
        Self::new(
            Shape::Ball {
                center,
                radius,
                ball_norm,
            },
            norm,
        )
    }

    pub fn hull(vertices: Vec<Point>, norm: Norm) -> Result<Self> {
        Self::new(Shape::Hull { vertices }, norm)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Box { lo, .. } => lo.dim(),
            Shape::Ball { center, .. } => center.dim(),
            Shape::Hull { vertices } => vertices[0].dim(),
        }
    }

    /// `diam C` under the ambient norm.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        self.norm.dist(a, b)
    }

    /// Central point: box/ball centre, hull vertex centroid.
    pub fn anchor(&self) -> Point {
        match &self.shape {
            Shape::Box { lo, hi } => segment_unchecked(lo, hi, 0.5),
            Shape::Ball { center, .. } => center.clone(),
            Shape::Hull { vertices } => {
                let n = vertices.len() as f64;
                let mut c = vec![0.0; vertices[0].dim()];
                for v in vertices {
                    for (ci, vi) in c.iter_mut().zip(v.coords()) {
                        *ci += vi / n;
                    }
                }
                Point::raw(c)
            }
        }
    }

    /// Exact for box and ball, barycentric within [`HULL_TOL`] for hulls.
    pub fn contains(&self, p: &Point) -> bool {
        self.contains_within(p, 0.0)
    }

    /// Membership allowing an absolute slack of `tol`.
    pub fn contains_within(&self, p: &Point, tol: f64) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Box { lo, hi } => p
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .all(|(x, (a, b))| *x >= a - tol && *x <= b + tol),
            Shape::Ball {
                center,
                radius,
                ball_norm,
            } => ball_norm.dist(p, center) <= radius + tol,
            Shape::Hull { .. } => self
                .hull
                .as_ref()
                .expect("hull data")
                .contains(p, HULL_TOL.max(tol)),
        }
    }

    /// Corners, axis extreme points or vertices.
    pub fn extreme_points(&self) -> Vec<Point> {
        match &self.shape {
            Shape::Box { lo, hi } => {
                let n = lo.dim();
                if n > 12 {
                    return vec![lo.clone(), hi.clone()];
                }
                (0..1usize << n)
                    .map(|mask| {
                        Point::raw(
                            (0..n)
                                .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                                .collect(),
                        )
                    })
                    .collect()
            }
            Shape::Ball {
                center,
                radius,
                ball_norm,
            } => {
                let n = center.dim();
                let mut dirs: Vec<Point> = (0..n).map(|i| Point::unit(n, i)).collect();
                let patterns = if n <= 12 { 1usize << (n - 1) } else { 1 };
                for mask in 0..patterns {
                    dirs.push(Point::raw(
                        (0..n)
                            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                            .collect(),
                    ));
                }
                let mut out = Vec::with_capacity(2 * dirs.len());
                for d in dirs {
                    let u = d.scaled(1.0 / ball_norm.norm(&d));
                    for sign in [1.0, -1.0] {
                        out.push(self.boundary_point(center, &u, sign * radius));
                    }
                }
                out.dedup();
                out
            }
            Shape::Hull { vertices } => vertices.clone(),
        }
    }

    /// `center + t·u`, pulled inwards by a few ulps if rounding left it outside.
    fn boundary_point(&self, center: &Point, u: &Point, t: f64) -> Point {
        let mut scale = t;
        for _ in 0..64 {
            let p = center.offset(u, scale);
            if self.contains(&p) {
                return p;
            }
            scale *= 1.0 - 4.0 * f64::EPSILON;
        }
        center.clone()
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> (Point, Point) {
        match &self.shape {
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Ball { center, radius, .. } => (
                Point::raw(center.coords().iter().map(|c| c - radius).collect()),
                Point::raw(center.coords().iter().map(|c| c + radius).collect()),
            ),
            Shape::Hull { vertices } => {
                let n = vertices[0].dim();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for v in vertices {
                    for i in 0..n {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                (Point::raw(lo), Point::raw(hi))
            }
        }
    }

    /// A random member of `C`; deterministic for a fixed generator state.
    pub fn sample(&self, rng: &mut Rng) -> Result<Point> {
        match &self.shape {
            Shape::Box { lo, hi } => Ok(uniform_in_box(lo, hi, rng)),
            Shape::Ball { .. } => {
                let (lo, hi) = self.bounding_box();
                for _ in 0..MAX_REJECTION_ATTEMPTS {
                    let p = uniform_in_box(&lo, &hi, rng);
                    if self.contains(&p) {
                        return Ok(p);
                    }
                }
                Err(Error::SamplerExhausted {
                    attempts: MAX_REJECTION_ATTEMPTS,
                })
            }
            Shape::Hull { vertices } => {
                let data = self.hull.as_ref().expect("hull data");
                if data.affine_dim == self.dim() {
                    let (lo, hi) = self.bounding_box();
                    for _ in 0..1000 {
                        let p = uniform_in_box(&lo, &hi, rng);
                        if self.contains(&p) {
                            return Ok(p);
                        }
                    }
                }
                // flat hull (or unlucky rejection): random convex combination
                let w: Vec<f64> = vertices
                    .iter()
                    .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                    .collect();
                let total: f64 = w.iter().sum();
                let mut c = vec![0.0; self.dim()];
                for (v, wi) in vertices.iter().zip(&w) {
                    for (ci, vi) in c.iter_mut().zip(v.coords()) {
                        *ci += vi * wi / total;
                    }
                }
                Ok(Point::raw(c))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("body serializes")
    }
}

fn uniform_in_box(lo: &Point, hi: &Point, rng: &mut Rng) -> Point {
    Point::raw(
        lo.coords()
            .iter()
            .zip(hi.coords())
            .map(|(a, b)| (a + rng.gen::<f64>() * (b - a)).clamp(*a, *b))
            .collect(),
    )
}

fn diameter_of(shape: &Shape, norm: Norm) -> f64 {
    match shape {
        Shape::Box { lo, hi } => norm.norm(&(hi - lo)),
        Shape::Ball {
            center,
            radius,
            ball_norm,
        } => 2.0 * radius * norm.max_ratio_over(*ball_norm, center.dim()),
        Shape::Hull { vertices } => {
            let mut best = 0.0f64;
            for (i, a) in vertices.iter().enumerate() {
                for b in &vertices[i + 1..] {
                    best = best.max(norm.dist(a, b));
                }
            }
            best
        }
    }
}

/// `diam C` under an arbitrary norm. Closed form for boxes and balls; for
/// hulls the supremum is attained at a pair of vertices.
pub fn diameter(body: &ConvexBody, norm: Norm) -> Result<f64> {
    let d = diameter_of(&body.shape, norm);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::DegenerateBody("single point".into()))
    }
}

/// Precomputed simplices covering a hull (Carathéodory decomposition).
#[derive(Debug, Clone)]
struct HullData {
    affine_dim: usize,
    simplices: Vec<Simplex>,
}

#[derive(Debug, Clone)]
struct Simplex {
    origin: Vec<f64>,
    /// edge vectors, `k` rows of length `n`
    edges: Vec<Vec<f64>>,
    /// `(EᵀE)⁻¹Eᵀ`, `k` rows of length `n`
    pinv: Vec<Vec<f64>>,
    /// Rounding error of the barycentric coordinates.
    slack: f64,
}

impl HullData {
    fn new(vertices: &[Point]) -> Self {
        let scale = vertices
            .iter()
            .flat_map(|v| v.coords().iter().map(|c| c.abs()))
            .fold(1.0f64, f64::max);
        let diffs: Vec<Vec<f64>> = vertices[1..]
            .iter()
            .map(|v| (v - &vertices[0]).into_coords())
            .collect();
        let affine_dim = rank(&diffs, 1e-10 * scale);
        let m = vertices.len();
        let mut simplices = Vec::new();
        if affine_dim == 0 {
            simplices.push(Simplex {
                origin: vertices[0].coords().to_vec(),
                edges: vec![],
                pinv: vec![],
                slack: 0.0,
            });
        } else {
            for subset in combinations(m, affine_dim + 1) {
                let origin = vertices[subset[0]].coords().to_vec();
                let edges: Vec<Vec<f64>> = subset[1..]
                    .iter()
                    .map(|&i| (&vertices[i] - &vertices[subset[0]]).into_coords())
                    .collect();
                let n = origin.len();
                let pinv = if edges.len() == n {
                    // square system Eᵀλ = x − origin, solved directly
                    let et: Vec<Vec<f64>> = (0..n).map(|r| edges.iter().map(|e| e[r]).collect()).collect();
                    let Some(inv) = invert(et, 1e-12 * scale) else {
                        continue;
                    };
                    inv
                } else {
                    let gram: Vec<Vec<f64>> = edges
                        .iter()
                        .map(|a| edges.iter().map(|b| dot(a, b)).collect())
                        .collect();
                    let Some(inv) = invert(gram, 1e-12 * scale * scale) else {
                        continue;
                    };
                    inv.iter()
                        .map(|row| {
                            (0..n)
                                .map(|c| row.iter().zip(&edges).map(|(w, e)| w * e[c]).sum())
                                .collect()
                        })
                        .collect::<Vec<Vec<f64>>>()
                };
                let spread = pinv
                    .iter()
                    .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                simplices.push(Simplex {
                    origin,
                    edges,
                    slack: 64.0 * f64::EPSILON * scale * spread,
                    pinv,
                });
            }
        }
        HullData {
            affine_dim,
            simplices,
        }
    }

    fn contains(&self, p: &Point, tol: f64) -> bool {
        let x = p.coords();
        self.simplices.iter().any(|s| {
            let rel: Vec<f64> = x.iter().zip(&s.origin).map(|(a, b)| a - b).collect();
            let lambda: Vec<f64> = s.pinv.iter().map(|row| dot(row, &rel)).collect();
            let slack = tol + s.slack;
            if lambda.iter().any(|l| *l < -slack)
                || lambda.iter().sum::<f64>() > 1.0 + slack * lambda.len() as f64
            {
                return false;
            }
            // residual: distance from the affine hull of the simplex
            let mut resid = rel;
            for (l, e) in lambda.iter().zip(&s.edges) {
                for (r, ei) in resid.iter_mut().zip(e) {
                    *r -= l * ei;
                }
            }
            resid.iter().all(|r| r.abs() <= tol.max(HULL_TOL) * 16.0)
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > tol {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    basis.len()
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
fn invert(mut a: Vec<Vec<f64>>, tol: f64) -> Option<Vec<Vec<f64>>> {
    let k = a.len();
    let mut inv: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..k {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..k {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..k {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn diameter_examples() {
        let b = ConvexBody::cube(2, -1.0, 1.0, Norm::L2).unwrap();
        assert!((b.diameter() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        for norm in [Norm::L1, Norm::L2, Norm::Inf, Norm::P(3.0)] {
            let ball = ConvexBody::ball(p(&[0., 0.]), 1.0, norm, norm).unwrap();
            assert_eq!(ball.diameter(), 2.0);
        }
        let tri = ConvexBody::hull(vec![p(&[0., 0.]), p(&[1., 0.]), p(&[0., 1.])], Norm::L1).unwrap();
        assert_eq!(tri.diameter(), 2.0);
    }

    #[test]
    fn degenerate_bodies_rejected() {
        assert!(matches!(
            ConvexBody::hull(vec![p(&[1., 1.]), p(&[1., 1.])], Norm::L2),
            Err(Error::DegenerateBody(_))
        ));
        assert!(ConvexBody::interval(0.5, 0.5).is_err());
        assert!(ConvexBody::interval(1.0, 0.0).is_err());
    }

    #[test]
    fn box_diameter_is_norm_of_diagonal() {
        let lo = p(&[-1.0, 0.0, 2.0]);
        let hi = p(&[0.5, 3.0, 2.5]);
        for norm in [Norm::L1, Norm::L2, Norm::Inf] {
            let b = ConvexBody::boxed(lo.clone(), hi.clone(), norm).unwrap();
            assert_eq!(b.diameter(), norm.norm(&(&hi - &lo)));
            assert_eq!(diameter(&b, norm).unwrap(), b.diameter());
        }
    }

    #[test]
    fn hull_membership() {
        let tri = ConvexBody::hull(vec![p(&[0., 0.]), p(&[1., 0.]), p(&[0., 1.])], Norm::L2).unwrap();
        assert!(tri.contains(&p(&[0.25, 0.25])));
        assert!(tri.contains(&p(&[0.5, 0.5])));
        assert!(!tri.contains(&p(&[0.6, 0.6])));
        assert!(!tri.contains(&p(&[-0.01, 0.2])));
        // square given by five points, one interior
        let sq = ConvexBody::hull(
            vec![p(&[0., 0.]), p(&[1., 0.]), p(&[1., 1.]), p(&[0., 1.]), p(&[0.5, 0.5])],
            Norm::L2,
        )
        .unwrap();
        assert!(sq.contains(&p(&[0.9, 0.95])));
        assert!(!sq.contains(&p(&[1.01, 0.5])));
        // flat hull: segment in the plane
        let seg = ConvexBody::hull(vec![p(&[0., 0.]), p(&[1., 1.])], Norm::L2).unwrap();
        assert!(seg.contains(&p(&[0.3, 0.3])));
        assert!(!seg.contains(&p(&[0.3, 0.31])));
        let mut rng = from_seed(1);
        for _ in 0..20 {
            assert!(seg.contains(&seg.sample(&mut rng).unwrap()));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let b = ConvexBody::interval(0.0, 1.0).unwrap();
        let a = b.sample(&mut from_seed(11)).unwrap();
        let c = b.sample(&mut from_seed(11)).unwrap();
        assert_eq!(a, c);
        let ball = ConvexBody::ball(p(&[0., 0., 0.]), 1.0, Norm::L1, Norm::L2).unwrap();
        let mut rng = from_seed(5);
        for _ in 0..200 {
            assert!(ball.contains(&ball.sample(&mut rng).unwrap()));
        }
    }

    #[test]
    fn sample_mean_of_unit_interval() {
        let b = ConvexBody::interval(0.0, 1.0).unwrap();
        let mut rng = from_seed(2024);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| b.sample(&mut rng).unwrap()[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn json_round_trip() {
        let b = ConvexBody::ball(p(&[0.1, 0.2]), 0.7, Norm::Inf, Norm::L2).unwrap();
        let s = b.to_json();
        assert!(s.contains("\"kind\":\"ball\""));
        let back: ConvexBody = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.diameter(), b.diameter());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 3).len(), 10);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn thin_tetrahedron_contains_its_vertices() {
        let vertices = vec![
            p(&[-0.6501755939930389, 0.5886668344296015, -0.6415979755319245]),
            p(&[0.2082465103391815, -0.5478218065977767, -0.5356157710613174]),
            p(&[-0.05878180408145117, -0.6069514960881177, -0.0475648570953382]),
            p(&[-0.8883067942440963, 0.2801920442128154, 0.12049955217284314]),
        ];
        let t = ConvexBody::hull(vertices.clone(), Norm::L2).unwrap();
        for v in &vertices {
            assert!(t.contains(v), "{v}");
        }
    }

    #[test]
    fn ball_extreme_points_attain_diameter() {
        for (ball_norm, norm) in [(Norm::L2, Norm::L1), (Norm::L1, Norm::Inf), (Norm::Inf, Norm::L2)] {
            for n in 1..=3 {
                let c = Point::raw(vec![0.3; n]);
                let b = ConvexBody::ball(c, 0.7, ball_norm, norm).unwrap();
                let pts = b.extreme_points();
                assert!(pts.iter().all(|q| b.contains(q)));
                let far = pts
                    .iter()
                    .flat_map(|a| pts.iter().map(move |c| norm.dist(a, c)))
                    .fold(0.0, f64::max);
                assert!((far - b.diameter()).abs() <= 1e-12, "{n} {far} {}", b.diameter());
            }
        }
    }
}
