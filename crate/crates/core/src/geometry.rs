//! Bounded convex domains `O ⊂ R^d` and their boundary geometry.
//!
//! All shapes support membership tests, the Euclidean projection `p(y)` onto
//! the closure, the distance to the closure, the distance to the boundary
//! and the inner unit normal. Polytopes are projected with Dykstra's
//! alternating projections; everything else has a closed form or a
//! one-dimensional root find.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Sweep cap for Dykstra's algorithm on polytopes.
pub const POLYTOPE_MAX_SWEEPS: usize = 10_000;
/// Convergence tolerance for Dykstra's algorithm.
pub const POLYTOPE_TOL: f64 = 1e-12;

const MAX_DIM: usize = 8;

/// Open or closed membership.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Open,
    Closed,
}

/// One row `normal · y ≤ offset` of a polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// The built-in domain shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Interval { lo: f64, hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, semiaxes: Vec<f64> },
    Polytope { rows: Vec<Halfspace> },
}

/// A validated bounded convex open domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct DomainSpec {
    shape: Shape,
    dim: usize,
    witness: Vec<f64>,
    bbox_lo: Vec<f64>,
    bbox_hi: Vec<f64>,
    diameter: f64,
    row_norms: Vec<f64>,
}

impl From<DomainSpec> for Shape {
    fn from(d: DomainSpec) -> Shape {
        d.shape
    }
}

impl TryFrom<Shape> for DomainSpec {
    type Error = Error;
    fn try_from(s: Shape) -> Result<Self> {
        DomainSpec::new(s)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl DomainSpec {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Shape::Interval { lo, hi })
    }

    pub fn cube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Box { lo, hi })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(Shape::Ball { center, radius })
    }

    pub fn ellipsoid(center: Vec<f64>, semiaxes: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Ellipsoid { center, semiaxes })
    }

    /// Polytope `{y : a_i · y ≤ b_i}` from `(a_i, b_i)` rows.
    pub fn polytope(rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        Self::new(Shape::Polytope {
            rows: rows
                .into_iter()
                .map(|(normal, offset)| Halfspace { normal, offset })
                .collect(),
        })
    }

    pub fn new(shape: Shape) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidDomain(m.to_string()));
        match &shape {
            Shape::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad("interval requires finite lo < hi");
                }
                Ok(DomainSpec {
                    dim: 1,
                    witness: vec![0.5 * (lo + hi)],
                    bbox_lo: vec![*lo],
                    bbox_hi: vec![*hi],
                    diameter: hi - lo,
                    row_norms: vec![],
                    shape,
                })
            }
            Shape::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.len() > MAX_DIM {
                    return bad("box requires lo and hi of equal length 1..=8");
                }
                if !all_finite(lo) || !all_finite(hi) || lo.iter().zip(hi).any(|(l, h)| l >= h) {
                    return bad("box requires finite lo < hi componentwise");
                }
                let diag = norm(&sub(hi, lo));
                Ok(DomainSpec {
                    dim: lo.len(),
                    witness: lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect(),
                    bbox_lo: lo.clone(),
                    bbox_hi: hi.clone(),
                    diameter: diag,
                    row_norms: vec![],
                    shape,
                })
            }
            Shape::Ball { center, radius } => {
                if center.is_empty() || center.len() > MAX_DIM || !all_finite(center) {
                    return bad("ball center must be finite with dimension 1..=8");
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad("ball radius must be strictly positive");
                }
                Ok(DomainSpec {
                    dim: center.len(),
                    witness: center.clone(),
                    bbox_lo: center.iter().map(|c| c - radius).collect(),
                    bbox_hi: center.iter().map(|c| c + radius).collect(),
                    diameter: 2.0 * radius,
                    row_norms: vec![],
                    shape,
                })
            }
            Shape::Ellipsoid { center, semiaxes } => {
                if center.is_empty() || center.len() > MAX_DIM || center.len() != semiaxes.len() {
                    return bad("ellipsoid center and semiaxes must share a dimension 1..=8");
                }
                if !all_finite(center) || semiaxes.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return bad("ellipsoid semiaxes must be strictly positive");
                }
                let smax = semiaxes.iter().cloned().fold(0.0, f64::max);
                Ok(DomainSpec {
                    dim: center.len(),
                    witness: center.clone(),
                    bbox_lo: center.iter().zip(semiaxes).map(|(c, s)| c - s).collect(),
                    bbox_hi: center.iter().zip(semiaxes).map(|(c, s)| c + s).collect(),
                    diameter: 2.0 * smax,
                    row_norms: vec![],
                    shape,
                })
            }
            Shape::Polytope { rows } => {
                let dim = rows.first().map(|r| r.normal.len()).unwrap_or(0);
                if dim == 0 || dim > MAX_DIM {
                    return bad("polytope needs at least one row of dimension 1..=8");
                }
                let mut row_norms = Vec::with_capacity(rows.len());
                for r in rows {
                    if r.normal.len() != dim {
                        return bad("polytope rows have inconsistent dimensions");
                    }
                    let nr = norm(&r.normal);
                    if !(nr > 0.0 && nr.is_finite() && r.offset.is_finite()) {
                        return bad("polytope rows need finite offsets and nonzero normals");
                    }
                    row_norms.push(nr);
                }
                let (witness, depth) = chebyshev_center(rows, &row_norms)?;
                if !(depth > 0.0) {
                    return bad("polytope has empty interior");
                }
                let (bbox_lo, bbox_hi) = polytope_bbox(rows, dim)?;
                let diameter = norm(&sub(&bbox_hi, &bbox_lo));
                Ok(DomainSpec {
                    dim,
                    witness,
                    bbox_lo,
                    bbox_hi,
                    diameter,
                    row_norms,
                    shape,
                })
            }
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A point strictly inside the domain.
    pub fn witness(&self) -> &[f64] {
        &self.witness
    }

    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.bbox_lo, &self.bbox_hi)
    }

    /// Diameter of the domain; for polytopes the diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Default boundary tolerance, `1e-9 · diameter`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * self.diameter
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Interval { lo, hi } => format!("interval({lo}, {hi})"),
            Shape::Box { lo, hi } => format!("box({lo:?}, {hi:?})"),
            Shape::Ball { center, radius } => format!("ball({center:?}, {radius})"),
            Shape::Ellipsoid { center, semiaxes } => format!("ellipsoid({center:?}, {semiaxes:?})"),
            Shape::Polytope { rows } => format!("polytope({} rows, d = {})", rows.len(), self.dim),
        }
    }

    pub fn contains(&self, y: &[f64], mode: Mode) -> Result<bool> {
        check_dim(self.dim, y.len())?;
        let strict = mode == Mode::Open;
        let le = |lhs: f64, rhs: f64| if strict { lhs < rhs } else { lhs <= rhs };
        Ok(match &self.shape {
            Shape::Interval { lo, hi } => le(*lo, y[0]) && le(y[0], *hi),
            Shape::Box { lo, hi } => (0..self.dim).all(|k| le(lo[k], y[k]) && le(y[k], hi[k])),
            Shape::Ball { center, radius } => {
                let r2: f64 = y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                le(r2, radius * radius)
            }
            Shape::Ellipsoid { center, semiaxes } => {
                let q: f64 = (0..self.dim)
                    .map(|k| ((y[k] - center[k]) / semiaxes[k]).powi(2))
                    .sum();
                le(q, 1.0)
            }
            Shape::Polytope { rows } => rows.iter().all(|r| le(dot(&r.normal, y), r.offset)),
        })
    }

    /// Euclidean projection onto the closed domain.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.project_into(y, &mut out)?;
        Ok(out)
    }

    /// [`project`](Self::project) writing into `out`; allocation-free for
    /// intervals, boxes and balls.
    pub fn project_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim(self.dim, y.len())?;
        check_dim(self.dim, out.len())?;
        match &self.shape {
            Shape::Interval { lo, hi } => out[0] = y[0].clamp(*lo, *hi),
            Shape::Box { lo, hi } => {
                for k in 0..self.dim {
                    out[k] = y[k].clamp(lo[k], hi[k]);
                }
            }
            Shape::Ball { center, radius } => {
                let r2: f64 = y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                if r2 <= radius * radius {
                    out.copy_from_slice(y);
                } else {
                    let s = radius / r2.sqrt();
                    for k in 0..self.dim {
                        out[k] = center[k] + (y[k] - center[k]) * s;
                    }
                }
            }
            Shape::Ellipsoid { center, semiaxes } => {
                if self.contains(y, Mode::Closed)? {
                    out.copy_from_slice(y);
                } else {
                    out.copy_from_slice(&project_ellipsoid_exterior(y, center, semiaxes));
                }
            }
            Shape::Polytope { rows } => {
                if self.contains(y, Mode::Closed)? {
                    out.copy_from_slice(y);
                } else {
                    out.copy_from_slice(&dykstra(y, rows, &self.row_norms)?);
                }
            }
        }
        Ok(())
    }

    /// `d(y, Ō) = |y − p(y)|`.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        let p = self.project(y)?;
        Ok(norm(&sub(y, &p)))
    }

    /// Distance from `y` to the boundary `∂O`, for any `y`.
    pub fn boundary_distance(&self, y: &[f64]) -> Result<f64> {
        Ok(self.signed_distance(y)?.abs())
    }

    /// Positive distance to `∂O` inside `Ō`, minus the distance to `Ō` outside.
    pub fn signed_distance(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dim, y.len())?;
        if !self.contains(y, Mode::Closed)? {
            return Ok(-self.distance(y)?);
        }
        Ok(match &self.shape {
            Shape::Interval { lo, hi } => (y[0] - lo).min(hi - y[0]),
            Shape::Box { lo, hi } => (0..self.dim)
                .map(|k| (y[k] - lo[k]).min(hi[k] - y[k]))
                .fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => radius - norm(&sub(y, center)),
            Shape::Ellipsoid { center, semiaxes } => ellipsoid_interior_distance(y, center, semiaxes),
            Shape::Polytope { rows } => rows
                .iter()
                .zip(&self.row_norms)
                .map(|(r, nr)| (r.offset - dot(&r.normal, y)) / nr)
                .fold(f64::INFINITY, f64::min),
        }
        .max(0.0))
    }

    /// Unit inner normal at a point within `tol` of the boundary.
    ///
    /// At edges and corners of boxes and polytopes this is the normalized
    /// average of the inward normals of all faces within `tol`.
    pub fn inner_normal(&self, y: &[f64], tol: f64) -> Result<Vec<f64>> {
        check_dim(self.dim, y.len())?;
        let bd = self.boundary_distance(y)?;
        if !(bd < tol) {
            return Err(Error::OutOfDomain(format!(
                "inner_normal: point is {bd:e} from the boundary (tol {tol:e})"
            )));
        }
        let normalize = |v: Vec<f64>| -> Result<Vec<f64>> {
            let nv = norm(&v);
            if nv > 0.0 {
                Ok(v.into_iter().map(|x| x / nv).collect())
            } else {
                Err(Error::OutOfDomain("inner_normal: degenerate normal cone".into()))
            }
        };
        match &self.shape {
            Shape::Interval { lo, hi } => {
                Ok(vec![if (y[0] - lo).abs() <= (y[0] - hi).abs() { 1.0 } else { -1.0 }])
            }
            Shape::Box { lo, hi } => {
                let mut v = vec![0.0; self.dim];
                for k in 0..self.dim {
                    if (y[k] - lo[k]).abs() < tol {
                        v[k] += 1.0;
                    }
                    if (y[k] - hi[k]).abs() < tol {
                        v[k] -= 1.0;
                    }
                }
                normalize(v)
            }
            Shape::Ball { center, .. } => normalize(sub(center, y)),
            Shape::Ellipsoid { center, semiaxes } => normalize(
                (0..self.dim)
                    .map(|k| (center[k] - y[k]) / (semiaxes[k] * semiaxes[k]))
                    .collect(),
            ),
            Shape::Polytope { rows } => {
                let mut v = vec![0.0; self.dim];
                for (r, nr) in rows.iter().zip(&self.row_norms) {
                    if ((dot(&r.normal, y) - r.offset) / nr).abs() < tol {
                        for k in 0..self.dim {
                            v[k] -= r.normal[k] / nr;
                        }
                    }
                }
                normalize(v)
            }
        }
    }

    /// Uniform draw from `O` by rejection from the bounding box.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let y: Vec<f64> = (0..self.dim)
                .map(|k| rng.random_range(self.bbox_lo[k]..self.bbox_hi[k]))
                .collect();
            if self.contains(&y, Mode::Open).unwrap_or(false) {
                return y;
            }
        }
    }

    /// Lebesgue volume of the bounding box.
    pub fn bbox_volume(&self) -> f64 {
        self.bbox_lo.iter().zip(&self.bbox_hi).map(|(l, h)| h - l).product()
    }

    /// Center and radius when the domain is a ball or an interval.
    pub fn as_ball(&self) -> Option<(Vec<f64>, f64)> {
        match &self.shape {
            Shape::Interval { lo, hi } => Some((vec![0.5 * (lo + hi)], 0.5 * (hi - lo))),
            Shape::Ball { center, radius } => Some((center.clone(), *radius)),
            _ => None,
        }
    }

    /// True for shapes with a smooth boundary (interval, ball, ellipsoid).
    pub fn has_smooth_boundary(&self) -> bool {
        matches!(
            self.shape,
            Shape::Interval { .. } | Shape::Ball { .. } | Shape::Ellipsoid { .. }
        )
    }
}

fn project_ellipsoid_exterior(y: &[f64], center: &[f64], s: &[f64]) -> Vec<f64> {
    let w = sub(y, center);
    // F(t) = Σ (w_k s_k / (s_k² + t))² − 1 is decreasing on t ≥ 0, F(0) > 0.
    let f = |t: f64| -> f64 {
        w.iter()
            .zip(s)
            .map(|(wk, sk)| (wk * sk / (sk * sk + t)).powi(2))
            .sum::<f64>()
            - 1.0
    };
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = norm(&w) * smax + smax * smax;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * (1.0 + hi) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    (0..w.len())
        .map(|k| center[k] + w[k] * s[k] * s[k] / (s[k] * s[k] + t))
        .collect()
}

/// Distance from an interior point to the ellipsoid surface.
fn ellipsoid_interior_distance(y: &[f64], center: &[f64], s: &[f64]) -> f64 {
    let w = sub(y, center);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let is_min = |k: usize| s[k] <= smin * (1.0 + 1e-14);
    let wmin2: f64 = (0..w.len()).filter(|&k| is_min(k)).map(|k| w[k] * w[k]).sum();
    let f = |t: f64| -> f64 {
        w.iter()
            .zip(s)
            .map(|(wk, sk)| (wk * sk / (sk * sk + t)).powi(2))
            .sum::<f64>()
            - 1.0
    };
    let point_at = |t: f64| -> Vec<f64> {
        (0..w.len()).map(|k| w[k] * s[k] * s[k] / (s[k] * s[k] + t)).collect()
    };
    let lo_t = -smin * smin;
    if wmin2 <= 1e-28 * (1.0 + norm(&w)).powi(2) {
        // Degenerate: the nearest point may lie on the circle of the
        // shortest axes.
        let mut z = vec![0.0; w.len()];
        let mut q = 0.0;
        for k in 0..w.len() {
            if !is_min(k) {
                z[k] = w[k] * s[k] * s[k] / (s[k] * s[k] - smin * smin);
                q += (z[k] / s[k]).powi(2);
            }
        }
        if q <= 1.0 {
            let rest: f64 = (0..w.len())
                .filter(|&k| !is_min(k))
                .map(|k| (z[k] - w[k]).powi(2))
                .sum();
            return (rest + smin * smin * (1.0 - q)).sqrt();
        }
    }
    let (mut lo, mut hi) = (lo_t, 0.0);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo_t || mid >= 0.0 {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * smin * smin {
            break;
        }
    }
    let z = point_at(0.5 * (lo + hi));
    norm(&sub(&z, &w))
}

fn dykstra(y: &[f64], rows: &[Halfspace], row_norms: &[f64]) -> Result<Vec<f64>> {
    let d = y.len();
    let mut x = y.to_vec();
    let mut incr = vec![vec![0.0; d]; rows.len()];
    let mut v = vec![0.0; d];
    let mut residual = f64::INFINITY;
    for _ in 0..POLYTOPE_MAX_SWEEPS {
        let mut change = 0.0;
        for (i, r) in rows.iter().enumerate() {
            for k in 0..d {
                v[k] = x[k] + incr[i][k];
            }
            let viol = dot(&r.normal, &v) - r.offset;
            let scale = if viol > 0.0 { viol / (row_norms[i] * row_norms[i]) } else { 0.0 };
            for k in 0..d {
                let z = v[k] - scale * r.normal[k];
                incr[i][k] = v[k] - z;
                change += (z - x[k]) * (z - x[k]);
                x[k] = z;
            }
        }
        let infeas = rows
            .iter()
            .zip(row_norms)
            .map(|(r, nr)| ((dot(&r.normal, &x) - r.offset) / nr).max(0.0))
            .fold(0.0, f64::max);
        residual = change.sqrt().max(infeas);
        if residual <= POLYTOPE_TOL {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        solver: "dykstra polytope projection",
        iterations: POLYTOPE_MAX_SWEEPS,
        residual,
    })
}

fn lp_error(e: microlp::Error) -> Error {
    match e {
        microlp::Error::Unbounded => Error::InvalidDomain("polytope is unbounded".into()),
        microlp::Error::Infeasible => Error::InvalidDomain("polytope is empty".into()),
        other => Error::InvalidDomain(format!("polytope validation failed: {other}")),
    }
}

/// Largest inscribed ball: maximize `t` subject to `a_i·y + |a_i| t ≤ b_i`.
fn chebyshev_center(rows: &[Halfspace], row_norms: &[f64]) -> Result<(Vec<f64>, f64)> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let dim = rows[0].normal.len();
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let ys: Vec<_> = (0..dim)
        .map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    let t = p.add_var(1.0, (f64::NEG_INFINITY, 1e6));
    for (r, nr) in rows.iter().zip(row_norms) {
        let mut expr: Vec<_> = ys.iter().zip(&r.normal).map(|(v, a)| (*v, *a)).collect();
        expr.push((t, *nr));
        p.add_constraint(expr.as_slice(), ComparisonOp::Le, r.offset);
    }
    let sol = p
        .solve()
        .map_err(lp_error)?
        .into_solution()
        .map_err(|_| Error::InvalidDomain("polytope LP interrupted".into()))?;
    Ok((ys.iter().map(|v| sol.var_value(*v)).collect(), sol.var_value(t)))
}

fn polytope_bbox(rows: &[Halfspace], dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    use microlp::{ComparisonOp, OptimizationDirection, Problem};
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for k in 0..dim {
        for (dir, out) in [
            (OptimizationDirection::Minimize, &mut lo),
            (OptimizationDirection::Maximize, &mut hi),
        ] {
            let mut p = Problem::new(dir);
            let ys: Vec<_> = (0..dim)
                .map(|j| p.add_var(if j == k { 1.0 } else { 0.0 }, (f64::NEG_INFINITY, f64::INFINITY)))
                .collect();
            for r in rows {
                let expr: Vec<_> = ys.iter().zip(&r.normal).map(|(v, a)| (*v, *a)).collect();
                p.add_constraint(expr.as_slice(), ComparisonOp::Le, r.offset);
            }
            let sol = p
                .solve()
                .map_err(lp_error)?
                .into_solution()
                .map_err(|_| Error::InvalidDomain("polytope LP interrupted".into()))?;
            out[k] = sol.var_value(ys[k]);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn triangle() -> DomainSpec {
        DomainSpec::polytope(vec![
            (vec![-1.0, 0.0], 0.0),
            (vec![0.0, -1.0], 0.0),
            (vec![1.0, 1.0], 1.0),
        ])
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn contains_examples() {
        let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(ball.contains(&[0.5, 0.0], Mode::Open).unwrap());
        assert!(!ball.contains(&[1.0, 0.0], Mode::Open).unwrap());
        assert!(ball.contains(&[1.0, 0.0], Mode::Closed).unwrap());
        let iv = DomainSpec::interval(0.0, 1.0).unwrap();
        assert!(!iv.contains(&[1.5], Mode::Open).unwrap());
        assert!(!iv.contains(&[1.5], Mode::Closed).unwrap());
        assert!(matches!(
            ball.contains(&[0.0], Mode::Open),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn project_examples() {
        let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(close(&ball.project(&[2.0, 0.0]).unwrap(), &[1.0, 0.0], 1e-15));
        let bx = DomainSpec::cube(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(bx.project(&[2.0, -1.0]).unwrap(), vec![1.0, 0.0]);
    }

    /// Dense grid search over the closed triangle.
    fn grid_oracle(dom: &DomainSpec, y: &[f64], h: f64) -> (Vec<f64>, f64) {
        let steps = (1.0 / h).round() as usize;
        let mut best = (vec![0.0, 0.0], f64::INFINITY);
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let z = [i as f64 * h, j as f64 * h];
                debug_assert!(dom.contains(&z, Mode::Closed).unwrap() || i + j == steps);
                let dd = (z[0] - y[0]).powi(2) + (z[1] - y[1]).powi(2);
                if dd < best.1 {
                    best = (z.to_vec(), dd);
                }
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn triangle_projection_matches_grid_oracle() {
        let tri = triangle();
        let (zo, dist_o) = grid_oracle(&tri, &[1.0, 1.0], 1e-4);
        assert!(close(&zo, &[0.5, 0.5], 1e-4));
        assert!((dist_o - 0.5f64.sqrt()).abs() < 1e-4);
        let p = tri.project(&[1.0, 1.0]).unwrap();
        assert!(close(&p, &zo, 1e-4));
        assert!(close(&p, &[0.5, 0.5], 1e-10));
        assert!((tri.distance(&[1.0, 1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn distance_examples() {
        let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball.distance(&[3.0, 0.0]).unwrap(), 2.0);
        assert_eq!(ball.distance(&[0.3, 0.2]).unwrap(), 0.0);
        assert_eq!(triangle().distance(&[0.2, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn inner_normal_examples() {
        let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(close(&ball.inner_normal(&[0.0, 1.0], 1e-9).unwrap(), &[0.0, -1.0], 1e-15));
        let iv = DomainSpec::interval(0.0, 1.0).unwrap();
        assert_eq!(iv.inner_normal(&[0.0], 1e-9).unwrap(), vec![1.0]);
        assert_eq!(iv.inner_normal(&[1.0], 1e-9).unwrap(), vec![-1.0]);
        let bx = DomainSpec::cube(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(bx.inner_normal(&[0.5, 0.0], 1e-9).unwrap(), vec![0.0, 1.0]);
        let corner = bx.inner_normal(&[0.0, 0.0], 1e-9).unwrap();
        let s = 0.5f64.sqrt();
        assert!(close(&corner, &[s, s], 1e-15));
        assert!(matches!(
            ball.inner_normal(&[0.2, 0.0], 1e-9),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(DomainSpec::interval(1.0, 0.0).is_err());
        assert!(DomainSpec::ball(vec![0.0], 0.0).is_err());
        assert!(DomainSpec::ellipsoid(vec![0.0, 0.0], vec![1.0, -1.0]).is_err());
        assert!(DomainSpec::cube(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        // quadrant: unbounded
        assert!(DomainSpec::polytope(vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0)]).is_err());
        // empty interior
        assert!(DomainSpec::polytope(vec![
            (vec![1.0], 0.0),
            (vec![-1.0], 0.0),
        ])
        .is_err());
        let tri = triangle();
        assert!(tri.contains(tri.witness(), Mode::Open).unwrap());
    }

    #[test]
    fn ellipsoid_interior_distance_matches_sampling() {
        let e = DomainSpec::ellipsoid(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        for y in [[0.3, 0.1], [0.0, 0.0], [1.5, 0.2], [0.0, 0.5]] {
            let d = e.boundary_distance(&y).unwrap();
            let brute = (0..200_000)
                .map(|i| {
                    let a = i as f64 * std::f64::consts::TAU / 200_000.0;
                    ((2.0 * a.cos() - y[0]).powi(2) + (a.sin() - y[1]).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((d - brute).abs() < 1e-6, "y={y:?} d={d} brute={brute}");
        }
    }

    fn domains() -> Vec<DomainSpec> {
        vec![
            DomainSpec::interval(-0.5, 1.0).unwrap(),
            DomainSpec::cube(vec![0.0, -1.0], vec![1.0, 0.5]).unwrap(),
            DomainSpec::ball(vec![0.2, -0.1], 0.7).unwrap(),
            DomainSpec::ellipsoid(vec![0.0, 0.0], vec![1.5, 0.5]).unwrap(),
            triangle(),
            DomainSpec::ellipsoid(vec![0.0, 0.0, 0.0], vec![1.0, 0.6, 0.3]).unwrap(),
        ]
    }

    fn pt(dim: usize, seed: u64, scale: f64) -> Vec<f64> {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..dim).map(|_| r.random_range(-scale..scale)).collect()
    }

    proptest! {
        #[test]
        fn projection_properties(seed_a in any::<u64>(), seed_b in any::<u64>(), which in 0usize..6) {
            let dom = &domains()[which];
            let d = dom.dim();
            let y = pt(d, seed_a, 3.0);
            let z = pt(d, seed_b, 3.0);
            let py = dom.project(&y).unwrap();
            let pz = dom.project(&z).unwrap();
            // nonexpansive
            prop_assert!(norm(&sub(&py, &pz)) <= norm(&sub(&y, &z)) * (1.0 + 1e-9) + 1e-12);
            // idempotent
            let ppy = dom.project(&py).unwrap();
            prop_assert!(norm(&sub(&ppy, &py)) <= 1e-9);
            // variational inequality against a point of the closure
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed_b);
            let w = dom.sample_uniform(&mut rng);
            let res = sub(&y, &py);
            prop_assert!(dot(&res, &sub(&w, &py)) <= 1e-9 * norm(&res).max(1.0));
            // distance is 1-Lipschitz
            let dy = dom.distance(&y).unwrap();
            let dz = dom.distance(&z).unwrap();
            prop_assert!((dy - dz).abs() <= norm(&sub(&y, &z)) + 1e-9);
        }

        #[test]
        fn normal_is_parallel_to_projection_residual(seed in any::<u64>(), which in 0usize..6) {
            let dom = &domains()[which];
            let y = pt(dom.dim(), seed, 4.0);
            prop_assume!(!dom.contains(&y, Mode::Closed).unwrap());
            let p = dom.project(&y).unwrap();
            let tol = 1e-8;
            let n = dom.inner_normal(&p, tol).unwrap();
            let r = sub(&p, &y);
            let rn = norm(&r);
            // skip non-smooth points (box/polytope edges and corners)
            let smooth = dom.has_smooth_boundary() || match dom.shape() {
                Shape::Box { lo, hi } => (0..dom.dim()).filter(|&k| (p[k]-lo[k]).abs() < tol || (p[k]-hi[k]).abs() < tol).count() == 1,
                Shape::Polytope { rows } => rows.iter().filter(|r| (dot(&r.normal, &p) - r.offset).abs() < tol).count() == 1,
                _ => true,
            };
            prop_assume!(smooth);
            let cos = dot(&n, &r) / rn;
            prop_assert!((1.0 - cos).abs() < 1e-6, "cos = {}", cos);
        }
    }
}
