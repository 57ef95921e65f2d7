use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{DomainSpec, Mode};

/// Spatial grid with pinned endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    m: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Grid {
    /// Builds a grid with `m ≥ 3` interior nodes, anchored at `a, b ∈ O`.
    pub fn new(m: usize, a: Vec<f64>, b: Vec<f64>, dom: &DomainSpec) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidParameter(format!("grid needs M ≥ 3, got {m}")));
        }
        check_dim(dom.dim(), a.len())?;
        check_dim(dom.dim(), b.len())?;
        if !dom.contains(&a, Mode::Open)? || !dom.contains(&b, Mode::Open)? {
            return Err(Error::OutOfDomain(format!(
                "grid anchors must lie in the open domain: a = {a:?}, b = {b:?}"
            )));
        }
        Ok(Grid { m, a, b })
    }

    /// Grid anchored at the domain's interior witness point at both ends.
    pub fn centered(m: usize, dom: &DomainSpec) -> Result<Self> {
        Self::new(m, dom.witness().to_vec(), dom.witness().to_vec(), dom)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn dtheta(&self) -> f64 {
        1.0 / (self.m as f64 + 1.0)
    }

    /// Position of the interior node stored at index `i` (0-based).
    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.dtheta()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn zeros(&self) -> PathState {
        PathState::zeros(self.m, self.d())
    }

    /// The harmonic path `a + (b − a) θ`.
    pub fn line(&self) -> PathState {
        let mut p = self.zeros();
        for i in 0..self.m {
            let t = self.theta(i);
            for c in 0..self.d() {
                p.values[i * self.d() + c] = self.a[c] + (self.b[c] - self.a[c]) * t;
            }
        }
        p
    }

    /// `f(θ)` sampled at the interior nodes, one closure call per node.
    pub fn sample_fn(&self, mut f: impl FnMut(f64) -> Vec<f64>) -> PathState {
        let d = self.d();
        let mut p = self.zeros();
        for i in 0..self.m {
            let v = f(self.theta(i));
            p.values[i * d..(i + 1) * d].copy_from_slice(&v[..d]);
        }
        p
    }

    /// `e_k(θ) = √2 sin(πkθ)` in component `component`, zero elsewhere.
    pub fn sine_mode(&self, k: usize, component: usize) -> PathState {
        let d = self.d();
        self.sample_fn(|t| {
            let mut v = vec![0.0; d];
            v[component] = std::f64::consts::SQRT_2 * (std::f64::consts::PI * k as f64 * t).sin();
            v
        })
    }

    /// Grid inner product `dθ Σ_j f_j · g_j` over interior nodes.
    pub fn inner(&self, f: &PathState, g: &PathState) -> f64 {
        debug_assert_eq!(f.values.len(), g.values.len());
        self.dtheta() * f.values.iter().zip(&g.values).map(|(x, y)| x * y).sum::<f64>()
    }

    /// Discrete Laplacian `(u_{j-1} − 2u_j + u_{j+1}) / dθ²` with the
    /// grid's pinned endpoints.
    pub fn laplacian(&self, u: &PathState) -> PathState {
        self.laplacian_with(u, &self.a, &self.b)
    }

    /// Discrete Laplacian with zero boundary values.
    pub fn laplacian_dirichlet(&self, u: &PathState) -> PathState {
        let z = vec![0.0; self.d()];
        self.laplacian_with(u, &z, &z)
    }

    fn laplacian_with(&self, u: &PathState, left: &[f64], right: &[f64]) -> PathState {
        let (m, d) = (self.m, self.d());
        let inv = 1.0 / (self.dtheta() * self.dtheta());
        let mut out = self.zeros();
        for i in 0..m {
            for c in 0..d {
                let l = if i == 0 { left[c] } else { u.values[(i - 1) * d + c] };
                let r = if i + 1 == m { right[c] } else { u.values[(i + 1) * d + c] };
                out.values[i * d + c] = (l - 2.0 * u.values[i * d + c] + r) * inv;
            }
        }
        out
    }

    pub fn check_path(&self, p: &PathState) -> Result<()> {
        check_dim(self.m, p.m)?;
        check_dim(self.d(), p.d)
    }

    /// Checks that the anchors lie in `dom`.
    pub fn check_domain(&self, dom: &DomainSpec) -> Result<()> {
        Grid::new(self.m, self.a.clone(), self.b.clone(), dom).map(|_| ())
    }
}

/// Interior node values of a path, node-major (`values[i * d + c]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    m: usize,
    d: usize,
    values: Vec<f64>,
}

impl PathState {
    pub fn zeros(m: usize, d: usize) -> Self {
        PathState {
            m,
            d,
            values: vec![0.0; m * d],
        }
    }

    pub fn from_values(m: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        check_dim(m * d, values.len())?;
        Ok(PathState { m, d, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &PathState) -> PathState {
        PathState {
            m: self.m,
            d: self.d,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_scaled(&mut self, s: f64, other: &PathState) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> PathState {
        PathState {
            m: self.m,
            d: self.d,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// The discrete sine basis `e_k(θ_j) = √2 sin(πkθ_j)`, `k = 1..=M`.
///
/// The vectors are orthonormal for the grid inner product and diagonalize
/// the Dirichlet second difference with eigenvalues
/// `λ_k = (2 / dθ²)(1 − cos(πk dθ))`.
#[derive(Clone, Debug)]
pub struct SineBasis {
    m: usize,
    table: Vec<f64>,
}

impl SineBasis {
    pub fn new(m: usize) -> Self {
        let dt = 1.0 / (m as f64 + 1.0);
        let mut table = vec![0.0; m * m];
        for k in 1..=m {
            for i in 0..m {
                let th = (i as f64 + 1.0) * dt;
                table[(k - 1) * m + i] =
                    std::f64::consts::SQRT_2 * (std::f64::consts::PI * k as f64 * th).sin();
            }
        }
        SineBasis { m, table }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Discrete eigenvalue `λ_k` of `−Δ` for `k ≥ 1`.
    pub fn eigenvalue(m: usize, k: usize) -> f64 {
        let dt = 1.0 / (m as f64 + 1.0);
        2.0 / (dt * dt) * (1.0 - (std::f64::consts::PI * k as f64 * dt).cos())
    }

    /// `e_k` at interior index `i`.
    pub fn at(&self, k: usize, i: usize) -> f64 {
        self.table[(k - 1) * self.m + i]
    }

    /// Coefficients `⟨u_c, e_k⟩` for `k = 1..=M` of component `c`.
    pub fn coefficients(&self, u: &PathState, c: usize) -> Vec<f64> {
        let d = u.d();
        let dt = 1.0 / (self.m as f64 + 1.0);
        let vals = u.values();
        (1..=self.m)
            .map(|k| {
                let row = &self.table[(k - 1) * self.m..k * self.m];
                dt * row.iter().enumerate().map(|(i, e)| e * vals[i * d + c]).sum::<f64>()
            })
            .collect()
    }

    /// `⟨u_c, e_k⟩` for a single mode.
    pub fn coefficient(&self, u: &PathState, k: usize, c: usize) -> f64 {
        let d = u.d();
        let dt = 1.0 / (self.m as f64 + 1.0);
        let row = &self.table[(k - 1) * self.m..k * self.m];
        dt * row.iter().enumerate().map(|(i, e)| e * u.values()[i * d + c]).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_basis_is_orthonormal() {
        let dom = DomainSpec::interval(-1.0, 1.0).unwrap();
        let g = Grid::centered(15, &dom).unwrap();
        for k in 1..=15 {
            for l in 1..=15 {
                let ip = g.inner(&g.sine_mode(k, 0), &g.sine_mode(l, 0));
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12, "k={k} l={l} ip={ip}");
            }
        }
    }

    #[test]
    fn laplacian_eigenpairs() {
        let dom = DomainSpec::interval(-1.0, 1.0).unwrap();
        let g = Grid::centered(31, &dom).unwrap();
        for k in [1, 5, 31] {
            let e = g.sine_mode(k, 0);
            let le = g.laplacian_dirichlet(&e);
            let lam = SineBasis::eigenvalue(31, k);
            for (a, b) in le.values().iter().zip(e.values()) {
                assert!((a + lam * b).abs() < 1e-8 * lam);
            }
        }
        // the line is harmonic
        let dom = DomainSpec::interval(0.0, 1.0).unwrap();
        let g = Grid::new(7, vec![0.2], vec![0.9], &dom).unwrap();
        assert!(g.laplacian(&g.line()).max_abs() < 1e-10);
    }

    #[test]
    fn anchors_must_be_interior() {
        let dom = DomainSpec::interval(0.0, 1.0).unwrap();
        assert!(Grid::new(7, vec![0.0], vec![0.5], &dom).is_err());
        assert!(Grid::new(2, vec![0.5], vec![0.5], &dom).is_err());
    }
}
