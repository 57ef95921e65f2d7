//! Convex potentials `φ` on the closed domain and their Moreau–Yosida
//! envelopes.
//!
//! `Φ` is `φ` on `Ō` and `+∞` outside. For `n > 0` the envelope is
//!
//! ```text
//! Φ_n(x) = inf_y { Φ(y) + n |x − y|² },   ∂Φ_n(x) = 2n (x − prox_n(x))
//! ```
//!
//! where `prox_n(x)` is the unique minimizer. For `φ ≡ 0` this is
//! `Φ_n = n d(x, Ō)²` with `prox_n = p`, the projection onto `Ō`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{DomainSpec, Mode};
use crate::rng::stream;

/// Tolerance of the scalar bisection used by the log-barrier prox.
pub const BARRIER_PROX_TOL: f64 = 1e-12;
/// Iteration cap of the scalar bisection used by the log-barrier prox.
pub const BARRIER_PROX_MAX_ITERS: usize = 200;
/// Iteration cap of the projected-gradient prox used for custom potentials.
pub const CUSTOM_PROX_MAX_ITERS: usize = 10_000;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SubgradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A user-supplied convex potential.
///
/// `value` must be finite on `Ō`; `min_subgradient` must return the element
/// of least norm of the subdifferential and is evaluated on `Ō`.
#[derive(Clone)]
pub struct CustomPotential {
    pub name: String,
    pub value: ValueFn,
    pub min_subgradient: SubgradientFn,
    /// A lower bound for `φ` on `Ō`.
    pub lower_bound: f64,
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential")
            .field("name", &self.name)
            .field("lower_bound", &self.lower_bound)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum PotentialKind {
    Zero,
    /// `φ(y) = weight · |y − center|² / 2`.
    Quadratic { center: Vec<f64>, weight: f64 },
    /// `φ(y) = h(d(y, ∂O))` with `h(s) = s log s − s`.
    LogBarrier,
    Custom(CustomPotential),
}

/// Serializable description of a potential (custom potentials keep only
/// their name).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialDescriptor {
    Zero {},
    Quadratic { center: Vec<f64>, weight: f64 },
    LogBarrier {},
    Custom { name: String },
}

/// A validated convex potential on a domain.
#[derive(Clone, Debug)]
pub struct PotentialSpec {
    kind: PotentialKind,
    dom: DomainSpec,
}

fn barrier_h(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * s.ln() - s
    }
}

impl PotentialSpec {
    pub fn zero(dom: DomainSpec) -> Self {
        PotentialSpec {
            kind: PotentialKind::Zero,
            dom,
        }
    }

    pub fn quadratic(dom: DomainSpec, center: Vec<f64>, weight: f64) -> Result<Self> {
        Self::new(PotentialKind::Quadratic { center, weight }, dom)
    }

    pub fn log_barrier(dom: DomainSpec) -> Result<Self> {
        Self::new(PotentialKind::LogBarrier, dom)
    }

    pub fn new(kind: PotentialKind, dom: DomainSpec) -> Result<Self> {
        match &kind {
            PotentialKind::Zero => {}
            PotentialKind::Quadratic { center, weight } => {
                check_dim(dom.dim(), center.len())?;
                if !(weight.is_finite() && *weight >= 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPotential(
                        "quadratic potential needs a finite center and weight ≥ 0".into(),
                    ));
                }
            }
            PotentialKind::LogBarrier => match dom.as_ball() {
                Some((_, r)) if r <= 1.0 => {}
                Some((_, r)) => {
                    return Err(Error::InvalidPotential(format!(
                        "log barrier is convex only while d(y, ∂O) ≤ 1; inradius is {r}"
                    )))
                }
                None => {
                    return Err(Error::InvalidPotential(
                        "log barrier is supported on balls and intervals only".into(),
                    ))
                }
            },
            PotentialKind::Custom(c) => {
                let spec = PotentialSpec {
                    kind: kind.clone(),
                    dom: dom.clone(),
                };
                spec.check_convexity(2_000)?;
                let (a, _) = spec.subgradient_l2_integral(20_000, 1);
                let (b, _) = spec.subgradient_l2_integral(40_000, 2);
                if !(a.is_finite() && b.is_finite()) || (a - b).abs() > 0.5 * a.max(b).max(1e-300) {
                    return Err(Error::InvalidPotential(format!(
                        "custom potential '{}': ∫|∂₀φ|² quadrature is not stable ({a} vs {b})",
                        c.name
                    )));
                }
                if !c.lower_bound.is_finite() {
                    return Err(Error::InvalidPotential("lower bound must be finite".into()));
                }
            }
        }
        Ok(PotentialSpec { kind, dom })
    }

    pub fn from_descriptor(desc: &PotentialDescriptor, dom: DomainSpec) -> Result<Self> {
        match desc {
            PotentialDescriptor::Zero {} => Ok(Self::zero(dom)),
            PotentialDescriptor::Quadratic { center, weight } => {
                Self::quadratic(dom, center.clone(), *weight)
            }
            PotentialDescriptor::LogBarrier {} => Self::log_barrier(dom),
            PotentialDescriptor::Custom { name } => Err(Error::InvalidPotential(format!(
                "custom potential '{name}' cannot be reconstructed from a descriptor"
            ))),
        }
    }

    pub fn descriptor(&self) -> PotentialDescriptor {
        match &self.kind {
            PotentialKind::Zero => PotentialDescriptor::Zero {},
            PotentialKind::Quadratic { center, weight } => PotentialDescriptor::Quadratic {
                center: center.clone(),
                weight: *weight,
            },
            PotentialKind::LogBarrier => PotentialDescriptor::LogBarrier {},
            PotentialKind::Custom(c) => PotentialDescriptor::Custom { name: c.name.clone() },
        }
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.dom
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::Zero)
    }

    /// `φ` evaluated by its formula, without the domain indicator.
    fn phi_formula(&self, y: &[f64]) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic { center, weight } => {
                0.5 * weight * y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
            }
            PotentialKind::LogBarrier => {
                let (c, r) = self.dom.as_ball().expect("validated at construction");
                let dist = r - y.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                barrier_h(dist.max(0.0))
            }
            PotentialKind::Custom(c) => (c.value)(y),
        }
    }

    /// `Φ(y)`: `φ(y)` on `Ō`, `+∞` outside.
    pub fn value(&self, y: &[f64]) -> Result<f64> {
        if self.dom.contains(y, Mode::Closed)? {
            Ok(self.phi_formula(y))
        } else {
            Ok(f64::INFINITY)
        }
    }

    /// Infimum of `φ` over `Ō` (or a lower bound for it).
    pub fn lower_bound(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Quadratic { center, weight } => {
                let d = self.dom.distance(center).unwrap_or(0.0);
                0.5 * weight * d * d
            }
            PotentialKind::LogBarrier => {
                let (_, r) = self.dom.as_ball().expect("validated at construction");
                barrier_h(r.min(1.0))
            }
            PotentialKind::Custom(c) => c.lower_bound,
        }
    }

    /// Minimal-norm subgradient `∂₀φ(y)` at an interior point.
    pub fn min_subgradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        if !self.dom.contains(y, Mode::Open)? {
            return Err(Error::OutOfDomain(format!(
                "min_subgradient requires an interior point, got {y:?}"
            )));
        }
        Ok(self.min_subgradient_unchecked(y))
    }

    fn min_subgradient_unchecked(&self, y: &[f64]) -> Vec<f64> {
        match &self.kind {
            PotentialKind::Zero => vec![0.0; y.len()],
            PotentialKind::Quadratic { center, weight } => {
                y.iter().zip(center).map(|(a, c)| weight * (a - c)).collect()
            }
            PotentialKind::LogBarrier => {
                let (c, r) = self.dom.as_ball().expect("validated at construction");
                let w: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a - b).collect();
                let rho = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                if rho == 0.0 {
                    return vec![0.0; y.len()];
                }
                let dist = r - rho;
                // (log d) ∇d with ∇d = −w/|w| the inward distance gradient
                let g = -dist.ln() / rho;
                w.iter().map(|x| g * x).collect()
            }
            PotentialKind::Custom(c) => (c.min_subgradient)(y),
        }
    }

    /// Monte-Carlo estimate of `∫_O |∂₀φ(y)|² dy` from `samples` uniform
    /// draws in the bounding box; returns `(estimate, stderr)`.
    pub fn subgradient_l2_integral(&self, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = stream(seed, 0, "assumphi-quadrature");
        let (lo, hi) = self.dom.bounding_box();
        let vol = self.dom.bbox_volume();
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..samples {
            let y: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| rng.random_range(*l..*h)).collect();
            let v = if self.dom.contains(&y, Mode::Open).unwrap_or(false) {
                self.min_subgradient_unchecked(&y).iter().map(|g| g * g).sum::<f64>() * vol
            } else {
                0.0
            };
            sum += v;
            sum2 += v * v;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = (sum2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }

    /// Midpoint convexity test on `pairs` random pairs of interior points.
    pub fn check_convexity(&self, pairs: usize) -> Result<()> {
        let mut rng = stream(0, 0, "potential-convexity");
        for _ in 0..pairs {
            let y = self.dom.sample_uniform(&mut rng);
            let z = self.dom.sample_uniform(&mut rng);
            let m: Vec<f64> = y.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
            let (fy, fz, fm) = (self.phi_formula(&y), self.phi_formula(&z), self.phi_formula(&m));
            let slack = 1e-10 * (1.0 + fy.abs() + fz.abs());
            if !(fm <= 0.5 * (fy + fz) + slack) {
                return Err(Error::InvalidPotential(format!(
                    "midpoint convexity fails at {y:?}, {z:?}"
                )));
            }
        }
        Ok(())
    }

    /// Envelope handle for penalization strength `n`.
    pub fn yosida(&self, n: f64) -> Result<YosidaHandle> {
        YosidaHandle::new(self.clone(), n)
    }
}

/// The Moreau–Yosida envelope `Φ_n` of a potential.
#[derive(Clone, Debug)]
pub struct YosidaHandle {
    pot: PotentialSpec,
    n: f64,
}

impl YosidaHandle {
    pub fn new(pot: PotentialSpec, n: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter(format!("penalization n must be > 0, got {n}")));
        }
        Ok(YosidaHandle { pot, n })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.pot
    }

    /// Minimizer of `Φ(y) + n |x − y|²`.
    pub fn prox(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.prox_into(x, &mut out)?;
        Ok(out)
    }

    pub fn prox_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let dom = &self.pot.dom;
        check_dim(dom.dim(), x.len())?;
        let n = self.n;
        match &self.pot.kind {
            PotentialKind::Zero => dom.project_into(x, out),
            PotentialKind::Quadratic { center, weight } => {
                // Isotropic Hessian: the constrained minimizer is the
                // projection of the unconstrained one.
                let y0: Vec<f64> = x
                    .iter()
                    .zip(center)
                    .map(|(xi, ci)| (2.0 * n * xi + weight * ci) / (2.0 * n + weight))
                    .collect();
                dom.project_into(&y0, out)
            }
            PotentialKind::LogBarrier => {
                let (c, r) = dom.as_ball().expect("validated at construction");
                barrier_prox(x, &c, r, n, out)
            }
            PotentialKind::Custom(cp) => custom_prox(cp, dom, x, n, out),
        }
    }

    /// `(Φ_n(x), ∂Φ_n(x))`.
    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let p = self.prox(x)?;
        let grad: Vec<f64> = x.iter().zip(&p).map(|(a, b)| 2.0 * self.n * (a - b)).collect();
        let d2: f64 = x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((self.pot.phi_formula(&p) + self.n * d2, grad))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    /// Writes `∂Φ_n(x)` into `out` using `scratch` for the prox.
    pub fn gradient_into(&self, x: &[f64], scratch: &mut [f64], out: &mut [f64]) -> Result<()> {
        self.prox_into(x, scratch)?;
        for k in 0..x.len() {
            out[k] = 2.0 * self.n * (x[k] - scratch[k]);
        }
        Ok(())
    }
}

/// Prox of the log barrier on a ball (or interval) of radius `r ≤ 1`.
///
/// The minimizer lies on the ray from the center through `x`. In the
/// boundary-distance coordinate `s ∈ (0, r]` the stationarity condition is
/// `−log s = 2n (|x − c| − r + s)`, with a decreasing left-minus-right side.
fn barrier_prox(x: &[f64], c: &[f64], r: f64, n: f64, out: &mut [f64]) -> Result<()> {
    let w: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
    let rho = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let g = |s: f64| -s.ln() - 2.0 * n * (rho - r + s);
    if rho == 0.0 || g(r) >= 0.0 {
        out.copy_from_slice(c);
        return Ok(());
    }
    let (mut lo, mut hi) = (0.0, r);
    let mut iters = 0;
    while hi - lo > BARRIER_PROX_TOL * r {
        if iters == BARRIER_PROX_MAX_ITERS {
            return Err(Error::NonConvergence {
                solver: "log-barrier prox bisection",
                iterations: iters,
                residual: hi - lo,
            });
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    let s = 0.5 * (lo + hi);
    let scale = (r - s) / rho;
    for k in 0..x.len() {
        out[k] = c[k] + w[k] * scale;
    }
    Ok(())
}

/// Projected gradient with backtracking on `φ(y) + n |x − y|²` over `Ō`.
fn custom_prox(cp: &CustomPotential, dom: &DomainSpec, x: &[f64], n: f64, out: &mut [f64]) -> Result<()> {
    let obj = |y: &[f64]| (cp.value)(y) + n * y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let mut y = dom.project(x)?;
    let mut fy = obj(&y);
    let mut step = 1.0 / (2.0 * n);
    let mut residual = f64::INFINITY;
    for _ in 0..CUSTOM_PROX_MAX_ITERS {
        let g0 = (cp.min_subgradient)(&y);
        let grad: Vec<f64> = (0..y.len()).map(|k| g0[k] + 2.0 * n * (y[k] - x[k])).collect();
        // gradient-mapping residual at the fixed step 1/(2n)
        let trial: Vec<f64> = (0..y.len()).map(|k| y[k] - grad[k] / (2.0 * n)).collect();
        let mapped = dom.project(&trial)?;
        residual = dist(&mapped, &y);
        if residual <= 1e-13 * (1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt()) {
            out.copy_from_slice(&y);
            return Ok(());
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..y.len()).map(|k| y[k] - step * grad[k]).collect();
            let cand = dom.project(&trial)?;
            let diff: Vec<f64> = (0..y.len()).map(|k| cand[k] - y[k]).collect();
            let fc = obj(&cand);
            let model = fy
                + diff.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>()
                + diff.iter().map(|v| v * v).sum::<f64>() / (2.0 * step);
            if fc <= model + 1e-15 * fy.abs().max(1.0) {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                y = cand;
                fy = fc;
                step = (1.5 * step).min(1.0 / (2.0 * n));
            }
            None => {
                fy = obj(&mapped);
                y = mapped;
                step = 1.0 / (2.0 * n);
            }
        }
    }
    Err(Error::NonConvergence {
        solver: "custom potential prox",
        iterations: CUSTOM_PROX_MAX_ITERS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ball() -> DomainSpec {
        DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap()
    }

    fn norm(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn min_subgradient_examples() {
        let z = PotentialSpec::zero(ball());
        assert_eq!(z.min_subgradient(&[0.3, -0.2]).unwrap(), vec![0.0, 0.0]);
        let q = PotentialSpec::quadratic(ball(), vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(q.min_subgradient(&[0.3, 0.4]).unwrap(), vec![0.3, 0.4]);
        assert!(matches!(q.min_subgradient(&[1.0, 0.0]), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn log_barrier_subgradient_matches_finite_differences() {
        let lb = PotentialSpec::log_barrier(ball()).unwrap();
        let y = [0.9, 0.0];
        let g = lb.min_subgradient(&y).unwrap();
        let h = 1e-6;
        let fd: Vec<f64> = (0..2)
            .map(|k| {
                let mut p = y;
                let mut m = y;
                p[k] += h;
                m[k] -= h;
                (lb.value(&p).unwrap() - lb.value(&m).unwrap()) / (2.0 * h)
            })
            .collect();
        assert!((fd[0] - g[0]).abs() < 1e-6 && (fd[1] - g[1]).abs() < 1e-6, "{fd:?} vs {g:?}");
        assert!((norm(&g) - 10f64.ln()).abs() < 1e-12);
        // φ decreases toward the center, so its gradient points outward
        assert!(g[0] > 0.0);
        assert_eq!(lb.min_subgradient(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn prox_examples() {
        let z = PotentialSpec::zero(ball());
        for n in [0.5, 1.0, 100.0] {
            assert_eq!(z.yosida(n).unwrap().prox(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        }
        let big = DomainSpec::ball(vec![0.0, 0.0], 10.0).unwrap();
        let q = PotentialSpec::quadratic(big, vec![0.0, 0.0], 1.0).unwrap();
        let p = q.yosida(1.0).unwrap().prox(&[3.0, 0.0]).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-15 && p[1] == 0.0);
        // golden-section cross-check of the quadratic prox along the axis
        let obj = |t: f64| 0.5 * t * t + (3.0 - t) * (3.0 - t);
        let (mut a, mut b) = (-5.0f64, 5.0f64);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - gr * (b - a);
            let d = a + gr * (b - a);
            if obj(c) < obj(d) {
                b = d;
            } else {
                a = c;
            }
        }
        assert!((0.5 * (a + b) - p[0]).abs() < 1e-7);
        // fixed point at the minimizer
        let lb = PotentialSpec::log_barrier(ball()).unwrap();
        assert_eq!(lb.yosida(3.0).unwrap().prox(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let q1 = PotentialSpec::quadratic(ball(), vec![0.2, 0.1], 2.0).unwrap();
        let fp = q1.yosida(7.0).unwrap().prox(&[0.2, 0.1]).unwrap();
        assert!(norm(&[fp[0] - 0.2, fp[1] - 0.1]) < 1e-15);
    }

    #[test]
    fn yosida_eval_examples() {
        let z = PotentialSpec::zero(ball());
        let (v, g) = z.yosida(5.0).unwrap().eval(&[2.0, 0.0]).unwrap();
        assert_eq!(v, 5.0);
        assert_eq!(g, vec![10.0, 0.0]);
        let (v, g) = z.yosida(5.0).unwrap().eval(&[0.3, 0.3]).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
        let big = DomainSpec::ball(vec![0.0, 0.0], 10.0).unwrap();
        let q = PotentialSpec::quadratic(big, vec![0.0, 0.0], 1.0).unwrap();
        let (v, g) = q.yosida(1.0).unwrap().eval(&[3.0, 0.0]).unwrap();
        assert!((v - 3.0).abs() < 1e-14);
        assert!((g[0] - 2.0).abs() < 1e-14 && g[1] == 0.0);
    }

    #[test]
    fn invalid_potentials() {
        let wide = DomainSpec::ball(vec![0.0], 2.0).unwrap();
        assert!(PotentialSpec::log_barrier(wide).is_err());
        let bx = DomainSpec::cube(vec![0.0], vec![1.0]).unwrap();
        assert!(PotentialSpec::log_barrier(bx).is_err());
        assert!(PotentialSpec::quadratic(ball(), vec![0.0], 1.0).is_err());
        assert!(ball().dim() == 2 && PotentialSpec::zero(ball()).yosida(0.0).is_err());
        let concave = CustomPotential {
            name: "concave".into(),
            value: Arc::new(|y: &[f64]| 1.0 - y.iter().map(|v| v * v).sum::<f64>()),
            min_subgradient: Arc::new(|y: &[f64]| y.iter().map(|v| -2.0 * v).collect()),
            lower_bound: 0.0,
        };
        assert!(PotentialSpec::new(PotentialKind::Custom(concave), ball()).is_err());
    }

    #[test]
    fn custom_potential_prox_matches_quadratic() {
        let quartic = CustomPotential {
            name: "half-square".into(),
            value: Arc::new(|y: &[f64]| 0.5 * y.iter().map(|v| v * v).sum::<f64>()),
            min_subgradient: Arc::new(|y: &[f64]| y.to_vec()),
            lower_bound: 0.0,
        };
        let c = PotentialSpec::new(PotentialKind::Custom(quartic), ball()).unwrap();
        let q = PotentialSpec::quadratic(ball(), vec![0.0, 0.0], 1.0).unwrap();
        for x in [[0.3, 0.2], [2.0, -1.0], [0.0, 1.5]] {
            let a = c.yosida(4.0).unwrap().prox(&x).unwrap();
            let b = q.yosida(4.0).unwrap().prox(&x).unwrap();
            assert!(norm(&[a[0] - b[0], a[1] - b[1]]) < 1e-9, "{a:?} {b:?}");
        }
    }

    fn pot(which: usize) -> PotentialSpec {
        match which {
            0 => PotentialSpec::zero(ball()),
            1 => PotentialSpec::quadratic(ball(), vec![0.3, -0.2], 2.0).unwrap(),
            2 => PotentialSpec::log_barrier(ball()).unwrap(),
            _ => PotentialSpec::log_barrier(DomainSpec::interval(-0.5, 1.0).unwrap()).unwrap(),
        }
    }

    proptest! {
        #[test]
        fn envelope_is_convex_and_below_phi(which in 0usize..3, x0 in -2.0f64..2.0, x1 in -2.0f64..2.0,
                                           z0 in -2.0f64..2.0, z1 in -2.0f64..2.0, ln in -1.0f64..4.0) {
            let p = pot(which);
            let h = p.yosida(10f64.powf(ln)).unwrap();
            let fx = h.value(&[x0, x1]).unwrap();
            let fz = h.value(&[z0, z1]).unwrap();
            let fm = h.value(&[0.5 * (x0 + z0), 0.5 * (x1 + z1)]).unwrap();
            prop_assert!(fm <= 0.5 * (fx + fz) + 1e-9 * (1.0 + fx.abs() + fz.abs()));
            let phi = p.value(&[x0, x1]).unwrap();
            prop_assert!(fx <= phi + 1e-12);
        }

        #[test]
        fn gradient_lipschitz_2n(which in 0usize..3, x0 in -2.0f64..2.0, x1 in -2.0f64..2.0,
                                 z0 in -2.0f64..2.0, z1 in -2.0f64..2.0, ln in -1.0f64..4.0) {
            let n = 10f64.powf(ln);
            let h = pot(which).yosida(n).unwrap();
            let (_, gx) = h.eval(&[x0, x1]).unwrap();
            let (_, gz) = h.eval(&[z0, z1]).unwrap();
            let dg = norm(&[gx[0] - gz[0], gx[1] - gz[1]]);
            let dx = norm(&[x0 - z0, x1 - z1]);
            prop_assert!(dg <= 2.0 * n * dx * (1.0 + 1e-6) + 4.0 * n * BARRIER_PROX_TOL);
        }
    }
}
