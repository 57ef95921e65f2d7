use serde::{Deserialize, Serialize};

use super::tridiag::Tridiag;
use super::SimConfig;
use crate::error::{Error, Result};
use crate::pathspace::{PathState, SineBasis};
use crate::potential::YosidaHandle;

/// Time discretization of the heat part.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `(I − (dt/2)Δ) u_{k+1} = u_k − (dt/2)∂Φ_n(u_k) + ΔW_k`.
    #[default]
    SemiImplicit,
    /// Exact discrete heat semigroup `e^{(dt/2)Δ}` in the sine basis, with
    /// per-mode exact Ornstein–Uhlenbeck noise and explicit drift.
    Exponential,
}

impl Scheme {
    /// Per-step contraction factor of the linear part on the slowest mode.
    pub fn contraction_factor(self, lambda1: f64, dt: f64) -> f64 {
        match self {
            Scheme::SemiImplicit => 1.0 / (1.0 + 0.5 * dt * lambda1),
            Scheme::Exponential => (-0.5 * dt * lambda1).exp(),
        }
    }
}

enum Linear {
    Semi { tri: Tridiag, lift: f64 },
    Exp { m: usize, semigroup: Vec<f64>, coloring: Vec<f64> },
}

/// Reusable one-step map for a fixed configuration.
pub struct Stepper {
    m: usize,
    d: usize,
    dt: f64,
    yosida: YosidaHandle,
    line: PathState,
    a: Vec<f64>,
    b: Vec<f64>,
    linear: Linear,
    grad: Vec<f64>,
    scratch: Vec<f64>,
    work: Vec<f64>,
}

fn spectral_matrix(basis: &SineBasis, dtheta: f64, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let m = basis.m();
    let mut out = vec![0.0; m * m];
    for k in 1..=m {
        let w = f(k) * dtheta;
        for i in 0..m {
            let ei = basis.at(k, i) * w;
            for j in 0..m {
                out[i * m + j] += ei * basis.at(k, j);
            }
        }
    }
    out
}

impl Stepper {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let (m, d) = (cfg.grid.m(), cfg.grid.d());
        let dt = cfg.dt;
        let dtheta = cfg.grid.dtheta();
        let linear = match cfg.scheme {
            Scheme::SemiImplicit => {
                let r = 0.5 * dt / (dtheta * dtheta);
                Linear::Semi {
                    tri: Tridiag::new(m, 1.0 + 2.0 * r, -r),
                    lift: r,
                }
            }
            Scheme::Exponential => {
                let basis = SineBasis::new(m);
                let lam = |k| SineBasis::eigenvalue(m, k);
                let semigroup = spectral_matrix(&basis, dtheta, |k| (-0.5 * dt * lam(k)).exp());
                let coloring = spectral_matrix(&basis, dtheta, |k| {
                    let x = dt * lam(k);
                    (-(-x).exp_m1() / x).sqrt()
                });
                Linear::Exp { m, semigroup, coloring }
            }
        };
        Ok(Stepper {
            m,
            d,
            dt,
            yosida: cfg.pot.yosida(cfg.n)?,
            line: cfg.grid.line(),
            a: cfg.grid.a().to_vec(),
            b: cfg.grid.b().to_vec(),
            linear,
            grad: vec![0.0; m * d],
            scratch: vec![0.0; d],
            work: vec![0.0; m * d],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `∂Φ_n` at every node of `u`, written into the internal buffer.
    fn eval_drift(&mut self, u: &PathState) -> Result<()> {
        let d = self.d;
        for (i, y) in u.nodes().enumerate() {
            self.yosida
                .gradient_into(y, &mut self.scratch, &mut self.grad[i * d..(i + 1) * d])?;
        }
        Ok(())
    }

    /// The drift `∂Φ_n(u_k)` used by the most recent step.
    pub fn last_drift(&self) -> &[f64] {
        &self.grad
    }

    /// Advances `u` by one step driven by the white-noise increment `noise`
    /// (variance `dt/dθ` per entry), adding `dt · ½∂Φ_n(u_k)` into `penalty`.
    pub fn advance(&mut self, u: &mut PathState, noise: &[f64], penalty: &mut [f64]) -> Result<()> {
        self.eval_drift(u)?;
        let (m, d) = (self.m, self.d);
        let hdt = 0.5 * self.dt;
        for (p, g) in penalty.iter_mut().zip(&self.grad) {
            *p += hdt * g;
        }
        match &self.linear {
            Linear::Semi { tri, lift } => {
                let x = u.values_mut();
                for k in 0..m * d {
                    x[k] += -hdt * self.grad[k] + noise[k];
                }
                for c in 0..d {
                    x[c] += lift * self.a[c];
                    x[(m - 1) * d + c] += lift * self.b[c];
                    tri.solve_strided(x, d, c);
                }
            }
            Linear::Exp { m, semigroup, coloring } => {
                let m = *m;
                let line = self.line.values();
                let x = u.values_mut();
                for k in 0..m * d {
                    self.work[k] = x[k] - line[k] - hdt * self.grad[k];
                }
                for i in 0..m {
                    let srow = &semigroup[i * m..(i + 1) * m];
                    let crow = &coloring[i * m..(i + 1) * m];
                    for c in 0..d {
                        let mut s = 0.0;
                        for j in 0..m {
                            s += srow[j] * self.work[j * d + c] + crow[j] * noise[j * d + c];
                        }
                        x[i * d + c] = line[i * d + c] + s;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Index of the first non-finite node, if any.
pub(crate) fn first_non_finite(u: &PathState) -> Option<usize> {
    u.nodes().position(|n| n.iter().any(|v| !v.is_finite()))
}

pub(crate) fn non_finite_error(u: &PathState, step: u64, time: f64) -> Result<()> {
    match first_non_finite(u) {
        Some(node) => Err(Error::NonFinite { step, time, node }),
        None => Ok(()),
    }
}
