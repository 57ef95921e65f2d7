use rayon::prelude::*;
use serde_json::json;

use super::{label, Relation, ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::observables::{CylinderFunctional, Expr};
use crate::pathspace::{sample_bridge, Grid, PathState};
use crate::potential::PotentialSpec;
use crate::rng::stream;
use crate::stats::weighted_mean_se;

pub struct IbpParams {
    /// Penalization strength; `0` tests the plain bridge measure `μ`.
    pub n: f64,
    pub f_suite: Vec<CylinderFunctional>,
    /// Test directions vanishing near both endpoints.
    pub h_suite: Vec<PathState>,
    /// Bridge draws per side of the identity.
    pub samples: usize,
    pub ess_floor: f64,
    pub seed: u64,
}

/// `exp(1 − 1/(1 − s²))`, `s = (θ − center)/radius`, in one component.
pub fn bump(grid: &Grid, center: f64, radius: f64, component: usize) -> PathState {
    let d = grid.d();
    grid.sample_fn(|t| {
        let s = (t - center) / radius;
        let mut v = vec![0.0; d];
        if s.abs() < 1.0 {
            v[component] = (1.0 - 1.0 / (1.0 - s * s)).exp();
        }
        v
    })
}

pub fn default_h_suite(grid: &Grid) -> Vec<PathState> {
    let d = grid.d();
    vec![
        bump(grid, 0.3, 0.2, 0),
        bump(grid, 0.5, 0.35, (d - 1).min(1)),
        bump(grid, 0.65, 0.25, 0),
    ]
}

pub fn default_f_suite(grid: &Grid) -> Vec<CylinderFunctional> {
    let d = grid.d();
    let probes = vec![grid.sine_mode(1, 0), grid.sine_mode(2, 0), grid.sine_mode(1, (d - 1).min(1))];
    let v = Expr::var;
    let mk = |name: &str, f: Expr| CylinderFunctional::new(name, probes.clone(), f).unwrap();
    vec![
        mk("one", Expr::Const(1.0)),
        mk("e1", v(0)),
        mk("tanh(e1+e2/2)", v(0).add(v(1).scale(0.5)).tanh()),
        mk("exp(-e2^2)", v(1).powi(2).scale(-1.0).exp()),
        mk("e1*e1'", v(0).mul(v(2))),
    ]
}

/// Closed-form sides of the bridge identity for `F = ⟨e₁, w⟩` (first
/// component) and direction `h` under `μ`: `(E[∂_h F], −E[⟨h'', x⟩ F])`,
/// the second computed from the covariance kernel `θ_i(1 − θ_j)`.
pub fn gaussian_oracle(grid: &Grid, h: &PathState) -> (f64, f64) {
    let (m, d) = (grid.m(), grid.d());
    let dt = grid.dtheta();
    let e1: Vec<f64> = (0..m).map(|i| std::f64::consts::SQRT_2 * (std::f64::consts::PI * grid.theta(i)).sin()).collect();
    let h0: Vec<f64> = (0..m).map(|i| h.values()[i * d]).collect();
    let lhs = dt * h0.iter().zip(&e1).map(|(a, b)| a * b).sum::<f64>();
    let cov = |i: usize, j: usize| {
        let (s, t) = (grid.theta(i.min(j)), grid.theta(i.max(j)));
        s * (1.0 - t)
    };
    // C e₁, then the pinned second difference of it
    let ce: Vec<f64> = (0..m).map(|i| (0..m).map(|j| cov(i, j) * e1[j]).sum()).collect();
    let mut lce = vec![0.0; m];
    for i in 0..m {
        let l = if i > 0 { ce[i - 1] } else { 0.0 };
        let r = if i + 1 < m { ce[i + 1] } else { 0.0 };
        lce[i] = (l - 2.0 * ce[i] + r) / (dt * dt);
    }
    let rhs = -dt * dt * h0.iter().zip(&lce).map(|(a, b)| a * b).sum::<f64>();
    (lhs, rhs)
}

struct SideDraw {
    log_w: f64,
    values: Vec<f64>,
}

/// Integration by parts under `ν_n`:
/// `E[∂_h F] = −E[⟨h'', x⟩ F] + E[⟨h, ∂Φ_n(x)⟩ F]`, each side estimated by
/// self-normalized importance sampling from the bridge on its own stream.
pub fn verify_ibp(grid: &Grid, pot: &PotentialSpec, p: &IbpParams) -> Result<VerificationReport> {
    grid.check_domain(pot.domain())?;
    if !(p.n >= 0.0) {
        return Err(Error::InvalidParameter("n must be ≥ 0".into()));
    }
    for h in &p.h_suite {
        grid.check_path(h)?;
        let (first, last) = (h.node(0), h.node(grid.m() - 1));
        if first.iter().chain(last).any(|v| *v != 0.0) {
            return Err(Error::InvalidParameter("test directions must vanish at the end nodes".into()));
        }
    }
    let mut rb = ReportBuilder::new(
        "ibp",
        json!({
            "m": grid.m(), "a": grid.a(), "b": grid.b(),
            "domain": pot.domain().shape(), "potential": pot.descriptor(),
            "n": p.n, "samples": p.samples, "ess_floor": p.ess_floor, "seed": p.seed,
            "functionals": p.f_suite.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
            "directions": p.h_suite.len(),
        }),
    );
    let yos = if p.n > 0.0 { Some(pot.yosida(p.n)?) } else { None };
    let nf = p.f_suite.len();
    let nh = p.h_suite.len();
    let log_weight = |x: &PathState| -> Result<f64> {
        match &yos {
            None => Ok(0.0),
            Some(h) => {
                let mut s = 0.5 * (h.value(grid.a())? + h.value(grid.b())?);
                for y in x.nodes() {
                    s += h.value(y)?;
                }
                Ok(-s * grid.dtheta())
            }
        }
    };
    let lhs_draw = |i: usize| -> Result<SideDraw> {
        let mut rng = stream(p.seed, i as u64, "ibp-lhs");
        let x = sample_bridge(grid, &mut rng);
        let mut values = Vec::with_capacity(nf * nh);
        for f in &p.f_suite {
            let (_, rep) = f.value_and_gradient(grid, &x)?;
            for h in &p.h_suite {
                values.push(grid.inner(&rep, h));
            }
        }
        Ok(SideDraw { log_w: log_weight(&x)?, values })
    };
    let rhs_draw = |i: usize| -> Result<SideDraw> {
        let mut rng = stream(p.seed, i as u64, "ibp-rhs");
        let x = sample_bridge(grid, &mut rng);
        let lap = grid.laplacian(&x);
        let mut drift = grid.zeros();
        if let Some(h) = &yos {
            for (j, y) in x.nodes().enumerate() {
                let g = h.eval(y)?.1;
                drift.node_mut(j).copy_from_slice(&g);
            }
        }
        let fx = p.f_suite.iter().map(|f| f.value(grid, &x)).collect::<Result<Vec<_>>>()?;
        let hk: Vec<f64> = p.h_suite.iter().map(|h| -grid.inner(h, &lap) + grid.inner(h, &drift)).collect();
        let mut values = Vec::with_capacity(nf * nh);
        for fv in &fx {
            for k in &hk {
                values.push(k * fv);
            }
        }
        Ok(SideDraw { log_w: log_weight(&x)?, values })
    };
    rb.seed(label(p.seed, "ibp-lhs"));
    rb.seed(label(p.seed, "ibp-rhs"));
    let lhs: Vec<SideDraw> = (0..p.samples).into_par_iter().map(lhs_draw).collect::<Result<_>>()?;
    let rhs: Vec<SideDraw> = (0..p.samples).into_par_iter().map(rhs_draw).collect::<Result<_>>()?;
    let weights = |s: &[SideDraw]| crate::pathspace::normalized_weights(s.iter().map(|d| d.log_w));
    let (wl, wr) = (weights(&lhs), weights(&rhs));
    let ess = |w: &[f64]| 1.0 / w.iter().map(|x| x * x).sum::<f64>();
    let (ess_l, ess_r) = (ess(&wl), ess(&wr));
    rb.estimate("ess_lhs", ess_l, None);
    rb.estimate("ess_rhs", ess_r, None);
    rb.criterion("ess_min", ess_l.min(ess_r), Relation::Ge, p.ess_floor);
    if ess_l.min(ess_r) < p.ess_floor {
        rb.inconclusive(format!("effective sample size {:.1} below floor {}", ess_l.min(ess_r), p.ess_floor));
    }
    let mut worst: f64 = 0.0;
    for (fi, f) in p.f_suite.iter().enumerate() {
        for hi in 0..nh {
            let k = fi * nh + hi;
            let col = |s: &[SideDraw]| s.iter().map(|d| d.values[k]).collect::<Vec<_>>();
            let (l, sl) = weighted_mean_se(&col(&lhs), &wl);
            let (r, sr) = weighted_mean_se(&col(&rhs), &wr);
            let se = (sl * sl + sr * sr).sqrt();
            let z = if se > 0.0 { (l - r).abs() / se } else if l == r { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            let tag = format!("{}|h{}", f.name, hi);
            rb.estimate(format!("lhs[{tag}]"), l, Some(sl));
            rb.estimate(format!("rhs[{tag}]"), r, Some(sr));
            rb.criterion(format!("residual_z[{tag}]"), z, Relation::Lt, 3.0);
        }
    }
    rb.estimate("max_residual_z", worst, None);
    Ok(rb.finish())
}
