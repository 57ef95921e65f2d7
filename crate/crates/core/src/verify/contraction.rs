use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde_json::json;

use super::{label, Relation, ReportBuilder, VerificationReport};
use crate::error::Result;
use crate::integrator::{run_coupled, SimConfig, NOISE_PURPOSE};
use crate::rng::stream;
use crate::stats::{linear_fit, mean_se};

pub struct ContractionParams {
    /// Number of coupled pairs, each with its own noise seed.
    pub pairs: usize,
    /// Amplitude of the `e₁` perturbation used for the slope.
    pub e1_amplitude: f64,
    /// Standard deviation of the random perturbation coefficients on `e_1..e_5`.
    pub random_amplitude: f64,
    /// Relative tolerance on the measured decay slope.
    pub slope_tol: f64,
}

impl Default for ContractionParams {
    fn default() -> Self {
        ContractionParams {
            pairs: 100,
            e1_amplitude: 0.1,
            random_amplitude: 0.1,
            slope_tol: 0.05,
        }
    }
}

/// Synchronous-coupling contraction `‖u₁(t) − u₂(t)‖ ≤ ρᵏ ‖q₁ − q₂‖` with
/// `ρ` the per-step factor of the scheme on the first mode, and the decay
/// slope of an `e₁` perturbation against `−λ₁/2`.
pub fn verify_contraction(cfg: &SimConfig, p: &ContractionParams) -> Result<VerificationReport> {
    cfg.validate()?;
    let lam = cfg.lambda1();
    let rho = cfg.scheme.contraction_factor(lam, cfg.dt);
    let mut rb = ReportBuilder::new(
        "contraction",
        json!({
            "m": cfg.grid.m(), "d": cfg.grid.d(), "domain": cfg.dom().shape(),
            "potential": cfg.pot.descriptor(), "n": cfg.n, "dt": cfg.dt, "t_end": cfg.t_end,
            "scheme": cfg.scheme, "record_every": cfg.record_every, "seed": cfg.seed, "pairs": p.pairs,
        }),
    );
    rb.seed(label(cfg.seed, "contraction-init"));
    rb.seed(format!("{}+r/0/{NOISE_PURPOSE}", cfg.seed));
    let d = cfg.grid.d();
    struct PairOut {
        scheme_ratio: f64,
        exp_ratio: f64,
        slope: Option<f64>,
    }
    let one = |r: usize| -> Result<PairOut> {
        let c = cfg.clone().with_seed(cfg.seed.wrapping_add(r as u64));
        let mut rng = stream(cfg.seed, r as u64, "contraction-init");
        let mut q2 = c.initial.clone();
        for k in 1..=5 {
            for comp in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                q2.add_scaled(p.random_amplitude * z, &c.grid.sine_mode(k, comp));
            }
        }
        let mut q3 = c.initial.clone();
        q3.add_scaled(p.e1_amplitude, &c.grid.sine_mode(1, 0));
        let mut scheme_ratio: f64 = 0.0;
        let mut exp_ratio: f64 = 0.0;
        let mut slope = None;
        for (j, q) in [q2, q3].iter().enumerate() {
            let (t1, _, dec) = run_coupled(&c, q)?;
            if dec[0] == 0.0 {
                continue;
            }
            for (t, v) in t1.times.iter().zip(&dec) {
                let k = (t / c.dt).round();
                scheme_ratio = scheme_ratio.max(v / (dec[0] * rho.powf(k)));
                exp_ratio = exp_ratio.max(v / (dec[0] * (-0.5 * lam * t).exp()));
            }
            if j == 1 {
                let pts: Vec<(f64, f64)> = t1.times.iter().zip(&dec).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
                if pts.len() >= 3 {
                    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                    slope = Some(linear_fit(&x, &y).slope);
                }
            }
        }
        Ok(PairOut { scheme_ratio, exp_ratio, slope })
    };
    let outs: Vec<PairOut> = (0..p.pairs).into_par_iter().map(one).collect::<Result<_>>()?;
    let scheme_max = outs.iter().map(|o| o.scheme_ratio).fold(0.0, f64::max);
    let exp_max = outs.iter().map(|o| o.exp_ratio).fold(0.0, f64::max);
    rb.estimate("lambda1_half", 0.5 * lam, None);
    rb.estimate("continuum_rate_pi2_half", 0.5 * std::f64::consts::PI.powi(2), None);
    rb.estimate("max_ratio_to_exp_bound", exp_max, None);
    rb.criterion("max_ratio_to_scheme_bound", scheme_max, Relation::Le, 1.0 + 1e-8);
    let slopes: Vec<f64> = outs.iter().filter_map(|o| o.slope).collect();
    if slopes.is_empty() {
        rb.note("no e1 decay series; the slope is undefined");
    } else {
        let (s, se) = mean_se(&slopes);
        rb.estimate("e1_decay_slope", s, Some(se));
        rb.criterion("e1_slope_rel_error", (s / (-0.5 * lam) - 1.0).abs(), Relation::Le, p.slope_tol);
    }
    Ok(rb.finish())
}
