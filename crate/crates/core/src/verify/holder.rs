use serde_json::json;

use super::{Relation, ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::pathspace::SineBasis;
use crate::stats::{batch_means_se, linear_fit};

pub struct HolderParams {
    /// Lags in recorded frames.
    pub lags: Vec<usize>,
    /// Minimum number of increments per lag.
    pub min_pairs: usize,
}

/// `(lag time, E‖X_{t+s} − X_t‖²₋₁, stderr, E‖·‖⁴₋₁, stderr)` per lag.
pub fn holder_moments(traj: &Trajectory, lags: &[usize]) -> Vec<(f64, f64, f64, f64, f64)> {
    let basis = SineBasis::new(traj.meta.m);
    let d = traj.meta.d();
    let m = traj.meta.m;
    let weights: Vec<f64> = (1..=m).map(|k| 1.0 / (k * k) as f64).collect();
    let coeffs: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| (0..d).flat_map(|c| basis.coefficients(s, c)).collect())
        .collect();
    let frame_dt = if traj.times.len() > 1 { traj.times[1] - traj.times[0] } else { 0.0 };
    lags.iter()
        .map(|&lag| {
            let mut sq = Vec::new();
            let mut q4 = Vec::new();
            for t in 0..coeffs.len().saturating_sub(lag) {
                let (a, b) = (&coeffs[t], &coeffs[t + lag]);
                let v: f64 = a.iter().zip(b).enumerate().map(|(i, (x, y))| weights[i % m] * (x - y) * (x - y)).sum();
                sq.push(v);
                q4.push(v * v);
            }
            // overlapping increments: batch the series for the standard error
            let (m2, s2) = batch_means_se(&sq, 20);
            let (m4, s4) = batch_means_se(&q4, 20);
            (lag as f64 * frame_dt, m2, s2, m4, s4)
        })
        .collect()
}

/// Stationary `H⁻¹` increments: `log E‖X_t − X_s‖^p₋₁` against `log|t − s|`
/// has slope `p/2`.
pub fn verify_holder(traj: &Trajectory, p: &HolderParams) -> Result<VerificationReport> {
    if p.lags.len() < 3 || p.lags.contains(&0) {
        return Err(Error::InvalidParameter("need ≥ 3 positive lags".into()));
    }
    let mut rb = ReportBuilder::new(
        "holder",
        json!({
            "m": traj.meta.m, "d": traj.meta.d(), "frames": traj.len(), "dt": traj.meta.dt,
            "record_every": traj.meta.record_every, "n": traj.meta.n, "lags": p.lags, "seed": traj.meta.seed,
        }),
    );
    rb.seed(format!("{}/0/{}", traj.meta.seed, crate::integrator::NOISE_PURPOSE));
    let zero = holder_moments(traj, &[0]);
    if let Some(z) = zero.first() {
        rb.criterion("zero_lag_second_moment", z.1, Relation::Le, 0.0);
    }
    let max_lag = *p.lags.iter().max().unwrap();
    if traj.len() < max_lag + p.min_pairs {
        rb.inconclusive(format!("{} frames cannot supply {} increments at lag {max_lag}", traj.len(), p.min_pairs));
        return Ok(rb.finish());
    }
    let mom = holder_moments(traj, &p.lags);
    let lt: Vec<f64> = mom.iter().map(|m| m.0.ln()).collect();
    let l2: Vec<f64> = mom.iter().map(|m| m.1.ln()).collect();
    let l4: Vec<f64> = mom.iter().map(|m| m.3.ln()).collect();
    for m in &mom {
        rb.estimate(format!("second_moment[lag={:.3e}]", m.0), m.1, Some(m.2));
        rb.estimate(format!("fourth_moment[lag={:.3e}]", m.0), m.3, Some(m.4));
    }
    rb.estimate("lag_decades", (mom.last().unwrap().0 / mom[0].0).log10(), None);
    let f2 = linear_fit(&lt, &l2);
    let f4 = linear_fit(&lt, &l4);
    rb.estimate("slope_p2", f2.slope, Some(f2.slope_se));
    rb.estimate("slope_p4", f4.slope, Some(f4.slope_se));
    rb.criterion("slope_p2_abs_error", (f2.slope - 1.0).abs(), Relation::Le, 0.15);
    rb.criterion("slope_p4_abs_error", (f4.slope - 2.0).abs(), Relation::Le, 0.3);
    Ok(rb.finish())
}
