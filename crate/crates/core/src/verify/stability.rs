use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{label, Relation, ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::Mode;
use crate::integrator::{run_observed, Scheme, SimConfig};
use crate::observables::CylinderFunctional;
use crate::pathspace::{normalized_weights, sample_bridge, Grid, InvariantSampler, PathState, Strategy, Target};
use crate::potential::PotentialSpec;
use crate::rng::{stream, StreamKey};
use crate::stats::{mean_se, wasserstein1, weighted_mean_se};

pub struct StabilityParams {
    /// Increasing penalization strengths for the static part.
    pub n_list: Vec<f64>,
    pub functionals: Vec<CylinderFunctional>,
    /// Independent batches; each batch is one bridge pool.
    pub batches: usize,
    /// Bridge draws per batch.
    pub pool_size: usize,
    /// Exact `ν` draws used to cross-check the importance estimate of `ν`.
    pub rejection_samples: usize,
    /// Increasing penalization strengths for the dynamic part (empty skips it).
    pub dynamic_n_list: Vec<f64>,
    pub dynamic_t: f64,
    /// Shared time step; must satisfy `dt ≤ 1/(4n)` for the largest `n`.
    pub dynamic_dt: f64,
    pub dynamic_replicas: usize,
    pub dynamic_batches: usize,
    pub scheme: Scheme,
    pub seed: u64,
}

/// Paired one-sided test that `series[k][b]` decreases in `k`; returns the
/// per-step `z` scores.
fn paired_decrease(series: &[Vec<f64>]) -> Vec<(f64, f64, f64)> {
    series
        .windows(2)
        .map(|w| {
            let diffs: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| a - b).collect();
            let (m, se) = mean_se(&diffs);
            (m, se, if se > 0.0 { m / se } else if m > 0.0 { f64::INFINITY } else { 0.0 })
        })
        .collect()
}

/// Stability in `n`: laws of functionals under `ν_n` approach those under
/// `ν`, and the dynamic laws at a fixed time are Cauchy along `n`.
pub fn verify_stability(grid: &Grid, pot: &PotentialSpec, p: &StabilityParams) -> Result<VerificationReport> {
    grid.check_domain(pot.domain())?;
    if p.n_list.len() < 2 || p.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n_list must have ≥ 2 increasing entries".into()));
    }
    let dom = pot.domain();
    let mut rb = ReportBuilder::new(
        "stability",
        json!({
            "m": grid.m(), "a": grid.a(), "b": grid.b(), "domain": dom.shape(), "potential": pot.descriptor(),
            "n_list": p.n_list, "functionals": p.functionals.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
            "batches": p.batches, "pool_size": p.pool_size, "rejection_samples": p.rejection_samples,
            "dynamic_n_list": p.dynamic_n_list, "dynamic_t": p.dynamic_t, "dynamic_dt": p.dynamic_dt,
            "dynamic_replicas": p.dynamic_replicas, "dynamic_batches": p.dynamic_batches,
            "scheme": p.scheme, "seed": p.seed,
        }),
    );
    let handles = p.n_list.iter().map(|n| pot.yosida(*n)).collect::<Result<Vec<_>>>()?;
    let nf = p.functionals.len();
    let nn = p.n_list.len();

    struct PoolDraw {
        log_nu: f64,
        log_nun: Vec<f64>,
        outside: Vec<f64>,
        values: Vec<f64>,
    }
    let dt = grid.dtheta();
    let trap = |f: &mut dyn FnMut(&[f64]) -> Result<f64>, x: &PathState| -> Result<f64> {
        let mut s = 0.5 * (f(grid.a())? + f(grid.b())?);
        for y in x.nodes() {
            s += f(y)?;
        }
        Ok(s * dt)
    };
    rb.seed(label(p.seed, "stability-pool"));
    let draw = |i: usize| -> Result<PoolDraw> {
        let mut rng = stream(p.seed, i as u64, "stability-pool");
        let x = sample_bridge(grid, &mut rng);
        let in_k = x.nodes().all(|y| dom.contains(y, Mode::Closed).unwrap_or(false));
        let log_nu = if in_k { -trap(&mut |y| pot.value(y), &x)? } else { f64::NEG_INFINITY };
        let log_nun = handles.iter().map(|h| Ok(-trap(&mut |y| h.value(y), &x)?)).collect::<Result<Vec<_>>>()?;
        let outside = vec![trap(&mut |y| dom.distance(y), &x)?];
        let values = p.functionals.iter().map(|f| f.value(grid, &x)).collect::<Result<Vec<_>>>()?;
        Ok(PoolDraw { log_nu, log_nun, outside, values })
    };
    let total = p.batches * p.pool_size;
    let pool: Vec<PoolDraw> = (0..total).into_par_iter().map(draw).collect::<Result<_>>()?;

    // w1[f][k][b]
    let mut w1 = vec![vec![vec![0.0; p.batches]; nn]; nf];
    let mut outside_mass = vec![vec![0.0; p.batches]; nn];
    let mut nu_means = vec![Vec::new(); nf];
    for b in 0..p.batches {
        let chunk = &pool[b * p.pool_size..(b + 1) * p.pool_size];
        if chunk.iter().all(|d| d.log_nu == f64::NEG_INFINITY) {
            rb.inconclusive("a bridge pool has no path inside the domain");
            return Ok(rb.finish());
        }
        let w_nu = normalized_weights(chunk.iter().map(|d| d.log_nu));
        for (f, means) in nu_means.iter_mut().enumerate() {
            let vals: Vec<f64> = chunk.iter().map(|d| d.values[f]).collect();
            means.push(weighted_mean_se(&vals, &w_nu).0);
        }
        for k in 0..nn {
            let w_n = normalized_weights(chunk.iter().map(|d| d.log_nun[k]));
            for f in 0..nf {
                let vals: Vec<f64> = chunk.iter().map(|d| d.values[f]).collect();
                w1[f][k][b] = wasserstein1(&vals, &w_n, &vals, &w_nu);
            }
            outside_mass[k][b] = chunk.iter().zip(&w_n).map(|(d, w)| w * d.outside[0]).sum();
        }
    }
    for (f, func) in p.functionals.iter().enumerate() {
        for (k, n) in p.n_list.iter().enumerate() {
            let (m, se) = mean_se(&w1[f][k]);
            rb.estimate(format!("w1[{}|n={n}]", func.name), m, Some(se));
        }
        if w1[f].iter().flatten().all(|v| *v == 0.0) {
            rb.note(format!("{} has the same law under every measure; no trend to test", func.name));
            continue;
        }
        for (k, (m, se, z)) in paired_decrease(&w1[f]).into_iter().enumerate() {
            rb.estimate(format!("w1_drop[{}|{}->{}]", func.name, p.n_list[k], p.n_list[k + 1]), m, Some(se));
            rb.criterion(format!("w1_drop_z[{}|{}->{}]", func.name, p.n_list[k], p.n_list[k + 1]), z, Relation::Ge, 3.0);
        }
    }
    let mut prev = f64::INFINITY;
    let mut mono = true;
    for (k, n) in p.n_list.iter().enumerate() {
        let (m, se) = mean_se(&outside_mass[k]);
        rb.estimate(format!("outside_mass[n={n}]"), m, Some(se));
        mono &= m < prev || m == 0.0;
        prev = m;
    }
    rb.criterion("outside_mass_decreasing", if mono { 1.0 } else { 0.0 }, Relation::Ge, 1.0);

    // importance estimate of ν against exact rejection draws
    if p.rejection_samples > 0 {
        rb.seed(label(p.seed, "stability-rejection"));
        let sampler = InvariantSampler::new(grid, pot, Target::Nu, Strategy::Rejection)?;
        match sampler.batch(p.rejection_samples, &StreamKey::new(p.seed, 0, "stability-rejection")) {
            Ok(batch) => {
                for (f, func) in p.functionals.iter().enumerate() {
                    let vals = batch.paths().map(|x| func.value(grid, x)).collect::<Result<Vec<_>>>()?;
                    let (mr, ser) = mean_se(&vals);
                    let (mi, sei) = mean_se(&nu_means[f]);
                    let se = (ser * ser + sei * sei).sqrt();
                    let diff = (mr - mi).abs();
                    let z = if se > 1e-12 { diff / se } else if diff < 1e-9 { 0.0 } else { f64::INFINITY };
                    rb.criterion(
                        format!("nu_rejection_vs_importance_z[{}]", func.name),
                        z,
                        Relation::Lt,
                        3.0,
                    );
                }
            }
            Err(Error::AttemptCap { cap, .. }) => rb.inconclusive(format!("rejection sampler exceeded {cap} proposals")),
            Err(e) => return Err(e),
        }
    }

    // dynamic part: shared noise across n, ⟨u(t), e₁⟩ from the line
    if !p.dynamic_n_list.is_empty() {
        rb.seed(label(p.seed, "stability-dynamic-noise"));
        let e1 = grid.sine_mode(1, 0);
        let line = grid.line();
        let one = |r: usize| -> Result<Vec<f64>> {
            let seed = stream(p.seed, r as u64, "stability-dynamic-noise").random::<u64>();
            p.dynamic_n_list
                .iter()
                .map(|n| {
                    let cfg = SimConfig::new(grid.clone(), pot.clone(), *n, p.dynamic_dt, p.dynamic_t, line.clone(), seed)?
                        .with_scheme(p.scheme);
                    let u = run_observed(&cfg, |_, _, _| {})?;
                    Ok(grid.inner(&e1, &u))
                })
                .collect()
        };
        let samples: Vec<Vec<f64>> = (0..p.dynamic_replicas).into_par_iter().map(one).collect::<Result<_>>()?;
        let per = p.dynamic_replicas / p.dynamic_batches.max(1);
        let nd = p.dynamic_n_list.len();
        let mut dist = vec![vec![0.0; p.dynamic_batches]; nd - 1];
        for b in 0..p.dynamic_batches {
            let rows = &samples[b * per..(b + 1) * per];
            for k in 0..nd - 1 {
                let x: Vec<f64> = rows.iter().map(|r| r[k]).collect();
                let y: Vec<f64> = rows.iter().map(|r| r[k + 1]).collect();
                dist[k][b] = crate::stats::wasserstein1_unweighted(&x, &y);
            }
        }
        for k in 0..nd - 1 {
            let (m, se) = mean_se(&dist[k]);
            rb.estimate(format!("dynamic_w1[{}->{}]", p.dynamic_n_list[k], p.dynamic_n_list[k + 1]), m, Some(se));
        }
        for (k, (m, se, z)) in paired_decrease(&dist).into_iter().enumerate() {
            rb.estimate(format!("dynamic_w1_drop[{k}]"), m, Some(se));
            rb.criterion(format!("dynamic_w1_drop_z[{k}]"), z, Relation::Ge, 3.0);
        }
    }
    Ok(rb.finish())
}
