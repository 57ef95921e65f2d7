use rand::Rng;
use serde_json::json;

use super::{label, Relation, ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::Mode;
use crate::potential::{PotentialKind, PotentialSpec, BARRIER_PROX_TOL};
use crate::rng::stream;

#[derive(Clone, Debug)]
pub struct YosidaParams {
    /// Increasing penalization strengths.
    pub n_list: Vec<f64>,
    /// Interior points for the monotonicity checks.
    pub point_cloud_size: usize,
    /// Random pairs for the Lipschitz check.
    pub pairs: usize,
    pub seed: u64,
}

impl Default for YosidaParams {
    fn default() -> Self {
        YosidaParams {
            n_list: vec![1.0, 10.0, 100.0, 1e3, 1e4],
            point_cloud_size: 1_000,
            pairs: 10_000,
            seed: 0,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Envelope checks: monotone values, `2n`-Lipschitz gradients, monotone
/// gradient norms, finite-difference consistency.
pub fn verify_yosida(pot: &PotentialSpec, p: &YosidaParams) -> Result<VerificationReport> {
    if p.n_list.is_empty() || p.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n_list must be nonempty and increasing".into()));
    }
    let dom = pot.domain();
    let mut rb = ReportBuilder::new(
        "yosida",
        json!({
            "domain": dom.shape(),
            "potential": pot.descriptor(),
            "n_list": p.n_list,
            "point_cloud_size": p.point_cloud_size,
            "pairs": p.pairs,
            "seed": p.seed,
        }),
    );
    let mut rng = stream(p.seed, 0, "yosida-points");
    rb.seed(label(p.seed, "yosida-points"));
    let interior: Vec<Vec<f64>> = (0..p.point_cloud_size)
        .map(|_| loop {
            let y = dom.sample_uniform(&mut rng);
            if dom.contains(&y, Mode::Open).unwrap_or(false) {
                break y;
            }
        })
        .collect();
    // points in the doubled bounding box, mostly exterior
    let (lo, hi) = dom.bounding_box();
    let (lo, hi) = (lo.to_vec(), hi.to_vec());
    let cloud: Vec<Vec<f64>> = (0..p.point_cloud_size)
        .map(|_| {
            lo.iter()
                .zip(&hi)
                .map(|(l, h)| {
                    let (c, w) = (0.5 * (l + h), h - l);
                    rng.random_range(c - w..c + w)
                })
                .collect()
        })
        .collect();
    let exterior: Vec<&Vec<f64>> = cloud.iter().filter(|y| !dom.contains(y, Mode::Closed).unwrap_or(true)).collect();
    let handles = p.n_list.iter().map(|n| pot.yosida(*n)).collect::<Result<Vec<_>>>()?;

    // (i) monotone values, Φ_n ≤ Φ, and the envelope bound Φ − Φ_n ≤ |∂₀Φ|²/(4n)
    let mut worst_mono: f64 = 0.0;
    let mut worst_upper: f64 = 0.0;
    let mut worst_gap_bound: f64 = 0.0;
    for y in interior.iter().chain(exterior.iter().copied()) {
        let vals = handles.iter().map(|h| h.value(y)).collect::<Result<Vec<_>>>()?;
        let scale = 1.0 + vals.last().unwrap().abs();
        for w in vals.windows(2) {
            worst_mono = worst_mono.max((w[0] - w[1]) / scale);
        }
        let phi = pot.value(y)?;
        if phi.is_finite() {
            worst_upper = worst_upper.max((vals.last().unwrap() - phi) / scale);
        }
    }
    for y in &interior {
        let g0 = norm(&pot.min_subgradient(y)?);
        let phi = pot.value(y)?;
        for h in &handles {
            let gap = phi - h.value(y)?;
            worst_gap_bound = worst_gap_bound.max((gap - g0 * g0 / (4.0 * h.n())) / (1.0 + phi.abs()));
        }
    }
    rb.criterion("values_nondecreasing_in_n_violation", worst_mono, Relation::Le, 1e-10);
    rb.criterion("envelope_below_potential_violation", worst_upper, Relation::Le, 1e-10);
    rb.criterion("envelope_gap_bound_violation", worst_gap_bound, Relation::Le, 1e-8);
    if matches!(pot.kind(), PotentialKind::Zero) {
        let mut worst: f64 = 0.0;
        for y in &exterior {
            let d = dom.distance(y)?;
            for h in &handles {
                let want = h.n() * d * d;
                worst = worst.max((h.value(y)? - want).abs() / want.max(1e-300));
            }
        }
        rb.criterion("zero_potential_n_d2_rel_error", worst, Relation::Le, 1e-10);
    }

    // (ii) Lipschitz constant of ∂Φ_n
    let all: Vec<&Vec<f64>> = interior.iter().chain(cloud.iter()).collect();
    let mut prng = stream(p.seed, 0, "yosida-pairs");
    rb.seed(label(p.seed, "yosida-pairs"));
    let mut worst_lip: f64 = 0.0;
    for h in &handles {
        for _ in 0..p.pairs {
            let x = all[prng.random_range(0..all.len())];
            let mut y = all[prng.random_range(0..all.len())].clone();
            // half of the pairs are close neighbours
            if prng.random::<bool>() {
                let r = 10f64.powf(prng.random_range(-6.0..-1.0));
                y = x.iter().map(|v| v + r * prng.random_range(-1.0..1.0)).collect();
            }
            let dx = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            if dx == 0.0 {
                continue;
            }
            let (_, gx) = h.eval(x)?;
            let (_, gy) = h.eval(&y)?;
            let dg = norm(&gx.iter().zip(&gy).map(|(a, b)| a - b).collect::<Vec<_>>());
            let slack = 4.0 * h.n() * BARRIER_PROX_TOL;
            worst_lip = worst_lip.max((dg - slack).max(0.0) / (2.0 * h.n() * dx));
        }
    }
    rb.estimate("max_lipschitz_ratio", worst_lip, None);
    rb.criterion("lipschitz_ratio_over_2n", worst_lip, Relation::Le, 1.0 + 1e-6);

    // (iii) |∂Φ_n| nondecreasing in n, bounded by and converging to |∂₀Φ|
    let mut worst_grad_mono: f64 = 0.0;
    let mut worst_grad_upper: f64 = 0.0;
    let mut mean_gap = vec![0.0; handles.len()];
    for y in &interior {
        let g0 = norm(&pot.min_subgradient(y)?);
        let norms = handles.iter().map(|h| Ok(norm(&h.eval(y)?.1))).collect::<Result<Vec<_>>>()?;
        let scale = 1.0 + g0;
        for w in norms.windows(2) {
            worst_grad_mono = worst_grad_mono.max((w[0] - w[1]) / scale);
        }
        for (k, g) in norms.iter().enumerate() {
            worst_grad_upper = worst_grad_upper.max((g - g0) / scale);
            mean_gap[k] += (g0 - g) / scale / interior.len() as f64;
        }
    }
    rb.criterion("gradient_norm_nondecreasing_violation", worst_grad_mono, Relation::Le, 1e-9);
    rb.criterion("gradient_norm_above_min_subgradient", worst_grad_upper, Relation::Le, 1e-9);
    for (n, g) in p.n_list.iter().zip(&mean_gap) {
        rb.estimate(format!("mean_rel_gap_to_min_subgradient_n={n}"), *g, None);
    }
    if handles.len() > 1 {
        rb.criterion(
            "gap_to_min_subgradient_shrinks",
            mean_gap[mean_gap.len() - 1] - mean_gap[0],
            Relation::Le,
            0.0,
        );
    }
    if let PotentialKind::Quadratic { center, weight } = pot.kind() {
        let mut worst: f64 = 0.0;
        for y in &interior {
            for h in &handles {
                let n = h.n();
                let y0: Vec<f64> = y.iter().zip(center).map(|(a, c)| (2.0 * n * a + weight * c) / (2.0 * n + weight)).collect();
                if !dom.contains(&y0, Mode::Open)? {
                    continue;
                }
                let want: Vec<f64> = y.iter().zip(center).map(|(a, c)| 2.0 * n / (2.0 * n + weight) * weight * (a - c)).collect();
                let g = h.eval(y)?.1;
                worst = worst.max(norm(&g.iter().zip(&want).map(|(a, b)| a - b).collect::<Vec<_>>()));
            }
        }
        rb.criterion("quadratic_closed_form_gradient_error", worst, Relation::Le, 1e-9);
    }

    // (iv) central differences
    let mut worst_fd: f64 = 0.0;
    for h in &handles {
        for y in interior.iter().take(200).chain(exterior.iter().copied().take(200)) {
            let (_, g) = h.eval(y)?;
            let delta = 1e-6 * (1.0 + norm(y));
            for k in 0..y.len() {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[k] += delta;
                ym[k] -= delta;
                let fd = (h.value(&yp)? - h.value(&ym)?) / (2.0 * delta);
                worst_fd = worst_fd.max((fd - g[k]).abs() / g[k].abs().max(1.0));
            }
        }
    }
    rb.criterion("finite_difference_rel_error", worst_fd, Relation::Le, 1e-5);

    // integrability of |∂₀φ|² over O, stable under sample refinement
    let (a, sa) = pot.subgradient_l2_integral(20_000, p.seed.wrapping_add(1));
    let (b, sb) = pot.subgradient_l2_integral(80_000, p.seed.wrapping_add(2));
    rb.seed(label(p.seed.wrapping_add(1), "assumphi-quadrature"));
    rb.seed(label(p.seed.wrapping_add(2), "assumphi-quadrature"));
    rb.estimate("subgradient_l2_integral_coarse", a, Some(sa));
    rb.estimate("subgradient_l2_integral_fine", b, Some(sb));
    let z = if sa == 0.0 && sb == 0.0 { 0.0 } else { (a - b).abs() / (sa * sa + sb * sb).sqrt() };
    rb.criterion("subgradient_l2_integral_finite", if a.is_finite() && b.is_finite() { 0.0 } else { 1.0 }, Relation::Le, 0.0);
    rb.criterion("subgradient_l2_integral_refinement_z", z, Relation::Lt, 3.0);
    Ok(rb.finish())
}
