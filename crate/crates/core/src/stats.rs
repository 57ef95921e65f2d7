//! Monte-Carlo and two-sample statistics used by the verification suite.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Two-sided 3σ tail probability of the normal law.
pub const THREE_SIGMA_P: f64 = 0.0027;

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::INFINITY);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Standard error of a series mean from `batches` non-overlapping batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> (f64, f64) {
    let b = batches.max(2).min(xs.len().max(2));
    let len = xs.len() / b;
    if len == 0 {
        return mean_se(xs);
    }
    let means: Vec<f64> = (0..b).map(|i| xs[i * len..(i + 1) * len].iter().sum::<f64>() / len as f64).collect();
    let (m, se) = mean_se(&means);
    (m, se)
}

/// Self-normalized weighted mean with delta-method standard error.
/// `w` must be normalized to sum one.
pub fn weighted_mean_se(x: &[f64], w: &[f64]) -> (f64, f64) {
    let m: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    let v: f64 = x.iter().zip(w).map(|(a, b)| b * b * (a - m).powi(2)).sum();
    (m, v.sqrt())
}

/// Proportion and its binomial standard error.
pub fn proportion(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov distribution tail `P(K > λ)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let t = 2.0 * (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> KsResult {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let sq = ne.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d),
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Energy distance `2E|X−Y| − E|X−X'| − E|Y−Y'|` (V-statistic form).
pub fn energy_distance(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let pooled: Vec<&[f64]> = x.iter().chain(y).map(|v| v.as_slice()).collect();
    let idx: Vec<usize> = (0..pooled.len()).collect();
    let dist = pair_matrix(&pooled);
    energy_from_matrix(&dist, pooled.len(), &idx[..x.len()], &idx[x.len()..])
}

fn pair_matrix(p: &[&[f64]]) -> Vec<f64> {
    let n = p.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclid(p[i], p[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

fn energy_from_matrix(d: &[f64], n: usize, a: &[usize], b: &[usize]) -> f64 {
    let mean = |s: &[usize], t: &[usize]| {
        let mut acc = 0.0;
        for &i in s {
            let row = &d[i * n..(i + 1) * n];
            for &j in t {
                acc += row[j];
            }
        }
        acc / (s.len() * t.len()) as f64
    };
    2.0 * mean(a, b) - mean(a, a) - mean(b, b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub statistic: f64,
    /// `(statistic − mean) / sd` under random relabelling.
    pub z: f64,
    pub p_value: f64,
}

/// Permutation test of equal laws based on the energy distance.
pub fn energy_test<R: Rng + ?Sized>(x: &[Vec<f64>], y: &[Vec<f64>], perms: usize, rng: &mut R) -> PermutationResult {
    let pooled: Vec<&[f64]> = x.iter().chain(y).map(|v| v.as_slice()).collect();
    let n = pooled.len();
    let dist = pair_matrix(&pooled);
    let mut idx: Vec<usize> = (0..n).collect();
    let obs = energy_from_matrix(&dist, n, &idx[..x.len()], &idx[x.len()..]);
    let mut null = Vec::with_capacity(perms);
    for _ in 0..perms {
        idx.shuffle(rng);
        null.push(energy_from_matrix(&dist, n, &idx[..x.len()], &idx[x.len()..]));
    }
    let (m, _) = mean_se(&null);
    let sd = (null.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (perms as f64 - 1.0)).sqrt();
    let exceed = null.iter().filter(|v| **v >= obs).count();
    PermutationResult {
        statistic: obs,
        z: (obs - m) / sd,
        p_value: (exceed + 1) as f64 / (perms + 1) as f64,
    }
}

/// 1-Wasserstein distance between two weighted empirical laws on `R`
/// (weights normalized internally).
pub fn wasserstein1(x: &[f64], wx: &[f64], y: &[f64], wy: &[f64]) -> f64 {
    let norm = |w: &[f64]| {
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect::<Vec<_>>()
    };
    let (wx, wy) = (norm(wx), norm(wy));
    let mut pts: Vec<(f64, f64)> = x.iter().zip(&wx).map(|(a, w)| (*a, *w)).collect();
    pts.extend(y.iter().zip(&wy).map(|(a, w)| (*a, -*w)));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cdf = 0.0;
    let mut acc = 0.0;
    for w in pts.windows(2) {
        cdf += w[0].1;
        acc += cdf.abs() * (w[1].0 - w[0].0);
    }
    acc
}

pub fn wasserstein1_unweighted(x: &[f64], y: &[f64]) -> f64 {
    wasserstein1(x, &vec![1.0; x.len()], y, &vec![1.0; y.len()])
}

/// Least-squares fit `y ≈ intercept + slope · x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { slope, intercept, slope_se }
}

/// One-sided test that a sequence of estimates decreases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendResult {
    /// `(est_k − est_{k+1}) / se` for consecutive pairs.
    pub step_z: Vec<f64>,
    /// `(est_first − est_last) / se`.
    pub overall_z: f64,
    /// Every point estimate below its predecessor and the overall drop at least `z`.
    pub decreasing: bool,
}

pub fn decreasing_trend(est: &[(f64, f64)], z: f64) -> TrendResult {
    let zs = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0) / (a.1 * a.1 + b.1 * b.1).sqrt().max(1e-300);
    let step_z: Vec<f64> = est.windows(2).map(|w| zs(w[0], w[1])).collect();
    let overall_z = zs(est[0], est[est.len() - 1]);
    let decreasing = est.windows(2).all(|w| w[1].0 < w[0].0) && overall_z >= z;
    TrendResult {
        step_z,
        overall_z,
        decreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand_distr::StandardNormal;

    #[test]
    fn ks_detects_shift_and_accepts_same_law() {
        let mut r = stream(1, 0, "ks-test");
        let a: Vec<f64> = (0..2000).map(|_| r.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..2000).map(|_| r.sample(StandardNormal)).collect();
        let c: Vec<f64> = b.iter().map(|v: &f64| v + 0.3).collect();
        assert!(ks_two_sample(&a, &b).p_value > THREE_SIGMA_P);
        assert!(ks_two_sample(&a, &c).p_value < 1e-6);
        // textbook value of the Kolmogorov quantile
        assert!((kolmogorov_tail(1.3581) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn wasserstein_of_shift_and_point_masses() {
        assert!((wasserstein1_unweighted(&[0.0, 1.0], &[0.5, 1.5]) - 0.5).abs() < 1e-15);
        assert!((wasserstein1(&[0.0, 1.0], &[3.0, 1.0], &[0.0], &[1.0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn energy_test_separates() {
        let mut r = stream(2, 0, "energy-test");
        let draw = |r: &mut crate::rng::StreamRng, s: f64| -> Vec<Vec<f64>> {
            (0..300).map(|_| vec![r.sample::<f64, _>(StandardNormal) + s, r.sample(StandardNormal)]).collect()
        };
        let a = draw(&mut r, 0.0);
        let b = draw(&mut r, 0.0);
        let c = draw(&mut r, 0.5);
        assert!(energy_test(&a, &b, 199, &mut r).z < 3.0);
        assert!(energy_test(&a, &c, 199, &mut r).z > 3.0);
        assert!(energy_distance(&a, &a).abs() < 1e-12);
    }

    #[test]
    fn fit_and_trend() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let f = linear_fit(&x, &[1.0, 3.0, 5.0, 7.0]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        let t = decreasing_trend(&[(1.0, 0.01), (0.5, 0.01), (0.2, 0.01)], 3.0);
        assert!(t.decreasing);
        assert!(!decreasing_trend(&[(1.0, 0.5), (0.9, 0.5)], 3.0).decreasing);
    }
}
