use rand::Rng;
use rand_distr::StandardNormal;

use super::{Grid, PathState};

/// Exact Brownian bridge from `a` to `b` at the interior nodes, generated by
/// left-to-right conditioning in `O(M d)`.
pub fn sample_bridge<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> PathState {
    let mut p = grid.zeros();
    sample_bridge_into(grid, rng, &mut p);
    p
}

pub fn sample_bridge_into<R: Rng + ?Sized>(grid: &Grid, rng: &mut R, out: &mut PathState) {
    let (m, d) = (grid.m(), grid.d());
    let dt = grid.dtheta();
    let (a, b) = (grid.a(), grid.b());
    let vals = out.values_mut();
    for c in 0..d {
        let mut prev = a[c];
        for i in 0..m {
            // conditioning on u(θ_{i}) = prev (θ_0 = 0) and u(1) = b
            let t_prev = i as f64 * dt;
            let rem = 1.0 - t_prev;
            let mean = prev + (b[c] - prev) * dt / rem;
            let var = dt * (rem - dt) / rem;
            let z: f64 = rng.sample(StandardNormal);
            prev = mean + var.sqrt() * z;
            vals[i * d + c] = prev;
        }
    }
}

/// Covariance `θ_i (1 − θ_j)` (with `θ_i ≤ θ_j`) of one component of the
/// bridge at interior indices `i, j`.
pub fn bridge_covariance(grid: &Grid, i: usize, j: usize) -> f64 {
    let (s, t) = (grid.theta(i.min(j)), grid.theta(i.max(j)));
    s * (1.0 - t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::rng::stream;

    #[test]
    fn bridge_moments() {
        let dom = DomainSpec::interval(-10.0, 10.0).unwrap();
        let g0 = Grid::new(7, vec![0.0], vec![0.0], &dom).unwrap();
        let g1 = Grid::new(7, vec![0.0], vec![1.0], &dom).unwrap();
        let mut r = stream(11, 0, "bridge-test");
        let n = 100_000;
        let (mut s_mid, mut s_mid2, mut s_q, mut s_cov) = (0.0, 0.0, 0.0, 0.0);
        let mut mean_q = 0.0;
        let mut cov_terms = Vec::with_capacity(n);
        let mut var_terms = Vec::with_capacity(n);
        let mut q_terms = Vec::with_capacity(n);
        for _ in 0..n {
            let p = sample_bridge(&g0, &mut r);
            // θ = 1/2 is index 3, θ = 1/4 index 1, θ = 3/4 index 5
            s_mid += p.node(3)[0];
            s_mid2 += p.node(3)[0].powi(2);
            var_terms.push(p.node(3)[0].powi(2));
            s_cov += p.node(1)[0] * p.node(5)[0];
            cov_terms.push(p.node(1)[0] * p.node(5)[0]);
            let q = sample_bridge(&g1, &mut r);
            s_q += q.node(1)[0];
            mean_q += q.node(1)[0];
            q_terms.push(q.node(1)[0]);
        }
        let nf = n as f64;
        let se = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0) / xs.len() as f64).sqrt()
        };
        let var_mid = s_mid2 / nf - (s_mid / nf).powi(2);
        assert!((var_mid - 0.25).abs() < 3.0 * se(&var_terms), "var {var_mid}");
        assert!((s_q / nf - 0.25).abs() < 3.0 * se(&q_terms), "mean {}", mean_q / nf);
        assert!((s_cov / nf - 0.0625).abs() < 3.0 * se(&cov_terms), "cov {}", s_cov / nf);
        assert_eq!(bridge_covariance(&g0, 1, 5), 0.0625);
    }
}
