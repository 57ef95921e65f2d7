use rand::Rng;
use rand_distr::StandardNormal;

use super::{Grid, PathState};
use crate::error::{Error, Result};

/// Space-time white-noise increments over one time step: independent
/// `N(0, dt / dθ)` entries, so that `⟨h, ΔW⟩` has variance `dt ‖h‖²`.
pub fn noise_field<R: Rng + ?Sized>(grid: &Grid, dt: f64, rng: &mut R) -> Result<PathState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise_field needs dt > 0, got {dt}")));
    }
    let mut p = grid.zeros();
    noise_into(grid, dt, rng, p.values_mut());
    Ok(p)
}

pub fn noise_into<R: Rng + ?Sized>(grid: &Grid, dt: f64, rng: &mut R, out: &mut [f64]) {
    let sd = (dt / grid.dtheta()).sqrt();
    for v in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = sd * z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::rng::stream;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn node_variance_is_dt_over_dtheta() {
        let dom = DomainSpec::interval(-1.0, 1.0).unwrap();
        let g = Grid::centered(63, &dom).unwrap();
        let dt = 1e-3;
        let mut r = stream(5, 0, "noise-test");
        let sq: Vec<f64> = (0..1_000_000 / 63 + 1)
            .flat_map(|_| noise_field(&g, dt, &mut r).unwrap().into_values())
            .map(|v| v * v)
            .take(1_000_000)
            .collect();
        let (m, se) = mean_se(&sq);
        assert!((m - 0.064).abs() < 3.0 * se, "{m} ± {se}");
        assert!(noise_field(&g, 0.0, &mut r).is_err());
    }

    #[test]
    fn isometry_and_independence() {
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0).unwrap();
        let g = Grid::centered(31, &dom).unwrap();
        let dt = 2e-3;
        let e1 = g.sine_mode(1, 0);
        let e1b = g.sine_mode(1, 1);
        let mut r = stream(6, 0, "noise-test");
        let mut sq = Vec::new();
        let mut cross = Vec::new();
        for _ in 0..100_000 {
            let w = noise_field(&g, dt, &mut r).unwrap();
            let x = g.inner(&e1, &w);
            let y = g.inner(&e1b, &w);
            sq.push(x * x);
            cross.push(x * y);
        }
        let (m, se) = mean_se(&sq);
        assert!((m - dt).abs() < 3.0 * se, "{m} ± {se}");
        let (c, se) = mean_se(&cross);
        assert!(c.abs() < 3.0 * se);
    }
}
