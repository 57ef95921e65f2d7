use serde::{Deserialize, Serialize};

use super::{Grid, PathState, SineBasis};
use crate::error::{Error, Result};

/// Path norms. Paths are evaluated on all `M + 2` nodes, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Norm {
    /// Trapezoidal `L²`.
    L2,
    /// `Σ_k k⁻² ⟨f, e_k⟩²` square-rooted, over the grid sine modes.
    HMinus1,
    /// Discrete Slobodeckij norm `W^{η,r}` with `0 < η < 1/2`, `r ≥ 1`.
    Sobolev { eta: f64, r: f64 },
}

/// Norm of an anchored path.
pub fn norm(grid: &Grid, path: &PathState, which: Norm) -> Result<f64> {
    grid.check_path(path)?;
    let full = full_nodes(path, grid.a(), grid.b());
    eval(grid, path, &full, which)
}

/// Norm of `p − q`; both paths share the anchors so the difference vanishes
/// at the endpoints.
pub fn norm_of_difference(grid: &Grid, p: &PathState, q: &PathState, which: Norm) -> Result<f64> {
    grid.check_path(p)?;
    grid.check_path(q)?;
    let diff = p.sub(q);
    let z = vec![0.0; grid.d()];
    let full = full_nodes(&diff, &z, &z);
    eval(grid, &diff, &full, which)
}

fn full_nodes(p: &PathState, a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    let mut v = Vec::with_capacity(p.m() + 2);
    v.push(a.to_vec());
    v.extend(p.nodes().map(|n| n.to_vec()));
    v.push(b.to_vec());
    v
}

fn eval(grid: &Grid, interior: &PathState, full: &[Vec<f64>], which: Norm) -> Result<f64> {
    let dt = grid.dtheta();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    match which {
        Norm::L2 => {
            let last = full.len() - 1;
            let s: f64 = full
                .iter()
                .enumerate()
                .map(|(i, v)| if i == 0 || i == last { 0.5 * sq(v) } else { sq(v) })
                .sum();
            Ok((s * dt).sqrt())
        }
        Norm::HMinus1 => {
            let basis = SineBasis::new(grid.m());
            let mut s = 0.0;
            for c in 0..grid.d() {
                for (k, f) in basis.coefficients(interior, c).iter().enumerate() {
                    let k = (k + 1) as f64;
                    s += f * f / (k * k);
                }
            }
            Ok(s.sqrt())
        }
        Norm::Sobolev { eta, r } => {
            if !(eta > 0.0 && eta < 0.5) || !(r >= 1.0) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "Sobolev norm needs 0 < η < 1/2 and r ≥ 1, got η = {eta}, r = {r}"
                )));
            }
            let n = full.len();
            let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * dt } else { dt };
            let abs = |v: &[f64]| sq(v).sqrt();
            let mut s: f64 = (0..n).map(|i| w(i) * abs(&full[i]).powf(r)).sum();
            let expo = r * eta + 1.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let diff: Vec<f64> = full[i].iter().zip(&full[j]).map(|(x, y)| x - y).collect();
                    let gap = (j - i) as f64 * dt;
                    s += 2.0 * w(i) * w(j) * abs(&diff).powf(r) / gap.powf(expo);
                }
            }
            Ok(s.powf(1.0 / r))
        }
    }
}
