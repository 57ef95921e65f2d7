use super::Trajectory;
use crate::error::Result;
use crate::geometry::DomainSpec;
use crate::pathspace::Grid;

/// Empirical reflection measure from a trajectory's penalty increments.
///
/// Interval `i` covers `(times[i], times[i+1]]`. Each penalty increment is
/// attributed to the node's state at the start of its interval.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionEstimate {
    pub eps: f64,
    pub m: usize,
    pub d: usize,
    /// Interval end points.
    pub times: Vec<f64>,
    /// `|increment| / duration` on collar nodes, interval-major. Cell
    /// `(interval, node)` carries mass `density · duration · dθ`.
    pub density: Vec<f64>,
    /// Unit vectors `−increment / |increment|` where density is positive.
    pub direction: Vec<f64>,
    /// Mass `|increment| · dθ` of nodes outside the collar, per interval.
    pub leakage: Vec<f64>,
    pub dtheta: f64,
    pub durations: Vec<f64>,
}

impl ReflectionEstimate {
    pub fn density_at(&self, interval: usize, node: usize) -> f64 {
        self.density[interval * self.m + node]
    }

    pub fn direction_at(&self, interval: usize, node: usize) -> &[f64] {
        let o = (interval * self.m + node) * self.d;
        &self.direction[o..o + self.d]
    }

    /// Mass carried by the collar nodes.
    pub fn collar_mass(&self) -> f64 {
        self.durations
            .iter()
            .enumerate()
            .map(|(i, dur)| {
                self.density[i * self.m..(i + 1) * self.m].iter().sum::<f64>() * dur * self.dtheta
            })
            .sum()
    }

    pub fn total_leakage(&self) -> f64 {
        self.leakage.iter().sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.collar_mass() + self.total_leakage()
    }
}

/// Default collar width `3 · σ · M^{−1/2}` with `σ = 1/2` the bridge
/// standard deviation at `θ = 1/2`.
pub fn default_collar(grid: &Grid) -> f64 {
    1.5 / (grid.m() as f64).sqrt()
}

pub fn reflection_estimate(traj: &Trajectory, dom: &DomainSpec, eps: f64) -> Result<ReflectionEstimate> {
    let (m, d) = (traj.meta.m, traj.meta.d());
    let dtheta = 1.0 / (m as f64 + 1.0);
    let intervals = traj.len().saturating_sub(1);
    let mut est = ReflectionEstimate {
        eps,
        m,
        d,
        times: traj.times.iter().skip(1).cloned().collect(),
        density: vec![0.0; intervals * m],
        direction: vec![0.0; intervals * m * d],
        leakage: vec![0.0; intervals],
        dtheta,
        durations: traj.times.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    for i in 0..intervals {
        let start = &traj.states[i];
        let inc = &traj.penalty[i + 1];
        let dur = est.durations[i];
        for j in 0..m {
            let v = inc.node(j);
            let mag = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if mag == 0.0 {
                continue;
            }
            if dom.signed_distance(start.node(j))?.abs() < eps {
                est.density[i * m + j] = mag / dur;
                let o = (i * m + j) * d;
                for c in 0..d {
                    est.direction[o + c] = -v[c] / mag;
                }
            } else {
                est.leakage[i] += mag * dtheta;
            }
        }
    }
    Ok(est)
}
