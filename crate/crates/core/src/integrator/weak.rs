use super::{draw_noise, noise_rng, Scheme, Trajectory};
use crate::error::{Error, Result};
use crate::pathspace::PathState;

/// Terms of the discrete weak form against a test function `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakFormResidual {
    /// `⟨u_T − u_0, h⟩`.
    pub increment: f64,
    /// `½ Σ dt ⟨h'', u_{k+1}⟩`.
    pub heat: f64,
    /// `Σ ⟨h, dt·½∂Φ_n(u_k)⟩`, read from the recorded penalty.
    pub penalty: f64,
    /// `Σ ⟨h, ΔW_k⟩`, regenerated from the trajectory's noise stream.
    pub noise: f64,
    /// `increment − heat + penalty − noise`.
    pub residual: f64,
    /// Roundoff scale of the residual.
    pub sigma: f64,
}

impl WeakFormResidual {
    /// `|residual| ≤ 3σ`.
    pub fn balanced(&self) -> bool {
        self.residual.abs() <= 3.0 * self.sigma
    }
}

/// Evaluates the weak form of a semi-implicit trajectory recorded at every
/// step against `h`, which must vanish at the first and last node.
///
/// The semi-implicit step satisfies the identity exactly, so the residual
/// is pure roundoff; `sigma` is `ε √(Md)` times the root sum of squares of
/// the per-step term magnitudes.
pub fn weak_form_residual(traj: &Trajectory, h: &PathState) -> Result<WeakFormResidual> {
    let cfg = traj.meta.to_config()?;
    let grid = &cfg.grid;
    grid.check_path(h)?;
    if cfg.scheme != Scheme::SemiImplicit {
        return Err(Error::InvalidParameter("weak-form residual needs the semi-implicit scheme".into()));
    }
    if cfg.record_every != 1 {
        return Err(Error::InvalidParameter("weak-form residual needs record_every = 1".into()));
    }
    let (m, d) = (grid.m(), grid.d());
    if h.node(0).iter().chain(h.node(m - 1)).any(|&v| v != 0.0) {
        return Err(Error::InvalidParameter("test function must vanish at the end nodes".into()));
    }
    let steps = cfg.steps() as usize;
    if traj.len() != steps + 1 {
        return Err(Error::InvalidParameter(format!(
            "trajectory has {} frames, expected {}",
            traj.len(),
            steps + 1
        )));
    }
    let h2 = grid.laplacian_dirichlet(h);
    let mut rng = noise_rng(&cfg);
    let mut buf = vec![0.0; m * d];
    let (mut heat, mut penalty, mut noise, mut ss) = (0.0, 0.0, 0.0, 0.0);
    for k in 1..=steps {
        draw_noise(&cfg, &mut rng, &mut buf);
        let w = PathState::from_values(m, d, std::mem::take(&mut buf))?;
        let u = &traj.states[k];
        let hk = 0.5 * cfg.dt * grid.inner(&h2, u);
        let pk = grid.inner(h, &traj.penalty[k]);
        let nk = grid.inner(h, &w);
        let step = grid.inner(h, u).abs() + grid.inner(h, &traj.states[k - 1]).abs();
        heat += hk;
        penalty += pk;
        noise += nk;
        ss += (step + hk.abs() + pk.abs() + nk.abs()).powi(2);
        buf = w.into_values();
    }
    let increment = grid.inner(h, &traj.states[steps]) - grid.inner(h, &traj.states[0]);
    Ok(WeakFormResidual {
        increment,
        heat,
        penalty,
        noise,
        residual: increment - heat + penalty - noise,
        sigma: f64::EPSILON * ((m * d) as f64).sqrt() * ss.sqrt(),
    })
}
