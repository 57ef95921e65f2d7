//! Time stepping of the penalized equation
//!
//! `∂u/∂t = ½ ∂²u/∂θ² − ½ ∂Φ_n(u) + Ẇ`, `u(t, 0) = a`, `u(t, 1) = b`,
//!
//! on a [`Grid`], with the accumulated penalty `∫ ½∂Φ_n(u) ds` recorded
//! per interval as the empirical reflection measure.

mod reflection;
mod scheme;
mod tridiag;
mod weak;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Shape};
use crate::pathspace::{self, noise_into, Grid, Norm, PathState};
use crate::potential::{PotentialDescriptor, PotentialSpec};
use crate::rng::{stream, StreamRng};

pub use reflection::{default_collar, reflection_estimate, ReflectionEstimate};
pub use scheme::{Scheme, Stepper};
pub use weak::{weak_form_residual, WeakFormResidual};

/// Stream purpose of the driving noise.
pub const NOISE_PURPOSE: &str = "integrator-noise";

/// A fully specified simulation.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub grid: Grid,
    pub pot: PotentialSpec,
    /// Penalization strength.
    pub n: f64,
    pub dt: f64,
    pub t_end: f64,
    pub initial: PathState,
    pub record_every: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// Multiplier on the noise; `0` gives the deterministic equation.
    pub noise_scale: f64,
}

impl SimConfig {
    /// Semi-implicit config recording every step, with unit noise.
    pub fn new(grid: Grid, pot: PotentialSpec, n: f64, dt: f64, t_end: f64, initial: PathState, seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            grid,
            pot,
            n,
            dt,
            t_end,
            initial,
            record_every: 1,
            seed,
            scheme: Scheme::SemiImplicit,
            noise_scale: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_scheme(mut self, s: Scheme) -> Self {
        self.scheme = s;
        self
    }

    pub fn with_noise_scale(mut self, s: f64) -> Self {
        self.noise_scale = s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_initial(mut self, initial: PathState) -> Self {
        self.initial = initial;
        self
    }

    pub fn dom(&self) -> &DomainSpec {
        self.pot.domain()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.n.is_finite() && self.n > 0.0) {
            return bad(format!("n must be > 0, got {}", self.n));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return bad(format!("t_end = {} must be ≥ dt = {}", self.t_end, self.dt));
        }
        if self.dt > 1.0 / (4.0 * self.n) * (1.0 + 1e-12) {
            return bad(format!(
                "explicit drift needs dt ≤ 1/(4n) = {}, got dt = {}",
                1.0 / (4.0 * self.n),
                self.dt
            ));
        }
        if self.record_every == 0 {
            return bad("record_every must be ≥ 1".into());
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return bad(format!("noise_scale must be ≥ 0, got {}", self.noise_scale));
        }
        self.grid.check_path(&self.initial)?;
        if !self.initial.is_finite() {
            return bad("initial state has non-finite entries".into());
        }
        self.grid.check_domain(self.dom())
    }

    /// Number of steps: `⌈t_end / dt⌉`.
    pub fn steps(&self) -> u64 {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as u64
    }

    /// Discrete first eigenvalue `λ₁ = (2/dθ²)(1 − cos πdθ)`.
    pub fn lambda1(&self) -> f64 {
        pathspace::SineBasis::eigenvalue(self.grid.m(), 1)
    }

    pub fn meta(&self) -> TrajectoryMeta {
        TrajectoryMeta {
            domain: self.dom().shape().clone(),
            potential: self.pot.descriptor(),
            m: self.grid.m(),
            a: self.grid.a().to_vec(),
            b: self.grid.b().to_vec(),
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            seed: self.seed,
            scheme: self.scheme,
            noise_scale: self.noise_scale,
            initial: self.initial.values().to_vec(),
        }
    }
}

/// Serializable description of the run that produced a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryMeta {
    pub domain: Shape,
    pub potential: PotentialDescriptor,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub n: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub noise_scale: f64,
    pub initial: Vec<f64>,
}

impl TrajectoryMeta {
    pub fn d(&self) -> usize {
        self.a.len()
    }

    /// Rebuilds the configuration (fails for custom potentials).
    pub fn to_config(&self) -> Result<SimConfig> {
        let dom = DomainSpec::new(self.domain.clone())?;
        let grid = Grid::new(self.m, self.a.clone(), self.b.clone(), &dom)?;
        let pot = PotentialSpec::from_descriptor(&self.potential, dom)?;
        let initial = PathState::from_values(self.m, self.d(), self.initial.clone())?;
        let cfg = SimConfig {
            grid,
            pot,
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            initial,
            record_every: self.record_every,
            seed: self.seed,
            scheme: self.scheme,
            noise_scale: self.noise_scale,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dom(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.domain.clone())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.m, self.a.clone(), self.b.clone(), &self.dom()?)
    }
}

/// Recorded states, with `penalty[i]` the accumulated `∫ ½∂Φ_n(u) ds` over
/// `(times[i−1], times[i]]` (zero for `i = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PathState>,
    pub penalty: Vec<PathState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn empty(meta: TrajectoryMeta) -> Self {
        Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            penalty: Vec::new(),
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sum of all penalty increments, node by node.
    pub fn total_penalty(&self) -> PathState {
        let mut tot = PathState::zeros(self.meta.m, self.meta.d());
        for p in &self.penalty {
            tot.add_scaled(1.0, p);
        }
        tot
    }
}

fn noise_rng(cfg: &SimConfig) -> StreamRng {
    stream(cfg.seed, 0, NOISE_PURPOSE)
}

fn draw_noise(cfg: &SimConfig, rng: &mut StreamRng, buf: &mut [f64]) {
    if cfg.noise_scale == 0.0 {
        buf.fill(0.0);
        return;
    }
    noise_into(&cfg.grid, cfg.dt, rng, buf);
    if cfg.noise_scale != 1.0 {
        for v in buf.iter_mut() {
            *v *= cfg.noise_scale;
        }
    }
}

/// One step from `state`, drawing the noise from `rng`.
pub fn step(state: &PathState, cfg: &SimConfig, rng: &mut StreamRng) -> Result<PathState> {
    cfg.validate()?;
    cfg.grid.check_path(state)?;
    let mut st = Stepper::new(cfg)?;
    let mut noise = vec![0.0; state.values().len()];
    draw_noise(cfg, rng, &mut noise);
    let mut u = state.clone();
    let mut pen = vec![0.0; noise.len()];
    st.advance(&mut u, &noise, &mut pen)?;
    scheme::non_finite_error(&u, 1, cfg.dt)?;
    Ok(u)
}

/// Integrates from `cfg.initial` to `t_end`, recording at `t = 0`, every
/// `record_every` steps and at the final step.
pub fn run(cfg: &SimConfig) -> Result<Trajectory> {
    let mut out = run_many(cfg, std::slice::from_ref(&cfg.initial))?;
    Ok(out.remove(0))
}

/// Two solutions driven by the same noise, with `‖u₁(t) − u₂(t)‖_{L²}` at
/// every recorded time.
pub fn run_coupled(cfg: &SimConfig, initial2: &PathState) -> Result<(Trajectory, Trajectory, Vec<f64>)> {
    cfg.grid.check_path(initial2)?;
    let mut out = run_many(cfg, &[cfg.initial.clone(), initial2.clone()])?;
    let t2 = out.pop().unwrap();
    let t1 = out.pop().unwrap();
    let decay = t1
        .states
        .iter()
        .zip(&t2.states)
        .map(|(p, q)| pathspace::norm_of_difference(&cfg.grid, p, q, Norm::L2))
        .collect::<Result<Vec<_>>>()?;
    Ok((t1, t2, decay))
}

/// Runs several initial states under one shared noise realization.
pub fn run_many(cfg: &SimConfig, initials: &[PathState]) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    for x in initials {
        cfg.grid.check_path(x)?;
    }
    let steps = cfg.steps();
    let size = cfg.initial.values().len();
    let mut rng = noise_rng(cfg);
    let mut noise = vec![0.0; size];
    let mut steppers = initials.iter().map(|_| Stepper::new(cfg)).collect::<Result<Vec<_>>>()?;
    let mut states: Vec<PathState> = initials.to_vec();
    let mut accs: Vec<Vec<f64>> = initials.iter().map(|_| vec![0.0; size]).collect();
    let mut trajs: Vec<Trajectory> = initials
        .iter()
        .map(|x| {
            let mut meta = cfg.meta();
            meta.initial = x.values().to_vec();
            let mut t = Trajectory::empty(meta);
            t.times.push(0.0);
            t.states.push(x.clone());
            t.penalty.push(cfg.grid.zeros());
            t
        })
        .collect();
    let (m, d) = (cfg.grid.m(), cfg.grid.d());
    for k in 1..=steps {
        draw_noise(cfg, &mut rng, &mut noise);
        let time = k as f64 * cfg.dt;
        let record = k % cfg.record_every as u64 == 0 || k == steps;
        for r in 0..initials.len() {
            steppers[r].advance(&mut states[r], &noise, &mut accs[r])?;
            scheme::non_finite_error(&states[r], k, time)?;
            if record {
                let tr = &mut trajs[r];
                tr.times.push(time);
                tr.states.push(states[r].clone());
                tr.penalty.push(PathState::from_values(m, d, std::mem::replace(&mut accs[r], vec![0.0; size]))?);
            }
        }
    }
    Ok(trajs)
}

/// Runs from `cfg.initial`, calling `observe(k, t, u)` after every step
/// without storing states.
pub fn run_observed(cfg: &SimConfig, mut observe: impl FnMut(u64, f64, &PathState)) -> Result<PathState> {
    cfg.validate()?;
    let mut st = Stepper::new(cfg)?;
    let mut rng = noise_rng(cfg);
    let size = cfg.initial.values().len();
    let mut noise = vec![0.0; size];
    let mut acc = vec![0.0; size];
    let mut u = cfg.initial.clone();
    observe(0, 0.0, &u);
    for k in 1..=cfg.steps() {
        draw_noise(cfg, &mut rng, &mut noise);
        st.advance(&mut u, &noise, &mut acc)?;
        let time = k as f64 * cfg.dt;
        scheme::non_finite_error(&u, k, time)?;
        observe(k, time, &u);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathspace::SineBasis;

    fn cfg_1d(m: usize, n: f64, dt: f64, t_end: f64) -> SimConfig {
        let dom = DomainSpec::interval(-1.0, 1.0).unwrap();
        let grid = Grid::new(m, vec![-0.2], vec![0.3], &dom).unwrap();
        let init = grid.line();
        SimConfig::new(grid, PotentialSpec::zero(dom), n, dt, t_end, init, 1).unwrap()
    }

    #[test]
    fn line_is_a_fixed_point() {
        for scheme in [Scheme::SemiImplicit, Scheme::Exponential] {
            let cfg = cfg_1d(31, 10.0, 1e-3, 0.1).with_noise_scale(0.0).with_scheme(scheme);
            let tr = run(&cfg).unwrap();
            let last = tr.states.last().unwrap();
            assert!(last.sub(&cfg.initial).max_abs() < 1e-12);
        }
    }

    #[test]
    fn first_mode_decays_at_heat_rate() {
        let base = cfg_1d(63, 10.0, 1e-3, 1.0).with_noise_scale(0.0);
        let pert = {
            let mut p = base.grid.line();
            p.add_scaled(0.5, &base.grid.sine_mode(1, 0));
            p
        };
        let lam = base.lambda1();
        let basis = SineBasis::new(63);
        for scheme in [Scheme::SemiImplicit, Scheme::Exponential] {
            let cfg = base.clone().with_scheme(scheme).with_initial(pert.clone());
            let tr = run(&cfg).unwrap();
            let amp = basis.coefficient(&tr.states.last().unwrap().sub(&cfg.grid.line()), 1, 0);
            assert!((amp - 0.5 * (-lam * 0.5).exp()).abs() < 1e-3);
            if scheme == Scheme::Exponential {
                assert!((amp / (0.5 * (-lam * 0.5).exp()) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn penalty_pushes_exterior_node_inward() {
        let n = 100.0;
        let dt = 1e-5;
        let mut cfg = cfg_1d(15, n, dt, dt).with_noise_scale(0.0);
        let delta = 0.05;
        let mut x = cfg.grid.line();
        x.node_mut(7)[0] = 1.0 + delta;
        cfg.initial = x.clone();
        let mut no_pen = x.clone();
        // same heat step without the penalty: zero domain violation config
        let big = DomainSpec::interval(-5.0, 5.0).unwrap();
        let cfg0 = SimConfig::new(
            Grid::new(15, vec![-0.2], vec![0.3], &big).unwrap(),
            PotentialSpec::zero(big),
            n,
            dt,
            dt,
            x.clone(),
            1,
        )
        .unwrap()
        .with_noise_scale(0.0);
        no_pen = step(&no_pen, &cfg0, &mut stream(0, 0, "t")).unwrap();
        let with_pen = step(&x, &cfg, &mut stream(0, 0, "t")).unwrap();
        let shift = no_pen.node(7)[0] - with_pen.node(7)[0];
        let want = 0.5 * dt * 2.0 * n * delta;
        assert!(shift > 0.0 && (shift - want).abs() < 0.01 * want, "{shift} vs {want}");
    }

    #[test]
    fn replay_is_bit_exact_and_coupling_contracts() {
        let cfg = cfg_1d(31, 100.0, 1e-3, 0.2).with_record_every(10);
        assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
        let (_, _, z) = run_coupled(&cfg, &cfg.initial).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
        let mut q2 = cfg.initial.clone();
        q2.add_scaled(0.3, &cfg.grid.sine_mode(2, 0));
        let (t1, _, dec) = run_coupled(&cfg, &q2).unwrap();
        let rho = cfg.scheme.contraction_factor(cfg.lambda1(), cfg.dt);
        for (t, v) in t1.times.iter().zip(&dec) {
            let k = (t / cfg.dt).round();
            assert!(*v <= dec[0] * rho.powf(k) * (1.0 + 1e-8));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let c = cfg_1d(15, 10.0, 1e-3, 0.1);
        let mut bad = c.clone();
        bad.dt = 0.1;
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.t_end = 1e-4;
        assert!(bad.validate().is_err());
        let mut bad = c;
        bad.initial = PathState::zeros(7, 1);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn reflection_bookkeeping() {
        let dom = DomainSpec::interval(0.0, 1.0).unwrap();
        let grid = Grid::new(15, vec![0.5], vec![0.5], &dom).unwrap();
        let n = 100.0;
        let cfg = SimConfig::new(grid.clone(), PotentialSpec::zero(dom.clone()), n, 1e-3, 0.5, grid.line(), 4).unwrap();
        let tr = run(&cfg).unwrap();
        let est = reflection_estimate(&tr, &dom, 10.0).unwrap();
        // time integral of n·d(u, Ō) in L¹, same left-point evaluations
        let mut want = 0.0;
        run_observed(&cfg, |k, _, u| {
            if k < cfg.steps() {
                want += cfg.dt * grid.dtheta() * u.nodes().map(|y| n * dom.distance(y).unwrap()).sum::<f64>();
            }
        })
        .unwrap();
        assert!(want > 0.0);
        assert!((est.total_mass() - want).abs() < 1e-10, "{} vs {want}", est.total_mass());
        assert_eq!(est.total_leakage(), 0.0);
        // deep interior, no noise: nothing
        let quiet = cfg.clone().with_noise_scale(0.0);
        let e = reflection_estimate(&run(&quiet).unwrap(), &dom, 0.1).unwrap();
        assert_eq!(e.total_mass(), 0.0);
    }
}
