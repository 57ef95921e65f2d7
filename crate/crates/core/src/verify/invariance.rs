use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{label, Relation, ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::integrator::{run_observed, Scheme, SimConfig};
use crate::observables::max_node_boundary_distance;
use crate::pathspace::{Grid, InvariantSampler, PathState, SineBasis, Strategy, Target};
use crate::potential::PotentialSpec;
use crate::rng::{stream, StreamKey};
use crate::stats::{energy_test, ks_two_sample, mean_se, THREE_SIGMA_P};

pub struct InvarianceParams {
    pub n: f64,
    pub t_relax: f64,
    pub dt: f64,
    pub scheme: Scheme,
    /// Draws per compared sample.
    pub samples: usize,
    /// Permutations of the energy-distance test.
    pub permutations: usize,
    /// Also assert `E[⟨u, e₁⟩] = 0` (symmetric setups).
    pub symmetric: bool,
    pub seed: u64,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        InvarianceParams {
            n: 100.0,
            t_relax: 2.0,
            dt: 2.5e-4,
            scheme: Scheme::SemiImplicit,
            samples: 1000,
            permutations: 199,
            symmetric: false,
            seed: 0,
        }
    }
}

struct Features {
    scalars: Vec<(String, Vec<f64>)>,
    joint: Vec<Vec<f64>>,
}

fn features(grid: &Grid, pot: &PotentialSpec, paths: &[PathState]) -> Result<Features> {
    let basis = SineBasis::new(grid.m());
    let d = grid.d();
    let mut scalars = Vec::new();
    for c in 0..d {
        for k in 1..=2 {
            scalars.push((format!("<u,e{k}>_{c}"), paths.iter().map(|p| basis.coefficient(p, k, c)).collect()));
        }
    }
    scalars.push((
        "max_node_boundary_distance".into(),
        paths.iter().map(|p| max_node_boundary_distance(p, pot.domain())).collect::<Result<_>>()?,
    ));
    let joint = paths
        .iter()
        .map(|p| (0..d).flat_map(|c| (1..=3).map(move |k| (k, c))).map(|(k, c)| basis.coefficient(p, k, c)).collect())
        .collect();
    Ok(Features { scalars, joint })
}

/// `ν_n` is invariant: exact draws against relaxed draws (from `ν_n` and
/// from the harmonic line) via KS and energy-distance tests at 3σ.
pub fn verify_invariance(grid: &Grid, pot: &PotentialSpec, p: &InvarianceParams) -> Result<VerificationReport> {
    if !(p.t_relax >= 0.0) {
        return Err(Error::InvalidParameter("t_relax must be ≥ 0".into()));
    }
    let mut rb = ReportBuilder::new(
        "invariance",
        json!({
            "m": grid.m(), "a": grid.a(), "b": grid.b(), "domain": pot.domain().shape(),
            "potential": pot.descriptor(), "n": p.n, "t_relax": p.t_relax, "dt": p.dt,
            "scheme": p.scheme, "samples": p.samples, "permutations": p.permutations, "seed": p.seed,
        }),
    );
    let sampler = InvariantSampler::new(grid, pot, Target::NuN { n: p.n }, Strategy::Rejection)?;
    let draw = |purpose: &str| sampler.batch(p.samples, &StreamKey::new(p.seed, 0, purpose));
    rb.seed(label(p.seed, "invariance-direct"));
    rb.seed(label(p.seed, "invariance-start"));
    let (direct, starts) = match (draw("invariance-direct"), draw("invariance-start")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::AttemptCap { cap, .. }), _) | (_, Err(Error::AttemptCap { cap, .. })) => {
            rb.inconclusive(format!("rejection sampler exceeded {cap} proposals"));
            return Ok(rb.finish());
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let relax = |init: &PathState, r: usize, purpose: &str| -> Result<PathState> {
        if p.t_relax == 0.0 {
            return Ok(init.clone());
        }
        let seed = stream(p.seed, r as u64, purpose).random::<u64>();
        let cfg = SimConfig::new(grid.clone(), pot.clone(), p.n, p.dt, p.t_relax, init.clone(), seed)?
            .with_scheme(p.scheme);
        run_observed(&cfg, |_, _, _| {})
    };
    rb.seed(label(p.seed, "invariance-noise-stationary"));
    rb.seed(label(p.seed, "invariance-noise-line"));
    let from_nu: Vec<PathState> = starts
        .samples
        .par_iter()
        .enumerate()
        .map(|(r, s)| relax(&s.path, r, "invariance-noise-stationary"))
        .collect::<Result<_>>()?;
    let line = grid.line();
    let from_line: Vec<PathState> = (0..p.samples)
        .into_par_iter()
        .map(|r| relax(&line, r, "invariance-noise-line"))
        .collect::<Result<_>>()?;
    let direct_paths: Vec<PathState> = direct.samples.into_iter().map(|s| s.path).collect();
    let fa = features(grid, pot, &direct_paths)?;
    let fb = features(grid, pot, &from_nu)?;
    let fc = features(grid, pot, &from_line)?;
    for (tag, other) in [("stationary", &fb), ("from_line", &fc)] {
        if tag == "from_line" && p.t_relax == 0.0 {
            continue;
        }
        for ((name, xa), (_, xb)) in fa.scalars.iter().zip(&other.scalars) {
            let ks = ks_two_sample(xa, xb);
            rb.estimate(format!("ks_stat[{tag}|{name}]"), ks.statistic, None);
            rb.criterion(format!("ks_p[{tag}|{name}]"), ks.p_value, Relation::Gt, THREE_SIGMA_P);
        }
        let mut rng = stream(p.seed, 0, &format!("invariance-perm-{tag}"));
        rb.seed(label(p.seed, &format!("invariance-perm-{tag}")));
        let et = energy_test(&fa.joint, &other.joint, p.permutations, &mut rng);
        rb.estimate(format!("energy_distance[{tag}]"), et.statistic, None);
        rb.criterion(format!("energy_z[{tag}]"), et.z, Relation::Lt, 3.0);
    }
    let (m, se) = mean_se(&fa.scalars[0].1);
    rb.estimate("mean_<u,e1>_direct", m, Some(se));
    if p.symmetric {
        rb.criterion("symmetric_mean_<u,e1>_z", m.abs() / se, Relation::Lt, 3.0);
    }
    Ok(rb.finish())
}
