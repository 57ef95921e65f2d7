use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{label, Relation, ReportBuilder, VerificationReport};
use crate::error::Result;
use crate::integrator::{run_many, Scheme, SimConfig};
use crate::observables::CylinderFunctional;
use crate::pathspace::{norm_of_difference, Grid, Norm, PathState};
use crate::potential::PotentialSpec;
use crate::rng::stream;
use crate::stats::mean_se;

pub struct FellerParams {
    pub n: f64,
    pub t: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub x: PathState,
    pub y: PathState,
    pub phi_test: CylinderFunctional,
    /// `‖φ‖_∞` of the test functional.
    pub sup_norm: f64,
    pub samples: usize,
    pub seed: u64,
}

/// `|P_tφ(x) − P_tφ(y)| ≤ ‖φ‖_∞ ‖x − y‖ / √t`, both sides of the difference
/// estimated with common noise.
pub fn verify_strong_feller(grid: &Grid, pot: &PotentialSpec, p: &FellerParams) -> Result<VerificationReport> {
    let mut rb = ReportBuilder::new(
        "strong_feller",
        json!({
            "m": grid.m(), "domain": pot.domain().shape(), "potential": pot.descriptor(), "n": p.n,
            "t": p.t, "dt": p.dt, "scheme": p.scheme, "phi_test": p.phi_test.name, "sup_norm": p.sup_norm,
            "samples": p.samples, "seed": p.seed,
        }),
    );
    rb.seed(label(p.seed, "feller-noise"));
    let dist = norm_of_difference(grid, &p.x, &p.y, Norm::L2)?;
    let one = |r: usize| -> Result<f64> {
        let seed = stream(p.seed, r as u64, "feller-noise").random::<u64>();
        let cfg = SimConfig::new(grid.clone(), pot.clone(), p.n, p.dt, p.t, p.x.clone(), seed)?
            .with_scheme(p.scheme)
            .with_record_every(usize::MAX);
        let tr = run_many(&cfg, &[p.x.clone(), p.y.clone()])?;
        let fx = p.phi_test.value(grid, tr[0].states.last().unwrap())?;
        let fy = p.phi_test.value(grid, tr[1].states.last().unwrap())?;
        Ok(fx - fy)
    };
    let diffs: Vec<f64> = (0..p.samples).into_par_iter().map(one).collect::<Result<_>>()?;
    let (m, se) = mean_se(&diffs);
    let bound = p.sup_norm * dist / p.t.sqrt();
    rb.estimate("difference", m, Some(se));
    rb.estimate("bound", bound, None);
    rb.criterion("excess_over_bound", m.abs() - bound - 3.0 * se, Relation::Le, 0.0);
    Ok(rb.finish())
}
