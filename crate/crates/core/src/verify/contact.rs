use serde_json::json;

use super::{Relation, ReportBuilder, VerificationReport};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::integrator::Trajectory;
use crate::observables::contact_slice;
use crate::stats::{mean_se, proportion};

pub struct ContactParams {
    /// Collar widths, largest first (e.g. `4ε₀, 2ε₀, ε₀`).
    pub eps_list: Vec<f64>,
    pub gap_nodes: usize,
    /// Macroscopic separation in `θ` for two clusters to count as distinct.
    pub min_separation: f64,
    /// Upper bound on the multiplicity fraction at the finest collar.
    pub max_fraction: f64,
    pub min_slices: usize,
}

/// Multiplicity of macroscopically separated contact clusters: decreasing
/// as the collar shrinks and small at the finest collar.
pub fn verify_contact_uniqueness(trajs: &[Trajectory], dom: &DomainSpec, p: &ContactParams) -> Result<VerificationReport> {
    if p.eps_list.is_empty() || p.eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps_list must be nonempty and strictly decreasing".into()));
    }
    let mut rb = ReportBuilder::new(
        "contact",
        json!({
            "domain": dom.shape(), "trajectories": trajs.len(),
            "slices": trajs.iter().map(|t| t.len()).sum::<usize>(),
            "eps_list": p.eps_list, "gap_nodes": p.gap_nodes, "min_separation": p.min_separation,
            "max_fraction": p.max_fraction, "min_slices": p.min_slices,
            "seeds": trajs.iter().map(|t| t.meta.seed).collect::<Vec<_>>(),
        }),
    );
    for t in trajs {
        rb.seed(format!("{}/0/{}", t.meta.seed, crate::integrator::NOISE_PURPOSE));
    }
    let mut fracs = Vec::new();
    // per-trajectory (contacts, multiple) for each collar
    let mut per_traj = vec![Vec::new(); trajs.len()];
    let mut min_contacts = usize::MAX;
    for &eps in &p.eps_list {
        let (mut contacts, mut multiple) = (0, 0);
        for (ti, t) in trajs.iter().enumerate() {
            let dtheta = 1.0 / (t.meta.m as f64 + 1.0);
            let (mut c, mut mu) = (0usize, 0usize);
            for (time, s) in t.times.iter().zip(&t.states) {
                if let Some(r) = contact_slice(s, dom, eps, p.gap_nodes, *time)? {
                    c += 1;
                    if r.is_multiple(dtheta, p.min_separation) {
                        mu += 1;
                    }
                }
            }
            per_traj[ti].push((c, mu));
            contacts += c;
            multiple += mu;
        }
        let (f, se) = if contacts > 0 { proportion(multiple, contacts) } else { (0.0, 0.0) };
        rb.estimate(format!("contact_slices[eps={eps}]"), contacts as f64, None);
        rb.estimate(format!("multiplicity_fraction[eps={eps}]"), f, Some(se));
        fracs.push((f, se, contacts));
        min_contacts = min_contacts.min(contacts);
    }
    if min_contacts < p.min_slices {
        rb.inconclusive(format!("only {min_contacts} contact-bearing slices (need {})", p.min_slices));
    }
    for w in fracs.windows(2) {
        rb.criterion("fraction_step_decrease", w[0].0 - w[1].0, Relation::Ge, 0.0);
    }
    if fracs.len() > 1 {
        let last = fracs.len() - 1;
        let (a, b) = (fracs[0], fracs[last]);
        // frames within a trajectory are correlated, so the spread is taken
        // across trajectories when there are enough of them
        let diffs: Vec<f64> = per_traj
            .iter()
            .filter(|v| v[0].0 > 0 && v[last].0 > 0)
            .map(|v| v[0].1 as f64 / v[0].0 as f64 - v[last].1 as f64 / v[last].0 as f64)
            .collect();
        let se = if diffs.len() >= 8 {
            mean_se(&diffs).1
        } else {
            rb.note("fewer than 8 contact-bearing trajectories; binomial standard errors used");
            (a.1 * a.1 + b.1 * b.1).sqrt()
        };
        rb.estimate("fraction_overall_decrease", a.0 - b.0, Some(se));
        let z = if se > 0.0 { (a.0 - b.0) / se } else if a.0 > b.0 { f64::INFINITY } else { 0.0 };
        rb.criterion("fraction_overall_decrease_z", z, Relation::Ge, 3.0);
    }
    rb.criterion("finest_fraction", fracs.last().unwrap().0, Relation::Lt, p.max_fraction);
    Ok(rb.finish())
}
