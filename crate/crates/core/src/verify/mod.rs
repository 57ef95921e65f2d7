//! Named statistical checks. Each produces a [`VerificationReport`] with
//! estimates, standard errors, thresholds and a verdict.

mod contact;
mod contraction;
mod feller;
mod holder;
mod ibp;
mod invariance;
mod stability;
mod yosida;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrator::{run, Scheme, SimConfig, Trajectory};
use crate::pathspace::{Grid, InvariantSampler, Strategy, Target};
use crate::potential::PotentialSpec;
use crate::rng::stream;

pub use contact::{verify_contact_uniqueness, ContactParams};
pub use contraction::{verify_contraction, ContractionParams};
pub use feller::{verify_strong_feller, FellerParams};
pub use holder::{holder_moments, verify_holder, HolderParams};
pub use ibp::{bump, default_f_suite, default_h_suite, gaussian_oracle, verify_ibp, IbpParams};
pub use invariance::{verify_invariance, InvarianceParams};
pub use stability::{verify_stability, StabilityParams};
pub use yosida::{verify_yosida, YosidaParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    fn holds(self, v: f64, t: f64) -> bool {
        match self {
            Relation::Lt => v < t,
            Relation::Le => v <= t,
            Relation::Gt => v > t,
            Relation::Ge => v >= t,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub test_name: String,
    pub config: serde_json::Value,
    pub estimates: Vec<Estimate>,
    pub criteria: Vec<Criterion>,
    /// Labels `master/replica/purpose` of the RNG streams used.
    pub seeds: Vec<String>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

impl PartialEq for VerificationReport {
    /// Equality ignores the wall time.
    fn eq(&self, o: &Self) -> bool {
        self.test_name == o.test_name
            && self.config == o.config
            && self.estimates == o.estimates
            && self.criteria == o.criteria
            && self.seeds == o.seeds
            && self.verdict == o.verdict
            && self.notes == o.notes
    }
}

impl VerificationReport {
    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One line per criterion.
    pub fn summary(&self) -> String {
        let mut s = format!("{} : {:?} ({:.2} s)\n", self.test_name, self.verdict, self.wall_time_s);
        for c in &self.criteria {
            s += &format!(
                "  [{}] {} = {:.6e} {} {:.6e}\n",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.relation.symbol(),
                c.threshold
            );
        }
        for n in &self.notes {
            s += &format!("  note: {n}\n");
        }
        s
    }
}

/// Incremental report builder.
pub(crate) struct ReportBuilder {
    name: String,
    config: serde_json::Value,
    estimates: Vec<Estimate>,
    criteria: Vec<Criterion>,
    seeds: Vec<String>,
    notes: Vec<String>,
    inconclusive: bool,
    start: Instant,
}

impl ReportBuilder {
    pub(crate) fn new(name: &str, config: serde_json::Value) -> Self {
        ReportBuilder {
            name: name.into(),
            config,
            estimates: Vec::new(),
            criteria: Vec::new(),
            seeds: Vec::new(),
            notes: Vec::new(),
            inconclusive: false,
            start: Instant::now(),
        }
    }

    pub(crate) fn estimate(&mut self, name: impl Into<String>, value: f64, stderr: Option<f64>) {
        self.estimates.push(Estimate {
            name: name.into(),
            value,
            stderr,
        });
    }

    pub(crate) fn criterion(&mut self, name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> bool {
        let passed = relation.holds(value, threshold);
        self.criteria.push(Criterion {
            name: name.into(),
            value,
            relation,
            threshold,
            passed,
        });
        passed
    }

    pub(crate) fn seed(&mut self, label: impl Into<String>) {
        let l = label.into();
        if !self.seeds.contains(&l) {
            self.seeds.push(l);
        }
    }

    pub(crate) fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub(crate) fn inconclusive(&mut self, why: impl Into<String>) {
        self.inconclusive = true;
        self.notes.push(why.into());
    }

    pub(crate) fn finish(self) -> VerificationReport {
        let verdict = if self.inconclusive {
            Verdict::Inconclusive
        } else if self.criteria.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        VerificationReport {
            test_name: self.name,
            config: self.config,
            estimates: self.estimates,
            criteria: self.criteria,
            seeds: self.seeds,
            verdict,
            notes: self.notes,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Stream label as recorded in reports.
pub(crate) fn label(master: u64, purpose: &str) -> String {
    format!("{master}/*/{purpose}")
}

/// A trajectory of the penalized dynamics started from an exact `ν_n` draw,
/// so every recorded frame is (approximately) stationary.
#[allow(clippy::too_many_arguments)]
pub fn stationary_trajectory(
    grid: &Grid,
    pot: &PotentialSpec,
    n: f64,
    dt: f64,
    t_end: f64,
    record_every: usize,
    scheme: Scheme,
    seed: u64,
) -> Result<Trajectory> {
    let sampler = InvariantSampler::new(grid, pot, Target::NuN { n }, Strategy::Rejection)?;
    let (start, _) = sampler.draw(&mut stream(seed, 0, "stationary-initial"))?;
    let cfg = SimConfig::new(grid.clone(), pot.clone(), n, dt, t_end, start.path, seed)?
        .with_record_every(record_every)
        .with_scheme(scheme);
    run(&cfg)
}
