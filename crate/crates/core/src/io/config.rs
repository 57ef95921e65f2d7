//! Run configuration files (TOML).
//!
//! Every table rejects unknown keys. [`RunConfig::from_toml_str`] parses and
//! then builds every object the file describes, so a config that loads is a
//! config that runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Shape};
use crate::integrator::{Scheme, SimConfig};
use crate::observables::{CylinderFunctional, Expr};
use crate::pathspace::{sample_bridge, Grid, InvariantSampler, PathState, Strategy, Target};
use crate::potential::{PotentialDescriptor, PotentialSpec};
use crate::rng::stream;
use crate::verify::{
    bump, default_f_suite, ContactParams, ContractionParams, FellerParams, HolderParams, IbpParams, InvarianceParams,
    StabilityParams, YosidaParams,
};

/// The configuration shipped as `configs/default.toml`.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

/// Names accepted by `verify --tests`.
pub const TEST_NAMES: [&str; 8] = [
    "yosida",
    "contraction",
    "ibp",
    "invariance",
    "stability",
    "holder",
    "contact",
    "feller",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub domain: Shape,
    #[serde(default = "zero_potential")]
    pub potential: PotentialDescriptor,
    pub grid: GridSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

fn zero_potential() -> PotentialDescriptor {
    PotentialDescriptor::Zero {}
}

/// Grid size and anchors; anchors default to the domain's interior witness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// The straight line from `a` to `b`.
    Line,
    /// A Brownian-bridge draw.
    Bridge,
    /// An exact `ν_n` draw.
    NuN,
}

/// A named initial condition or explicit node-major values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(InitialKind),
    Values(Vec<f64>),
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn line() -> InitialSpec {
    InitialSpec::Named(InitialKind::Line)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub n: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub noise_scale: f64,
    #[serde(default = "line")]
    pub initial: InitialSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Nu,
    NuN,
}

/// Settings of the `sample` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSection {
    pub target: TargetKind,
    /// Penalization for `nu_n`; defaults to `integrator.n`.
    pub n: Option<f64>,
    pub strategy: Strategy,
    pub count: usize,
    pub file: String,
}

impl Default for SampleSection {
    fn default() -> Self {
        SampleSection {
            target: TargetKind::NuN,
            n: None,
            strategy: Strategy::Rejection,
            count: 1000,
            file: "samples.csv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub trajectory: String,
    pub export: String,
    pub contacts: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: "output".into(),
            trajectory: "trajectory.rstr".into(),
            export: "trajectory.csv".into(),
            contacts: "contacts.csv".into(),
        }
    }
}

/// A probe `l` of a cylinder functional `⟨l, w⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// The sine eigenfunction `e_k` in one component.
    Mode { k: usize, component: usize },
    /// A smooth compactly supported bump.
    Bump { center: f64, radius: f64, component: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalSpec {
    pub name: String,
    pub probes: Vec<ProbeSpec>,
    pub expr: Expr,
}

impl FunctionalSpec {
    pub fn build(&self, grid: &Grid) -> Result<CylinderFunctional> {
        let probes = self
            .probes
            .iter()
            .map(|p| match *p {
                ProbeSpec::Mode { k, component } => {
                    if k == 0 || k > grid.m() || component >= grid.d() {
                        return Err(Error::Config(format!("probe mode {k}/{component} out of range")));
                    }
                    Ok(grid.sine_mode(k, component))
                }
                ProbeSpec::Bump {
                    center,
                    radius,
                    component,
                } => {
                    if component >= grid.d() || !(radius > 0.0) {
                        return Err(Error::Config("bad bump probe".into()));
                    }
                    Ok(bump(grid, center, radius, component))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        CylinderFunctional::new(self.name.clone(), probes, self.expr.clone())
    }
}

fn build_suite(specs: &Option<Vec<FunctionalSpec>>, grid: &Grid) -> Result<Vec<CylinderFunctional>> {
    match specs {
        None => Ok(default_f_suite(grid)),
        Some(v) => v.iter().map(|s| s.build(grid)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YosidaSection {
    pub n_list: Vec<f64>,
    pub point_cloud_size: usize,
    pub pairs: usize,
}

impl Default for YosidaSection {
    fn default() -> Self {
        let p = YosidaParams::default();
        YosidaSection {
            n_list: p.n_list,
            point_cloud_size: p.point_cloud_size,
            pairs: p.pairs,
        }
    }
}

/// Uses the `[integrator]` run as the first member of every coupled pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContractionSection {
    pub pairs: usize,
    pub e1_amplitude: f64,
    pub random_amplitude: f64,
    pub slope_tol: f64,
}

impl Default for ContractionSection {
    fn default() -> Self {
        let p = ContractionParams::default();
        ContractionSection {
            pairs: p.pairs,
            e1_amplitude: p.e1_amplitude,
            random_amplitude: p.random_amplitude,
            slope_tol: p.slope_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IbpSection {
    /// One report per entry; `0` means the pure bridge measure.
    pub n_list: Vec<f64>,
    pub samples: usize,
    pub ess_floor: f64,
    pub functionals: Option<Vec<FunctionalSpec>>,
}

impl Default for IbpSection {
    fn default() -> Self {
        IbpSection {
            n_list: vec![10.0, 100.0],
            samples: 100_000,
            ess_floor: 500.0,
            functionals: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvarianceSection {
    pub n: f64,
    pub t_relax: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub samples: usize,
    pub permutations: usize,
    pub symmetric: bool,
}

impl Default for InvarianceSection {
    fn default() -> Self {
        let p = InvarianceParams::default();
        InvarianceSection {
            n: p.n,
            t_relax: p.t_relax,
            dt: p.dt,
            scheme: p.scheme,
            samples: p.samples,
            permutations: p.permutations,
            symmetric: p.symmetric,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilitySection {
    pub n_list: Vec<f64>,
    pub functionals: Option<Vec<FunctionalSpec>>,
    pub batches: usize,
    pub pool_size: usize,
    pub rejection_samples: usize,
    pub dynamic_n_list: Vec<f64>,
    pub dynamic_t: f64,
    pub dynamic_dt: f64,
    pub dynamic_replicas: usize,
    pub dynamic_batches: usize,
    pub scheme: Scheme,
}

impl Default for StabilitySection {
    fn default() -> Self {
        StabilitySection {
            n_list: vec![10.0, 100.0, 1000.0, 10000.0],
            functionals: None,
            batches: 20,
            pool_size: 5000,
            rejection_samples: 2000,
            dynamic_n_list: vec![100.0, 1000.0, 10000.0, 100000.0],
            dynamic_t: 0.05,
            dynamic_dt: 2.5e-6,
            dynamic_replicas: 600,
            dynamic_batches: 20,
            scheme: Scheme::SemiImplicit,
        }
    }
}

/// A stationary run started from an exact `ν_n` draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderSection {
    pub n: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub scheme: Scheme,
    pub lags: Vec<usize>,
    pub min_pairs: usize,
}

impl Default for HolderSection {
    fn default() -> Self {
        HolderSection {
            n: 1000.0,
            dt: 2e-5,
            t_end: 10.0,
            record_every: 5,
            scheme: Scheme::SemiImplicit,
            lags: vec![1, 2, 3, 5, 8, 13, 20, 32, 50, 80, 100],
            min_pairs: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContactSection {
    pub n: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub scheme: Scheme,
    pub replicas: usize,
    /// Finest collar; the test uses `4ε₀, 2ε₀, ε₀`.
    pub eps0: f64,
    pub gap_nodes: Option<usize>,
    pub min_separation: f64,
    pub max_fraction: f64,
    pub min_slices: usize,
}

impl Default for ContactSection {
    fn default() -> Self {
        ContactSection {
            n: 1000.0,
            dt: 2.5e-4,
            t_end: 10.0,
            record_every: 40,
            scheme: Scheme::SemiImplicit,
            replicas: 32,
            eps0: 0.04,
            gap_nodes: None,
            min_separation: 0.25,
            max_fraction: 0.05,
            min_slices: 200,
        }
    }
}

/// Compares `x` = the `[integrator]` initial with `y = x + amplitude·e₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FellerSection {
    pub n: f64,
    pub t: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub amplitude: f64,
    pub samples: usize,
    /// Defaults to `tanh⟨w, e₁⟩`.
    pub phi_test: Option<FunctionalSpec>,
    pub sup_norm: f64,
}

impl Default for FellerSection {
    fn default() -> Self {
        FellerSection {
            n: 100.0,
            t: 0.1,
            dt: 2.5e-4,
            scheme: Scheme::SemiImplicit,
            amplitude: 0.1,
            samples: 400,
            phi_test: None,
            sup_norm: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Tests run when `verify` is given no `--tests`.
    pub tests: Vec<String>,
    pub yosida: YosidaSection,
    pub contraction: ContractionSection,
    pub ibp: IbpSection,
    pub invariance: InvarianceSection,
    pub stability: StabilitySection,
    pub holder: HolderSection,
    pub contact: ContactSection,
    pub feller: FellerSection,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            tests: vec!["yosida".into(), "contraction".into()],
            yosida: Default::default(),
            contraction: Default::default(),
            ibp: Default::default(),
            invariance: Default::default(),
            stability: Default::default(),
            holder: Default::default(),
            contact: Default::default(),
            feller: Default::default(),
        }
    }
}

fn cfg_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, 0, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn default_config() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG).expect("shipped default config is valid")
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Builds everything the file describes and checks all preconditions.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.sim_config()?;
        for t in &self.verify.tests {
            if !TEST_NAMES.contains(&t.as_str()) {
                return Err(Error::Config(format!("unknown test {t:?} in verify.tests")));
            }
        }
        let v = &self.verify;
        let pos = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite")))
            }
        };
        let dt_ok = |name: &str, dt: f64, n: f64| {
            pos(name, dt)?;
            if n > 0.0 && dt > 1.0 / (4.0 * n) {
                return Err(Error::Config(format!("{name} = {dt} exceeds 1/(4n) = {}", 1.0 / (4.0 * n))));
            }
            Ok(())
        };
        for &n in &v.yosida.n_list {
            pos("verify.yosida.n_list entries", n)?;
        }
        if v.ibp.n_list.iter().any(|&n| !(n.is_finite() && n >= 0.0)) {
            return Err(Error::Config("verify.ibp.n_list entries must be ≥ 0".into()));
        }
        build_suite(&v.ibp.functionals, &grid).map_err(cfg_err)?;
        build_suite(&v.stability.functionals, &grid).map_err(cfg_err)?;
        pos("verify.invariance.n", v.invariance.n)?;
        dt_ok("verify.invariance.dt", v.invariance.dt, v.invariance.n)?;
        if let Some(nmax) = v.stability.dynamic_n_list.iter().cloned().reduce(f64::max) {
            dt_ok("verify.stability.dynamic_dt", v.stability.dynamic_dt, nmax)?;
        }
        pos("verify.holder.n", v.holder.n)?;
        dt_ok("verify.holder.dt", v.holder.dt, v.holder.n)?;
        pos("verify.holder.t_end", v.holder.t_end)?;
        pos("verify.contact.n", v.contact.n)?;
        dt_ok("verify.contact.dt", v.contact.dt, v.contact.n)?;
        pos("verify.contact.t_end", v.contact.t_end)?;
        pos("verify.contact.eps0", v.contact.eps0)?;
        pos("verify.feller.n", v.feller.n)?;
        dt_ok("verify.feller.dt", v.feller.dt, v.feller.n)?;
        pos("verify.feller.t", v.feller.t)?;
        if let Some(f) = &v.feller.phi_test {
            f.build(&grid).map_err(cfg_err)?;
        }
        if v.holder.record_every == 0 || v.contact.record_every == 0 {
            return Err(Error::Config("record_every must be ≥ 1".into()));
        }
        if self.sample.count == 0 {
            return Err(Error::Config("sample.count must be ≥ 1".into()));
        }
        if let Some(n) = self.sample.n {
            pos("sample.n", n)?;
        }
        for name in [&self.output.trajectory, &self.output.export, &self.output.contacts, &self.sample.file] {
            let p = Path::new(name);
            if p.components().count() != 1 || p.is_absolute() {
                return Err(Error::Config(format!("output file name {name:?} must be a plain file name")));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.domain.clone()).map_err(cfg_err)
    }

    pub fn potential(&self) -> Result<PotentialSpec> {
        if let PotentialDescriptor::Custom { name } = &self.potential {
            return Err(Error::Config(format!(
                "custom potential {name:?} cannot be built from a config file"
            )));
        }
        PotentialSpec::from_descriptor(&self.potential, self.domain()?).map_err(cfg_err)
    }

    pub fn grid(&self) -> Result<Grid> {
        let dom = self.domain()?;
        let w = dom.witness().to_vec();
        let a = self.grid.a.clone().unwrap_or_else(|| w.clone());
        let b = self.grid.b.clone().unwrap_or(w);
        Grid::new(self.grid.m, a, b, &dom).map_err(cfg_err)
    }

    /// The `[integrator]` run, with `master_seed` as its seed.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let grid = self.grid()?;
        let pot = self.potential()?;
        let it = &self.integrator;
        let initial = match &it.initial {
            InitialSpec::Named(InitialKind::Line) => grid.line(),
            InitialSpec::Named(InitialKind::Bridge) => {
                sample_bridge(&grid, &mut stream(self.master_seed, 0, "config-initial"))
            }
            InitialSpec::Named(InitialKind::NuN) => {
                if !(it.n > 0.0) {
                    return Err(Error::Config("initial = \"nu_n\" needs integrator.n > 0".into()));
                }
                let s = InvariantSampler::new(&grid, &pot, Target::NuN { n: it.n }, Strategy::Rejection)
                    .map_err(cfg_err)?;
                s.draw(&mut stream(self.master_seed, 0, "config-initial")).map_err(cfg_err)?.0.path
            }
            InitialSpec::Values(v) => PathState::from_values(grid.m(), grid.d(), v.clone()).map_err(cfg_err)?,
        };
        let cfg = SimConfig::new(grid, pot, it.n, it.dt, it.t_end, initial, self.master_seed)
            .map_err(cfg_err)?
            .with_record_every(it.record_every)
            .with_scheme(it.scheme)
            .with_noise_scale(it.noise_scale);
        cfg.validate().map_err(cfg_err)?;
        Ok(cfg)
    }

    pub fn output_path(&self, file: &str) -> PathBuf {
        self.output.dir.join(file)
    }

    pub fn yosida_params(&self) -> YosidaParams {
        let s = &self.verify.yosida;
        YosidaParams {
            n_list: s.n_list.clone(),
            point_cloud_size: s.point_cloud_size,
            pairs: s.pairs,
            seed: self.master_seed,
        }
    }

    pub fn contraction_params(&self) -> ContractionParams {
        let s = &self.verify.contraction;
        ContractionParams {
            pairs: s.pairs,
            e1_amplitude: s.e1_amplitude,
            random_amplitude: s.random_amplitude,
            slope_tol: s.slope_tol,
        }
    }

    pub fn ibp_params(&self) -> Result<Vec<IbpParams>> {
        let grid = self.grid()?;
        let s = &self.verify.ibp;
        let f_suite = build_suite(&s.functionals, &grid)?;
        let h_suite = crate::verify::default_h_suite(&grid);
        Ok(s.n_list
            .iter()
            .map(|&n| IbpParams {
                n,
                f_suite: f_suite.clone(),
                h_suite: h_suite.clone(),
                samples: s.samples,
                ess_floor: s.ess_floor,
                seed: self.master_seed,
            })
            .collect())
    }

    pub fn invariance_params(&self) -> InvarianceParams {
        let s = &self.verify.invariance;
        InvarianceParams {
            n: s.n,
            t_relax: s.t_relax,
            dt: s.dt,
            scheme: s.scheme,
            samples: s.samples,
            permutations: s.permutations,
            symmetric: s.symmetric,
            seed: self.master_seed,
        }
    }

    pub fn stability_params(&self) -> Result<StabilityParams> {
        let grid = self.grid()?;
        let s = &self.verify.stability;
        Ok(StabilityParams {
            n_list: s.n_list.clone(),
            functionals: build_suite(&s.functionals, &grid)?,
            batches: s.batches,
            pool_size: s.pool_size,
            rejection_samples: s.rejection_samples,
            dynamic_n_list: s.dynamic_n_list.clone(),
            dynamic_t: s.dynamic_t,
            dynamic_dt: s.dynamic_dt,
            dynamic_replicas: s.dynamic_replicas,
            dynamic_batches: s.dynamic_batches,
            scheme: s.scheme,
            seed: self.master_seed,
        })
    }

    pub fn holder_params(&self) -> HolderParams {
        HolderParams {
            lags: self.verify.holder.lags.clone(),
            min_pairs: self.verify.holder.min_pairs,
        }
    }

    pub fn contact_params(&self) -> ContactParams {
        let s = &self.verify.contact;
        ContactParams {
            eps_list: vec![4.0 * s.eps0, 2.0 * s.eps0, s.eps0],
            gap_nodes: s
                .gap_nodes
                .unwrap_or_else(|| crate::observables::default_gap_nodes(self.grid.m)),
            min_separation: s.min_separation,
            max_fraction: s.max_fraction,
            min_slices: s.min_slices,
        }
    }

    pub fn feller_params(&self) -> Result<FellerParams> {
        let grid = self.grid()?;
        let s = &self.verify.feller;
        let x = self.sim_config()?.initial;
        let mut y = x.clone();
        y.add_scaled(s.amplitude, &grid.sine_mode(1, 0));
        let phi_test = match &s.phi_test {
            Some(f) => f.build(&grid)?,
            None => CylinderFunctional::new("tanh_e1", vec![grid.sine_mode(1, 0)], Expr::var(0).tanh())?,
        };
        Ok(FellerParams {
            n: s.n,
            t: s.t,
            dt: s.dt,
            scheme: s.scheme,
            x,
            y,
            phi_test,
            sup_norm: s.sup_norm,
            samples: s.samples,
            seed: self.master_seed,
        })
    }
}
