//! The `rstring` command line.
//!
//! Exit codes: `0` everything passed, `1` a verification did not pass,
//! `2` usage or configuration error, `3` runtime error. Diagnostics go to
//! stderr; data goes only to files under `output.dir`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::integrator::{default_collar, run};
use crate::io::{
    export_contacts_csv, export_samples_csv, export_trajectory_csv, read_trajectory, write_reports, write_trajectory,
    RunConfig, TargetKind, TEST_NAMES,
};
use crate::observables::{contact_set, default_gap_nodes};
use crate::pathspace::{InvariantSampler, Target};
use crate::rng::StreamKey;
use crate::verify::{
    stationary_trajectory, verify_contact_uniqueness, verify_contraction, verify_holder, verify_ibp,
    verify_invariance, verify_stability, verify_strong_feller, verify_yosida, VerificationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "rstring", version, about = "Penalized random strings in convex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// Run configuration (TOML); the built-in default when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the penalized equation and write a trajectory file.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Draw from ν or ν_n and write the samples as CSV.
    Sample {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Run verification tests and write reports.jsonl and summary.txt.
    Verify {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma separated test names (default: verify.tests).
        #[arg(long, value_delimiter = ',')]
        tests: Vec<String>,
    },
    /// Extract contact sets from a trajectory file as CSV.
    ContactStats {
        #[command(flatten)]
        config: ConfigArg,
        /// Trajectory file (default: the configured output trajectory).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Collar width (default 1.5/√M).
        #[arg(long)]
        eps: Option<f64>,
        /// Cluster merge gap in nodes (default ⌈0.05M⌉).
        #[arg(long)]
        gap: Option<usize>,
    },
    /// Convert trajectory frames to CSV.
    Export {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Entry point; `args[0]` is the program name.
pub fn main(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            eprint!("{}", e.render());
            return code;
        }
    };
    let (config, command) = match &cli.command {
        Command::Simulate { config } => (config, "simulate"),
        Command::Sample { config } => (config, "sample"),
        Command::Verify { config, .. } => (config, "verify"),
        Command::ContactStats { config, .. } => (config, "contact-stats"),
        Command::Export { config, .. } => (config, "export"),
    };
    let cfg = match load(config.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("rstring {command}: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Simulate { .. } => simulate(&cfg),
        Command::Sample { .. } => sample(&cfg),
        Command::Verify { tests, .. } => {
            let names = if tests.is_empty() { cfg.verify.tests.clone() } else { tests.clone() };
            if let Some(bad) = names.iter().find(|t| !TEST_NAMES.contains(&t.as_str())) {
                eprintln!("rstring verify: unknown test {bad:?} (known: {})", TEST_NAMES.join(", "));
                return EXIT_USAGE;
            }
            verify(&cfg, &names)
        }
        Command::ContactStats { input, eps, gap, .. } => contact_stats(&cfg, input.as_deref(), *eps, *gap),
        Command::Export { input, .. } => export(&cfg, input.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rstring {command}: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Io { .. } => Error::Config(e.to_string()),
            other => other,
        }),
        None => Ok(RunConfig::default_config()),
    }
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output.dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, 0, e))?;
    Ok(dir)
}

fn simulate(cfg: &RunConfig) -> Result<i32> {
    let sim = cfg.sim_config()?;
    let traj = run(&sim)?;
    output_dir(cfg)?;
    let path = cfg.output_path(&cfg.output.trajectory);
    write_trajectory(&traj, &path)?;
    eprintln!("wrote {} frames to {}", traj.len(), path.display());
    Ok(EXIT_OK)
}

fn sample(cfg: &RunConfig) -> Result<i32> {
    let grid = cfg.grid()?;
    let pot = cfg.potential()?;
    let s = &cfg.sample;
    let target = match s.target {
        TargetKind::Nu => Target::Nu,
        TargetKind::NuN => Target::NuN {
            n: s.n.unwrap_or(cfg.integrator.n),
        },
    };
    let sampler = InvariantSampler::new(&grid, &pot, target, s.strategy)?;
    let batch = sampler.batch(s.count, &StreamKey::new(cfg.master_seed, 0, "sample"))?;
    output_dir(cfg)?;
    let path = cfg.output_path(&s.file);
    export_samples_csv(&batch.samples, &path)?;
    eprintln!(
        "wrote {} samples ({} attempts, ESS {:.1}) to {}",
        batch.samples.len(),
        batch.attempts,
        batch.ess(),
        path.display()
    );
    Ok(EXIT_OK)
}

/// Runs one named test; `ibp` yields one report per configured `n`.
pub fn run_test(cfg: &RunConfig, name: &str) -> Result<Vec<VerificationReport>> {
    let grid = cfg.grid()?;
    let pot = cfg.potential()?;
    let v = &cfg.verify;
    Ok(match name {
        "yosida" => vec![verify_yosida(&pot, &cfg.yosida_params())?],
        "contraction" => vec![verify_contraction(&cfg.sim_config()?, &cfg.contraction_params())?],
        "ibp" => cfg
            .ibp_params()?
            .iter()
            .map(|p| verify_ibp(&grid, &pot, p))
            .collect::<Result<_>>()?,
        "invariance" => vec![verify_invariance(&grid, &pot, &cfg.invariance_params())?],
        "stability" => vec![verify_stability(&grid, &pot, &cfg.stability_params()?)?],
        "holder" => {
            let h = &v.holder;
            let traj = stationary_trajectory(&grid, &pot, h.n, h.dt, h.t_end, h.record_every, h.scheme, cfg.master_seed)?;
            vec![verify_holder(&traj, &cfg.holder_params())?]
        }
        "contact" => {
            let c = &v.contact;
            let trajs = (0..c.replicas as u64)
                .into_par_iter()
                .map(|r| {
                    stationary_trajectory(
                        &grid,
                        &pot,
                        c.n,
                        c.dt,
                        c.t_end,
                        c.record_every,
                        c.scheme,
                        cfg.master_seed.wrapping_add(r),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            vec![verify_contact_uniqueness(&trajs, pot.domain(), &cfg.contact_params())?]
        }
        "feller" => vec![verify_strong_feller(&grid, &pot, &cfg.feller_params()?)?],
        other => return Err(Error::Config(format!("unknown test {other:?}"))),
    })
}

fn verify(cfg: &RunConfig, names: &[String]) -> Result<i32> {
    let dir = output_dir(cfg)?.to_path_buf();
    let mut reports = Vec::new();
    for name in names {
        for r in run_test(cfg, name)? {
            eprint!("{}", r.summary());
            reports.push(r);
        }
    }
    write_reports(&reports, &dir)?;
    if reports.iter().all(|r| r.passed()) {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FAILED)
    }
}

fn input_trajectory(cfg: &RunConfig, input: Option<&Path>) -> PathBuf {
    input
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_path(&cfg.output.trajectory))
}

fn contact_stats(cfg: &RunConfig, input: Option<&Path>, eps: Option<f64>, gap: Option<usize>) -> Result<i32> {
    let traj = read_trajectory(input_trajectory(cfg, input))?;
    let dom = DomainSpec::new(traj.meta.domain.clone())?;
    let grid = traj.meta.grid()?;
    let eps = eps.unwrap_or_else(|| default_collar(&grid));
    if !(eps > 0.0) {
        return Err(Error::Config("--eps must be positive".into()));
    }
    let records = contact_set(&traj, &dom, eps, gap.unwrap_or_else(|| default_gap_nodes(grid.m())))?;
    output_dir(cfg)?;
    let path = cfg.output_path(&cfg.output.contacts);
    export_contacts_csv(&records, grid.dtheta(), &path)?;
    eprintln!("{} of {} frames touch the collar; wrote {}", records.len(), traj.len(), path.display());
    Ok(EXIT_OK)
}

fn export(cfg: &RunConfig, input: Option<&Path>) -> Result<i32> {
    let traj = read_trajectory(input_trajectory(cfg, input))?;
    output_dir(cfg)?;
    let path = cfg.output_path(&cfg.output.export);
    let rows = export_trajectory_csv(&traj, &path)?;
    eprintln!("wrote {rows} rows to {}", path.display());
    Ok(EXIT_OK)
}
