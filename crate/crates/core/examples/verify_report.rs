//! Runs the contraction and integration-by-parts checks and writes their
//! reports as JSON lines.

use rstring::integrator::SimConfig;
use rstring::io::write_reports;
use rstring::verify::{default_f_suite, default_h_suite, verify_contraction, verify_ibp, ContractionParams, IbpParams};
use rstring::{DomainSpec, Grid, PotentialSpec, Scheme};

fn main() -> rstring::Result<()> {
    let dom = DomainSpec::interval(-2.0, 2.0)?;
    let grid = Grid::centered(63, &dom)?;
    let pot = PotentialSpec::zero(dom);
    let sim = SimConfig::new(grid.clone(), pot.clone(), 100.0, 1e-3, 1.0, grid.line(), 7)?
        .with_record_every(10)
        .with_scheme(Scheme::Exponential);
    let contraction = verify_contraction(&sim, &ContractionParams::default())?;

    let narrow = DomainSpec::interval(-0.6, 0.6)?;
    let ngrid = Grid::centered(63, &narrow)?;
    let ibp = verify_ibp(
        &ngrid,
        &PotentialSpec::zero(narrow),
        &IbpParams {
            n: 100.0,
            f_suite: default_f_suite(&ngrid),
            h_suite: default_h_suite(&ngrid),
            samples: 20_000,
            ess_floor: 500.0,
            seed: 7,
        },
    )?;

    let reports = [contraction, ibp];
    for r in &reports {
        print!("{}", r.summary());
    }
    let dir = std::env::temp_dir().join("rstring-example-reports");
    std::fs::create_dir_all(&dir).map_err(|e| rstring::Error::Config(e.to_string()))?;
    write_reports(&reports, &dir)?;
    println!("reports in {}", dir.display());
    Ok(())
}
