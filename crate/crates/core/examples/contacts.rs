//! Contact sets of a stationary string with the boundary for shrinking
//! collars: how often two separated contact clusters appear.

use rstring::observables::{contact_set, default_gap_nodes};
use rstring::verify::stationary_trajectory;
use rstring::{DomainSpec, Grid, PotentialSpec, Scheme};

fn main() -> rstring::Result<()> {
    let dom = DomainSpec::interval(-1.0, 1.0)?;
    let grid = Grid::centered(63, &dom)?;
    let pot = PotentialSpec::zero(dom.clone());
    let traj = stationary_trajectory(&grid, &pot, 1000.0, 2.5e-4, 5.0, 40, Scheme::SemiImplicit, 3)?;
    let gap = default_gap_nodes(grid.m());
    for eps in [0.16, 0.08, 0.04] {
        let recs = contact_set(&traj, &dom, eps, gap)?;
        let multiple = recs.iter().filter(|r| r.is_multiple(grid.dtheta(), 0.25)).count();
        println!(
            "eps = {eps:.2}: {} of {} frames touch, {multiple} with separated clusters ({:.3})",
            recs.len(),
            traj.len(),
            multiple as f64 / recs.len().max(1) as f64
        );
    }
    Ok(())
}
