//! Integrates the penalized equation in a disc and reads off the empirical
//! reflection measure and the weak-form balance.

use rstring::integrator::{default_collar, reflection_estimate, run, weak_form_residual, SimConfig};
use rstring::verify::bump;
use rstring::{DomainSpec, Grid, PotentialSpec};

fn main() -> rstring::Result<()> {
    let dom = DomainSpec::ball(vec![0.0, 0.0], 0.4)?;
    let grid = Grid::centered(31, &dom)?;
    for n in [10.0, 100.0, 1000.0] {
        let cfg = SimConfig::new(grid.clone(), PotentialSpec::zero(dom.clone()), n, 2e-4, 1.0, grid.line(), 5)?;
        let traj = run(&cfg)?;
        let eps = default_collar(&grid);
        let est = reflection_estimate(&traj, &dom, eps)?;
        let outside = traj
            .states
            .iter()
            .flat_map(|s| s.nodes().map(|y| dom.distance(y)).collect::<Vec<_>>())
            .collect::<rstring::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let w = weak_form_residual(&traj, &bump(&grid, 0.5, 0.3, 0))?;
        println!(
            "n = {n:>6}: reflection mass {:.4} (collar {:.4}, leakage {:.2e}), max exterior distance {outside:.4}, weak-form residual {:.1e} (3σ = {:.1e})",
            est.total_mass(),
            est.collar_mass(),
            est.total_leakage(),
            w.residual,
            3.0 * w.sigma
        );
    }
    Ok(())
}
