//! Brownian bridge draws and exact or weighted samples from `ν` and `ν_n`.

use rstring::pathspace::{sample_bridge, InvariantSampler, Strategy, Target};
use rstring::rng::{stream, StreamKey};
use rstring::{DomainSpec, Grid, PotentialSpec};

fn main() -> rstring::Result<()> {
    let dom = DomainSpec::interval(-0.8, 0.8)?;
    let grid = Grid::centered(63, &dom)?;
    let pot = PotentialSpec::zero(dom.clone());

    let bridge = sample_bridge(&grid, &mut stream(1, 0, "example-bridge"));
    println!("bridge max |x| = {:.3}", bridge.max_abs());

    let key = StreamKey::new(1, 0, "example-sample");
    for (target, strategy) in [
        (Target::Nu, Strategy::Rejection),
        (Target::NuN { n: 100.0 }, Strategy::Rejection),
        (Target::NuN { n: 100.0 }, Strategy::Importance),
    ] {
        let batch = InvariantSampler::new(&grid, &pot, target, strategy)?.batch(2000, &key)?;
        let peak = batch.mean(|p| p.max_abs());
        println!(
            "{target:?} by {strategy:?}: {} draws from {} attempts, ESS {:.0}, E[max |x|] = {peak:.4}",
            batch.samples.len(),
            batch.attempts,
            batch.ess()
        );
    }
    Ok(())
}
