//! The Yosida approximation `Φ_n` and its gradient for the built-in
//! potentials, with the `2n` Lipschitz check.

use rstring::verify::{verify_yosida, YosidaParams};
use rstring::{DomainSpec, PotentialSpec};

fn main() -> rstring::Result<()> {
    let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0)?;
    let pots = [
        PotentialSpec::zero(dom.clone()),
        PotentialSpec::quadratic(dom.clone(), vec![0.3, 0.0], 2.0)?,
        PotentialSpec::log_barrier(dom)?,
    ];
    let x = [1.2, 0.4];
    for pot in &pots {
        println!("{:?}", pot.descriptor());
        for n in [1.0, 10.0, 100.0, 1000.0] {
            let y = pot.yosida(n)?;
            let (v, g) = y.eval(&x)?;
            println!("  n = {n:>6}  Φ_n(x) = {v:>10.5}  ∂Φ_n(x) = {g:.4?}  prox = {:.4?}", y.prox(&x)?);
        }
        let rep = verify_yosida(pot, &YosidaParams::default())?;
        print!("{}", rep.summary());
    }
    Ok(())
}
