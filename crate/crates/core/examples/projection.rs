//! Projections, distances and normals on the built-in domain shapes.

use rstring::DomainSpec;

fn main() -> rstring::Result<()> {
    let shapes = [
        DomainSpec::interval(-1.0, 1.0)?,
        DomainSpec::ball(vec![0.0, 0.0], 1.0)?,
        DomainSpec::cube(vec![-1.0, -1.0], vec![1.0, 1.0])?,
        DomainSpec::ellipsoid(vec![0.0, 0.0], vec![2.0, 0.5])?,
        DomainSpec::polytope(vec![(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0), (vec![-1.0, -1.0], 1.0)])?,
    ];
    for dom in &shapes {
        let y: Vec<f64> = [1.7, 1.2][..dom.dim()].to_vec();
        let p = dom.project(&y)?;
        let nu = dom.inner_normal(&p, 1e-9)?;
        println!("{}", dom.describe());
        println!("  y = {y:?}  P(y) = {p:.4?}  d(y, O) = {:.4}", dom.distance(&y)?);
        println!("  inner normal at P(y) = {nu:.4?}  witness = {:.3?}", dom.witness());
    }
    Ok(())
}
