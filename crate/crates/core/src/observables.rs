//! Path functionals: boundary contacts, first hits and cylinder
//! functionals `F(w) = f(⟨l₁, w⟩, …, ⟨l_k, w⟩)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::DomainSpec;
use crate::integrator::Trajectory;
use crate::pathspace::{Grid, PathState, SineBasis};

/// Smallest node index whose signed distance to `∂O` is `≤ eps` (exterior
/// nodes always qualify).
pub fn first_hit(path: &PathState, dom: &DomainSpec, eps: f64) -> Result<Option<usize>> {
    for (i, y) in path.nodes().enumerate() {
        if dom.signed_distance(y)? <= eps {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Default cluster gap `⌈0.05 M⌉`.
pub fn default_gap_nodes(m: usize) -> usize {
    (0.05 * m as f64).ceil() as usize
}

/// Contact nodes of one recorded state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactRecord {
    pub time: f64,
    /// `(node index, distance to ∂O)`; exterior nodes report their distance to `Ō`.
    pub contact_nodes: Vec<(usize, f64)>,
    /// Node indices, grouped when consecutive contacts are at most `gap_nodes` apart.
    pub clusters: Vec<Vec<usize>>,
}

impl ContactRecord {
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// `θ` of each cluster's closest node to the boundary.
    pub fn positions(&self, dtheta: f64) -> Vec<f64> {
        self.clusters
            .iter()
            .map(|c| {
                let best = c
                    .iter()
                    .min_by(|a, b| self.distance_of(**a).total_cmp(&self.distance_of(**b)))
                    .unwrap();
                (*best as f64 + 1.0) * dtheta
            })
            .collect()
    }

    fn distance_of(&self, node: usize) -> f64 {
        self.contact_nodes.iter().find(|(i, _)| *i == node).map(|(_, d)| *d).unwrap_or(f64::INFINITY)
    }

    /// Whether two clusters are more than `min_sep` apart in `θ`.
    pub fn is_multiple(&self, dtheta: f64, min_sep: f64) -> bool {
        if self.clusters.len() < 2 {
            return false;
        }
        let first_end = *self.clusters[0].last().unwrap();
        let last_start = self.clusters[self.clusters.len() - 1][0];
        (last_start - first_end) as f64 * dtheta > min_sep
    }
}

/// Contact record of a single state, or `None` without contacts.
pub fn contact_slice(path: &PathState, dom: &DomainSpec, eps: f64, gap_nodes: usize, time: f64) -> Result<Option<ContactRecord>> {
    let mut nodes = Vec::new();
    for (i, y) in path.nodes().enumerate() {
        let s = dom.signed_distance(y)?;
        if s <= eps {
            nodes.push((i, s.abs()));
        }
    }
    if nodes.is_empty() {
        return Ok(None);
    }
    let mut clusters: Vec<Vec<usize>> = vec![vec![nodes[0].0]];
    for w in nodes.windows(2) {
        if w[1].0 - w[0].0 <= gap_nodes {
            clusters.last_mut().unwrap().push(w[1].0);
        } else {
            clusters.push(vec![w[1].0]);
        }
    }
    Ok(Some(ContactRecord {
        time,
        contact_nodes: nodes,
        clusters,
    }))
}

/// One record per recorded time with at least one contact node.
pub fn contact_set(traj: &Trajectory, dom: &DomainSpec, eps: f64, gap_nodes: usize) -> Result<Vec<ContactRecord>> {
    let mut out = Vec::new();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if let Some(r) = contact_slice(s, dom, eps, gap_nodes, *t)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// `⟨u_c, e_k⟩` for the sine mode `e_k`, as a function of the grid.
pub fn mode_coefficient(basis: &SineBasis, path: &PathState, k: usize, c: usize) -> f64 {
    basis.coefficient(path, k, c)
}

/// `max_j d(u_j, ∂O)` over the nodes (negative parts count as exterior distance).
pub fn max_node_boundary_distance(path: &PathState, dom: &DomainSpec) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for y in path.nodes() {
        m = m.max(dom.signed_distance(y)?);
    }
    Ok(m)
}

/// `min_j` of the signed boundary distance: the closest approach to `∂O`
/// (negative when some node is outside `Ō`).
pub fn closest_approach(path: &PathState, dom: &DomainSpec) -> Result<f64> {
    let mut m = f64::INFINITY;
    for y in path.nodes() {
        m = m.min(dom.signed_distance(y)?);
    }
    Ok(m)
}

/// Largest distance to `Ō` over the nodes.
pub fn max_exterior_distance(path: &PathState, dom: &DomainSpec) -> Result<f64> {
    let mut m: f64 = 0.0;
    for y in path.nodes() {
        m = m.max(dom.distance(y)?);
    }
    Ok(m)
}

/// Smooth scalar expressions in the probe coordinates `s_0, …, s_{k−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Scale(f64, Box<Expr>),
    Powi(Box<Expr>, u32),
    Exp(Box<Expr>),
    Tanh(Box<Expr>),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }

    pub fn scale(self, s: f64) -> Expr {
        Expr::Scale(s, Box::new(self))
    }

    pub fn powi(self, p: u32) -> Expr {
        Expr::Powi(Box::new(self), p)
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn tanh(self) -> Expr {
        Expr::Tanh(Box::new(self))
    }

    /// Largest variable index plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Mul(a, b) => a.arity().max(b.arity()),
            Expr::Scale(_, a) | Expr::Powi(a, _) | Expr::Exp(a) | Expr::Tanh(a) => a.arity(),
        }
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => s[*i],
            Expr::Add(a, b) => a.eval(s) + b.eval(s),
            Expr::Mul(a, b) => a.eval(s) * b.eval(s),
            Expr::Scale(c, a) => c * a.eval(s),
            Expr::Powi(a, p) => a.eval(s).powi(*p as i32),
            Expr::Exp(a) => a.eval(s).exp(),
            Expr::Tanh(a) => a.eval(s).tanh(),
        }
    }

    /// Value and exact gradient (forward mode).
    pub fn eval_grad(&self, s: &[f64]) -> (f64, Vec<f64>) {
        let k = s.len();
        match self {
            Expr::Const(c) => (*c, vec![0.0; k]),
            Expr::Var(i) => {
                let mut g = vec![0.0; k];
                g[*i] = 1.0;
                (s[*i], g)
            }
            Expr::Add(a, b) => {
                let (va, ga) = a.eval_grad(s);
                let (vb, gb) = b.eval_grad(s);
                (va + vb, ga.iter().zip(&gb).map(|(x, y)| x + y).collect())
            }
            Expr::Mul(a, b) => {
                let (va, ga) = a.eval_grad(s);
                let (vb, gb) = b.eval_grad(s);
                (va * vb, ga.iter().zip(&gb).map(|(x, y)| x * vb + va * y).collect())
            }
            Expr::Scale(c, a) => {
                let (v, g) = a.eval_grad(s);
                (c * v, g.iter().map(|x| c * x).collect())
            }
            Expr::Powi(a, p) => {
                let (v, g) = a.eval_grad(s);
                let dv = if *p == 0 { 0.0 } else { *p as f64 * v.powi(*p as i32 - 1) };
                (v.powi(*p as i32), g.iter().map(|x| dv * x).collect())
            }
            Expr::Exp(a) => {
                let (v, g) = a.eval_grad(s);
                let e = v.exp();
                (e, g.iter().map(|x| e * x).collect())
            }
            Expr::Tanh(a) => {
                let (v, g) = a.eval_grad(s);
                let t = v.tanh();
                (t, g.iter().map(|x| (1.0 - t * t) * x).collect())
            }
        }
    }
}

/// `F(w) = f(⟨l₁, w⟩, …, ⟨l_k, w⟩)` with grid-function probes.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunctional {
    pub name: String,
    probes: Vec<PathState>,
    f: Expr,
}

impl CylinderFunctional {
    pub fn new(name: impl Into<String>, probes: Vec<PathState>, f: Expr) -> Result<Self> {
        if let Some(p0) = probes.first() {
            for p in &probes {
                check_dim(p0.m(), p.m())?;
                check_dim(p0.d(), p.d())?;
            }
        }
        if f.arity() > probes.len() {
            return Err(Error::InvalidParameter(format!(
                "expression uses {} probe coordinates but only {} probes given",
                f.arity(),
                probes.len()
            )));
        }
        Ok(CylinderFunctional {
            name: name.into(),
            probes,
            f,
        })
    }

    pub fn probes(&self) -> &[PathState] {
        &self.probes
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    fn coords(&self, grid: &Grid, w: &PathState) -> Result<Vec<f64>> {
        self.probes
            .iter()
            .map(|l| {
                grid.check_path(l)?;
                Ok(grid.inner(l, w))
            })
            .collect()
    }

    pub fn value(&self, grid: &Grid, w: &PathState) -> Result<f64> {
        grid.check_path(w)?;
        Ok(self.f.eval(&self.coords(grid, w)?))
    }

    /// `F(w)` and the representer `∇F(w) = Σᵢ ∂ᵢf · lᵢ`, so that
    /// `∂_h F(w) = ⟨∇F(w), h⟩`.
    pub fn value_and_gradient(&self, grid: &Grid, w: &PathState) -> Result<(f64, PathState)> {
        grid.check_path(w)?;
        let s = self.coords(grid, w)?;
        let (v, g) = self.f.eval_grad(&s);
        let mut rep = grid.zeros();
        for (gi, l) in g.iter().zip(&self.probes) {
            rep.add_scaled(*gi, l);
        }
        Ok((v, rep))
    }

    /// Largest `|F|` and `|∇F|` over `samples`.
    pub fn sup_on(&self, grid: &Grid, samples: &[PathState]) -> Result<(f64, f64)> {
        let mut sv: f64 = 0.0;
        let mut sg: f64 = 0.0;
        for w in samples {
            let (v, g) = self.value_and_gradient(grid, w)?;
            sv = sv.max(v.abs());
            sg = sg.max(grid.inner(&g, &g).sqrt());
        }
        Ok((sv, sg))
    }
}

/// `(F(w), h ↦ ∂_h F(w))`.
pub fn cylinder_eval<'a>(
    f: &CylinderFunctional,
    grid: &'a Grid,
    w: &PathState,
) -> Result<(f64, impl Fn(&PathState) -> f64 + 'a)> {
    let (v, rep) = f.value_and_gradient(grid, w)?;
    Ok((v, move |h: &PathState| grid.inner(&rep, h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (DomainSpec, Grid) {
        let dom = DomainSpec::interval(0.0, 1.0).unwrap();
        let g = Grid::new(31, vec![0.5], vec![0.5], &dom).unwrap();
        (dom, g)
    }

    #[test]
    fn first_hit_examples() {
        let (dom, g) = setup();
        let mut p = g.line();
        assert_eq!(first_hit(&p, &dom, 0.01).unwrap(), None);
        p.node_mut(7)[0] = 0.995;
        assert_eq!(first_hit(&p, &dom, 0.01).unwrap(), Some(7));
        p.node_mut(4)[0] = 0.002;
        p.node_mut(9)[0] = 0.998;
        assert_eq!(first_hit(&p, &dom, 0.01).unwrap(), Some(4));
    }

    #[test]
    fn dips_give_clusters() {
        let (dom, g) = setup();
        let one = g.sample_fn(|t| vec![0.5 - 0.52 * (-(t - 0.3f64).powi(2) / 0.004).exp()]);
        let r = contact_slice(&one, &dom, 0.02, default_gap_nodes(31), 0.0).unwrap().unwrap();
        assert_eq!(r.cluster_count(), 1);
        let two = g.sample_fn(|t| {
            vec![0.5 - 0.52 * (-(t - 0.25f64).powi(2) / 0.004).exp() + 0.52 * (-(t - 0.75f64).powi(2) / 0.004).exp()]
        });
        let r = contact_slice(&two, &dom, 0.02, default_gap_nodes(31), 0.0).unwrap().unwrap();
        assert_eq!(r.cluster_count(), 2);
        assert!(r.is_multiple(g.dtheta(), 0.2));
        assert_eq!(first_hit(&two, &dom, 0.02).unwrap(), Some(r.clusters[0][0]));
        assert!(contact_slice(&g.line(), &dom, 0.02, 2, 0.0).unwrap().is_none());
    }

    #[test]
    fn cylinder_examples() {
        let (_, g) = setup();
        let e1 = g.sine_mode(1, 0);
        let lin = CylinderFunctional::new("lin", vec![e1.clone()], Expr::var(0)).unwrap();
        let sq = CylinderFunctional::new("sq", vec![e1.clone()], Expr::var(0).powi(2)).unwrap();
        let w = e1.scaled(0.3);
        let h = g.sine_mode(1, 0).scaled(0.7);
        let (v, dh) = cylinder_eval(&lin, &g, &w).unwrap();
        assert!((v - 0.3).abs() < 1e-12 && (dh(&h) - 0.7).abs() < 1e-12);
        let (v, dh) = cylinder_eval(&sq, &g, &w).unwrap();
        assert!((v - 0.09).abs() < 1e-12 && (dh(&h) - 0.6 * 0.7).abs() < 1e-12);
        assert!(CylinderFunctional::new("bad", vec![e1], Expr::var(1)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn gradient_matches_central_difference(
            c in proptest::collection::vec(-1.0f64..1.0, 6),
            hc in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let (_, g) = setup();
            let probes = vec![g.sine_mode(1, 0), g.sine_mode(2, 0), g.sine_mode(3, 0)];
            let f = Expr::var(0).mul(Expr::var(1)).add(Expr::var(2).scale(c[2]).tanh().powi(3))
                .add(Expr::var(0).scale(c[3]).add(Expr::Const(c[4])).exp())
                .add(Expr::var(1).powi(2).scale(c[5]));
            let cf = CylinderFunctional::new("mix", probes, f).unwrap();
            let mut w = g.zeros();
            for k in 0..3 { w.add_scaled(c[k], &g.sine_mode(k + 1, 0)); }
            let mut h = g.zeros();
            for k in 0..3 { h.add_scaled(hc[k], &g.sine_mode(k + 4, 0).clone()); h.add_scaled(hc[k], &g.sine_mode(k + 1, 0)); }
            let (_, dh) = cylinder_eval(&cf, &g, &w).unwrap();
            let delta = 1e-6;
            let mut wp = w.clone(); wp.add_scaled(delta, &h);
            let mut wm = w.clone(); wm.add_scaled(-delta, &h);
            let fd = (cf.value(&g, &wp).unwrap() - cf.value(&g, &wm).unwrap()) / (2.0 * delta);
            let exact = dh(&h);
            proptest::prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {}", fd, exact);
        }
    }
}
