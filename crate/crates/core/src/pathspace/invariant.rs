use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_bridge_into, Grid, PathState};
use crate::error::{Error, Result};
use crate::potential::{PotentialSpec, YosidaHandle};
use crate::rng::{StreamKey, StreamRng};

/// Default cap on bridge proposals per batch.
pub const DEFAULT_ATTEMPT_CAP: u64 = 10_000_000;

/// Which potential energy to integrate along the path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyMode {
    /// `U(x) = ∫ Φ(x(θ)) dθ`, `+∞` as soon as a node leaves `Ō`.
    ExactU,
    /// `U_n(x) = ∫ Φ_n(x(θ)) dθ`.
    YosidaUn(f64),
}

/// Trapezoidal path energy including the anchored endpoints.
pub fn potential_energy(grid: &Grid, path: &PathState, pot: &PotentialSpec, mode: EnergyMode) -> Result<f64> {
    grid.check_path(path)?;
    match mode {
        EnergyMode::ExactU => energy_with(grid, path, |y| pot.value(y)),
        EnergyMode::YosidaUn(n) => {
            let h = pot.yosida(n)?;
            energy_with(grid, path, |y| h.value(y))
        }
    }
}

fn energy_with(grid: &Grid, path: &PathState, mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<f64> {
    let mut s = 0.5 * (f(grid.a())? + f(grid.b())?);
    for y in path.nodes() {
        s += f(y)?;
        if s == f64::INFINITY {
            return Ok(s);
        }
    }
    Ok(s * grid.dtheta())
}

/// Target measure: `ν ∝ e^{−U} μ` restricted to paths in `Ō`, or `ν_n ∝ e^{−U_n} μ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Nu,
    NuN { n: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Exact draws, accepted with probability `exp(−(U − inf φ))`.
    Rejection,
    /// Bridge draws carrying log-weight `−U` (or `−U_n`).
    Importance,
}

/// A path with its log importance weight (zero for exact draws).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub path: PathState,
    pub log_weight: f64,
}

/// Samples with the total number of bridge proposals used.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub samples: Vec<WeightedSample>,
    pub attempts: u64,
}

impl SampleBatch {
    /// Self-normalized weights.
    pub fn weights(&self) -> Vec<f64> {
        normalized_weights(self.samples.iter().map(|s| s.log_weight))
    }

    /// Kish effective sample size `(Σw)² / Σw²`.
    pub fn ess(&self) -> f64 {
        let w = self.weights();
        1.0 / w.iter().map(|x| x * x).sum::<f64>()
    }

    /// Self-normalized estimate of `E[f]`.
    pub fn mean(&self, mut f: impl FnMut(&PathState) -> f64) -> f64 {
        self.weights().iter().zip(&self.samples).map(|(w, s)| w * f(&s.path)).sum()
    }

    pub fn paths(&self) -> impl Iterator<Item = &PathState> {
        self.samples.iter().map(|s| &s.path)
    }
}

pub(crate) fn normalized_weights(logw: impl Iterator<Item = f64>) -> Vec<f64> {
    let lw: Vec<f64> = logw.collect();
    let mx = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|l| (l - mx).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

enum Energy {
    Exact(PotentialSpec),
    Yosida(YosidaHandle),
}

/// Draws from `ν` or `ν_n` by bridge proposals.
pub struct InvariantSampler {
    grid: Grid,
    energy: Energy,
    lower: f64,
    strategy: Strategy,
    attempt_cap: u64,
}

impl InvariantSampler {
    pub fn new(grid: &Grid, pot: &PotentialSpec, target: Target, strategy: Strategy) -> Result<Self> {
        grid.check_domain(pot.domain())?;
        let energy = match target {
            Target::Nu => Energy::Exact(pot.clone()),
            Target::NuN { n } => Energy::Yosida(pot.yosida(n)?),
        };
        Ok(InvariantSampler {
            grid: grid.clone(),
            energy,
            lower: pot.lower_bound(),
            strategy,
            attempt_cap: DEFAULT_ATTEMPT_CAP,
        })
    }

    pub fn with_attempt_cap(mut self, cap: u64) -> Self {
        self.attempt_cap = cap;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn energy(&self, p: &PathState) -> Result<f64> {
        match &self.energy {
            Energy::Exact(pot) => energy_with(&self.grid, p, |y| pot.value(y)),
            Energy::Yosida(h) => energy_with(&self.grid, p, |y| h.value(y)),
        }
    }

    /// One sample, using at most `cap` proposals. Returns the sample and the
    /// number of proposals drawn.
    fn draw_capped(&self, rng: &mut StreamRng, cap: u64) -> Result<(WeightedSample, u64)> {
        let mut p = self.grid.zeros();
        let mut attempts = 0;
        while attempts < cap {
            attempts += 1;
            sample_bridge_into(&self.grid, rng, &mut p);
            let u = self.energy(&p)?;
            if !u.is_finite() {
                continue;
            }
            match self.strategy {
                Strategy::Importance => {
                    return Ok((WeightedSample { path: p, log_weight: -u }, attempts));
                }
                Strategy::Rejection => {
                    let acc = (-(u - self.lower)).exp();
                    if rng.random::<f64>() < acc {
                        return Ok((WeightedSample { path: p, log_weight: 0.0 }, attempts));
                    }
                }
            }
        }
        Err(Error::AttemptCap { cap, accepted: 0 })
    }

    pub fn draw(&self, rng: &mut StreamRng) -> Result<(WeightedSample, u64)> {
        self.draw_capped(rng, self.attempt_cap)
    }

    /// `count` samples, sample `i` drawn from stream `key.with_replica(i)`.
    /// Fails once the batch as a whole exceeds the attempt cap.
    pub fn batch(&self, count: usize, key: &StreamKey) -> Result<SampleBatch> {
        let results: Vec<Result<(WeightedSample, u64)>> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = key.with_replica(key.replica.wrapping_add(i as u64)).rng();
                self.draw_capped(&mut rng, self.attempt_cap)
            })
            .collect();
        let mut samples = Vec::with_capacity(count);
        let mut attempts = 0u64;
        for r in results {
            match r {
                Ok((s, a)) => {
                    attempts += a;
                    samples.push(s);
                }
                Err(Error::AttemptCap { .. }) => {
                    return Err(Error::AttemptCap {
                        cap: self.attempt_cap,
                        accepted: samples.len(),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        if attempts > self.attempt_cap {
            return Err(Error::AttemptCap {
                cap: self.attempt_cap,
                accepted: samples.len(),
            });
        }
        Ok(SampleBatch { samples, attempts })
    }
}

/// A single draw from `target` (log-weight `0` for rejection).
pub fn sample_invariant(
    grid: &Grid,
    pot: &PotentialSpec,
    target: Target,
    strategy: Strategy,
    rng: &mut StreamRng,
) -> Result<WeightedSample> {
    Ok(InvariantSampler::new(grid, pot, target, strategy)?.draw(rng)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn energy_of_constant_path_is_potential_value() {
        let dom = DomainSpec::interval(-1.0, 1.0).unwrap();
        let pot = PotentialSpec::quadratic(dom.clone(), vec![0.0], 2.0).unwrap();
        let g = Grid::new(9, vec![0.5], vec![0.5], &dom).unwrap();
        let p = g.line();
        let u = potential_energy(&g, &p, &pot, EnergyMode::ExactU).unwrap();
        assert!((u - 0.25).abs() < 1e-14);
        let mut q = p.clone();
        q.node_mut(4)[0] = 1.5;
        assert_eq!(potential_energy(&g, &q, &pot, EnergyMode::ExactU).unwrap(), f64::INFINITY);
        assert!(potential_energy(&g, &q, &pot, EnergyMode::YosidaUn(10.0)).unwrap().is_finite());
    }

    #[test]
    fn rejection_stays_in_domain_and_hits_cap() {
        let dom = DomainSpec::interval(0.0, 1.0).unwrap();
        let pot = PotentialSpec::zero(dom.clone());
        let g = Grid::new(15, vec![0.5], vec![0.5], &dom).unwrap();
        let key = StreamKey::new(3, 0, "inv-test");
        let b = InvariantSampler::new(&g, &pot, Target::Nu, Strategy::Rejection)
            .unwrap()
            .batch(50, &key)
            .unwrap();
        let one = sample_invariant(&g, &pot, Target::Nu, Strategy::Rejection, &mut key.rng()).unwrap();
        assert_eq!(one.log_weight, 0.0);
        for p in b.paths() {
            assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert!((b.ess() - 50.0).abs() < 1e-9);
        let tight = InvariantSampler::new(&g, &pot, Target::Nu, Strategy::Rejection)
            .unwrap()
            .with_attempt_cap(1);
        let r = tight.batch(200, &key);
        assert!(matches!(r, Err(Error::AttemptCap { .. })));
    }
}
