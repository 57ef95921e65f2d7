//! The discretized path space `H = L²([0, 1]; R^d)`.
//!
//! A [`Grid`] has `M` interior nodes `θ_j = j / (M + 1)`, `j = 1..=M`, and
//! pinned endpoints `u(0) = a`, `u(1) = b`. A [`PathState`] stores only the
//! interior nodes; interior node `j` lives at index `j − 1`.
//!
//! Inner products of grid functions use the trapezoidal rule. For the probes
//! and test directions used in the crate (functions vanishing at the
//! endpoints) this is `⟨f, g⟩ = dθ Σ_j f_j · g_j`.

mod bridge;
mod grid;
mod invariant;
mod noise;
mod norms;

pub use bridge::{bridge_covariance, sample_bridge, sample_bridge_into};
pub use grid::{Grid, PathState, SineBasis};
pub(crate) use invariant::normalized_weights;
pub use invariant::{
    potential_energy, sample_invariant, EnergyMode, InvariantSampler, SampleBatch, Strategy, Target,
    WeightedSample, DEFAULT_ATTEMPT_CAP,
};
pub use noise::{noise_field, noise_into};
pub use norms::{norm, norm_of_difference, Norm};
