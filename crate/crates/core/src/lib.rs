//! Simulation and statistical verification of random strings reflected in
//! a convex domain of `R^d`.
//!
//! A random string is the solution `u(t, θ)` of a vector-valued stochastic
//! heat equation on `θ ∈ [0, 1]`, pinned at `u(t, 0) = a`, `u(t, 1) = b`,
//! driven by space-time white noise and confined to the closure of a convex
//! open set `O` by a reflection measure acting along the inner normal. The
//! crate never simulates the reflected equation directly: it integrates the
//! penalized family obtained by replacing the convex indicator of `O` (plus
//! the potential `φ`) with its Moreau–Yosida envelope `Φ_n`, and studies what
//! happens as `n → ∞`.
//!
//! Layout:
//!
//! - [`geometry`]: convex domains, Euclidean projection, distances, normals.
//! - [`potential`]: the potential `φ`, its extension `Φ`, proximal maps and
//!   the envelope `Φ_n` with gradient `2n(x − prox x)`.
//! - [`pathspace`]: the spatial grid, Brownian-bridge sampling, the Gibbs
//!   measures `ν` and `ν_n`, white-noise increments and path norms.
//! - [`integrator`]: semi-implicit and exponential time stepping of the
//!   penalized equation, coupled runs and reflection-measure bookkeeping.
//! - [`observables`]: contact sets, first boundary hits, cylinder functionals.
//! - [`stats`]: two-sample tests and Monte-Carlo helpers.
//! - [`verify`]: named statistical checks producing [`verify::VerificationReport`]s.
//! - [`io`]: run configuration, trajectory files, CSV and JSON output.
//! - [`cli`]: the `rstring` command line front end.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod io;
pub mod observables;
pub mod pathspace;
pub mod potential;
pub mod rng;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, Mode, Shape};
pub use integrator::{Scheme, SimConfig, Trajectory};
pub use pathspace::{Grid, PathState, WeightedSample};
pub use potential::{PotentialKind, PotentialSpec, YosidaHandle};
