//! Horizontal Brownian motion on Heisenberg groups.
//!
//! The crate simulates the hypoelliptic diffusion generated by ½Δ_H on H^n,
//! solves the sub-Laplacian Dirichlet problem by exit-time Monte Carlo,
//! evaluates the explicit harmonic-measure kernel on Korányi balls, and
//! verifies which maps between Heisenberg groups preserve Brownian paths up
//! to the conformal-factor time change.
//!
//! Modules:
//! - [`point`]: group algebra and the Korányi gauge.
//! - [`field`]: scalar fields, maps, and left-invariant derivatives.
//! - [`catalog`]: the rigid maps (translations, rotations, dilations).
//! - [`path`]: Brownian drivers, Lévy area, horizontal Brownian motion.
//! - [`timechange`]: the clock σ(t) = ∫|∇_H f₁|²(W) ds and pushforwards.
//! - [`dirichlet`]: exit-time Monte Carlo and the harmonic-measure kernel.
//! - [`morphism`]: harmonic-morphism checks and the BM test battery.
//! - [`experiment`]: the end-to-end path-preservation experiment.
//!
//! Everything stochastic is driven by [`rng::RngSpec`] streams and is
//! bit-reproducible regardless of how work is split across threads.

pub mod catalog;
pub mod dirichlet;
pub mod error;
pub mod experiment;
pub mod field;
pub mod linalg;
pub mod morphism;
pub mod path;
pub mod point;
pub mod rng;
pub mod stats;
pub mod timechange;

pub use catalog::{named_map, CatalogMap};
pub use error::{HeisError, Result};
pub use field::{GroupMap, ScalarField, DEFAULT_FD_STEP};
pub use point::GroupPoint;
pub use rng::RngSpec;
