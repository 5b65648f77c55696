//! Numerical tools for real Ginibre matrices conditioned on their number of
//! real eigenvalues.
//!
//! The crate is organised around the two-phase log-gas: `k` particles pinned
//! to the real axis and `l` conjugate pairs in the plane, `n = k + 2l`.
//! Only the upper member of each pair is stored; every energy, force and
//! density accounts for the mirror analytically.
//!
//! * [`config`], [`measure`], [`rng`], [`manifest`]: shared domain types.
//! * [`potential`]: the energy `Φ`, its gradient and an in-house `erfc`.
//! * [`gasdyn`]: Langevin and gradient-flow integrators, FIRE relaxation.
//! * [`mcmc`]: Metropolis–Hastings on the joint eigenvalue density.
//! * [`oracle`]: brute-force Ginibre sampling with a real Schur solver.
//! * [`ratefn`]: the rate functional and its constrained minimum.
//! * [`analysis`]: histograms, support boundaries and gap statistics.

// `!(a > b)` on floats is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod gasdyn;
pub mod manifest;
pub mod mcmc;
pub mod measure;
pub mod oracle;
pub mod params;
pub mod potential;
pub mod ratefn;
pub mod rng;
pub mod sum;

pub use config::{initial_configuration, make_configuration, round_to_parity, SpectralConfiguration};
pub use error::{Error, ParticleRef, Result};
pub use manifest::RunManifest;
pub use measure::{second_moment, to_measure, EmpiricalMeasure};
pub use num_complex::Complex64;
pub use params::GasParams;
