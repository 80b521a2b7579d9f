//! Numerical toolkit for the relativistic Landau collision operator.
//!
//! The crate turns the computable parts of relativistic kinetic theory into
//! testable code: pointwise collision kernels, quadrature of the nonlocal
//! coefficients, Lorentz-boost phase-space geometry with its kinetic Hölder
//! metrics, the mixed-derivative integration-by-parts calculus, coefficient
//! transforms between relativistic and classical frames, decay barriers, and
//! two small kinetic solvers with conservation diagnostics.
//!
//! The `examples/` directory is the front door: one runnable example per
//! capability (`cargo run --release --example <name>`). A thin `relkin`
//! binary exposes the same functionality as CLI subcommands for scripted
//! verification runs.

pub mod coefficients;
pub mod distribution;
pub mod error;
pub mod kernel;
pub mod lorentz;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};
pub use lorentz::{PhasePoint, Vec3};
