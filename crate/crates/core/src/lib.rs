//! Numerical laboratory for the damped wave equation
//!
//! ```text
//! ∂²_t u - Δu + 2a(x) ∂_t u = 0   in Ω,    u = 0 on ∂Ω,
//! ```
//!
//! on partially rectangular planar domains such as the Bunimovich stadium,
//! with damping concentrated near the non-rectangular part.
//!
//! The crate measures, on finite-difference discretizations:
//!
//! - growth of the stationary resolvent `(-Δ + 2iaλ - λ²)^{-1}` along the real
//!   axis, and of the generator resolvent `(λ - A)^{-1}` on `H¹₀ × L²`
//!   ([`resolvent2d`]);
//! - the separated-variables reduction on the core rectangle and the 1D
//!   damped resolvent ([`mode1d`]);
//! - the spectrum of the generator ([`spectrum`]);
//! - energy decay in time and the associated decay-rate functionals
//!   ([`evolution`]), and bouncing-ball quasimodes ([`quasimode`]).
//!
//! Runnable walkthroughs live in `examples/`; the `stadium-decay` binary
//! wires JSON configurations to the same routines.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod damping;
pub mod error;
pub mod evolution;
pub mod fitting;
pub mod geometry;
pub mod linalg;
pub mod mode1d;
pub mod output;
pub mod quasimode;
pub mod resolvent2d;
pub mod spectrum;

pub use num_complex::Complex64;

pub use damping::{
    build_constant_damping, build_smooth_m_damping, build_wing_damping, lemma31_constant, DampingKind,
    DampingProfile,
};
pub use error::{Error, Result};
pub use evolution::{bouncing_ball_data, decay_bound_functional, energy, evolve, CauchyPair, EnergyTrace};
pub use fitting::{fit_decay_with_log, fit_power_law, FitReport};
pub use geometry::{build_rectangle, build_stadium, DomainSpec, GridMesh, Shape};
pub use quasimode::{build_quasimode, quasimode_residual, QuasimodeSpec};
pub use resolvent2d::{generator_resolvent_norm, resolvent_norm, solve_helmholtz, sweep_and_fit, SweepResult};
pub use spectrum::{assemble_generator, compute_spectrum, SpectrumRequest, SpectrumResult};

/// Complex grid function on the interior nodes of a mesh.
pub type ComplexField = Vec<Complex64>;
