//! Resonant four-wave mixing with large atomic coherence prepared by
//! Stark-chirped rapid adiabatic passage.
//!
//! The library evaluates the closed-form propagation solutions of the
//! difference-frequency scheme ω₃ = 2ω₁ − ω₂ in a three-level medium —
//! undepleted small-signal forms and the depleted-pump elliptic-function
//! regimes of the pendulum reduction — together with the phase-matching
//! window analysis and the SCRAP / half-SCRAP coherence-preparation
//! dynamics. Every closed form is paired with an independent numerical
//! oracle (adaptive quadrature of the implicit integral, canonical ODE
//! flow, time-dependent Schrödinger integration) and conservation checks.
//!
//! Modules:
//! - [`model`]: medium parameters, Rabi frequencies, detunings, the
//!   eigenvalue cubic and the adiabatic dressed state,
//! - [`elliptic`]: self-contained elliptic kernel (K, F, Π, sn/cn),
//! - [`scrap`]: preparation-stage trajectories and the TDSE oracle,
//! - [`smallsignal`]: undepleted-coherence and undepleted-pump solutions,
//!   conversion coefficients and phase-matching conditions,
//! - [`propagation`]: depleted-pump coefficients, the three elliptic-regime
//!   closed forms and the pendulum oracles,
//! - [`phasematch`]: the y-window analysis and joint-compensation check,
//! - [`experiments`]: J(z, τ) grids, W(z) efficiency curves and figure
//!   presets,
//! - [`config`] / [`selftest`]: CLI support.

pub mod config;
pub mod elliptic;
pub mod error;
pub mod experiments;
pub mod model;
pub mod phasematch;
pub mod propagation;
pub mod quadrature;
pub mod scrap;
pub mod selftest;
pub mod smallsignal;

pub use error::{Error, Result};
