//! Stability and Hopf-bifurcation analysis for a delayed four-variable
//! financial system (interest rate, investment demand, price index and
//! average profit margin) with delayed feedback on investment demand.
//!
//! The crate is layered bottom-up:
//!
//! - [`model`]: parameters, the right-hand side, equilibria and Jacobians.
//! - [`charpoly`]: characteristic quasi-polynomials and Routh–Hurwitz gates.
//! - [`critical_delay`]: crossing frequencies, critical-delay ladders,
//!   the resolvent-cubic positive-root test and transversality.
//! - [`rhp_oracle`]: argument-principle root counting and Newton
//!   continuation of roots in the delay, used to cross-examine the
//!   closed-form results.
//! - [`dde`]: a method-of-steps RK4 integrator with Hermite dense output.
//! - [`diagnostics`]: verdicts, envelope analysis and cross-checks.

pub mod charpoly;
pub mod critical_delay;
pub mod dde;
pub mod diagnostics;
mod error;
pub mod model;
pub mod poly;
pub mod rhp_oracle;

pub use error::{Error, Result};

pub use charpoly::{CharSpec, CharSpecP0, CharSpecP1, Characteristic, StabilityGate};
pub use critical_delay::{CriticalDelayReport, LadderEntry, QuarticSpec, ResolventReport};
pub use dde::{DelaySystem, History, Trajectory};
pub use diagnostics::{EnvelopeTrend, OscillationReport, Regime, StabilityVerdict};
pub use model::{Equilibrium, EquilibriumLabel, FinancialSystem, Frame, JacobianPair, State, SystemParams};
pub use num_complex::Complex64;
