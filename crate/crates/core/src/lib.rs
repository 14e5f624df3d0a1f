//! Core numerics for the anti-PT-symmetric heat-diffusion system of two
//! thermally coupled rings rotating in opposite directions.
//!
//! The modules follow the analysis pipeline:
//!
//! - [`params`]: material constants, ring geometry, modes and unit handling
//! - [`spectrum`]: the per-mode 2×2 non-Hermitian Hamiltonian and its
//!   exceptional point
//! - [`epform`]: the closed-form solution at the exceptional point
//! - [`propagator`]: exact Fourier-mode time evolution (Jordan path at the EP)
//! - [`fdsolver`]: an independent finite-difference/RK4 solver
//! - [`diagnostics`]: decay, drift, beat and phase-lag estimators
//!
//! Internally every quantity uses the mm–kg–s–K system.

pub mod dft;
pub mod diagnostics;
pub mod epform;
mod error;
pub mod fdsolver;
pub mod field;
pub mod fmt;
pub mod params;
pub mod propagator;
pub mod spectrum;

pub use error::{Error, Result};
pub use field::{FieldState, Grid, InitialCondition};
pub use params::{ModeSpec, PhysicalParams, RingGeometry, RingSpeeds};
pub use spectrum::{EigenReport, ModeHamiltonian, Phase};
