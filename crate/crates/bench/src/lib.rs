//! Shared fixtures for the benchmarks.

use aptring_core::params::Transport;
use aptring_core::{FieldState, Grid, InitialCondition, PhysicalParams, RingSpeeds};

/// Ring radius of the reference scenario [mm].
pub const RADIUS: f64 = 21.0;

pub fn transport() -> Transport {
    PhysicalParams::paper().transport()
}

/// Speed at the EP of the n = 1 mode.
pub fn ep_speeds() -> RingSpeeds {
    let t = transport();
    RingSpeeds::symmetric(t.coupling * RADIUS)
}

/// The `cos-cos` field on `len` points.
pub fn cos_cos(len: usize) -> FieldState {
    InitialCondition::CosCos.build(Grid::new(len, RADIUS).expect("valid grid"), 1, 1.0)
}
