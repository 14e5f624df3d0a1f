//! Finite-difference reference solver: second-order central differences in
//! x and classical RK4 in time on the periodic ring.
//!
//! ```text
//! ∂t T1 = D ∂x² T1 − v1 ∂x T1 + h_c (T2 − T1)
//! ∂t T2 = D ∂x² T2 + v2 ∂x T2 + h_c (T1 − T2)
//! ```

pub use crate::field::{NullSink, SnapshotSink};

use crate::field::{FieldState, Grid};
use crate::params::{RingSpeeds, Transport};
use crate::{Error, Result};

/// Smallest grid the solver accepts.
pub const MIN_FD_POINTS: usize = 16;

/// Largest allowed growth of max|T| over a single step.
pub const GROWTH_LIMIT: f64 = 10.0;

/// Default fraction of the explicit stability limit.
pub const DEFAULT_SAFETY: f64 = 0.4;

fn check_grid(grid: &Grid) -> Result<()> {
    if grid.len() < MIN_FD_POINTS {
        return Err(Error::domain(format!(
            "finite-difference grid needs at least {MIN_FD_POINTS} points, got {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Precomputed stencil weights for one ring configuration.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    diff: f64,
    adv1: f64,
    adv2: f64,
    hc: f64,
}

impl Stencil {
    fn new(grid: &Grid, speeds: RingSpeeds, transport: &Transport) -> Self {
        let dx = grid.dx();
        Self {
            diff: transport.diffusivity / (dx * dx),
            // −v1 ∂x on ring 1, +v2 ∂x on ring 2
            adv1: -speeds.v1 / (2.0 * dx),
            adv2: speeds.v2 / (2.0 * dx),
            hc: transport.coupling,
        }
    }

    fn apply(&self, t1: &[f64], t2: &[f64], out: &mut [Vec<f64>; 2]) {
        let [d1, d2] = out;
        let n = t1.len();
        for j in 0..n {
            let l = if j == 0 { n - 1 } else { j - 1 };
            let r = if j + 1 == n { 0 } else { j + 1 };
            let exchange = self.hc * (t2[j] - t1[j]);
            d1[j] = self.diff * (t1[r] - 2.0 * t1[j] + t1[l]) + self.adv1 * (t1[r] - t1[l]) + exchange;
            d2[j] = self.diff * (t2[r] - 2.0 * t2[j] + t2[l]) + self.adv2 * (t2[r] - t2[l]) - exchange;
        }
    }
}

/// Time derivatives `(∂t T1, ∂t T2)` of `state`.
pub fn rhs(state: &FieldState, speeds: RingSpeeds, transport: &Transport) -> Result<(Vec<f64>, Vec<f64>)> {
    check_grid(&state.grid)?;
    let n = state.grid.len();
    let mut out = [vec![0.0; n], vec![0.0; n]];
    Stencil::new(&state.grid, speeds, transport).apply(&state.t1, &state.t2, &mut out);
    let [d1, d2] = out;
    Ok((d1, d2))
}

/// Reusable RK4 stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    stencil: Stencil,
    k1: [Vec<f64>; 2],
    k2: [Vec<f64>; 2],
    k3: [Vec<f64>; 2],
    k4: [Vec<f64>; 2],
    tmp: [Vec<f64>; 2],
}

impl Rk4 {
    pub fn new(grid: &Grid, speeds: RingSpeeds, transport: &Transport) -> Result<Self> {
        check_grid(grid)?;
        let z = || [vec![0.0; grid.len()], vec![0.0; grid.len()]];
        Ok(Self {
            stencil: Stencil::new(grid, speeds, transport),
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            tmp: z(),
        })
    }

    /// Advances `state` in place by `dt`.
    pub fn step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("time step must be finite and non-negative, got {dt}")));
        }
        if state.t1.len() != self.tmp[0].len() {
            return Err(Error::Shape("state does not match the stepper's grid".into()));
        }
        if dt == 0.0 {
            return Ok(());
        }
        let before = state.max_abs();
        let s = self.stencil;
        let n = state.t1.len();

        s.apply(&state.t1, &state.t2, &mut self.k1);
        stage(&mut self.tmp, state, &self.k1, 0.5 * dt);
        s.apply(&self.tmp[0], &self.tmp[1], &mut self.k2);
        stage(&mut self.tmp, state, &self.k2, 0.5 * dt);
        s.apply(&self.tmp[0], &self.tmp[1], &mut self.k3);
        stage(&mut self.tmp, state, &self.k3, dt);
        s.apply(&self.tmp[0], &self.tmp[1], &mut self.k4);

        let w = dt / 6.0;
        for (ring, field) in [&mut state.t1, &mut state.t2].into_iter().enumerate() {
            for j in 0..n {
                field[j] += w
                    * (self.k1[ring][j] + 2.0 * self.k2[ring][j] + 2.0 * self.k3[ring][j] + self.k4[ring][j]);
            }
        }
        state.time += dt;

        let after = state.max_abs();
        if !after.is_finite() || (before > 0.0 && after > GROWTH_LIMIT * before) {
            return Err(Error::Stability {
                time: state.time,
                msg: format!("max|T| went from {before:e} to {after:e} in one step of {dt:e} s"),
            });
        }
        Ok(())
    }
}

fn stage(tmp: &mut [Vec<f64>; 2], state: &FieldState, k: &[Vec<f64>; 2], h: f64) {
    for (j, (a, b)) in state.t1.iter().zip(&state.t2).enumerate() {
        tmp[0][j] = a + h * k[0][j];
        tmp[1][j] = b + h * k[1][j];
    }
}

/// One RK4 step of size `dt`.
pub fn step_rk4(state: &FieldState, dt: f64, speeds: RingSpeeds, transport: &Transport) -> Result<FieldState> {
    let mut next = state.clone();
    Rk4::new(&state.grid, speeds, transport)?.step(&mut next, dt)?;
    Ok(next)
}

/// Step-size rule: `dt ≤ safety·min(dx²/(2D), dx/max|v_i|)`, shrunk so an
/// integer number of steps lands on every frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtPolicy {
    pub safety: f64,
    /// Number of snapshot intervals over the run (frame 0 is the initial state).
    pub frames: usize,
}

impl Default for DtPolicy {
    fn default() -> Self {
        Self {
            safety: DEFAULT_SAFETY,
            frames: 1,
        }
    }
}

/// Concrete schedule derived from a [`DtPolicy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub steps_per_frame: usize,
    pub frames: usize,
}

impl StepPlan {
    pub fn total_steps(&self) -> usize {
        self.steps_per_frame * self.frames
    }
}

impl DtPolicy {
    pub fn new(safety: f64, frames: usize) -> Result<Self> {
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::domain(format!("safety must be in (0, 1], got {safety}")));
        }
        if frames == 0 {
            return Err(Error::domain("need at least one frame"));
        }
        Ok(Self { safety, frames })
    }

    /// Largest admissible step for the grid and speeds.
    pub fn dt_max(&self, grid: &Grid, speeds: RingSpeeds, transport: &Transport) -> f64 {
        let dx = grid.dx();
        let diffusive = dx * dx / (2.0 * transport.diffusivity);
        let advective = dx / speeds.max_abs();
        let mut limit = diffusive.min(advective);
        if !limit.is_finite() && transport.coupling > 0.0 {
            // no transport at all: only the exchange term constrains the step
            limit = 1.0 / (2.0 * transport.coupling);
        }
        self.safety * limit
    }

    pub fn plan(&self, grid: &Grid, speeds: RingSpeeds, transport: &Transport, span: f64) -> Result<StepPlan> {
        if !(span > 0.0 && span.is_finite()) {
            return Err(Error::domain(format!("simulated span must be positive, got {span}")));
        }
        let frame_span = span / self.frames as f64;
        let dt_max = self.dt_max(grid, speeds, transport);
        let steps_per_frame = if dt_max.is_finite() {
            (frame_span / dt_max).ceil().max(1.0) as usize
        } else {
            1
        };
        Ok(StepPlan {
            dt: frame_span / steps_per_frame as f64,
            steps_per_frame,
            frames: self.frames,
        })
    }
}

/// Integrates from `state0` to `t_end`, sending frames `0..=frames` to
/// `sink`. Returns the final state and the schedule used.
pub fn simulate<S: SnapshotSink + ?Sized>(
    state0: &FieldState,
    t_end: f64,
    policy: DtPolicy,
    speeds: RingSpeeds,
    transport: &Transport,
    sink: &mut S,
) -> Result<(FieldState, StepPlan)> {
    check_grid(&state0.grid)?;
    let plan = policy.plan(&state0.grid, speeds, transport, t_end - state0.time)?;
    let mut stepper = Rk4::new(&state0.grid, speeds, transport)?;
    let mut state = state0.clone();
    sink.accept(0, &state)?;
    for frame in 1..=plan.frames {
        for _ in 0..plan.steps_per_frame {
            stepper.step(&mut state, plan.dt)?;
        }
        // land exactly on the frame time despite accumulated rounding
        state.time = state0.time + (t_end - state0.time) * frame as f64 / plan.frames as f64;
        sink.accept(frame, &state)?;
    }
    Ok((state, plan))
}
