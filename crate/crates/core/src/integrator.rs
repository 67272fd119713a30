//! Fixed-step integration of the coupled system.
//!
//! Every step is followed by a projection onto the unit cube that only
//! absorbs rounding-sized overshoot; anything larger is reported as an
//! error so that a too-coarse `dt` cannot silently distort a run.

use serde::Serialize;

use crate::dynamics::{Model, StateDerivative, SystemState};
use crate::error::{Error, Result};
use crate::game::Strategy;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
    /// Forward Euler; kept as an independent low-order cross-check.
    Euler,
}

/// Per-sample payoffs under `A_y` and protocol rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedSample {
    pub u1: f64,
    pub u2: f64,
    pub u_avg: f64,
    pub p12: f64,
    pub p21: f64,
}

impl DerivedSample {
    pub fn at(model: &Model, state: &SystemState) -> Self {
        let a = model.replicator_matrix(state);
        let (p12, p21) = model.rates(state);
        DerivedSample {
            u1: a.payoff(Strategy::First, state.x),
            u2: a.payoff(Strategy::Second, state.x),
            u_avg: a.mean_payoff(state.x),
            p12,
            p21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub derived: Vec<DerivedSample>,
    pub converged: bool,
    pub t_converged: Option<f64>,
    pub terminal: SystemState,
}

impl Trajectory {
    fn start(model: &Model, initial: SystemState) -> Self {
        Trajectory {
            times: vec![0.0],
            states: vec![initial],
            derived: vec![DerivedSample::at(model, &initial)],
            converged: false,
            t_converged: None,
            terminal: initial,
        }
    }

    fn push(&mut self, model: &Model, t: f64, state: SystemState) {
        self.times.push(t);
        self.states.push(state);
        self.derived.push(DerivedSample::at(model, &state));
        self.terminal = state;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Result of a run that may have stopped early; the trajectory holds every
/// sample recorded before the failure.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub trajectory: Trajectory,
    pub failure: Option<Error>,
}

const COMPONENTS: [&str; 3] = ["x", "n", "y"];

fn check_finite(d: &StateDerivative) -> Result<()> {
    for (name, v) in COMPONENTS.iter().zip([d.dx, d.dn, d.dy]) {
        if !v.is_finite() {
            return Err(Error::Blowup {
                component: name,
                last_valid_t: 0.0,
            });
        }
    }
    Ok(())
}

fn stage(model: &Model, state: &SystemState) -> Result<StateDerivative> {
    let d = model.rhs(state);
    check_finite(&d)?;
    Ok(d)
}

/// Snap rounding-scale overshoot back onto the cube.
pub fn project(state: SystemState, tolerance: f64) -> Result<SystemState> {
    let mut out = [0.0; 3];
    for ((slot, name), v) in out.iter_mut().zip(COMPONENTS).zip(state.components()) {
        if !v.is_finite() {
            return Err(Error::Blowup {
                component: name,
                last_valid_t: 0.0,
            });
        }
        *slot = if v < 0.0 {
            if v < -tolerance {
                return Err(Error::ProjectionOvershoot {
                    component: name,
                    value: v,
                    tolerance,
                    t: 0.0,
                });
            }
            0.0
        } else if v > 1.0 {
            if v > 1.0 + tolerance {
                return Err(Error::ProjectionOvershoot {
                    component: name,
                    value: v,
                    tolerance,
                    t: 0.0,
                });
            }
            1.0
        } else {
            v
        };
    }
    Ok(SystemState {
        x: out[0],
        n: out[1],
        y: out[2],
    })
}

/// One classical fourth-order Runge–Kutta step, projected onto the cube.
pub fn rk4_step(
    model: &Model,
    state: &SystemState,
    dt: f64,
    projection_tolerance: f64,
) -> Result<SystemState> {
    let k1 = stage(model, state)?;
    let k2 = stage(model, &state.offset(&k1, dt / 2.0))?;
    let k3 = stage(model, &state.offset(&k2, dt / 2.0))?;
    let k4 = stage(model, &state.offset(&k3, dt))?;
    let combine = |a: f64, b: f64, c: f64, d: f64| (a + 2.0 * b + 2.0 * c + d) / 6.0;
    let slope = StateDerivative {
        dx: combine(k1.dx, k2.dx, k3.dx, k4.dx),
        dn: combine(k1.dn, k2.dn, k3.dn, k4.dn),
        dy: combine(k1.dy, k2.dy, k3.dy, k4.dy),
    };
    project(state.offset(&slope, dt), projection_tolerance)
}

/// One forward Euler step, projected onto the cube.
pub fn euler_step(
    model: &Model,
    state: &SystemState,
    dt: f64,
    projection_tolerance: f64,
) -> Result<SystemState> {
    let k = stage(model, state)?;
    project(state.offset(&k, dt), projection_tolerance)
}

fn at_time(err: Error, t_now: f64, t_prev: f64) -> Error {
    match err {
        Error::Blowup { component, .. } => Error::Blowup {
            component,
            last_valid_t: t_prev,
        },
        Error::ProjectionOvershoot {
            component,
            value,
            tolerance,
            ..
        } => Error::ProjectionOvershoot {
            component,
            value,
            tolerance,
            t: t_now,
        },
        other => other,
    }
}

/// Run with classical RK4.
pub fn simulate(scenario: &Scenario) -> Result<Trajectory> {
    simulate_with(scenario, Scheme::Rk4)
}

pub fn simulate_with(scenario: &Scenario, scheme: Scheme) -> Result<Trajectory> {
    let outcome = simulate_outcome(scenario, scheme)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(outcome.trajectory),
    }
}

/// Integrate until `t_max` or until `‖rhs‖∞ < eps_stationary` has held for
/// `hold_time`. Invalid scenarios are rejected up front; failures during
/// the run come back with the partial trajectory.
pub fn simulate_outcome(scenario: &Scenario, scheme: Scheme) -> Result<SimulationOutcome> {
    scenario.validate()?;
    let model = scenario.model();
    let cfg = scenario.settings;
    let step = match scheme {
        Scheme::Rk4 => rk4_step,
        Scheme::Euler => euler_step,
    };
    let steps = ((cfg.t_max / cfg.dt).round() as u64).max(1);
    // Quiet intervals are measured in whole steps so the hold does not
    // depend on accumulated time rounding.
    let hold_steps = (cfg.hold_time / cfg.dt - 1e-9).ceil().max(0.0) as u64;

    let mut state = scenario.initial;
    let mut traj = Trajectory::start(&model, state);
    let is_quiet = |s: &SystemState| model.residual(s) < cfg.eps_stationary;
    let mut quiet_since = is_quiet(&state).then_some(0u64);
    if quiet_since.is_some() && hold_steps == 0 {
        traj.converged = true;
        traj.t_converged = Some(0.0);
        return Ok(SimulationOutcome {
            trajectory: traj,
            failure: None,
        });
    }

    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * cfg.dt;
        let t = k as f64 * cfg.dt;
        state = match step(&model, &state, cfg.dt, cfg.projection_tolerance) {
            Ok(s) => s,
            Err(e) => {
                return Ok(SimulationOutcome {
                    trajectory: traj,
                    failure: Some(at_time(e, t, t_prev)),
                })
            }
        };
        if is_quiet(&state) {
            let since = *quiet_since.get_or_insert(k);
            if k - since >= hold_steps {
                traj.converged = true;
                traj.t_converged = Some(t);
            }
        } else {
            quiet_since = None;
        }
        if traj.converged || k % cfg.record_every as u64 == 0 || k == steps {
            traj.push(&model, t, state);
        }
        if traj.converged {
            break;
        }
    }
    Ok(SimulationOutcome {
        trajectory: traj,
        failure: None,
    })
}
