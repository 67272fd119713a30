use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ClampMode, EnvParams, Model, ProtocolMatrix, SystemState, TrustMatrix};
use crate::error::{Error, Result};
use crate::game::GamePair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    pub eps_stationary: f64,
    pub hold_time: f64,
    pub projection_tolerance: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            dt: 0.01,
            t_max: 500.0,
            record_every: 10,
            eps_stationary: 1e-8,
            hold_time: 1.0,
            projection_tolerance: 1e-9,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dt) {
            return bad("dt", "must be positive");
        }
        if !positive(self.t_max) {
            return bad("t_max", "must be positive");
        }
        if self.dt > self.t_max {
            return bad("dt", "must not exceed t_max");
        }
        if self.record_every == 0 {
            return bad("record_every", "must be at least 1");
        }
        if !positive(self.eps_stationary) {
            return bad("eps_stationary", "must be positive");
        }
        if !(self.hold_time.is_finite() && self.hold_time >= 0.0) {
            return bad("hold_time", "must be nonnegative");
        }
        if !positive(self.projection_tolerance) {
            return bad("projection_tolerance", "must be positive");
        }
        Ok(())
    }
}

/// Initial-condition coordinate varied by sweeps and bisection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X0,
    N0,
    Y0,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X0 => "x0",
            Axis::N0 => "n0",
            Axis::Y0 => "y0",
        }
    }

    pub fn get(self, s: &SystemState) -> f64 {
        match self {
            Axis::X0 => s.x,
            Axis::N0 => s.n,
            Axis::Y0 => s.y,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "x0" => Ok(Axis::X0),
            "n0" => Ok(Axis::N0),
            "y0" => Ok(Axis::Y0),
            other => Err(format!("unknown axis `{other}`, expected x0, n0 or y0")),
        }
    }
}

/// A complete problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub pair: GamePair,
    pub env: EnvParams,
    pub trust: TrustMatrix,
    pub initial: SystemState,
    pub settings: IntegratorSettings,
    pub protocol: ProtocolMatrix,
    pub clamp: ClampMode,
}

impl Scenario {
    pub fn model(&self) -> Model {
        Model {
            pair: self.pair,
            env: self.env,
            trust: self.trust,
            protocol: self.protocol,
            clamp: self.clamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.trim().is_empty() {
            return Err(Error::InvalidParameter {
                name: "label",
                reason: "must not be empty".into(),
            });
        }
        crate::game::Payoff2x2::new(
            self.pair.a0.a11,
            self.pair.a0.a12,
            self.pair.a0.a21,
            self.pair.a0.a22,
        )?;
        crate::game::Payoff2x2::new(
            self.pair.a1.a11,
            self.pair.a1.a12,
            self.pair.a1.a21,
            self.pair.a1.a22,
        )?;
        EnvParams::new(self.env.theta, self.env.psi)?;
        TrustMatrix::new(
            self.trust.b11,
            self.trust.b12,
            self.trust.b21,
            self.trust.b22,
        )?;
        SystemState::new(self.initial.x, self.initial.n, self.initial.y)?;
        self.settings.validate()
    }

    /// Copy with one initial coordinate replaced.
    pub fn with_initial(&self, axis: Axis, value: f64) -> Result<Scenario> {
        let mut s = self.initial;
        match axis {
            Axis::X0 => s.x = value,
            Axis::N0 => s.n = value,
            Axis::Y0 => s.y = value,
        }
        let initial = SystemState::new(s.x, s.n, s.y)?;
        Ok(Scenario {
            initial,
            ..self.clone()
        })
    }
}
