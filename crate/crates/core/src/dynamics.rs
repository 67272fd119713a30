//! Right-hand sides of the coupled strategy / environment / opinion system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GamePair, Payoff2x2, Strategy};

/// States may exceed the unit cube by this much before `coupled_rhs` refuses them.
pub const CUBE_TOL: f64 = 1e-9;

/// Point `(x, n, y)`: strategy-1 share, environment level, opinion-m₁ share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub x: f64,
    pub n: f64,
    pub y: f64,
}

impl SystemState {
    pub fn new(x: f64, n: f64, y: f64) -> Result<Self> {
        let s = SystemState { x, n, y };
        if s.in_cube(0.0) {
            Ok(s)
        } else {
            Err(Error::OutsideCube { x, n, y })
        }
    }

    pub fn in_cube(&self, tol: f64) -> bool {
        [self.x, self.n, self.y]
            .iter()
            .all(|v| v.is_finite() && *v >= -tol && *v <= 1.0 + tol)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.n, self.y]
    }

    /// Max-norm distance.
    pub fn distance(&self, other: &SystemState) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.n - other.n).abs())
            .max((self.y - other.y).abs())
    }

    pub(crate) fn offset(&self, d: &StateDerivative, h: f64) -> SystemState {
        SystemState {
            x: self.x + h * d.dx,
            n: self.n + h * d.dn,
            y: self.y + h * d.dy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opinion {
    M1,
    M2,
}

impl Opinion {
    pub fn index(self) -> usize {
        match self {
            Opinion::M1 => 1,
            Opinion::M2 => 2,
        }
    }

    /// Population share holding this opinion.
    pub fn share(self, state: &SystemState) -> f64 {
        match self {
            Opinion::M1 => state.y,
            Opinion::M2 => 1.0 - state.y,
        }
    }
}

impl TryFrom<usize> for Opinion {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Opinion::M1),
            2 => Ok(Opinion::M2),
            _ => Err(Error::InvalidIndex {
                kind: "opinion",
                index,
            }),
        }
    }
}

/// `b_ij`: confidence of opinion-`m_i` holders in players of strategy `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustMatrix {
    pub b11: f64,
    pub b12: f64,
    pub b21: f64,
    pub b22: f64,
}

impl TrustMatrix {
    pub fn new(b11: f64, b12: f64, b21: f64, b22: f64) -> Result<Self> {
        for (name, v) in [("b11", b11), ("b12", b12), ("b21", b21), ("b22", b22)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is outside [0, 1]"),
                });
            }
        }
        Ok(TrustMatrix { b11, b12, b21, b22 })
    }

    pub fn diagonal(d: f64) -> Result<Self> {
        Self::new(d, 0.0, 0.0, d)
    }

    pub fn zero() -> Self {
        TrustMatrix {
            b11: 0.0,
            b12: 0.0,
            b21: 0.0,
            b22: 0.0,
        }
    }

    pub fn get(&self, opinion: Opinion, strategy: Strategy) -> f64 {
        match (opinion, strategy) {
            (Opinion::M1, Strategy::First) => self.b11,
            (Opinion::M1, Strategy::Second) => self.b12,
            (Opinion::M2, Strategy::First) => self.b21,
            (Opinion::M2, Strategy::Second) => self.b22,
        }
    }

    /// Exchange the roles of the two opinions.
    pub fn swap_opinions(&self) -> Self {
        TrustMatrix {
            b11: self.b21,
            b12: self.b22,
            b21: self.b11,
            b22: self.b12,
        }
    }
}

/// Environment rates: strategy-1 players replenish at `theta`, strategy-2
/// players deplete at `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    pub theta: f64,
    pub psi: f64,
}

impl EnvParams {
    pub fn new(theta: f64, psi: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "theta",
                reason: format!("{theta} must be positive"),
            });
        }
        if !(psi.is_finite() && psi <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "psi",
                reason: format!("{psi} must be nonpositive"),
            });
        }
        Ok(EnvParams { theta, psi })
    }

    /// Growth factor `θx + ψ(1−x)`.
    pub fn drive(&self, x: f64) -> f64 {
        self.theta * x + self.psi * (1.0 - x)
    }

    /// Strategy-1 share at which the environment is neutral, `−ψ/(θ−ψ)`.
    pub fn neutral_share(&self) -> f64 {
        -self.psi / (self.theta - self.psi)
    }
}

/// Which interpolated game the imitation protocol evaluates payoffs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolMatrix {
    /// `A_n`, weighted by the environment.
    #[default]
    Env,
    /// `A_y`, weighted by the opinion share, as in the replicator line.
    Opinion,
}

/// Reading of the `[·]₀¹` bracket in the imitation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampMode {
    /// `max(0, min(1, ·))`
    #[default]
    UnitInterval,
    /// `max(0, ·)`
    PositivePart,
}

impl ClampMode {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ClampMode::UnitInterval => v.clamp(0.0, 1.0),
            ClampMode::PositivePart => v.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDerivative {
    pub dx: f64,
    pub dn: f64,
    pub dy: f64,
}

impl StateDerivative {
    pub fn norm_inf(&self) -> f64 {
        self.dx.abs().max(self.dn.abs()).max(self.dy.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dn.is_finite() && self.dy.is_finite()
    }
}

/// `x(1−x)(u(e¹) − u(e²))`.
pub fn replicator_rhs(state: &SystemState, a_eff: &Payoff2x2) -> f64 {
    state.x * (1.0 - state.x) * a_eff.advantage(state.x)
}

/// `n(1−n)(θx + ψ(1−x))`.
pub fn environment_rhs(state: &SystemState, env: &EnvParams) -> f64 {
    state.n * (1.0 - state.n) * env.drive(state.x)
}

/// Trust-weighted payoff `Σ_j x_j·u(e^j)·b_ij` seen by holders of `opinion`.
/// The opinion's own share is not included.
pub fn opinion_weighted_payoff(
    opinion: Opinion,
    state: &SystemState,
    a_eff: &Payoff2x2,
    trust: &TrustMatrix,
) -> f64 {
    let x = state.x;
    x * a_eff.payoff(Strategy::First, x) * trust.get(opinion, Strategy::First)
        + (1.0 - x) * a_eff.payoff(Strategy::Second, x) * trust.get(opinion, Strategy::Second)
}

/// Rate `p_ij` at which holders of `from` switch to `to`.
pub fn imitation_rate(
    from: Opinion,
    to: Opinion,
    state: &SystemState,
    a_eff: &Payoff2x2,
    trust: &TrustMatrix,
    clamp: ClampMode,
) -> Result<f64> {
    if from == to {
        return Err(Error::SameOpinion);
    }
    let gain = |o: Opinion| o.share(state) * opinion_weighted_payoff(o, state, a_eff, trust);
    Ok(clamp.apply(gain(to) - gain(from)))
}

/// `(1−y)p₂₁ − y·p₁₂`.
pub fn opinion_rhs(
    state: &SystemState,
    a_eff: &Payoff2x2,
    trust: &TrustMatrix,
    clamp: ClampMode,
) -> f64 {
    let (p12, p21) = rate_pair(state, a_eff, trust, clamp);
    (1.0 - state.y) * p21 - state.y * p12
}

fn rate_pair(
    state: &SystemState,
    a_eff: &Payoff2x2,
    trust: &TrustMatrix,
    clamp: ClampMode,
) -> (f64, f64) {
    let g1 = state.y * opinion_weighted_payoff(Opinion::M1, state, a_eff, trust);
    let g2 = (1.0 - state.y) * opinion_weighted_payoff(Opinion::M2, state, a_eff, trust);
    (clamp.apply(g2 - g1), clamp.apply(g1 - g2))
}

/// Everything the coupled right-hand side depends on besides the state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub pair: GamePair,
    pub env: EnvParams,
    pub trust: TrustMatrix,
    pub protocol: ProtocolMatrix,
    pub clamp: ClampMode,
}

impl Model {
    pub fn new(
        pair: GamePair,
        env: EnvParams,
        trust: TrustMatrix,
        protocol: ProtocolMatrix,
    ) -> Self {
        Model {
            pair,
            env,
            trust,
            protocol,
            clamp: ClampMode::default(),
        }
    }

    /// `A_y`, the game driving the replicator line.
    pub fn replicator_matrix(&self, state: &SystemState) -> Payoff2x2 {
        self.pair.at(state.y)
    }

    /// The game the imitation protocol evaluates payoffs under.
    pub fn protocol_matrix(&self, state: &SystemState) -> Payoff2x2 {
        match self.protocol {
            ProtocolMatrix::Env => self.pair.at(state.n),
            ProtocolMatrix::Opinion => self.pair.at(state.y),
        }
    }

    /// `(p₁₂, p₂₁)`.
    pub fn rates(&self, state: &SystemState) -> (f64, f64) {
        rate_pair(state, &self.protocol_matrix(state), &self.trust, self.clamp)
    }

    /// Derivative without a domain check; integrator stages may sit a hair
    /// outside the cube.
    pub fn rhs(&self, state: &SystemState) -> StateDerivative {
        StateDerivative {
            dx: replicator_rhs(state, &self.replicator_matrix(state)),
            dn: environment_rhs(state, &self.env),
            dy: opinion_rhs(state, &self.protocol_matrix(state), &self.trust, self.clamp),
        }
    }

    pub fn coupled_rhs(&self, state: &SystemState) -> Result<StateDerivative> {
        if !state.in_cube(CUBE_TOL) {
            return Err(Error::OutsideCube {
                x: state.x,
                n: state.n,
                y: state.y,
            });
        }
        Ok(self.rhs(state))
    }

    /// Max-norm of the derivative, the fixed-point residual.
    pub fn residual(&self, state: &SystemState) -> f64 {
        self.rhs(state).norm_inf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::hawk_dove_matrix;

    fn st(x: f64, n: f64, y: f64) -> SystemState {
        SystemState::new(x, n, y).unwrap()
    }

    fn hd_model(protocol: ProtocolMatrix) -> Model {
        Model::new(
            GamePair::new(
                hawk_dove_matrix(4.0, 12.0).unwrap(),
                hawk_dove_matrix(7.0, 10.0).unwrap(),
            ),
            EnvParams::new(2.0, -1.0).unwrap(),
            TrustMatrix::diagonal(0.5).unwrap(),
            protocol,
        )
    }

    #[test]
    fn replicator_vanishes_on_edges_and_at_mixed_point() {
        let a = hawk_dove_matrix(4.0, 12.0).unwrap();
        assert_eq!(replicator_rhs(&st(0.0, 0.4, 0.2), &a), 0.0);
        assert_eq!(replicator_rhs(&st(1.0, 0.4, 0.2), &a), 0.0);
        assert!(replicator_rhs(&st(1.0 / 3.0, 0.4, 0.2), &a).abs() < 1e-15);
    }

    #[test]
    fn environment_rhs_values() {
        let env = EnvParams::new(2.0, -1.0).unwrap();
        assert_eq!(environment_rhs(&st(0.7, 0.0, 0.5), &env), 0.0);
        assert_eq!(environment_rhs(&st(0.7, 1.0, 0.5), &env), 0.0);
        assert!(environment_rhs(&st(1.0 / 3.0, 0.5, 0.5), &env).abs() < 1e-16);
        assert_eq!(environment_rhs(&st(1.0, 0.5, 0.5), &env), 0.5);
        assert!((env.neutral_share() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn env_params_validation() {
        assert!(EnvParams::new(0.0, -1.0).is_err());
        assert!(EnvParams::new(2.0, 0.5).is_err());
        assert!(EnvParams::new(2.0, 0.0).is_ok());
    }

    #[test]
    fn weighted_payoffs() {
        let a = hawk_dove_matrix(4.0, 12.0).unwrap();
        let b = TrustMatrix::diagonal(0.5).unwrap();
        let s = st(0.5, 0.3, 0.45);
        assert_eq!(
            opinion_weighted_payoff(Opinion::M1, &s, &a, &TrustMatrix::zero()),
            0.0
        );
        assert_eq!(opinion_weighted_payoff(Opinion::M1, &s, &a, &b), 0.0);
        assert_eq!(opinion_weighted_payoff(Opinion::M2, &s, &a, &b), 0.25);
    }

    #[test]
    fn imitation_rates() {
        let a = hawk_dove_matrix(4.0, 12.0).unwrap();
        let b = TrustMatrix::diagonal(0.5).unwrap();
        let clamp = ClampMode::UnitInterval;
        // y = 1/2 and identical trust rows make both opinions equivalent.
        let sym = TrustMatrix::new(0.3, 0.6, 0.3, 0.6).unwrap();
        let s = st(0.4, 0.2, 0.5);
        assert_eq!(
            imitation_rate(Opinion::M1, Opinion::M2, &s, &a, &sym, clamp).unwrap(),
            0.0
        );
        assert_eq!(
            imitation_rate(Opinion::M2, Opinion::M1, &s, &a, &sym, clamp).unwrap(),
            0.0
        );

        // Nobody to imitate.
        let s = st(0.5, 0.3, 0.0);
        assert_eq!(
            imitation_rate(Opinion::M2, Opinion::M1, &s, &a, &b, clamp).unwrap(),
            0.0
        );

        assert_eq!(
            imitation_rate(Opinion::M1, Opinion::M1, &s, &a, &b, clamp),
            Err(Error::SameOpinion)
        );
    }

    #[test]
    fn imitation_rate_matches_scalar_transcription() {
        // y = 0.6, x = 0.5, Hawk–Dove pair interpolated at w = 0.3.
        let pair = GamePair::new(
            hawk_dove_matrix(4.0, 12.0).unwrap(),
            hawk_dove_matrix(7.0, 10.0).unwrap(),
        );
        let a = pair.at(0.3);
        let b = TrustMatrix::diagonal(0.5).unwrap();
        let s = st(0.5, 0.3, 0.6);
        // a = [[-3.25, 4.9], [0, 2.45]]
        let u1: f64 = -3.25 * 0.5 + 4.9 * 0.5;
        let u2: f64 = 2.45 * 0.5;
        let s1 = 0.5 * u1 * 0.5;
        let s2 = 0.5 * u2 * 0.5;
        let want = (0.6 * s1 - 0.4 * s2).clamp(0.0, 1.0);
        let got = imitation_rate(
            Opinion::M2,
            Opinion::M1,
            &s,
            &a,
            &b,
            ClampMode::UnitInterval,
        )
        .unwrap();
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        assert!(got > 0.0);
    }

    #[test]
    fn clamp_modes_differ_above_one() {
        assert_eq!(ClampMode::UnitInterval.apply(3.0), 1.0);
        assert_eq!(ClampMode::PositivePart.apply(3.0), 3.0);
        assert_eq!(ClampMode::PositivePart.apply(-3.0), 0.0);
    }

    #[test]
    fn opinion_rhs_on_boundaries() {
        let a = hawk_dove_matrix(7.0, 10.0).unwrap();
        let b = TrustMatrix::diagonal(0.5).unwrap();
        let c = ClampMode::UnitInterval;
        // Payoffs at x = 0.2 are nonnegative for both strategies.
        assert!(a.payoff(Strategy::First, 0.2) >= 0.0);
        assert_eq!(opinion_rhs(&st(0.2, 0.5, 0.0), &a, &b, c), 0.0);
        assert_eq!(opinion_rhs(&st(0.2, 0.5, 1.0), &a, &b, c), 0.0);
        assert_eq!(
            opinion_rhs(&st(0.2, 0.5, 0.3), &a, &TrustMatrix::zero(), c),
            0.0
        );
    }

    #[test]
    fn corner_is_stationary_for_nonnegative_games() {
        let pd = GamePair::new(
            Payoff2x2::new(3.5, 1.0, 2.0, 0.75).unwrap(),
            Payoff2x2::new(4.0, 1.0, 4.5, 1.25).unwrap(),
        );
        let m = Model::new(
            pd,
            EnvParams::new(2.0, -1.0).unwrap(),
            TrustMatrix::diagonal(0.5).unwrap(),
            ProtocolMatrix::Env,
        );
        let d = m.coupled_rhs(&st(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(
            d,
            StateDerivative {
                dx: 0.0,
                dn: 0.0,
                dy: 0.0
            }
        );
    }

    #[test]
    fn double_null_point() {
        // x = 1/3 is both the A₀ mixed point and the environment-neutral
        // share; under A_y the bracket vanishes at y = 0.
        let m = hd_model(ProtocolMatrix::Env);
        let d = m.coupled_rhs(&st(1.0 / 3.0, 0.5, 0.0)).unwrap();
        assert!(d.dx.abs() < 1e-16 && d.dn.abs() < 1e-16, "{d:?}");
    }

    #[test]
    fn coupled_rhs_matches_scalar_transcription() {
        let m = hd_model(ProtocolMatrix::Env);
        let (x, n, y) = (0.5, 0.3, 0.45);
        // A_y with y = 0.45: y·A1 + (1−y)·A0.
        let ay = [
            [0.45 * -1.5 + 0.55 * -4.0, 0.45 * 7.0 + 0.55 * 4.0],
            [0.0, 0.45 * 3.5 + 0.55 * 2.0],
        ];
        let an = [
            [0.3 * -1.5 + 0.7 * -4.0, 0.3 * 7.0 + 0.7 * 4.0],
            [0.0, 0.3 * 3.5 + 0.7 * 2.0],
        ];
        let u = |m: [[f64; 2]; 2], i: usize| m[i][0] * x + m[i][1] * (1.0 - x);
        let dx = x * (1.0 - x) * (u(ay, 0) - u(ay, 1));
        let dn = n * (1.0 - n) * (2.0 * x - (1.0 - x));
        let s1 = x * u(an, 0) * 0.5;
        let s2 = (1.0 - x) * u(an, 1) * 0.5;
        let p21 = (y * s1 - (1.0 - y) * s2).clamp(0.0, 1.0);
        let p12 = ((1.0 - y) * s2 - y * s1).clamp(0.0, 1.0);
        let dy = (1.0 - y) * p21 - y * p12;

        let d = m.coupled_rhs(&st(x, n, y)).unwrap();
        assert!(d.is_finite());
        assert!((d.dx - dx).abs() < 1e-14);
        assert!((d.dn - dn).abs() < 1e-14);
        assert!((d.dy - dy).abs() < 1e-14);
    }

    #[test]
    fn protocol_mode_switches_matrix() {
        let s = st(0.5, 0.3, 0.45);
        let env = hd_model(ProtocolMatrix::Env);
        let op = hd_model(ProtocolMatrix::Opinion);
        assert_eq!(env.protocol_matrix(&s), env.pair.at(0.3));
        assert_eq!(op.protocol_matrix(&s), op.pair.at(0.45));
        assert_eq!(env.rhs(&s).dx, op.rhs(&s).dx);
        assert_ne!(env.rhs(&s).dy, op.rhs(&s).dy);
    }

    #[test]
    fn coupled_rhs_refuses_states_off_the_cube() {
        let m = hd_model(ProtocolMatrix::Env);
        let s = SystemState {
            x: 1.0 + 1e-6,
            n: 0.5,
            y: 0.5,
        };
        assert!(matches!(m.coupled_rhs(&s), Err(Error::OutsideCube { .. })));
        let s = SystemState {
            x: 1.0 + 1e-10,
            n: 0.5,
            y: 0.5,
        };
        assert!(m.coupled_rhs(&s).is_ok());
    }

    #[test]
    fn trust_matrix_validation() {
        assert!(TrustMatrix::new(1.5, 0.0, 0.0, 0.5).is_err());
        let t = TrustMatrix::new(0.1, 0.2, 0.3, 0.4).unwrap();
        assert_eq!(
            t.swap_opinions(),
            TrustMatrix::new(0.3, 0.4, 0.1, 0.2).unwrap()
        );
        assert!(Opinion::try_from(0).is_err());
    }
}
