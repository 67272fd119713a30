//! Two-strategy payoff matrices, their environment interpolation, and
//! Nash classification of the symmetric game `(A, Aᵀ)`.
//!
//! Matrices are stored row-major from the row player's point of view.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for best-response comparisons and payoff equalization.
pub const NASH_TOL: f64 = 1e-12;
/// Weights or shares may stray this far outside `[0, 1]` before being rejected.
pub const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    First,
    Second,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::First, Strategy::Second];

    /// One-based index, as used in the `e¹`/`e²` notation.
    pub fn index(self) -> usize {
        match self {
            Strategy::First => 1,
            Strategy::Second => 2,
        }
    }
}

impl TryFrom<usize> for Strategy {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        match index {
            1 => Ok(Strategy::First),
            2 => Ok(Strategy::Second),
            _ => Err(Error::InvalidIndex {
                kind: "strategy",
                index,
            }),
        }
    }
}

/// Row-player payoffs of a 2×2 game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Payoff2x2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Payoff2x2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Result<Self> {
        let m = Payoff2x2 { a11, a12, a21, a22 };
        if m.entries().iter().all(|v| v.is_finite()) {
            Ok(m)
        } else {
            Err(Error::NonFinitePayoff)
        }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn get(&self, row: Strategy, col: Strategy) -> f64 {
        match (row, col) {
            (Strategy::First, Strategy::First) => self.a11,
            (Strategy::First, Strategy::Second) => self.a12,
            (Strategy::Second, Strategy::First) => self.a21,
            (Strategy::Second, Strategy::Second) => self.a22,
        }
    }

    /// Payoff of pure strategy `s` against a population playing the first
    /// strategy with share `x`. No domain check.
    pub fn payoff(&self, s: Strategy, x: f64) -> f64 {
        match s {
            Strategy::First => self.a11 * x + self.a12 * (1.0 - x),
            Strategy::Second => self.a21 * x + self.a22 * (1.0 - x),
        }
    }

    /// `u(e¹, x) − u(e², x)`, the replicator bracket.
    pub fn advantage(&self, x: f64) -> f64 {
        self.payoff(Strategy::First, x) - self.payoff(Strategy::Second, x)
    }

    /// Population mean payoff. No domain check.
    pub fn mean_payoff(&self, x: f64) -> f64 {
        x * self.payoff(Strategy::First, x) + (1.0 - x) * self.payoff(Strategy::Second, x)
    }

    /// Interior share at which both strategies earn the same, if the
    /// closed form is well conditioned and lands strictly inside `(0, 1)`.
    pub fn interior_root(&self) -> Option<f64> {
        let den = self.a11 - self.a12 - self.a21 + self.a22;
        if den.abs() < NASH_TOL {
            return None;
        }
        let x = (self.a22 - self.a12) / den;
        (x > 0.0 && x < 1.0).then_some(x)
    }
}

/// Depleted (`a0`) and replenished (`a1`) games.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GamePair {
    pub a0: Payoff2x2,
    pub a1: Payoff2x2,
}

impl GamePair {
    pub fn new(a0: Payoff2x2, a1: Payoff2x2) -> Self {
        GamePair { a0, a1 }
    }

    /// `w·a1 + (1−w)·a0`, unchecked. Entries equal in both games are
    /// returned as is, so identical games give a weight-independent matrix.
    pub fn at(&self, w: f64) -> Payoff2x2 {
        let mix = |hi: f64, lo: f64| {
            if hi == lo {
                lo
            } else {
                w * hi + (1.0 - w) * lo
            }
        };
        Payoff2x2 {
            a11: mix(self.a1.a11, self.a0.a11),
            a12: mix(self.a1.a12, self.a0.a12),
            a21: mix(self.a1.a21, self.a0.a21),
            a22: mix(self.a1.a22, self.a0.a22),
        }
    }

    pub fn swapped(&self) -> Self {
        GamePair {
            a0: self.a1,
            a1: self.a0,
        }
    }
}

fn check_unit(v: f64, err: fn(f64) -> Error) -> Result<()> {
    if v.is_finite() && (-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&v) {
        Ok(())
    } else {
        Err(err(v))
    }
}

/// Payoff matrix for environment (or opinion) weight `w`.
pub fn interpolate(pair: &GamePair, w: f64) -> Result<Payoff2x2> {
    check_unit(w, Error::WeightOutOfRange)?;
    Ok(pair.at(w))
}

/// Expected payoff of pure strategy `i` against population share `x`.
pub fn expected_payoff(a: &Payoff2x2, i: Strategy, x: f64) -> Result<f64> {
    check_unit(x, Error::ShareOutOfRange)?;
    Ok(a.payoff(i, x))
}

pub fn average_payoff(a: &Payoff2x2, x: f64) -> Result<f64> {
    check_unit(x, Error::ShareOutOfRange)?;
    Ok(a.mean_payoff(x))
}

/// Hawk–Dove game with resource value `v` and fight cost `c`.
pub fn hawk_dove_matrix(v: f64, c: f64) -> Result<Payoff2x2> {
    if !(v.is_finite() && c.is_finite() && v > 0.0 && c > v) {
        return Err(Error::HawkDoveRegime { v, c });
    }
    Payoff2x2::new((v - c) / 2.0, v, 0.0, v / 2.0)
}

/// Prisoner's-dilemma ordering: cooperation dominant in the depleted game,
/// defection dominant in the replenished one.
pub fn check_pd_conditions(pair: &GamePair) -> bool {
    let (lo, hi) = (&pair.a0, &pair.a1);
    lo.a11 > lo.a21 && lo.a12 > lo.a22 && hi.a11 < hi.a21 && hi.a12 < hi.a22
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub pure_symmetric: Vec<Strategy>,
    pub pure_asymmetric: Vec<(Strategy, Strategy)>,
    pub mixed_interior: Option<f64>,
    /// Listed pure profiles that hold only with equality in some
    /// best-response comparison.
    pub weak: Vec<(Strategy, Strategy)>,
}

impl EquilibriumReport {
    /// All pure profiles, symmetric ones included as `(i, i)`.
    pub fn pure_profiles(&self) -> Vec<(Strategy, Strategy)> {
        let mut all: Vec<_> = self.pure_symmetric.iter().map(|&s| (s, s)).collect();
        all.extend(self.pure_asymmetric.iter().copied());
        all.sort();
        all
    }
}

/// `Some(strict)` if `s` is a best response to `opponent`, `None` otherwise.
fn best_response(a: &Payoff2x2, s: Strategy, opponent: Strategy) -> Option<bool> {
    let mine = a.get(s, opponent);
    let mut strict = true;
    for other in Strategy::BOTH.into_iter().filter(|&o| o != s) {
        let alt = a.get(other, opponent);
        if mine < alt - NASH_TOL {
            return None;
        }
        if mine <= alt + NASH_TOL {
            strict = false;
        }
    }
    Some(strict)
}

/// Nash equilibria of the symmetric bimatrix game `(A, Aᵀ)`.
pub fn classify_2x2(a: &Payoff2x2) -> Result<EquilibriumReport> {
    if !a.entries().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinitePayoff);
    }
    if (a.a11 - a.a21).abs() <= NASH_TOL && (a.a12 - a.a22).abs() <= NASH_TOL {
        return Err(Error::DegenerateGame);
    }
    let mut report = EquilibriumReport {
        pure_symmetric: Vec::new(),
        pure_asymmetric: Vec::new(),
        mixed_interior: None,
        weak: Vec::new(),
    };
    for row in Strategy::BOTH {
        for col in Strategy::BOTH {
            // Column player's payoff in (A, Aᵀ) is A[col][row].
            let (Some(r), Some(c)) = (best_response(a, row, col), best_response(a, col, row))
            else {
                continue;
            };
            if row == col {
                report.pure_symmetric.push(row);
            } else {
                report.pure_asymmetric.push((row, col));
            }
            if !(r && c) {
                report.weak.push((row, col));
            }
        }
    }
    report.mixed_interior = a
        .interior_root()
        .filter(|&x| a.advantage(x).abs() <= NASH_TOL);
    Ok(report)
}
