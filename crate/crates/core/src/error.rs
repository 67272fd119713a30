use std::fmt;

use thiserror::Error;

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Line(usize),
    Override,
    Missing,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Override => f.write_str("--set override"),
            Location::Missing => f.write_str("not present"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight {0} lies outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("population share {0} lies outside [0, 1]")]
    ShareOutOfRange(f64),
    #[error("invalid {kind} index {index}, expected 1 or 2")]
    InvalidIndex { kind: &'static str, index: usize },
    #[error("imitation rate needs two distinct opinions")]
    SameOpinion,
    #[error("hawk-dove game needs 0 < v < c, got v = {v}, c = {c}")]
    HawkDoveRegime { v: f64, c: f64 },
    #[error("payoff matrix entries must be finite")]
    NonFinitePayoff,
    #[error("degenerate game: every strategy is indifferent against every opponent")]
    DegenerateGame,
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("state ({x}, {n}, {y}) left the unit cube")]
    OutsideCube { x: f64, n: f64, y: f64 },
    #[error("integration blew up: {component} became non-finite after t = {last_valid_t}")]
    Blowup {
        component: &'static str,
        last_valid_t: f64,
    },
    #[error(
        "{component} = {value} overshot the unit cube by more than {tolerance} at t = {t}; \
         try a smaller dt"
    )]
    ProjectionOvershoot {
        component: &'static str,
        value: f64,
        tolerance: f64,
        t: f64,
    },
    #[error("terminal state is not within {radius} of any fixed point")]
    Unresolved { radius: f64 },
    #[error("no basin boundary: both endpoints reach {label}")]
    NoBoundary { label: String },
    #[error("bisection bracket [{lo}, {hi}] is empty or outside [0, 1]")]
    BadBracket { lo: f64, hi: f64 },
    #[error("config: {0}")]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{location}: expected `key = value`, got {text:?}")]
    Syntax { location: Location, text: String },
    #[error("{location}: unknown key `{key}`")]
    UnknownKey { key: String, location: Location },
    #[error("{location}: key `{key}` given twice")]
    DuplicateKey { key: String, location: Location },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("{location}: malformed value for `{key}`: {value:?}")]
    Malformed {
        key: String,
        value: String,
        location: Location,
    },
    #[error("{location}: `{key}` out of range: {reason}")]
    Range {
        key: String,
        reason: String,
        location: Location,
    },
    #[error("{location}: `{key}` conflicts with `{other}`")]
    Conflict {
        key: String,
        other: String,
        location: Location,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
