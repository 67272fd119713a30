//! Flat `key = value` scenario files.
//!
//! ```text
//! # comments run to end of line
//! label = hawk-dove
//! v0 = 4            # A0 from Hawk–Dove value/cost ...
//! c0 = 12
//! a1 = -1.5, 7, 0, 3.5   # ... or as four row-major entries
//! ```
//!
//! Unknown keys, duplicates and out-of-range values are errors that name
//! the key and the line (or `--set` override) they came from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{ClampMode, EnvParams, ProtocolMatrix, SystemState, TrustMatrix};
use crate::error::{ConfigError, Location};
use crate::game::{hawk_dove_matrix, GamePair, Payoff2x2};
use crate::scenario::{IntegratorSettings, Scenario};

pub const HAWK_DOVE_PRESET: &str = include_str!("../presets/hawk_dove.cfg");
pub const PRISONERS_DILEMMA_PRESET: &str = include_str!("../presets/prisoners_dilemma.cfg");

const KEYS: &[&str] = &[
    "label",
    "a0",
    "a1",
    "v0",
    "c0",
    "v1",
    "c1",
    "theta",
    "psi",
    "b11",
    "b12",
    "b21",
    "b22",
    "x0",
    "n0",
    "y0",
    "protocol_matrix",
    "clamp",
    "dt",
    "t_max",
    "record_every",
    "eps_stationary",
    "hold_time",
    "projection_tolerance",
];

pub const DEFAULT_LABEL: &str = "scenario";
pub const DEFAULT_PSI: f64 = -1.0;

type Res<T> = Result<T, ConfigError>;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    location: Location,
}

struct Entries(BTreeMap<String, Entry>);

fn check_key(key: &str, location: Location) -> Res<()> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(ConfigError::UnknownKey {
            key: key.to_string(),
            location,
        })
    }
}

fn split_pair(text: &str, sep: char, location: Location) -> Res<(String, String)> {
    match text.split_once(sep) {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Syntax {
            location,
            text: text.to_string(),
        }),
    }
}

impl Entries {
    fn parse(text: &str, overrides: &[String]) -> Res<Self> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let location = Location::Line(i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_pair(line, '=', location)?;
            check_key(&key, location)?;
            if map.contains_key(&key) {
                return Err(ConfigError::DuplicateKey { key, location });
            }
            map.insert(key, Entry { value, location });
        }
        for o in overrides {
            let (key, value) = split_pair(o, '=', Location::Override)?;
            check_key(&key, Location::Override)?;
            map.insert(
                key,
                Entry {
                    value,
                    location: Location::Override,
                },
            );
        }
        Ok(Entries(map))
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn location(&self, key: &str) -> Location {
        self.get(key).map_or(Location::Missing, |e| e.location)
    }

    fn range(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Range {
            key: key.to_string(),
            reason: reason.into(),
            location: self.location(key),
        }
    }

    fn malformed(&self, key: &str, e: &Entry) -> ConfigError {
        ConfigError::Malformed {
            key: key.to_string(),
            value: e.value.clone(),
            location: e.location,
        }
    }

    fn number(&self, key: &str) -> Res<Option<f64>> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            Ok(_) => Err(self.range(key, "must be finite")),
            Err(_) => Err(self.malformed(key, e)),
        }
    }

    fn required(&self, key: &str) -> Res<f64> {
        self.number(key)?.ok_or_else(|| ConfigError::MissingKey {
            key: key.to_string(),
        })
    }

    fn unit(&self, key: &str) -> Res<f64> {
        let v = self.required(key)?;
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(self.range(key, format!("{v} is outside [0, 1]")))
        }
    }

    fn positive_or(&self, key: &str, default: f64) -> Res<f64> {
        let v = self.number(key)?.unwrap_or(default);
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.range(key, format!("{v} must be positive")))
        }
    }

    fn matrix(&self, key: &str) -> Res<Option<Payoff2x2>> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(self.malformed(key, e));
        }
        let mut v = [0.0; 4];
        for (slot, p) in v.iter_mut().zip(parts) {
            *slot = p.parse::<f64>().map_err(|_| self.malformed(key, e))?;
            if !slot.is_finite() {
                return Err(self.range(key, "entries must be finite"));
            }
        }
        Ok(Some(Payoff2x2 {
            a11: v[0],
            a12: v[1],
            a21: v[2],
            a22: v[3],
        }))
    }

    /// A game given either as `aK` or as Hawk–Dove `vK`, `cK`.
    fn game(&self, k: u8) -> Res<Payoff2x2> {
        let (a, v, c) = (format!("a{k}"), format!("v{k}"), format!("c{k}"));
        let explicit = self.matrix(&a)?;
        let has_vc = self.get(&v).is_some() || self.get(&c).is_some();
        match (explicit, has_vc) {
            (Some(_), true) => {
                let other = if self.get(&v).is_some() { v } else { c };
                Err(ConfigError::Conflict {
                    location: self.location(&other),
                    key: other,
                    other: a,
                })
            }
            (Some(m), false) => Ok(m),
            (None, true) => {
                let (vv, cv) = (self.required(&v)?, self.required(&c)?);
                if vv <= 0.0 {
                    return Err(self.range(&v, format!("{vv} must be positive")));
                }
                hawk_dove_matrix(vv, cv)
                    .map_err(|_| self.range(&c, format!("{cv} must exceed {v} = {vv}")))
            }
            (None, false) => Err(ConfigError::MissingKey { key: a }),
        }
    }

    fn scenario(&self) -> Res<Scenario> {
        let label = self
            .get("label")
            .map_or(DEFAULT_LABEL.to_string(), |e| e.value.clone());
        if label.is_empty() {
            return Err(self.range("label", "must not be empty"));
        }
        let pair = GamePair::new(self.game(0)?, self.game(1)?);

        let theta = self.required("theta")?;
        if theta <= 0.0 {
            return Err(self.range("theta", format!("{theta} must be positive")));
        }
        let psi = self.number("psi")?.unwrap_or(DEFAULT_PSI);
        if psi > 0.0 {
            return Err(self.range("psi", format!("{psi} must be nonpositive")));
        }
        let env = EnvParams { theta, psi };

        let trust = TrustMatrix {
            b11: self.unit("b11")?,
            b12: self.unit("b12")?,
            b21: self.unit("b21")?,
            b22: self.unit("b22")?,
        };
        let initial = SystemState {
            x: self.unit("x0")?,
            n: self.unit("n0")?,
            y: self.unit("y0")?,
        };

        let protocol = match self.get("protocol_matrix") {
            None => ProtocolMatrix::default(),
            Some(e) => match e.value.as_str() {
                "env" => ProtocolMatrix::Env,
                "opinion" => ProtocolMatrix::Opinion,
                _ => return Err(self.malformed("protocol_matrix", e)),
            },
        };
        let clamp = match self.get("clamp") {
            None => ClampMode::default(),
            Some(e) => match e.value.as_str() {
                "unit_interval" => ClampMode::UnitInterval,
                "positive_part" => ClampMode::PositivePart,
                _ => return Err(self.malformed("clamp", e)),
            },
        };

        let d = IntegratorSettings::default();
        let dt = self.positive_or("dt", d.dt)?;
        let t_max = self.positive_or("t_max", d.t_max)?;
        if dt > t_max {
            return Err(self.range("dt", format!("{dt} exceeds t_max = {t_max}")));
        }
        let record_every = match self.get("record_every") {
            None => d.record_every,
            Some(e) => match e.value.parse::<usize>() {
                Ok(0) => return Err(self.range("record_every", "must be at least 1")),
                Ok(v) => v,
                Err(_) => return Err(self.malformed("record_every", e)),
            },
        };
        let eps_stationary = self.positive_or("eps_stationary", d.eps_stationary)?;
        let hold_time = self.number("hold_time")?.unwrap_or(d.hold_time);
        if hold_time < 0.0 {
            return Err(self.range("hold_time", format!("{hold_time} must be nonnegative")));
        }
        let projection_tolerance =
            self.positive_or("projection_tolerance", d.projection_tolerance)?;

        Ok(Scenario {
            label,
            pair,
            env,
            trust,
            initial,
            settings: IntegratorSettings {
                dt,
                t_max,
                record_every,
                eps_stationary,
                hold_time,
                projection_tolerance,
            },
            protocol,
            clamp,
        })
    }
}

/// Parse scenario text, then apply `KEY=VALUE` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<Scenario, ConfigError> {
    Entries::parse(text, overrides)?.scenario()
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text, overrides)
}

/// Serialize with explicit matrices; [`parse_config`] reads it back exactly.
pub fn to_config_string(s: &Scenario) -> String {
    let m = |p: &Payoff2x2| {
        p.entries()
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("label", s.label.clone());
    kv("a0", m(&s.pair.a0));
    kv("a1", m(&s.pair.a1));
    kv("theta", format!("{:?}", s.env.theta));
    kv("psi", format!("{:?}", s.env.psi));
    kv("b11", format!("{:?}", s.trust.b11));
    kv("b12", format!("{:?}", s.trust.b12));
    kv("b21", format!("{:?}", s.trust.b21));
    kv("b22", format!("{:?}", s.trust.b22));
    kv("x0", format!("{:?}", s.initial.x));
    kv("n0", format!("{:?}", s.initial.n));
    kv("y0", format!("{:?}", s.initial.y));
    kv(
        "protocol_matrix",
        match s.protocol {
            ProtocolMatrix::Env => "env",
            ProtocolMatrix::Opinion => "opinion",
        }
        .into(),
    );
    kv(
        "clamp",
        match s.clamp {
            ClampMode::UnitInterval => "unit_interval",
            ClampMode::PositivePart => "positive_part",
        }
        .into(),
    );
    let st = &s.settings;
    kv("dt", format!("{:?}", st.dt));
    kv("t_max", format!("{:?}", st.t_max));
    kv("record_every", st.record_every.to_string());
    kv("eps_stationary", format!("{:?}", st.eps_stationary));
    kv("hold_time", format!("{:?}", st.hold_time));
    kv(
        "projection_tolerance",
        format!("{:?}", st.projection_tolerance),
    );
    out
}

/// Parse a grid spec `lo:hi:count` with `0 ≤ lo < hi ≤ 1`. A count of one
/// yields just `lo`; otherwise both ends are included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let [lo, hi, count] = parts[..] else {
        return Err(format!("grid `{spec}` is not of the form lo:hi:count"));
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad grid start `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad grid end `{hi}`"))?;
    let count: usize = count
        .parse()
        .map_err(|_| format!("bad grid count `{count}`"))?;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(format!("grid needs 0 <= lo < hi <= 1, got {lo}:{hi}"));
    }
    match count {
        0 => Err("grid count must be at least 1".into()),
        1 => Ok(vec![lo]),
        _ => Ok((0..count)
            .map(|k| {
                if k + 1 == count {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (count - 1) as f64
                }
            })
            .collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    HawkDove,
    PrisonersDilemma,
}

impl Preset {
    pub fn text(self) -> &'static str {
        match self {
            Preset::HawkDove => HAWK_DOVE_PRESET,
            Preset::PrisonersDilemma => PRISONERS_DILEMMA_PRESET,
        }
    }

    pub fn scenario(self) -> Scenario {
        parse_config(self.text(), &[]).expect("shipped preset parses")
    }
}
