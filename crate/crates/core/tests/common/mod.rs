#![allow(dead_code)]

use evogame::config::Preset;
use evogame::Scenario;

pub fn hawk_dove() -> Scenario {
    Preset::HawkDove.scenario()
}

pub fn prisoners_dilemma() -> Scenario {
    Preset::PrisonersDilemma.scenario()
}

pub fn hawk_dove_at(y0: f64) -> Scenario {
    hawk_dove()
        .with_initial(evogame::Axis::Y0, y0)
        .expect("y0 in range")
}

/// Number of strict sign changes in a sequence, zeros skipped.
pub fn sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}
