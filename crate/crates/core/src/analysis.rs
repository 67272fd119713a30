//! Fixed points of the coupled system, basin scans along one
//! initial-condition axis, and bisection for the basin boundary.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Model, SystemState};
use crate::error::{Error, Result};
use crate::integrator::simulate;
use crate::scenario::{Axis, Scenario};

/// Candidates are kept only if the derivative norm falls below this.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-10;
/// Terminal states farther than this from every fixed point are unresolved.
pub const LABEL_RADIUS: f64 = 1e-3;
/// Spacing of the scalar scan for interior opinion roots.
pub const OPINION_SCAN_STEP: f64 = 1e-3;
/// Environment levels sampled along lines of equilibria with free `n`.
pub const FAMILY_SAMPLES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
/// Bisection stops once the bracket is narrower than this.
pub const BISECT_WIDTH: f64 = 1e-4;

const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointKind {
    Corner,
    ReplicatorInterior,
    EnvironmentInterior,
    Mixed,
}

impl FixedPointKind {
    fn of(s: &SystemState) -> Self {
        let interior = |v: f64| v > 0.0 && v < 1.0;
        match (interior(s.x), interior(s.n), interior(s.y)) {
            (false, false, false) => FixedPointKind::Corner,
            (true, false, false) => FixedPointKind::ReplicatorInterior,
            (false, true, false) => FixedPointKind::EnvironmentInterior,
            _ => FixedPointKind::Mixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub state: SystemState,
    pub residual: f64,
    pub kind: FixedPointKind,
    /// Member of a line of equilibria along which `n` is free.
    pub family: bool,
}

impl FixedPointRecord {
    /// Distance used for labeling; family members ignore `n`.
    pub fn distance(&self, s: &SystemState) -> f64 {
        if self.family {
            (self.state.x - s.x).abs().max((self.state.y - s.y).abs())
        } else {
            self.state.distance(s)
        }
    }

    /// Stable text label; `n` is printed as `*` for family members.
    pub fn label(&self) -> String {
        let f = |v: f64| format!("{:.4}", v + 0.0);
        let n = if self.family {
            "*".to_string()
        } else {
            f(self.state.n)
        };
        format!("({}, {}, {})", f(self.state.x), n, f(self.state.y))
    }
}

/// How the strategy share of a candidate is fixed.
#[derive(Clone, Copy)]
enum ShareRule {
    Const(f64),
    /// Interior root of the replicator bracket under `A_y`.
    Mixed,
}

impl ShareRule {
    fn share(self, model: &Model, y: f64) -> Option<f64> {
        match self {
            ShareRule::Const(x) => Some(x),
            ShareRule::Mixed => model.pair.at(y).interior_root(),
        }
    }
}

fn opinion_flow(model: &Model, rule: ShareRule, n: f64, y: f64) -> Option<f64> {
    let x = rule.share(model, y)?;
    Some(model.rhs(&SystemState { x, n, y }).dy)
}

/// Interior `y` where the opinion flow vanishes: sign changes on a uniform
/// grid refined by bisection, plus isolated exact zeros.
fn opinion_roots(model: &Model, rule: ShareRule, n: f64) -> Vec<f64> {
    let steps = (1.0 / OPINION_SCAN_STEP).round() as usize;
    let grid: Vec<(f64, Option<f64>)> = (0..=steps)
        .map(|k| {
            let y = k as f64 / steps as f64;
            (y, opinion_flow(model, rule, n, y))
        })
        .collect();
    let mut roots = Vec::new();
    for k in 1..steps {
        let (y, Some(v)) = grid[k] else { continue };
        let isolated = |j: usize| matches!(grid[j].1, Some(w) if w != 0.0);
        if v == 0.0 && isolated(k - 1) && isolated(k + 1) {
            roots.push(y);
        }
    }
    for w in grid.windows(2) {
        let ((mut lo, Some(mut flo)), (mut hi, Some(fhi))) = (w[0], w[1]) else {
            continue;
        };
        if flo == 0.0 || fhi == 0.0 || flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let Some(fm) = opinion_flow(model, rule, n, mid) else {
                break;
            };
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// `y` at which the replicator bracket under `A_y` vanishes at share `x`
/// (the bracket is affine in `y`).
fn bracket_root(model: &Model, x: f64) -> Option<f64> {
    let d0 = model.pair.a0.advantage(x);
    let d1 = model.pair.a1.advantage(x);
    let den = d0 - d1;
    if den.abs() < 1e-15 {
        return None;
    }
    let y = d0 / den;
    (0.0..=1.0).contains(&y).then_some(y)
}

/// Enumerate and verify fixed points of the coupled system.
pub fn find_fixed_points(scenario: &Scenario) -> Vec<FixedPointRecord> {
    let model = scenario.model();
    let neutral = model.env.neutral_share();
    let has_line = neutral > 0.0 && neutral < 1.0;

    let mut combos: Vec<(ShareRule, Vec<f64>, bool)> = Vec::new();
    if has_line {
        combos.push((ShareRule::Const(neutral), FAMILY_SAMPLES.to_vec(), true));
    }
    combos.push((ShareRule::Const(0.0), vec![0.0, 1.0], false));
    combos.push((ShareRule::Const(1.0), vec![0.0, 1.0], false));
    combos.push((ShareRule::Mixed, vec![0.0, 1.0], false));

    let mut found: Vec<FixedPointRecord> = Vec::new();
    for (rule, ns, on_line) in combos {
        // Opinion candidates are collected over all n first so that a line
        // of equilibria can be recognised as a whole.
        let mut ys: Vec<f64> = vec![0.0, 1.0];
        for &n in &ns {
            ys.extend(opinion_roots(&model, rule, n));
        }
        if let (true, ShareRule::Const(x)) = (on_line, rule) {
            ys.extend(bracket_root(&model, x));
        }
        ys.sort_by(f64::total_cmp);
        ys.dedup_by(|a, b| (*a - *b).abs() < DEDUP_TOL);

        for y in ys {
            let Some(x) = rule.share(&model, y) else {
                continue;
            };
            let hits: Vec<FixedPointRecord> = ns
                .iter()
                .filter_map(|&n| {
                    let state = SystemState { x, n, y };
                    let residual = model.residual(&state);
                    (residual < FIXED_POINT_RESIDUAL).then(|| FixedPointRecord {
                        state,
                        residual,
                        kind: FixedPointKind::of(&state),
                        family: false,
                    })
                })
                .collect();
            let family = on_line && hits.len() == ns.len();
            for mut rec in hits {
                rec.family = family;
                merge(&mut found, rec);
            }
        }
    }
    found.sort_by(|a, b| {
        let key = |r: &FixedPointRecord| r.state.components();
        key(a)
            .iter()
            .zip(key(b).iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found
}

fn merge(found: &mut Vec<FixedPointRecord>, rec: FixedPointRecord) {
    match found
        .iter_mut()
        .find(|r| r.state.distance(&rec.state) < DEDUP_TOL)
    {
        Some(existing) => existing.family |= rec.family,
        None => found.push(rec),
    }
}

/// Closest record to `s`, with its distance.
pub fn nearest<'a>(
    records: &'a [FixedPointRecord],
    s: &SystemState,
) -> Option<(&'a FixedPointRecord, f64)> {
    records
        .iter()
        .map(|r| (r, r.distance(s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Label of the fixed point within [`LABEL_RADIUS`] of `s`, if any.
pub fn label_for(records: &[FixedPointRecord], s: &SystemState) -> Option<String> {
    nearest(records, s)
        .filter(|(_, d)| *d <= LABEL_RADIUS)
        .map(|(r, _)| r.label())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinCell {
    pub initial: f64,
    pub terminal: Option<SystemState>,
    pub converged: bool,
    /// `None` when the terminal state is unresolved or the run failed.
    pub label: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinMap {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub cells: Vec<BasinCell>,
}

impl BasinMap {
    /// Indices `k` where cells `k` and `k + 1` carry different labels,
    /// skipping cells without one.
    pub fn switches(&self) -> Vec<(usize, usize)> {
        let labeled: Vec<(usize, &String)> = self
            .cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.label.as_ref().map(|l| (i, l)))
            .collect();
        labeled
            .windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }

    pub fn unresolved(&self) -> usize {
        self.cells.iter().filter(|c| c.label.is_none()).count()
    }
}

fn run_cell(scenario: &Scenario, records: &[FixedPointRecord], axis: Axis, v: f64) -> BasinCell {
    let result = scenario.with_initial(axis, v).and_then(|sc| simulate(&sc));
    match result {
        Ok(tr) => BasinCell {
            initial: v,
            terminal: Some(tr.terminal),
            converged: tr.converged,
            label: label_for(records, &tr.terminal),
            error: None,
        },
        Err(e) => BasinCell {
            initial: v,
            terminal: None,
            converged: false,
            label: None,
            error: Some(e.to_string()),
        },
    }
}

/// Simulate once per grid value along `axis`; cells run in parallel and are
/// assembled in grid order.
pub fn basin_scan(scenario: &Scenario, axis: Axis, grid: &[f64]) -> BasinMap {
    let records = find_fixed_points(scenario);
    basin_scan_with(scenario, &records, axis, grid)
}

pub fn basin_scan_with(
    scenario: &Scenario,
    records: &[FixedPointRecord],
    axis: Axis,
    grid: &[f64],
) -> BasinMap {
    let cells = grid
        .par_iter()
        .map(|&v| run_cell(scenario, records, axis, v))
        .collect();
    BasinMap {
        axis,
        grid: grid.to_vec(),
        cells,
    }
}

fn resolve(
    scenario: &Scenario,
    records: &[FixedPointRecord],
    axis: Axis,
    v: f64,
) -> Result<String> {
    let tr = simulate(&scenario.with_initial(axis, v)?)?;
    label_for(records, &tr.terminal).ok_or(Error::Unresolved {
        radius: LABEL_RADIUS,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Boundary {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub lo_label: String,
    pub hi_label: String,
    pub iterations: usize,
}

/// Bisect the initial-condition axis between two differently labeled
/// endpoints. Returns the midpoint of the final bracket.
pub fn threshold_bisect(
    scenario: &Scenario,
    axis: Axis,
    lo: f64,
    hi: f64,
    max_iters: usize,
) -> Result<f64> {
    let records = find_fixed_points(scenario);
    bisect_with(scenario, &records, axis, lo, hi, max_iters).map(|b| b.value)
}

pub fn bisect_with(
    scenario: &Scenario,
    records: &[FixedPointRecord],
    axis: Axis,
    mut lo: f64,
    mut hi: f64,
    max_iters: usize,
) -> Result<Boundary> {
    if !(lo < hi && lo >= 0.0 && hi <= 1.0) {
        return Err(Error::BadBracket { lo, hi });
    }
    let lo_label = resolve(scenario, records, axis, lo)?;
    let hi_label = resolve(scenario, records, axis, hi)?;
    if lo_label == hi_label {
        return Err(Error::NoBoundary { label: lo_label });
    }
    let mut iterations = 0;
    while hi - lo >= BISECT_WIDTH && iterations < max_iters {
        let mid = 0.5 * (lo + hi);
        // Anything not matching the low end keeps the bracket labels distinct.
        if resolve(scenario, records, axis, mid)? == lo_label {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Boundary {
        value: 0.5 * (lo + hi),
        lo,
        hi,
        lo_label,
        hi_label,
        iterations,
    })
}
