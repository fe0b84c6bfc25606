//! Exact and coordinate search over discrete activation grids.
//!
//! Every search counts objective calls exactly. Exhaustive enumeration over
//! `K` slots with `N` candidates each costs `N^K` calls, `P` coordinate passes
//! cost `P·K·N`, regardless of the objective; nothing is memoized.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::rates::{evaluate, Assignment, PowerAllocation, RateReport};
use crate::scenario::{candidate_positions, PinchConfiguration, PinchSite, ScenarioConfig};
use crate::{Error, Result};

/// Default refusal threshold for exhaustive search.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Per-evaluation cost used by the time estimates, ms.
pub const DEFAULT_TAU_MS: f64 = 1.0;

/// One antenna's decision variable: an index into its waveguide's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub waveguide: usize,
    pub candidates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub slots: Vec<Slot>,
    pub waveguides: usize,
}

impl SearchSpace {
    /// One antenna per waveguide on its candidate grid.
    pub fn one_per_waveguide(config: &ScenarioConfig) -> Self {
        Self::with_pas_per_waveguide(config, 1)
    }

    pub fn with_pas_per_waveguide(config: &ScenarioConfig, pas: usize) -> Self {
        let slots = config
            .waveguides
            .iter()
            .enumerate()
            .flat_map(|(w, guide)| {
                let grid = candidate_positions(guide);
                (0..pas).map(move |_| Slot { waveguide: w, candidates: grid.clone() })
            })
            .collect();
        Self { slots, waveguides: config.waveguides.len() }
    }

    pub fn coords(&self, indices: &[usize]) -> Vec<f64> {
        self.slots.iter().zip(indices).map(|(slot, &i)| slot.candidates[i]).collect()
    }

    pub fn configuration(&self, indices: &[usize]) -> PinchConfiguration {
        let mut waveguides = vec![Vec::new(); self.waveguides];
        for (slot, &i) in self.slots.iter().zip(indices) {
            waveguides[slot.waveguide].push(PinchSite { s: slot.candidates[i], active: true });
        }
        PinchConfiguration { waveguides }
    }

    /// Number of joint configurations, if it fits in `u128`.
    pub fn size(&self) -> Option<u128> {
        self.slots
            .iter()
            .try_fold(1u128, |acc, slot| acc.checked_mul(slot.candidates.len() as u128))
    }

    /// Spread start: the `j`-th of `m` slots on a waveguide with `N` candidates
    /// starts at index `(j + 1)(N − 1) / (m + 1)`; a lone slot starts mid-grid.
    pub fn default_start(&self) -> Vec<usize> {
        let mut per_wg = vec![0usize; self.waveguides];
        for slot in &self.slots {
            per_wg[slot.waveguide] += 1;
        }
        let mut seen = vec![0usize; self.waveguides];
        self.slots
            .iter()
            .map(|slot| {
                let m = per_wg[slot.waveguide];
                let j = seen[slot.waveguide];
                seen[slot.waveguide] += 1;
                let n = slot.candidates.len();
                ((j + 1) * (n - 1)) / (m + 1)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: PinchConfiguration,
    pub best_indices: Vec<usize>,
    pub best_value: f64,
    /// Objective calls actually made.
    pub evaluations: u64,
    /// `evaluations · τ`, seconds.
    pub est_time_seconds: f64,
    /// Coordinate passes used (0 for exhaustive search).
    pub passes: usize,
    /// Per-waveguide transmit power chosen by joint searches.
    pub power: Option<Vec<f64>>,
    /// Objective after every sweep or half-step.
    pub trace: Vec<f64>,
}

/// `N^K`, or `None` on overflow.
pub fn brute_force_evaluations(n: u64, k: u32) -> Option<u64> {
    n.checked_pow(k)
}

/// `P·K·N`.
pub fn grid_evaluations(passes: u64, k: u64, n: u64) -> u64 {
    passes * k * n
}

/// Arithmetic time estimate in seconds for `evaluations` calls of `tau_ms`
/// milliseconds each.
pub fn time_estimate(evaluations: u64, tau_ms: f64) -> f64 {
    evaluations as f64 * tau_ms / 1000.0
}

const MINUTE: f64 = 60.0;
const HOUR: f64 = 3600.0;
const DAY: f64 = 86_400.0;
const YEAR: f64 = 365.0 * DAY;

/// Short human form in the style of a complexity table: exact values below a
/// minute (`1 ms`, `0.36 s`), one-decimal approximations above
/// (`≈13.5 min`, `≈17.8 h`, `≈20.8 yr`).
pub fn format_duration(seconds: f64) -> String {
    fn trimmed(v: f64, decimals: usize) -> String {
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').into()
        } else {
            s
        }
    }
    if seconds < 0.01 {
        format!("{} ms", trimmed(seconds * 1000.0, 3))
    } else if seconds < MINUTE {
        format!("{} s", trimmed(seconds, 2))
    } else if seconds < HOUR {
        format!("≈{:.1} min", seconds / MINUTE)
    } else if seconds < DAY {
        format!("≈{:.1} h", seconds / HOUR)
    } else if seconds < YEAR {
        format!("≈{:.1} d", seconds / DAY)
    } else {
        format!("≈{:.1} yr", seconds / YEAR)
    }
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Best point of a (partial) exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub indices: Vec<usize>,
    pub value: f64,
    pub evaluations: u64,
}

impl Incumbent {
    /// Keeps the higher value; equal values go to the lexicographically
    /// smaller index vector. Evaluation counts add up.
    pub fn merge(self, other: Incumbent) -> Incumbent {
        let evaluations = self.evaluations + other.evaluations;
        let take_other = other.value > self.value
            || (other.value == self.value && other.indices < self.indices)
            || self.indices.is_empty();
        let (indices, value) = if take_other && !other.indices.is_empty() {
            (other.indices, other.value)
        } else {
            (self.indices, self.value)
        };
        Incumbent { indices, value, evaluations }
    }
}

/// Enumerates every configuration whose first-slot index lies in `first`, in
/// lexicographic order. Used directly by partitioned (parallel) search.
pub fn enumerate_partition<F>(space: &SearchSpace, mut objective: F, first: Range<usize>) -> Incumbent
where
    F: FnMut(&PinchConfiguration) -> f64,
{
    let mut best = Incumbent { indices: Vec::new(), value: f64::NEG_INFINITY, evaluations: 0 };
    if space.slots.is_empty() || first.is_empty() {
        return best;
    }
    let mut idx = vec![0usize; space.slots.len()];
    idx[0] = first.start;
    loop {
        let v = score(objective(&space.configuration(&idx)));
        best.evaluations += 1;
        if best.indices.is_empty() || v > best.value {
            best.value = v;
            best.indices = idx.clone();
        }
        // Odometer, last slot fastest.
        let mut pos = space.slots.len() - 1;
        loop {
            idx[pos] += 1;
            let limit = if pos == 0 { first.end } else { space.slots[pos].candidates.len() };
            if idx[pos] < limit {
                break;
            }
            if pos == 0 {
                return best;
            }
            idx[pos] = 0;
            pos -= 1;
        }
    }
}

fn finish(space: &SearchSpace, inc: Incumbent, passes: usize, trace: Vec<f64>) -> SearchResult {
    SearchResult {
        best: space.configuration(&inc.indices),
        best_value: inc.value,
        est_time_seconds: time_estimate(inc.evaluations, DEFAULT_TAU_MS),
        evaluations: inc.evaluations,
        best_indices: inc.indices,
        passes,
        power: None,
        trace,
    }
}

impl SearchResult {
    /// Result of an exhaustive enumeration assembled from merged partitions.
    pub fn from_incumbent(space: &SearchSpace, inc: Incumbent) -> Self {
        let value = inc.value;
        finish(space, inc, 0, vec![value])
    }
}

/// Refuses search spaces larger than `cap`.
pub fn check_budget(space: &SearchSpace, cap: u128) -> Result<u128> {
    match space.size() {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::BudgetExceeded { evaluations: n, cap }),
        None => Err(Error::BudgetExceeded { evaluations: u128::MAX, cap }),
    }
}

/// Exhaustive search. Returns the global optimum; ties resolve to the
/// lexicographically smallest index vector.
pub fn brute_force<F>(space: &SearchSpace, objective: F, cap: u128) -> Result<SearchResult>
where
    F: FnMut(&PinchConfiguration) -> f64,
{
    check_budget(space, cap)?;
    if space.slots.is_empty() {
        return Err(Error::InvalidConfig("search space has no slots".into()));
    }
    let inc = enumerate_partition(space, objective, 0..space.slots[0].candidates.len());
    Ok(SearchResult::from_incumbent(space, inc))
}

/// Cyclic coordinate search: each sweep evaluates all candidates of one slot
/// with the others held, then keeps the best (lowest index on ties). `passes`
/// full cycles over the slots are made, so the objective never decreases from
/// sweep to sweep and exactly `passes · Σ N_slot` calls are spent.
pub fn coordinate_grid<F>(
    space: &SearchSpace,
    mut objective: F,
    passes: usize,
    start: Option<&[usize]>,
) -> Result<SearchResult>
where
    F: FnMut(&PinchConfiguration) -> f64,
{
    if passes == 0 {
        return Err(Error::InvalidConfig("coordinate search needs at least one pass".into()));
    }
    let mut idx = match start {
        Some(s) if s.len() == space.slots.len() => s.to_vec(),
        Some(s) => return Err(Error::DimensionMismatch { expected: space.slots.len(), actual: s.len() }),
        None => space.default_start(),
    };
    let mut evaluations = 0u64;
    let mut value = f64::NEG_INFINITY;
    let mut trace = Vec::with_capacity(passes * space.slots.len());
    for _ in 0..passes {
        for slot in 0..space.slots.len() {
            let mut best_i = idx[slot];
            let mut best_v = f64::NEG_INFINITY;
            let mut first = true;
            for i in 0..space.slots[slot].candidates.len() {
                idx[slot] = i;
                let v = score(objective(&space.configuration(&idx)));
                evaluations += 1;
                if first || v > best_v {
                    best_v = v;
                    best_i = i;
                    first = false;
                }
            }
            idx[slot] = best_i;
            value = best_v;
            trace.push(value);
        }
    }
    Ok(finish(space, Incumbent { indices: idx, value, evaluations }, passes, trace))
}

/// Scalar objectives over a rate report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SumRate,
    MinRate,
    EnergyEfficiency,
    /// Sum rate minus `mu · Σ max(0, qos_k − rate_k)`.
    Penalized { mu: f64 },
}

impl Objective {
    pub fn value(&self, config: &ScenarioConfig, report: &RateReport) -> f64 {
        match *self {
            Objective::SumRate => report.sum_rate,
            Objective::MinRate => report.min_rate,
            Objective::EnergyEfficiency => report.energy_efficiency,
            Objective::Penalized { mu } => report.sum_rate - mu * qos_shortfall(config, report),
        }
    }
}

/// `Σ max(0, qos_k − rate_k)`.
pub fn qos_shortfall(config: &ScenarioConfig, report: &RateReport) -> f64 {
    report
        .per_user
        .iter()
        .zip(&config.users)
        .map(|(r, u)| (u.qos_min_rate - r).max(0.0))
        .sum()
}

/// Closure evaluating `objective` on a pinch configuration for fixed power and
/// association. Invalid configurations score `-∞`.
pub fn rate_objective<'a>(
    config: &'a ScenarioConfig,
    objective: Objective,
    power: &'a PowerAllocation,
    assignment: &'a Assignment,
) -> impl FnMut(&PinchConfiguration) -> f64 + 'a {
    move |pinch| match evaluate(config, pinch, power, assignment) {
        Ok(report) => objective.value(config, &report),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Options of the alternating position/power search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternatingOptions {
    pub pas_per_waveguide: usize,
    /// Coordinate passes per position half-step.
    pub passes: usize,
    /// Stop when a full round improves energy efficiency by less than this.
    pub tolerance: f64,
    pub max_rounds: usize,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        Self { pas_per_waveguide: 1, passes: 1, tolerance: 1e-6, max_rounds: 20 }
    }
}

/// `levels` uniform levels in `(0, max_power]`.
pub fn default_power_levels(max_power: f64, levels: usize) -> Vec<f64> {
    (1..=levels).map(|i| max_power * i as f64 / levels as f64).collect()
}

fn spacing_ok(config: &ScenarioConfig, pinch: &PinchConfiguration) -> bool {
    pinch.waveguides.iter().all(|sites| {
        sites.iter().enumerate().all(|(a, sa)| {
            sites[a + 1..]
                .iter()
                .all(|sb| !(sa.active && sb.active) || (sa.s - sb.s).abs() >= config.min_spacing)
        })
    })
}

/// Energy-efficiency maximization over antenna positions and per-waveguide
/// power levels by alternating a coordinate sweep over positions (power held)
/// with an exhaustive sweep over power levels (positions held).
///
/// Each waveguide's level is split equally among its nearest users. The
/// returned trace holds the efficiency after every half-step and never
/// decreases.
pub fn alternating_joint(config: &ScenarioConfig, levels: &[f64], opts: AlternatingOptions) -> Result<SearchResult> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig("power level set is empty".into()));
    }
    if opts.pas_per_waveguide == 0 || opts.passes == 0 || opts.max_rounds == 0 {
        return Err(Error::InvalidConfig("alternating search needs >= 1 antenna, pass and round".into()));
    }
    let assignment = Assignment::nearest(config);
    let space = SearchSpace::with_pas_per_waveguide(config, opts.pas_per_waveguide);
    let mut idx = space.default_start();
    let start = space.configuration(&idx);
    for (w, sites) in start.waveguides.iter().enumerate() {
        let ok = sites
            .windows(2)
            .all(|p| (p[1].s - p[0].s).abs() >= config.min_spacing);
        if !ok {
            return Err(Error::InfeasibleSpacing {
                waveguide: w,
                pas: opts.pas_per_waveguide,
                min_spacing: config.min_spacing,
            });
        }
    }

    let k_wg = config.waveguides.len();
    let top = levels
        .iter()
        .enumerate()
        .fold(0, |best, (i, &l)| if l > levels[best] { i } else { best });
    let mut level_idx = vec![top; k_wg];
    let budgets = |li: &[usize]| -> Vec<f64> { li.iter().map(|&i| levels[i]).collect() };
    let ee = |pinch: &PinchConfiguration, li: &[usize]| -> f64 {
        if !spacing_ok(config, pinch) {
            return f64::NEG_INFINITY;
        }
        let power = PowerAllocation::split_budgets(&budgets(li), &assignment);
        match evaluate(config, pinch, &power, &assignment) {
            Ok(r) => r.energy_efficiency,
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut evaluations = 0u64;
    let mut trace = Vec::new();
    let mut round_value = f64::NEG_INFINITY;
    let mut value = f64::NEG_INFINITY;
    for _ in 0..opts.max_rounds {
        // Positions, power held.
        let held = level_idx.clone();
        let pos = coordinate_grid(&space, |p| ee(p, &held), opts.passes, Some(&idx))?;
        evaluations += pos.evaluations;
        idx = pos.best_indices;
        value = pos.best_value;
        trace.push(value);

        // Power levels, positions held: exhaustive over levels^K.
        let pinch = space.configuration(&idx);
        let mut combo = vec![0usize; k_wg];
        let mut best_combo = level_idx.clone();
        let mut best_v = f64::NEG_INFINITY;
        let mut first = true;
        'combos: loop {
            let v = score(ee(&pinch, &combo));
            evaluations += 1;
            if first || v > best_v {
                best_v = v;
                best_combo = combo.clone();
                first = false;
            }
            let mut p = k_wg;
            loop {
                if p == 0 {
                    break 'combos;
                }
                p -= 1;
                combo[p] += 1;
                if combo[p] < levels.len() {
                    break;
                }
                combo[p] = 0;
            }
        }
        // The held combination is among those swept, so keeping the sweep's
        // best never loses efficiency; stay put on exact ties.
        if best_v > value {
            level_idx = best_combo;
            value = best_v;
        }
        trace.push(value);

        let improved = value - round_value;
        round_value = value;
        if improved < opts.tolerance {
            break;
        }
    }
    let mut result = finish(&space, Incumbent { indices: idx, value, evaluations }, opts.passes, trace);
    result.power = Some(budgets(&level_idx));
    Ok(result)
}
