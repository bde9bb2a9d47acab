//! Low-discrepancy colorings.
//!
//! [`full_color`] repeats a partial-coloring round on the uncolored points
//! until the grid is colored, keeping a ledger of the per-round guarantee.
//! [`slice_extend`] and [`compose_general`] handle grids with short axes, and
//! [`exact_min_disc`] solves tiny grids outright.

mod exact;
pub mod schedule;
mod walk;

use rand::Rng;
use serde::Serialize;

use crate::bounds::shape_delta;
use crate::error::{Error, Result};
use crate::grid::{disc_eval_with, GridShape, PartialColoring, Point};
use crate::par::Execution;
use crate::rng::{stream, Purpose};

pub use exact::{exact_min_disc, exact_min_disc_capped, ExactResult, EXACT_CAP};
pub use schedule::DeltaSchedule;
pub use walk::{WalkOutcome, WalkParams};

/// Multiplier on `b(s)` that makes the allowances bind at desk-scale grid
/// sizes: it brings `delta_scale · c` to about 1, so blocks at the crossover
/// size get `Δ ≈ √s`. With `delta_scale = 1` every allowance exceeds its
/// block size on any grid that fits in memory and the walk is unconstrained.
pub const CALIBRATED_DELTA_SCALE: f64 = 1.0 / 2500.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    PartialColoring,
    Random,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScheduleChoice {
    /// Plain schedule for cubes, three-branch when the shape condition holds.
    Auto,
    Plain,
    ThreeBranch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveConfig {
    pub method: Method,
    pub seed: u64,
    pub delta_scale: f64,
    pub max_rounds: usize,
    /// Retries of a round that colors fewer than a tenth of its points; each
    /// retry multiplies `delta_scale` by 1.5.
    pub max_retries: usize,
    pub exact_cap: usize,
    pub schedule: ScheduleChoice,
    /// Constant of the refined counting bound used by the three-branch schedule.
    pub c0: f64,
    /// Exponent `κ` in `K = 5^{d+1} ∏N (m/∏N)^κ`; 0 keeps `K` fixed across rounds.
    pub density_exponent: f64,
    pub walk: WalkParams,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: Method::PartialColoring,
            seed: 0,
            delta_scale: 1.0,
            max_rounds: 64,
            max_retries: 8,
            exact_cap: EXACT_CAP,
            schedule: ScheduleChoice::Auto,
            c0: 1.0,
            density_exponent: 0.0,
            walk: WalkParams::default(),
            execution: Execution::default(),
        }
    }
}

impl SolveConfig {
    pub fn calibrated() -> Self {
        SolveConfig { delta_scale: CALIBRATED_DELTA_SCALE, ..SolveConfig::default() }
    }

    pub fn validate(&self, shape: &GridShape) -> Result<()> {
        if !(self.delta_scale > 0.0 && self.delta_scale.is_finite()) {
            return Err(Error::Precondition(format!("delta_scale must be positive, got {}", self.delta_scale)));
        }
        if self.method == Method::Exact && shape.cells() > self.exact_cap.min(EXACT_CAP) {
            return Err(Error::CapExceeded { size: shape.cells(), cap: self.exact_cap.min(EXACT_CAP) });
        }
        Ok(())
    }

    /// The schedule for a round on `m` of the grid's points.
    pub fn schedule_for(&self, shape: &GridShape, m: usize) -> DeltaSchedule {
        let three = match self.schedule {
            ScheduleChoice::Plain => None,
            ScheduleChoice::ThreeBranch => Some(shape_delta(shape).unwrap_or(0.0)),
            ScheduleChoice::Auto => {
                if shape.min_side() == shape.max_side() {
                    None
                } else {
                    shape_delta(shape)
                }
            }
        };
        match three {
            Some(delta) => DeltaSchedule::three_branch(shape, m, delta, self.c0),
            None => {
                let d = shape.d();
                let rho = m as f64 / shape.cells() as f64;
                let k = 5f64.powi(d as i32 + 1) * shape.cells() as f64 * rho.powf(self.density_exponent);
                DeltaSchedule::with_k(d, schedule::default_c(d), k)
            }
        }
    }
}

/// One partial-coloring round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Points still uncolored at the start of the round.
    pub m: usize,
    pub colored: usize,
    pub attempts: usize,
    pub delta_scale: f64,
    pub steps: usize,
    pub active: usize,
    pub blocks: usize,
    pub max_ratio: f64,
    /// `2 Σ_s B(s)` over dyadic `s`, with `B(s) = ⌊Δ_s⌋` for enforced sizes and
    /// `s` otherwise: bounds every progression sum on this round's coloring.
    pub bound: f64,
    /// `2 · delta_scale · Σ_s b(s)`.
    pub schedule_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub coloring: PartialColoring,
    pub rounds: Vec<RoundRecord>,
    /// Guaranteed upper bound on the discrepancy of `coloring`.
    pub bound: f64,
    /// Sum of the schedule-form round bounds.
    pub schedule_bound: f64,
    pub method: Method,
}

/// Result of [`partial_color_step`]: a partial coloring supported on `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepResult {
    pub coloring: PartialColoring,
    pub walk: WalkOutcome,
    pub bound: f64,
    pub schedule_bound: f64,
}

fn round_bounds(shape: &GridShape, sched: &DeltaSchedule, delta_scale: f64, enforced: &[(usize, f64)]) -> (f64, f64) {
    let mut rigorous = 0.0;
    let mut form = 0.0;
    for s in schedule::dyadic(shape.max_side()) {
        form += sched.b(s as f64);
        rigorous += match enforced.iter().find(|(size, _)| *size == s) {
            Some((_, lim)) => (lim + 1e-9).floor(),
            None => s as f64,
        };
    }
    (2.0 * rigorous, 2.0 * delta_scale * form)
}

/// Color part of `points` so that every constrained canonical block `S` of
/// the point set has `|χ(S)| ≤ delta_scale · b(|S|)`.
pub fn partial_color_step<R: Rng>(
    points: &[Point],
    shape: &GridShape,
    sched: &DeltaSchedule,
    delta_scale: f64,
    params: &WalkParams,
    exec: Execution,
    rng: &mut R,
) -> Result<StepResult> {
    if points.is_empty() {
        return Err(Error::Precondition("empty point set".into()));
    }
    let mut idx = Vec::with_capacity(points.len());
    for p in points {
        idx.push(shape.index_of(&p.0).ok_or_else(|| Error::OutOfGrid(p.0.clone()))?);
    }
    let mut seen = idx.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != idx.len() {
        return Err(Error::Precondition("repeated points".into()));
    }
    Ok(step_on_indices(&idx, shape, sched, delta_scale, params, exec, rng))
}

fn step_on_indices<R: Rng>(
    idx: &[usize],
    shape: &GridShape,
    sched: &DeltaSchedule,
    delta_scale: f64,
    params: &WalkParams,
    exec: Execution,
    rng: &mut R,
) -> StepResult {
    let system = walk::System::new(shape, idx, |s| delta_scale * sched.b(s as f64), params.budget, exec);
    let outcome = walk::run_walk(&system, params, exec, rng);
    let mut coloring = PartialColoring::zeros(shape.clone());
    for (&cell, &v) in idx.iter().zip(&outcome.values) {
        coloring.set_index(cell, v);
    }
    let (bound, schedule_bound) = round_bounds(shape, sched, delta_scale, &outcome.enforced);
    StepResult { coloring, walk: outcome, bound, schedule_bound }
}

/// Color the whole grid with the configured method.
pub fn full_color(shape: &GridShape, config: &SolveConfig) -> Result<Solution> {
    config.validate(shape)?;
    match config.method {
        Method::PartialColoring => partial_coloring_rounds(shape, config),
        Method::Random => {
            let mut rng = stream(config.seed, 0, Purpose::RandomColoring);
            let values = (0..shape.cells()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            Ok(Solution {
                coloring: PartialColoring::from_values(shape.clone(), values)?,
                rounds: Vec::new(),
                bound: shape.max_side() as f64,
                schedule_bound: shape.max_side() as f64,
                method: Method::Random,
            })
        }
        Method::Exact => {
            let r = exact_min_disc_capped(shape, config.exact_cap)?;
            Ok(Solution {
                coloring: r.coloring,
                rounds: Vec::new(),
                bound: r.value as f64,
                schedule_bound: r.value as f64,
                method: Method::Exact,
            })
        }
    }
}

fn partial_coloring_rounds(shape: &GridShape, config: &SolveConfig) -> Result<Solution> {
    let mut chi = PartialColoring::zeros(shape.clone());
    let mut remaining: Vec<usize> = (0..shape.cells()).collect();
    let mut rounds = Vec::new();
    for round in 0..config.max_rounds {
        if remaining.is_empty() {
            break;
        }
        let m = remaining.len();
        let sched = config.schedule_for(shape, m);
        let need = m.div_ceil(10);
        let mut accepted = None;
        for attempt in 0..=config.max_retries {
            let scale = config.delta_scale * 1.5f64.powi(attempt as i32);
            let mut rng = stream(config.seed, (round * 16 + attempt) as u64, Purpose::Walk);
            let step = step_on_indices(&remaining, shape, &sched, scale, &config.walk, config.execution, &mut rng);
            if step.walk.colored >= need {
                accepted = Some((attempt, scale, step));
                break;
            }
        }
        let Some((attempt, scale, step)) = accepted else {
            return Err(Error::Solver(format!(
                "round {round}: fewer than {need} of {m} points colored after {} attempts",
                config.max_retries + 1
            )));
        };
        if step.walk.max_ratio > 1.0 + 1e-9 {
            return Err(Error::Invariant(format!("round {round}: block ratio {}", step.walk.max_ratio)));
        }
        for &cell in &remaining {
            let v = step.coloring.get_index(cell);
            if v != 0 {
                chi.set_index(cell, v);
            }
        }
        remaining.retain(|&cell| chi.get_index(cell) == 0);
        rounds.push(RoundRecord {
            round,
            m,
            colored: step.walk.colored,
            attempts: attempt + 1,
            delta_scale: scale,
            steps: step.walk.steps,
            active: step.walk.active,
            blocks: step.walk.blocks,
            max_ratio: step.walk.max_ratio,
            bound: step.bound,
            schedule_bound: step.schedule_bound,
        });
    }
    if !remaining.is_empty() {
        return Err(Error::Solver(format!(
            "{} points uncolored after {} rounds",
            remaining.len(),
            config.max_rounds
        )));
    }
    Ok(Solution {
        bound: rounds.iter().map(|r| r.bound).sum(),
        schedule_bound: rounds.iter().map(|r| r.schedule_bound).sum(),
        coloring: chi,
        rounds,
        method: Method::PartialColoring,
    })
}

/// `√(6 N_d ln(2 ∏N))`.
pub fn slice_threshold(shape: &GridShape) -> f64 {
    let nd = *shape.dims().last().unwrap() as f64;
    (6.0 * nd * (2.0 * shape.cells() as f64).ln()).sqrt()
}

pub const SLICE_RESAMPLE_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceOutcome {
    pub coloring: PartialColoring,
    pub signs: Vec<i8>,
    pub threshold: f64,
    /// Discrepancy over progressions whose difference moves along the new axis.
    pub cross_disc: i64,
    pub samples: usize,
}

/// `χ(x, x_d) = χ′(x) v(x_d)` with Rademacher `v`, resampled until the
/// progressions moving along the new axis stay under [`slice_threshold`].
pub fn slice_extend(chi_prime: &PartialColoring, nd: usize, config: &SolveConfig, round: u64) -> Result<SliceOutcome> {
    if !chi_prime.is_full() {
        return Err(Error::Precondition("slice_extend needs a full coloring".into()));
    }
    let mut dims = chi_prime.shape().dims().to_vec();
    dims.push(nd);
    let shape = GridShape::new(dims)?;
    let d = shape.d();
    let threshold = slice_threshold(&shape);
    let mut rng = stream(config.seed, round, Purpose::Slice);
    for samples in 1..=SLICE_RESAMPLE_CAP {
        let signs: Vec<i8> = (0..nd).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        // The last axis varies fastest in the row-major layout.
        let values: Vec<i8> = chi_prime
            .values()
            .iter()
            .flat_map(|&c| signs.iter().map(move |&v| c * v))
            .collect();
        let coloring = PartialColoring::from_values(shape.clone(), values)?;
        let cross = if nd == 1 {
            0
        } else {
            disc_eval_with(&coloring, config.execution, |b| b[d - 1] != 0).value
        };
        if cross as f64 <= threshold {
            return Ok(SliceOutcome { coloring, signs, threshold, cross_disc: cross, samples });
        }
    }
    Err(Error::Solver(format!("slice signs exceeded {threshold} in {SLICE_RESAMPLE_CAP} samples")))
}

/// `t`: the first `i` with `(∏_{j≤i} N_j)^{1/(i+1)} > N_{i+1} / √ln ∏N`
/// (`N_{d+1} = 1`), for dims sorted in decreasing order; `d` if none.
pub fn truncation_index(sorted_dims: &[usize]) -> usize {
    let d = sorted_dims.len();
    let total: f64 = sorted_dims.iter().map(|&n| n as f64).product();
    if total <= 1.0 {
        return d;
    }
    let root_log = total.ln().sqrt();
    let mut prefix = 1.0;
    for i in 1..=d {
        prefix *= sorted_dims[i - 1] as f64;
        let r = prefix.powf(1.0 / (i as f64 + 1.0));
        let next = sorted_dims.get(i).copied().unwrap_or(1) as f64;
        if r > next / root_log {
            return i;
        }
    }
    d
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Composition {
    pub coloring: PartialColoring,
    /// Axis order used internally: sorted axis `k` is original axis `perm[k]`.
    pub perm: Vec<usize>,
    pub t: usize,
    pub base: Solution,
    pub slices: Vec<SliceThreshold>,
    /// `max(base bound, slice thresholds)`.
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceThreshold {
    pub axis: usize,
    pub threshold: f64,
    pub cross_disc: i64,
    pub samples: usize,
}

/// Full coloring on the `t` longest axes, then one slice extension per
/// remaining axis.
pub fn compose_general(shape: &GridShape, config: &SolveConfig) -> Result<Composition> {
    config.validate(shape)?;
    let d = shape.d();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.sort_by(|&a, &b| shape.dims()[b].cmp(&shape.dims()[a]));
    let sorted = shape.permuted(&perm)?;
    let t = truncation_index(sorted.dims());
    let base_shape = GridShape::new(sorted.dims()[..t].to_vec())?;
    let base = full_color(&base_shape, config)?;
    let mut chi = base.coloring.clone();
    let mut bound = base.bound;
    let mut slices = Vec::new();
    for axis in t..d {
        let out = slice_extend(&chi, sorted.dims()[axis], config, axis as u64)?;
        bound = bound.max(out.threshold);
        slices.push(SliceThreshold {
            axis: perm[axis],
            threshold: out.threshold,
            cross_disc: out.cross_disc,
            samples: out.samples,
        });
        chi = out.coloring;
    }
    let mut inverse = vec![0; d];
    for (k, &p) in perm.iter().enumerate() {
        inverse[p] = k;
    }
    let coloring = chi.permuted(&inverse)?;
    Ok(Composition { coloring, perm, t, base, slices, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::disc_eval;

    #[test]
    fn truncation_rule() {
        assert_eq!(truncation_index(&[64, 2]), 1);
        assert_eq!(truncation_index(&[16, 16]), 2);
        assert_eq!(truncation_index(&[1]), 1);
    }

    #[test]
    fn single_cell() {
        let shape = GridShape::new(vec![1]).unwrap();
        let sol = full_color(&shape, &SolveConfig::default()).unwrap();
        assert!(sol.coloring.is_full());
        assert_eq!(disc_eval(&sol.coloring).value, 1);
    }

    #[test]
    fn line_within_ledger() {
        let shape = GridShape::new(vec![256]).unwrap();
        for config in [SolveConfig::default(), SolveConfig::calibrated()] {
            let sol = full_color(&shape, &config).unwrap();
            assert!(sol.coloring.is_full());
            assert!(disc_eval(&sol.coloring).value as f64 <= sol.bound);
        }
    }

    #[test]
    fn slice_of_constant_pair() {
        let chi = PartialColoring::constant(GridShape::new(vec![2]).unwrap(), 1).unwrap();
        let out = slice_extend(&chi, 2, &SolveConfig::default(), 0).unwrap();
        assert!(out.cross_disc as f64 <= out.threshold);
        assert!(out.cross_disc <= 2);
    }
}
