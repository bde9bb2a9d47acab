mod common;

use apdisc::canonical::{directions_for, CanonicalFamily};
use apdisc::grid::disc_eval;
use apdisc::par::Execution;
use apdisc::rng::{stream, Purpose};
use apdisc::solver::schedule::{dyadic_b_sum_check, dyadic_sizes, schedule_feasibility, series_value, default_c};
use apdisc::solver::{
    compose_general, exact_min_disc, full_color, partial_color_step, slice_extend, slice_threshold, DeltaSchedule,
    Method, SolveConfig, StepResult, WalkParams, CALIBRATED_DELTA_SCALE,
};
use apdisc::{Error, GridShape, PartialColoring, Point};
use common::{brute_disc, from_mask, random_full, random_subset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn step(points: &[Point], shape: &GridShape, delta_scale: f64, seed: u64) -> StepResult {
    let sched = SolveConfig::default().schedule_for(shape, points.len());
    let mut rng = stream(seed, 0, Purpose::Walk);
    partial_color_step(points, shape, &sched, delta_scale, &WalkParams::default(), Execution::default(), &mut rng).unwrap()
}

/// Every canonical block of `X` against its allowance: `delta_scale · b(s)`
/// always, and `⌊Δ_s⌋` for the sizes the walk enforced.
fn assert_blocks_within(points: &[Point], shape: &GridShape, delta_scale: f64, r: &StepResult) {
    let sched = SolveConfig::default().schedule_for(shape, points.len());
    let family = CanonicalFamily::new(points);
    let mut checked = 0;
    for s in dyadic_sizes(points.len()).filter(|&s| s >= 2) {
        let enforced = r.walk.enforced.iter().find(|(size, _)| *size == s).map(|(_, lim)| lim.floor() as i64);
        for b in directions_for(points, s) {
            for (_, pts) in family.blocks(&b, s) {
                let sum: i64 = pts.iter().map(|p| r.coloring.get(p).unwrap() as i64).sum();
                if let Some(lim) = enforced {
                    assert!(sum.abs() <= lim, "size {s} along {b:?}: {sum} > {lim}");
                    assert!(sum.abs() as f64 <= delta_scale * sched.b(s as f64));
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 0 || points.len() < 2);
}

fn colored(r: &StepResult, points: &[Point]) -> usize {
    points.iter().filter(|p| r.coloring.get(p).unwrap() != 0).count()
}

#[test]
fn single_point_step() {
    let shape = GridShape::new(vec![5, 5]).unwrap();
    let x = vec![Point(vec![3, 2])];
    let r = step(&x, &shape, 1.0, 0);
    assert_eq!(colored(&r, &x), 1);
    assert_eq!(r.coloring.zero_count(), 24);
}

#[test]
fn line_of_64_step() {
    let shape = GridShape::new(vec![64]).unwrap();
    let x: Vec<Point> = shape.points().collect();
    for ds in [1.0, CALIBRATED_DELTA_SCALE] {
        let r = step(&x, &shape, ds, 1);
        assert!(colored(&r, &x) >= 7, "{ds}: {}", colored(&r, &x));
        assert_eq!(r.walk.colored, colored(&r, &x));
        assert!(r.walk.max_ratio <= 1.0 + 1e-9);
        assert_blocks_within(&x, &shape, ds, &r);
        assert!(disc_eval(&r.coloring).value as f64 <= r.bound);
    }
}

#[test]
fn square_of_16_step() {
    let shape = GridShape::new(vec![16, 16]).unwrap();
    let x: Vec<Point> = shape.points().collect();
    for ds in [1.0, CALIBRATED_DELTA_SCALE] {
        let r = step(&x, &shape, ds, 2);
        assert!(colored(&r, &x) >= 26);
        assert_blocks_within(&x, &shape, ds, &r);
        assert!(disc_eval(&r.coloring).value as f64 <= r.bound);
    }
}

#[test]
fn step_on_a_scattered_subset() {
    let shape = GridShape::new(vec![12, 12]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_subset(&shape, 0.4, &mut rng);
    let r = step(&x, &shape, CALIBRATED_DELTA_SCALE, 3);
    assert_blocks_within(&x, &shape, CALIBRATED_DELTA_SCALE, &r);
    let outside = shape.points().filter(|p| !x.contains(p)).all(|p| r.coloring.get(&p) == Some(0));
    assert!(outside);
}

#[test]
fn step_rejects_bad_input() {
    let shape = GridShape::new(vec![4]).unwrap();
    let sched = DeltaSchedule::plain(&shape);
    let mut rng = stream(0, 0, Purpose::Walk);
    let p = WalkParams::default();
    let e = Execution::Sequential;
    assert!(partial_color_step(&[], &shape, &sched, 1.0, &p, e, &mut rng).is_err());
    let dup = vec![Point(vec![1]), Point(vec![1])];
    assert!(partial_color_step(&dup, &shape, &sched, 1.0, &p, e, &mut rng).is_err());
    let out = vec![Point(vec![5])];
    assert!(matches!(partial_color_step(&out, &shape, &sched, 1.0, &p, e, &mut rng), Err(Error::OutOfGrid(_))));
}

#[test]
fn full_colorings_stay_within_their_ledger() {
    for dims in [vec![1], vec![256], vec![16, 16], vec![6, 5, 4]] {
        let shape = GridShape::new(dims).unwrap();
        for config in [SolveConfig::default(), SolveConfig { seed: 5, ..SolveConfig::calibrated() }] {
            let sol = full_color(&shape, &config).unwrap();
            assert!(sol.coloring.is_full());
            let disc = disc_eval(&sol.coloring).value;
            assert!(disc as f64 <= sol.bound, "{shape}: {disc} > {}", sol.bound);
            assert!(sol.rounds.iter().all(|r| r.colored * 10 >= r.m));
            let total: usize = sol.rounds.iter().map(|r| r.colored).sum();
            assert_eq!(total, shape.cells());
        }
    }
}

#[test]
fn same_seed_same_coloring() {
    let shape = GridShape::new(vec![24, 24]).unwrap();
    let config = SolveConfig { seed: 17, ..SolveConfig::calibrated() };
    let a = full_color(&shape, &config).unwrap();
    let b = full_color(&shape, &config).unwrap();
    assert_eq!(a, b);
    let seq = full_color(&shape, &SolveConfig { execution: Execution::Sequential, ..config.clone() }).unwrap();
    assert_eq!(a.coloring, seq.coloring);
    let other = full_color(&shape, &SolveConfig { seed: 18, ..config }).unwrap();
    assert_ne!(a.coloring, other.coloring);
}

#[test]
fn random_and_exact_methods() {
    let shape = GridShape::new(vec![3, 3]).unwrap();
    let exact = full_color(&shape, &SolveConfig { method: Method::Exact, ..SolveConfig::default() }).unwrap();
    let brute = (0..1u64 << 9).map(|m| brute_disc(&from_mask(&shape, m))).min().unwrap();
    assert_eq!(disc_eval(&exact.coloring).value, brute);
    let big = GridShape::new(vec![5, 5]).unwrap();
    assert!(full_color(&big, &SolveConfig { method: Method::Exact, ..SolveConfig::default() }).is_err());
    let random = full_color(&big, &SolveConfig { method: Method::Random, ..SolveConfig::default() }).unwrap();
    assert!(random.coloring.is_full());
    assert!(SolveConfig { delta_scale: 0.0, ..SolveConfig::default() }.validate(&big).is_err());
}

#[test]
fn exact_small_lines() {
    assert_eq!(exact_min_disc(&GridShape::new(vec![2]).unwrap()).unwrap().value, 1);
    let four = GridShape::new(vec![4]).unwrap();
    let brute = (0..16).map(|m| brute_disc(&from_mask(&four, m))).min().unwrap();
    assert_eq!(exact_min_disc(&four).unwrap().value, brute);
}

#[test]
fn slice_of_one_keeps_the_discrepancy() {
    let base = GridShape::new(vec![9]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let chi = random_full(&base, &mut rng);
    let out = slice_extend(&chi, 1, &SolveConfig::default(), 0).unwrap();
    assert_eq!(out.coloring.shape().dims(), &[9, 1]);
    let flat: Vec<i8> = out.coloring.values().to_vec();
    assert!(flat == chi.values() || flat == chi.negated().values());
    assert_eq!(disc_eval(&out.coloring).value, disc_eval(&chi).value);
}

#[test]
fn slice_of_a_line_by_four() {
    let base = GridShape::new(vec![8]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..10 {
        let chi = random_full(&base, &mut rng);
        let out = slice_extend(&chi, 4, &SolveConfig { seed, ..SolveConfig::default() }, 0).unwrap();
        let limit = (disc_eval(&chi).value as f64).max(out.threshold);
        assert!(disc_eval(&out.coloring).value as f64 <= limit);
        assert!((out.threshold - slice_threshold(out.coloring.shape())).abs() < 1e-12);
    }
}

#[test]
fn slice_of_constant_pair() {
    let chi = PartialColoring::constant(GridShape::new(vec![2]).unwrap(), 1).unwrap();
    let out = slice_extend(&chi, 2, &SolveConfig::default(), 0).unwrap();
    // Enumerating the progressions that move along the new axis gives at most 2 in absolute value.
    assert!(out.cross_disc <= 2);
    assert!(2.0 <= (6.0 * 2.0 * 8f64.ln()).sqrt());
    assert!(slice_extend(&PartialColoring::zeros(GridShape::new(vec![2]).unwrap()), 2, &SolveConfig::default(), 0).is_err());
}

#[test]
fn composition_of_long_and_short_axes() {
    let shape = GridShape::new(vec![64, 2]).unwrap();
    let c = compose_general(&shape, &SolveConfig::calibrated()).unwrap();
    assert_eq!(c.t, 1);
    assert_eq!(c.slices.len(), 1);
    assert_eq!(c.slices[0].axis, 1);
    assert!(disc_eval(&c.coloring).value as f64 <= c.bound);

    let swapped = GridShape::new(vec![2, 64]).unwrap();
    let c2 = compose_general(&swapped, &SolveConfig::calibrated()).unwrap();
    assert_eq!(c2.coloring.shape(), &swapped);
    assert_eq!(c2.slices[0].axis, 0);
    assert_eq!(disc_eval(&c2.coloring).value, disc_eval(&c.coloring).value);

    let three = GridShape::new(vec![32, 8, 2]).unwrap();
    let c3 = compose_general(&three, &SolveConfig::calibrated()).unwrap();
    assert_eq!(c3.slices.len(), 3 - c3.t);
    assert!(c3.coloring.is_full());
    assert!(disc_eval(&c3.coloring).value as f64 <= c3.bound);
}

#[test]
fn near_cube_needs_no_slices() {
    let shape = GridShape::new(vec![12, 10]).unwrap();
    let c = compose_general(&shape, &SolveConfig::calibrated()).unwrap();
    assert_eq!(c.t, 2);
    assert!(c.slices.is_empty());
}

#[test]
fn schedule_series_and_sums() {
    for d in 1..=3 {
        for p in [0, 3, 6, 9] {
            assert!(series_value(default_c(d), 10f64.powi(p), d) <= 1.0);
        }
    }
    let (lhs, rhs) = dyadic_b_sum_check(default_c(2), 1e6, 2, 4.0, 4096.0);
    assert!(lhs <= rhs);
    let shape = GridShape::new(vec![256]).unwrap();
    let rep = schedule_feasibility(&DeltaSchedule::plain(&shape), &shape, 256);
    assert!(rep.ratio <= 1.0);
}
