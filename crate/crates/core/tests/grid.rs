mod common;

use apdisc::grid::{chi_sum, disc_eval, disc_eval_sequential, enumerate_directions};
use apdisc::io::{read_coloring, write_coloring};
use apdisc::{ApSpec, GridShape, PartialColoring, Point};
use common::{brute_disc, random_partial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_shape() -> impl Strategy<Value = GridShape> {
    prop::collection::vec(1usize..=5, 1..=3)
        .prop_filter("at most 24 cells", |d| d.iter().product::<usize>() <= 24)
        .prop_map(|d| GridShape::new(d).unwrap())
}

fn shape_and_coloring() -> impl Strategy<Value = PartialColoring> {
    small_shape().prop_flat_map(|shape| {
        let n = shape.cells();
        prop::collection::vec(-1i8..=1, n).prop_map(move |v| PartialColoring::from_values(shape.clone(), v).unwrap())
    })
}

proptest! {
    #[test]
    fn scan_matches_enumeration(chi in shape_and_coloring()) {
        let fast = disc_eval(&chi);
        prop_assert_eq!(fast.value, brute_disc(&chi));
        prop_assert_eq!(disc_eval_sequential(&chi).value, fast.value);
        if fast.value > 0 {
            prop_assert!(fast.witness.inside(chi.shape()));
            prop_assert_eq!(chi_sum(&chi, &fast.witness).unwrap().abs(), fast.value);
        }
    }

    #[test]
    fn disc_ignores_axis_order(chi in shape_and_coloring(), seed in any::<u64>()) {
        let d = chi.shape().d();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(&mut perm[..], &mut rng);
        let moved = chi.permuted(&perm).unwrap();
        prop_assert_eq!(disc_eval(&moved).value, disc_eval(&chi).value);
        prop_assert_eq!(disc_eval(&chi.negated()).value, disc_eval(&chi).value);
    }

    #[test]
    fn coloring_file_round_trips(chi in shape_and_coloring()) {
        let text = write_coloring(&chi);
        prop_assert_eq!(read_coloring(&text).unwrap(), chi);
    }
}

#[test]
fn constant_line() {
    let chi = PartialColoring::constant(GridShape::new(vec![8]).unwrap(), 1).unwrap();
    let r = disc_eval(&chi);
    assert_eq!(r.value, 8);
    assert_eq!(r.witness.len, 8);
}

#[test]
fn zero_coloring_has_zero_discrepancy() {
    let chi = PartialColoring::zeros(GridShape::new(vec![3, 4]).unwrap());
    assert_eq!(disc_eval(&chi).value, 0);
}

#[test]
fn larger_random_grids_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dims in [vec![40], vec![9, 7], vec![4, 4, 4]] {
        let shape = GridShape::new(dims).unwrap();
        for _ in 0..5 {
            let chi = random_partial(&shape, &mut rng);
            assert_eq!(disc_eval(&chi).value, brute_disc(&chi), "{shape}");
        }
    }
}

#[test]
fn directions_fit_the_requested_length() {
    let shape = GridShape::new(vec![7, 4]).unwrap();
    for b in enumerate_directions(&shape, 3) {
        let start = Point(vec![if b[0] < 0 { 7 } else { 1 }, if b[1] < 0 { 4 } else { 1 }]);
        assert!(ApSpec::new(start, b.clone(), 3).unwrap().inside(&shape), "{b:?}");
    }
    // (1, 2) cannot fit three points in four rows... (1,1),(2,3),(3,5) leaves the grid.
    assert!(!enumerate_directions(&shape, 3).contains(&vec![1, 2]));
}

#[test]
fn out_of_grid_progression_is_rejected() {
    let chi = PartialColoring::zeros(GridShape::new(vec![4]).unwrap());
    let ap = ApSpec::new(Point(vec![3]), vec![1], 3).unwrap();
    assert!(chi_sum(&chi, &ap).is_err());
}

#[test]
fn malformed_files_are_rejected() {
    for text in ["", "1\n3\n1 1", "1\n2\n1 2", "2\n2 2\n1 1 1 1 1", "0\n"] {
        assert!(read_coloring(text).is_err(), "{text:?}");
    }
}
