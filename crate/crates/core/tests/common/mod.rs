//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the scan-based code it is used to check.
#![allow(dead_code)]

use apdisc::{GridShape, PartialColoring, Point};
use rand::Rng;

/// Every progression of every length inside the grid, summed point by point.
pub fn brute_disc(chi: &PartialColoring) -> i64 {
    let shape = chi.shape();
    let dims: Vec<i64> = shape.dims().iter().map(|&n| n as i64).collect();
    let d = dims.len();
    // Length-one progressions exist for any difference, even when every side is 1.
    let mut best = chi.values().iter().map(|&v| (v as i64).abs()).max().unwrap_or(0);
    let starts: Vec<Point> = shape.points().collect();
    for b in all_differences(&dims) {
        for a in &starts {
            let mut sum = 0i64;
            let mut x = a.0.clone();
            while (0..d).all(|i| x[i] >= 1 && x[i] <= dims[i]) {
                sum += chi.get(&Point(x.clone())).unwrap() as i64;
                best = best.max(sum.abs());
                for i in 0..d {
                    x[i] += b[i];
                }
            }
        }
    }
    best
}

/// Nonzero `b` with `|b_i| < N_i`, both signs.
pub fn all_differences(dims: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &n in dims {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-(n - 1)..=n - 1).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.retain(|b| b.iter().any(|&v| v != 0));
    out
}

pub fn random_full<R: Rng>(shape: &GridShape, rng: &mut R) -> PartialColoring {
    let values = (0..shape.cells()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    PartialColoring::from_values(shape.clone(), values).unwrap()
}

pub fn random_partial<R: Rng>(shape: &GridShape, rng: &mut R) -> PartialColoring {
    let values = (0..shape.cells()).map(|_| rng.gen_range(-1i8..=1)).collect();
    PartialColoring::from_values(shape.clone(), values).unwrap()
}

pub fn from_mask(shape: &GridShape, mask: u64) -> PartialColoring {
    let values = (0..shape.cells()).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
    PartialColoring::from_values(shape.clone(), values).unwrap()
}

/// Random subset of the grid with each point kept with probability `p`.
pub fn random_subset<R: Rng>(shape: &GridShape, p: f64, rng: &mut R) -> Vec<Point> {
    shape.points().filter(|_| rng.gen_bool(p)).collect()
}

/// Shapes with `∏N ≤ cap`, sides sorted descending, `d ≤ 3`.
pub fn shapes_up_to(cap: usize) -> Vec<GridShape> {
    let mut out = Vec::new();
    for a in 1..=cap {
        out.push(vec![a]);
        for b in 1..=a {
            if a * b > cap {
                break;
            }
            out.push(vec![a, b]);
            for c in 1..=b {
                if a * b * c > cap {
                    break;
                }
                out.push(vec![a, b, c]);
            }
        }
    }
    out.into_iter().map(|d| GridShape::new(d).unwrap()).collect()
}
