//! Exhaustive minimum discrepancy for grids with at most 24 cells.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{enumerate_directions, line_length, GridShape, PartialColoring};

pub const EXACT_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactResult {
    pub value: i64,
    pub coloring: PartialColoring,
    /// Search nodes visited over all thresholds.
    pub nodes: u64,
}

/// Bit masks of every progression of length ≥ 2, grouped by their largest cell.
fn progressions_by_last_cell(shape: &GridShape) -> Vec<Vec<u32>> {
    let n = shape.cells();
    let d = shape.d();
    let coords = shape.coordinate_table();
    let strides = shape.strides();
    let mut by_last = vec![Vec::new(); n];
    if n < 2 {
        return by_last;
    }
    for b in enumerate_directions(shape, 2) {
        let step: isize = b.iter().zip(&strides).map(|(&bi, &s)| bi as isize * s as isize).sum();
        for cell in 0..n {
            let len = line_length(&coords[cell * d..(cell + 1) * d], &b, shape.dims());
            let mut mask = 1u32 << cell;
            let mut idx = cell as isize;
            let mut last = cell;
            for _ in 1..len {
                idx += step;
                mask |= 1u32 << idx;
                last = last.max(idx as usize);
                by_last[last].push(mask);
            }
        }
    }
    for masks in &mut by_last {
        masks.sort_unstable();
        masks.dedup();
    }
    by_last
}

/// `min_χ max_A |χ(A)|` over full colorings, by depth-first search with the
/// first cell fixed to `+1`. Thresholds are tried upward from 1.
pub fn exact_min_disc(shape: &GridShape) -> Result<ExactResult> {
    exact_min_disc_capped(shape, EXACT_CAP)
}

pub fn exact_min_disc_capped(shape: &GridShape, cap: usize) -> Result<ExactResult> {
    let n = shape.cells();
    let cap = cap.min(EXACT_CAP);
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let by_last = progressions_by_last_cell(shape);
    let mut nodes = 0u64;
    for t in 1..=n as i64 {
        let mut pos = 1u32;
        if search(1, n, t, &by_last, &mut pos, &mut nodes) {
            let values = (0..n).map(|i| if pos >> i & 1 == 1 { 1 } else { -1 }).collect();
            let coloring = PartialColoring::from_values(shape.clone(), values)?;
            return Ok(ExactResult { value: t, coloring, nodes });
        }
    }
    Err(Error::Invariant("no coloring within |grid|".into()))
}

fn search(cell: usize, n: usize, t: i64, by_last: &[Vec<u32>], pos: &mut u32, nodes: &mut u64) -> bool {
    if cell == n {
        return true;
    }
    for bit in [1u32, 0] {
        *nodes += 1;
        if bit == 1 {
            *pos |= 1 << cell;
        } else {
            *pos &= !(1 << cell);
        }
        let ok = by_last[cell].iter().all(|&mask| {
            let sum = 2 * (mask & *pos).count_ones() as i64 - mask.count_ones() as i64;
            sum.abs() <= t
        });
        if ok && search(cell + 1, n, t, by_last, pos, nodes) {
            return true;
        }
    }
    *pos &= !(1 << cell);
    false
}
