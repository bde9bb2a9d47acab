//! Grids, progressions, colorings and exact discrepancy evaluation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Largest number of cells accepted by [`GridShape::new`].
///
/// Prefix sums along a line never exceed the cell count, so any shape below
/// this cap is safe for `i64` accumulation and `usize` indexing.
pub const MAX_CELLS: usize = 1 << 40;

/// Side lengths `N₁..N_d` of the box `[N₁]×⋯×[N_d]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one axis is required".into()));
        }
        if let Some(i) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("axis {} has length 0", i + 1)));
        }
        let mut cells: usize = 1;
        for &n in &dims {
            cells = cells
                .checked_mul(n)
                .filter(|&c| c <= MAX_CELLS)
                .ok_or_else(|| Error::InvalidShape(format!("{dims:?} has too many cells")))?;
        }
        Ok(GridShape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    /// Number of cells `N₁⋯N_d`.
    pub fn cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn min_side(&self) -> usize {
        *self.dims.iter().min().unwrap()
    }

    pub fn max_side(&self) -> usize {
        *self.dims.iter().max().unwrap()
    }

    /// Row-major strides, axis 1 slowest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.d()];
        for i in (0..self.d().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.d()
            && coords
                .iter()
                .zip(&self.dims)
                .all(|(&x, &n)| x >= 1 && x <= n as i64)
    }

    /// Flat row-major index of a 1-based point.
    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        if !self.contains(coords) {
            return None;
        }
        let mut idx = 0usize;
        for (&x, &n) in coords.iter().zip(&self.dims) {
            idx = idx * n + (x - 1) as usize;
        }
        Some(idx)
    }

    pub fn point_of(&self, mut idx: usize) -> Point {
        let mut coords = vec![0i64; self.d()];
        for i in (0..self.d()).rev() {
            coords[i] = (idx % self.dims[i]) as i64 + 1;
            idx /= self.dims[i];
        }
        Point(coords)
    }

    /// All cell coordinates in row-major order, flattened (`cells × d`).
    pub(crate) fn coordinate_table(&self) -> Vec<i64> {
        let d = self.d();
        let mut table = vec![0i64; self.cells() * d];
        let mut cur = vec![1i64; d];
        for cell in 0..self.cells() {
            table[cell * d..(cell + 1) * d].copy_from_slice(&cur);
            for i in (0..d).rev() {
                if cur[i] < self.dims[i] as i64 {
                    cur[i] += 1;
                    break;
                }
                cur[i] = 1;
            }
        }
        table
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.cells()).map(|i| self.point_of(i))
    }

    /// The same grid with its axes reordered: new axis `k` is old axis `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<GridShape> {
        check_permutation(perm, self.d())?;
        GridShape::new(perm.iter().map(|&p| self.dims[p]).collect())
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

fn check_permutation(perm: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if perm.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: perm.len() });
    }
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::Precondition(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// An integer point; 1-based when it belongs to a grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, v: &[i64]) -> i64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn offset(&self, v: &[i64], k: i64) -> Point {
        Point(self.0.iter().zip(v).map(|(a, b)| a + k * b).collect())
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The progression `{a + i·b : 0 ≤ i < l}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApSpec {
    pub start: Point,
    pub diff: Vec<i64>,
    pub len: usize,
}

impl ApSpec {
    pub fn new(start: Point, diff: Vec<i64>, len: usize) -> Result<Self> {
        if start.d() != diff.len() {
            return Err(Error::DimensionMismatch { expected: start.d(), got: diff.len() });
        }
        if diff.iter().all(|&b| b == 0) {
            return Err(Error::InvalidProgression("difference vector is zero".into()));
        }
        if len == 0 {
            return Err(Error::InvalidProgression("length must be positive".into()));
        }
        Ok(ApSpec { start, diff, len })
    }

    pub fn d(&self) -> usize {
        self.diff.len()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len as i64).map(move |i| self.start.offset(&self.diff, i))
    }

    pub fn last(&self) -> Point {
        self.start.offset(&self.diff, self.len as i64 - 1)
    }

    /// A progression lies in a box iff both endpoints do.
    pub fn inside(&self, shape: &GridShape) -> bool {
        shape.contains(self.start.coords()) && shape.contains(self.last().coords())
    }

    /// Same point set, difference vector with its first nonzero entry positive.
    pub fn normalized(&self) -> ApSpec {
        if is_sign_normalized(&self.diff) {
            self.clone()
        } else {
            ApSpec {
                start: self.last(),
                diff: self.diff.iter().map(|b| -b).collect(),
                len: self.len,
            }
        }
    }
}

impl fmt::Display for ApSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let diff: Vec<String> = self.diff.iter().map(|x| x.to_string()).collect();
        let start: Vec<String> = self.start.0.iter().map(|x| x.to_string()).collect();
        write!(f, "a=({}) b=({}) l={}", start.join(","), diff.join(","), self.len)
    }
}

/// True when the first nonzero coordinate is positive.
pub fn is_sign_normalized(b: &[i64]) -> bool {
    b.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// A map `Ω → {−1, 0, +1}` stored densely in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialColoring {
    shape: GridShape,
    values: Vec<i8>,
}

impl PartialColoring {
    pub fn zeros(shape: GridShape) -> Self {
        let values = vec![0; shape.cells()];
        PartialColoring { shape, values }
    }

    pub fn constant(shape: GridShape, value: i8) -> Result<Self> {
        check_color(value)?;
        let values = vec![value; shape.cells()];
        Ok(PartialColoring { shape, values })
    }

    pub fn from_values(shape: GridShape, values: Vec<i8>) -> Result<Self> {
        if values.len() != shape.cells() {
            return Err(Error::DimensionMismatch { expected: shape.cells(), got: values.len() });
        }
        for &v in &values {
            check_color(v)?;
        }
        Ok(PartialColoring { shape, values })
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn get(&self, p: &Point) -> Option<i8> {
        self.shape.index_of(p.coords()).map(|i| self.values[i])
    }

    pub fn get_index(&self, idx: usize) -> i8 {
        self.values[idx]
    }

    pub fn set(&mut self, p: &Point, value: i8) -> Result<()> {
        check_color(value)?;
        let idx = self
            .shape
            .index_of(p.coords())
            .ok_or_else(|| Error::OutOfGrid(p.0.clone()))?;
        self.values[idx] = value;
        Ok(())
    }

    pub fn set_index(&mut self, idx: usize, value: i8) {
        debug_assert!(matches!(value, -1..=1));
        self.values[idx] = value;
    }

    pub fn is_full(&self) -> bool {
        self.values.iter().all(|&v| v != 0)
    }

    pub fn zero_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }

    pub fn negated(&self) -> Self {
        PartialColoring {
            shape: self.shape.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Reorder axes: new axis `k` is old axis `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let shape = self.shape.permuted(perm)?;
        let mut values = vec![0i8; self.values.len()];
        for (old_idx, &v) in self.values.iter().enumerate() {
            let old = self.shape.point_of(old_idx);
            let new: Vec<i64> = perm.iter().map(|&p| old.0[p]).collect();
            values[shape.index_of(&new).unwrap()] = v;
        }
        Ok(PartialColoring { shape, values })
    }
}

fn check_color(v: i8) -> Result<()> {
    if matches!(v, -1..=1) {
        Ok(())
    } else {
        Err(Error::Parse(format!("color {v} is not in {{-1,0,1}}")))
    }
}

/// Expand a progression; the flag reports whether every point lies in `shape`.
pub fn ap_points(ap: &ApSpec, shape: &GridShape) -> Result<(Vec<Point>, bool)> {
    if ap.d() != shape.d() {
        return Err(Error::DimensionMismatch { expected: shape.d(), got: ap.d() });
    }
    if ap.len == 0 || ap.diff.iter().all(|&b| b == 0) {
        return Err(Error::InvalidProgression("zero length or zero difference".into()));
    }
    let points: Vec<Point> = ap.points().collect();
    let inside = points.iter().all(|p| shape.contains(p.coords()));
    Ok((points, inside))
}

/// `χ(A)`, the signed color sum over a contained progression.
pub fn chi_sum(chi: &PartialColoring, ap: &ApSpec) -> Result<i64> {
    let (points, inside) = ap_points(ap, chi.shape())?;
    if !inside {
        let outside = points
            .into_iter()
            .find(|p| !chi.shape().contains(p.coords()))
            .unwrap();
        return Err(Error::OutOfGrid(outside.0));
    }
    Ok(points.iter().map(|p| chi.get(p).unwrap() as i64).sum())
}

/// Sign-normalized nonzero `b` with `|b_i| ≤ ⌊(N_i−1)/(max_len−1)⌋`.
///
/// These are exactly the differences for which some progression of length
/// `max_len` fits in the grid. Ordered lexicographically.
pub fn enumerate_directions(shape: &GridShape, max_len: usize) -> Vec<Vec<i64>> {
    assert!(max_len >= 2, "max_len must be at least 2");
    let radius: Vec<i64> = shape
        .dims()
        .iter()
        .map(|&n| ((n - 1) / (max_len - 1)) as i64)
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = radius.iter().map(|r| -r).collect();
    loop {
        if is_sign_normalized(&cur) {
            out.push(cur.clone());
        }
        let mut i = cur.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < radius[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = -radius[i];
        }
    }
}

/// Result of [`disc_eval`]: the largest `|χ(A)|` and a progression attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscEval {
    pub value: i64,
    pub witness: ApSpec,
}

/// `max_A |χ(A)|` over every progression contained in the grid.
pub fn disc_eval(chi: &PartialColoring) -> DiscEval {
    disc_eval_with(chi, Execution::default(), |_| true)
}

pub fn disc_eval_sequential(chi: &PartialColoring) -> DiscEval {
    disc_eval_with(chi, Execution::Sequential, |_| true)
}

/// Same scan restricted to differences accepted by `keep` (sign-normalized).
pub fn disc_eval_where<F>(chi: &PartialColoring, keep: F) -> DiscEval
where
    F: Fn(&[i64]) -> bool + Sync + Send,
{
    disc_eval_with(chi, Execution::default(), keep)
}

pub fn disc_eval_with<F>(chi: &PartialColoring, exec: Execution, keep: F) -> DiscEval
where
    F: Fn(&[i64]) -> bool + Sync + Send,
{
    let shape = chi.shape();
    let fallback = DiscEval {
        value: 0,
        witness: ApSpec {
            start: Point(vec![1; shape.d()]),
            diff: unit_direction(shape.d()),
            len: 1,
        },
    };
    if shape.cells() == 1 {
        return DiscEval { value: chi.values()[0].abs() as i64, ..fallback };
    }
    let dirs: Vec<Vec<i64>> = enumerate_directions(shape, 2)
        .into_iter()
        .filter(|b| keep(b))
        .collect();
    let coords = shape.coordinate_table();
    let best = exec.map_reduce(
        &dirs,
        None,
        |b| scan_direction(chi, &coords, b),
        |a: Option<(i64, ApSpec)>, b| match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(if y.0 > x.0 { y } else { x }),
        },
    );
    if let Some((value, witness)) = best.filter(|(v, _)| *v > 0) {
        return DiscEval { value, witness };
    }
    // Every nonzero cell is a length-one progression.
    match chi.values().iter().position(|&v| v != 0) {
        Some(idx) => DiscEval {
            value: 1,
            witness: ApSpec {
                start: shape.point_of(idx),
                diff: dirs.first().cloned().unwrap_or(fallback.witness.diff),
                len: 1,
            },
        },
        None => fallback,
    }
}

fn unit_direction(d: usize) -> Vec<i64> {
    let mut e = vec![0; d];
    e[d - 1] = 1;
    e
}

/// Max over lines of direction `b` of `max prefix − min prefix`.
fn scan_direction(chi: &PartialColoring, coords: &[i64], b: &[i64]) -> Option<(i64, ApSpec)> {
    let shape = chi.shape();
    let d = shape.d();
    let dims = shape.dims();
    let strides = shape.strides();
    let step: isize = b
        .iter()
        .zip(&strides)
        .map(|(&bi, &s)| bi as isize * s as isize)
        .sum();
    let values = chi.values();
    let mut best: Option<(i64, usize, usize, usize)> = None;
    for cell in 0..shape.cells() {
        let x = &coords[cell * d..(cell + 1) * d];
        // A line starts where stepping back by b leaves the grid.
        let prev_inside = x
            .iter()
            .zip(b)
            .zip(dims)
            .all(|((&xi, &bi), &n)| xi - bi >= 1 && xi - bi <= n as i64);
        if prev_inside {
            continue;
        }
        let len = line_length(x, b, dims);
        if len < 2 {
            continue;
        }
        let (mut prefix, mut min_p, mut max_p) = (0i64, 0i64, 0i64);
        let (mut min_at, mut max_at) = (0usize, 0usize);
        let mut idx = cell as isize;
        for k in 1..=len {
            prefix += values[idx as usize] as i64;
            idx += step;
            if prefix < min_p {
                min_p = prefix;
                min_at = k;
            }
            if prefix > max_p {
                max_p = prefix;
                max_at = k;
            }
        }
        let value = max_p - min_p;
        if best.is_none_or(|(v, ..)| value > v) {
            let (lo, hi) = if min_at < max_at { (min_at, max_at) } else { (max_at, min_at) };
            best = Some((value, cell, lo, hi));
        }
    }
    best.map(|(value, cell, lo, hi)| {
        let start = shape.point_of(cell).offset(b, lo as i64);
        (
            value,
            ApSpec { start, diff: b.to_vec(), len: (hi - lo).max(1) },
        )
    })
}

/// Number of grid points on `x, x+b, x+2b, …`.
pub(crate) fn line_length(x: &[i64], b: &[i64], dims: &[usize]) -> usize {
    let mut len = usize::MAX;
    for ((&xi, &bi), &n) in x.iter().zip(b).zip(dims) {
        let room = match bi.signum() {
            1 => (n as i64 - xi) / bi,
            -1 => (xi - 1) / (-bi),
            _ => continue,
        };
        len = len.min(room as usize + 1);
    }
    len
}
