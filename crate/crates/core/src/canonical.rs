//! Dyadic canonical blocks of a point set.
//!
//! For a difference `b`, the points of `X` split into congruence classes mod
//! `b`; each class, ordered by dot product with `b`, is a *line*. A canonical
//! block is a run `x_{(j−1)s+1} … x_{js}` of a line with `s` a power of two.
//! Every progression trace on `X` is a difference of two prefixes of one
//! line, and every prefix is a disjoint union of blocks of distinct sizes.
//!
//! Only sign-normalized differences are enumerated: `b` and `−b` give the
//! same classes, and a progression with difference `−b` is the same set as
//! one with difference `b`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{enumerate_directions, is_sign_normalized, ApSpec, GridShape, PartialColoring, Point};

/// One congruence class of `X` mod `direction`, sorted by `x·direction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineOrder {
    pub direction: Vec<i64>,
    /// Lexicographically smallest point of the class.
    pub residue_id: Point,
    pub points: Vec<Point>,
}

impl LineOrder {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// 0-based position of `p` on the line.
    pub fn position(&self, p: &Point) -> Option<usize> {
        let key = p.dot(&self.direction);
        self.points
            .binary_search_by_key(&key, |q| q.dot(&self.direction))
            .ok()
            .filter(|&i| &self.points[i] == p)
    }
}

/// The block `{x_u : (j−1)s < u ≤ js}` of one line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalSet {
    pub direction: Vec<i64>,
    pub residue_id: Point,
    /// `j ≥ 1`.
    pub block_index: usize,
    /// `s = 2^t`.
    pub size: usize,
}

impl CanonicalSet {
    pub fn range(&self) -> std::ops::Range<usize> {
        (self.block_index - 1) * self.size..self.block_index * self.size
    }

    pub fn points<'a>(&self, line: &'a LineOrder) -> &'a [Point] {
        &line.points[self.range()]
    }
}

/// Partition `X` into lines for difference `b`.
pub fn build_lines(x: &[Point], b: &[i64]) -> Vec<LineOrder> {
    assert!(b.iter().any(|&v| v != 0), "difference must be nonzero");
    let pivot = b.iter().position(|&v| v != 0).unwrap();
    let mut classes: BTreeMap<Vec<i64>, Vec<Point>> = BTreeMap::new();
    for p in x {
        // Shift along b until the pivot coordinate lands in [0, |b_pivot|).
        let k = p.0[pivot].div_euclid(b[pivot]);
        let rep = p.offset(b, -k).0;
        classes.entry(rep).or_default().push(p.clone());
    }
    let mut lines: Vec<LineOrder> = classes
        .into_values()
        .map(|mut points| {
            points.sort_by_key(|p| p.dot(b));
            points.dedup();
            let residue_id = points.iter().min().unwrap().clone();
            LineOrder { direction: b.to_vec(), residue_id, points }
        })
        .collect();
    lines.sort_by(|a, b| a.residue_id.cmp(&b.residue_id));
    lines
}

/// `U(X, b, s)`: points whose class mod `b` has at least `s` members.
pub fn u_set(x: &[Point], b: &[i64], s: usize) -> Vec<Point> {
    let mut out: Vec<Point> = build_lines(x, b)
        .into_iter()
        .filter(|l| l.len() >= s)
        .flat_map(|l| l.points)
        .collect();
    out.sort();
    out
}

/// Sign-normalized differences for which some class of `X` can hold `s ≥ 2`
/// points: `|b_i| ≤ span_i/(s−1)` with `span_i` the coordinate range of `X`.
pub fn directions_for(x: &[Point], s: usize) -> Vec<Vec<i64>> {
    assert!(s >= 2);
    let Some(first) = x.first() else {
        return Vec::new();
    };
    let d = first.d();
    let spans: Vec<usize> = (0..d)
        .map(|i| {
            let lo = x.iter().map(|p| p.0[i]).min().unwrap();
            let hi = x.iter().map(|p| p.0[i]).max().unwrap();
            (hi - lo) as usize + 1
        })
        .collect();
    let box_shape = GridShape::new(spans).expect("nonempty spans");
    enumerate_directions(&box_shape, s)
}

/// `f(s, X)`: number of canonical blocks of size `s`.
///
/// Singletons are counted once, so `f(1, X) = |X|`.
pub fn f_count(x: &[Point], s: usize) -> Result<u64> {
    if !s.is_power_of_two() {
        return Err(Error::Precondition(format!("block size {s} is not a power of two")));
    }
    if s == 1 {
        return Ok(x.len() as u64);
    }
    Ok(directions_for(x, s)
        .iter()
        .map(|b| {
            build_lines(x, b)
                .iter()
                .map(|l| (l.len() / s) as u64)
                .sum::<u64>()
        })
        .sum())
}

/// Lazily indexed canonical family of a point set.
#[derive(Clone, Debug)]
pub struct CanonicalFamily {
    points: Vec<Point>,
    counts: BTreeMap<usize, u64>,
}

impl CanonicalFamily {
    pub fn new(x: &[Point]) -> Self {
        let mut points = x.to_vec();
        points.sort();
        points.dedup();
        let mut counts = BTreeMap::new();
        counts.insert(1, points.len() as u64);
        let mut s = 2;
        loop {
            let c = f_count(&points, s).unwrap();
            if c == 0 {
                break;
            }
            counts.insert(s, c);
            s *= 2;
        }
        CanonicalFamily { points, counts }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// `f(s, X)` for every dyadic `s` with a nonzero count.
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn lines(&self, b: &[i64]) -> Vec<LineOrder> {
        build_lines(&self.points, b)
    }

    /// Blocks of size `s ≥ 2` along `b`, generated on demand.
    pub fn blocks(&self, b: &[i64], s: usize) -> Vec<(CanonicalSet, Vec<Point>)> {
        self.lines(b)
            .into_iter()
            .flat_map(|line| {
                (1..=line.len() / s)
                    .map(|j| {
                        let set = CanonicalSet {
                            direction: b.to_vec(),
                            residue_id: line.residue_id.clone(),
                            block_index: j,
                            size: s,
                        };
                        let pts = set.points(&line).to_vec();
                        (set, pts)
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// One text line per class: `b=(..) id=(..) n=k : p1 p2 …`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        if self.points.len() < 2 {
            return out;
        }
        for b in directions_for(&self.points, 2) {
            for line in self.lines(&b) {
                let pts: Vec<String> = line.points.iter().map(|p| p.to_string()).collect();
                let dir: Vec<String> = b.iter().map(|v| v.to_string()).collect();
                writeln!(
                    out,
                    "b=({}) id={} n={} : {}",
                    dir.join(","),
                    line.residue_id,
                    line.len(),
                    pts.join(" ")
                )
                .unwrap();
            }
        }
        out
    }
}

/// `A = A₁ \ A₂` with both prefixes written as canonical blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub line: Option<LineOrder>,
    /// Blocks covering `{x_u : u ≤ j}`.
    pub prefix: Vec<CanonicalSet>,
    /// Blocks covering `{x_u : u ≤ i−1}`.
    pub removed: Vec<CanonicalSet>,
}

impl Decomposition {
    pub fn prefix_points(&self) -> Vec<Point> {
        self.collect(&self.prefix)
    }

    pub fn removed_points(&self) -> Vec<Point> {
        self.collect(&self.removed)
    }

    /// Points of `A₁ \ A₂`.
    pub fn points(&self) -> Vec<Point> {
        let removed = self.removed_points();
        self.prefix_points()
            .into_iter()
            .filter(|p| !removed.contains(p))
            .collect()
    }

    fn collect(&self, blocks: &[CanonicalSet]) -> Vec<Point> {
        match &self.line {
            Some(line) => blocks.iter().flat_map(|b| b.points(line).to_vec()).collect(),
            None => Vec::new(),
        }
    }
}

/// Blocks for the prefix of length `len`, largest first (binary digits of `len`).
pub fn prefix_blocks(line: &LineOrder, len: usize) -> Vec<CanonicalSet> {
    assert!(len <= line.len());
    let mut blocks = Vec::new();
    let mut offset = 0;
    for t in (0..usize::BITS).rev() {
        let size = 1usize << t;
        if len & size != 0 {
            blocks.push(CanonicalSet {
                direction: line.direction.clone(),
                residue_id: line.residue_id.clone(),
                block_index: offset / size + 1,
                size,
            });
            offset += size;
        }
    }
    blocks
}

/// Decompose the trace `ap ∩ X` of a progression.
pub fn decompose(x: &[Point], ap: &ApSpec) -> Result<Decomposition> {
    let ap = ap.normalized();
    let trace: Vec<Point> = {
        let mut members = x.to_vec();
        members.sort();
        ap.points().filter(|p| members.binary_search(p).is_ok()).collect()
    };
    decompose_trace(x, &ap.diff, &trace)
}

/// Decompose a point set claimed to be an interval of a line of `X` under `b`.
pub fn decompose_trace(x: &[Point], b: &[i64], trace: &[Point]) -> Result<Decomposition> {
    if b.iter().all(|&v| v == 0) {
        return Err(Error::InvalidProgression("difference vector is zero".into()));
    }
    let b: Vec<i64> = if is_sign_normalized(b) { b.to_vec() } else { b.iter().map(|v| -v).collect() };
    let Some(first) = trace.first() else {
        return Ok(Decomposition { line: None, prefix: Vec::new(), removed: Vec::new() });
    };
    let line = build_lines(x, &b)
        .into_iter()
        .find(|l| l.position(first).is_some())
        .ok_or_else(|| Error::NotAnInterval(format!("{first} is not in X")))?;
    let mut positions: Vec<usize> = trace
        .iter()
        .map(|p| {
            line.position(p)
                .ok_or_else(|| Error::NotAnInterval(format!("{p} is not on the line of {first}")))
        })
        .collect::<Result<_>>()?;
    positions.sort_unstable();
    positions.dedup();
    let (lo, hi) = (positions[0], *positions.last().unwrap());
    if positions.len() != hi - lo + 1 || positions.len() != trace.len() {
        return Err(Error::NotAnInterval("trace skips points of its line".into()));
    }
    // 1-based: A = {x_u : i ≤ u ≤ j} with i = lo + 1, j = hi + 1.
    let prefix = prefix_blocks(&line, hi + 1);
    let removed = prefix_blocks(&line, lo);
    Ok(Decomposition { line: Some(line), prefix, removed })
}

/// `max |χ(S)|` over canonical blocks of `X`, keyed by block size.
pub fn max_block_sums(chi: &PartialColoring, x: &[Point]) -> BTreeMap<usize, i64> {
    let mut out = BTreeMap::new();
    let color = |p: &Point| chi.get(p).expect("point outside coloring") as i64;
    out.insert(1, x.iter().map(|p| color(p).abs()).max().unwrap_or(0));
    if x.len() < 2 {
        return out;
    }
    for b in directions_for(x, 2) {
        for line in build_lines(x, &b) {
            let mut s = 2;
            while s <= line.len() {
                for chunk in line.points.chunks_exact(s) {
                    let sum: i64 = chunk.iter().map(color).sum();
                    let e = out.entry(s).or_insert(0);
                    *e = (*e).max(sum.abs());
                }
                s *= 2;
            }
        }
    }
    out
}
