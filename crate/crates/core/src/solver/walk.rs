//! Constrained Gaussian walk producing a partial coloring of a point set.
//!
//! Fractional values start at 0 and move along Gaussian directions projected
//! away from the active block constraints. A block becomes active when its
//! sum reaches its allowance; a value freezes when it reaches ±1. The walk
//! stops at the requested frozen fraction, then values are rounded and a
//! greedy pass settles the undecided ones so every block constraint holds
//! exactly for the integer coloring.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::grid::{line_length, GridShape};
use crate::par::Execution;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WalkParams {
    /// Largest step length.
    pub gamma: f64,
    /// Values with `|x| ≥ 1 − θ` round to their sign.
    pub theta: f64,
    /// Stop once this fraction of the values is frozen.
    pub freeze_fraction: f64,
    pub max_steps: usize,
    /// Stop once the projection keeps less than this share of a Gaussian step.
    pub min_freedom: f64,
    /// Re-projections per step after activating blocks that would cross.
    pub max_reprojections: usize,
    /// Expected activated blocks allowed, as a fraction of the points.
    pub budget: f64,
    pub cg_tolerance: f64,
    pub cg_max_iter: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            gamma: 0.15,
            theta: 0.125,
            freeze_fraction: 0.5,
            max_steps: 20_000,
            min_freedom: 0.02,
            max_reprojections: 6,
            budget: 1.0,
            cg_tolerance: 1e-10,
            cg_max_iter: 400,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Block {
    start: u32,
    len: u32,
    size: u8,
}

/// Lines of one difference vector, restricted to lines long enough to hold a
/// constrained block.
#[derive(Debug)]
struct Direction {
    order: Vec<u32>,
    line_start: Vec<u32>,
    line_len: Vec<u32>,
    line_block0: Vec<u32>,
    /// Local point → position in `order`.
    pos: Vec<u32>,
    /// Position in `order` → line.
    line_at: Vec<u32>,
    blocks: Vec<Block>,
}

/// Every constrained block of a point set.
#[derive(Debug)]
pub(crate) struct System {
    m: usize,
    sizes: Vec<usize>,
    limits: Vec<f64>,
    dirs: Vec<Direction>,
}

impl System {
    /// `points` are grid indices; `allowance(s)` is `Δ_s`. Sizes with `Δ_s ≥ s`
    /// cannot be violated and are left out. Of the rest, sizes are enforced
    /// from the largest down while the expected number of activated blocks,
    /// `Σ f(s, X) · min(1, 2e^{−λ²/2})` with `λ = Δ_s/√s`, stays within
    /// `budget · |X|`.
    pub(crate) fn new(
        shape: &GridShape,
        points: &[usize],
        allowance: impl Fn(usize) -> f64,
        budget: f64,
        exec: Execution,
    ) -> Self {
        let m = points.len();
        let (candidates, limits): (Vec<usize>, Vec<f64>) = super::schedule::dyadic(shape.max_side())
            .filter(|&s| s >= 2 && s <= m)
            .map(|s| (s, allowance(s)))
            .filter(|&(s, lim)| lim < s as f64)
            .unzip();
        let mut system = System { m, sizes: Vec::new(), limits: Vec::new(), dirs: Vec::new() };
        let Some(&smallest) = candidates.first() else {
            return system;
        };
        let d = shape.d();
        let coords = shape.coordinate_table();
        let mut local = vec![NONE; shape.cells()];
        for (i, &p) in points.iter().enumerate() {
            local[p] = i as u32;
        }
        let spans: Vec<usize> = (0..d)
            .map(|k| {
                let lo = points.iter().map(|&p| coords[p * d + k]).min().unwrap();
                let hi = points.iter().map(|&p| coords[p * d + k]).max().unwrap();
                (hi - lo) as usize + 1
            })
            .collect();
        let box_shape = GridShape::new(spans).expect("nonempty box");

        let directions = crate::grid::enumerate_directions(&box_shape, smallest);
        let counts = exec.map_reduce(
            &directions,
            vec![0u64; candidates.len()],
            |b| {
                let mut c = vec![0u64; candidates.len()];
                for_each_line(shape, &coords, &local, b, smallest, |members| {
                    for (k, &s) in candidates.iter().enumerate() {
                        c[k] += (members.len() / s) as u64;
                    }
                });
                c
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
        let mut spent = 0.0;
        let mut keep = candidates.len();
        for k in (0..candidates.len()).rev() {
            let lambda = limits[k] / (candidates[k] as f64).sqrt();
            let cost = counts[k] as f64 * (2.0 * (-lambda * lambda / 2.0).exp()).min(1.0);
            if spent + cost > budget * m as f64 {
                break;
            }
            spent += cost;
            keep = k;
        }
        system.sizes = candidates[keep..].to_vec();
        system.limits = limits[keep..].to_vec();
        let Some(&s0) = system.sizes.first() else {
            return system;
        };
        let directions = crate::grid::enumerate_directions(&box_shape, s0);
        let sizes = system.sizes.clone();
        system.dirs = exec
            .map(&directions, |b| build_direction(shape, &coords, &local, m, b, &sizes))
            .into_iter()
            .filter(|dir| !dir.blocks.is_empty())
            .collect();
        system
    }

    /// Enforced sizes with their allowances.
    pub(crate) fn enforced(&self) -> Vec<(usize, f64)> {
        self.sizes.iter().copied().zip(self.limits.iter().copied()).collect()
    }

    pub(crate) fn block_count(&self) -> usize {
        self.dirs.iter().map(|d| d.blocks.len()).sum()
    }

    pub(crate) fn direction_count(&self) -> usize {
        self.dirs.len()
    }

    fn limit_int(&self, size: u8) -> i64 {
        (self.limits[size as usize] + 1e-9).floor() as i64
    }

    /// Calls `f(block)` for every block of direction `di` containing local point `p`.
    fn for_blocks_of(&self, di: usize, p: usize, mut f: impl FnMut(usize)) {
        let dir = &self.dirs[di];
        let pos = dir.pos[p];
        if pos == NONE {
            return;
        }
        let line = dir.line_at[pos as usize] as usize;
        let (ls, len) = (dir.line_start[line], dir.line_len[line] as usize);
        let rel = (pos - ls) as usize;
        let mut acc = dir.line_block0[line] as usize;
        for &s in &self.sizes {
            if s > len {
                break;
            }
            let nb = len / s;
            let j = rel / s;
            if j < nb {
                f(acc + j);
            }
            acc += nb;
        }
    }
}

/// Calls `f` with the local points of every grid line of direction `b`
/// holding at least `min_len` of them, in line order.
fn for_each_line(
    shape: &GridShape,
    coords: &[i64],
    local: &[u32],
    b: &[i64],
    min_len: usize,
    mut f: impl FnMut(&[u32]),
) {
    let d = shape.d();
    let dims = shape.dims();
    let strides = shape.strides();
    let step: isize = b.iter().zip(&strides).map(|(&bi, &s)| bi as isize * s as isize).sum();
    let mut members: Vec<u32> = Vec::new();
    for cell in 0..shape.cells() {
        let x = &coords[cell * d..(cell + 1) * d];
        let prev_inside = x
            .iter()
            .zip(b)
            .zip(dims)
            .all(|((&xi, &bi), &n)| xi - bi >= 1 && xi - bi <= n as i64);
        if prev_inside {
            continue;
        }
        let len = line_length(x, b, dims);
        if len < min_len {
            continue;
        }
        members.clear();
        let mut idx = cell as isize;
        for _ in 0..len {
            let l = local[idx as usize];
            if l != NONE {
                members.push(l);
            }
            idx += step;
        }
        if members.len() >= min_len {
            f(&members);
        }
    }
}

fn build_direction(
    shape: &GridShape,
    coords: &[i64],
    local: &[u32],
    m: usize,
    b: &[i64],
    sizes: &[usize],
) -> Direction {
    let mut dir = Direction {
        order: Vec::new(),
        line_start: Vec::new(),
        line_len: Vec::new(),
        line_block0: Vec::new(),
        pos: vec![NONE; m],
        line_at: Vec::new(),
        blocks: Vec::new(),
    };
    for_each_line(shape, coords, local, b, sizes[0], |members| {
        let count = members.len();
        let line = dir.line_start.len() as u32;
        let start = dir.order.len() as u32;
        dir.line_start.push(start);
        dir.line_len.push(count as u32);
        dir.line_block0.push(dir.blocks.len() as u32);
        for (k, &p) in members.iter().enumerate() {
            dir.pos[p as usize] = start + k as u32;
            dir.order.push(p);
            dir.line_at.push(line);
        }
        for (si, &s) in sizes.iter().enumerate() {
            if s > count {
                break;
            }
            for j in 0..count / s {
                dir.blocks.push(Block { start: start + (j * s) as u32, len: s as u32, size: si as u8 });
            }
        }
    });
    dir
}

/// Outcome of one walk plus rounding.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkOutcome {
    /// One entry per input point, in `{−1, 0, 1}`.
    pub values: Vec<i8>,
    pub colored: usize,
    pub steps: usize,
    pub active: usize,
    pub frozen: usize,
    pub blocks: usize,
    pub directions: usize,
    /// Block sizes whose allowance was enforced, with the allowance.
    pub enforced: Vec<(usize, f64)>,
    /// Points set to 0 by the repair pass after rounding.
    pub repaired: usize,
    /// `max |χ(S)| / Δ_S` over constrained blocks (at most 1).
    pub max_ratio: f64,
}

#[derive(Clone)]
struct Scan {
    min_t: f64,
    arg: Option<(usize, usize)>,
    touching: Vec<(usize, usize)>,
}

pub(crate) fn run_walk<R: Rng>(system: &System, params: &WalkParams, exec: Execution, rng: &mut R) -> WalkOutcome {
    let m = system.m;
    let mut x = vec![0f64; m];
    let mut frozen = vec![false; m];
    let mut frozen_count = 0usize;
    let mut active: Vec<(usize, usize)> = Vec::new();
    let mut is_active: Vec<Vec<bool>> = system.dirs.iter().map(|d| vec![false; d.blocks.len()]).collect();
    let target = ((params.freeze_fraction * m as f64).ceil() as usize).min(m);
    let mut steps = 0;
    let dir_ids: Vec<usize> = (0..system.dirs.len()).collect();

    while frozen_count < target && steps < params.max_steps {
        let g: Vec<f64> = (0..m)
            .map(|i| if frozen[i] { 0.0 } else { rng.sample::<f64, _>(StandardNormal) })
            .collect();
        // Activate every block that would cross within a full step and
        // re-project, a bounded number of times.
        let mut reprojections = 0;
        let (u, scan) = loop {
            let u = project(system, &active, &frozen, &g, params);
            let scan = exec.map_reduce(
                &dir_ids,
                Scan { min_t: f64::INFINITY, arg: None, touching: Vec::new() },
                |&di| scan_direction(system, di, &x, &u, &is_active[di], params.gamma),
                merge_scans,
            );
            if scan.touching.is_empty() || reprojections == params.max_reprojections {
                break (u, scan);
            }
            reprojections += 1;
            for &(di, bi) in &scan.touching {
                if !is_active[di][bi] {
                    is_active[di][bi] = true;
                    active.push((di, bi));
                }
            }
        };
        // ‖u‖²/‖g‖² estimates the fraction of free dimensions left.
        let norm_sq: f64 = u.iter().map(|v| v * v).sum();
        let g_sq: f64 = g.iter().map(|v| v * v).sum();
        if norm_sq <= params.min_freedom * g_sq {
            break;
        }
        let t = scan.min_t.min(params.gamma);
        for i in 0..m {
            if !frozen[i] {
                x[i] += t * u[i];
                if x[i].abs() >= 1.0 - 1e-9 {
                    x[i] = x[i].signum();
                    frozen[i] = true;
                    frozen_count += 1;
                }
            }
        }
        for (di, bi) in scan.touching.into_iter().chain(scan.arg.filter(|_| scan.min_t <= params.gamma)) {
            if !is_active[di][bi] {
                is_active[di][bi] = true;
                active.push((di, bi));
            }
        }
        steps += 1;
    }
    let active_count = active.len();
    let (values, repaired) = round(system, &x, params.theta);
    let sums = block_sums(system, &values);
    let mut max_ratio: f64 = 0.0;
    for (di, dir) in system.dirs.iter().enumerate() {
        for (bi, blk) in dir.blocks.iter().enumerate() {
            let r = sums[di][bi].abs() as f64 / system.limits[blk.size as usize];
            max_ratio = max_ratio.max(r);
        }
    }
    WalkOutcome {
        colored: values.iter().filter(|&&v| v != 0).count(),
        values,
        steps,
        active: active_count,
        frozen: frozen_count,
        blocks: system.block_count(),
        directions: system.direction_count(),
        enforced: system.enforced(),
        repaired,
        max_ratio,
    }
}

fn merge_scans(a: Scan, b: Scan) -> Scan {
    let (mut lo, hi) = if b.min_t < a.min_t { (b, a) } else { (a, b) };
    lo.touching.extend(hi.touching);
    lo
}

fn scan_direction(system: &System, di: usize, x: &[f64], u: &[f64], is_active: &[bool], gamma: f64) -> Scan {
    let dir = &system.dirs[di];
    let n = dir.order.len();
    let mut px = Vec::with_capacity(n + 1);
    let mut pu = Vec::with_capacity(n + 1);
    let (mut sx, mut su) = (0.0, 0.0);
    px.push(0.0);
    pu.push(0.0);
    for &p in &dir.order {
        sx += x[p as usize];
        su += u[p as usize];
        px.push(sx);
        pu.push(su);
    }
    let mut out = Scan { min_t: f64::INFINITY, arg: None, touching: Vec::new() };
    for (bi, blk) in dir.blocks.iter().enumerate() {
        if is_active[bi] {
            continue;
        }
        let (a, e) = (blk.start as usize, (blk.start + blk.len) as usize);
        let vx = px[e] - px[a];
        let vu = pu[e] - pu[a];
        let lim = system.limits[blk.size as usize];
        let tol = 1e-9 * lim.max(1.0);
        if vx.abs() >= lim - tol {
            out.touching.push((di, bi));
            continue;
        }
        let t = if vu > 1e-15 {
            (lim - vx) / vu
        } else if vu < -1e-15 {
            (lim + vx) / -vu
        } else {
            f64::INFINITY
        };
        if t <= gamma {
            out.touching.push((di, bi));
        }
        if t < out.min_t {
            out.min_t = t;
            out.arg = Some((di, bi));
        }
    }
    out
}

/// `g` minus its component in the span of the active rows, with frozen
/// coordinates zeroed. Conjugate gradients on `A Aᵀ y = A g`.
fn project(system: &System, active: &[(usize, usize)], frozen: &[bool], g: &[f64], params: &WalkParams) -> Vec<f64> {
    let rows: Vec<&[u32]> = active
        .iter()
        .map(|&(di, bi)| {
            let dir = &system.dirs[di];
            let blk = dir.blocks[bi];
            &dir.order[blk.start as usize..(blk.start + blk.len) as usize]
        })
        .filter(|row| row.iter().any(|&p| !frozen[p as usize]))
        .collect();
    let mut u = g.to_vec();
    if rows.is_empty() {
        return u;
    }
    let m = g.len();
    let a_mul = |v: &[f64]| -> Vec<f64> { rows.iter().map(|r| r.iter().map(|&p| v[p as usize]).sum()).collect() };
    let at_mul = |y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (r, &yr) in rows.iter().zip(y) {
            for &p in r.iter() {
                if !frozen[p as usize] {
                    out[p as usize] += yr;
                }
            }
        }
        out
    };
    let rhs = a_mul(g);
    let rhs_norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rhs_norm == 0.0 {
        return u;
    }
    let k = rows.len();
    let mut y = vec![0.0; k];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..params.cg_max_iter.min(4 * k + 20) {
        let ap = a_mul(&at_mul(&p));
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rs / pap;
        for i in 0..k {
            y[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        if rs_new.sqrt() <= params.cg_tolerance * rhs_norm {
            break;
        }
        let beta = rs_new / rs;
        for i in 0..k {
            p[i] = r[i] + beta * p[i];
        }
        rs = rs_new;
    }
    let correction = at_mul(&y);
    for i in 0..m {
        u[i] = if frozen[i] { 0.0 } else { u[i] - correction[i] };
    }
    u
}

fn block_sums(system: &System, values: &[i8]) -> Vec<Vec<i64>> {
    system
        .dirs
        .iter()
        .map(|dir| {
            let mut prefix = Vec::with_capacity(dir.order.len() + 1);
            let mut acc = 0i64;
            prefix.push(0);
            for &p in &dir.order {
                acc += values[p as usize] as i64;
                prefix.push(acc);
            }
            dir.blocks
                .iter()
                .map(|b| prefix[(b.start + b.len) as usize] - prefix[b.start as usize])
                .collect()
        })
        .collect()
}

/// Round `|x| ≥ 1 − θ` to sign, uncolor points until no block is violated,
/// then greedily color the remaining points where a sign fits.
fn round(system: &System, x: &[f64], theta: f64) -> (Vec<i8>, usize) {
    let m = system.m;
    let mut values: Vec<i8> = x
        .iter()
        .map(|&v| if v.abs() >= 1.0 - theta { v.signum() as i8 } else { 0 })
        .collect();
    let mut sums = block_sums(system, &values);
    let mut repaired = 0;

    let mut stack: Vec<(usize, usize)> = Vec::new();
    for (di, dir) in system.dirs.iter().enumerate() {
        for (bi, blk) in dir.blocks.iter().enumerate() {
            if sums[di][bi].abs() > system.limit_int(blk.size) {
                stack.push((di, bi));
            }
        }
    }
    while let Some((di, bi)) = stack.pop() {
        let blk = system.dirs[di].blocks[bi];
        while sums[di][bi].abs() > system.limit_int(blk.size) {
            let sign = sums[di][bi].signum() as i8;
            let members = &system.dirs[di].order[blk.start as usize..(blk.start + blk.len) as usize];
            // Drop the least decided point carrying the excess sign.
            let p = *members
                .iter()
                .filter(|&&p| values[p as usize] == sign)
                .min_by(|&&a, &&b| x[a as usize].abs().total_cmp(&x[b as usize].abs()).then(a.cmp(&b)))
                .expect("a violated block has a point of the excess sign");
            values[p as usize] = 0;
            repaired += 1;
            for dj in 0..system.dirs.len() {
                system.for_blocks_of(dj, p as usize, |bj| {
                    sums[dj][bj] -= sign as i64;
                    let size = system.dirs[dj].blocks[bj].size;
                    if sums[dj][bj].abs() > system.limit_int(size) {
                        stack.push((dj, bj));
                    }
                });
            }
        }
    }

    let mut undecided: Vec<usize> = (0..m).filter(|&i| values[i] == 0).collect();
    undecided.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    for p in undecided {
        let preferred: i8 = if x[p] < 0.0 { -1 } else { 1 };
        let mut best: Option<(f64, i8)> = None;
        for sign in [preferred, -preferred] {
            let mut worst: f64 = 0.0;
            let mut fits = true;
            for dj in 0..system.dirs.len() {
                system.for_blocks_of(dj, p, |bj| {
                    let size = system.dirs[dj].blocks[bj].size;
                    let v = (sums[dj][bj] + sign as i64).abs();
                    if v > system.limit_int(size) {
                        fits = false;
                    }
                    worst = worst.max(v as f64 / system.limits[size as usize]);
                });
            }
            if fits && best.is_none_or(|(w, _)| worst < w) {
                best = Some((worst, sign));
            }
        }
        if let Some((_, sign)) = best {
            values[p] = sign;
            for dj in 0..system.dirs.len() {
                system.for_blocks_of(dj, p, |bj| sums[dj][bj] += sign as i64);
            }
        }
    }
    (values, repaired)
}
