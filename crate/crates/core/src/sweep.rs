//! Scaling experiments: color a ladder of shapes with several seeds and fit
//! the log-log slope of discrepancy against side length.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{disc_eval_with, GridShape};
use crate::solver::{compose_general, SolveConfig};

/// Bumped whenever a column is added, removed or reformatted.
pub const CSV_SCHEMA: &str = "sweep-v1";
pub const CSV_HEADER: &str = "shape,seed,disc,ledger_bound,runtime_ms";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub shape: GridShape,
    pub seed: u64,
    pub disc: i64,
    pub ledger_bound: f64,
    /// `None` when timing is disabled, so outputs stay byte-identical.
    pub runtime_ms: Option<f64>,
}

/// One row per `(shape, seed)`, shapes outermost.
pub fn run_sweep(shapes: &[GridShape], seeds: &[u64], config: &SolveConfig, timing: bool) -> Result<Vec<SweepRow>> {
    if shapes.is_empty() || seeds.is_empty() {
        return Err(Error::Precondition("sweep needs at least one shape and one seed".into()));
    }
    let mut rows = Vec::with_capacity(shapes.len() * seeds.len());
    for shape in shapes {
        for &seed in seeds {
            let cfg = SolveConfig { seed, ..config.clone() };
            let start = Instant::now();
            let out = compose_general(shape, &cfg)?;
            let disc = disc_eval_with(&out.coloring, cfg.execution, |_| true).value;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            rows.push(SweepRow {
                shape: shape.clone(),
                seed,
                disc,
                ledger_bound: out.bound,
                runtime_ms: timing.then_some(elapsed),
            });
        }
    }
    Ok(rows)
}

/// Shapes are written as `N1xN2x…`; missing runtimes as `NA`.
pub fn write_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in rows {
        let dims: Vec<String> = r.shape.dims().iter().map(|n| n.to_string()).collect();
        let runtime = r.runtime_ms.map_or("NA".to_string(), |t| format!("{t:.3}"));
        writeln!(out, "{},{},{},{:.6},{}", dims.join("x"), r.seed, r.disc, r.ledger_bound, runtime).unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of a normal-approximation 95% interval on the slope.
    pub ci95: f64,
    pub points: usize,
}

/// Least squares of `ln disc` on `ln(max side)` over every row with `disc > 0`.
pub fn fit_slope(rows: &[SweepRow]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.disc > 0)
        .map(|r| ((r.shape.max_side() as f64).ln(), (r.disc as f64).ln()))
        .collect();
    fit_line(&pts)
}

pub fn fit_line(pts: &[(f64, f64)]) -> Option<SlopeFit> {
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ci95 = if n > 2 {
        let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        1.96 * (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(SlopeFit { slope, intercept, ci95, points: n })
}
