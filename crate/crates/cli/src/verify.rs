//! `verify`: one CSV row per checked inequality, written as `oracle ≤ bound`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use apdisc::bounds::{check_cauchy_schwarz, check_f_by_u, check_f_simple, check_small_gcd, check_u_box, Check};
use apdisc::canonical::build_lines;
use apdisc::certify::{energy_check_with, lower_bound_value};
use apdisc::lattice::{fiber_counts, projection_map, verify_projection, Q};
use apdisc::par::Execution;
use apdisc::rng::{stream, Purpose};
use apdisc::{GridShape, PartialColoring, Point};
use clap::ValueEnum;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{emit, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Counting,
    Lattice,
    Fourier,
    All,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Random instances for the counting and energy suites.
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest side in the exhaustive lattice suite.
    #[arg(long, default_value_t = 6)]
    pub max_side: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    name: String,
    instance: String,
    oracle: f64,
    bound: f64,
    implied: f64,
    pass: bool,
}

impl Row {
    fn new(name: &str, instance: String, oracle: f64, bound: f64, pass: bool) -> Self {
        let implied = if bound > 0.0 {
            oracle / bound
        } else if oracle == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Row { name: name.into(), instance, oracle, bound, implied, pass }
    }
}

impl From<Check> for Row {
    fn from(c: Check) -> Self {
        Row { name: c.name, instance: c.instance, oracle: c.oracle, bound: c.bound, implied: c.implied_constant, pass: c.pass }
    }
}

fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn random_subset<R: Rng>(shape: &GridShape, p: f64, r: &mut R) -> Vec<Point> {
    shape.points().filter(|_| r.gen_bool(p)).collect()
}

fn random_shape<R: Rng>(r: &mut R, choices: &[&[usize]]) -> GridShape {
    GridShape::new(choices[r.gen_range(0..choices.len())].to_vec()).expect("fixed shapes are valid")
}

fn counting(trials: u64, seed: u64, exec: Execution) -> Vec<Row> {
    const SHAPES: &[&[usize]] = &[&[8, 8], &[6, 6, 6], &[16], &[5, 9], &[4, 4, 4]];
    let ids: Vec<u64> = (0..trials).collect();
    exec.map(&ids, |&t| {
        let mut r = stream(seed, t, Purpose::Instances);
        let mut rows = Vec::new();
        let shape = random_shape(&mut r, SHAPES);
        let x = random_subset(&shape, [0.05, 0.1, 0.25, 0.5, 0.75, 1.0][r.gen_range(0..6)], &mut r);
        if !x.is_empty() {
            let mut s = 1;
            while s <= shape.min_side() {
                rows.push(check_f_by_u(&shape, &x, s).expect("valid instance").into());
                rows.push(check_f_simple(&shape, &x, s).expect("valid instance").into());
                if s >= 2 {
                    rows.push(check_u_box(&shape, &x, s).expect("valid instance").into());
                }
                s *= 2;
            }
            let k = r.gen_range(1..8);
            let family: Vec<Vec<Point>> =
                (0..k).map(|_| x.iter().filter(|_| r.gen_bool(0.5)).cloned().collect()).collect();
            rows.push(check_cauchy_schwarz(&x, &family).expect("family inside X").into());
        }
        // The gcd count is stated for d ≥ 2.
        let d = r.gen_range(2..=3);
        let n: Vec<u64> = (0..d).map(|_| r.gen_range(1..=12)).collect();
        let min = *n.iter().min().unwrap() as i64;
        let eps = [Ratio::new(1, 2), Ratio::new(1, 4), Ratio::new(1, min)][r.gen_range(0..3)];
        if let Ok(c) = check_small_gcd(&n, eps) {
            rows.push(c.into());
        }
        rows
    })
    .into_iter()
    .flatten()
    .collect()
}

fn admissible(shape: &GridShape) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for &n in shape.dims() {
        let n = n as i64;
        out = out
            .into_iter()
            .flat_map(|p| {
                (-n..=n).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.retain(|b| b.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0));
    out
}

fn lattice_rows(shape: &GridShape, b: &[i64]) -> Vec<Row> {
    let inst = format!("{shape} b={b:?}");
    let pm = match projection_map(b, shape).and_then(|pm| verify_projection(&pm, shape).map(|rep| (pm, rep))) {
        Ok(x) => x,
        Err(e) => return vec![Row::new("projection", format!("{inst} {e}"), 1.0, 0.0, false)],
    };
    let (pm, rep) = pm;
    let d = shape.d();
    let mut rows = Vec::new();
    let half = Q::new(One::one(), 2.into());
    let top = Q::from_integer((1u64 << (d * d)).into());
    rows.push(Row::new("volume_ratio_lower", inst.clone(), 0.5, qf(&rep.volume_ratio), rep.volume_ratio >= half));
    rows.push(Row::new("volume_ratio_upper", inst.clone(), qf(&rep.volume_ratio), qf(&top), rep.volume_ratio <= top));
    rows.push(Row::new(
        "lll_product",
        inst.clone(),
        qf(&rep.lll_product_sq).sqrt(),
        qf(&rep.lll_bound_sq).sqrt(),
        rep.lll_product_sq <= rep.lll_bound_sq,
    ));
    // Fibers of the map must be exactly the lines in direction b.
    let pts: Vec<Point> = shape.points().collect();
    let mut fibers: BTreeMap<Point, Vec<Point>> = BTreeMap::new();
    let mut outside = 0;
    for p in &pts {
        let img = pm.apply(p);
        if !pm.target.contains(&img.0) {
            outside += 1;
        }
        fibers.entry(img).or_default().push(p.clone());
    }
    let mut by_image: Vec<Vec<Point>> = fibers.into_values().collect();
    by_image.iter_mut().for_each(|f| f.sort());
    by_image.sort();
    let mut lines: Vec<Vec<Point>> = build_lines(&pts, &pm.primitive)
        .into_iter()
        .map(|l| {
            let mut v = l.points;
            v.sort();
            v
        })
        .collect();
    lines.sort();
    let mismatched = if by_image == lines { 0 } else { by_image.len().abs_diff(lines.len()).max(1) };
    rows.push(Row::new("fibers_are_lines", inst.clone(), (mismatched + outside) as f64, 0.0, mismatched + outside == 0));
    let two_over_lambda = 2.0 / qf(&pm.lambda);
    for s in 1..=shape.min_side() {
        let f = fiber_counts(&pm, &pts, s);
        if f.counts.is_empty() {
            continue;
        }
        let lower_ok = f.min >= s;
        let upper_ok = Q::from_integer(f.max.into()) * &pm.lambda <= Q::from_integer(2.into());
        rows.push(Row::new("fiber_lower", format!("{inst} s={s}"), s as f64, f.min as f64, lower_ok));
        rows.push(Row::new("fiber_upper", format!("{inst} s={s}"), f.max as f64, two_over_lambda, upper_ok));
    }
    rows
}

fn lattice(max_side: usize, exec: Execution) -> Vec<Row> {
    let mut shapes = Vec::new();
    for a in 1..=max_side {
        for b in 1..=max_side {
            shapes.push(vec![a, b]);
            for c in 1..=max_side {
                shapes.push(vec![a, b, c]);
            }
        }
    }
    let jobs: Vec<(GridShape, Vec<i64>)> = shapes
        .into_iter()
        .map(|d| GridShape::new(d).expect("positive sides"))
        .flat_map(|s| admissible(&s).into_iter().map(move |b| (s.clone(), b)))
        .collect();
    exec.map(&jobs, |(shape, b)| lattice_rows(shape, b)).into_iter().flatten().collect()
}

/// Windows with `2L ≤ ∏(D_i+1)`: the certificate's own, then two larger ones.
fn windows(shape: &GridShape) -> Vec<(u64, Vec<u64>)> {
    let d = shape.d();
    let cert = lower_bound_value(shape);
    let mut w = vec![(cert.l.max(1), cert.d_box.clone())];
    let mut long = vec![0; d];
    long[0] = 3;
    w.push((2, long));
    if d >= 2 {
        w.push((2, vec![1; d]));
    }
    w
}

fn fourier(trials: u64, seed: u64, exec: Execution) -> Vec<Row> {
    const SHAPES: &[&[usize]] = &[&[4, 4], &[6, 6], &[4, 4, 4], &[16], &[5, 3], &[3, 2, 4]];
    let ids: Vec<u64> = (0..trials).collect();
    exec.map(&ids, |&t| {
        let mut r = stream(seed, 1 << 20 | t, Purpose::Instances);
        let shape = random_shape(&mut r, SHAPES);
        let values = (0..shape.cells()).map(|_| if r.gen_bool(0.5) { 1 } else { -1 }).collect();
        let chi = PartialColoring::from_values(shape.clone(), values).expect("full coloring");
        windows(&shape)
            .into_iter()
            .map(|(l, dbox)| {
                let inst = format!("{shape} trial={t} L={l} D={dbox:?}");
                match energy_check_with(&chi, l, &dbox, Execution::Sequential) {
                    Ok(e) => Row::new("energy", inst, e.rhs, e.lhs as f64, e.pass),
                    Err(err) => Row::new("energy", format!("{inst} {err}"), 1.0, 0.0, false),
                }
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

fn to_csv(rows: &[Row]) -> Result<String, Failure> {
    let io = |e: csv::Error| Failure::usage(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "instance", "oracle", "bound", "implied_constant", "pass"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.instance.clone(),
            format!("{}", r.oracle),
            format!("{}", r.bound),
            format!("{}", r.implied),
            r.pass.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Number of failed rows.
pub fn cmd_verify(args: &VerifyArgs, exec: Execution, man: &mut RunManifest) -> Result<usize, Failure> {
    if args.max_side == 0 {
        return Err(Failure::usage("--max-side must be positive"));
    }
    let mut rows = Vec::new();
    let all = args.suite == Suite::All;
    if all || args.suite == Suite::Counting {
        rows.extend(counting(args.trials, args.seed, exec));
    }
    if all || args.suite == Suite::Lattice {
        rows.extend(lattice(args.max_side, exec));
    }
    if all || args.suite == Suite::Fourier {
        rows.extend(fourier(args.trials, args.seed, exec));
    }
    emit(args.out.as_deref(), &to_csv(&rows)?)?;
    man.output(args.out.as_deref());
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} rows, {failed} failed", rows.len());
    Ok(failed)
}
