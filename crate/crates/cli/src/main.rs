//! `apdisc` command-line front end.
//!
//! Exit codes: 0 ok, 1 a verification or solve failure, 2 usage or I/O.

mod manifest;
mod verify;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use apdisc::certify::lower_bound_value;
use apdisc::grid::disc_eval_with;
use apdisc::io::{read_basis, read_coloring, write_basis, write_coloring};
use apdisc::lattice::{default_delta, lll_reduce, LatticeBasis};
use apdisc::par::Execution;
use apdisc::solver::{compose_general, full_color, Method, SolveConfig, CALIBRATED_DELTA_SCALE};
use apdisc::sweep::{fit_slope, run_sweep, write_csv, CSV_SCHEMA};
use apdisc::{bounds, Error, GridShape};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::RunManifest;

#[derive(Parser, Debug, Serialize)]
#[command(name = "apdisc", version, about = "Discrepancy of arithmetic progressions in grids")]
struct Cli {
    /// Worker threads for data-parallel loops; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Build a coloring and write it in the coloring file format.
    Color(ColorArgs),
    /// Print the discrepancy of a coloring file and a progression attaining it.
    Eval {
        file: PathBuf,
    },
    /// Lower and upper bound forms for a shape.
    Bounds {
        #[arg(long, value_parser = parse_shape)]
        shape: Dims,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the counting, lattice and energy inequalities on generated instances.
    Verify(verify::VerifyArgs),
    /// Run the solver over a ladder of shapes and write the CSV.
    Sweep(SweepArgs),
    /// LLL-reduce a basis file.
    Lll {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    PartialColoring,
    Random,
    Exact,
}

#[derive(clap::Args, Debug, Serialize)]
struct ColorArgs {
    /// Side lengths `N1,...,Nd`.
    #[arg(long, value_parser = parse_shape)]
    shape: Dims,
    #[arg(long, value_enum, default_value = "partial-coloring")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Multiplier on the schedule allowances.
    #[arg(long, default_value_t = CALIBRATED_DELTA_SCALE)]
    delta_scale: f64,
}

#[derive(clap::Args, Debug, Serialize)]
struct SweepArgs {
    /// Dimension; each ladder entry `n` becomes the cube `n^d`.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Ladder entries: a side `n`, or an explicit shape `N1xN2x...`.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    shapes: Vec<String>,
    /// Seeds per shape, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write `NA` instead of runtimes so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Print the least-squares slope of ln disc on ln max side.
    #[arg(long)]
    fit: bool,
    #[arg(long, default_value_t = CALIBRATED_DELTA_SCALE)]
    delta_scale: f64,
}

/// Side lengths as given on the command line.
#[derive(Clone, Debug, Serialize)]
#[serde(transparent)]
struct Dims(Vec<usize>);

fn parse_shape(s: &str) -> Result<Dims, String> {
    let dims = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if dims.contains(&0) {
        return Err("side lengths must be positive".into());
    }
    GridShape::new(dims.clone()).map_err(|e| e.to_string())?;
    Ok(Dims(dims))
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }

    fn failed(msg: impl Into<String>) -> Self {
        Failure { code: 1, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver(_) | Error::Invariant(_) => 1,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn write_file(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::usage(format!("writing {}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))
}

/// Write to `path`, or stdout when there is none.
fn emit(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => write_file(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::usage(format!("stdout: {e}"))),
    }
}

fn shape_of(dims: &[usize]) -> Result<GridShape, Failure> {
    GridShape::new(dims.to_vec()).map_err(|e| Failure::usage(e.to_string()))
}

fn execution(threads: Option<usize>) -> Execution {
    match threads {
        Some(1) => Execution::Sequential,
        _ => Execution::default(),
    }
}

fn cmd_color(args: &ColorArgs, exec: Execution, man: &mut RunManifest) -> CmdResult {
    let shape = shape_of(&args.shape.0)?;
    let method = match args.method {
        MethodArg::PartialColoring => Method::PartialColoring,
        MethodArg::Random => Method::Random,
        MethodArg::Exact => Method::Exact,
    };
    let config = SolveConfig { method, seed: args.seed, delta_scale: args.delta_scale, execution: exec, ..SolveConfig::default() };
    // The exact search and the plain random coloring work on the whole grid;
    // the walk goes through the slice composition.
    let (chi, bound) = match method {
        Method::PartialColoring => {
            let c = compose_general(&shape, &config)?;
            (c.coloring, c.bound)
        }
        _ => {
            let s = full_color(&shape, &config)?;
            (s.coloring, s.bound)
        }
    };
    let ev = disc_eval_with(&chi, exec, |_| true);
    eprintln!("shape {shape} disc {} bound {bound:.6} witness {}", ev.value, ev.witness);
    emit(args.out.as_deref(), &write_coloring(&chi))?;
    man.output(args.out.as_deref());
    Ok(())
}

fn cmd_eval(file: &Path, exec: Execution) -> CmdResult {
    let chi = read_coloring(&read_file(file)?)?;
    let ev = disc_eval_with(&chi, exec, |_| true);
    println!("disc {}", ev.value);
    println!("{}", ev.witness);
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("NA".into(), |x| format!("{x:.6}"))
}

fn cmd_bounds(dims: &[usize], csv_path: Option<&Path>, man: &mut RunManifest) -> CmdResult {
    let shape = shape_of(dims)?;
    let rep = bounds::bound_report(&shape);
    let cert = lower_bound_value(&shape);
    let axes: Vec<String> = rep.i_star.iter().map(|i| (i + 1).to_string()).collect();
    let dbox: Vec<String> = rep.d_box.iter().map(|v| v.to_string()).collect();
    let rows: Vec<(&str, String)> = vec![
        ("shape", shape.to_string()),
        ("lower c_d*R", format!("{:.6}", rep.lower)),
        ("guaranteed disc", format!("{:.6}", cert.floor().max(1.0))),
        ("R", format!("{:.6}", rep.r)),
        ("c_d", format!("{:.6}", rep.c_d)),
        ("I_star", axes.join(" ")),
        ("L", rep.l.to_string()),
        ("D", dbox.join(" ")),
        ("trivial lower", rep.trivial_lower.to_string()),
        ("delta", fmt_opt(rep.delta)),
        ("upper almost-cube (shape, not constant)", fmt_opt(rep.upper_almost_cube)),
        ("upper general (shape, not constant)", fmt_opt(rep.upper_general)),
    ];
    for (k, v) in &rows {
        println!("{k:<42} {v}");
    }
    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Failure::usage(e.to_string());
        w.write_record(["quantity", "value"]).map_err(io)?;
        for (k, v) in &rows {
            w.write_record([*k, v.as_str()]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::usage(e.to_string()))?;
        write_file(path, &String::from_utf8_lossy(&bytes))?;
        man.output(Some(path));
    }
    Ok(())
}

fn ladder(args: &SweepArgs) -> Result<Vec<GridShape>, Failure> {
    if args.d == 0 {
        return Err(Failure::usage("--d must be positive"));
    }
    if args.shapes.is_empty() {
        return Err(Failure::usage("empty ladder: pass --shapes"));
    }
    args.shapes
        .iter()
        .map(|entry| {
            let dims = if entry.contains('x') {
                parse_shape(&entry.replace('x', ","))
            } else {
                parse_shape(entry).map(|n| Dims(vec![n.0[0]; args.d]))
            };
            dims.map_err(Failure::usage).and_then(|d| shape_of(&d.0))
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs, exec: Execution, man: &mut RunManifest) -> CmdResult {
    let shapes = ladder(args)?;
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be positive"));
    }
    let seeds: Vec<u64> = (args.seed..args.seed + args.reps).collect();
    let config = SolveConfig { delta_scale: args.delta_scale, execution: exec, ..SolveConfig::default() };
    let rows = run_sweep(&shapes, &seeds, &config, !args.no_timing)?;
    emit(args.out.as_deref(), &write_csv(&rows))?;
    man.output(args.out.as_deref());
    man.csv_schema = Some(CSV_SCHEMA.into());
    man.timing = !args.no_timing;
    if args.fit {
        match fit_slope(&rows) {
            Some(f) => eprintln!("slope {:.4} ± {:.4} (95%) over {} points", f.slope, f.ci95, f.points),
            None => eprintln!("slope: fewer than two usable points"),
        }
    }
    Ok(())
}

fn cmd_lll(file: &Path, out: Option<&Path>, man: &mut RunManifest) -> CmdResult {
    let rows = read_basis(&read_file(file)?)?;
    let basis = LatticeBasis::from_integers(&rows)?;
    let reduced = lll_reduce(&basis, &default_delta())?;
    let ints = reduced
        .to_i64()
        .ok_or_else(|| Failure::failed("reduced basis left the 64-bit range"))?;
    emit(out, &write_basis(&ints))?;
    man.output(out);
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let exec = execution(cli.threads);
    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads.filter(|&n| n > 1) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let mut man = RunManifest::new(cli, exec);
    let manifest_base: Option<PathBuf> = match &cli.command {
        Command::Color(a) => {
            cmd_color(a, exec, &mut man)?;
            a.out.clone()
        }
        Command::Eval { file } => {
            cmd_eval(file, exec)?;
            None
        }
        Command::Bounds { shape, csv } => {
            cmd_bounds(&shape.0, csv.as_deref(), &mut man)?;
            csv.clone()
        }
        Command::Verify(a) => {
            let failed = verify::cmd_verify(a, exec, &mut man)?;
            if let Some(out) = &a.out {
                man.write_beside(out)?;
            }
            if failed > 0 {
                return Err(Failure::failed(format!("{failed} inequalities failed")));
            }
            None
        }
        Command::Sweep(a) => {
            cmd_sweep(a, exec, &mut man)?;
            a.out.clone()
        }
        Command::Lll { file, out } => {
            cmd_lll(file, out.as_deref(), &mut man)?;
            out.clone()
        }
    };
    if let Some(base) = manifest_base {
        man.write_beside(&base)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
