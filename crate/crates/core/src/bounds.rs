//! Closed-form counting bounds and verifiers that compare them against exact
//! counts on concrete point sets.
//!
//! Formulas are evaluated in `f64`; the verifiers compare integer counts
//! against the bounds with cleared denominators wherever the bound is
//! rational, so pass/fail is exact.

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::canonical::{directions_for, f_count, u_set};
use crate::error::{Error, Result};
use crate::grid::{GridShape, Point};

/// Parameters of the refined counting bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundParams {
    pub shape: GridShape,
    pub m: usize,
    pub rho: f64,
    pub delta: f64,
    pub beta: f64,
    pub s: usize,
}

impl BoundParams {
    pub fn new(shape: GridShape, m: usize, delta: f64, beta: f64, s: usize) -> Result<Self> {
        if m > shape.cells() {
            return Err(Error::Precondition(format!("m = {m} exceeds the grid size")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Precondition(format!("delta = {delta} not in (0, 1]")));
        }
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::Precondition(format!("beta = {beta} not in (0, 1/2)")));
        }
        let rho = m as f64 / shape.cells() as f64;
        Ok(BoundParams { shape, m, rho, delta, beta, s })
    }
}

/// One checked inequality `oracle ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub instance: String,
    pub oracle: f64,
    pub bound: f64,
    /// `oracle / bound`: the smallest multiplier on the bound that would make it hold.
    pub implied_constant: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, instance: String, oracle: f64, bound: f64, pass: bool) -> Self {
        let implied_constant = if bound > 0.0 {
            oracle / bound
        } else if oracle == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Check { name: name.into(), instance, oracle, bound, implied_constant, pass }
    }
}

fn product(shape: &GridShape) -> u128 {
    shape.dims().iter().map(|&n| n as u128).product()
}

/// `5^d · N₁⋯N_d · m / s^{d+1}`.
pub fn bound_f_simple(shape: &GridShape, m: usize, s: usize) -> Result<f64> {
    if s == 0 || s > shape.min_side() {
        return Err(Error::Precondition(format!("s = {s} not in [1, {}]", shape.min_side())));
    }
    let d = shape.d() as i32;
    Ok(5f64.powi(d) * product(shape) as f64 * m as f64 / (s as f64).powi(d + 1))
}

/// `m · ∏(4N_i/s + 1)`.
pub fn bound_u_box(shape: &GridShape, m: usize, s: usize) -> Result<f64> {
    if s < 2 {
        return Err(Error::Precondition(format!("s = {s} < 2")));
    }
    Ok(m as f64
        * shape
            .dims()
            .iter()
            .map(|&n| 4.0 * n as f64 / s as f64 + 1.0)
            .product::<f64>())
}

/// Largest `δ ∈ (0, 1]` with `N₁⋯N_d ≤ (min N_i)^{d+1−δ}`, if any.
pub fn shape_delta(shape: &GridShape) -> Option<f64> {
    let min = shape.min_side() as f64;
    let prod = product(shape) as f64;
    if prod <= 1.0 {
        return Some(1.0);
    }
    if min <= 1.0 {
        return None;
    }
    let delta = (shape.d() as f64 + 1.0 - prod.ln() / min.ln()).min(1.0);
    (delta > 0.0).then_some(delta)
}

/// The admissible range `[(∏N)^{1/(d+1)} ρ^{δ/(4^d(d+1))}, (min N) ρ^β]` for `s`.
pub fn refined_window(p: &BoundParams) -> (f64, f64) {
    let d = p.shape.d() as f64;
    let prod = product(&p.shape) as f64;
    let lo = prod.powf(1.0 / (d + 1.0)) * p.rho.powf(p.delta / (4f64.powf(d) * (d + 1.0)));
    let hi = p.shape.min_side() as f64 * p.rho.powf(p.beta);
    (lo, hi)
}

/// `C₀ 2^{d³} 5^d (m ∏N / s^d) ρ^{min(β,δ)/(4^d (d+2)!)}`.
///
/// Errors distinguish a failing shape condition, an empty window and an `s`
/// outside a nonempty window.
pub fn bound_u_refined(p: &BoundParams, c0: f64) -> Result<f64> {
    let d = p.shape.d();
    let prod = product(&p.shape) as f64;
    let min = p.shape.min_side() as f64;
    // Compare logarithms; both sides are exact integers only for integral δ.
    if prod.ln() > (d as f64 + 1.0 - p.delta) * min.ln() + 1e-12 {
        return Err(Error::ShapeCondition(format!(
            "{} > (min N)^{}",
            p.shape,
            d as f64 + 1.0 - p.delta
        )));
    }
    let (lo, hi) = refined_window(p);
    if lo > hi {
        return Err(Error::WindowEmpty { lo, hi });
    }
    let s = p.s as f64;
    if s < lo || s > hi {
        return Err(Error::OutsideWindow { s: p.s, lo, hi });
    }
    let df = d as f64;
    let fact: f64 = (1..=d + 2).map(|k| k as f64).product();
    let exponent = p.beta.min(p.delta) / (4f64.powf(df) * fact);
    Ok(c0
        * 2f64.powf(df * df * df)
        * 5f64.powf(df)
        * p.m as f64
        * prod
        / s.powf(df)
        * p.rho.powf(exponent))
}

/// `Σ_{b≠0} |U(X, b, s)|` with both signs of `b` counted, for `s ≥ 2`.
pub fn u_sum(x: &[Point], s: usize) -> u64 {
    assert!(s >= 2);
    2 * directions_for(x, s)
        .iter()
        .map(|b| u_set(x, b, s).len() as u64)
        .sum::<u64>()
}

/// `6^d · ε · n₁⋯n_d`.
pub fn bound_small_gcd_count(n: &[u64], eps: Ratio<i64>) -> Result<Ratio<i64>> {
    check_eps(n, eps)?;
    let prod: i64 = n.iter().map(|&v| v as i64).product();
    Ok(Ratio::from_integer(6i64.pow(n.len() as u32) * prod) * eps)
}

fn check_eps(n: &[u64], eps: Ratio<i64>) -> Result<()> {
    if n.is_empty() {
        return Err(Error::Precondition("empty box".into()));
    }
    if eps <= Ratio::from_integer(0) || eps > Ratio::from_integer(1) {
        return Err(Error::Precondition(format!("eps = {eps} not in (0, 1]")));
    }
    if n.iter().any(|&v| Ratio::from_integer(v as i64) * eps < Ratio::from_integer(1)) {
        return Err(Error::Precondition(format!("1/eps exceeds some n_i in {n:?}")));
    }
    Ok(())
}

/// Nonzero `b ∈ ∏[−n_i, n_i]` with `|b_i / gcd(b)| ≤ ε n_i` for all `i`.
pub fn count_small_gcd(n: &[u64], eps: Ratio<i64>) -> u64 {
    let (num, den) = (*eps.numer(), *eps.denom());
    let d = n.len();
    let mut b: Vec<i64> = n.iter().map(|&v| -(v as i64)).collect();
    let mut count = 0;
    loop {
        let g = b.iter().fold(0i64, |g, &v| g.gcd(&v));
        if g != 0
            && b
                .iter()
                .zip(n)
                .all(|(&bi, &ni)| bi.abs() * den <= num * ni as i64 * g)
        {
            count += 1;
        }
        let mut i = d;
        loop {
            if i == 0 {
                return count;
            }
            i -= 1;
            if b[i] < n[i] as i64 {
                b[i] += 1;
                break;
            }
            b[i] = -(n[i] as i64);
        }
    }
}

/// `Σ_{i,j} |A_i ∩ A_j|` against `(Σ|A_i|)² / m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionCheck {
    pub lhs: u128,
    /// `(Σ|A_i|)²`; the compared quantity is this over `m`.
    pub rhs_numer: u128,
    pub m: u128,
}

impl IntersectionCheck {
    pub fn rhs(&self) -> f64 {
        self.rhs_numer as f64 / self.m as f64
    }

    pub fn pass(&self) -> bool {
        self.lhs * self.m >= self.rhs_numer
    }

    pub fn is_equality(&self) -> bool {
        self.lhs * self.m == self.rhs_numer
    }
}

pub fn cauchy_schwarz_check(x: &[Point], family: &[Vec<Point>]) -> Result<IntersectionCheck> {
    if x.is_empty() {
        return Err(Error::Precondition("X is empty".into()));
    }
    let mut universe = x.to_vec();
    universe.sort();
    universe.dedup();
    let sets: Vec<Vec<usize>> = family
        .iter()
        .map(|a| {
            let mut idx = a
                .iter()
                .map(|p| {
                    universe
                        .binary_search(p)
                        .map_err(|_| Error::Precondition(format!("{p} is not in X")))
                })
                .collect::<Result<Vec<_>>>()?;
            idx.sort_unstable();
            idx.dedup();
            Ok(idx)
        })
        .collect::<Result<_>>()?;
    let mut lhs = 0u128;
    for a in &sets {
        for b in &sets {
            lhs += sorted_intersection(a, b) as u128;
        }
    }
    let total: u128 = sets.iter().map(|a| a.len() as u128).sum();
    Ok(IntersectionCheck { lhs, rhs_numer: total * total, m: universe.len() as u128 })
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `C · N^{1/2} m^{3/2} / s` for `s ≥ 5√m`.
pub fn ms_base_bound(n: usize, m: usize, s: usize, c: f64) -> Result<f64> {
    if (s * s) < 25 * m {
        return Err(Error::Precondition(format!("s = {s} below 5·sqrt({m})")));
    }
    Ok(c * (n as f64).sqrt() * (m as f64).powf(1.5) / s as f64)
}

fn describe(shape: &GridShape, x: &[Point], s: usize) -> String {
    format!("shape={shape} m={} s={s}", x.len())
}

/// `f(s, X) ≤ (1/s) Σ_b |U(X, b, s)|`, with the sum over sign-normalized `b`
/// (half the two-signed sum, so this is the sharper form).
pub fn check_f_by_u(shape: &GridShape, x: &[Point], s: usize) -> Result<Check> {
    let f = f_count(x, s)?;
    let u: u64 = if s == 1 {
        return Ok(Check::new("f_by_u", describe(shape, x, s), f as f64, f as f64, true));
    } else {
        u_sum(x, s) / 2
    };
    Ok(Check::new(
        "f_by_u",
        describe(shape, x, s),
        f as f64,
        u as f64 / s as f64,
        f * s as u64 <= u,
    ))
}

/// `f(s, X) ≤ 5^d ∏N · m / s^{d+1}`.
pub fn check_f_simple(shape: &GridShape, x: &[Point], s: usize) -> Result<Check> {
    let bound = bound_f_simple(shape, x.len(), s)?;
    let f = f_count(x, s)? as u128;
    let d = shape.d() as u32;
    let pass = f * (s as u128).pow(d + 1) <= 5u128.pow(d) * product(shape) * x.len() as u128;
    Ok(Check::new("f_simple", describe(shape, x, s), f as f64, bound, pass))
}

/// Two-signed `Σ_b |U(X, b, s)| ≤ m ∏(4N_i/s + 1)`.
pub fn check_u_box(shape: &GridShape, x: &[Point], s: usize) -> Result<Check> {
    let bound = bound_u_box(shape, x.len(), s)?;
    let u = u_sum(x, s) as u128;
    let d = shape.d() as u32;
    let rhs: u128 =
        x.len() as u128 * shape.dims().iter().map(|&n| 4 * n as u128 + s as u128).product::<u128>();
    let pass = u * (s as u128).pow(d) <= rhs;
    Ok(Check::new("u_box", describe(shape, x, s), u as f64, bound, pass))
}

/// Two-signed `Σ_b |U(X, b, s)|` against the refined bound with constant `c0`.
pub fn check_u_refined(p: &BoundParams, x: &[Point], c0: f64) -> Result<Check> {
    let bound = bound_u_refined(p, c0)?;
    let u = if p.s >= 2 { u_sum(x, p.s) } else { 0 };
    Ok(Check::new(
        "u_refined",
        format!("{} delta={} beta={}", describe(&p.shape, x, p.s), p.delta, p.beta),
        u as f64,
        bound,
        u as f64 <= bound,
    ))
}

/// Two-signed `Σ_b |U¹(X, b, s)| ≤ C N^{1/2} m^{3/2} / s`.
pub fn check_ms_base(n: usize, x: &[Point], s: usize, c: f64) -> Result<Check> {
    let bound = ms_base_bound(n, x.len(), s, c)?;
    let u = if x.is_empty() { 0 } else { u_sum(x, s) };
    Ok(Check::new(
        "ms_base",
        format!("N={n} m={} s={s} C={c}", x.len()),
        u as f64,
        bound,
        u as f64 <= bound,
    ))
}

pub fn check_small_gcd(n: &[u64], eps: Ratio<i64>) -> Result<Check> {
    let bound = bound_small_gcd_count(n, eps)?;
    let count = count_small_gcd(n, eps);
    let pass = Ratio::from_integer(count as i64) <= bound;
    Ok(Check::new(
        "small_gcd",
        format!("n={n:?} eps={eps}"),
        count as f64,
        *bound.numer() as f64 / *bound.denom() as f64,
        pass,
    ))
}

pub fn check_cauchy_schwarz(x: &[Point], family: &[Vec<Point>]) -> Result<Check> {
    let c = cauchy_schwarz_check(x, family)?;
    // Reported as rhs ≤ lhs, so the "oracle" is the lower side here.
    Ok(Check::new(
        "cauchy_schwarz",
        format!("m={} k={}", x.len(), family.len()),
        c.rhs(),
        c.lhs as f64,
        c.pass(),
    ))
}

/// Lower and upper discrepancy values for a shape.
///
/// The upper forms are shapes of bounds with the existential constant set to
/// 1, not bounds themselves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub shape: GridShape,
    /// `c_d · R`.
    pub lower: f64,
    pub r: f64,
    pub i_star: Vec<usize>,
    pub c_d: f64,
    pub l: u64,
    pub d_box: Vec<u64>,
    pub trivial_lower: bool,
    /// Largest `δ ≤ 1` with `∏N ≤ (min N)^{d+1−δ}`.
    pub delta: Option<f64>,
    /// `(1/δ) (∏N)^{1/(2d+2)}` when `δ` exists.
    pub upper_almost_cube: Option<f64>,
    /// `(ln P / ln ln P) · R` with `P = ∏N`, when `ln ln P > 0`.
    pub upper_general: Option<f64>,
}

pub fn bound_report(shape: &GridShape) -> BoundReport {
    let cert = crate::certify::lower_bound_value(shape);
    let d = shape.d() as f64;
    let prod = product(shape) as f64;
    let delta = shape_delta(shape);
    let loglog = prod.ln().ln();
    BoundReport {
        shape: shape.clone(),
        lower: cert.value,
        r: cert.r,
        i_star: cert.i_star,
        c_d: cert.c_d,
        l: cert.l,
        d_box: cert.d_box,
        trivial_lower: cert.trivial,
        delta,
        upper_almost_cube: delta.map(|dl| prod.powf(1.0 / (2.0 * d + 2.0)) / dl),
        upper_general: (prod > 1.0 && loglog > 0.0).then(|| prod.ln() / loglog * cert.r),
    }
}
