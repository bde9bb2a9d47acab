//! Per-size allowances `b(s)` for canonical block sums and the entropy
//! budget they must fit.

use serde::Serialize;

use crate::grid::GridShape;

/// `c = 10d + 2400`.
pub fn default_c(d: usize) -> f64 {
    10.0 * d as f64 + 2400.0
}

/// `10 e^{−λ²/4}` for `λ ≥ 2`, `10 ln(1 + 2/λ)` below.
pub fn g(lambda: f64) -> f64 {
    assert!(lambda > 0.0, "g is defined for positive arguments");
    if lambda >= 2.0 {
        10.0 * (-lambda * lambda / 4.0).exp()
    } else {
        10.0 * (1.0 + 2.0 / lambda).ln()
    }
}

/// `ln g(λ)`, finite where `g` underflows.
pub fn ln_g(lambda: f64) -> f64 {
    if lambda >= 2.0 {
        10f64.ln() - lambda * lambda / 4.0
    } else {
        g(lambda).ln()
    }
}

/// `c√s (s K^{−1/e})^{−1}` above the crossover `K^{1/e}`, exponent `−0.1` below.
///
/// `e = d + 1` for the standard schedule; the long-side branch uses `e = 2`.
pub fn b_single(c: f64, k: f64, e: f64, s: f64) -> f64 {
    let cross = k.powf(1.0 / e);
    let tau = s / cross;
    if s >= cross {
        c * s.sqrt() / tau
    } else {
        c * s.sqrt() * tau.powf(-0.1)
    }
}

/// The exponent `c_d = 1 / (2 · 4^{d+1} (d+1)³ (d+2)!)` of the density factor.
pub fn density_exponent(d: usize) -> f64 {
    let fact: f64 = (1..=d + 2).map(|k| k as f64).product();
    1.0 / (2.0 * 4f64.powi(d as i32 + 1) * (d as f64 + 1.0).powi(3) * fact)
}

/// Three-branch allowance for grids with `∏N ≤ (min N)^{d+1−δ}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreeBranch {
    pub d: usize,
    pub n_min: f64,
    pub n_max: f64,
    pub prod: f64,
    pub rho: f64,
    pub delta: f64,
    /// Constant of the refined counting bound, `C₀ 2^{d³} 5^d`.
    pub big_c: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub c1: f64,
    pub c2: f64,
    /// `b₃` applies on `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
}

impl ThreeBranch {
    pub fn new(shape: &GridShape, m: usize, delta: f64, c0: f64) -> Self {
        let d = shape.d() as f64;
        let prod = shape.cells() as f64;
        let n_min = shape.min_side() as f64;
        let rho = (m as f64 / prod).clamp(f64::MIN_POSITIVE, 1.0);
        let big_c = c0 * 2f64.powf(d * d * d) * 5f64.powf(d);
        let fact: f64 = (1..=shape.d() + 2).map(|k| k as f64).product();
        ThreeBranch {
            d: shape.d(),
            n_min,
            n_max: shape.max_side() as f64,
            prod,
            rho,
            delta,
            big_c,
            k1: 15.0 * 5f64.powf(d) * prod / n_min.powf(d - 1.0),
            k2: 15.0 * 5f64.powf(d) * prod,
            k3: 15.0 * big_c * prod * rho.powf(delta / (4f64.powf(d + 1.0) * (d + 1.0).powi(2) * fact)),
            c1: 2410.0,
            c2: default_c(shape.d()),
            lo: prod.powf(1.0 / (d + 1.0)) * rho.powf(delta / (4f64.powf(d) * (d + 1.0))),
            hi: n_min * rho.powf(delta / (4.0 * (d + 1.0).powi(2))),
        }
    }

    pub fn branch(&self, s: f64) -> u8 {
        if s > self.n_min {
            1
        } else if s >= self.lo && s <= self.hi {
            3
        } else {
            2
        }
    }

    pub fn b(&self, s: f64) -> f64 {
        let e = self.d as f64 + 1.0;
        match self.branch(s) {
            1 => b_single(self.c1, self.k1, 2.0, s),
            3 => b_single(self.c2, self.k3, e, s),
            _ => b_single(self.c2, self.k2, e, s),
        }
    }

    /// The three entropy sums, each of which must be at most 1.
    pub fn entropy_sums(&self) -> [f64; 3] {
        let e = self.d as f64 + 1.0;
        let mut sums = [0.0; 3];
        let mut s = 1.0;
        while s <= self.n_max {
            let br = self.branch(s);
            let term = match br {
                1 => self.k1 / (s * s) * g(b_single(self.c1, self.k1, 2.0, s) / s.sqrt()),
                3 => self.k3 / s.powf(e) * g(b_single(self.c2, self.k3, e, s) / s.sqrt()),
                _ => self.k2 / s.powf(e) * g(b_single(self.c2, self.k2, e, s) / s.sqrt()),
            };
            sums[br as usize - 1] += term;
            s *= 2.0;
        }
        sums
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ScheduleKind {
    Plain { k: f64 },
    ThreeBranch(ThreeBranch),
}

/// The allowance `b(s)` used for blocks of size `s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSchedule {
    pub d: usize,
    pub c: f64,
    pub kind: ScheduleKind,
}

impl DeltaSchedule {
    /// `K = 5^{d+1} ∏N`, `c = 10d + 2400`.
    pub fn plain(shape: &GridShape) -> Self {
        let d = shape.d();
        DeltaSchedule {
            d,
            c: default_c(d),
            kind: ScheduleKind::Plain { k: 5f64.powi(d as i32 + 1) * shape.cells() as f64 },
        }
    }

    pub fn with_k(d: usize, c: f64, k: f64) -> Self {
        DeltaSchedule { d, c, kind: ScheduleKind::Plain { k } }
    }

    pub fn three_branch(shape: &GridShape, m: usize, delta: f64, c0: f64) -> Self {
        let d = shape.d();
        DeltaSchedule { d, c: default_c(d), kind: ScheduleKind::ThreeBranch(ThreeBranch::new(shape, m, delta, c0)) }
    }

    pub fn b(&self, s: f64) -> f64 {
        match &self.kind {
            ScheduleKind::Plain { k } => b_single(self.c, *k, self.d as f64 + 1.0, s),
            ScheduleKind::ThreeBranch(t) => t.b(s),
        }
    }

    /// `K^{1/(d+1)}` for the plain form.
    pub fn crossover(&self) -> Option<f64> {
        match &self.kind {
            ScheduleKind::Plain { k } => Some(k.powf(1.0 / (self.d as f64 + 1.0))),
            ScheduleKind::ThreeBranch(_) => None,
        }
    }

    /// `Σ_{s = 2^t ≤ max_s} b(s)`.
    pub fn dyadic_sum(&self, max_s: usize) -> f64 {
        dyadic(max_s).map(|s| self.b(s as f64)).sum()
    }
}

pub fn dyadic_sizes(max_s: usize) -> impl Iterator<Item = usize> {
    dyadic(max_s)
}

pub(crate) fn dyadic(max_s: usize) -> impl Iterator<Item = usize> {
    (0..usize::BITS).map(|t| 1usize << t).take_while(move |&s| s <= max_s)
}

/// `Σ_{i≥0} K 2^{−i(d+1)} g(b(2^i)/2^{i/2})`; terms below `1e-15` of the
/// running total past the crossover are dropped.
pub fn series_value(c: f64, k: f64, d: usize) -> f64 {
    series_ln(c, k, d).exp()
}

/// `ln` of [`series_value`], accumulated with log-sum-exp so it stays finite
/// when every term underflows.
pub fn series_ln(c: f64, k: f64, d: usize) -> f64 {
    let e = d as f64 + 1.0;
    let ln_k = k.ln();
    let mut acc = f64::NEG_INFINITY;
    for i in 0..4096 {
        let s = 2f64.powi(i);
        let lambda = b_single(c, k, e, s) / s.sqrt();
        let ln_term = ln_k - i as f64 * e * 2f64.ln() + ln_g(lambda);
        let (hi, lo) = if ln_term > acc { (ln_term, acc) } else { (acc, ln_term) };
        acc = hi + (lo - hi).exp().ln_1p();
        if s >= k.powf(1.0 / e) && ln_term - acc < 1e-15f64.ln() {
            break;
        }
    }
    acc
}

/// Both sides of `Σ_{s dyadic ∈ [u,v]} b(s) ≤ 5cK^{1/(2d+2)} min((vK^{−1/(d+1)})^{0.4}, (uK^{−1/(d+1)})^{−0.5})`.
pub fn dyadic_b_sum_check(c: f64, k: f64, d: usize, u: f64, v: f64) -> (f64, f64) {
    let e = d as f64 + 1.0;
    let mut lhs = 0.0;
    let mut s = 1.0;
    while s <= v {
        if s >= u {
            lhs += b_single(c, k, e, s);
        }
        s *= 2.0;
    }
    let scale = k.powf(-1.0 / e);
    let rhs = 5.0 * c * k.powf(1.0 / (2.0 * e)) * (v * scale).powf(0.4).min((u * scale).powf(-0.5));
    (lhs, rhs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Feasibility {
    /// `Σ_s fbound(s) g(b(s)/√s)`.
    pub sum: f64,
    /// `m/5`.
    pub target: f64,
    pub ratio: f64,
}

/// Upper bound on `f(s, X)/|X|`: the simple count for `s ≤ min N`, the
/// long-side count `5^d ∏N / (min N)^{d−1} / s²` above.
pub fn f_over_m_bound(shape: &GridShape, s: usize) -> f64 {
    let d = shape.d() as i32;
    let prod = shape.cells() as f64;
    let n_min = shape.min_side() as f64;
    let sf = s as f64;
    if s <= shape.min_side() {
        5f64.powi(d) * prod / sf.powi(d + 1)
    } else {
        5f64.powi(d) * prod / n_min.powi(d - 1) / (sf * sf)
    }
}

pub fn schedule_feasibility(sched: &DeltaSchedule, shape: &GridShape, m: usize) -> Feasibility {
    assert!(m >= 1);
    let mf = m as f64;
    let sum: f64 = dyadic(shape.max_side())
        .map(|s| f_over_m_bound(shape, s) * mf * g(sched.b(s as f64) / (s as f64).sqrt()))
        .sum();
    Feasibility { sum, target: mf / 5.0, ratio: sum / (mf / 5.0) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_is_decreasing_and_matches_branches() {
        assert!((g(2.0) - 10.0 * (-1f64).exp()).abs() < 1e-12);
        assert!((g(1.0) - 10.0 * 3f64.ln()).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for i in 1..2000 {
            let v = g(i as f64 * 0.01);
            assert!(v < prev);
            prev = v;
        }
        assert!(g(10.0) <= 0.125);
    }

    #[test]
    fn b_is_continuous_at_crossover() {
        let (c, k, e) = (2410.0, 5f64.powi(2) * 256.0, 2.0);
        let cross = k.powf(1.0 / e);
        let below = b_single(c, k, e, cross * (1.0 - 1e-12));
        let above = b_single(c, k, e, cross);
        assert!((below - above).abs() / above < 1e-9);
        assert!((above - c * cross.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn plain_schedule_is_feasible_for_a_line() {
        let shape = GridShape::new(vec![256]).unwrap();
        let sched = DeltaSchedule::plain(&shape);
        let rep = schedule_feasibility(&sched, &shape, 256);
        assert!(rep.sum <= rep.target);
        let huge = DeltaSchedule::with_k(1, 1e9, 25.0 * 256.0);
        assert!(schedule_feasibility(&huge, &shape, 256).sum < 1e-100);
    }

    #[test]
    fn series_bound() {
        for d in 1..=3 {
            for p in 0..=10 {
                let k = 10f64.powi(p);
                assert!(series_value(default_c(d), k, d) <= 1.0);
            }
        }
    }

    #[test]
    fn three_branch_ranges() {
        let shape = GridShape::new(vec![64, 64]).unwrap();
        let tb = ThreeBranch::new(&shape, 4096, 1.0, 1.0);
        assert_eq!(tb.branch(1.0), 2);
        assert_eq!(tb.branch(16.0), 3);
        assert_eq!(tb.branch(128.0), 1);
        assert!(tb.entropy_sums().iter().all(|&v| v <= 1.0));
        assert!(density_exponent(1) > 0.0 && density_exponent(1) < 1e-3);
    }
}
