//! Exact lattice tools: LLL over the rationals, integer kernels, Hermite
//! normal form, bounded Minkowski search, and the projection `f_b` that
//! collapses one direction of a grid.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::{GridShape, Point};

pub type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Nearest integer, halves rounded up.
fn round(x: &Q) -> BigInt {
    (x + Q::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

/// `k` linearly independent rational vectors in `Q^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    vectors: Vec<Vec<Q>>,
}

impl LatticeBasis {
    pub fn new(vectors: Vec<Vec<Q>>) -> Result<Self> {
        let n = vectors.first().map_or(0, |v| v.len());
        if vectors.is_empty() || n == 0 {
            return Err(Error::Precondition("empty basis".into()));
        }
        if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        let basis = LatticeBasis { vectors };
        if basis.gram_det().is_zero() {
            return Err(Error::DependentBasis);
        }
        Ok(basis)
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect())
    }

    pub fn vectors(&self) -> &[Vec<Q>] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn gram(&self) -> Vec<Vec<Q>> {
        self.vectors
            .iter()
            .map(|a| self.vectors.iter().map(|b| dot(a, b)).collect())
            .collect()
    }

    /// `det(Γ)²`.
    pub fn gram_det(&self) -> Q {
        determinant(self.gram())
    }

    /// Rows as integers, if every entry is integral.
    pub fn to_integers(&self) -> Option<Vec<Vec<BigInt>>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|x| x.is_integer().then(|| x.to_integer())).collect())
            .collect()
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.to_integers()?
            .into_iter()
            .map(|r| r.iter().map(|x| x.to_i64()).collect())
            .collect()
    }
}

/// Determinant by Gaussian elimination over `Q`.
pub fn determinant(mut a: Vec<Vec<Q>>) -> Q {
    let n = a.len();
    let mut det = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let sub = &f * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// Gram–Schmidt vectors and coefficients `μ_{ij} = ⟨b_i, b*_j⟩ / ⟨b*_j, b*_j⟩`.
pub fn gram_schmidt(b: &[Vec<Q>]) -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let k = b.len();
    let mut bs: Vec<Vec<Q>> = Vec::with_capacity(k);
    let mut norms: Vec<Q> = Vec::with_capacity(k);
    let mut mu = vec![vec![Q::zero(); k]; k];
    for i in 0..k {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&b[i], &bs[j]) / &norms[j];
            for (vc, bc) in v.iter_mut().zip(&bs[j]) {
                *vc -= &mu[i][j] * bc;
            }
        }
        mu[i][i] = Q::one();
        norms.push(dot(&v, &v));
        bs.push(v);
    }
    (bs, mu)
}

/// Size-reduced (`|μ_ij| ≤ ½`) and Lovász (`‖b*_k‖² ≥ (δ − μ²_{k,k−1})‖b*_{k−1}‖²`).
pub fn is_lll_reduced(basis: &LatticeBasis, delta: &Q) -> bool {
    let (bs, mu) = gram_schmidt(basis.vectors());
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let size = (0..mu.len()).all(|i| (0..i).all(|j| mu[i][j].abs() <= half));
    let lovasz = (1..bs.len()).all(|k| {
        let mu2 = &mu[k][k - 1] * &mu[k][k - 1];
        dot(&bs[k], &bs[k]) >= (delta - mu2) * dot(&bs[k - 1], &bs[k - 1])
    });
    size && lovasz
}

/// LLL reduction with parameter `delta ∈ (1/4, 1)`, exact throughout.
pub fn lll_reduce(basis: &LatticeBasis, delta: &Q) -> Result<LatticeBasis> {
    if *delta <= Q::new(BigInt::one(), BigInt::from(4)) || *delta >= Q::one() {
        return Err(Error::Precondition(format!("delta = {delta} not in (1/4, 1)")));
    }
    let mut b = basis.vectors.clone();
    let n = b.len();
    let (mut bs, mut mu) = gram_schmidt(&b);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let r = round(&mu[k][j]);
            if r.is_zero() {
                continue;
            }
            let rq = Q::from_integer(r);
            let bj = b[j].clone();
            for (x, y) in b[k].iter_mut().zip(&bj) {
                *x -= &rq * y;
            }
            for i in 0..=j {
                let sub = &rq * &mu[j][i];
                mu[k][i] -= sub;
            }
        }
        let mu2 = &mu[k][k - 1] * &mu[k][k - 1];
        if dot(&bs[k], &bs[k]) >= (delta - mu2) * dot(&bs[k - 1], &bs[k - 1]) {
            k += 1;
        } else {
            b.swap(k, k - 1);
            (bs, mu) = gram_schmidt(&b);
            k = (k - 1).max(1);
        }
    }
    Ok(LatticeBasis { vectors: b })
}

/// `3/4`, the reduction parameter used throughout.
pub fn default_delta() -> Q {
    Q::new(BigInt::from(3), BigInt::from(4))
}

/// Row-style Hermite normal form of an integer matrix with independent rows:
/// echelon form, positive pivots, entries above each pivot in `[0, pivot)`.
pub fn hermite_normal_form(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        // Euclid on column c among rows r.. until one nonzero remains.
        loop {
            let nz: Vec<usize> = (r..m).filter(|&i| !a[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| a[i][c].abs()).unwrap();
            for &i in &nz {
                if i == p {
                    continue;
                }
                let f = a[i][c].div_floor(&a[p][c]);
                let prow = a[p].clone();
                for (x, y) in a[i].iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        let Some(p) = (r..m).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        for i in 0..r {
            let f = a[i][c].div_floor(&a[r][c]);
            if !f.is_zero() {
                let prow = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

fn sign_normalize(v: &mut [i64]) {
    if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Basis of `{r ∈ Z^d : r·b = 0}` for primitive `b`, LLL-reduced.
pub fn integer_kernel_basis(b: &[i64]) -> Result<Vec<Vec<i64>>> {
    let d = b.len();
    if b.iter().all(|&v| v == 0) {
        return Err(Error::InvalidProgression("difference vector is zero".into()));
    }
    let g = b.iter().fold(0i64, |g, &v| g.gcd(&v));
    if g != 1 {
        return Err(Error::Precondition(format!("gcd of {b:?} is {g}, not 1")));
    }
    if d == 1 {
        return Ok(Vec::new());
    }
    // Unimodular column operations carry b to ±e_p; the other columns of U span the kernel.
    let mut v: Vec<i128> = b.iter().map(|&x| x as i128).collect();
    let mut u: Vec<Vec<i128>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i128).collect()).collect();
    let p = loop {
        let nz: Vec<usize> = (0..d).filter(|&i| v[i] != 0).collect();
        let p = *nz.iter().min_by_key(|&&i| v[i].abs()).unwrap();
        if nz.len() == 1 {
            break p;
        }
        for &i in &nz {
            if i != p {
                let f = v[i].div_euclid(v[p]);
                v[i] -= f * v[p];
                for row in u.iter_mut() {
                    row[i] -= f * row[p];
                }
            }
        }
    };
    let kernel: Vec<Vec<i64>> = (0..d)
        .filter(|&c| c != p)
        .map(|c| (0..d).map(|r| u[r][c] as i64).collect())
        .collect();
    let reduced = lll_reduce(&LatticeBasis::from_integers(&kernel)?, &default_delta())?;
    let mut rows = reduced.to_i64().ok_or_else(|| Error::Invariant("kernel left Z^d".into()))?;
    rows.iter_mut().for_each(|r| sign_normalize(r));
    Ok(rows)
}

/// Whether integer rows (`k < n`) form a saturated lattice: the gcd of all
/// maximal minors is 1.
pub fn is_saturated(rows: &[Vec<i64>]) -> bool {
    let k = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut g = BigInt::zero();
    let mut cols: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return k == 0;
    }
    loop {
        let minor: Vec<Vec<Q>> = rows.iter().map(|r| cols.iter().map(|&c| q(r[c])).collect()).collect();
        g = g.gcd(&determinant(minor).to_integer());
        // Next k-subset of 0..n in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return g.is_one();
            }
            i -= 1;
            if cols[i] < n - k + i {
                cols[i] += 1;
                for j in i + 1..k {
                    cols[j] = cols[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The map `x ↦ Mx + v` collapsing direction `b` of a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionMap {
    pub source: Vec<i64>,
    /// `b / gcd(b)`.
    pub primitive: Vec<i64>,
    /// `λ = max_i |b_i| / (gcd(b) N_i)`.
    pub lambda: Q,
    /// Rows `r_j` of `M`.
    pub rows: Vec<Vec<i64>>,
    /// `r*_j = (r_{j1}N₁, …, r_{jd}N_d)`.
    pub scaled_rows: Vec<Vec<i64>>,
    pub offset: Vec<i64>,
    pub target: GridShape,
}

impl ProjectionMap {
    pub fn apply(&self, x: &Point) -> Point {
        Point(self.rows.iter().zip(&self.offset).map(|(r, v)| x.dot(r) + v).collect())
    }

    /// `∏N*_j / (λ ∏N_i)`.
    pub fn volume_ratio(&self, shape: &GridShape) -> Q {
        let target: BigInt = self.target.dims().iter().map(|&n| BigInt::from(n)).product();
        let source: BigInt = shape.dims().iter().map(|&n| BigInt::from(n)).product();
        Q::from_integer(target) / (&self.lambda * Q::from_integer(source))
    }
}

/// `‖b*‖₂²` with `b* = (b_i / (gcd(b) N_i))`.
pub fn b_star_norm_sq(primitive: &[i64], shape: &GridShape) -> Q {
    primitive
        .iter()
        .zip(shape.dims())
        .map(|(&b, &n)| {
            let t = Q::new(BigInt::from(b), BigInt::from(n));
            &t * &t
        })
        .sum()
}

pub fn projection_map(b: &[i64], shape: &GridShape) -> Result<ProjectionMap> {
    let d = shape.d();
    if b.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: b.len() });
    }
    if d < 2 {
        return Err(Error::Precondition("projection needs d ≥ 2".into()));
    }
    if b.iter().all(|&v| v == 0) {
        return Err(Error::InvalidProgression("difference vector is zero".into()));
    }
    let g = b.iter().fold(0i64, |g, &v| g.gcd(&v));
    let primitive: Vec<i64> = b.iter().map(|v| v / g).collect();
    if primitive.iter().zip(shape.dims()).any(|(&p, &n)| p.unsigned_abs() as usize > n) {
        return Err(Error::Precondition(format!("|b_i|/gcd exceeds N_i for {b:?} in {shape}")));
    }
    let lambda = primitive
        .iter()
        .zip(shape.dims())
        .map(|(&p, &n)| Q::new(BigInt::from(p.abs()), BigInt::from(n)))
        .max()
        .unwrap();
    // Λ ∩ b*⊥ is exactly diag(N) applied to the integer kernel of b/gcd.
    let kernel = integer_kernel_basis(&primitive)?;
    let n: Vec<i64> = shape.dims().iter().map(|&v| v as i64).collect();
    let scaled: Vec<Vec<i64>> = kernel
        .iter()
        .map(|r| r.iter().zip(&n).map(|(a, b)| a * b).collect())
        .collect();
    let reduced = lll_reduce(&LatticeBasis::from_integers(&scaled)?, &default_delta())?;
    let mut scaled_rows = reduced.to_i64().ok_or_else(|| Error::Invariant("Λ* basis not integral".into()))?;
    scaled_rows.iter_mut().for_each(|r| sign_normalize(r));
    let rows: Vec<Vec<i64>> = scaled_rows
        .iter()
        .map(|r| r.iter().zip(&n).map(|(a, b)| a / b).collect())
        .collect();
    let l1: Vec<i64> = scaled_rows.iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect();
    let target = GridShape::new(l1.iter().map(|&v| 3 * v as usize).collect())?;
    let pm = ProjectionMap {
        source: b.to_vec(),
        primitive,
        lambda,
        rows,
        scaled_rows,
        offset: l1.iter().map(|v| 2 * v).collect(),
        target,
    };
    verify_projection(&pm, shape)?;
    Ok(pm)
}

/// Quantities checked for a projection map.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    pub volume_ratio: Q,
    /// `∏‖r*_j‖₂²`.
    pub lll_product_sq: Q,
    /// `2^{(d−1)(d−2)/2} ‖b*‖₂² (∏N)²`.
    pub lll_bound_sq: Q,
    pub b_star_norm_sq: Q,
    /// `‖b/gcd‖₂²`, the norm appearing in the volume estimate for `V₀`.
    pub b_norm_sq: Q,
}

/// Check every structural invariant that holds by construction; any failure
/// is an internal error.
pub fn verify_projection(pm: &ProjectionMap, shape: &GridShape) -> Result<ProjectionReport> {
    let d = shape.d();
    let fail = |what: &str| Error::Invariant(format!("projection for {:?} in {shape}: {what}", pm.source));
    if pm.rows.len() != d - 1 {
        return Err(fail("wrong number of rows"));
    }
    if pm.rows.iter().any(|r| r.iter().zip(&pm.primitive).map(|(a, b)| a * b).sum::<i64>() != 0) {
        return Err(fail("M·b ≠ 0"));
    }
    let r_star = LatticeBasis::from_integers(&pm.scaled_rows).map_err(|_| fail("rows dependent"))?;
    let bns = b_star_norm_sq(&pm.primitive, shape);
    let prod: BigInt = shape.dims().iter().map(|&n| BigInt::from(n)).product();
    let prod_sq = Q::from_integer(&prod * &prod);
    if r_star.gram_det() != &bns * &prod_sq {
        return Err(fail("Gram determinant differs from (∏N)²‖b*‖²"));
    }
    let ratio = pm.volume_ratio(shape);
    let upper = Q::from_integer(BigInt::one() << (d * d));
    if ratio < Q::new(BigInt::one(), BigInt::from(2)) || ratio > upper {
        return Err(fail("volume ratio outside [1/2, 2^{d²}]"));
    }
    if pm.target.dims().iter().any(|&n| n < shape.min_side()) {
        return Err(fail("some N*_j below min N_i"));
    }
    let lll_product_sq: Q = r_star.vectors().iter().map(|v| dot(v, v)).product();
    let lll_bound_sq = Q::from_integer(BigInt::one() << ((d - 1) * (d - 2) / 2)) * &bns * &prod_sq;
    if lll_product_sq > lll_bound_sq {
        return Err(fail("∏‖r*_j‖ exceeds the reduced-basis bound"));
    }
    // Range: |r_j·x| ≤ ‖r*_j‖₁ on the grid, so images lie in [‖r*‖₁, 3‖r*‖₁].
    for (r, v) in pm.scaled_rows.iter().zip(&pm.offset) {
        let l1: i64 = r.iter().map(|x| x.abs()).sum();
        if *v != 2 * l1 || l1 < 1 {
            return Err(fail("offset mismatch"));
        }
    }
    let b_norm_sq = pm.primitive.iter().map(|&v| q(v * v)).sum();
    Ok(ProjectionReport { volume_ratio: ratio, lll_product_sq, lll_bound_sq, b_star_norm_sq: bns, b_norm_sq })
}

/// Preimage counts of `f_b` on `U(X, b, s)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FiberStats {
    pub counts: BTreeMap<Point, usize>,
    pub min: usize,
    pub max: usize,
    /// Every count lies in `[s, 2/λ]`.
    pub within: bool,
}

pub fn fiber_counts(pm: &ProjectionMap, x: &[Point], s: usize) -> FiberStats {
    let u = crate::canonical::u_set(x, &pm.primitive, s);
    let mut counts: BTreeMap<Point, usize> = BTreeMap::new();
    for p in &u {
        *counts.entry(pm.apply(p)).or_default() += 1;
    }
    let min = counts.values().copied().min().unwrap_or(0);
    let max = counts.values().copied().max().unwrap_or(0);
    let two = Q::from_integer(BigInt::from(2));
    let within = counts
        .values()
        .all(|&c| c >= s && Q::from_integer(BigInt::from(c)) * &pm.lambda <= two);
    FiberStats { counts, min, max, within }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinkowskiOutcome {
    Witness(Vec<Q>),
    /// `vol(box) ≤ 2^d det`: the theorem makes no claim.
    NotApplicable,
}

/// Search for a nonzero lattice point in `∏[−w_i, w_i]` for a full-rank lattice.
pub fn minkowski_witness(half_widths: &[Q], lattice: &LatticeBasis) -> Result<MinkowskiOutcome> {
    let n = lattice.ambient();
    if lattice.rank() != n || half_widths.len() != n {
        return Err(Error::Precondition("need a full-rank lattice and one width per axis".into()));
    }
    if half_widths.iter().any(|w| !w.is_positive()) {
        return Err(Error::Precondition("box widths must be positive".into()));
    }
    // vol = ∏ 2w_i > 2^n |det|  ⇔  (∏ w_i)² > det².
    let w_prod: Q = half_widths.iter().cloned().product();
    if &w_prod * &w_prod <= lattice.gram_det() {
        return Ok(MinkowskiOutcome::NotApplicable);
    }
    // Rows are basis vectors: y = cᵀB, so c = y B⁻¹ and |c_j| ≤ Σ_i w_i |B⁻¹_{ij}|.
    let inv = inverse(lattice.vectors()).ok_or(Error::DependentBasis)?;
    let radius: Vec<i64> = (0..n)
        .map(|j| {
            let r: Q = (0..n).map(|i| &half_widths[i] * inv[i][j].abs()).sum();
            r.floor().to_integer().to_i64().unwrap_or(i64::MAX)
        })
        .collect();
    // Keep the shortest point found so the witness does not depend on scan order.
    let mut best: Option<(Q, Vec<Q>)> = None;
    let mut c: Vec<i64> = radius.iter().map(|r| -r).collect();
    loop {
        if c.iter().any(|&v| v != 0) {
            let y: Vec<Q> = (0..n)
                .map(|i| (0..n).map(|j| q(c[j]) * &lattice.vectors()[j][i]).sum())
                .collect();
            if y.iter().zip(half_widths).all(|(v, w)| v.abs() <= *w) {
                let norm = dot(&y, &y);
                if best.as_ref().is_none_or(|(b, _)| norm < *b) {
                    best = Some((norm, y));
                }
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return best
                    .map(|(_, y)| MinkowskiOutcome::Witness(y))
                    .ok_or_else(|| Error::Invariant("no lattice point found despite volume condition".into()));
            }
            i -= 1;
            if c[i] < radius[i] {
                c[i] += 1;
                break;
            }
            c[i] = -radius[i];
        }
    }
}

fn inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(p, col);
        let pivot = m[col][col].clone();
        m[col].iter_mut().for_each(|x| *x /= &pivot);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let prow = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_reduced() {
        let id = LatticeBasis::from_integers(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(lll_reduce(&id, &default_delta()).unwrap(), id);
    }

    #[test]
    fn reduces_skewed_plane_basis() {
        let b = LatticeBasis::from_integers(&[vec![1, 0], vec![4, 1]]).unwrap();
        let r = lll_reduce(&b, &default_delta()).unwrap();
        let mut rows = r.to_i64().unwrap();
        rows.iter_mut().for_each(|v| sign_normalize(v));
        rows.sort();
        assert_eq!(rows, vec![vec![0, 1], vec![1, 0]]);
        assert!(is_lll_reduced(&r, &default_delta()));
    }

    #[test]
    fn rejects_dependent_and_bad_delta() {
        assert_eq!(LatticeBasis::from_integers(&[vec![1, 2], vec![2, 4]]), Err(Error::DependentBasis));
        let id = LatticeBasis::from_integers(&[vec![1]]).unwrap();
        assert!(lll_reduce(&id, &Q::one()).is_err());
    }

    #[test]
    fn hnf_of_equivalent_bases() {
        let a = vec![vec![BigInt::from(2), BigInt::from(0)], vec![BigInt::from(1), BigInt::from(3)]];
        let b = vec![vec![BigInt::from(3), BigInt::from(3)], vec![BigInt::from(1), BigInt::from(3)]];
        assert_eq!(hermite_normal_form(&a), hermite_normal_form(&b));
        let h = hermite_normal_form(&a);
        assert_eq!(h[0][0], BigInt::from(1));
        assert_eq!(h[1][1], BigInt::from(6));
    }

    #[test]
    fn kernels() {
        assert_eq!(integer_kernel_basis(&[1, 1]).unwrap(), vec![vec![1, -1]]);
        assert_eq!(integer_kernel_basis(&[2, 3]).unwrap(), vec![vec![3, -2]]);
        let k = integer_kernel_basis(&[1, 1, 1]).unwrap();
        assert_eq!(k.len(), 2);
        assert!(is_saturated(&k));
        for r in &k {
            assert_eq!(r.iter().sum::<i64>(), 0);
        }
        assert!(integer_kernel_basis(&[2, 4]).is_err());
        assert!(!is_saturated(&[vec![2, -2, 0], vec![0, 1, -1]]));
    }

    #[test]
    fn diagonal_projection_on_four_by_four() {
        let shape = GridShape::new(vec![4, 4]).unwrap();
        let pm = projection_map(&[1, 1], &shape).unwrap();
        assert_eq!(pm.rows, vec![vec![1, -1]]);
        assert_eq!(pm.scaled_rows, vec![vec![4, -4]]);
        assert_eq!(pm.target.dims(), &[24]);
        assert_eq!(pm.offset, vec![16]);
        assert_eq!(pm.lambda, Q::new(BigInt::one(), BigInt::from(4)));
        assert_eq!(pm.volume_ratio(&shape), q(6));
        let images: Vec<i64> = shape.points().map(|p| pm.apply(&p).0[0]).collect();
        assert_eq!(*images.iter().min().unwrap(), 13);
        assert_eq!(*images.iter().max().unwrap(), 19);
        let doubled = projection_map(&[2, 2], &shape).unwrap();
        assert_eq!(doubled.rows, pm.rows);
        assert_eq!(doubled.lambda, pm.lambda);
    }

    #[test]
    fn fibers_of_full_square() {
        let shape = GridShape::new(vec![4, 4]).unwrap();
        let pm = projection_map(&[1, 1], &shape).unwrap();
        let x: Vec<Point> = shape.points().collect();
        let stats = fiber_counts(&pm, &x, 2);
        assert!(stats.within);
        assert_eq!((stats.min, stats.max), (2, 4));
        assert_eq!(stats.counts.len(), 5);
        assert_eq!(fiber_counts(&pm, &[], 2), FiberStats { within: true, ..Default::default() });
    }

    #[test]
    fn minkowski_cases() {
        let z2 = LatticeBasis::from_integers(&[vec![1, 0], vec![0, 1]]).unwrap();
        let w = Q::new(BigInt::from(11), BigInt::from(10));
        match minkowski_witness(&[w.clone(), w], &z2).unwrap() {
            MinkowskiOutcome::Witness(y) => {
                assert_eq!(y.iter().map(|v| v.abs()).sum::<Q>(), Q::one());
            }
            other => panic!("{other:?}"),
        }
        let sub = LatticeBasis::from_integers(&[vec![2, 0], vec![0, 4]]).unwrap();
        assert_eq!(minkowski_witness(&[q(2), q(2)], &sub).unwrap(), MinkowskiOutcome::NotApplicable);
    }
}
