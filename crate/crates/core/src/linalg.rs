//! Dense complex linear algebra: partial-pivoted LU, Householder QR (with
//! optional column pivoting), least squares, nullspaces and projective
//! distances.
//!
//! Matrices are stored row-major. The factorizations copy into a
//! column-major work buffer, which keeps the Householder updates on
//! contiguous memory.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// A complex column vector.
pub type CVector = Vec<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("singular matrix: pivot {pivot:.3e} below tolerance {tol:.3e} at column {column}")]
    SingularMatrix { column: usize, pivot: f64, tol: f64 },
    #[error("rank deficient: |R[{column},{column}]| = {diag:.3e} below tolerance {tol:.3e}")]
    RankDeficient { column: usize, diag: f64, tol: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Shared numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// LU pivots below `singular_tol * ‖A‖_max` are treated as zero.
    pub singular_tol: f64,
    /// QR diagonals below `rank_tol * |R_11|` are treated as zero.
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            singular_tol: 1e-12,
            rank_tol: 1e-10,
        }
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    /// Builds a matrix from row-major data; fails if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(CMat { rows, cols, data })
    }

    /// Builds a complex matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "real data length");
        CMat {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_columns(columns: &[CVector]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols, |r, c| columns[c][r])
    }

    pub fn diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> CVector {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn columns(&self) -> Vec<CVector> {
        (0..self.cols).map(|c| self.col(c)).collect()
    }

    pub fn set_col(&mut self, c: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (r, &x) in v.iter().enumerate() {
            self[(r, c)] = x;
        }
    }

    /// Columns `start..end` as a new matrix.
    pub fn col_range(&self, start: usize, end: usize) -> CMat {
        CMat::from_fn(self.rows, end - start, |r, c| self[(r, start + c)])
    }

    /// Selects the given columns, in order.
    pub fn select_cols(&self, idx: &[usize]) -> CMat {
        CMat::from_fn(self.rows, idx.len(), |r, c| self[(r, idx[c])])
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &CMat) -> CMat {
        assert_eq!(self.rows, other.rows);
        CMat::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)]
            } else {
                other[(r, c - self.cols)]
            }
        })
    }

    /// Unconjugated transpose.
    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> CMat {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// Multiplies column `c` by `d[c]`, i.e. `self · diag(d)`.
    pub fn scale_columns(&self, d: &[C64]) -> CMat {
        assert_eq!(d.len(), self.cols);
        CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * d[c])
    }

    pub fn matvec(&self, x: &[C64]) -> CVector {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        (0..self.rows)
            .map(|r| dot_unconj(self.row(r), x))
            .collect()
    }

    /// Largest entry modulus, the entrywise ∞-norm.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    /// Returns true if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Determinant through partial-pivoted LU. Returns zero on exact breakdown.
    pub fn det(&self) -> C64 {
        assert!(self.is_square());
        match Lu::factor_with_tol(self, 0.0) {
            Ok(lu) => lu.det(),
            Err(_) => ZERO,
        }
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "matmul dimension");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale(-ONE)
    }
}

// ---------------------------------------------------------------------------
// vector helpers

/// Bilinear product `Σ a_i b_i` (no conjugation).
#[inline]
pub fn dot_unconj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x * y)
}

/// Hermitian product `Σ conj(a_i) b_i`.
#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
/// Max modulus; NaN if any entry is NaN.
pub fn max_abs(v: &[C64]) -> f64 {
    nan_max(v.iter().map(|z| z.norm()))
}

/// Maximum of nonnegative values that propagates NaN, unlike `f64::max`.
pub fn nan_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |m, x| if m.is_nan() || x.is_nan() { f64::NAN } else { m.max(x) })
}

pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub_vec(a: &[C64], b: &[C64]) -> CVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Divides by the entry of largest modulus.
pub fn normalize_max(v: &[C64]) -> CVector {
    let (_, pivot) = v
        .iter()
        .fold((0.0, ONE), |(m, p), &z| if z.norm() > m { (z.norm(), z) } else { (m, p) });
    v.iter().map(|z| z / pivot).collect()
}

/// Sine of the Hermitian angle between `x` and `y`.
///
/// Computed as the norm of the component of `y/‖y‖` orthogonal to `x`, which
/// equals `sqrt(1 - |⟨x,y⟩|²/(‖x‖²‖y‖²))` but stays accurate for nearly
/// parallel inputs.
pub fn proj_distance(x: &[C64], y: &[C64]) -> Result<f64, LinalgError> {
    if x.len() != y.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "proj_distance of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let nx = norm2(x);
    let ny = norm2(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    let c = dot(x, y) / (nx * nx);
    let perp: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - c * a).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((perp / ny).min(1.0))
}

// ---------------------------------------------------------------------------
// LU

/// Partial-pivoted LU factorization `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    /// Factors with the pivot threshold `singular_tol · ‖A‖_max`.
    pub fn factor(a: &CMat, tol: &Tolerances) -> Result<Self, LinalgError> {
        Self::factor_with_tol(a, tol.singular_tol * a.max_abs())
    }

    /// Factors with an absolute pivot threshold.
    pub fn factor_with_tol(a: &CMat, abs_tol: f64) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= abs_tol || pmax == 0.0 {
                return Err(LinalgError::SingularMatrix {
                    column: k,
                    pivot: pmax,
                    tol: abs_tol,
                });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let inv = ONE / lu[k * n + k];
            for r in k + 1..n {
                let f = lu[r * n + k] * inv;
                lu[r * n + k] = f;
                if f == ZERO {
                    continue;
                }
                for c in k + 1..n {
                    let u = lu[k * n + c];
                    lu[r * n + c] -= f * u;
                }
            }
        }
        Ok(Lu { n, lu, perm, swaps })
    }

    pub fn det(&self) -> C64 {
        let mut d = if self.swaps % 2 == 0 { ONE } else { -ONE };
        for k in 0..self.n {
            d *= self.lu[k * self.n + k];
        }
        d
    }

    /// Smallest pivot modulus over largest; a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> f64 {
        let piv: Vec<f64> = (0..self.n).map(|k| self.lu[k * self.n + k].norm()).collect();
        let max = piv.iter().cloned().fold(0.0, f64::max);
        let min = piv.iter().cloned().fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            min / max
        }
    }

    pub fn solve_vec(&self, b: &[C64]) -> CVector {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: CVector = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * x[c];
            }
            x[r] = s / self.lu[r * n + r];
        }
        x
    }

    pub fn solve(&self, b: &CMat) -> CMat {
        assert_eq!(b.rows, self.n);
        let mut out = CMat::zeros(self.n, b.cols);
        for c in 0..b.cols {
            let x = self.solve_vec(&b.col(c));
            out.set_col(c, &x);
        }
        out
    }

    pub fn inverse(&self) -> CMat {
        self.solve(&CMat::identity(self.n))
    }
}

/// Solves `A·X = B` by partial-pivoted LU.
pub fn lu_solve(a: &CMat, b: &CMat) -> Result<CMat, LinalgError> {
    lu_solve_with(a, b, &Tolerances::default())
}

pub fn lu_solve_with(a: &CMat, b: &CMat, tol: &Tolerances) -> Result<CMat, LinalgError> {
    if b.rows != a.rows {
        return Err(LinalgError::DimensionMismatch(format!(
            "lu_solve: A is {}x{}, B is {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(Lu::factor(a, tol)?.solve(b))
}

pub fn inverse(a: &CMat) -> Result<CMat, LinalgError> {
    Ok(Lu::factor(a, &Tolerances::default())?.inverse())
}

// ---------------------------------------------------------------------------
// QR

/// Householder QR factorization `A·Π = Q·R` of an `m×n` matrix, with optional
/// column pivoting.
#[derive(Debug, Clone)]
pub struct Qr {
    m: usize,
    n: usize,
    /// Column-major working copy; holds R in its upper triangle.
    a: Vec<C64>,
    /// Householder vectors (full length `m - k`, stored per reflector).
    vs: Vec<Vec<C64>>,
    betas: Vec<f64>,
    perm: Vec<usize>,
}

impl Qr {
    pub fn factor(a: &CMat) -> Self {
        Self::factor_impl(a, false)
    }

    pub fn factor_pivoted(a: &CMat) -> Self {
        Self::factor_impl(a, true)
    }

    fn factor_impl(a: &CMat, pivot: bool) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut w = vec![ZERO; m * n];
        for r in 0..m {
            for c in 0..n {
                w[c * m + r] = a.data[r * n + c];
            }
        }
        let steps = m.min(n);
        let mut vs = Vec::with_capacity(steps);
        let mut betas = Vec::with_capacity(steps);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut colnorms: Vec<f64> = if pivot {
            (0..n).map(|c| norm2(&w[c * m..(c + 1) * m]).powi(2)).collect()
        } else {
            Vec::new()
        };

        for k in 0..steps {
            if pivot {
                // Recompute norms of the trailing parts to avoid downdating drift.
                for c in k..n {
                    colnorms[c] = w[c * m + k..(c + 1) * m].iter().map(|z| z.norm_sqr()).sum();
                }
                let (p, _) = (k..n).fold((k, -1.0), |best, c| {
                    if colnorms[c] > best.1 {
                        (c, colnorms[c])
                    } else {
                        best
                    }
                });
                if p != k {
                    for r in 0..m {
                        w.swap(k * m + r, p * m + r);
                    }
                    colnorms.swap(k, p);
                    perm.swap(k, p);
                }
            }
            let x = &w[k * m + k..(k + 1) * m];
            let xnorm = norm2(x);
            let mut v = x.to_vec();
            let beta;
            if xnorm == 0.0 {
                beta = 0.0;
            } else {
                let x0 = x[0];
                let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
                let alpha = -phase * xnorm;
                v[0] -= alpha;
                let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                beta = if vn2 == 0.0 { 0.0 } else { 2.0 / vn2 };
            }
            if beta != 0.0 {
                for c in k..n {
                    let col = &mut w[c * m + k..(c + 1) * m];
                    let s = dot(&v, col) * beta;
                    for (ci, vi) in col.iter_mut().zip(&v) {
                        *ci -= s * vi;
                    }
                }
            }
            // clean the subdiagonal
            for r in k + 1..m {
                w[k * m + r] = ZERO;
            }
            vs.push(v);
            betas.push(beta);
        }
        Qr {
            m,
            n,
            a: w,
            vs,
            betas,
            perm,
        }
    }

    #[inline]
    fn r(&self, row: usize, col: usize) -> C64 {
        self.a[col * self.m + row]
    }

    /// Diagonal of R.
    pub fn r_diag(&self) -> Vec<C64> {
        (0..self.m.min(self.n)).map(|k| self.r(k, k)).collect()
    }

    /// Column permutation: column `k` of `A·Π` is column `perm[k]` of `A`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Numerical rank: number of diagonal entries above `rel_tol · |R_11|`.
    /// Only meaningful for pivoted factorizations.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let d = self.r_diag();
        let r0 = d.first().map_or(0.0, |z| z.norm());
        if r0 == 0.0 {
            return 0;
        }
        d.iter().take_while(|z| z.norm() > rel_tol * r0).count()
    }

    /// Applies `Qᴴ` to a vector of length m.
    pub fn apply_qh(&self, b: &mut [C64]) {
        for (k, (v, &beta)) in self.vs.iter().zip(&self.betas).enumerate() {
            if beta == 0.0 {
                continue;
            }
            let seg = &mut b[k..];
            let s = dot(v, seg) * beta;
            for (bi, vi) in seg.iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }

    /// Applies `Q` to a vector of length m.
    pub fn apply_q(&self, b: &mut [C64]) {
        for (k, (v, &beta)) in self.vs.iter().zip(&self.betas).enumerate().rev() {
            if beta == 0.0 {
                continue;
            }
            let seg = &mut b[k..];
            let s = dot(v, seg) * beta;
            for (bi, vi) in seg.iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }

    /// The full `m×m` unitary factor.
    pub fn q_full(&self) -> CMat {
        let mut q = CMat::zeros(self.m, self.m);
        for j in 0..self.m {
            let mut e = vec![ZERO; self.m];
            e[j] = ONE;
            self.apply_q(&mut e);
            q.set_col(j, &e);
        }
        q
    }

    /// The upper-triangular factor (`min(m,n) × n`).
    pub fn r_matrix(&self) -> CMat {
        let k = self.m.min(self.n);
        CMat::from_fn(k, self.n, |r, c| if c >= r { self.r(r, c) } else { ZERO })
    }

    /// Least-squares solution of `A·x ≈ b`; requires `m ≥ n` and full
    /// column rank at `rel_tol`.
    pub fn solve_least_squares(&self, b: &[C64], rel_tol: f64) -> Result<CVector, LinalgError> {
        let (m, n) = (self.m, self.n);
        if m < n {
            return Err(LinalgError::DimensionMismatch(format!(
                "least squares needs m >= n, got {m}x{n}"
            )));
        }
        if b.len() != m {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs length {} for {m} rows",
                b.len()
            )));
        }
        let r0 = self.r(0, 0).norm();
        let tol = rel_tol * r0;
        for k in 0..n {
            let d = self.r(k, k).norm();
            if d <= tol || d == 0.0 {
                return Err(LinalgError::RankDeficient {
                    column: k,
                    diag: d,
                    tol,
                });
            }
        }
        let mut y = b.to_vec();
        self.apply_qh(&mut y);
        let mut z = vec![ZERO; n];
        for r in (0..n).rev() {
            let mut s = y[r];
            for c in r + 1..n {
                s -= self.r(r, c) * z[c];
            }
            z[r] = s / self.r(r, r);
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = z[k];
        }
        Ok(x)
    }
}

/// Least-squares solution of `A·x ≈ b` by Householder QR.
pub fn qr_least_squares(a: &CMat, b: &[C64]) -> Result<CVector, LinalgError> {
    qr_least_squares_with(a, b, &Tolerances::default())
}

pub fn qr_least_squares_with(a: &CMat, b: &[C64], tol: &Tolerances) -> Result<CVector, LinalgError> {
    Qr::factor(a).solve_least_squares(b, tol.rank_tol)
}

/// Orthonormal basis of the kernel of `A`, as the columns of an `n×k` matrix.
pub fn nullspace(a: &CMat) -> CMat {
    nullspace_with_tol(a, Tolerances::default().rank_tol)
}

/// Kernel basis with an explicit relative rank tolerance.
///
/// Factors `Aᴴ·Π = Q·R` with column pivoting; the trailing `n - rank`
/// columns of `Q` span the orthogonal complement of the row space of `A`.
pub fn nullspace_with_tol(a: &CMat, rel_tol: f64) -> CMat {
    let qr = Qr::factor_pivoted(&a.adjoint());
    let r = qr.rank(rel_tol);
    let n = a.cols;
    let q = qr.q_full();
    q.col_range(r, n)
}

/// Numerical rank via pivoted QR.
pub fn rank(a: &CMat, rel_tol: f64) -> usize {
    Qr::factor_pivoted(a).rank(rel_tol)
}

/// Complex principal square root; `num_complex` already uses the principal
/// branch (cut along the negative real axis, `Re ≥ 0`).
#[inline]
pub fn principal_sqrt(z: C64) -> C64 {
    z.sqrt()
}
