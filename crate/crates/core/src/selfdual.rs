//! Configurations of 14 points in P⁶: self-duality witnesses, the Gale
//! transform, linear generality and GIT (semi)stability, the orthogonal and
//! skew normal forms, and projective equivalence of ordered configurations.
//!
//! All transposes here are unconjugated: self-duality is the bilinear
//! condition `Γ·Λ·Γᵀ = 0` for an invertible diagonal `Λ`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, nullspace_with_tol, proj_distance, CMat, CVector, LinalgError, Lu, Qr, C64, ONE, ZERO,
};
use crate::random::{self, stage};

/// Ambient dimension of the points (P⁶ has 7 homogeneous coordinates).
pub const DIM: usize = 7;
/// Number of points.
pub const POINTS: usize = 14;
/// Entries of a 7×7 skew-symmetric matrix's strict upper triangle.
pub const SKEW_LEN: usize = DIM * (DIM - 1) / 2;

/// A 7×14 matrix whose columns are homogeneous coordinates of 14 points.
#[derive(Debug, Clone, PartialEq)]
pub struct Config(CMat);

impl Config {
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.rows() != DIM || matrix.cols() != POINTS {
            return Err(Error::InvalidInput(format!(
                "a configuration is {DIM}x{POINTS}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("non-finite entries in configuration".into()));
        }
        if let Some(c) = (0..POINTS).find(|&c| linalg::norm2(&matrix.col(c)) == 0.0) {
            return Err(Error::InvalidInput(format!("column {c} is zero")));
        }
        Ok(Config(matrix))
    }

    pub fn from_integers(rows: &[[i64; POINTS]; DIM]) -> Self {
        Config(CMat::from_fn(DIM, POINTS, |r, c| C64::new(rows[r][c] as f64, 0.0)))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn column(&self, i: usize) -> CVector {
        self.0.col(i)
    }

    /// Columns reordered so that column `k` of the result is column `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Config {
        Config(self.0.select_cols(perm))
    }

    /// Each column divided by its entry of largest modulus.
    pub fn normalized(&self) -> Config {
        let cols: Vec<CVector> = (0..POINTS).map(|c| linalg::normalize_max(&self.0.col(c))).collect();
        Config(CMat::from_columns(&cols))
    }

    /// Each column scaled to unit 2-norm; returns the scale factors used.
    fn unit_columns(&self) -> (CMat, Vec<f64>) {
        let f: Vec<f64> = (0..POINTS).map(|c| 1.0 / linalg::norm2(&self.0.col(c))).collect();
        let d: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
        (self.0.scale_columns(&d), f)
    }
}

/// Diagonal entries `λ_1..λ_14` of a witness `Γ·diag(λ)·Γᵀ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagWitness {
    pub lambda: Vec<C64>,
}

impl DiagWitness {
    pub fn as_diag(&self) -> CMat {
        CMat::diag(&self.lambda)
    }
}

/// The strict upper triangle of `S ∈ Skew(7)`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewParams(pub [C64; SKEW_LEN]);

impl SkewParams {
    pub fn from_slice(s: &[C64]) -> Result<Self> {
        if s.len() != SKEW_LEN {
            return Err(Error::InvalidInput(format!(
                "skew parameters need {SKEW_LEN} entries, got {}",
                s.len()
            )));
        }
        let mut out = [ZERO; SKEW_LEN];
        out.copy_from_slice(s);
        Ok(SkewParams(out))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = random::complex_gaussian_vec(rng, SKEW_LEN);
        SkewParams::from_slice(&v).expect("length")
    }

    /// Builds the skew-symmetric matrix.
    pub fn to_matrix(&self) -> CMat {
        let mut m = CMat::zeros(DIM, DIM);
        let mut k = 0;
        for i in 0..DIM {
            for j in i + 1..DIM {
                m[(i, j)] = self.0[k];
                m[(j, i)] = -self.0[k];
                k += 1;
            }
        }
        m
    }

    /// Reads the strict upper triangle of `m`.
    pub fn from_matrix(m: &CMat) -> Self {
        let mut out = [ZERO; SKEW_LEN];
        let mut k = 0;
        for i in 0..DIM {
            for j in i + 1..DIM {
                out[k] = m[(i, j)];
                k += 1;
            }
        }
        SkewParams(out)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    /// Position of `S[i][j]`, `i < j`, in the packed vector.
    pub fn index(i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < DIM);
        i * DIM - i * (i + 1) / 2 + (j - i - 1)
    }
}

/// Certificate of an orthogonal (and optionally skew) normal form:
/// `A·[I₇ | P] = Γ·diag(lambda_scale)` with `P ∈ SO(7)` and, when present,
/// `S = cayley(P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormCert {
    pub p: CMat,
    pub a: CMat,
    pub lambda_scale: DiagWitness,
    pub s: Option<SkewParams>,
    /// The self-duality witness the form was built from.
    pub witness: DiagWitness,
}

impl NormalFormCert {
    /// `max |A·[I|P] − Γ·diag(scale)|` relative to `max |Γ|`.
    pub fn reconstruction_error(&self, gamma: &Config) -> f64 {
        let lhs = &self.a * &CMat::identity(DIM).hcat(&self.p);
        let rhs = gamma.matrix().scale_columns(&self.lambda_scale.lambda);
        (&lhs - &rhs).max_abs() / gamma.matrix().max_abs()
    }

    /// `max |P·Pᵀ − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        (&(&self.p * &self.p.transpose()) - &CMat::identity(DIM)).max_abs()
    }
}

/// Tolerances for the self-duality toolkit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDualOptions {
    /// Witness entries must exceed this fraction of the largest entry.
    pub witness_tol: f64,
    /// Random combinations tried when the witness nullspace is not a line.
    pub retries: usize,
    /// Relative rank tolerance for the witness nullspace.
    pub nullspace_tol: f64,
    /// Subdeterminant threshold (unit columns) for linear generality.
    pub general_tol: f64,
    /// Rank tolerance for stability checks.
    pub rank_tol: f64,
    /// Reject normal forms whose orthogonality defect exceeds this.
    pub orthogonality_gate: f64,
    /// Pivot threshold (relative) for `I + P` in the Cayley transform.
    pub cayley_tol: f64,
}

impl Default for SelfDualOptions {
    fn default() -> Self {
        SelfDualOptions {
            witness_tol: 1e-7,
            retries: 8,
            nullspace_tol: 1e-9,
            general_tol: 1e-10,
            rank_tol: 1e-9,
            orthogonality_gate: 1e-6,
            cayley_tol: 1e-8,
        }
    }
}

/// Finds `Λ` with `Γ·Λ·Γᵀ = 0` and all entries nonzero.
pub fn self_dual_witness(gamma: &Config) -> Result<DiagWitness> {
    let mut rng = random::stream(0, stage::WITNESS);
    self_dual_witness_with(gamma, &SelfDualOptions::default(), &mut rng)
}

/// [`self_dual_witness`] with explicit options and retry generator.
///
/// The 28×14 system `Σ λ_i (γ_i γ_iᵀ)_{a≤b} = 0` is solved on unit-norm
/// columns, its nullspace sampled by random combinations until every entry
/// clears `witness_tol`, and the result mapped back to the original column
/// scaling. The returned witness has unit 2-norm and a positive real first
/// entry.
pub fn self_dual_witness_with<R: Rng + ?Sized>(
    gamma: &Config,
    opts: &SelfDualOptions,
    rng: &mut R,
) -> Result<DiagWitness> {
    let (unit, f) = gamma.unit_columns();
    let mut sys = CMat::zeros(DIM * (DIM + 1) / 2, POINTS);
    for i in 0..POINTS {
        let g = unit.col(i);
        let mut row = 0;
        for a in 0..DIM {
            for b in a..DIM {
                sys[(row, i)] = g[a] * g[b];
                row += 1;
            }
        }
    }
    let kernel = nullspace_with_tol(&sys, opts.nullspace_tol);
    if kernel.cols() == 0 {
        return Err(Error::NotSelfDual("the witness system has only the zero solution".into()));
    }
    let tries = if kernel.cols() == 1 { 1 } else { opts.retries.max(1) };
    for _ in 0..tries {
        let candidate = if kernel.cols() == 1 {
            kernel.col(0)
        } else {
            kernel.matvec(&random::complex_gaussian_vec(rng, kernel.cols()))
        };
        // Undo the column normalization: Γ = unit·diag(1/f), so λ_i = f_i² λ'_i.
        let lambda: CVector = candidate.iter().zip(&f).map(|(l, s)| l * (s * s)).collect();
        let max = linalg::max_abs(&lambda);
        if max > 0.0 && lambda.iter().all(|l| l.norm() > opts.witness_tol * max) {
            return Ok(DiagWitness {
                lambda: normalize_witness(&lambda),
            });
        }
    }
    Err(Error::NotSelfDual("every witness candidate has a vanishing entry".into()))
}

fn normalize_witness(lambda: &[C64]) -> CVector {
    let n = linalg::norm2(lambda);
    let phase = lambda[0].conj() / lambda[0].norm();
    let mut out: CVector = lambda.iter().map(|l| l * phase / n).collect();
    out[0] = C64::new(lambda[0].norm() / n, 0.0);
    out
}

/// `max |Γ·diag(λ)·Γᵀ|`.
pub fn witness_residual(gamma: &Config, w: &DiagWitness) -> f64 {
    let g = gamma.matrix();
    (&g.scale_columns(&w.lambda) * &g.transpose()).max_abs()
}

/// A matrix whose rows span the kernel of `Γ`, as a configuration.
pub fn gale_transform(gamma: &Config) -> Result<Config> {
    let (unit, _) = gamma.unit_columns();
    let qr = Qr::factor_pivoted(&unit);
    let rank = qr.rank(1e-10);
    if rank < DIM {
        let d = qr.r_diag();
        return Err(LinalgError::RankDeficient {
            column: rank,
            diag: d[rank].norm(),
            tol: 1e-10 * d[0].norm(),
        }
        .into());
    }
    let kernel = nullspace_with_tol(gamma.matrix(), 1e-10);
    Config::new(kernel.transpose())
}

/// Every 7-subset of columns is linearly independent.
pub fn is_linearly_general(gamma: &Config) -> bool {
    is_linearly_general_with(gamma, &SelfDualOptions::default())
}

pub fn is_linearly_general_with(gamma: &Config, opts: &SelfDualOptions) -> bool {
    let (unit, _) = gamma.unit_columns();
    let mut idx = [0usize; DIM];
    combinations(POINTS, DIM, &mut idx, 0, 0, &mut |sub| {
        unit.select_cols(sub).det().norm() > opts.general_tol
    })
}

/// Visits all `k`-subsets of `0..n` in lexicographic order; stops and
/// returns false as soon as `visit` does.
fn combinations(
    n: usize,
    k: usize,
    buf: &mut [usize],
    depth: usize,
    from: usize,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if depth == k {
        return visit(&buf[..k]);
    }
    for i in from..=n - (k - depth) {
        buf[depth] = i;
        if !combinations(n, k, buf, depth + 1, i + 1, visit) {
            return false;
        }
    }
    true
}

/// Outcome of the GIT stability inequality `dim Span(Y) + 1 ≥ 7·#Y/14`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stability {
    pub semistable: bool,
    /// Strict inequality for every nonempty proper subset.
    pub stable: bool,
}

/// Checks the inequality on all 2¹⁴ − 1 nonempty column subsets.
pub fn stability(gamma: &Config) -> Stability {
    stability_with(gamma, &SelfDualOptions::default())
}

pub fn stability_with(gamma: &Config, opts: &SelfDualOptions) -> Stability {
    let (unit, _) = gamma.unit_columns();
    let full = (1u32 << POINTS) - 1;
    let mut semistable = true;
    let mut stable = true;
    for mask in 1..=full {
        let cols: Vec<usize> = (0..POINTS).filter(|&c| mask & (1 << c) != 0).collect();
        // rank(Y) = dim Span(Y) + 1; compare 14·rank with 7·#Y
        let r = Qr::factor_pivoted(&unit.select_cols(&cols)).rank(opts.rank_tol);
        let lhs = POINTS * r;
        let rhs = DIM * cols.len();
        if lhs < rhs {
            semistable = false;
            stable = false;
            break;
        }
        if lhs == rhs && mask != full {
            stable = false;
        }
    }
    Stability { semistable, stable }
}

pub fn is_semistable(gamma: &Config) -> bool {
    stability(gamma).semistable
}

/// Orthogonal normal form `A·[I₇ | P] = Γ·diag(scale)` with `P ∈ SO(7)`.
///
/// Columns are rescaled by the principal square roots `√λ_i` (first seven)
/// and `√(−λ_i)` (last seven) of the witness; if `det P = −1` the last
/// column of `P` and of the scaling is negated.
pub fn orthogonal_normal_form(gamma: &Config) -> Result<NormalFormCert> {
    let mut rng = random::stream(0, stage::WITNESS);
    orthogonal_normal_form_with(gamma, &SelfDualOptions::default(), &mut rng)
}

pub fn orthogonal_normal_form_with<R: Rng + ?Sized>(
    gamma: &Config,
    opts: &SelfDualOptions,
    rng: &mut R,
) -> Result<NormalFormCert> {
    let witness = self_dual_witness_with(gamma, opts, rng)?;
    let mut scale: CVector = witness
        .lambda
        .iter()
        .enumerate()
        .map(|(i, &l)| linalg::principal_sqrt(if i < DIM { l } else { -l }))
        .collect();
    let g = gamma.matrix();
    let a = g.col_range(0, DIM).scale_columns(&scale[..DIM]);
    let lu = Lu::factor(&a, &linalg::Tolerances::default())?;
    let mut p = lu.solve(&g.col_range(DIM, POINTS).scale_columns(&scale[DIM..]));
    if p.det().re < 0.0 {
        for r in 0..DIM {
            p[(r, DIM - 1)] = -p[(r, DIM - 1)];
        }
        scale[POINTS - 1] = -scale[POINTS - 1];
    }
    let cert = NormalFormCert {
        p,
        a,
        lambda_scale: DiagWitness { lambda: scale },
        s: None,
        witness,
    };
    let defect = cert.orthogonality_error();
    if !(defect <= opts.orthogonality_gate) {
        return Err(Error::NotSelfDual(format!(
            "orthogonal normal form has defect {defect:.3e}"
        )));
    }
    Ok(cert)
}

/// Cayley transform `(I − M)(I + M)⁻¹`.
pub fn cayley(m: &CMat) -> Result<CMat> {
    cayley_with_tol(m, SelfDualOptions::default().cayley_tol)
}

pub fn cayley_with_tol(m: &CMat, rel_tol: f64) -> Result<CMat> {
    let n = m.rows();
    let id = CMat::identity(n);
    let plus = &id + m;
    let minus = &id - m;
    // (I − M) and (I + M)⁻¹ commute, so solve (I + M)·X = I − M.
    let lu = Lu::factor_with_tol(&plus, rel_tol * plus.max_abs())?;
    Ok(lu.solve(&minus))
}

/// Skew normal form: `S = cayley(P)` from the orthogonal normal form, so that
/// `[I₇ + S | I₇ − S]` is projectively equivalent to `Γ`.
pub fn skew_normal_form(gamma: &Config) -> Result<(SkewParams, NormalFormCert)> {
    let mut rng = random::stream(0, stage::WITNESS);
    skew_normal_form_with(gamma, &SelfDualOptions::default(), &mut rng)
}

pub fn skew_normal_form_with<R: Rng + ?Sized>(
    gamma: &Config,
    opts: &SelfDualOptions,
    rng: &mut R,
) -> Result<(SkewParams, NormalFormCert)> {
    let mut cert = orthogonal_normal_form_with(gamma, opts, rng)?;
    let s = cayley_with_tol(&cert.p, opts.cayley_tol).map_err(|e| match e {
        Error::Linalg(LinalgError::SingularMatrix { .. }) => Error::CayleySingular,
        e => e,
    })?;
    // project onto Skew(7)
    let s = (&s - &s.transpose()).scale(C64::new(0.5, 0.0));
    let params = SkewParams::from_matrix(&s);
    cert.s = Some(params);
    Ok((params, cert))
}

/// A skew normal form of some column ordering of `Γ`.
#[derive(Debug, Clone)]
pub struct PermutedSnf {
    pub s: SkewParams,
    pub cert: NormalFormCert,
    /// Column `k` of the normalized configuration is column `perm[k]` of `Γ`.
    pub perm: Vec<usize>,
}

/// Tries the identity ordering, then up to `max_retries` random column
/// permutations, until a skew normal form exists.
pub fn skew_normal_form_retrying<R: Rng + ?Sized>(
    gamma: &Config,
    opts: &SelfDualOptions,
    max_retries: usize,
    rng: &mut R,
) -> Result<PermutedSnf> {
    let mut perm: Vec<usize> = (0..POINTS).collect();
    let mut last_err = None;
    for attempt in 0..=max_retries {
        if attempt > 0 {
            perm.shuffle(rng);
        }
        match skew_normal_form_with(&gamma.permuted(&perm), opts, rng) {
            Ok((s, cert)) => {
                return Ok(PermutedSnf {
                    s,
                    cert,
                    perm: perm.clone(),
                })
            }
            Err(e @ (Error::NotSelfDual(_) | Error::InvalidInput(_))) if attempt == 0 => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// `[I₇ + S | I₇ − S]`.
pub fn config_from_skew(s: &SkewParams) -> Result<Config> {
    let sm = s.to_matrix();
    let id = CMat::identity(DIM);
    let g = (&id + &sm).hcat(&(&id - &sm));
    for i in 0..POINTS {
        for j in i + 1..POINTS {
            if proj_distance(&g.col(i), &g.col(j))? < 1e-10 {
                return Err(Error::DegenerateConfig(i, j));
            }
        }
    }
    Config::new(g)
}

/// Witness `(A, d)` of a projective equivalence `A·Γ₁ = Γ₂·diag(d)`.
#[derive(Debug, Clone)]
pub struct Equivalence {
    pub a: CMat,
    pub d: CVector,
}

/// Decides whether `g2 = A·g1·diag(d)⁻¹`-style equivalence holds for some
/// invertible `A` and nonzero `d`, as ordered configurations.
pub fn projective_equivalent(g1: &Config, g2: &Config) -> Option<Equivalence> {
    let mut rng = random::stream(0, stage::WITNESS);
    projective_equivalent_with(g1, g2, 1e-8, 8, &mut rng)
}

pub fn projective_equivalent_with<R: Rng + ?Sized>(
    g1: &Config,
    g2: &Config,
    tol: f64,
    retries: usize,
    rng: &mut R,
) -> Option<Equivalence> {
    let (u1, f1) = g1.unit_columns();
    let (u2, f2) = g2.unit_columns();
    // unknowns: A row-major (49), then d (14)
    let nunk = DIM * DIM + POINTS;
    let mut sys = CMat::zeros(DIM * POINTS, nunk);
    for r in 0..DIM {
        for c in 0..POINTS {
            let row = r * POINTS + c;
            for k in 0..DIM {
                sys[(row, r * DIM + k)] = u1[(k, c)];
            }
            sys[(row, DIM * DIM + c)] = -u2[(r, c)];
        }
    }
    let kernel = nullspace_with_tol(&sys, tol);
    if kernel.cols() == 0 {
        return None;
    }
    let tries = if kernel.cols() == 1 { 1 } else { retries.max(1) };
    for _ in 0..tries {
        let z = if kernel.cols() == 1 {
            kernel.col(0)
        } else {
            kernel.matvec(&random::complex_gaussian_vec(rng, kernel.cols()))
        };
        let a = CMat::from_vec(DIM, DIM, z[..DIM * DIM].to_vec()).ok()?;
        let dn = &z[DIM * DIM..];
        let dmax = linalg::max_abs(dn);
        if dmax == 0.0 || dn.iter().any(|x| x.norm() <= tol * dmax) {
            continue;
        }
        let Ok(lu) = Lu::factor_with_tol(&a, 0.0) else {
            continue;
        };
        if lu.pivot_ratio() <= tol {
            continue;
        }
        // A·g1·diag(f1) = g2·diag(f2)·diag(d') ⇒ A·g1 = g2·diag(f2·d'/f1)
        let d = dn
            .iter()
            .zip(f1.iter().zip(&f2))
            .map(|(x, (a1, a2))| x * (a2 / a1))
            .collect();
        return Some(Equivalence { a, d });
    }
    None
}

/// `max |A·g1 − g2·diag(d)|` relative to `max |g2|·max |d|`.
pub fn equivalence_residual(g1: &Config, g2: &Config, eq: &Equivalence) -> f64 {
    let lhs = &eq.a * g1.matrix();
    let rhs = g2.matrix().scale_columns(&eq.d);
    (&lhs - &rhs).max_abs() / (g2.matrix().max_abs() * linalg::max_abs(&eq.d)).max(f64::MIN_POSITIVE)
}

/// The fixed witness `(1,…,1,−1,…,−1)/√14` of a skew normal form.
pub fn skew_form_witness() -> DiagWitness {
    let c = 1.0 / (POINTS as f64).sqrt();
    DiagWitness {
        lambda: (0..POINTS)
            .map(|i| if i < DIM { ONE * c } else { -ONE * c })
            .collect(),
    }
}
