//! The Grassmannian Gr(2,6) ⊂ P¹⁴ in the affine chart
//!
//! ```text
//! H = [ 1 0 t1 t2 t3 t4 ]
//!     [ 0 1 t5 t6 t7 t8 ]
//! ```
//!
//! Plücker coordinates are the 2×2 minors of `H`, indexed by column pairs
//! `(i, j)`, `1 ≤ i < j ≤ 6`, in lexicographic order. The coordinate
//! polynomials and the 15 three-term Plücker relations are generated from the
//! pair/quadruple combinatorics at first use.
//!
//! The weight vector `ω = (3,2,1,0,0,1,2,3)` selects the main-diagonal
//! initial term of every minor; [`pluecker_embed_u`] evaluates the
//! u-deformation `f_u = Σ c_α t^α u^{ν(f) − ω·α}` which interpolates between
//! the toric special fiber (`u = 0`) and the Grassmannian (`u = 1`).

use std::sync::OnceLock;

use crate::linalg::{CMat, C64, ZERO};

/// Number of Plücker coordinates.
pub const N_COORDS: usize = 15;
/// Number of chart coordinates.
pub const N_CHART: usize = 8;
/// Number of Plücker relations (4-subsets of {1..6}).
pub const N_RELATIONS: usize = 15;

/// The weight vector on `t1..t8` that induces a diagonal term order.
pub const OMEGA: [i32; N_CHART] = [3, 2, 1, 0, 0, 1, 2, 3];

/// A column pair `(i, j)` with `1 ≤ i < j ≤ 6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    pub i: u8,
    pub j: u8,
}

impl PairIndex {
    /// Position of this pair in the lexicographic enumeration.
    pub fn position(self) -> usize {
        pairs()
            .iter()
            .position(|&p| p == self)
            .expect("valid pair index")
    }

    pub fn new(i: u8, j: u8) -> Option<Self> {
        (1 <= i && i < j && j <= 6).then_some(PairIndex { i, j })
    }
}

/// All 15 pairs in lexicographic order: index 0 ↔ (1,2), …, index 14 ↔ (5,6).
pub fn pairs() -> &'static [PairIndex; N_COORDS] {
    static PAIRS: OnceLock<[PairIndex; N_COORDS]> = OnceLock::new();
    PAIRS.get_or_init(|| {
        let mut out = [PairIndex { i: 0, j: 0 }; N_COORDS];
        let mut k = 0;
        for i in 1..=6u8 {
            for j in i + 1..=6 {
                out[k] = PairIndex { i, j };
                k += 1;
            }
        }
        out
    })
}

/// Index of the pair `(i, j)` (1-based columns, `i < j`).
pub fn pair_position(i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= 6);
    // lexicographic rank of (i,j) among pairs of {1..6}
    let before: usize = (1..i).map(|a| 6 - a).sum();
    before + (j - i - 1)
}

/// All 15 quadruples `i<j<k<l` of `{1..6}` in lexicographic order.
pub fn quadruples() -> &'static [[u8; 4]; N_RELATIONS] {
    static QUADS: OnceLock<[[u8; 4]; N_RELATIONS]> = OnceLock::new();
    QUADS.get_or_init(|| {
        let mut out = [[0u8; 4]; N_RELATIONS];
        let mut n = 0;
        for i in 1..=6u8 {
            for j in i + 1..=6 {
                for k in j + 1..=6 {
                    for l in k + 1..=6 {
                        out[n] = [i, j, k, l];
                        n += 1;
                    }
                }
            }
        }
        out
    })
}

/// A point of the affine chart, `t1..t8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint(pub [C64; N_CHART]);

impl ChartPoint {
    pub fn zero() -> Self {
        ChartPoint([ZERO; N_CHART])
    }

    pub fn from_slice(t: &[C64]) -> Self {
        let mut out = [ZERO; N_CHART];
        out.copy_from_slice(t);
        ChartPoint(out)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

/// Fifteen Plücker coordinates in lexicographic pair order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluckerVec(pub [C64; N_COORDS]);

impl PluckerVec {
    pub fn zero() -> Self {
        PluckerVec([ZERO; N_COORDS])
    }

    pub fn from_slice(p: &[C64]) -> Self {
        let mut out = [ZERO; N_COORDS];
        out.copy_from_slice(p);
        PluckerVec(out)
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    /// Coordinate `p_{ij}` (1-based columns).
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[pair_position(i, j)]
    }
}

/// One monomial of a Plücker coordinate: `sign · Π t_v · u^{u_exp}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub negative: bool,
    /// Chart variable indices (0-based), each with exponent one.
    pub vars: Vec<usize>,
    /// Weight `ω·α` of this monomial.
    pub weight: i32,
    /// `ν(p_k) − ω·α`.
    pub u_exp: i32,
}

impl Monomial {
    /// Exponent vector `α ∈ ℕ⁸`.
    pub fn exponents(&self) -> [u32; N_CHART] {
        let mut a = [0; N_CHART];
        for &v in &self.vars {
            a[v] += 1;
        }
        a
    }

    #[inline]
    fn eval_t(&self, t: &[C64; N_CHART]) -> C64 {
        match self.vars.as_slice() {
            [] => C64::new(1.0, 0.0),
            [a] => t[*a],
            [a, b] => t[*a] * t[*b],
            _ => self.vars.iter().fold(C64::new(1.0, 0.0), |acc, &v| acc * t[v]),
        }
    }
}

/// Per-coordinate monomial tables for the ω-deformation.
#[derive(Debug, Clone)]
pub struct WeightData {
    pub omega: [i32; N_CHART],
    /// `nu[k] = ν(p_k)`, the maximal weight among the monomials of `p_k`.
    pub nu: [i32; N_COORDS],
    pub monomials: Vec<Vec<Monomial>>,
}

#[derive(Clone, Copy)]
enum Entry {
    Zero,
    One,
    Var(usize),
}

fn chart_entry(row: usize, col: usize) -> Entry {
    // columns 0,1 hold the identity block
    match (row, col) {
        (0, 0) | (1, 1) => Entry::One,
        (_, 0) | (_, 1) => Entry::Zero,
        (0, c) => Entry::Var(c - 2),
        (_, c) => Entry::Var(c + 2),
    }
}

fn product(a: Entry, b: Entry) -> Option<Vec<usize>> {
    match (a, b) {
        (Entry::Zero, _) | (_, Entry::Zero) => None,
        (Entry::One, Entry::One) => Some(vec![]),
        (Entry::One, Entry::Var(v)) | (Entry::Var(v), Entry::One) => Some(vec![v]),
        (Entry::Var(x), Entry::Var(y)) => Some(vec![x, y]),
    }
}

impl WeightData {
    fn build() -> Self {
        let omega = OMEGA;
        let mut monomials = Vec::with_capacity(N_COORDS);
        let mut nu = [0; N_COORDS];
        for (k, p) in pairs().iter().enumerate() {
            let (ci, cj) = (p.i as usize - 1, p.j as usize - 1);
            let mut terms = Vec::new();
            // H[0,i]·H[1,j] − H[0,j]·H[1,i]
            if let Some(vars) = product(chart_entry(0, ci), chart_entry(1, cj)) {
                terms.push((false, vars));
            }
            if let Some(vars) = product(chart_entry(0, cj), chart_entry(1, ci)) {
                terms.push((true, vars));
            }
            let weights: Vec<i32> = terms
                .iter()
                .map(|(_, vars)| vars.iter().map(|&v| omega[v]).sum())
                .collect();
            let top = *weights.iter().max().expect("every minor is nonzero");
            nu[k] = top;
            monomials.push(
                terms
                    .into_iter()
                    .zip(weights)
                    .map(|((negative, vars), weight)| Monomial {
                        negative,
                        vars,
                        weight,
                        u_exp: top - weight,
                    })
                    .collect(),
            );
        }
        WeightData {
            omega,
            nu,
            monomials,
        }
    }

    /// The shared, lazily built instance.
    pub fn get() -> &'static WeightData {
        static DATA: OnceLock<WeightData> = OnceLock::new();
        DATA.get_or_init(WeightData::build)
    }

    /// The initial term `in_ω(p_k)` (the monomial with u-exponent zero).
    pub fn initial_term(&self, k: usize) -> &Monomial {
        self.monomials[k]
            .iter()
            .find(|m| m.u_exp == 0)
            .expect("unique initial term")
    }
}

#[inline]
fn upow(u: C64, e: i32) -> C64 {
    match e {
        0 => C64::new(1.0, 0.0),
        1 => u,
        2 => u * u,
        _ => u.powi(e),
    }
}

/// The 15 minors of `H(t)`.
pub fn pluecker_embed(t: &ChartPoint) -> PluckerVec {
    let t = &t.0;
    let mut p = [ZERO; N_COORDS];
    for (k, pair) in pairs().iter().enumerate() {
        let (ci, cj) = (pair.i as usize - 1, pair.j as usize - 1);
        let ent = |row, col| match chart_entry(row, col) {
            Entry::Zero => None,
            Entry::One => Some(C64::new(1.0, 0.0)),
            Entry::Var(v) => Some(t[v]),
        };
        let mut acc = ZERO;
        if let (Some(a), Some(b)) = (ent(0, ci), ent(1, cj)) {
            acc += a * b;
        }
        if let (Some(a), Some(b)) = (ent(0, cj), ent(1, ci)) {
            acc -= a * b;
        }
        p[k] = acc;
    }
    PluckerVec(p)
}

/// The ω-deformed coordinates `(p_{0,u}(t), …, p_{14,u}(t))`.
pub fn pluecker_embed_u(t: &ChartPoint, u: C64) -> PluckerVec {
    let wd = WeightData::get();
    let mut p = [ZERO; N_COORDS];
    for (k, monos) in wd.monomials.iter().enumerate() {
        let mut acc = ZERO;
        for m in monos {
            let mut term = m.eval_t(&t.0);
            if m.u_exp > 0 {
                term *= upow(u, m.u_exp);
            }
            if m.negative {
                acc -= term;
            } else {
                acc += term;
            }
        }
        p[k] = acc;
    }
    PluckerVec(p)
}

/// Analytic derivatives of [`pluecker_embed_u`]: the 15×8 Jacobian in `t`
/// and the 15-vector `∂/∂u`.
pub fn pluecker_embed_jacobian(t: &ChartPoint, u: C64) -> (CMat, [C64; N_COORDS]) {
    let wd = WeightData::get();
    let mut jac = CMat::zeros(N_COORDS, N_CHART);
    let mut du = [ZERO; N_COORDS];
    for (k, monos) in wd.monomials.iter().enumerate() {
        for m in monos {
            let sign = if m.negative { -1.0 } else { 1.0 };
            let uf = upow(u, m.u_exp);
            for (pos, &v) in m.vars.iter().enumerate() {
                let others = m
                    .vars
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != pos)
                    .fold(C64::new(1.0, 0.0), |acc, (_, &w)| acc * t.0[w]);
                jac[(k, v)] += others * uf * sign;
            }
            if m.u_exp > 0 {
                let d = upow(u, m.u_exp - 1) * m.u_exp as f64;
                du[k] += m.eval_t(&t.0) * d * sign;
            }
        }
    }
    (jac, du)
}

/// The 15 Plücker relations `p_ij p_kl − p_ik p_jl + p_il p_jk`.
pub fn pluecker_relations(p: &[C64]) -> [C64; N_RELATIONS] {
    debug_assert_eq!(p.len(), N_COORDS);
    let idx = relation_indices();
    let mut q = [ZERO; N_RELATIONS];
    for (out, r) in q.iter_mut().zip(idx) {
        *out = p[r[0]] * p[r[1]] - p[r[2]] * p[r[3]] + p[r[4]] * p[r[5]];
    }
    q
}

/// Analytic 15×15 Jacobian of [`pluecker_relations`].
pub fn pluecker_relations_jacobian(p: &[C64]) -> CMat {
    let mut jac = CMat::zeros(N_RELATIONS, N_COORDS);
    for (row, r) in relation_indices().iter().enumerate() {
        jac[(row, r[0])] += p[r[1]];
        jac[(row, r[1])] += p[r[0]];
        jac[(row, r[2])] -= p[r[3]];
        jac[(row, r[3])] -= p[r[2]];
        jac[(row, r[4])] += p[r[5]];
        jac[(row, r[5])] += p[r[4]];
    }
    jac
}

/// Writes the relation Jacobian into a dense row-major 15×15 buffer,
/// overwriting it. Used in hot loops.
pub fn relations_jacobian_into(p: &[C64], out: &mut [C64]) {
    debug_assert_eq!(out.len(), N_RELATIONS * N_COORDS);
    out.iter_mut().for_each(|z| *z = ZERO);
    for (row, r) in relation_indices().iter().enumerate() {
        let base = row * N_COORDS;
        out[base + r[0]] += p[r[1]];
        out[base + r[1]] += p[r[0]];
        out[base + r[2]] -= p[r[3]];
        out[base + r[3]] -= p[r[2]];
        out[base + r[4]] += p[r[5]];
        out[base + r[5]] += p[r[4]];
    }
}

/// Coordinate positions `[ij, kl, ik, jl, il, jk]` for each relation.
pub fn relation_indices() -> &'static [[usize; 6]; N_RELATIONS] {
    static IDX: OnceLock<[[usize; 6]; N_RELATIONS]> = OnceLock::new();
    IDX.get_or_init(|| {
        let mut out = [[0usize; 6]; N_RELATIONS];
        for (n, q) in quadruples().iter().enumerate() {
            let [i, j, k, l] = q.map(usize::from);
            out[n] = [
                pair_position(i, j),
                pair_position(k, l),
                pair_position(i, k),
                pair_position(j, l),
                pair_position(i, l),
                pair_position(j, k),
            ];
        }
        out
    })
}
