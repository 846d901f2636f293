mod common;

use proptest::prelude::*;

use mukai_core::grassmann::{
    pairs, pluecker_embed, pluecker_embed_jacobian, pluecker_embed_u, pluecker_relations, pluecker_relations_jacobian,
    quadruples, ChartPoint, N_CHART, N_COORDS, N_RELATIONS, OMEGA,
};
use mukai_core::linalg::{CMat, C64};
use mukai_core::random;

fn chart_point(seed: u64) -> ChartPoint {
    ChartPoint::from_slice(&random::complex_gaussian_vec(&mut random::stream(seed, 0), N_CHART))
}

/// `[[1,0,t1..t4],[0,1,t5..t8]]` as an explicit 2×6 matrix.
fn chart_matrix(t: &ChartPoint) -> CMat {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut h = CMat::zeros(2, 6);
    h[(0, 0)] = one;
    h[(1, 1)] = one;
    h[(0, 1)] = zero;
    h[(1, 0)] = zero;
    for c in 0..4 {
        h[(0, 2 + c)] = t.0[c];
        h[(1, 2 + c)] = t.0[4 + c];
    }
    h
}

/// The chart variable at `H[row][col]`, if the entry is a variable.
fn chart_var(row: usize, col: usize) -> Option<usize> {
    (col >= 2).then(|| row * 4 + col - 2)
}

/// Two-term expansion of the minor on columns `(i, j)` as
/// `(sign, variables)`; identity entries contribute no variable.
fn minor_terms(i: usize, j: usize) -> Vec<(f64, Vec<usize>)> {
    let entry_nonzero = |r: usize, c: usize| c >= 2 || r == c;
    let mut out = Vec::new();
    for (sign, (a, b)) in [(1.0, ((0, i), (1, j))), (-1.0, ((0, j), (1, i)))] {
        if entry_nonzero(a.0, a.1) && entry_nonzero(b.0, b.1) {
            let vars = [chart_var(a.0, a.1), chart_var(b.0, b.1)].into_iter().flatten().collect();
            out.push((sign, vars));
        }
    }
    out
}

fn weight(vars: &[usize]) -> i32 {
    vars.iter().map(|&v| OMEGA[v]).sum()
}

#[test]
fn embedding_matches_brute_force_minors() {
    for seed in 0..10 {
        let t = chart_point(seed);
        let h = chart_matrix(&t);
        let p = pluecker_embed(&t);
        for (k, pair) in pairs().iter().enumerate() {
            let (i, j) = (pair.i as usize - 1, pair.j as usize - 1);
            let minor = h[(0, i)] * h[(1, j)] - h[(0, j)] * h[(1, i)];
            assert!((p.0[k] - minor).norm() < 1e-14, "coordinate {k}");
        }
    }
}

#[test]
fn pairs_and_quadruples_are_lexicographic() {
    let ps: Vec<(u8, u8)> = pairs().iter().map(|p| (p.i, p.j)).collect();
    let mut sorted = ps.clone();
    sorted.sort();
    assert_eq!(ps, sorted);
    assert_eq!(ps.len(), N_COORDS);
    let qs = quadruples();
    assert_eq!(qs.len(), N_RELATIONS);
    assert!(qs.windows(2).all(|w| w[0] < w[1]));
    assert!(qs.iter().all(|q| q.windows(2).all(|w| w[0] < w[1])));
}

#[test]
fn degenerate_embedding_at_one_is_bit_identical() {
    for seed in 0..20 {
        let t = chart_point(seed);
        let a = pluecker_embed(&t);
        let b = pluecker_embed_u(&t, C64::new(1.0, 0.0));
        for k in 0..N_COORDS {
            assert_eq!(a.0[k].re.to_bits(), b.0[k].re.to_bits());
            assert_eq!(a.0[k].im.to_bits(), b.0[k].im.to_bits());
        }
    }
}

#[test]
fn degenerate_embedding_at_zero_is_the_heaviest_monomial() {
    let t = chart_point(3);
    let p0 = pluecker_embed_u(&t, C64::new(0.0, 0.0));
    for (k, pair) in pairs().iter().enumerate() {
        let terms = minor_terms(pair.i as usize - 1, pair.j as usize - 1);
        let top = terms.iter().map(|(_, v)| weight(v)).max().unwrap();
        let heaviest: Vec<_> = terms.iter().filter(|(_, v)| weight(v) == top).collect();
        assert_eq!(heaviest.len(), 1, "initial term of coordinate {k} is not a monomial");
        let (sign, vars) = heaviest[0];
        let value = vars.iter().fold(C64::new(*sign, 0.0), |acc, &v| acc * t.0[v]);
        assert_eq!(p0.0[k], value, "coordinate {k}");
    }
}

#[test]
fn embedding_jacobian_matches_finite_differences() {
    for seed in 0..5 {
        let t = chart_point(seed);
        for u in [C64::new(0.3, 0.7), C64::new(1.0, 0.0), C64::new(0.0, 0.0)] {
            let (jac, du) = pluecker_embed_jacobian(&t, u);
            let err = common::fd_error(&jac, &t.0, 1e-5, |x| pluecker_embed_u(&ChartPoint::from_slice(x), u).0.to_vec());
            assert!(err < 1e-6, "t-Jacobian error {err:e} at u = {u}");
            let du_mat = CMat::from_vec(N_COORDS, 1, du.to_vec()).unwrap();
            let err = common::fd_error(&du_mat, &[u], 1e-5, |v| pluecker_embed_u(&t, v[0]).0.to_vec());
            assert!(err < 1e-6, "u-derivative error {err:e} at u = {u}");
        }
    }
}

#[test]
fn relation_jacobian_matches_finite_differences() {
    let p = random::complex_gaussian_vec(&mut random::stream(4, 0), N_COORDS);
    let jac = pluecker_relations_jacobian(&p);
    let err = common::fd_error(&jac, &p, 1e-5, |q| pluecker_relations(q).to_vec());
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn generic_vector_violates_relations() {
    let p = random::complex_gaussian_vec(&mut random::stream(9, 0), N_COORDS);
    let q = pluecker_relations(&p);
    assert!(q.iter().any(|z| z.norm() > 1e-3));
}

fn seeded_point(seed: u64, scale: f64) -> ChartPoint {
    let v = random::complex_gaussian_vec(&mut random::stream(seed, 0), N_CHART);
    ChartPoint::from_slice(&v.iter().map(|z| z * scale).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embedded_points_satisfy_relations(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let t = seeded_point(seed, scale);
        let p = pluecker_embed(&t);
        let size = p.0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let q = pluecker_relations(&p.0);
        prop_assert!(q.iter().all(|z| z.norm() < 1e-13 * size * size));
    }

    #[test]
    fn rows_of_any_matrix_give_plucker_points(seed in any::<u64>()) {
        // minors of a general 2×6 matrix, not just of the chart
        let m = random::complex_gaussian_mat(&mut random::stream(seed, 0), 2, 6);
        let p: Vec<C64> = pairs()
            .iter()
            .map(|pr| {
                let (i, j) = (pr.i as usize - 1, pr.j as usize - 1);
                m[(0, i)] * m[(1, j)] - m[(0, j)] * m[(1, i)]
            })
            .collect();
        prop_assert!(pluecker_relations(&p).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn degeneration_is_a_weighted_rescaling(seed in any::<u64>(), r in 0.2f64..2.0, arg in 0.0f64..6.28) {
        // p_{k,u}(t) = u^{ν_k} · p_k(u^{−ω}·t)
        let t = seeded_point(seed, 0.7);
        let u = C64::from_polar(r, arg);
        let scaled = ChartPoint(std::array::from_fn(|v| t.0[v] * u.powi(-OMEGA[v])));
        let plain = pluecker_embed(&scaled);
        let deformed = pluecker_embed_u(&t, u);
        for (k, pair) in pairs().iter().enumerate() {
            let terms = minor_terms(pair.i as usize - 1, pair.j as usize - 1);
            let nu = terms.iter().map(|(_, v)| weight(v)).max().unwrap();
            let expected = plain.0[k] * u.powi(nu);
            prop_assert!((expected - deformed.0[k]).norm() < 1e-11 * (1.0 + expected.norm()));
        }
    }
}
