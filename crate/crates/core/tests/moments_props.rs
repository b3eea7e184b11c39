use potts_core::graphs::{enumerate_pairings, pairing_to_graph, RegularGraph};
use potts_core::moments::{
    first_moment_exact, inner_edge_max, ln_first_moment_exact, moment_report, psi1, second_moment_exact, ReportOptions,
};
use potts_core::spinsys::build_potts_matrix;
use potts_core::{Exec, InteractionMatrix, Signature};
use proptest::prelude::*;

/// `Z^α` of one graph by direct enumeration of all colorings with the given counts.
fn z_counts(g: &RegularGraph, m: &InteractionMatrix, counts: &[usize]) -> f64 {
    let q = m.q();
    let mut total = 0.0;
    for idx in 0..q.pow(g.n as u32) {
        let sigma: Vec<usize> = (0..g.n).map(|v| idx / q.pow(v as u32) % q).collect();
        let mut c = vec![0; q];
        sigma.iter().for_each(|&s| c[s] += 1);
        if c == counts {
            total += g.edges.iter().map(|&(u, v)| m.get(sigma[u], sigma[v])).product::<f64>();
        }
    }
    total
}

/// Mean of `Z^α` and of `(Z^α)²` over every pairing.
fn pairing_moments(n: usize, delta: usize, m: &InteractionMatrix, counts: &[usize]) -> (f64, f64) {
    let (mut s1, mut s2, mut k) = (0.0, 0.0, 0.0);
    for p in enumerate_pairings(n, delta).unwrap() {
        let z = z_counts(&pairing_to_graph(n, delta, &p), m, counts);
        s1 += z;
        s2 += z * z;
        k += 1.0;
    }
    (s1 / k, s2 / k)
}

fn positive_matrix(q: usize) -> impl Strategy<Value = InteractionMatrix> {
    prop::collection::vec(0.2f64..3.0, q * q)
        .prop_map(move |e| InteractionMatrix::from_fn(q, |i, j| 0.5 * (e[i * q + j] + e[j * q + i])).unwrap())
}

fn interior_simplex(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, q).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ipf_first_order_conditions((m, alpha) in (2usize..=5).prop_flat_map(|q| (positive_matrix(q), interior_simplex(q)))) {
        let q = m.q();
        let inner = inner_edge_max(&m, &alpha).unwrap();
        let x = &inner.edges;
        for (r, a) in x.row_sums().iter().zip(&alpha) {
            prop_assert!((r - a).abs() < 1e-10);
        }
        for i in 0..q {
            for j in 0..q {
                prop_assert!((x.get(i, j) - x.get(j, i)).abs() < 1e-14);
                for k in 0..q {
                    for l in 0..q {
                        let lhs = x.get(i, j) * x.get(k, l) * m.get(i, l) * m.get(k, j);
                        let rhs = x.get(i, l) * x.get(k, j) * m.get(i, j) * m.get(k, l);
                        prop_assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1e-12));
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exact_first_moment_general_matrices(m in positive_matrix(2), c0 in 0usize..=4) {
        let counts = [c0, 4 - c0];
        let alpha = [c0 as f64 / 4.0, 1.0 - c0 as f64 / 4.0];
        let (mean, _) = pairing_moments(4, 3, &m, &counts);
        let exact = first_moment_exact(4, 3, &m, &alpha).unwrap();
        prop_assert!(((exact - mean) / mean).abs() < 1e-12);
    }
}

#[test]
fn exact_first_moment_three_colors_general() {
    let m = InteractionMatrix::from_rows(&[vec![2.0, 0.5, 1.0], vec![0.5, 1.5, 0.7], vec![1.0, 0.7, 0.3]]).unwrap();
    for counts in [[2, 1, 1], [1, 2, 1], [4, 0, 0], [2, 2, 0], [0, 1, 3]] {
        let alpha: Vec<f64> = counts.iter().map(|&c| c as f64 / 4.0).collect();
        let (mean, _) = pairing_moments(4, 3, &m, &counts);
        let exact = first_moment_exact(4, 3, &m, &alpha).unwrap();
        assert!(((exact - mean) / mean).abs() < 1e-12, "{counts:?}: {exact} vs {mean}");
    }
}

#[test]
fn second_moment_matches_enumeration() {
    for (q, b, n, counts) in [
        (2, 2.0, 2, vec![1, 1]),
        (2, 2.0, 4, vec![2, 2]),
        (2, 0.5, 4, vec![3, 1]),
        (3, 2.0, 4, vec![2, 1, 1]),
        (3, 1.0, 2, vec![1, 1, 0]),
    ] {
        let m = build_potts_matrix(q, b).unwrap();
        let alpha: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let (first, second) = pairing_moments(n, 3, &m, &counts);
        let exact = second_moment_exact(n, 3, &m, &alpha).unwrap();
        assert!(((exact - second) / second).abs() < 1e-12, "q={q} B={b} {counts:?}: {exact} vs {second}");
        assert!(exact >= first * first * (1.0 - 1e-12));
    }
}

#[test]
fn growth_rate_approaches_psi1() {
    let m = build_potts_matrix(3, 2.0).unwrap();
    let alpha = [1.0 / 3.0; 3];
    let target = psi1(&m, 3, &alpha).unwrap();
    let gaps: Vec<f64> = [12usize, 24, 48, 96, 192]
        .iter()
        .map(|&n| (ln_first_moment_exact(n, 3, &m, &alpha).unwrap() / n as f64 - target).abs())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[4] < 0.05, "{gaps:?}");
}

#[test]
fn norm_identity_for_random_ferromagnets() {
    let cases = [
        vec![vec![3.0, 1.0, 0.5], vec![1.0, 2.0, 0.8], vec![0.5, 0.8, 2.5]],
        vec![vec![2.0, 1.2], vec![1.2, 4.0]],
        vec![vec![4.0, 1.0, 1.0, 0.2], vec![1.0, 3.0, 0.5, 0.5], vec![1.0, 0.5, 3.5, 1.0], vec![0.2, 0.5, 1.0, 2.0]],
    ];
    for rows in cases {
        let m = InteractionMatrix::from_rows(&rows).unwrap();
        assert_eq!(m.signature(), Signature::Ferromagnetic);
        for delta in [3, 4] {
            let rep = moment_report(&m, delta, &ReportOptions::default(), Exec::default()).unwrap();
            let norm = rep.norm_value.unwrap();
            assert!((rep.psi1_max - delta as f64 * norm.ln()).abs() < 1e-8, "{rows:?} Δ={delta}");
            assert!((rep.psi2_max - 2.0 * rep.psi1_max).abs() < 1e-7, "{rows:?} Δ={delta}");
        }
    }
}
