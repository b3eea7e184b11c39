use potts_core::spinsys::{alignment_gap, build_potts_matrix, cholesky_factor, ferro_alignment_check};
use potts_core::{InteractionMatrix, Signature};
use proptest::prelude::*;

/// Cyclic Jacobi rotations on a dense symmetric matrix; eigenvalues ascending.
fn jacobi_eigenvalues(q: usize, a: &[f64]) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..q).map(|i| a[i * q..(i + 1) * q].to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..q)
            .flat_map(|i| (0..q).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..q {
            for r in p + 1..q {
                if m[p][r].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[r][r] - m[p][p]) / (2.0 * m[p][r]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in m.iter_mut() {
                    let (mkp, mkr) = (row[p], row[r]);
                    row[p] = c * mkp - s * mkr;
                    row[r] = s * mkp + c * mkr;
                }
                let (rp, rr) = (m[p].clone(), m[r].clone());
                m[p] = rp.iter().zip(&rr).map(|(a, b)| c * a - s * b).collect();
                m[r] = rp.iter().zip(&rr).map(|(a, b)| s * a + c * b).collect();
            }
        }
    }
    let mut ev: Vec<f64> = (0..q).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn ferro_matrix() -> impl Strategy<Value = InteractionMatrix> {
    (2usize..=6).prop_flat_map(|q| {
        prop::collection::vec(0.0f64..1.0, q * q).prop_map(move |a| {
            InteractionMatrix::from_fn(q, |i, j| {
                let dot: f64 = (0..q).map(|k| a[k * q + i] * a[k * q + j]).sum();
                dot + if i == j { 0.1 } else { 0.0 }
            })
            .unwrap()
        })
    })
}

fn antiferro_matrix() -> impl Strategy<Value = InteractionMatrix> {
    (3usize..=6).prop_flat_map(|q| {
        prop::collection::vec(0.0f64..0.05, q * q).prop_map(move |e| {
            InteractionMatrix::from_fn(q, |i, j| {
                let base = if i == j { 0.0 } else { 1.0 };
                base + 0.5 * (e[i * q + j] + e[j * q + i])
            })
            .unwrap()
        })
    })
}

fn simplex(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, q).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

#[test]
fn potts_ferromagnetic_iff_activity_above_one() {
    for q in 2..=10 {
        for k in 1..=40 {
            let b = 0.1 * k as f64;
            if (b - 1.0).abs() < 1e-12 {
                continue;
            }
            let m = build_potts_matrix(q, b).unwrap();
            assert_eq!(m.signature() == Signature::Ferromagnetic, b > 1.0, "q={q} B={b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigenvalues_match_jacobi(m in ferro_matrix()) {
        let oracle = jacobi_eigenvalues(m.q(), m.entries());
        for (a, b) in m.eigenvalues().iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-9 * oracle[oracle.len() - 1].abs().max(1.0));
        }
    }

    #[test]
    fn cholesky_round_trip(m in ferro_matrix()) {
        let q = m.q();
        let u = cholesky_factor(&m).unwrap();
        for i in 0..q {
            for j in 0..q {
                let v: f64 = (0..q).map(|k| u[k * q + i] * u[k * q + j]).sum();
                prop_assert!((v - m.get(i, j)).abs() < 1e-12 * m.get(i, i).max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn alignment_ferro_direction((m, z1, z2) in ferro_matrix().prop_flat_map(|m| {
        let q = m.q();
        (Just(m), simplex(q), simplex(q))
    })) {
        prop_assert_eq!(m.signature(), Signature::Ferromagnetic);
        prop_assert!(ferro_alignment_check(&m, &z1, &z2).unwrap());
    }

    #[test]
    fn alignment_antiferro_direction((m, z1, z2) in antiferro_matrix().prop_flat_map(|m| {
        let q = m.q();
        (Just(m), simplex(q), simplex(q))
    })) {
        prop_assert_eq!(m.signature(), Signature::Antiferromagnetic);
        let scale = m.bilinear(&z1, &z2).powi(2).max(1.0);
        prop_assert!(alignment_gap(&m, &z1, &z2).unwrap() <= 1e-12 * scale);
    }
}
