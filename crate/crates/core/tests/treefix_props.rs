use potts_core::moments::psi1;
use potts_core::spinsys::build_potts_matrix;
use potts_core::treefix::{
    self, fixpoint_residual, phi1, potts_fixpoints, potts_thresholds, search_fixpoints, SearchOptions, Stability,
    FIXPOINT_RESIDUAL_TOL,
};
use potts_core::Exec;
use proptest::prelude::*;

fn distinct_values(r: &[f64], tol: f64) -> usize {
    let mut v = r.to_vec();
    v.sort_by(f64::total_cmp);
    1 + v.windows(2).filter(|w| w[1] - w[0] > tol * w[1].abs().max(1.0)).count()
}

fn sorted(r: &[f64]) -> Vec<f64> {
    let mut v = r.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_form_fixpoints_are_fixpoints(q in 3usize..=8, delta in 3usize..=6, frac in 0.001f64..0.999) {
        let brc = potts_thresholds(q, delta).unwrap().brc;
        let b = 1.0 + frac * (2.0 * brc - 1.0);
        let m = build_potts_matrix(q, b).unwrap();
        for fp in potts_fixpoints(q, delta, b).unwrap() {
            prop_assert!(fixpoint_residual(&m, delta, &fp.r).unwrap() < FIXPOINT_RESIDUAL_TOL);
            let t = fp.potts.unwrap().t;
            if (2..q).contains(&t) {
                prop_assert_eq!(fp.stability, Stability::Unstable);
            }
            let value = psi1(&m, delta, &fp.alpha).unwrap();
            prop_assert!((phi1(&m, delta, &fp.r) - value).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_stable_below_brc(q in 3usize..=8, delta in 3usize..=6, frac in 0.01f64..0.99) {
        let brc = potts_thresholds(q, delta).unwrap().brc;
        for b in [1.0 + frac * (brc - 1.0), brc + frac * brc] {
            let uniform = &potts_fixpoints(q, delta, b).unwrap()[0];
            let expect = if b < brc { Stability::Attractive } else { Stability::Unstable };
            prop_assert_eq!(uniform.stability, expect);
        }
    }

    #[test]
    fn thresholds_ordered(q in 3usize..=12, delta in 3usize..=12) {
        prop_assert!(potts_thresholds(q, delta).unwrap().ordered());
    }
}

#[test]
fn uniform_boundary_is_brc() {
    for q in 3..=8 {
        for delta in 3..=6 {
            let brc = potts_thresholds(q, delta).unwrap().brc;
            assert!(((delta as f64 - 2.0) * (brc - 1.0) - q as f64).abs() < 1e-12);
            let uniform = &potts_fixpoints(q, delta, brc).unwrap()[0];
            assert!(uniform.jacobian_eigen.iter().all(|v| (v - 1.0).abs() < 1e-12));
            assert_eq!(uniform.stability, Stability::Marginal);
        }
    }
}

#[test]
fn majority_fixpoints_appear_at_bu() {
    for (q, delta) in [(3, 3), (4, 3), (3, 5), (6, 4)] {
        let bu = potts_thresholds(q, delta).unwrap().bu;
        assert!(treefix::attractive_majority_ratio(q, delta, bu * (1.0 - 1e-6)).unwrap().is_none());
        assert!(treefix::attractive_majority_ratio(q, delta, bu * (1.0 + 1e-6)).unwrap().is_some());
    }
}

#[test]
fn iteration_finds_the_closed_form_attractive_fixpoints() {
    let opts = SearchOptions::default();
    for (q, delta, b) in [(3, 3, 2.0), (3, 3, 3.84), (3, 3, 3.9), (3, 3, 4.5), (4, 3, 5.0), (5, 4, 3.0)] {
        let m = build_potts_matrix(q, b).unwrap();
        let found = search_fixpoints(&m, delta, &opts, Exec::default()).unwrap();
        assert!(!found.is_empty());
        for fp in &found {
            assert!(distinct_values(&fp.r, 1e-8) <= 2, "q={q} Δ={delta} B={b}: {:?}", fp.r);
        }
        let closed: Vec<Vec<f64>> = potts_fixpoints(q, delta, b)
            .unwrap()
            .into_iter()
            .filter(|f| f.stability == Stability::Attractive)
            .map(|f| sorted(&f.r))
            .collect();
        let iterated: Vec<Vec<f64>> =
            found.iter().filter(|f| f.stability == Stability::Attractive).map(|f| sorted(&f.r)).collect();
        for c in &closed {
            assert!(
                iterated.iter().any(|i| i.iter().zip(c).all(|(a, b)| (a - b).abs() < 1e-7)),
                "q={q} Δ={delta} B={b}: closed form {c:?} not reached"
            );
        }
        for i in &iterated {
            assert!(closed.iter().any(|c| i.iter().zip(c).all(|(a, b)| (a - b).abs() < 1e-7)));
        }
    }
}
