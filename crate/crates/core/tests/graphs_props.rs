use std::collections::BTreeMap;

use potts_core::graphs::{
    brute_gibbs, build_gadget, build_reduction, count_cycles, enumerate_pairings, pairing_sample, pairing_to_graph,
    GadgetSpec, RegularGraph, Role,
};
use potts_core::spinsys::build_potts_matrix;
use proptest::prelude::*;

fn multiplicities(g: &RegularGraph) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; g.n]; g.n];
    for &(u, v) in &g.edges {
        if u != v {
            m[u][v] += 1;
            m[v][u] += 1;
        }
    }
    m
}

/// Cycles of length `k ≥ 3` as ordered sequences of distinct vertices, divided by `2k`.
fn brute_cycles(g: &RegularGraph, k: usize) -> u64 {
    fn rec(m: &[Vec<u64>], k: usize, path: &mut Vec<usize>, used: &mut [bool], total: &mut u64) {
        if path.len() == k {
            let w: u64 = (0..k).map(|i| m[path[i]][path[(i + 1) % k]]).product();
            *total += w;
            return;
        }
        for v in 0..m.len() {
            if !used[v] {
                used[v] = true;
                path.push(v);
                rec(m, k, path, used, total);
                path.pop();
                used[v] = false;
            }
        }
    }
    let m = multiplicities(g);
    let mut total = 0;
    rec(&m, k, &mut Vec::new(), &mut vec![false; g.n], &mut total);
    total / (2 * k as u64)
}

/// Canonical multiset of edges, used to compare sampled and enumerated graphs.
fn key(g: &RegularGraph) -> Vec<(usize, usize)> {
    let mut e = g.edges.clone();
    e.sort_unstable();
    e
}

/// Upper 0.999 quantile of χ² with `df` degrees of freedom (Wilson-Hilferty).
fn chi2_critical(df: f64) -> f64 {
    let z = 3.090_232;
    let h = 2.0 / (9.0 * df);
    df * (1.0 - h + z * h.sqrt()).powi(3)
}

fn sampled_matches_enumeration(n: usize, delta: usize, samples: u64) {
    let mut expected: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    let mut total = 0.0;
    for p in enumerate_pairings(n, delta).unwrap() {
        *expected.entry(key(&pairing_to_graph(n, delta, &p))).or_insert(0.0) += 1.0;
        total += 1.0;
    }
    let mut observed: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    for s in 0..samples {
        let k = key(&pairing_sample(n, delta, s).unwrap());
        assert!(expected.contains_key(&k));
        *observed.entry(k).or_insert(0.0) += 1.0;
    }
    let chi2: f64 = expected
        .iter()
        .map(|(k, c)| {
            let e = c / total * samples as f64;
            let o = observed.get(k).copied().unwrap_or(0.0);
            (o - e) * (o - e) / e
        })
        .sum();
    let df = (expected.len() - 1) as f64;
    assert!(chi2 < chi2_critical(df), "n={n} Δ={delta}: χ²={chi2:.2} df={df}");
}

#[test]
fn pairing_sampler_is_uniform() {
    sampled_matches_enumeration(2, 3, 20_000);
    sampled_matches_enumeration(4, 2, 20_000);
    sampled_matches_enumeration(4, 3, 40_000);
}

#[test]
fn known_cycle_counts() {
    assert_eq!(count_cycles(&RegularGraph::complete(4), 4).unwrap(), vec![0, 0, 4, 3]);
    let k33 = RegularGraph::new(6, 3, (0..3).flat_map(|u| (3..6).map(move |v| (u, v))).collect()).unwrap();
    assert_eq!(count_cycles(&k33, 6).unwrap(), vec![0, 0, 0, 9, 0, 6]);
    let multi = RegularGraph::new(2, 3, vec![(0, 0), (0, 1), (1, 1)]).unwrap();
    assert_eq!(count_cycles(&multi, 3).unwrap(), vec![2, 0, 0]);
    let triple = RegularGraph::new(2, 3, vec![(0, 1); 3]).unwrap();
    assert_eq!(count_cycles(&triple, 2).unwrap(), vec![0, 3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn handshake(n in 1usize..200, delta in 1usize..8, seed in any::<u64>()) {
        prop_assume!(n * delta % 2 == 0);
        let g = pairing_sample(n, delta, seed).unwrap();
        prop_assert_eq!(g.edges.len(), n * delta / 2);
        prop_assert!(g.degrees().iter().all(|&d| d == delta));
        prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edges.len());
    }

    #[test]
    fn cycles_match_brute_force(half in 1usize..=4, seed in any::<u64>()) {
        let g = pairing_sample(2 * half, 3, seed).unwrap();
        let x = count_cycles(&g, 6).unwrap();
        prop_assert_eq!(x[0], g.self_loops() as u64);
        for k in 3..=6 {
            prop_assert_eq!(x[k - 1], brute_cycles(&g, k));
        }
    }

    #[test]
    fn phase_sums_and_color_symmetry(half in 1usize..=3, seed in any::<u64>(), q in 2usize..=3, b in 0.3f64..4.0) {
        let g = pairing_sample(2 * half, 3, seed).unwrap();
        let o = brute_gibbs(&g, &build_potts_matrix(q, b).unwrap()).unwrap();
        let sum: f64 = o.phase_z.values().sum();
        prop_assert!((sum - o.z).abs() < 1e-12 * o.z);
        for (counts, z) in &o.phase_z {
            let mut rotated = counts.clone();
            rotated.rotate_left(1);
            let mut swapped = counts.clone();
            swapped.swap(0, 1);
            prop_assert!((o.z_alpha(&rotated) - z).abs() < 1e-12 * z);
            prop_assert!((o.z_alpha(&swapped) - z).abs() < 1e-12 * z);
        }
    }

    #[test]
    fn gadget_roles(delta in 3usize..=4, tps in 1usize..=2, depth in 1usize..=2, extra in 0usize..6, seed in any::<u64>()) {
        let removed = tps * (delta - 1).pow(depth as u32);
        let spec = GadgetSpec { delta, trees_per_side: tps, tree_depth: depth, n_core: removed + extra, seed };
        let g = build_gadget(&spec).unwrap();
        prop_assert_eq!(g.n, spec.vertex_count());
        let roles = g.roles.clone().unwrap();
        let deg = g.degrees();
        let roots = roles.iter().filter(|r| matches!(r, Role::RootPlus | Role::RootMinus)).count();
        prop_assert_eq!(roots, 2 * tps);
        for v in 0..g.n {
            let is_root = matches!(roles[v], Role::RootPlus | Role::RootMinus);
            prop_assert_eq!(deg[v], if is_root { delta - 1 } else { delta });
        }
        prop_assert!(g.bipartition().is_some());
        prop_assert_eq!(g.self_loops(), 0);
    }
}

#[test]
fn empty_h_gives_product_of_gadget_partition_functions() {
    let gadgets: Vec<RegularGraph> = [5u64, 9]
        .iter()
        .map(|&seed| build_gadget(&GadgetSpec { delta: 3, trees_per_side: 1, tree_depth: 1, n_core: 2, seed }).unwrap())
        .collect();
    assert!(gadgets.iter().all(|g| g.n == 10));
    let h = RegularGraph::new(2, 1, vec![]).unwrap();
    let hg = build_reduction(&h, &gadgets).unwrap();
    let m = build_potts_matrix(2, 3.0).unwrap();
    let whole = brute_gibbs(&hg, &m).unwrap().z;
    let product: f64 = gadgets.iter().map(|g| brute_gibbs(g, &m).unwrap().z).product();
    assert!((whole - product).abs() < 1e-12 * product);
}

#[test]
fn reduction_restores_root_degrees() {
    let h = RegularGraph::cycle(3);
    let gadgets: Vec<RegularGraph> = (0..3)
        .map(|s| build_gadget(&GadgetSpec { delta: 3, trees_per_side: 2, tree_depth: 1, n_core: 4, seed: s }).unwrap())
        .collect();
    let hg = build_reduction(&h, &gadgets).unwrap();
    let roles = hg.roles.clone().unwrap();
    let deg = hg.degrees();
    for v in 0..hg.n {
        if matches!(roles[v], Role::RootPlus | Role::RootMinus) {
            assert!(deg[v] == 2 || deg[v] == 3);
        }
    }
    assert_eq!(hg.edges.len(), gadgets.iter().map(|g| g.edges.len()).sum::<usize>() + 3);
    assert_eq!(deg.iter().filter(|&&d| d == 3).count(), hg.n - 6);
}
