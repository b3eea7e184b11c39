//! Short-cycle counts in multigraphs.

use std::collections::BTreeMap;

use super::RegularGraph;
use crate::error::{invalid, Result};

/// Largest cycle length accepted by [`count_cycles`].
pub const MAX_CYCLE_LENGTH: usize = 12;

/// `X[k-1]` is the number of cycles of length `k`: self-loops for `k = 1`, pairs of
/// parallel edges for `k = 2`, and for `k ≥ 3` vertex cycles weighted by the product of
/// the edge multiplicities along them.
pub fn count_cycles(g: &RegularGraph, kmax: usize) -> Result<Vec<u64>> {
    if kmax == 0 || kmax > MAX_CYCLE_LENGTH {
        return invalid(format!("kmax must be in 1..={MAX_CYCLE_LENGTH}"));
    }
    let mut mult: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut x = vec![0u64; kmax];
    for &(u, v) in &g.edges {
        if u == v {
            x[0] += 1;
        } else {
            *mult.entry((u, v)).or_insert(0) += 1;
        }
    }
    if kmax >= 2 {
        x[1] = mult.values().map(|m| m * (m - 1) / 2).sum();
    }
    if kmax < 3 {
        return Ok(x);
    }
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); g.n];
    for (&(u, v), &m) in &mult {
        adj[u].push((v, m));
        adj[v].push((u, m));
    }

    struct Walk<'a> {
        adj: &'a [Vec<(usize, u64)>],
        on_path: Vec<bool>,
        kmax: usize,
        counts: Vec<u64>,
    }

    fn extend(w: &mut Walk, start: usize, at: usize, len: usize, weight: u64) {
        for &(v, m) in &w.adj[at] {
            if v == start && len >= 3 {
                w.counts[len - 1] += weight * m;
            } else if v > start && !w.on_path[v] && len < w.kmax {
                w.on_path[v] = true;
                extend(w, start, v, len + 1, weight * m);
                w.on_path[v] = false;
            }
        }
    }

    let mut walk = Walk { adj: &adj, on_path: vec![false; g.n], kmax, counts: vec![0; kmax] };
    for s in 0..g.n {
        walk.on_path[s] = true;
        extend(&mut walk, s, s, 1, 1);
        walk.on_path[s] = false;
    }
    for k in 3..=kmax {
        x[k - 1] = walk.counts[k - 1] / 2;
    }
    Ok(x)
}
