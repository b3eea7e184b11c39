//! The exact Swendsen-Wang transition matrix of a small graph, its stationary vector
//! and the conductance of state sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dynamics::phase_of;
use super::unionfind::UnionFind;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::graphs::{decode_state, RegularGraph};

/// Largest `q^n` accepted by [`exact_sw_kernel`].
pub const KERNEL_STATE_LIMIT: usize = 20_000;
/// Bound on `Σ_σ 2^{|mono(σ)|}·q^n`, the worst-case enumeration work.
pub const KERNEL_WORK_LIMIT: f64 = 4e9;

/// Row-sparse transition matrix over the `q^n` colorings, states indexed as in
/// [`decode_state`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwKernel {
    pub q: usize,
    pub n: usize,
    pub b: f64,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SwKernel {
    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i].binary_search_by_key(&j, |e| e.0).map(|k| self.rows[i][k].1).unwrap_or(0.0)
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let s = self.states();
        let mut d = vec![vec![0.0; s]; s];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                d[i][j] = p;
            }
        }
        d
    }

    /// `max_i |Σ_j P_ij − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().map(|e| e.1).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `πP`.
    pub fn left_apply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.states()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                out[j] += pi[i] * p;
            }
        }
        out
    }

    /// `max_{i,j} |π_i P_ij − π_j P_ji|`.
    pub fn detailed_balance_error(&self, pi: &[f64]) -> f64 {
        let mut err: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                err = err.max((pi[i] * p - pi[j] * self.entry(j, i)).abs());
            }
        }
        err
    }
}

fn encode(colors: &[usize], q: usize) -> usize {
    colors.iter().rev().fold(0, |acc, &c| acc * q + c)
}

fn kernel_row(g: &RegularGraph, q: usize, b: f64, state: usize) -> Vec<(usize, f64)> {
    let n = g.n;
    let sigma = decode_state(state, q, n);
    let mono: Vec<(usize, usize)> = g.edges.iter().copied().filter(|&(u, v)| u != v && sigma[u] == sigma[v]).collect();
    let keep = 1.0 - 1.0 / b;
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    let mut uf = UnionFind::new(n);
    let mut comp_of = vec![0usize; n];
    for mask in 0u64..(1u64 << mono.len()) {
        let kept = mask.count_ones() as i32;
        let pw = keep.powi(kept) * (1.0 - keep).powi(mono.len() as i32 - kept);
        if pw == 0.0 {
            continue;
        }
        uf.reset();
        for (k, &(u, v)) in mono.iter().enumerate() {
            if mask >> k & 1 == 1 {
                uf.union(u, v);
            }
        }
        let mut label: BTreeMap<usize, usize> = BTreeMap::new();
        for (v, slot) in comp_of.iter_mut().enumerate() {
            let r = uf.find(v);
            let next = label.len();
            *slot = *label.entry(r).or_insert(next);
        }
        let c = label.len();
        let share = pw / (q as f64).powi(c as i32);
        let mut comp_colors = vec![0usize; c];
        let mut colors = vec![0usize; n];
        loop {
            for v in 0..n {
                colors[v] = comp_colors[comp_of[v]];
            }
            *acc.entry(encode(&colors, q)).or_insert(0.0) += share;
            let mut k = 0;
            while k < c {
                comp_colors[k] += 1;
                if comp_colors[k] < q {
                    break;
                }
                comp_colors[k] = 0;
                k += 1;
            }
            if k == c {
                break;
            }
        }
    }
    acc.into_iter().collect()
}

pub fn exact_sw_kernel(g: &RegularGraph, q: usize, b: f64, exec: Exec) -> Result<SwKernel> {
    if q == 0 || !(b >= 1.0 && b.is_finite()) {
        return invalid("need q ≥ 1 and B ≥ 1");
    }
    let states = crate::graphs::gibbs_state_count(q, g.n, KERNEL_STATE_LIMIT)?;
    let non_loop = g.edges.iter().filter(|(u, v)| u != v).count();
    if non_loop >= 63 {
        return Err(Error::Guard(format!("{non_loop} edges is too many for subset enumeration")));
    }
    let work: f64 = (0..states)
        .map(|s| {
            let sigma = decode_state(s, q, g.n);
            let m = g.edges.iter().filter(|&&(u, v)| u != v && sigma[u] == sigma[v]).count();
            2f64.powi(m as i32)
        })
        .sum::<f64>()
        * states as f64;
    if work > KERNEL_WORK_LIMIT {
        return Err(Error::Guard(format!("exact kernel work {work:.3e} exceeds {KERNEL_WORK_LIMIT:.1e}")));
    }
    let rows = exec.map(states, |s| kernel_row(g, q, b, s));
    Ok(SwKernel { q, n: g.n, b, rows })
}

/// Stationary vector by power iteration from the uniform distribution.
pub fn stationary(kernel: &SwKernel) -> Vec<f64> {
    let s = kernel.states();
    let mut pi = vec![1.0 / s as f64; s];
    for _ in 0..1_000_000 {
        let next = kernel.left_apply(&pi);
        let total: f64 = next.iter().sum();
        let next: Vec<f64> = next.iter().map(|v| v / total).collect();
        let moved = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if moved < 1e-15 {
            break;
        }
    }
    pi
}

/// `Φ(S) = Σ_{σ∈S} π(σ) P(σ, S̄) / (π(S) π(S̄))`.
pub fn conductance(kernel: &SwKernel, pi: &[f64], in_set: &[bool]) -> Result<f64> {
    if in_set.len() != kernel.states() {
        return invalid("set indicator must cover every state");
    }
    let mass: f64 = (0..pi.len()).filter(|&i| in_set[i]).map(|i| pi[i]).sum();
    let inside = in_set.iter().filter(|&&b| b).count();
    if inside == 0 || inside == in_set.len() {
        return invalid("state set must be a proper nonempty subset");
    }
    let mut flow = 0.0;
    for (i, row) in kernel.rows.iter().enumerate() {
        if in_set[i] {
            flow += row.iter().filter(|(j, _)| !in_set[*j]).map(|(_, p)| pi[i] * p).sum::<f64>();
        }
    }
    Ok(flow / (mass * (1.0 - mass)))
}

/// States whose majority color over all vertices is `color` (lowest index on ties).
pub fn phase_cut(q: usize, n: usize, color: usize) -> Vec<bool> {
    let all: Vec<usize> = (0..n).collect();
    (0..q.pow(n as u32))
        .map(|s| phase_of(&decode_state(s, q, n), &all, q).map(|c| c == color).unwrap_or(false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_hand_values() {
        let k = exact_sw_kernel(&RegularGraph::complete(2), 2, 2.0, Exec::Sequential).unwrap();
        assert!((k.entry(0, 0) - 3.0 / 8.0).abs() < 1e-15);
        let pi = stationary(&k);
        let want = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0];
        for (a, b) in pi.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_temperature_rows_are_uniform() {
        let k = exact_sw_kernel(&RegularGraph::path(3), 3, 1.0, Exec::Sequential).unwrap();
        for row in &k.rows {
            assert_eq!(row.len(), 27);
            assert!(row.iter().all(|(_, p)| (p - 1.0 / 27.0).abs() < 1e-15));
        }
        let cut = vec![true, false, false, false];
        let k2 = exact_sw_kernel(&RegularGraph::complete(2), 2, 1.0, Exec::Sequential).unwrap();
        let phi = conductance(&k2, &stationary(&k2), &cut).unwrap();
        assert!((phi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_cut_rejected() {
        let k = exact_sw_kernel(&RegularGraph::complete(2), 2, 2.0, Exec::Sequential).unwrap();
        let pi = stationary(&k);
        assert!(conductance(&k, &pi, &[true; 4]).is_err());
        assert!(conductance(&k, &pi, &[false; 4]).is_err());
    }

    #[test]
    fn state_guard() {
        let g = RegularGraph::cycle(10);
        assert!(matches!(exact_sw_kernel(&g, 3, 2.0, Exec::Sequential), Err(Error::Guard(_))));
    }
}
