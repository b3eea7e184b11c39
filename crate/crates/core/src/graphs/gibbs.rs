//! Exact partition functions of small graphs by enumerating all colorings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RegularGraph;
use crate::error::{Error, Result};
use crate::spinsys::InteractionMatrix;

/// Largest `q^n` accepted by [`brute_gibbs`].
pub const GIBBS_STATE_LIMIT: usize = 2_000_000;

/// Colors of state `index`, vertex `v` having digit `v` in base `q`.
pub fn decode_state(index: usize, q: usize, n: usize) -> Vec<usize> {
    let mut s = index;
    (0..n)
        .map(|_| {
            let c = s % q;
            s /= q;
            c
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsOracle {
    pub q: usize,
    pub n: usize,
    pub z: f64,
    /// Weight of every coloring, indexed as in [`decode_state`].
    pub weights: Vec<f64>,
    /// `Z^α` keyed by the color counts `n α`.
    pub phase_z: BTreeMap<Vec<usize>, f64>,
    /// Partition function restricted to colorings with the given edge counts,
    /// keyed by `(e_ij)_{i ≤ j}` in row-major order.
    pub edge_z: BTreeMap<Vec<usize>, f64>,
}

impl GibbsOracle {
    pub fn probability(&self, state: usize) -> f64 {
        self.weights[state] / self.z
    }

    pub fn gibbs(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w / self.z).collect()
    }

    pub fn z_alpha(&self, counts: &[usize]) -> f64 {
        self.phase_z.get(counts).copied().unwrap_or(0.0)
    }
}

pub(crate) fn state_count(q: usize, n: usize, limit: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(q)
            .filter(|t| *t <= limit)
            .ok_or_else(|| Error::Guard(format!("q^n = {q}^{n} exceeds the state limit {limit}")))?;
    }
    Ok(total)
}

/// Weight `Π_edges B_{σ(u)σ(v)}` of a coloring; a self-loop contributes once.
pub fn coloring_weight(g: &RegularGraph, m: &InteractionMatrix, sigma: &[usize]) -> f64 {
    g.edges.iter().map(|&(u, v)| m.get(sigma[u], sigma[v])).product()
}

pub fn brute_gibbs(g: &RegularGraph, m: &InteractionMatrix) -> Result<GibbsOracle> {
    let q = m.q();
    let total = state_count(q, g.n, GIBBS_STATE_LIMIT)?;
    let mut weights = Vec::with_capacity(total);
    let mut phase_z: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut edge_z: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let pair_index = |i: usize, j: usize| {
        let (a, b) = (i.min(j), i.max(j));
        a * q - a * (a + 1) / 2 + b
    };
    let mut sigma = vec![0usize; g.n];
    for idx in 0..total {
        if idx > 0 {
            for c in sigma.iter_mut() {
                *c += 1;
                if *c < q {
                    break;
                }
                *c = 0;
            }
        }
        let w = coloring_weight(g, m, &sigma);
        weights.push(w);
        let mut counts = vec![0usize; q];
        sigma.iter().for_each(|&c| counts[c] += 1);
        *phase_z.entry(counts).or_insert(0.0) += w;
        let mut e = vec![0usize; q * (q + 1) / 2];
        for &(u, v) in &g.edges {
            e[pair_index(sigma[u], sigma[v])] += 1;
        }
        *edge_z.entry(e).or_insert(0.0) += w;
    }
    let z = weights.iter().sum();
    Ok(GibbsOracle { q, n: g.n, z, weights, phase_z, edge_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinsys::build_potts_matrix;

    #[test]
    fn triangle_ising() {
        let o = brute_gibbs(&RegularGraph::complete(3), &build_potts_matrix(2, 2.0).unwrap()).unwrap();
        assert_eq!(o.z, 28.0);
        let total: f64 = o.phase_z.values().sum();
        assert_eq!(total, o.z);
        assert_eq!(o.edge_z.values().sum::<f64>(), o.z);
    }

    #[test]
    fn k2_ising() {
        let o = brute_gibbs(&RegularGraph::complete(2), &build_potts_matrix(2, 2.0).unwrap()).unwrap();
        assert_eq!(o.z, 6.0);
        assert!((o.probability(0) + o.probability(3) - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn infinite_temperature() {
        let g = RegularGraph::cycle(5);
        let o = brute_gibbs(&g, &build_potts_matrix(3, 1.0).unwrap()).unwrap();
        assert_eq!(o.z, 243.0);
    }

    #[test]
    fn decode_matches_enumeration_order() {
        assert_eq!(decode_state(5, 2, 3), vec![1, 0, 1]);
    }

    #[test]
    fn guard() {
        let g = RegularGraph::cycle(30);
        assert!(matches!(brute_gibbs(&g, &build_potts_matrix(2, 2.0).unwrap()), Err(Error::Guard(_))));
    }
}
