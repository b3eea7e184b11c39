//! Constants of small-subgraph conditioning for the pairing model.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spinsys::InteractionMatrix;
use crate::treefix::{self, HessianClass};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallGraphConstants {
    /// Non-unit eigenvalues of the fixpoint linearisation.
    pub mu: Vec<f64>,
    /// `λ_i`, the expected number of `i`-cycles, for `i = 1..=kmax`.
    pub lambda: Vec<f64>,
    /// `δ_i = Σ_j μ_j^i`, for `i = 1..=kmax`.
    pub delta: Vec<f64>,
    /// `Π_{j,k} (1 − (Δ−1) μ_j μ_k)^{−1/2}`.
    pub ratio_limit: f64,
    /// `exp(Σ_{i ≤ kmax} λ_i δ_i²)`.
    pub series_value: f64,
}

/// Expected number of cycles of length `i` in the Δ-regular pairing model.
pub fn cycle_rate(delta: usize, i: usize) -> f64 {
    (delta as f64 - 1.0).powi(i as i32) / (2.0 * i as f64)
}

pub fn small_graph_constants(
    m: &InteractionMatrix,
    delta: usize,
    r: &[f64],
    kmax: usize,
) -> Result<SmallGraphConstants> {
    let report = treefix::classify_stability(m, delta, r)?;
    if report.hessian != HessianClass::NegativeDefinite {
        return invalid("small-graph constants need a Hessian-dominant fixpoint");
    }
    let mu = treefix::jacobian_matrix(m, delta, r)?.restricted;
    let d1 = delta as f64 - 1.0;
    if mu.iter().any(|v| d1 * v.abs() >= 1.0) {
        return invalid("eigenvalues must satisfy (Δ−1)|μ| < 1");
    }
    let lambda: Vec<f64> = (1..=kmax).map(|i| cycle_rate(delta, i)).collect();
    let deltas: Vec<f64> = (1..=kmax).map(|i| mu.iter().map(|v| v.powi(i as i32)).sum()).collect();
    let mut ln_ratio = 0.0;
    for a in &mu {
        for b in &mu {
            ln_ratio -= 0.5 * (1.0 - d1 * a * b).ln();
        }
    }
    let series: f64 = lambda.iter().zip(&deltas).map(|(l, d)| l * d * d).sum();
    Ok(SmallGraphConstants { mu, lambda, delta: deltas, ratio_limit: ln_ratio.exp(), series_value: series.exp() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinsys::build_potts_matrix;

    #[test]
    fn ising_uniform() {
        let m = build_potts_matrix(2, 2.0).unwrap();
        let c = small_graph_constants(&m, 3, &[1.0, 1.0], 60).unwrap();
        assert!((c.mu[0] - 1.0 / 3.0).abs() < 1e-14);
        assert!((c.ratio_limit - 3.0 / 7f64.sqrt()).abs() < 1e-13);
        assert!((c.series_value - c.ratio_limit).abs() < 1e-10);
        assert_eq!(&c.lambda[..3], &[1.0, 1.0, 4.0 / 3.0]);
    }

    #[test]
    fn unstable_fixpoint_rejected() {
        let m = build_potts_matrix(3, 4.5).unwrap();
        assert!(small_graph_constants(&m, 3, &[1.0; 3], 10).is_err());
    }
}
