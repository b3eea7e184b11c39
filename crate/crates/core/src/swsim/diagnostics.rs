//! Expected monochromatic-edge densities of the disordered and ordered phases.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::treefix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonoExpectation {
    /// Monochromatic edges per vertex in the disordered phase.
    pub e_u: f64,
    /// Same for the ordered phase; absent below the uniqueness threshold.
    pub e_m: Option<f64>,
    /// Majority ratio `x` used for `e_m`.
    pub x: Option<f64>,
}

pub fn e_uniform(q: usize, delta: usize, b: f64) -> f64 {
    0.5 * delta as f64 * b / (q as f64 + b - 1.0)
}

/// `E_m` for a given majority ratio `x`.
pub fn e_ordered(q: usize, delta: usize, b: f64, x: f64) -> f64 {
    let qm = q as f64 - 1.0;
    let s = x * x + qm;
    0.5 * delta as f64 * b * s / ((x + qm).powi(2) + (b - 1.0) * s)
}

pub fn expected_mono(q: usize, delta: usize, b: f64) -> Result<MonoExpectation> {
    if q < 2 || delta < 3 || !(b >= 1.0) {
        return invalid("need q ≥ 2, Δ ≥ 3 and B ≥ 1");
    }
    let x = treefix::attractive_majority_ratio(q, delta, b)?;
    Ok(MonoExpectation { e_u: e_uniform(q, delta, b), e_m: x.map(|x| e_ordered(q, delta, b, x)), x })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub q: usize,
    pub delta: usize,
    /// The activity used, the coexistence point.
    pub b: f64,
    pub e_u: f64,
    pub e_m: f64,
    /// `E_m / E_u`.
    pub ratio: f64,
    /// `1 / (1 − 1/B)`.
    pub threshold: f64,
    pub holds: bool,
}

/// Compares `E_m/E_u` with `1/(1−1/B)` at `B = Bo`.
pub fn sw_gap_check(q: usize, delta: usize) -> Result<GapCheck> {
    let th = treefix::potts_thresholds(q, delta)?;
    let b = th.bo;
    let mono = expected_mono(q, delta, b)?;
    let Some(e_m) = mono.e_m else {
        return invalid("no majority fixpoint at the coexistence activity");
    };
    let ratio = e_m / mono.e_u;
    let threshold = 1.0 / (1.0 - 1.0 / b);
    Ok(GapCheck { q, delta, b, e_u: mono.e_u, e_m, ratio, threshold, holds: ratio > threshold })
}

/// Smallest `q` covered by the sufficient condition `q ≥ 2Δ / ln Δ`.
pub fn gap_q_min(delta: usize) -> usize {
    (2.0 * delta as f64 / (delta as f64).ln()).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_u_example() {
        assert_eq!(e_uniform(3, 3, 2.0), 0.75);
    }

    #[test]
    fn values_at_coexistence() {
        let bo = treefix::potts_thresholds(3, 3).unwrap().bo;
        let m = expected_mono(3, 3, bo).unwrap();
        assert!((m.x.unwrap() - 2f64.powf(4.0 / 3.0)).abs() < 1e-9);
        assert!((m.e_m.unwrap() - 1.0901).abs() < 1e-4);
        assert!((m.e_u - 0.98695).abs() < 1e-5);
        let bo6 = treefix::potts_thresholds(6, 3).unwrap().bo;
        assert!((bo6 - 4.0 / (5f64.powf(1.0 / 3.0) - 1.0)).abs() < 1e-12);
        let m6 = expected_mono(6, 3, bo6).unwrap();
        assert!((m6.e_m.unwrap() - 1.2099).abs() < 1e-4);
        assert!((m6.e_u - 0.79471).abs() < 1e-5);
    }

    #[test]
    fn gap_examples() {
        let g6 = sw_gap_check(6, 3).unwrap();
        assert!(g6.holds);
        assert!((g6.ratio - 1.5225).abs() < 1e-3 && (g6.threshold - 1.2158).abs() < 1e-3);
        let g3 = sw_gap_check(3, 3).unwrap();
        assert!(!g3.holds);
        assert!((g3.ratio - 1.105).abs() < 1e-3 && (g3.threshold - 1.3512).abs() < 1e-3);
    }
}
