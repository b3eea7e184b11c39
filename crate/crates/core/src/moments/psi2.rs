//! Second-moment exponent: the paired-spin first-moment exponent maximized over
//! overlap matrices with both marginals fixed.

use serde::{Deserialize, Serialize};

use super::ipf::check_alpha;
use super::psi1_with_gradient;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rng;
use crate::spinsys::InteractionMatrix;

#[derive(Clone, Copy, Debug)]
pub struct Psi2Options {
    pub random_starts: usize,
    pub max_iter: usize,
    pub seed: u64,
    /// Also start from the diagonal coupling `γ = diag(α)`.
    pub diagonal_start: bool,
}

impl Default for Psi2Options {
    fn default() -> Self {
        Self { random_starts: 50, max_iter: 400, seed: 0x7073_6932, diagonal_start: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Psi2Result {
    pub value: f64,
    /// Best overlap matrix, `q×q` row-major.
    pub gamma: Vec<f64>,
    /// Value reached from each start: product coupling first, then the diagonal
    /// coupling (if enabled), then the random starts.
    pub start_values: Vec<f64>,
}

/// `B ⊗ B` as a `q²×q²` table; pair `(i, k)` has index `i q + k`.
pub fn tensor_weights(m: &InteractionMatrix) -> Vec<f64> {
    super::kron_square(m.q(), m.entries())
}

/// Scale a nonnegative `q×q` matrix to row and column sums `alpha`.
pub fn sinkhorn(q: usize, gamma: &mut [f64], alpha: &[f64]) -> f64 {
    let mut err = f64::INFINITY;
    for _ in 0..20_000 {
        for i in 0..q {
            let s: f64 = gamma[i * q..(i + 1) * q].iter().sum();
            if s > 0.0 {
                gamma[i * q..(i + 1) * q].iter_mut().for_each(|v| *v *= alpha[i] / s);
            }
        }
        err = 0.0;
        for k in 0..q {
            let s: f64 = (0..q).map(|i| gamma[i * q + k]).sum();
            if s > 0.0 {
                for i in 0..q {
                    gamma[i * q + k] *= alpha[k] / s;
                }
            }
            err = f64::max(err, (s - alpha[k]).abs());
        }
        if err < 1e-15 {
            break;
        }
    }
    err
}

fn value_and_grad(q: usize, weights: &[f64], delta: usize, gamma: &[f64]) -> Option<(f64, Vec<f64>)> {
    let s: f64 = gamma.iter().sum();
    let g: Vec<f64> = gamma.iter().map(|v| v / s).collect();
    psi1_with_gradient(q * q, weights, delta, &g).ok()
}

fn ascend(q: usize, weights: &[f64], delta: usize, alpha: &[f64], start: Vec<f64>, max_iter: usize) -> (f64, Vec<f64>) {
    let mut gamma = start;
    let Some((mut val, mut grad)) = value_and_grad(q, weights, delta, &gamma) else {
        return (f64::NEG_INFINITY, gamma);
    };
    let mut eta = 0.05;
    for _ in 0..max_iter {
        let gmax = grad.iter().copied().filter(|g| g.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let mut trial: Vec<f64> =
            gamma.iter().zip(&grad).map(|(v, g)| if *v > 0.0 { v * (eta * (g - gmax)).exp() } else { 0.0 }).collect();
        sinkhorn(q, &mut trial, alpha);
        match value_and_grad(q, weights, delta, &trial) {
            Some((tv, tg)) if tv > val => {
                let gain = tv - val;
                gamma = trial;
                val = tv;
                grad = tg;
                eta *= 1.5;
                if gain < 1e-15 {
                    break;
                }
            }
            _ => {
                eta *= 0.5;
                if eta < 1e-12 {
                    break;
                }
            }
        }
    }
    (val, gamma)
}

/// `Ψ₂(α)`: the maximum over overlaps `γ` (row and column sums `α`) of the `B ⊗ B`
/// first-moment exponent at `γ`, by entropic mirror ascent from the product coupling
/// `ααᵀ` and random feasible couplings.
pub fn psi2(m: &InteractionMatrix, delta: usize, alpha: &[f64], opts: &Psi2Options, exec: Exec) -> Result<Psi2Result> {
    let q = m.q();
    let alpha = check_alpha(alpha, q)?;
    let weights = tensor_weights(m);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push((0..q * q).map(|ik| alpha[ik / q] * alpha[ik % q]).collect());
    if opts.diagonal_start {
        starts.push((0..q * q).map(|ik| if ik / q == ik % q { alpha[ik / q] } else { 0.0 }).collect());
    }
    for s in 0..opts.random_starts {
        let mut g = rng::for_task(opts.seed, s);
        let mut gamma: Vec<f64> = rng::dirichlet_ones(&mut g, q * q)
            .into_iter()
            .enumerate()
            .map(|(ik, v)| if alpha[ik / q] > 0.0 && alpha[ik % q] > 0.0 { v + 1e-12 } else { 0.0 })
            .collect();
        sinkhorn(q, &mut gamma, &alpha);
        starts.push(gamma);
    }

    let runs = exec.map(starts.len(), |k| ascend(q, &weights, delta, &alpha, starts[k].clone(), opts.max_iter));
    let start_values: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (value, gamma) = runs
        .into_iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r)
        .expect("at least the product start");
    if value == f64::NEG_INFINITY {
        return Err(Error::Infeasible("no feasible overlap matrix".into()));
    }
    Ok(Psi2Result { value, gamma, start_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::psi1;
    use crate::spinsys::build_potts_matrix;

    #[test]
    fn sinkhorn_marginals() {
        let mut g = vec![1.0, 2.0, 3.0, 4.0];
        let err = sinkhorn(2, &mut g, &[0.3, 0.7]);
        assert!(err < 1e-14);
        assert!((g[0] + g[1] - 0.3).abs() < 1e-14);
        assert!((g[0] + g[2] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn product_start_gives_twice_psi1() {
        let m = build_potts_matrix(2, 2.0).unwrap();
        let opts = Psi2Options { random_starts: 4, ..Default::default() };
        let res = psi2(&m, 3, &[0.5, 0.5], &opts, Exec::Sequential).unwrap();
        let p1 = psi1(&m, 3, &[0.5, 0.5]).unwrap();
        assert!((res.start_values[0] - 2.0 * p1).abs() < 1e-12);
        assert!((res.value - 2.0 * p1).abs() < 1e-7);
    }
}
