//! Entropy-maximizing symmetric edge distributions by iterative proportional fitting.
//!
//! For weights `B` and marginals `α` the maximizer of
//! `g₁(x) = ½Σ x_ij ln B_ij − ½Σ x_ij ln x_ij` over symmetric nonnegative `x` with row
//! sums `α` has the form `x_ij = B_ij λ_i λ_j`. The scaling vector `λ` is found by
//! geometric-mean fixed-point updates followed by a Newton polish in `ln λ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const IPF_MAX_ITER: usize = 50_000;
const IPF_SWITCH_TOL: f64 = 1e-9;
const NEWTON_MAX_DIM: usize = 128;
const TARGET_RESIDUAL: f64 = 1e-14;

/// A symmetric distribution of edge endpoints over color pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDistribution {
    pub q: usize,
    /// `q×q`, row-major; sums to one.
    pub x: Vec<f64>,
    pub marginals: Vec<f64>,
}

impl EdgeDistribution {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.q + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.q).map(|i| self.x[i * self.q..(i + 1) * self.q].iter().sum()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerMax {
    pub edges: EdgeDistribution,
    pub g1: f64,
    /// `ln λ_i`; `-inf` for colors with zero marginal.
    pub log_scaling: Vec<f64>,
    /// `max_i |Σ_j x_ij − α_i|`.
    pub residual: f64,
}

pub(crate) fn check_alpha(alpha: &[f64], q: usize) -> Result<Vec<f64>> {
    if alpha.len() != q {
        return invalid(format!("alpha must have length {q}, got {}", alpha.len()));
    }
    if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return invalid("alpha entries must be finite and nonnegative");
    }
    let s: f64 = alpha.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return invalid(format!("alpha must sum to 1, got {s}"));
    }
    Ok(alpha.iter().map(|a| a / s).collect())
}

/// `g₁` of an explicit distribution, with `0 ln 0 = 0` and `0 ln 0-weight = 0`.
pub fn g1_value(q: usize, weights: &[f64], x: &[f64]) -> f64 {
    let mut g = 0.0;
    for k in 0..q * q {
        if x[k] > 0.0 {
            g += 0.5 * x[k] * (weights[k].ln() - x[k].ln());
        }
    }
    g
}

/// Whether a symmetric nonnegative matrix supported on `weights > 0` with row sums
/// `alpha` exists: a transportation problem solved as a max-flow.
pub(crate) fn support_feasible(q: usize, weights: &[f64], alpha: &[f64]) -> bool {
    let live: Vec<usize> = (0..q).filter(|&i| alpha[i] > 0.0).collect();
    if live.iter().all(|&i| live.iter().all(|&j| weights[i * q + j] > 0.0)) {
        return true;
    }
    // nodes: 0 source, 1..=k rows, k+1..=2k columns, 2k+1 sink
    let k = live.len();
    let nodes = 2 * k + 2;
    let sink = nodes - 1;
    let mut cap = vec![0.0f64; nodes * nodes];
    for (a, &i) in live.iter().enumerate() {
        cap[1 + a] = alpha[i];
        cap[(1 + k + a) * nodes + sink] = alpha[i];
        for (b, &j) in live.iter().enumerate() {
            if weights[i * q + j] > 0.0 {
                cap[(1 + a) * nodes + 1 + k + b] = f64::INFINITY;
            }
        }
    }
    let mut flow = 0.0;
    loop {
        let mut prev = vec![usize::MAX; nodes];
        prev[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if prev[v] == usize::MAX && cap[u * nodes + v] > 1e-15 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while v != 0 {
            let u = prev[v];
            push = push.min(cap[u * nodes + v]);
            v = u;
        }
        let mut v = sink;
        while v != 0 {
            let u = prev[v];
            cap[u * nodes + v] -= push;
            cap[v * nodes + u] += push;
            v = u;
        }
        flow += push;
    }
    flow >= 1.0 - 1e-10
}

/// Maximize `g₁` for an explicit nonnegative symmetric weight table.
pub fn inner_edge_max_weights(q: usize, weights: &[f64], alpha: &[f64]) -> Result<InnerMax> {
    let alpha = check_alpha(alpha, q)?;
    if weights.len() != q * q || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return invalid("weights must be a nonnegative q×q table");
    }
    if !support_feasible(q, weights, &alpha) {
        return Err(Error::Infeasible(format!("no edge distribution with marginals {alpha:?}")));
    }
    let live: Vec<usize> = (0..q).filter(|&i| alpha[i] > 0.0).collect();
    let k = live.len();
    let w = |a: usize, b: usize| weights[live[a] * q + live[b]];
    let target: Vec<f64> = live.iter().map(|&i| alpha[i]).collect();

    let field =
        |lam: &[f64]| -> Vec<f64> { (0..k).map(|a| lam[a] * (0..k).map(|b| w(a, b) * lam[b]).sum::<f64>()).collect() };
    let resid = |lam: &[f64]| -> f64 { field(lam).iter().zip(&target).map(|(r, t)| (r - t).abs()).fold(0.0, f64::max) };

    let mut lam: Vec<f64> = target.iter().map(|t| t.sqrt()).collect();
    for _ in 0..IPF_MAX_ITER {
        let r = field(&lam);
        let err = r.iter().zip(&target).map(|(r, t)| (r - t).abs()).fold(0.0, f64::max);
        if err < IPF_SWITCH_TOL {
            break;
        }
        for a in 0..k {
            lam[a] *= (target[a] / r[a]).sqrt();
        }
    }

    if k <= NEWTON_MAX_DIM {
        let mut u: Vec<f64> = lam.iter().map(|l| l.ln()).collect();
        let mut err = resid(&lam);
        for _ in 0..60 {
            if err < TARGET_RESIDUAL {
                break;
            }
            let l: Vec<f64> = u.iter().map(|v| v.exp()).collect();
            let r = field(&l);
            let f = DVector::from_fn(k, |a, _| r[a].ln() - target[a].ln());
            let jac = DMatrix::from_fn(k, k, |a, b| {
                let delta = if a == b { 1.0 } else { 0.0 };
                delta + w(a, b) * l[a] * l[b] / r[a]
            });
            let Some(step) = jac.lu().solve(&f) else { break };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(v, s)| v - t * s).collect();
                let tl: Vec<f64> = trial.iter().map(|v| v.exp()).collect();
                let te = resid(&tl);
                if te < err {
                    u = trial;
                    err = te;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        lam = u.iter().map(|v| v.exp()).collect();
    }

    let mut x = vec![0.0; q * q];
    let mut log_scaling = vec![f64::NEG_INFINITY; q];
    for a in 0..k {
        log_scaling[live[a]] = lam[a].ln();
        for b in 0..k {
            x[live[a] * q + live[b]] = w(a, b) * lam[a] * lam[b];
        }
    }
    let g1 = g1_value(q, weights, &x);
    let residual = resid(&lam);
    Ok(InnerMax { edges: EdgeDistribution { q, x, marginals: alpha }, g1, log_scaling, residual })
}
