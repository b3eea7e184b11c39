//! Induced `p → 2` norms of nonnegative-Gram factors.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Maximizer, scaled to unit max-entry.
    pub argmax: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    pub random_starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { random_starts: 64, max_iter: 20_000, seed: 0x6e6f726d }
    }
}

/// `Bhatᵀ Bhat` for a row-major `q×q` factor.
pub fn gram(q: usize, bhat: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; q * q];
    for i in 0..q {
        for j in 0..q {
            g[i * q + j] = (0..q).map(|k| bhat[k * q + i] * bhat[k * q + j]).sum();
        }
    }
    g
}

/// `‖B̂R‖₂ / ‖R‖_p` computed through the Gram matrix.
pub fn norm_ratio(q: usize, gram: &[f64], p: f64, r: &[f64]) -> f64 {
    let quad: f64 = (0..q).map(|i| r[i] * (0..q).map(|j| gram[i * q + j] * r[j]).sum::<f64>()).sum();
    let pn: f64 = r.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p);
    quad.max(0.0).sqrt() / pn
}

fn ascend(q: usize, gram: &[f64], p: f64, start: &[f64], max_iter: usize) -> Option<(f64, Vec<f64>)> {
    let expo = 1.0 / (p - 1.0);
    let mut r = start.to_vec();
    let mut best = norm_ratio(q, gram, p, &r);
    if !best.is_finite() {
        return None;
    }
    for _ in 0..max_iter {
        let mut next: Vec<f64> =
            (0..q).map(|i| (0..q).map(|j| gram[i * q + j] * r[j]).sum::<f64>().max(0.0).powf(expo)).collect();
        let top = next.iter().copied().fold(0.0, f64::max);
        if !(top > 0.0) {
            return None;
        }
        next.iter_mut().for_each(|v| *v /= top);
        let val = norm_ratio(q, gram, p, &next);
        let moved = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r = next;
        best = best.max(val);
        if moved < 1e-15 {
            break;
        }
    }
    Some((norm_ratio(q, gram, p, &r).max(best), r))
}

/// `max_{R ≥ 0} ‖B̂R‖₂ / ‖R‖_p` for `p ∈ (1, 2]`, by the fixed-point ascent
/// `R ← (B̂ᵀB̂ R)^{1/(p-1)}` from the uniform vector, coordinate vectors, random
/// simplex points and any extra `seeds`.
pub fn matrix_norm_p2_seeded(
    q: usize,
    bhat: &[f64],
    p: f64,
    seeds: &[Vec<f64>],
    opts: &NormOptions,
    exec: Exec,
) -> Result<NormResult> {
    if bhat.len() != q * q || q == 0 {
        return invalid("factor must be q×q");
    }
    if !(p > 1.0 && p <= 2.0) {
        return invalid(format!("p must lie in (1, 2], got {p}"));
    }
    let g = gram(q, bhat);
    if g.iter().any(|v| *v < -1e-12) {
        return invalid("Gram matrix of the factor must be nonnegative");
    }
    let mut starts: Vec<Vec<f64>> = vec![vec![1.0; q]];
    for i in 0..q {
        let mut e = vec![0.0; q];
        e[i] = 1.0;
        starts.push(e);
    }
    for s in seeds {
        if s.len() == q && s.iter().all(|v| *v >= 0.0) && s.iter().any(|v| *v > 0.0) {
            starts.push(s.clone());
        }
    }
    for k in 0..opts.random_starts {
        starts.push(rng::dirichlet_ones(&mut rng::for_task(opts.seed, k), q));
    }
    let runs = exec.map_slice(&starts, |s| ascend(q, &g, p, s, opts.max_iter));
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (v, r) in runs.into_iter().flatten() {
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, r));
        }
    }
    let (value, argmax) = best.expect("uniform start always yields a finite value");
    Ok(NormResult { value, argmax })
}

pub fn matrix_norm_p2(q: usize, bhat: &[f64], p: f64) -> Result<NormResult> {
    matrix_norm_p2_seeded(q, bhat, p, &[], &NormOptions::default(), Exec::default())
}

/// Kronecker square of a row-major `q×q` matrix.
pub fn kron_square(q: usize, a: &[f64]) -> Vec<f64> {
    let qq = q * q;
    let mut out = vec![0.0; qq * qq];
    for i in 0..q {
        for k in 0..q {
            for j in 0..q {
                for l in 0..q {
                    out[(i * q + k) * qq + j * q + l] = a[i * q + j] * a[k * q + l];
                }
            }
        }
    }
    out
}
