//! First- and second-moment exponents, induced norms, exact finite-n moments, the Potts
//! phase diagram and small-subgraph-conditioning constants.
//!
//! All exponents are in nats per vertex.

mod diagram;
mod exact;
mod ipf;
mod norm;
mod psi2;
mod smallgraph;

pub use diagram::{dif, potts_phase_diagram, PhaseDiagram, Regime, COEXISTENCE_TOL};
pub use exact::{
    counts_from_alpha, first_moment_exact, ln_first_moment_counts, ln_first_moment_exact, ln_second_moment_exact,
    second_moment_exact, DEFAULT_TERM_LIMIT,
};
pub use ipf::{g1_value, inner_edge_max_weights, EdgeDistribution, InnerMax};
pub use norm::{gram, kron_square, matrix_norm_p2, matrix_norm_p2_seeded, norm_ratio, NormOptions, NormResult};
pub use psi2::{psi2, sinkhorn, tensor_weights, Psi2Options, Psi2Result};
pub use smallgraph::{cycle_rate, small_graph_constants, SmallGraphConstants};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::spinsys::{cholesky_factor, InteractionMatrix, Phase, Signature};
use crate::treefix::{self, Fixpoint, HessianClass, SearchOptions};

pub fn inner_edge_max(m: &InteractionMatrix, alpha: &[f64]) -> Result<InnerMax> {
    inner_edge_max_weights(m.q(), m.entries(), alpha)
}

/// `Σ α_i ln α_i` with `0 ln 0 = 0`.
pub fn neg_entropy(alpha: &[f64]) -> f64 {
    alpha.iter().filter(|a| **a > 0.0).map(|a| a * a.ln()).sum()
}

/// `Ψ₁(α) = (Δ−1) Σ α_i ln α_i + Δ g₁(x*)` for an explicit weight table; `-inf` when no
/// edge distribution has marginals `α`.
pub fn psi1_weights(q: usize, weights: &[f64], delta: usize, alpha: &[f64]) -> Result<f64> {
    match inner_edge_max_weights(q, weights, alpha) {
        Ok(inner) => Ok((delta as f64 - 1.0) * neg_entropy(&inner.edges.marginals) + delta as f64 * inner.g1),
        Err(Error::Infeasible(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

pub fn psi1(m: &InteractionMatrix, delta: usize, alpha: &[f64]) -> Result<f64> {
    psi1_weights(m.q(), m.entries(), delta, alpha)
}

/// `Ψ₁` and its gradient `(Δ−1)(ln α_a + 1) − Δ(ln λ_a + ½)` on the support of `α`;
/// coordinates outside the support get `-inf`.
pub fn psi1_with_gradient(q: usize, weights: &[f64], delta: usize, alpha: &[f64]) -> Result<(f64, Vec<f64>)> {
    let inner = inner_edge_max_weights(q, weights, alpha)?;
    let d = delta as f64;
    let value = (d - 1.0) * neg_entropy(&inner.edges.marginals) + d * inner.g1;
    let grad = (0..q)
        .map(|a| {
            let al = inner.edges.marginals[a];
            if al > 0.0 {
                (d - 1.0) * (al.ln() + 1.0) - d * (inner.log_scaling[a] + 0.5)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    Ok((value, grad))
}

/// Entropic mirror ascent of `Ψ₁` over the simplex (support of the start is preserved).
pub fn refine_on_simplex(
    q: usize,
    weights: &[f64],
    delta: usize,
    start: &[f64],
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut alpha = start.to_vec();
    let (mut val, mut grad) = psi1_with_gradient(q, weights, delta, &alpha)?;
    let mut eta = 0.1;
    for _ in 0..max_iter {
        let gmax = grad.iter().copied().filter(|g| g.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let mut trial: Vec<f64> =
            alpha.iter().zip(&grad).map(|(a, g)| if *a > 0.0 { a * (eta * (g - gmax)).exp() } else { 0.0 }).collect();
        let s: f64 = trial.iter().sum();
        trial.iter_mut().for_each(|v| *v /= s);
        match psi1_with_gradient(q, weights, delta, &trial) {
            Ok((tv, tg)) if tv > val => {
                let gain = tv - val;
                alpha = trial;
                val = tv;
                grad = tg;
                eta *= 1.5;
                if gain < 1e-15 {
                    break;
                }
            }
            _ => {
                eta *= 0.5;
                if eta < 1e-14 {
                    break;
                }
            }
        }
    }
    Ok((val, alpha))
}

/// Every point of the simplex grid with spacing `1/steps`.
pub fn simplex_grid(q: usize, steps: usize) -> Vec<Vec<f64>> {
    fn rec(q: usize, left: usize, steps: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == q - 1 {
            cur.push(left);
            out.push(cur.iter().map(|c| *c as f64 / steps as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(q, left - c, steps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, steps, steps, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub phases: Vec<Phase>,
    pub psi1_max: f64,
    pub psi2_max: f64,
    /// `‖B̂‖_{p→2}` with `p = Δ/(Δ−1)`; only for ferromagnetic models.
    pub norm_value: Option<f64>,
    /// Indices into `phases`.
    pub dominant_set: Vec<usize>,
    pub small_graph: Option<SmallGraphConstants>,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    /// Simplex grid spacing of the safety-net scan; `None` disables it.
    pub grid_step: Option<f64>,
    pub grid_max_q: usize,
    pub search: SearchOptions,
    pub psi2: Psi2Options,
    pub norm: NormOptions,
    pub kmax: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            grid_step: Some(0.02),
            grid_max_q: 4,
            search: SearchOptions::default(),
            psi2: Psi2Options::default(),
            norm: NormOptions::default(),
            kmax: 60,
        }
    }
}

/// Candidate fixpoints for the phase enumeration: closed forms for Potts models,
/// damped multi-start iteration otherwise.
pub fn candidate_fixpoints(
    m: &InteractionMatrix,
    delta: usize,
    opts: &SearchOptions,
    exec: Exec,
) -> Result<Vec<Fixpoint>> {
    match m.potts_activity() {
        Some(b) if b > 1.0 => treefix::potts_fixpoints(m.q(), delta, b),
        _ => treefix::search_fixpoints(m, delta, opts, exec),
    }
}

/// Phases, exponents and norms of a model at degree Δ.
pub fn moment_report(m: &InteractionMatrix, delta: usize, opts: &ReportOptions, exec: Exec) -> Result<MomentReport> {
    let q = m.q();
    let fixpoints = candidate_fixpoints(m, delta, &opts.search, exec)?;
    let mut phases: Vec<Phase> = Vec::new();
    let mut owners: Vec<Option<usize>> = Vec::new();
    for (k, fp) in fixpoints.iter().enumerate() {
        let value = psi1(m, delta, &fp.alpha)?;
        let mut ph = Phase::new(fp.alpha.clone(), value, fp.hessian_eigen.clone());
        ph.local_max = fp.stability == treefix::Stability::Attractive;
        ph.hessian_local_max = fp.hessian == HessianClass::NegativeDefinite;
        phases.push(ph);
        owners.push(Some(k));
    }

    if let Some(step) = opts.grid_step {
        if q <= opts.grid_max_q {
            let steps = (1.0 / step).round() as usize;
            let grid = simplex_grid(q, steps);
            let values = exec.map_slice(&grid, |a| psi1(m, delta, a).unwrap_or(f64::NEG_INFINITY));
            let best = values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i);
            if let Some(i) = best {
                let (val, alpha) = refine_on_simplex(q, m.entries(), delta, &grid[i], 2000)?;
                let known = phases.iter().map(|p| p.psi1).fold(f64::NEG_INFINITY, f64::max);
                if val > known + 1e-9 {
                    let mut ph = Phase::new(alpha, val, Vec::new());
                    ph.local_max = true;
                    phases.push(ph);
                    owners.push(None);
                }
            }
        }
    }
    if phases.is_empty() {
        return Err(Error::Infeasible("no candidate phase found".into()));
    }

    let psi1_max = phases.iter().map(|p| p.psi1).fold(f64::NEG_INFINITY, f64::max);
    let dominant_set: Vec<usize> = (0..phases.len()).filter(|&i| phases[i].psi1 >= psi1_max - 1e-9).collect();
    for &i in &dominant_set {
        phases[i].mark_dominant();
    }

    let norm_value = if m.signature() == Signature::Ferromagnetic {
        let bhat = cholesky_factor(m)?;
        let seeds: Vec<Vec<f64>> = fixpoints.iter().map(|f| f.r.clone()).collect();
        let p = delta as f64 / (delta as f64 - 1.0);
        Some(matrix_norm_p2_seeded(q, &bhat, p, &seeds, &opts.norm, exec)?.value)
    } else {
        None
    };

    let mut psi2_max = f64::NEG_INFINITY;
    for &i in &dominant_set {
        psi2_max = psi2_max.max(psi2(m, delta, &phases[i].alpha, &opts.psi2, exec)?.value);
    }

    let small_graph = dominant_set
        .iter()
        .filter(|&&i| phases[i].hessian_dominant)
        .find_map(|&i| owners[i])
        .and_then(|k| small_graph_constants(m, delta, &fixpoints[k].r, opts.kmax).ok());

    Ok(MomentReport { phases, psi1_max, psi2_max, norm_value, dominant_set, small_graph })
}
