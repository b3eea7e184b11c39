//! Tree-recursion fixpoints and their stability.
//!
//! The depth-one recursion maps a positive ratio vector `R` to `R̂_i ∝ (Σ_j B_ij R_j)^{Δ-1}`.
//! Stored vectors use the canonical normalization `Σ_ij B_ij R_i R_j = 1`, under which
//! `α_i = R_i (BR)_i` sums to one and `(√α_i)` is an exact unit eigenvector of the
//! linearisation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::rng;
use crate::spinsys::{build_potts_matrix, InteractionMatrix, Signature};

/// Maximum `‖tree_step(R) − R‖_∞` accepted for a fixpoint.
pub const FIXPOINT_RESIDUAL_TOL: f64 = 1e-10;
/// Width of the band around spectral radius 1 classified as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

const ROOT_Y_MIN: f64 = 1.0 + 1e-6;
const ROOT_Y_MAX: f64 = 1_048_576.0; // 2^20
const ROOT_REL_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Attractive,
    Unstable,
    Marginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianClass {
    NegativeDefinite,
    /// Some eigenvalue lies within the marginal band of zero.
    Degenerate,
    NotNegative,
}

/// Two-value structure of a Potts fixpoint: `t` coordinates equal `x·R_q`, the rest `R_q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PottsStructure {
    pub t: usize,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixpoint {
    /// Canonically normalized ratio vector.
    pub r: Vec<f64>,
    /// Induced phase, `α_i ∝ R_i^{Δ/(Δ-1)}`.
    pub alpha: Vec<f64>,
    /// Spectrum of the linearisation `L` restricted to `Σ √α_i r_i = 0`, descending.
    pub restricted_spectrum: Vec<f64>,
    /// `(Δ-1)×` the restricted spectrum.
    pub jacobian_eigen: Vec<f64>,
    pub hessian_eigen: Vec<f64>,
    pub stability: Stability,
    pub hessian: HessianClass,
    pub potts: Option<PottsStructure>,
}

fn check_degree(delta: usize) -> Result<()> {
    if delta < 3 {
        return invalid(format!("degree must be at least 3, got {delta}"));
    }
    Ok(())
}

fn check_positive(m: &InteractionMatrix, r: &[f64]) -> Result<()> {
    if r.len() != m.q() {
        return invalid(format!("ratio vector must have length {}", m.q()));
    }
    if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid("ratio vector must be strictly positive");
    }
    Ok(())
}

/// Rescale to `Σ_ij B_ij R_i R_j = 1`.
pub fn canonical_normalize(m: &InteractionMatrix, r: &[f64]) -> Vec<f64> {
    let s = m.bilinear(r, r).sqrt();
    r.iter().map(|v| v / s).collect()
}

/// One application of the tree recursion, renormalized canonically.
pub fn tree_step(m: &InteractionMatrix, delta: usize, r: &[f64]) -> Result<Vec<f64>> {
    check_degree(delta)?;
    check_positive(m, r)?;
    let top = r.iter().copied().fold(0.0, f64::max);
    let scaled: Vec<f64> = r.iter().map(|v| v / top).collect();
    let field = m.apply(&scaled);
    let next: Vec<f64> = field.iter().map(|h| h.powi(delta as i32 - 1)).collect();
    if next.iter().any(|v| !(*v > 0.0)) {
        return invalid("tree recursion produced a zero component");
    }
    Ok(canonical_normalize(m, &next))
}

/// `‖tree_step(R) − R‖_∞` with both sides canonically normalized.
pub fn fixpoint_residual(m: &InteractionMatrix, delta: usize, r: &[f64]) -> Result<f64> {
    let next = tree_step(m, delta, r)?;
    let cur = canonical_normalize(m, r);
    Ok(next.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `α_i = R_i^{Δ/(Δ-1)} / Σ_j R_j^{Δ/(Δ-1)}`.
pub fn alpha_from_ratios(r: &[f64], delta: usize) -> Vec<f64> {
    let e = delta as f64 / (delta as f64 - 1.0);
    let top = r.iter().copied().fold(0.0, f64::max);
    let w: Vec<f64> = r.iter().map(|v| (v / top).powf(e)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// `Φ₁(R) = (Δ/2) ln(RᵀBR) − (Δ-1) ln Σ R_i^{Δ/(Δ-1)}`; scale invariant.
pub fn phi1(m: &InteractionMatrix, delta: usize, r: &[f64]) -> f64 {
    let d = delta as f64;
    let p = d / (d - 1.0);
    let top = r.iter().copied().fold(0.0, f64::max);
    let s: Vec<f64> = r.iter().map(|v| v / top).collect();
    let quad = m.bilinear(&s, &s);
    let pn: f64 = s.iter().map(|v| v.powf(p)).sum();
    0.5 * d * quad.ln() - (d - 1.0) * pn.ln()
}

/// The linearisation `M_ij = B_ij R_i R_j / √(α_i α_j)` at a fixpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianSpectrum {
    pub matrix: Vec<f64>,
    /// Full spectrum of `M`, descending.
    pub full: Vec<f64>,
    /// Spectrum on the complement of `(√α_i)`, descending.
    pub restricted: Vec<f64>,
    pub jacobian: Vec<f64>,
    /// `(√α_1, …, √α_q)`, the eigenvector of eigenvalue 1.
    pub unit_eigenvector: Vec<f64>,
}

pub fn jacobian_matrix(m: &InteractionMatrix, delta: usize, r: &[f64]) -> Result<JacobianSpectrum> {
    let res = fixpoint_residual(m, delta, r)?;
    if res >= FIXPOINT_RESIDUAL_TOL {
        return Err(Error::NotFixpoint(res));
    }
    let q = m.q();
    let r = canonical_normalize(m, r);
    let field = m.apply(&r);
    let alpha: Vec<f64> = r.iter().zip(&field).map(|(a, b)| a * b).collect();
    let e: Vec<f64> = alpha.iter().map(|a| a.sqrt()).collect();
    let mut mat = vec![0.0; q * q];
    for i in 0..q {
        for j in 0..q {
            mat[i * q + j] = m.get(i, j) * r[i] * r[j] / (e[i] * e[j]);
        }
    }
    let full = descending_eigenvalues(q, &mat);

    // Orthonormal basis of e^⊥ from the Householder reflector sending e to ±e₁.
    let sign = if e[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = e.clone();
    v[0] += sign;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let house = |i: usize, j: usize| -> f64 {
        let delta_ij = if i == j { 1.0 } else { 0.0 };
        delta_ij - 2.0 * v[i] * v[j] / vv
    };
    let basis = DMatrix::from_fn(q, q - 1, |i, k| house(i, k + 1));
    let mm = DMatrix::from_row_slice(q, q, &mat);
    let reduced = basis.transpose() * mm * &basis;
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let mut restricted: Vec<f64> = SymmetricEigen::new(reduced).eigenvalues.iter().copied().collect();
    restricted.sort_by(|a, b| b.total_cmp(a));
    let jacobian = restricted.iter().map(|x| (delta as f64 - 1.0) * x).collect();
    Ok(JacobianSpectrum { matrix: mat, full, restricted, jacobian, unit_eigenvector: e })
}

fn descending_eigenvalues(q: usize, mat: &[f64]) -> Vec<f64> {
    let mut ev: Vec<f64> =
        SymmetricEigen::new(DMatrix::from_row_slice(q, q, mat)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stability: Stability,
    pub spectral_radius: f64,
    pub hessian_eigen: Vec<f64>,
    pub hessian: HessianClass,
    /// Whether attractive ⟺ Hessian negative definite is guaranteed (ferromagnetic B).
    pub equivalence_guaranteed: bool,
}

/// Stability from a restricted spectrum `x`: Jacobian `(Δ-1)|x| < 1`, Hessian
/// `(1+x)((Δ-1)x − 1) < 0`.
pub fn stability_from_spectrum(delta: usize, restricted: &[f64]) -> (Stability, f64, Vec<f64>, HessianClass) {
    let d1 = delta as f64 - 1.0;
    let radius = restricted.iter().map(|x| d1 * x.abs()).fold(0.0, f64::max);
    let stability = if (radius - 1.0).abs() <= MARGINAL_BAND {
        Stability::Marginal
    } else if radius < 1.0 {
        Stability::Attractive
    } else {
        Stability::Unstable
    };
    let hessian_eigen: Vec<f64> = restricted.iter().map(|x| (1.0 + x) * (d1 * x - 1.0)).collect();
    let degenerate =
        restricted.iter().any(|x| (d1 * x - 1.0).abs() <= MARGINAL_BAND || (1.0 + x).abs() <= MARGINAL_BAND);
    let hessian = if degenerate {
        HessianClass::Degenerate
    } else if hessian_eigen.iter().all(|h| *h < 0.0) {
        HessianClass::NegativeDefinite
    } else {
        HessianClass::NotNegative
    };
    (stability, radius, hessian_eigen, hessian)
}

pub fn classify_stability(m: &InteractionMatrix, delta: usize, r: &[f64]) -> Result<StabilityReport> {
    let spec = jacobian_matrix(m, delta, r)?;
    let (stability, spectral_radius, hessian_eigen, hessian) = stability_from_spectrum(delta, &spec.restricted);
    Ok(StabilityReport {
        stability,
        spectral_radius,
        hessian_eigen,
        hessian,
        equivalence_guaranteed: m.signature() == Signature::Ferromagnetic,
    })
}

/// Full analysis of a fixpoint given its ratio vector.
pub fn analyze_fixpoint(
    m: &InteractionMatrix,
    delta: usize,
    r: &[f64],
    potts: Option<PottsStructure>,
) -> Result<Fixpoint> {
    let spec = jacobian_matrix(m, delta, r)?;
    let (stability, _, hessian_eigen, hessian) = stability_from_spectrum(delta, &spec.restricted);
    let r = canonical_normalize(m, r);
    Ok(Fixpoint {
        alpha: alpha_from_ratios(&r, delta),
        r,
        restricted_spectrum: spec.restricted,
        jacobian_eigen: spec.jacobian,
        hessian_eigen,
        stability,
        hessian,
        potts,
    })
}

/// Right-hand side of `B − 1 = (y−1)(t y^d + q − t)/(y^d − y)`, written without the
/// cancellation near `y = 1`.
fn potts_activity_of_root(q: usize, d: usize, t: usize, y: f64) -> f64 {
    let geometric: f64 = (0..d - 1).map(|k| y.powi(k as i32)).sum();
    (t as f64 * y.powi(d as i32) + (q - t) as f64) / (y * geometric)
}

/// All `y > 1` with `potts_activity_of_root(y) = B − 1`, ascending.
fn potts_roots(q: usize, d: usize, t: usize, b: f64) -> Vec<f64> {
    let target = b - 1.0;
    let g = |u: f64| potts_activity_of_root(q, d, t, 1.0 + u.exp()) - target;
    let (u_lo, u_hi) = ((ROOT_Y_MIN - 1.0).ln(), (ROOT_Y_MAX - 1.0).ln());
    const N: usize = 600;
    let grid: Vec<f64> = (0..=N).map(|k| u_lo + (u_hi - u_lo) * k as f64 / N as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&u| g(u)).collect();

    // Golden-section refinement of positive interior local minima of `g`.
    let mut samples: Vec<(f64, f64)> = grid.iter().copied().zip(vals.iter().copied()).collect();
    for k in 1..N {
        if vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] && vals[k] > 0.0 {
            let (mut a, mut c) = (grid[k - 1], grid[k + 1]);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..120 {
                let x1 = c - phi * (c - a);
                let x2 = a + phi * (c - a);
                if g(x1) < g(x2) {
                    c = x2;
                } else {
                    a = x1;
                }
            }
            let um = 0.5 * (a + c);
            samples.push((um, g(um)));
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut roots = Vec::new();
    for w in samples.windows(2) {
        let ((ua, ga), (ub, gb)) = (w[0], w[1]);
        if ga == 0.0 {
            roots.push(1.0 + ua.exp());
            continue;
        }
        if ga.signum() == gb.signum() || gb == 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (1.0 + ua.exp(), 1.0 + ub.exp());
        let glo = ga;
        let h = |y: f64| potts_activity_of_root(q, d, t, y) - target;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo) <= ROOT_REL_TOL * mid {
                break;
            }
            if h(mid).signum() == glo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    if let Some(&(u, gl)) = samples.last() {
        if gl == 0.0 {
            roots.push(1.0 + u.exp());
        }
    }
    roots
}

/// Ratios `x = R_1/R_q > 1` of the Potts fixpoints with `t` large coordinates, ascending.
pub fn potts_ratios(q: usize, delta: usize, b: f64, t: usize) -> Result<Vec<f64>> {
    check_degree(delta)?;
    if !(1..q).contains(&t) {
        return invalid(format!("t must be in 1..{q}"));
    }
    let d = delta - 1;
    Ok(potts_roots(q, d, t, b).into_iter().map(|y| y.powi(d as i32)).collect())
}

/// Every Potts fixpoint up to color permutation: the uniform one first, then for each
/// `t = 1..q-1` one representative per root, ordered by increasing ratio.
pub fn potts_fixpoints(q: usize, delta: usize, b: f64) -> Result<Vec<Fixpoint>> {
    check_degree(delta)?;
    if !(b > 1.0) {
        return invalid(format!("ferromagnetic Potts requires B > 1, got {b}"));
    }
    let m = build_potts_matrix(q, b)?;
    let mut out = vec![analyze_fixpoint(&m, delta, &vec![1.0; q], Some(PottsStructure { t: q, x: 1.0 }))?];
    for t in 1..q {
        for x in potts_ratios(q, delta, b, t)? {
            let r: Vec<f64> = (0..q).map(|i| if i < t { x } else { 1.0 }).collect();
            out.push(analyze_fixpoint(&m, delta, &r, Some(PottsStructure { t, x }))?);
        }
    }
    Ok(out)
}

/// Ratio of the attractive majority fixpoint (the largest `t = 1` root), if any.
pub fn attractive_majority_ratio(q: usize, delta: usize, b: f64) -> Result<Option<f64>> {
    if !(b > 1.0) {
        return Ok(None);
    }
    Ok(potts_ratios(q, delta, b, 1)?.last().copied())
}

/// Thresholds of the ferromagnetic Potts model on the Δ-regular tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PottsThresholds {
    /// Tree uniqueness threshold.
    #[serde(rename = "Bu")]
    pub bu: f64,
    /// Disordered/ordered coexistence activity.
    #[serde(rename = "Bo")]
    pub bo: f64,
    /// Random-cluster threshold, where the uniform fixpoint loses stability.
    #[serde(rename = "Brc")]
    pub brc: f64,
}

impl PottsThresholds {
    pub fn ordered(&self) -> bool {
        self.bu < self.bo && self.bo < self.brc
    }
}

/// `p(y) = y^{2d} − d y^{d+1} − (d−1)(q−2) y^d + d(q−1) y^{d−1} − (q−1)`.
pub fn uniqueness_polynomial(q: usize, d: usize, y: f64) -> f64 {
    let (qf, df) = (q as f64, d as f64);
    let yd = y.powi(d as i32);
    yd * yd - df * yd * y - (df - 1.0) * (qf - 2.0) * yd + df * (qf - 1.0) * yd / y - (qf - 1.0)
}

pub fn potts_thresholds(q: usize, delta: usize) -> Result<PottsThresholds> {
    if q < 3 {
        return invalid(format!("thresholds need q >= 3, got {q}"));
    }
    check_degree(delta)?;
    let (qf, df) = (q as f64, delta as f64);
    let brc = 1.0 + qf / (df - 2.0);
    let bo = (qf - 2.0) / ((qf - 1.0).powf(1.0 - 2.0 / df) - 1.0);

    let d = delta - 1;
    let p = |y: f64| uniqueness_polynomial(q, d, y);
    let mut lo = ROOT_Y_MIN;
    let mut hi = 2.0;
    while p(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > ROOT_Y_MAX {
            return Err(Error::Infeasible("no uniqueness root below 2^20".into()));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_REL_TOL * mid {
            break;
        }
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let bu = 1.0 + potts_activity_of_root(q, d, 1, rho);
    Ok(PottsThresholds { bu, bo, brc })
}

/// The activity where the disordered and ordered phases coexist. For `q = 2` this is
/// the `q → 2` limit of the Potts formula, `Δ/(Δ−2)`, which coincides with the Ising
/// uniqueness threshold.
pub fn coexistence_activity(q: usize, delta: usize) -> Result<f64> {
    check_degree(delta)?;
    match q {
        0 | 1 => invalid("q must be at least 2"),
        2 => Ok(delta as f64 / (delta as f64 - 2.0)),
        _ => Ok(potts_thresholds(q, delta)?.bo),
    }
}

/// Root marginal of the dominant color on a (Δ−1)-ary tree in the ordered phase:
/// `p = x/(x + q − 1)` with `x` the attractive majority ratio.
pub fn ordered_root_marginal(q: usize, delta: usize, b: f64) -> Result<f64> {
    if q >= 3 {
        let th = potts_thresholds(q, delta)?;
        if b < th.bu {
            return invalid(format!("B = {b} is below the uniqueness threshold {}", th.bu));
        }
    }
    let x = attractive_majority_ratio(q, delta, b)?
        .ok_or_else(|| Error::InvalidInput(format!("no majority fixpoint at B = {b}")))?;
    Ok(x / (x + q as f64 - 1.0))
}

/// Options for the generic (non-Potts) fixpoint search.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub starts: usize,
    pub damping: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub dedupe_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { starts: 200, damping: 0.5, max_iter: 20_000, seed: 0x5eed, dedupe_tol: 1e-6 }
    }
}

/// Damped iteration `R ← (1−s)R + s·T(R)` from random Dirichlet(1) starts. Finds the
/// attractive fixpoints; results are sorted and deduplicated deterministically.
pub fn search_fixpoints(
    m: &InteractionMatrix,
    delta: usize,
    opts: &SearchOptions,
    exec: Exec,
) -> Result<Vec<Fixpoint>> {
    check_degree(delta)?;
    let q = m.q();
    let s = opts.damping;
    let found: Vec<Option<Vec<f64>>> = exec.map(opts.starts, |k| {
        let mut g = rng::for_task(opts.seed, k);
        let start: Vec<f64> = rng::dirichlet_ones(&mut g, q).into_iter().map(|v| v.max(1e-12)).collect();
        let mut r = canonical_normalize(m, &start);
        for _ in 0..opts.max_iter {
            let next = tree_step(m, delta, &r).ok()?;
            let res = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if res < 1e-13 {
                return Some(next);
            }
            let mixed: Vec<f64> = r.iter().zip(&next).map(|(a, b)| (1.0 - s) * a + s * b).collect();
            r = canonical_normalize(m, &mixed);
        }
        None
    });
    let mut cands: Vec<Vec<f64>> = found.into_iter().flatten().collect();
    cands.sort_by(|a, b| {
        a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut unique: Vec<Vec<f64>> = Vec::new();
    for c in cands {
        let dup = unique.iter().any(|u| u.iter().zip(&c).all(|(a, b)| (a - b).abs() < opts.dedupe_tol));
        if !dup {
            unique.push(c);
        }
    }
    unique.iter().map(|r| analyze_fixpoint(m, delta, r, None)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn potts(q: usize, b: f64) -> InteractionMatrix {
        build_potts_matrix(q, b).unwrap()
    }

    fn proportional(a: &[f64], b: &[f64]) -> bool {
        let ra = a[0] / b[0];
        a.iter().zip(b).all(|(x, y)| (x / y - ra).abs() < 1e-12 * ra)
    }

    #[test]
    fn tree_step_examples() {
        let m = potts(3, 2.0);
        let out = tree_step(&m, 3, &[1.0, 1.0, 1.0]).unwrap();
        assert!(proportional(&out, &[1.0, 1.0, 1.0]));
        let out = tree_step(&m, 3, &[2.0, 1.0, 1.0]).unwrap();
        assert!(proportional(&out, &[36.0, 25.0, 25.0]));
        assert!((m.bilinear(&out, &out) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tree_step_rejects_bad_input() {
        let m = potts(3, 2.0);
        assert!(tree_step(&m, 3, &[1.0, 0.0, 1.0]).is_err());
        assert!(tree_step(&m, 3, &[1.0, -1.0, 1.0]).is_err());
        assert!(tree_step(&m, 2, &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn iteration_converges_to_uniform_below_uniqueness() {
        let m = potts(3, 2.0);
        let mut r = vec![2.0, 1.0, 1.0];
        for _ in 0..2000 {
            r = tree_step(&m, 3, &r).unwrap();
        }
        assert!(fixpoint_residual(&m, 3, &r).unwrap() < 1e-12);
        assert!((r[0] / r[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn thresholds_q3_delta3() {
        let th = potts_thresholds(3, 3).unwrap();
        assert_eq!(th.brc, 4.0);
        assert!((th.bo - 1.0 / (2f64.powf(1.0 / 3.0) - 1.0)).abs() < 1e-12);
        assert!((th.bu - (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-9);
        assert!(th.ordered());
        // √2 is the root of y⁴ − 2y³ − y² + 4y − 2.
        assert!(uniqueness_polynomial(3, 2, 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn thresholds_reject_small_parameters() {
        assert!(potts_thresholds(2, 3).is_err());
        assert!(potts_thresholds(3, 2).is_err());
    }

    #[test]
    fn fixpoint_counts_by_regime() {
        let fps = potts_fixpoints(3, 3, 2.0).unwrap();
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].stability, Stability::Attractive);

        let fps = potts_fixpoints(3, 3, 3.9).unwrap();
        let maj: Vec<_> = fps.iter().filter(|f| f.potts.unwrap().t == 1).collect();
        assert_eq!(maj.len(), 2);
        assert_eq!(maj[0].stability, Stability::Unstable);
        assert_eq!(maj[1].stability, Stability::Attractive);
        assert!(maj[1].potts.unwrap().x > maj[0].potts.unwrap().x);

        let fps = potts_fixpoints(3, 3, 4.5).unwrap();
        assert_eq!(fps.iter().filter(|f| f.potts.unwrap().t == 1).count(), 1);
        assert_eq!(fps[0].stability, Stability::Unstable);
    }

    #[test]
    fn uniform_restricted_spectrum() {
        for &(q, b) in &[(3usize, 2.0), (4, 3.0), (5, 1.5)] {
            let m = potts(q, b);
            let spec = jacobian_matrix(&m, 3, &vec![1.0; q]).unwrap();
            let want = (b - 1.0) / (b + q as f64 - 1.0);
            assert_eq!(spec.restricted.len(), q - 1);
            assert!(spec.restricted.iter().all(|x| (x - want).abs() < 1e-12));
        }
    }

    #[test]
    fn majority_restricted_spectrum_matches_closed_form() {
        let (q, delta, b) = (4usize, 3usize, 4.5);
        let m = potts(q, b);
        for x in potts_ratios(q, delta, b, 1).unwrap() {
            let mut r = vec![1.0; q];
            r[0] = x;
            let r = canonical_normalize(&m, &r);
            let spec = jacobian_matrix(&m, delta, &r).unwrap();
            let f = m.apply(&r);
            let (a1, aq) = (r[0] * f[0], r[q - 1] * f[q - 1]);
            let small = (b - 1.0) * r[q - 1] * r[q - 1] / aq;
            let trace = b * r[0] * r[0] / a1 + (b + q as f64 - 2.0) * r[q - 1] * r[q - 1] / aq - 1.0;
            let mut want = vec![small; q - 2];
            want.push(trace);
            want.sort_by(|a, b| b.total_cmp(a));
            for (got, w) in spec.restricted.iter().zip(&want) {
                assert!((got - w).abs() < 1e-10, "{got} vs {w}");
            }
        }
    }

    #[test]
    fn unit_eigenvector() {
        let m = potts(3, 3.9);
        for fp in potts_fixpoints(3, 3, 3.9).unwrap() {
            let spec = jacobian_matrix(&m, 3, &fp.r).unwrap();
            let e = &spec.unit_eigenvector;
            for i in 0..3 {
                let me: f64 = (0..3).map(|j| spec.matrix[i * 3 + j] * e[j]).sum();
                assert!((me - e[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn non_fixpoint_rejected() {
        let m = potts(3, 2.0);
        assert!(matches!(jacobian_matrix(&m, 3, &[2.0, 1.0, 1.0]), Err(Error::NotFixpoint(_))));
    }

    #[test]
    fn uniform_stability_boundary() {
        let m = potts(3, 3.5);
        assert_eq!(classify_stability(&m, 3, &[1.0; 3]).unwrap().stability, Stability::Attractive);
        let m = potts(3, 4.5);
        assert_eq!(classify_stability(&m, 3, &[1.0; 3]).unwrap().stability, Stability::Unstable);
        let m = potts(3, 4.0);
        let rep = classify_stability(&m, 3, &[1.0; 3]).unwrap();
        assert_eq!(rep.stability, Stability::Marginal);
        assert_eq!(rep.hessian, HessianClass::Degenerate);
    }

    #[test]
    fn root_marginal() {
        let bo = potts_thresholds(3, 3).unwrap().bo;
        let p = ordered_root_marginal(3, 3, bo).unwrap();
        let x = 2f64.powf(4.0 / 3.0);
        assert!((p - x / (x + 2.0)).abs() < 1e-10);
        assert!((p - 0.5575).abs() < 1e-4);

        let bo6 = potts_thresholds(6, 3).unwrap().bo;
        let x6 = 5f64.powf(4.0 / 3.0);
        assert!((ordered_root_marginal(6, 3, bo6).unwrap() - x6 / (x6 + 5.0)).abs() < 1e-10);

        assert!(ordered_root_marginal(3, 3, 1e6).unwrap() > 0.999);
        assert!(ordered_root_marginal(3, 3, 2.0).is_err());
    }

    #[test]
    fn coexistence_for_ising_is_limit() {
        assert_eq!(coexistence_activity(2, 3).unwrap(), 3.0);
        let q = 2.0 + 1e-7;
        let bo = (q - 2.0) / ((q - 1.0f64).powf(1.0 / 3.0) - 1.0);
        assert!((bo - 3.0).abs() < 1e-5);
    }

    #[test]
    fn generic_search_finds_attractive_fixpoints() {
        let m = potts(3, 3.9);
        let fps =
            search_fixpoints(&m, 3, &SearchOptions { starts: 40, ..Default::default() }, Exec::Sequential).unwrap();
        // uniform plus three ordered permutations
        assert_eq!(fps.len(), 4);
        assert!(fps.iter().all(|f| f.stability == Stability::Attractive));
    }
}
