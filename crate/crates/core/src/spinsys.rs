//! Model specification: symmetric nonnegative interaction matrices, their signature,
//! Cholesky factors, and the phase vocabulary shared by the other modules.

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest supported number of spins.
pub const MAX_COLORS: usize = 32;
/// Eigenvalues with magnitude below this count as zero.
pub const ZERO_EIGEN_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Ferromagnetic,
    Antiferromagnetic,
    Indefinite,
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Signature::Ferromagnetic => "ferromagnetic",
            Signature::Antiferromagnetic => "antiferromagnetic",
            Signature::Indefinite => "indefinite",
        };
        f.write_str(s)
    }
}

/// Why a matrix fails the ergodicity requirement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgodicityDefect {
    /// The support graph is disconnected (block-diagonal after relabelling).
    Reducible,
    /// The support graph is bipartite, so every cycle has even length.
    Periodic,
}

/// Symmetric q×q nonnegative interaction matrix, stored dense row-major.
///
/// Immutable after construction; the spectrum and signature are computed once.
#[derive(Clone, Debug)]
pub struct InteractionMatrix {
    q: usize,
    entries: Vec<f64>,
    eigenvalues: Vec<f64>,
    signature: Signature,
    ergodic: Option<ErgodicityDefect>,
}

impl PartialEq for InteractionMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.entries == other.entries
    }
}

impl InteractionMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let q = rows.len();
        if rows.iter().any(|r| r.len() != q) {
            return invalid("interaction matrix must be square");
        }
        Self::from_row_major(q, rows.concat())
    }

    pub fn from_row_major(q: usize, entries: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_COLORS).contains(&q) {
            return invalid(format!("q must be in 2..={MAX_COLORS}, got {q}"));
        }
        if entries.len() != q * q {
            return invalid(format!("expected {} entries, got {}", q * q, entries.len()));
        }
        if entries.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return invalid("entries must be finite and nonnegative");
        }
        for i in 0..q {
            for j in (i + 1)..q {
                let (a, b) = (entries[i * q + j], entries[j * q + i]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return invalid(format!("matrix is not symmetric at ({i},{j})"));
                }
            }
        }
        let eigenvalues = symmetric_eigenvalues(q, &entries);
        let signature = signature_of(&eigenvalues);
        let ergodic = ergodicity_defect(q, &entries);
        Ok(Self { q, entries, eigenvalues, signature, ergodic })
    }

    pub fn from_fn(q: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let entries = (0..q * q).map(|k| f(k / q, k % q)).collect();
        Self::from_row_major(q, entries)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.q + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.q).map(|r| r.to_vec()).collect()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn is_ergodic(&self) -> bool {
        self.ergodic.is_none()
    }

    pub fn ergodicity_defect(&self) -> Option<ErgodicityDefect> {
        self.ergodic
    }

    /// `Bz` for a length-q vector.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        self.entries.chunks(self.q).map(|row| row.iter().zip(z).map(|(b, x)| b * x).sum()).collect()
    }

    /// `z1ᵀ B z2`.
    pub fn bilinear(&self, z1: &[f64], z2: &[f64]) -> f64 {
        z1.iter().zip(self.apply(z2)).map(|(a, b)| a * b).sum()
    }

    /// Kronecker square `B ⊗ B`, the interaction of the paired-spin model. Pair `(i, k)`
    /// has index `i * q + k`.
    pub fn tensor_square(&self) -> Result<Self> {
        let q = self.q;
        let qq = q * q;
        if qq > MAX_COLORS * MAX_COLORS {
            return invalid("tensor square too large");
        }
        let mut entries = vec![0.0; qq * qq];
        for i in 0..q {
            for k in 0..q {
                for j in 0..q {
                    for l in 0..q {
                        entries[(i * q + k) * qq + (j * q + l)] = self.get(i, j) * self.get(k, l);
                    }
                }
            }
        }
        // No MAX_COLORS bound for paired models.
        let eigenvalues = symmetric_eigenvalues(qq, &entries);
        let signature = signature_of(&eigenvalues);
        let ergodic = ergodicity_defect(qq, &entries);
        Ok(Self { q: qq, entries, eigenvalues, signature, ergodic })
    }

    /// If this is a Potts matrix (constant diagonal B, unit off-diagonal), its B.
    pub fn potts_activity(&self) -> Option<f64> {
        let b = self.get(0, 0);
        for i in 0..self.q {
            for j in 0..self.q {
                let want = if i == j { b } else { 1.0 };
                if self.get(i, j) != want {
                    return None;
                }
            }
        }
        Some(b)
    }
}

fn symmetric_eigenvalues(q: usize, entries: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(q, q, entries);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn signature_of(ascending: &[f64]) -> Signature {
    if ascending.iter().all(|&l| l > ZERO_EIGEN_TOL) {
        return Signature::Ferromagnetic;
    }
    let (largest, rest) = ascending.split_last().expect("q >= 2");
    if *largest > ZERO_EIGEN_TOL && rest.iter().all(|&l| l < -ZERO_EIGEN_TOL) {
        Signature::Antiferromagnetic
    } else {
        Signature::Indefinite
    }
}

/// Irreducibility by reachability on the support graph; aperiodicity by the presence of
/// an odd cycle (for a symmetric support the period is 1 or 2).
fn ergodicity_defect(q: usize, entries: &[f64]) -> Option<ErgodicityDefect> {
    let mut side = vec![usize::MAX; q];
    let mut odd_cycle = false;
    let mut queue = VecDeque::from([0]);
    side[0] = 0;
    while let Some(i) = queue.pop_front() {
        for j in 0..q {
            if entries[i * q + j] <= 0.0 {
                continue;
            }
            if side[j] == usize::MAX {
                side[j] = 1 - side[i];
                queue.push_back(j);
            } else if side[j] == side[i] {
                odd_cycle = true;
            }
        }
    }
    if side.contains(&usize::MAX) {
        Some(ErgodicityDefect::Reducible)
    } else if !odd_cycle {
        Some(ErgodicityDefect::Periodic)
    } else {
        None
    }
}

/// Potts interaction: `B` on the diagonal, 1 elsewhere.
pub fn build_potts_matrix(q: usize, b: f64) -> Result<InteractionMatrix> {
    if !(b > 0.0) || !b.is_finite() {
        return invalid(format!("Potts activity must be positive, got {b}"));
    }
    InteractionMatrix::from_fn(q, |i, j| if i == j { b } else { 1.0 })
}

/// Signature of an ergodic model; non-ergodic inputs are rejected.
pub fn classify_signature(m: &InteractionMatrix) -> Result<Signature> {
    match m.ergodicity_defect() {
        None => Ok(m.signature()),
        Some(ErgodicityDefect::Reducible) => {
            Err(Error::NonErgodic("support graph is disconnected; study each irreducible block separately".into()))
        }
        Some(ErgodicityDefect::Periodic) => {
            Err(Error::NonErgodic("support graph is bipartite (period 2); only meaningful on bipartite graphs".into()))
        }
    }
}

/// Upper-triangular `B̂` with `B̂ᵀB̂ = B`, row-major.
pub fn cholesky_factor(m: &InteractionMatrix) -> Result<Vec<f64>> {
    if m.signature() != Signature::Ferromagnetic {
        return invalid("Cholesky factor requires a positive definite interaction matrix");
    }
    let q = m.q();
    let chol = DMatrix::from_row_slice(q, q, m.entries())
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("matrix is not positive definite".into()))?;
    let upper = chol.l().transpose();
    Ok((0..q * q).map(|k| upper[(k / q, k % q)]).collect())
}

fn check_simplex(z: &[f64], q: usize, name: &str) -> Result<()> {
    if z.len() != q {
        return invalid(format!("{name} must have length {q}"));
    }
    if z.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return invalid(format!("{name} must be nonnegative"));
    }
    let s: f64 = z.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return invalid(format!("{name} must have unit 1-norm (sum = {s})"));
    }
    Ok(())
}

/// `(z1ᵀBz1)(z2ᵀBz2) − (z1ᵀBz2)²`: nonnegative for ferromagnetic B, nonpositive for
/// antiferromagnetic B, zero when `z1 = z2`.
pub fn alignment_gap(m: &InteractionMatrix, z1: &[f64], z2: &[f64]) -> Result<f64> {
    check_simplex(z1, m.q(), "z1")?;
    check_simplex(z2, m.q(), "z2")?;
    let cross = m.bilinear(z1, z2);
    Ok(m.bilinear(z1, z1) * m.bilinear(z2, z2) - cross * cross)
}

/// Whether the ferromagnetic alignment inequality `(z1ᵀBz1)(z2ᵀBz2) ≥ (z1ᵀBz2)²` holds.
pub fn ferro_alignment_check(m: &InteractionMatrix, z1: &[f64], z2: &[f64]) -> Result<bool> {
    let cross = m.bilinear(z1, z2);
    let gap = alignment_gap(m, z1, z2)?;
    Ok(gap >= -1e-12 * cross.abs().max(1.0).powi(2))
}

/// A point of the simplex together with its first-moment exponent and local structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub alpha: Vec<f64>,
    /// Nats per vertex.
    pub psi1: f64,
    pub hessian_eigen: Vec<f64>,
    pub local_max: bool,
    pub hessian_local_max: bool,
    pub dominant: bool,
    pub hessian_dominant: bool,
}

impl Phase {
    pub fn new(alpha: Vec<f64>, psi1: f64, hessian_eigen: Vec<f64>) -> Self {
        let hessian_local_max = !hessian_eigen.is_empty() && hessian_eigen.iter().all(|h| *h < 0.0);
        Self {
            alpha,
            psi1,
            hessian_eigen,
            local_max: hessian_local_max,
            hessian_local_max,
            dominant: false,
            hessian_dominant: false,
        }
    }

    pub fn mark_dominant(&mut self) {
        self.dominant = true;
        self.hessian_dominant = self.hessian_local_max;
    }
}

/// Model file contents: either explicit entries or the Potts shorthand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Potts { potts: PottsSpec },
    Explicit { q: usize, entries: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PottsSpec {
    pub q: usize,
    #[serde(rename = "B")]
    pub b: f64,
}

impl ModelSpec {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("model file: {e}")))
    }

    pub fn build(&self) -> Result<InteractionMatrix> {
        match self {
            ModelSpec::Potts { potts } => build_potts_matrix(potts.q, potts.b),
            ModelSpec::Explicit { q, entries } => {
                if entries.len() != *q {
                    return invalid(format!("model declares q = {q} but has {} rows", entries.len()));
                }
                InteractionMatrix::from_rows(entries)
            }
        }
    }
}

impl From<&InteractionMatrix> for ModelSpec {
    fn from(m: &InteractionMatrix) -> Self {
        ModelSpec::Explicit { q: m.q(), entries: m.rows() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn potts_eigenvalues_and_signature() {
        let m = build_potts_matrix(3, 2.0).unwrap();
        assert_eq!(m.signature(), Signature::Ferromagnetic);
        assert!(close(m.eigenvalues(), &[1.0, 1.0, 4.0], 1e-12));

        let m = build_potts_matrix(3, 0.5).unwrap();
        assert_eq!(m.signature(), Signature::Antiferromagnetic);
        assert!(close(m.eigenvalues(), &[-0.5, -0.5, 2.5], 1e-12));

        let m = build_potts_matrix(2, 1.0).unwrap();
        assert_eq!(m.signature(), Signature::Indefinite);
        assert!(close(m.eigenvalues(), &[0.0, 2.0], 1e-12));
    }

    #[test]
    fn nonpositive_activity_rejected() {
        assert!(build_potts_matrix(3, 0.0).is_err());
        assert!(build_potts_matrix(3, -1.0).is_err());
        assert!(build_potts_matrix(1, 2.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let m = build_potts_matrix(4, 3.0).unwrap();
        assert_eq!(classify_signature(&m).unwrap(), Signature::Ferromagnetic);
        let colorings = InteractionMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
        assert_eq!(classify_signature(&colorings).unwrap(), Signature::Antiferromagnetic);
    }

    #[test]
    fn non_ergodic_inputs_rejected() {
        let id = InteractionMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(id.ergodicity_defect(), Some(ErgodicityDefect::Reducible));
        assert!(matches!(classify_signature(&id), Err(Error::NonErgodic(_))));
        let bip = InteractionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(bip.ergodicity_defect(), Some(ErgodicityDefect::Periodic));
        assert!(classify_signature(&bip).is_err());
    }

    #[test]
    fn non_symmetric_rejected() {
        let r = InteractionMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 1.0]]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cholesky_identity_and_2x2() {
        let id = InteractionMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.0 }).unwrap();
        assert!(close(&cholesky_factor(&id).unwrap(), &[1.0, 0.0, 0.0, 1.0], 1e-15));

        let m = build_potts_matrix(2, 2.0).unwrap();
        let h = cholesky_factor(&m).unwrap();
        let want = [2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0, 1.5f64.sqrt()];
        assert!(close(&h, &want, 1e-14));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let m = build_potts_matrix(3, 0.5).unwrap();
        assert!(cholesky_factor(&m).is_err());
    }

    #[test]
    fn alignment_examples() {
        let m = build_potts_matrix(3, 2.0).unwrap();
        let u = [1.0 / 3.0; 3];
        assert!(alignment_gap(&m, &u, &u).unwrap().abs() < 1e-12);
        assert!(ferro_alignment_check(&m, &u, &u).unwrap());
        let gap = alignment_gap(&m, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((gap - 3.0).abs() < 1e-12);

        let af = build_potts_matrix(3, 0.5).unwrap();
        let g = alignment_gap(&af, &[0.6, 0.3, 0.1], &[0.2, 0.2, 0.6]).unwrap();
        assert!(g < 0.0);
        assert!(!ferro_alignment_check(&af, &[0.6, 0.3, 0.1], &[0.2, 0.2, 0.6]).unwrap());
    }

    #[test]
    fn model_spec_forms() {
        let p = ModelSpec::parse(r#"{"potts": {"q": 3, "B": 2.0}}"#).unwrap();
        assert_eq!(p.build().unwrap(), build_potts_matrix(3, 2.0).unwrap());
        let e = ModelSpec::parse(r#"{"q": 2, "entries": [[2, 1], [1, 2]]}"#).unwrap();
        assert_eq!(e.build().unwrap().potts_activity(), Some(2.0));
        assert!(ModelSpec::parse(r#"{"q": 2}"#).is_err());
    }

    #[test]
    fn tensor_square_indexing() {
        let m = build_potts_matrix(2, 3.0).unwrap();
        let t = m.tensor_square().unwrap();
        assert_eq!(t.q(), 4);
        // (0,1) ~ (0,0): B_00 * B_10
        assert_eq!(t.get(1, 0), 3.0);
        assert_eq!(t.get(0, 0), 9.0);
        assert_eq!(t.signature(), Signature::Ferromagnetic);
    }
}
