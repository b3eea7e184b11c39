//! Disordered/ordered phase comparison for the ferromagnetic Potts model.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spinsys::{build_potts_matrix, Phase};
use crate::treefix::{self, HessianClass, PottsThresholds};

/// `|B − Bo|` below which the two phases are reported as coexisting.
pub const COEXISTENCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DisorderedOnly,
    DisorderedDominant,
    Coexistence,
    OrderedDominant,
    OrderedOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub q: usize,
    pub delta: usize,
    pub b: f64,
    pub thresholds: PottsThresholds,
    pub regime: Regime,
    /// `Φ₁(x,1,…,1) − Φ₁(1,…,1)` at the attractive majority fixpoint.
    pub dif: Option<f64>,
    pub majority_ratio: Option<f64>,
    pub local_maxima: Vec<Phase>,
    pub dominant: Vec<Phase>,
}

/// Free-energy difference between the ordered and disordered phase, or `None` below
/// the uniqueness threshold where no majority fixpoint exists.
pub fn dif(q: usize, delta: usize, b: f64) -> Result<Option<f64>> {
    let Some(x) = treefix::attractive_majority_ratio(q, delta, b)? else {
        return Ok(None);
    };
    let m = build_potts_matrix(q, b)?;
    let mut r = vec![1.0; q];
    r[0] = x;
    Ok(Some(treefix::phi1(&m, delta, &r) - treefix::phi1(&m, delta, &vec![1.0; q])))
}

pub fn potts_phase_diagram(q: usize, delta: usize, b: f64) -> Result<PhaseDiagram> {
    if !(b > 1.0) {
        return invalid(format!("phase diagram needs B > 1, got {b}"));
    }
    let th = treefix::potts_thresholds(q, delta)?;
    let m = build_potts_matrix(q, b)?;
    let fixpoints = treefix::potts_fixpoints(q, delta, b)?;

    let regime = if (b - th.bo).abs() <= COEXISTENCE_TOL {
        Regime::Coexistence
    } else if b < th.bu {
        Regime::DisorderedOnly
    } else if b < th.bo {
        Regime::DisorderedDominant
    } else if b < th.brc {
        Regime::OrderedDominant
    } else {
        Regime::OrderedOnly
    };

    let to_phase = |fp: &treefix::Fixpoint| {
        let mut ph = Phase::new(fp.alpha.clone(), treefix::phi1(&m, delta, &fp.r), fp.hessian_eigen.clone());
        ph.local_max = fp.stability == treefix::Stability::Attractive;
        ph.hessian_local_max = fp.hessian == HessianClass::NegativeDefinite;
        ph
    };

    let uniform = to_phase(&fixpoints[0]);
    let ordered_fp = fixpoints.iter().rfind(|f| f.potts.is_some_and(|p| p.t == 1));
    let majority_ratio = ordered_fp.and_then(|f| f.potts.map(|p| p.x));
    let dif = match ordered_fp {
        Some(fp) => Some(to_phase(fp).psi1 - uniform.psi1),
        None => None,
    };

    let mut disordered = Vec::new();
    if b < th.brc {
        disordered.push(uniform);
    }
    let mut ordered = Vec::new();
    if let Some(fp) = ordered_fp {
        let base = to_phase(fp);
        for j in 0..q {
            let mut ph = base.clone();
            ph.alpha.swap(0, j);
            ordered.push(ph);
        }
    }

    let (dis_dom, ord_dom) = match regime {
        Regime::DisorderedOnly | Regime::DisorderedDominant => (true, false),
        Regime::Coexistence => (true, true),
        Regime::OrderedDominant | Regime::OrderedOnly => (false, true),
    };
    let mut dominant = Vec::new();
    if dis_dom {
        dominant.extend(disordered.iter().cloned());
    }
    if ord_dom {
        dominant.extend(ordered.iter().cloned());
    }
    dominant.iter_mut().for_each(Phase::mark_dominant);
    let mut local_maxima: Vec<Phase> = disordered.into_iter().chain(ordered).collect();
    for ph in &mut local_maxima {
        if dominant.iter().any(|d| d.alpha == ph.alpha) {
            ph.mark_dominant();
        }
    }
    Ok(PhaseDiagram { q, delta, b, thresholds: th, regime, dif, majority_ratio, local_maxima, dominant })
}
