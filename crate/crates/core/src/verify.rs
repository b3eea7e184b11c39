//! The acceptance criteria of the toolkit, each returning a pass/fail outcome with a
//! one-line summary. Runtime limits are part of every pass condition.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::graphs::{self, RegularGraph};
use crate::moments::{self, ReportOptions};
use crate::spinsys::{build_potts_matrix, InteractionMatrix, Signature};
use crate::swsim::{self, PhaseClass, Start};
use crate::treefix::{self, HessianClass, Stability};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    /// Informational criteria never fail a suite.
    pub gating: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub limit_secs: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO",
        };
        write!(
            f,
            "[{tag}] {:>2} {:<22} {:>7.2}s/{:<4}s  {}",
            self.id, self.title, self.elapsed_secs, self.limit_secs, self.detail
        )
    }
}

pub const CRITERIA: [(usize, &str, f64, bool); 11] = [
    (1, "thresholds", 1.0, true),
    (2, "coexistence", 5.0, true),
    (3, "stability-equivalence", 30.0, true),
    (4, "second-moment", 120.0, true),
    (5, "exact-first-moment", 60.0, true),
    (6, "cycle-poisson", 120.0, true),
    (7, "small-graph-constants", 1.0, true),
    (8, "sw-exactness", 60.0, true),
    (9, "gap-inequality", 1.0, true),
    (10, "sw-bottleneck", 180.0, true),
    (11, "bethe-consistency", 300.0, false),
];

type Check = (bool, String);

pub fn run_criterion(id: usize, exec: Exec) -> Option<CriterionOutcome> {
    let &(id, title, limit, gating) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let res = match id {
        1 => thresholds(),
        2 => coexistence(),
        3 => stability_equivalence(),
        4 => second_moment(exec),
        5 => exact_first_moment(exec),
        6 => cycle_poisson(exec),
        7 => small_graph(),
        8 => sw_exactness(exec),
        9 => gap_inequality(),
        10 => sw_bottleneck(exec),
        _ => bethe_consistency(exec),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (ok, mut detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    if elapsed > limit {
        detail.push_str(&format!("; exceeded the {limit} s limit"));
    }
    Some(CriterionOutcome {
        id,
        title: title.into(),
        passed: ok && elapsed <= limit,
        gating,
        detail,
        elapsed_secs: elapsed,
        limit_secs: limit,
    })
}

pub fn run_suite(exec: Exec) -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0, exec)).collect()
}

/// True when every gating criterion passed.
pub fn suite_passed(outcomes: &[CriterionOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed || !o.gating)
}

fn potts(q: usize, b: f64) -> Result<InteractionMatrix> {
    build_potts_matrix(q, b)
}

fn thresholds() -> Result<Check> {
    let t = treefix::potts_thresholds(3, 3)?;
    let e_bu = (t.bu - (1.0 + 2.0 * 2f64.sqrt())).abs();
    let e_bo = (t.bo - 1.0 / (2f64.powf(1.0 / 3.0) - 1.0)).abs();
    let mut bad = Vec::new();
    for q in 3..=10 {
        for d in 3..=10 {
            if !treefix::potts_thresholds(q, d)?.ordered() {
                bad.push(format!("({q},{d})"));
            }
        }
    }
    let ok = e_bu < 1e-9 && e_bo < 1e-12 && t.brc == 4.0 && bad.is_empty();
    Ok((ok, format!("|ΔBu|={e_bu:.1e} |ΔBo|={e_bo:.1e} Brc={} unordered={bad:?}", t.brc)))
}

fn coexistence() -> Result<Check> {
    let mut worst_zero: f64 = 0.0;
    let mut bad = Vec::new();
    for q in [3, 4, 6] {
        for d in [3, 4, 5] {
            let t = treefix::potts_thresholds(q, d)?;
            let z = moments::dif(q, d, t.bo)?.unwrap_or(f64::NAN);
            worst_zero = worst_zero.max(z.abs());
            let mut prev = f64::NEG_INFINITY;
            for k in 1..=50 {
                let b = t.bu + (t.brc - t.bu) * k as f64 / 51.0;
                let v = moments::dif(q, d, b)?.unwrap_or(f64::NAN);
                if !(v > prev) {
                    bad.push(format!("({q},{d},B={b:.4})"));
                    break;
                }
                prev = v;
            }
        }
    }
    Ok((worst_zero < 1e-9 && bad.is_empty(), format!("max|DIF(Bo)|={worst_zero:.1e} non-monotone={bad:?}")))
}

fn stability_equivalence() -> Result<Check> {
    let (mut checked, mut marginal, mut bad) = (0usize, 0usize, Vec::new());
    for q in 3..=10 {
        for d in 3..=10 {
            let t = treefix::potts_thresholds(q, d)?;
            let hi = 1.5 * t.brc;
            for k in 1..=20 {
                let b = 1.0 + (hi - 1.0) * k as f64 / 20.0;
                if potts(q, b)?.signature() != Signature::Ferromagnetic {
                    continue;
                }
                for fp in treefix::potts_fixpoints(q, d, b)? {
                    checked += 1;
                    let attractive = fp.stability == Stability::Attractive;
                    let negdef = fp.hessian == HessianClass::NegativeDefinite;
                    let edge = fp.stability == Stability::Marginal || fp.hessian == HessianClass::Degenerate;
                    marginal += edge as usize;
                    if attractive != negdef {
                        bad.push(format!("(q={q},Δ={d},B={b:.4})"));
                    }
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} fixpoints, {marginal} marginal, mismatches={bad:?}")))
}

fn second_moment(exec: Exec) -> Result<Check> {
    let (mut e2, mut en): (f64, f64) = (0.0, 0.0);
    let mut count = 0;
    for q in [2, 3, 4] {
        for d in [3, 4] {
            let bo = treefix::coexistence_activity(q, d)?;
            for b in [1.5, 2.0, bo, 5.0] {
                let rep = moments::moment_report(&potts(q, b)?, d, &ReportOptions::default(), exec)?;
                e2 = e2.max((rep.psi2_max - 2.0 * rep.psi1_max).abs());
                let norm = rep.norm_value.unwrap_or(f64::NAN);
                en = en.max((rep.psi1_max - d as f64 * norm.ln()).abs());
                count += 1;
            }
        }
    }
    let col = InteractionMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 })?;
    let uniform = [1.0 / 3.0; 3];
    let p1 = moments::psi1(&col, 10, &uniform)?;
    let p2 = moments::psi2(&col, 10, &uniform, &Default::default(), exec)?.value;
    let ec = (p1 - (5.0 * 2f64.ln() - 4.0 * 3f64.ln())).abs();
    let ok = e2 < 1e-7 && en < 1e-8 && ec < 1e-10 && p2 > 2.0 * p1 + 0.1;
    Ok((
        ok,
        format!(
            "{count} models: max|Ψ2−2Ψ1|={e2:.1e} max|Ψ1−Δ ln‖B̂‖|={en:.1e}; colorings |ΔΨ1|={ec:.1e} Ψ2−2Ψ1={:.4}",
            p2 - 2.0 * p1
        ),
    ))
}

/// All count vectors of length `q` summing to `n`.
fn compositions(n: usize, q: usize) -> Vec<Vec<usize>> {
    if q == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|c| {
            compositions(n - c, q - 1).into_iter().map(move |mut rest| {
                rest.insert(0, c);
                rest
            })
        })
        .collect()
}

/// `E[Z^α]` by averaging the brute-force `Z^α` over every pairing.
pub fn pairing_mean_phase_z(
    n: usize,
    delta: usize,
    m: &InteractionMatrix,
    exec: Exec,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let pairings: Vec<Vec<(usize, usize)>> = graphs::enumerate_pairings(n, delta)?.collect();
    let oracles: Vec<Result<graphs::GibbsOracle>> =
        exec.map_slice(&pairings, |p| graphs::brute_gibbs(&graphs::pairing_to_graph(n, delta, p), m));
    let oracles: Vec<graphs::GibbsOracle> = oracles.into_iter().collect::<Result<_>>()?;
    let total = pairings.len() as f64;
    Ok(compositions(n, m.q())
        .into_iter()
        .map(|c| {
            let mean = oracles.iter().map(|o| o.z_alpha(&c)).sum::<f64>() / total;
            (c, mean)
        })
        .collect())
}

fn exact_first_moment(exec: Exec) -> Result<Check> {
    let (mut worst, mut cases) = (0.0f64, 0usize);
    for n in [2, 4] {
        for q in [2, 3] {
            for b in [0.5, 1.0, 2.0] {
                let m = potts(q, b)?;
                for (counts, mean) in pairing_mean_phase_z(n, 3, &m, exec)? {
                    let alpha: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
                    let exact = moments::first_moment_exact(n, 3, &m, &alpha)?;
                    let rel = if mean == 0.0 { exact.abs() } else { ((exact - mean) / mean).abs() };
                    worst = worst.max(rel);
                    cases += 1;
                }
            }
        }
    }
    let hand = moments::first_moment_exact(2, 3, &potts(2, 2.0)?, &[0.5, 0.5])?;
    let eh = (hand - 28.0 / 5.0).abs();
    Ok((
        worst < 1e-12 && eh < 1e-12,
        format!("{cases} (n,q,B,α) cases, max rel err {worst:.1e}; E[Z^(1/2,1/2)]={hand:.12}"),
    ))
}

fn cycle_poisson(exec: Exec) -> Result<Check> {
    let (n, d, graphs_n, kmax) = (2000, 3, 5000, 4);
    let counts: Vec<Result<Vec<u64>>> = exec.map(graphs_n, |k| {
        let g = graphs::pairing_sample(n, d, 0xc7c1e ^ k as u64)?;
        graphs::count_cycles(&g, kmax)
    });
    let mut sums = vec![0.0; kmax];
    for c in counts {
        for (s, v) in sums.iter_mut().zip(c?) {
            *s += v as f64;
        }
    }
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, s) in sums.iter().enumerate() {
        let mean = s / graphs_n as f64;
        let lam = moments::cycle_rate(d, i + 1);
        worst = worst.max((mean / lam - 1.0).abs());
        parts.push(format!("X{}={mean:.3}/{lam:.3}", i + 1));
    }
    Ok((worst < 0.05, format!("{} max rel dev {worst:.3}", parts.join(" "))))
}

fn small_graph() -> Result<Check> {
    let ising = moments::small_graph_constants(&potts(2, 2.0)?, 3, &[1.0, 1.0], 60)?;
    let p3 = moments::small_graph_constants(&potts(3, 2.0)?, 3, &[1.0, 1.0, 1.0], 60)?;
    let e1 = (ising.series_value - ising.ratio_limit).abs();
    let e0 = (ising.ratio_limit - 3.0 / 7f64.sqrt()).abs();
    let e2 = (p3.series_value - p3.ratio_limit).abs();
    Ok((
        e1 < 1e-10 && e0 < 1e-10 && e2 < 1e-10,
        format!(
            "Ising {:.12} (err {e1:.1e}, vs 3/√7 {e0:.1e}); Potts(3) {:.12} (err {e2:.1e})",
            ising.ratio_limit, p3.ratio_limit
        ),
    ))
}

/// The small graphs used for exact kernel checks.
pub fn kernel_test_graphs() -> Vec<(&'static str, RegularGraph)> {
    let k4e =
        RegularGraph { n: 4, delta: 3, edges: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], roles: None, seed: None };
    vec![
        ("K2", RegularGraph::complete(2)),
        ("path3", RegularGraph::path(3)),
        ("triangle", RegularGraph::complete(3)),
        ("K4-e", k4e),
    ]
}

fn sw_exactness(exec: Exec) -> Result<Check> {
    let (mut rows, mut db, mut st, mut cases) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for (_, g) in kernel_test_graphs() {
        for q in [2, 3] {
            for b in [1.5, 3.0] {
                let k = swsim::exact_sw_kernel(&g, q, b, exec)?;
                let gibbs = graphs::brute_gibbs(&g, &potts(q, b)?)?.gibbs();
                let pi = swsim::stationary(&k);
                rows = rows.max(k.row_sum_error());
                db = db.max(k.detailed_balance_error(&gibbs));
                st = st.max(pi.iter().zip(&gibbs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                cases += 1;
            }
        }
    }
    Ok((
        rows < 1e-12 && db < 1e-10 && st < 1e-10,
        format!("{cases} kernels: row-sum {rows:.1e}, detailed balance {db:.1e}, stationary vs Gibbs {st:.1e}"),
    ))
}

fn gap_inequality() -> Result<Check> {
    let mut bad = Vec::new();
    let mut checked = 0;
    for d in 3..=8 {
        for q in swsim::gap_q_min(d)..=40 {
            checked += 1;
            if !swsim::sw_gap_check(q, d)?.holds {
                bad.push(format!("({q},{d})"));
            }
        }
    }
    let g6 = swsim::sw_gap_check(6, 3)?;
    let g3 = swsim::sw_gap_check(3, 3)?;
    let hand = (g6.ratio - 1.5225).abs() < 1e-3
        && (g6.threshold - 1.2158).abs() < 1e-3
        && (g3.ratio - 1.105).abs() < 1e-3
        && (g3.threshold - 1.3512).abs() < 1e-3;
    Ok((
        bad.is_empty() && hand,
        format!(
            "{checked} (q,Δ) with q ≤ 40, failures={bad:?}; q=6: {:.4} vs {:.4}; q=3: {:.4} vs {:.4}",
            g6.ratio, g6.threshold, g3.ratio, g3.threshold
        ),
    ))
}

/// Fractions of time spent near the ordered phases (ordered starts) and with
/// monochromatic density within `eps_edge` of `E_u` (disordered starts), one pair per seed.
pub fn bottleneck_fractions(
    q: usize,
    delta: usize,
    n: usize,
    steps: usize,
    seeds: usize,
    eps_edge: f64,
    exec: Exec,
) -> Result<Vec<(f64, f64)>> {
    let b = treefix::coexistence_activity(q, delta)?;
    let a = swsim::ordered_marginal(q, delta, b)?;
    let e_u = swsim::e_uniform(q, delta, b);
    let out: Vec<Result<(f64, f64)>> = exec.map(seeds, |s| {
        let seed = 0xb077 + s as u64;
        let g = graphs::pairing_sample(n, delta, seed)?;
        let ord = swsim::run_chain(&g, q, b, steps, &Start::Ordered(0), seed, a)?;
        let dis = swsim::run_chain(&g, q, b, steps, &Start::Disordered, seed ^ 0xd15, a)?;
        Ok((
            ord.fraction(|r| matches!(r.nearest, PhaseClass::Ordered(_))),
            dis.fraction(|r| (r.mono_per_vertex - e_u).abs() < eps_edge),
        ))
    });
    out.into_iter().collect()
}

fn sw_bottleneck(exec: Exec) -> Result<Check> {
    let fr = bottleneck_fractions(6, 3, 128, 10_000, 10, 0.1, exec)?;
    let min_ord = fr.iter().map(|f| f.0).fold(1.0, f64::min);
    let min_dis = fr.iter().map(|f| f.1).fold(1.0, f64::min);
    let tri = RegularGraph::complete(3);
    let cut = swsim::phase_cut(2, 3, 0);
    let mut phis = Vec::new();
    for b in [2.0, 3.0, 5.0] {
        let k = swsim::exact_sw_kernel(&tri, 2, b, exec)?;
        phis.push(swsim::conductance(&k, &swsim::stationary(&k), &cut)?);
    }
    let decreasing = phis.windows(2).all(|w| w[1] < w[0]);
    let large = bottleneck_fractions(6, 3, 2048, 10_000, 10, 0.1, exec)?;
    let large_ord = large.iter().map(|f| f.0).fold(1.0, f64::min);
    let large_dis = large.iter().map(|f| f.1).fold(1.0, f64::min);
    Ok((
        min_ord >= 0.99 && min_dis >= 0.95 && decreasing,
        format!(
            "n=128: min ordered fraction {min_ord:.4}, min disordered fraction {min_dis:.4}; \
             Φ(B=2,3,5)={phis:.4?}; n=2048 for reference: {large_ord:.4}, {large_dis:.4}"
        ),
    ))
}

fn bethe_consistency(exec: Exec) -> Result<Check> {
    let (q, d, b) = (3, 3, 2.0);
    let target = moments::moment_report(&potts(q, b)?, d, &ReportOptions::default(), exec)?.psi1_max;
    let mut parts = Vec::new();
    let mut last = f64::NAN;
    for n in [64, 128] {
        let reps = 4;
        let mut acc = 0.0;
        for r in 0..reps {
            let g = graphs::pairing_sample(n, d, 0xa15 + r)?;
            acc += swsim::ais_log_partition(&g, q, b, 400, 64, 0xa15 ^ r, exec)? / n as f64;
        }
        last = acc / reps as f64;
        parts.push(format!("n={n}: {last:.4}"));
    }
    let gap = (last - target).abs();
    Ok((gap < 0.05, format!("{} vs maxΨ1 {target:.4} (gap {gap:.4})", parts.join(", "))))
}
