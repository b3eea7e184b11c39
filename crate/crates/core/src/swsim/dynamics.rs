//! Swendsen-Wang chains, phase statistics and U/M/T classification.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::diagnostics::{e_ordered, e_uniform};
use super::unionfind::UnionFind;
use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::graphs::RegularGraph;
use crate::rng::{self, Rng};
use crate::treefix;

/// A coloring with its cached monochromatic-edge count (self-loops included).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwState {
    pub coloring: Vec<usize>,
    pub mono_edges: usize,
}

pub fn count_mono(g: &RegularGraph, coloring: &[usize]) -> usize {
    g.edges.iter().filter(|&&(u, v)| coloring[u] == coloring[v]).count()
}

impl SwState {
    pub fn new(g: &RegularGraph, coloring: Vec<usize>) -> Result<Self> {
        if coloring.len() != g.n {
            return invalid("coloring must have one color per vertex");
        }
        let mono_edges = count_mono(g, &coloring);
        Ok(Self { coloring, mono_edges })
    }

    pub fn recount(&self, g: &RegularGraph) -> usize {
        count_mono(g, &self.coloring)
    }
}

/// Reusable scratch space for [`sw_step_with`].
pub struct SwWorkspace {
    uf: UnionFind,
    color_of_root: Vec<usize>,
}

impl SwWorkspace {
    pub fn new(n: usize) -> Self {
        Self { uf: UnionFind::new(n), color_of_root: vec![usize::MAX; n] }
    }
}

fn check_params(q: usize, b: f64) -> Result<()> {
    if q == 0 {
        return invalid("q must be positive");
    }
    if !(b >= 1.0 && b.is_finite()) {
        return invalid(format!("Swendsen-Wang needs B ≥ 1, got {b}"));
    }
    Ok(())
}

/// One step: keep every monochromatic non-loop edge with probability `1 − 1/B`, then give
/// each component of kept edges a uniform color. Components are recolored in order of
/// their smallest vertex.
pub fn sw_step_with(g: &RegularGraph, q: usize, b: f64, state: &mut SwState, rng: &mut Rng, ws: &mut SwWorkspace) {
    let keep = 1.0 - 1.0 / b;
    ws.uf.reset();
    for &(u, v) in &g.edges {
        if u != v && state.coloring[u] == state.coloring[v] && rng.random::<f64>() < keep {
            ws.uf.union(u, v);
        }
    }
    ws.color_of_root.iter_mut().for_each(|c| *c = usize::MAX);
    for v in 0..g.n {
        let r = ws.uf.find(v);
        if ws.color_of_root[r] == usize::MAX {
            ws.color_of_root[r] = rng.random_range(0..q);
        }
        state.coloring[v] = ws.color_of_root[r];
    }
    state.mono_edges = count_mono(g, &state.coloring);
}

pub fn sw_step(g: &RegularGraph, q: usize, b: f64, state: &mut SwState, rng: &mut Rng) -> Result<()> {
    check_params(q, b)?;
    if state.coloring.len() != g.n || state.coloring.iter().any(|&c| c >= q) {
        return invalid("state does not match the graph or q");
    }
    sw_step_with(g, q, b, state, rng, &mut SwWorkspace::new(g.n));
    Ok(())
}

/// Most frequent color among the vertices `u`, lowest index on ties.
pub fn phase_of(sigma: &[usize], u: &[usize], q: usize) -> Result<usize> {
    if u.is_empty() {
        return invalid("vertex set must be nonempty");
    }
    let mut counts = vec![0usize; q];
    for &v in u {
        counts[sigma[v]] += 1;
    }
    let best = counts.iter().copied().max().unwrap_or(0);
    Ok(counts.iter().position(|&c| c == best).unwrap_or(0))
}

pub fn color_frequencies(sigma: &[usize], q: usize) -> Vec<f64> {
    let mut c = vec![0.0; q];
    sigma.iter().for_each(|&s| c[s] += 1.0);
    let n = sigma.len() as f64;
    c.iter_mut().for_each(|v| *v /= n);
    c
}

/// The ordered-phase frequency vector with `a` on color `j`.
pub fn ordered_vector(q: usize, a: f64, j: usize) -> Vec<f64> {
    (0..q).map(|i| if i == j { a } else { (1.0 - a) / (q as f64 - 1.0) }).collect()
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Dominant-color marginal `a = α₁` of the attractive majority fixpoint.
pub fn ordered_marginal(q: usize, delta: usize, b: f64) -> Result<Option<f64>> {
    Ok(treefix::attractive_majority_ratio(q, delta, b)?.map(|x| {
        let mut r = vec![1.0; q];
        r[0] = x;
        treefix::alpha_from_ratios(&r, delta)[0]
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UmtClass {
    U,
    M(usize),
    T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmtClassifier {
    pub q: usize,
    pub e_u: f64,
    pub e_m: Option<f64>,
    pub a: Option<f64>,
    pub eps_freq: f64,
    pub eps_edge: f64,
}

/// Fallback ε when the ordered phase does not exist.
pub const FALLBACK_EPS: f64 = 0.1;

impl UmtClassifier {
    /// `eps = None` uses `0.5·min(‖u − m‖_∞, |E_m − E_u|)/2` for both conditions.
    pub fn new(q: usize, delta: usize, b: f64, eps: Option<f64>) -> Result<Self> {
        let e_u = e_uniform(q, delta, b);
        let a = ordered_marginal(q, delta, b)?;
        let x = treefix::attractive_majority_ratio(q, delta, b)?;
        let e_m = x.map(|x| e_ordered(q, delta, b, x));
        let default = match (a, e_m) {
            (Some(a), Some(em)) => 0.5 * (a - 1.0 / q as f64).min((em - e_u).abs()) / 2.0,
            _ => FALLBACK_EPS,
        };
        let eps = eps.unwrap_or(default);
        Ok(Self { q, e_u, e_m, a, eps_freq: eps, eps_edge: eps })
    }

    pub fn with_eps(mut self, eps_freq: f64, eps_edge: f64) -> Self {
        self.eps_freq = eps_freq;
        self.eps_edge = eps_edge;
        self
    }

    pub fn classify_stats(&self, freq: &[f64], mono_per_vertex: f64) -> UmtClass {
        let u = vec![1.0 / self.q as f64; self.q];
        if sup_dist(freq, &u) <= self.eps_freq && (mono_per_vertex - self.e_u).abs() < self.eps_edge {
            return UmtClass::U;
        }
        if let (Some(a), Some(em)) = (self.a, self.e_m) {
            for j in 0..self.q {
                if sup_dist(freq, &ordered_vector(self.q, a, j)) <= self.eps_freq
                    && (mono_per_vertex - em).abs() < self.eps_edge
                {
                    return UmtClass::M(j);
                }
            }
        }
        UmtClass::T
    }

    pub fn classify(&self, g: &RegularGraph, sigma: &[usize]) -> UmtClass {
        self.classify_stats(&color_frequencies(sigma, self.q), count_mono(g, sigma) as f64 / g.n as f64)
    }
}

/// Closest reference frequency vector in the sup norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseClass {
    Disordered,
    Ordered(usize),
}

pub fn nearest_phase(freq: &[f64], a: Option<f64>) -> PhaseClass {
    let q = freq.len();
    let Some(a) = a else { return PhaseClass::Disordered };
    let mut best = (sup_dist(freq, &vec![1.0 / q as f64; q]), PhaseClass::Disordered);
    for j in 0..q {
        let d = sup_dist(freq, &ordered_vector(q, a, j));
        if d < best.0 {
            best = (d, PhaseClass::Ordered(j));
        }
    }
    best.1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    Disordered,
    Ordered(usize),
    Given(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub phase_label: usize,
    pub nearest: PhaseClass,
    pub color_frequencies: Vec<f64>,
    pub mono_per_vertex: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwTrace {
    pub q: usize,
    pub b: f64,
    pub n: usize,
    pub delta: usize,
    pub seed: u64,
    pub generator: String,
    /// Ordered-phase marginal used for `nearest`.
    pub a: Option<f64>,
    pub records: Vec<TraceRecord>,
}

impl SwTrace {
    pub fn fraction(&self, pred: impl Fn(&TraceRecord) -> bool) -> f64 {
        self.records.iter().filter(|r| pred(r)).count() as f64 / self.records.len().max(1) as f64
    }
}

fn initial_coloring(g: &RegularGraph, q: usize, a: Option<f64>, start: &Start, rng: &mut Rng) -> Result<Vec<usize>> {
    match start {
        Start::Disordered => Ok((0..g.n).map(|_| rng.random_range(0..q)).collect()),
        Start::Ordered(j) => {
            if *j >= q {
                return invalid(format!("ordered start color {j} out of range"));
            }
            match a {
                Some(a) if q > 1 => Ok((0..g.n)
                    .map(|_| {
                        if rng.random::<f64>() < a {
                            *j
                        } else {
                            let c = rng.random_range(0..q - 1);
                            if c >= *j {
                                c + 1
                            } else {
                                c
                            }
                        }
                    })
                    .collect()),
                _ => Ok(vec![*j; g.n]),
            }
        }
        Start::Given(c) => {
            if c.len() != g.n || c.iter().any(|&x| x >= q) {
                return invalid("given coloring does not match the graph or q");
            }
            Ok(c.clone())
        }
    }
}

/// Run `steps` Swendsen-Wang steps, recording statistics after each step. The
/// ordered-phase marginal used by the `Ordered` start and the `nearest` label is `a`
/// (typically [`ordered_marginal`] at the graph degree).
pub fn run_chain(
    g: &RegularGraph,
    q: usize,
    b: f64,
    steps: usize,
    start: &Start,
    seed: u64,
    a: Option<f64>,
) -> Result<SwTrace> {
    check_params(q, b)?;
    let mut rng = rng::from_seed(seed);
    let coloring = initial_coloring(g, q, a, start, &mut rng)?;
    let mut state = SwState::new(g, coloring)?;
    let mut ws = SwWorkspace::new(g.n);
    let all: Vec<usize> = (0..g.n).collect();
    let mut records = Vec::with_capacity(steps);
    for t in 1..=steps {
        sw_step_with(g, q, b, &mut state, &mut rng, &mut ws);
        let freq = color_frequencies(&state.coloring, q);
        records.push(TraceRecord {
            t,
            phase_label: phase_of(&state.coloring, &all, q)?,
            nearest: nearest_phase(&freq, a),
            color_frequencies: freq,
            mono_per_vertex: state.mono_edges as f64 / g.n as f64,
        });
    }
    Ok(SwTrace { q, b, n: g.n, delta: g.delta, seed, generator: rng::GENERATOR_NAME.into(), a, records })
}

/// Independent chains, chain `k` seeded with `seed ^ k`.
#[allow(clippy::too_many_arguments)]
pub fn run_chains(
    g: &RegularGraph,
    q: usize,
    b: f64,
    steps: usize,
    start: &Start,
    seed: u64,
    chains: usize,
    a: Option<f64>,
    exec: Exec,
) -> Result<Vec<SwTrace>> {
    exec.map(chains, |k| run_chain(g, q, b, steps, start, rng::task_seed(seed, k), a)).into_iter().collect()
}

/// Annealed-importance estimate of `ln Z` for the Potts model with activity `b` on `g`,
/// annealing from `B = 1` (where `Z = q^n`) along a linear schedule of `levels` steps
/// with one Swendsen-Wang move per level.
pub fn ais_log_partition(
    g: &RegularGraph,
    q: usize,
    b: f64,
    levels: usize,
    particles: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    check_params(q, b)?;
    if levels == 0 || particles == 0 {
        return invalid("levels and particles must be positive");
    }
    let log_w: Vec<f64> = exec.map(particles, |k| {
        let mut rng = rng::for_task(seed, k);
        let coloring: Vec<usize> = (0..g.n).map(|_| rng.random_range(0..q)).collect();
        let mut state = SwState { mono_edges: count_mono(g, &coloring), coloring };
        let mut ws = SwWorkspace::new(g.n);
        let mut lw = 0.0;
        let mut prev = 1.0f64;
        for l in 1..=levels {
            let cur = 1.0 + (b - 1.0) * l as f64 / levels as f64;
            lw += state.mono_edges as f64 * (cur.ln() - prev.ln());
            sw_step_with(g, q, cur, &mut state, &mut rng, &mut ws);
            prev = cur;
        }
        lw
    });
    let mx = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = log_w.iter().map(|w| (w - mx).exp()).sum::<f64>() / particles as f64;
    Ok(g.n as f64 * (q as f64).ln() + mx + mean.ln())
}
