//! Subcommand arguments and implementations.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use potts_core::graphs::{
    brute_gibbs, build_gadget, build_reduction, count_cycles, enumerate_pairings, pairing_sample, pairing_to_graph,
    reduction_constants, GadgetSpec, RegularGraph, Role,
};
use potts_core::moments::{
    self, cycle_rate, ln_first_moment_counts, matrix_norm_p2_seeded, moment_report, potts_phase_diagram, psi1, psi2,
    NormOptions, ReportOptions, DEFAULT_TERM_LIMIT,
};
use potts_core::rng;
use potts_core::spinsys::{build_potts_matrix, cholesky_factor, ModelSpec};
use potts_core::swsim::{
    self, conductance, exact_sw_kernel, phase_cut, run_chains, stationary, sw_gap_check, PhaseClass, Start, SwTrace,
    UmtClass, UmtClassifier,
};
use potts_core::treefix::{potts_thresholds, SearchOptions};
use potts_core::verify::{self, CriterionOutcome, CRITERIA};
use potts_core::{Error, Exec, InteractionMatrix, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input;
use crate::output::{join, num, opt, Report, Table};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Serialized name of a unit-like enum value.
fn tag<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => String::new(),
    }
}

fn indexed(prefix: &str, q: usize) -> Vec<String> {
    (1..=q).map(|i| format!("{prefix}_{i}")).collect()
}

fn cells(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| num(*x)).collect()
}

#[derive(Args, Debug, Serialize)]
pub struct ModelArgs {
    /// Model JSON file, or `potts` together with --q and --B
    #[arg(long, default_value = "potts")]
    pub model: String,
    #[arg(long)]
    pub q: Option<usize>,
    /// Potts activity
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<f64>,
}

impl ModelArgs {
    fn build(&self) -> Result<InteractionMatrix> {
        if self.model == "potts" {
            let (Some(q), Some(b)) = (self.q, self.b) else {
                return Err(bad("the potts model needs --q and --B"));
            };
            return build_potts_matrix(q, b);
        }
        if self.q.is_some() || self.b.is_some() {
            return Err(bad("--q and --B only apply to --model potts"));
        }
        ModelSpec::parse(&std::fs::read_to_string(&self.model)?)?.build()
    }
}

fn search_options(seed: u64) -> SearchOptions {
    SearchOptions { seed, ..SearchOptions::default() }
}

#[derive(Args, Debug, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub delta: usize,
}

fn threshold_table() -> Table {
    Table::new(&["q", "delta", "Bu", "Bo", "Brc", "ordered"])
        .unit("Bu", "activity")
        .unit("Bo", "activity")
        .unit("Brc", "activity")
}

pub fn thresholds(a: &ThresholdArgs) -> Result<Report> {
    let th = potts_thresholds(a.q, a.delta)?;
    let mut t = threshold_table();
    t.push(vec![a.q.to_string(), a.delta.to_string(), num(th.bu), num(th.bo), num(th.brc), th.ordered().to_string()]);
    Ok(Report { value: serde_json::to_value(th)?, table: Some(t), ..Report::default() })
}

#[derive(Args, Debug, Serialize)]
pub struct FixpointArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub delta: usize,
}

pub fn fixpoints(a: &FixpointArgs, seed: u64, exec: Exec) -> Result<Report> {
    let m = a.model.build()?;
    let q = m.q();
    let fps = moments::candidate_fixpoints(&m, a.delta, &search_options(seed), exec)?;
    let mut header: Vec<String> =
        ["index", "t", "x", "stability", "hessian", "spectral_radius", "psi1"].map(String::from).into();
    header.extend(indexed("r", q));
    header.extend(indexed("alpha", q));
    let mut t = Table::with_header(header).unit("psi1", "nats").unit("alpha_*", "probability");
    for (k, fp) in fps.iter().enumerate() {
        let radius = fp.jacobian_eigen.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut row = vec![
            k.to_string(),
            fp.potts.map(|p| p.t.to_string()).unwrap_or_default(),
            opt(fp.potts.map(|p| p.x)),
            tag(&fp.stability),
            tag(&fp.hessian),
            num(radius),
            num(psi1(&m, a.delta, &fp.alpha)?),
        ];
        row.extend(cells(&fp.r));
        row.extend(cells(&fp.alpha));
        t.push(row);
    }
    Ok(Report { value: serde_json::to_value(&fps)?, table: Some(t), ..Report::default() })
}

#[derive(Args, Debug, Serialize)]
pub struct PhaseArgs {
    #[arg(long)]
    pub q: usize,
    #[arg(long)]
    pub delta: usize,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: f64,
}

fn phase_table() -> Table {
    Table::new(&["q", "delta", "B", "regime", "dif", "majority_ratio", "dominant", "error"])
        .unit("B", "activity")
        .unit("dif", "nats")
}

fn phase_row(q: usize, delta: usize, b: f64) -> Vec<String> {
    let head = vec![q.to_string(), delta.to_string(), num(b)];
    match potts_phase_diagram(q, delta, b) {
        Ok(d) => {
            let dominant: Vec<String> = d.dominant.iter().map(|p| join(&p.alpha)).collect();
            let tail = [tag(&d.regime), opt(d.dif), opt(d.majority_ratio), dominant.join(" "), String::new()];
            head.into_iter().chain(tail).collect()
        }
        Err(e) => head.into_iter().chain(["", "", "", "", &e.to_string()].map(String::from)).collect(),
    }
}

pub fn phase_diagram(a: &PhaseArgs) -> Result<Report> {
    let d = potts_phase_diagram(a.q, a.delta, a.b)?;
    let mut t = phase_table();
    t.push(phase_row(a.q, a.delta, a.b));
    Ok(Report { value: serde_json::to_value(d)?, table: Some(t), ..Report::default() })
}

#[derive(Args, Debug, Serialize)]
pub struct MomentArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub delta: usize,
    /// Evaluate at this phase only, comma separated
    #[arg(long)]
    pub alpha: Option<String>,
    /// Add the exact rate (1/n) ln E[Z^α] at this n, with nα rounded to integers
    #[arg(long)]
    pub exact_n: Option<usize>,
}

/// Largest-remainder rounding of `nα` to integer counts.
fn round_counts(n: usize, alpha: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = alpha.iter().map(|a| a * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())).then(i.cmp(&j)));
    let short = n.saturating_sub(counts.iter().sum());
    for &i in order.iter().cycle().take(short) {
        counts[i] += 1;
    }
    counts
}

pub fn moments(a: &MomentArgs, seed: u64, exec: Exec) -> Result<Report> {
    let m = a.model.build()?;
    let q = m.q();
    let opts = ReportOptions { search: search_options(seed), ..ReportOptions::default() };
    let report = moment_report(&m, a.delta, &opts, exec)?;
    let points: Vec<Vec<f64>> = match &a.alpha {
        Some(s) => {
            let alpha = input::float_list(s)?;
            if alpha.len() != q {
                return Err(bad(format!("--alpha needs {q} entries")));
            }
            vec![alpha]
        }
        None => report.phases.iter().map(|p| p.alpha.clone()).collect(),
    };
    let mut header = indexed("alpha", q);
    header.extend(["psi1", "psi2", "norm", "dominant"].map(String::from));
    if a.exact_n.is_some() {
        header.push("exact_rate".into());
    }
    let mut t = Table::with_header(header).unit("alpha_*", "probability").unit("psi1", "nats").unit("psi2", "nats");
    if a.exact_n.is_some() {
        t = t.unit("exact_rate", "nats");
    }
    let mut rows = Vec::new();
    for alpha in &points {
        let v1 = psi1(&m, a.delta, alpha)?;
        let v2 = psi2(&m, a.delta, alpha, &opts.psi2, exec)?.value;
        let dominant = v1 >= report.psi1_max - 1e-9;
        let exact = match a.exact_n {
            Some(n) => {
                let counts = round_counts(n, alpha);
                Some(ln_first_moment_counts(a.delta, q, m.entries(), &counts, DEFAULT_TERM_LIMIT)? / n as f64)
            }
            None => None,
        };
        let mut row = cells(alpha);
        row.extend([num(v1), num(v2), opt(report.norm_value), dominant.to_string()]);
        if a.exact_n.is_some() {
            row.push(opt(exact));
        }
        t.push(row);
        rows.push(json!({ "alpha": alpha, "psi1": v1, "psi2": v2, "dominant": dominant, "exact_rate": exact }));
    }
    let value = json!({
        "psi1_max": report.psi1_max,
        "psi2_max": report.psi2_max,
        "norm": report.norm_value,
        "rows": rows,
        "phases": report.phases,
        "small_graph": report.small_graph,
    });
    Ok(Report { value, table: Some(t), ..Report::default() })
}

#[derive(Args, Debug, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 3)]
    pub delta: usize,
    /// Defaults to Δ/(Δ−1)
    #[arg(long)]
    pub p: Option<f64>,
}

pub fn norm(a: &NormArgs, seed: u64, exec: Exec) -> Result<Report> {
    let m = a.model.build()?;
    let q = m.q();
    let p = a.p.unwrap_or(a.delta as f64 / (a.delta as f64 - 1.0));
    let bhat = cholesky_factor(&m)?;
    let seeds: Vec<Vec<f64>> = moments::candidate_fixpoints(&m, a.delta, &search_options(seed), exec)
        .map(|f| f.into_iter().map(|f| f.r).collect())
        .unwrap_or_default();
    let res = matrix_norm_p2_seeded(q, &bhat, p, &seeds, &NormOptions { seed, ..NormOptions::default() }, exec)?;
    let scaled = a.delta as f64 * res.value.ln();
    let mut header: Vec<String> = ["p", "norm", "delta_ln_norm"].map(String::from).into();
    header.extend(indexed("argmax", q));
    let mut t = Table::with_header(header).unit("delta_ln_norm", "nats");
    let mut row = vec![num(p), num(res.value), num(scaled)];
    row.extend(cells(&res.argmax));
    t.push(row);
    let value = json!({ "p": p, "norm": res.value, "delta_ln_norm": scaled, "argmax": res.argmax });
    Ok(Report { value, table: Some(t), ..Report::default() })
}

#[derive(Args, Debug, Serialize, Clone, Copy)]
pub struct GadgetShape {
    #[arg(long)]
    pub delta: usize,
    #[arg(long)]
    pub trees_per_side: usize,
    #[arg(long)]
    pub tree_depth: usize,
    #[arg(long)]
    pub n_core: usize,
}

impl GadgetShape {
    fn spec(self, seed: u64) -> GadgetSpec {
        GadgetSpec {
            delta: self.delta,
            trees_per_side: self.trees_per_side,
            tree_depth: self.tree_depth,
            n_core: self.n_core,
            seed,
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphCommand {
    /// Uniform pairing-model sample
    Sample(SampleArgs),
    /// Every pairing of a small configuration
    Enumerate(SampleArgs),
    /// Cycle counts up to a length
    Cycles(CyclesArgs),
    /// Bipartite gadget
    Gadget(GadgetShape),
    /// Gadget reduction of a graph H
    Reduce(ReduceArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub delta: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CyclesArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub kmax: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ReduceArgs {
    /// Graph file of H
    #[arg(long)]
    pub h: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: GadgetShape,
}

fn edge_table(g: &RegularGraph) -> Table {
    let mut t = Table::new(&["u", "v"]);
    for &(u, v) in &g.edges {
        t.push(vec![u.to_string(), v.to_string()]);
    }
    t
}

fn graph_report(g: RegularGraph) -> Result<Report> {
    Ok(Report {
        value: serde_json::to_value(&g)?,
        table: Some(edge_table(&g)),
        text: Some(g.to_text()),
        ..Report::default()
    })
}

fn reduce_graph(h: &RegularGraph, shape: GadgetShape, seed: u64) -> Result<RegularGraph> {
    let gadgets: Vec<RegularGraph> =
        (0..h.n).map(|v| build_gadget(&shape.spec(rng::task_seed(seed, v)))).collect::<Result<_>>()?;
    build_reduction(h, &gadgets)
}

pub fn graph(c: &GraphCommand, seed: u64) -> Result<Report> {
    match c {
        GraphCommand::Sample(a) => graph_report(pairing_sample(a.n, a.delta, seed)?),
        GraphCommand::Enumerate(a) => {
            let mut t = Table::new(&["index", "edges", "self_loops"]);
            let mut all = Vec::new();
            for (k, p) in enumerate_pairings(a.n, a.delta)?.enumerate() {
                let g = pairing_to_graph(a.n, a.delta, &p);
                let edges: Vec<String> = g.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
                t.push(vec![k.to_string(), edges.join(" "), g.self_loops().to_string()]);
                all.push(g.edges);
            }
            Ok(Report { value: json!({ "pairings": all }), table: Some(t), ..Report::default() })
        }
        GraphCommand::Cycles(a) => {
            let g = input::read_graph(&a.graph)?;
            let counts = count_cycles(&g, a.kmax)?;
            let mut t = Table::new(&["k", "count", "expected"]).unit("count", "count").unit("expected", "count");
            for (i, c) in counts.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), c.to_string(), num(cycle_rate(g.delta, i + 1))]);
            }
            Ok(Report { value: json!({ "counts": counts }), table: Some(t), ..Report::default() })
        }
        GraphCommand::Gadget(shape) => graph_report(build_gadget(&shape.spec(seed))?),
        GraphCommand::Reduce(a) => graph_report(reduce_graph(&input::read_graph(&a.h)?, a.shape, seed)?),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct GadgetSummaryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: GadgetShape,
    /// With --B, also report the reduction constants
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<f64>,
    /// Also write the gadget graph to FILE
    #[arg(long, value_name = "FILE")]
    pub save: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReduceSummaryArgs {
    #[arg(long)]
    pub h: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: GadgetShape,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[arg(long, value_name = "FILE")]
    pub save: Option<PathBuf>,
}

fn constants(q: Option<usize>, b: Option<f64>, delta: usize) -> Result<Option<potts_core::graphs::ReductionConstants>> {
    match (q, b) {
        (Some(q), Some(b)) => Ok(Some(reduction_constants(q, delta, b)?)),
        (None, None) => Ok(None),
        _ => Err(bad("--q and --B go together")),
    }
}

pub fn gadget_summary(a: &GadgetSummaryArgs, seed: u64) -> Result<Report> {
    let spec = a.shape.spec(seed);
    let rc = constants(a.q, a.b, spec.delta)?;
    let g = build_gadget(&spec)?;
    let roots = |r| g.vertices_with_role(r).len().to_string();
    let mut t = Table::new(&["n", "edges", "removed", "roots_plus", "roots_minus", "p", "A", "D", "B_star"])
        .unit("p", "probability");
    t.push(vec![
        g.n.to_string(),
        g.edges.len().to_string(),
        spec.removed().to_string(),
        roots(Role::RootPlus),
        roots(Role::RootMinus),
        opt(rc.map(|c| c.p)),
        opt(rc.map(|c| c.a)),
        opt(rc.map(|c| c.d)),
        opt(rc.map(|c| c.b_star)),
    ]);
    let value = json!({ "n": g.n, "edges": g.edges.len(), "removed": spec.removed(), "constants": rc });
    let files = a.save.iter().map(|p| (p.clone(), g.to_text())).collect();
    Ok(Report { value, table: Some(t), files, ..Report::default() })
}

pub fn reduce_summary(a: &ReduceSummaryArgs, seed: u64) -> Result<Report> {
    let rc = constants(a.q, a.b, a.shape.delta)?;
    let h = input::read_graph(&a.h)?;
    let g = reduce_graph(&h, a.shape, seed)?;
    let c_h = rc.map(|c| c.c_h(h.edges.len()));
    let mut t = Table::new(&["n", "edges", "h_vertices", "h_edges", "D", "B_star", "C_H"]);
    t.push(vec![
        g.n.to_string(),
        g.edges.len().to_string(),
        h.n.to_string(),
        h.edges.len().to_string(),
        opt(rc.map(|c| c.d)),
        opt(rc.map(|c| c.b_star)),
        opt(c_h),
    ]);
    let value = json!({ "n": g.n, "edges": g.edges.len(), "h_edges": h.edges.len(), "constants": rc, "C_H": c_h });
    let files = a.save.iter().map(|p| (p.clone(), g.to_text())).collect();
    Ok(Report { value, table: Some(t), files, ..Report::default() })
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwCommand {
    /// Simulate independent chains and record per-step statistics
    Run(SwRunArgs),
    /// Exact transition matrix, stationary law and conductance of a cut
    Exact(SwExactArgs),
    /// Compare E_m/E_u with 1/(1−1/B) at the coexistence activity
    Gap(ThresholdArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct SwRunArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub q: usize,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: f64,
    #[arg(long)]
    pub steps: usize,
    /// `disordered`, `ordered:J` or `given:C1,C2,...` (colors from 1)
    #[arg(long, default_value = "disordered")]
    pub start: String,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Tolerance of the frequency condition in the U/M/T classification
    #[arg(long)]
    pub eps_freq: Option<f64>,
    /// Tolerance of the edge-density condition in the U/M/T classification
    #[arg(long)]
    pub eps_edge: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SwExactArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub q: usize,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: f64,
    /// `phase:J`: states whose majority color is J (from 1)
    #[arg(long, default_value = "phase:1")]
    pub cut: String,
}

fn parse_start(s: &str, q: usize) -> Result<Start> {
    match s.split_once(':') {
        None if s == "disordered" => Ok(Start::Disordered),
        Some(("ordered", j)) => Ok(Start::Ordered(input::color(j, q)?)),
        Some(("given", list)) => Ok(Start::Given(list.split(',').map(|c| input::color(c, q)).collect::<Result<_>>()?)),
        _ => Err(bad(format!("unknown start {s:?}"))),
    }
}

fn phase_name(p: PhaseClass) -> String {
    match p {
        PhaseClass::Disordered => "disordered".into(),
        PhaseClass::Ordered(j) => format!("ordered:{}", j + 1),
    }
}

fn umt_name(c: UmtClass) -> String {
    match c {
        UmtClass::U => "U".into(),
        UmtClass::M(j) => format!("M:{}", j + 1),
        UmtClass::T => "T".into(),
    }
}

fn classifier(q: usize, delta: usize, b: f64) -> UmtClassifier {
    UmtClassifier::new(q, delta, b, None).unwrap_or(UmtClassifier {
        q,
        e_u: swsim::e_uniform(q, delta, b),
        e_m: None,
        a: None,
        eps_freq: swsim::FALLBACK_EPS,
        eps_edge: swsim::FALLBACK_EPS,
    })
}

fn sw_run(a: &SwRunArgs, seed: u64, exec: Exec) -> Result<Report> {
    let g = input::read_graph(&a.graph)?;
    let start = parse_start(&a.start, a.q)?;
    let mut cls = classifier(a.q, g.delta, a.b);
    cls = cls.clone().with_eps(a.eps_freq.unwrap_or(cls.eps_freq), a.eps_edge.unwrap_or(cls.eps_edge));
    let traces: Vec<SwTrace> = run_chains(&g, a.q, a.b, a.steps, &start, seed, a.chains, cls.a, exec)?;

    let mut header: Vec<String> =
        ["chain", "t", "phase_label", "nearest", "umt", "mono_per_vertex"].map(String::from).into();
    header.extend(indexed("freq", a.q));
    let mut trace = Table::with_header(header).unit("mono_per_vertex", "count").unit("freq_*", "probability");
    let mut summary = Table::new(&["chain", "seed", "steps", "ordered", "u", "m", "t", "mean_mono"])
        .unit("ordered", "probability")
        .unit("u", "probability")
        .unit("m", "probability")
        .unit("t", "probability")
        .unit("mean_mono", "count");
    let mut chains = Vec::new();
    for (k, tr) in traces.iter().enumerate() {
        let mut counts = [0usize; 3];
        for r in &tr.records {
            let c = cls.classify_stats(&r.color_frequencies, r.mono_per_vertex);
            counts[match c {
                UmtClass::U => 0,
                UmtClass::M(_) => 1,
                UmtClass::T => 2,
            }] += 1;
            let mut row = vec![
                k.to_string(),
                r.t.to_string(),
                (r.phase_label + 1).to_string(),
                phase_name(r.nearest),
                umt_name(c),
                num(r.mono_per_vertex),
            ];
            row.extend(cells(&r.color_frequencies));
            trace.push(row);
        }
        let steps = tr.records.len().max(1) as f64;
        let ordered = tr.fraction(|r| matches!(r.nearest, PhaseClass::Ordered(_)));
        let mean = tr.records.iter().map(|r| r.mono_per_vertex).sum::<f64>() / steps;
        let frac = counts.map(|c| c as f64 / steps);
        summary.push(vec![
            k.to_string(),
            tr.seed.to_string(),
            tr.records.len().to_string(),
            num(ordered),
            num(frac[0]),
            num(frac[1]),
            num(frac[2]),
            num(mean),
        ]);
        chains.push(json!({
            "seed": tr.seed, "ordered": ordered, "u": frac[0], "m": frac[1], "t": frac[2], "mean_mono": mean,
        }));
    }
    let value = json!({ "classifier": cls, "chains": chains, "traces": traces });
    Ok(Report { value, table: Some(trace), summary: Some(summary), ..Report::default() })
}

fn sw_exact(a: &SwExactArgs, exec: Exec) -> Result<Report> {
    let g = input::read_graph(&a.graph)?;
    let color = match a.cut.split_once(':') {
        Some(("phase", j)) => input::color(j, a.q)?,
        _ => return Err(bad(format!("unknown cut {:?}", a.cut))),
    };
    let k = exact_sw_kernel(&g, a.q, a.b, exec)?;
    let pi = stationary(&k);
    let gibbs = brute_gibbs(&g, &build_potts_matrix(a.q, a.b)?)?.gibbs();
    let gibbs_dist = pi.iter().zip(&gibbs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let cut = phase_cut(a.q, g.n, color);
    let mass: f64 = cut.iter().zip(&pi).filter(|(s, _)| **s).map(|(_, p)| p).sum();
    let phi = conductance(&k, &pi, &cut)?;
    let mut t =
        Table::new(&["states", "row_sum_error", "detailed_balance_error", "gibbs_distance", "cut_mass", "conductance"])
            .unit("cut_mass", "probability");
    let (rs, db) = (k.row_sum_error(), k.detailed_balance_error(&pi));
    t.push(vec![k.states().to_string(), num(rs), num(db), num(gibbs_dist), num(mass), num(phi)]);
    let value = json!({
        "states": k.states(), "row_sum_error": rs, "detailed_balance_error": db,
        "gibbs_distance": gibbs_dist, "cut_mass": mass, "conductance": phi, "stationary": pi,
    });
    Ok(Report { value, table: Some(t), ..Report::default() })
}

pub fn sw(c: &SwCommand, seed: u64, exec: Exec) -> Result<Report> {
    match c {
        SwCommand::Run(a) => sw_run(a, seed, exec),
        SwCommand::Exact(a) => sw_exact(a, exec),
        SwCommand::Gap(a) => {
            let g = sw_gap_check(a.q, a.delta)?;
            let mut t = Table::new(&["q", "delta", "B", "e_u", "e_m", "ratio", "threshold", "holds"])
                .unit("B", "activity")
                .unit("e_u", "count")
                .unit("e_m", "count");
            t.push(vec![
                g.q.to_string(),
                g.delta.to_string(),
                num(g.b),
                num(g.e_u),
                num(g.e_m),
                num(g.ratio),
                num(g.threshold),
                g.holds.to_string(),
            ]);
            Ok(Report { value: serde_json::to_value(g)?, table: Some(t), ..Report::default() })
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value = "primary", value_parser = ["primary"])]
    pub suite: String,
    /// Run only these criteria, e.g. `1,7,9` or `1..3`
    #[arg(long)]
    pub only: Option<String>,
}

pub fn verify(a: &VerifyArgs, exec: Exec) -> Result<Report> {
    let ids = match &a.only {
        Some(s) => input::int_grid(s)?,
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let outcomes: Vec<CriterionOutcome> = ids
        .iter()
        .map(|&id| verify::run_criterion(id, exec).ok_or_else(|| bad(format!("no criterion {id}"))))
        .collect::<Result<_>>()?;
    let passed = verify::suite_passed(&outcomes);
    let mut t = Table::new(&["id", "title", "passed", "gating", "elapsed_secs", "limit_secs", "detail"])
        .unit("elapsed_secs", "seconds")
        .unit("limit_secs", "seconds");
    let mut text = String::new();
    for o in &outcomes {
        t.push(vec![
            o.id.to_string(),
            o.title.clone(),
            o.passed.to_string(),
            o.gating.to_string(),
            format!("{:.3}", o.elapsed_secs),
            num(o.limit_secs),
            o.detail.clone(),
        ]);
        text.push_str(&format!("{o}\n"));
    }
    let gating = outcomes.iter().filter(|o| o.gating).count();
    let ok = outcomes.iter().filter(|o| o.gating && o.passed).count();
    text.push_str(&format!(
        "suite {}: {} ({ok}/{gating} gating criteria passed)\n",
        a.suite,
        if passed { "PASS" } else { "FAIL" }
    ));
    let value = json!({ "suite": a.suite, "passed": passed, "criteria": outcomes });
    Ok(Report { value, table: Some(t), text: Some(text), failed: !passed, ..Report::default() })
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepCommand {
    /// Thresholds over a q × Δ grid
    Thresholds(GridArgs),
    /// Phase diagram over a q × Δ × B grid
    PhaseDiagram(GridArgs),
    /// Potts moment exponents over a q × Δ × B grid
    Moments(GridArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GridArgs {
    /// Integers: `3`, `3..8` or a comma list
    #[arg(long)]
    pub q: String,
    #[arg(long)]
    pub delta: String,
    /// Floats: `lo:hi:n` or a comma list; ignored by the threshold sweep
    #[arg(long = "B", default_value = "")]
    #[serde(rename = "B")]
    pub b: String,
}

fn moment_row(q: usize, delta: usize, b: f64, seed: u64, exec: Exec) -> Vec<String> {
    let head = vec![q.to_string(), delta.to_string(), num(b)];
    let res = build_potts_matrix(q, b).and_then(|m| {
        let opts = ReportOptions { search: search_options(seed), ..ReportOptions::default() };
        moment_report(&m, delta, &opts, exec)
    });
    let tail = match res {
        Ok(r) => [num(r.psi1_max), num(r.psi2_max), opt(r.norm_value), r.dominant_set.len().to_string(), String::new()],
        Err(e) => ["", "", "", "", &e.to_string()].map(String::from),
    };
    head.into_iter().chain(tail).collect()
}

pub fn sweep(c: &SweepCommand, seed: u64, exec: Exec) -> Result<Report> {
    let (a, with_b) = match c {
        SweepCommand::Thresholds(a) => (a, false),
        SweepCommand::PhaseDiagram(a) | SweepCommand::Moments(a) => (a, true),
    };
    let qs = input::int_grid(&a.q)?;
    let deltas = input::int_grid(&a.delta)?;
    let bs = if with_b { input::float_grid(&a.b)? } else { vec![f64::NAN] };
    let mut grid = Vec::with_capacity(qs.len() * deltas.len() * bs.len());
    for &q in &qs {
        for &d in &deltas {
            grid.extend(bs.iter().map(|&b| (q, d, b)));
        }
    }
    let (mut t, rows): (Table, Vec<Vec<String>>) = match c {
        SweepCommand::Thresholds(_) => {
            let mut t = threshold_table();
            t.header.push("error".into());
            let rows = exec.map_slice(&grid, |&(q, d, _)| {
                let head = vec![q.to_string(), d.to_string()];
                let tail = match potts_thresholds(q, d) {
                    Ok(th) => [num(th.bu), num(th.bo), num(th.brc), th.ordered().to_string(), String::new()],
                    Err(e) => ["", "", "", "", &e.to_string()].map(String::from),
                };
                head.into_iter().chain(tail).collect()
            });
            (t, rows)
        }
        SweepCommand::PhaseDiagram(_) => (phase_table(), exec.map_slice(&grid, |&(q, d, b)| phase_row(q, d, b))),
        SweepCommand::Moments(_) => {
            let t = Table::new(&["q", "delta", "B", "psi1_max", "psi2_max", "norm", "dominant", "error"])
                .unit("B", "activity")
                .unit("psi1_max", "nats")
                .unit("psi2_max", "nats");
            (t, exec.map_slice(&grid, |&(q, d, b)| moment_row(q, d, b, seed, exec)))
        }
    };
    let failed = rows.iter().any(|r| !r.last().is_some_and(String::is_empty));
    let value: Vec<Value> = rows
        .iter()
        .map(|r| Value::Object(t.header.iter().cloned().zip(r.iter().map(|s| Value::String(s.clone()))).collect()))
        .collect();
    t.rows = rows;
    Ok(Report { value: Value::Array(value), table: Some(t), failed, ..Report::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_the_total() {
        assert_eq!(round_counts(12, &[1.0 / 3.0; 3]), vec![4, 4, 4]);
        assert_eq!(round_counts(10, &[0.55, 0.45]), vec![6, 4]);
        assert_eq!(round_counts(7, &[0.5, 0.25, 0.25]).iter().sum::<usize>(), 7);
    }

    #[test]
    fn start_parsing() {
        assert_eq!(parse_start("disordered", 3).unwrap(), Start::Disordered);
        assert_eq!(parse_start("ordered:2", 3).unwrap(), Start::Ordered(1));
        assert_eq!(parse_start("given:1,3", 3).unwrap(), Start::Given(vec![0, 2]));
        assert!(parse_start("ordered:4", 3).is_err());
        assert!(parse_start("hot", 3).is_err());
    }
}
