//! Exact phase-restricted moments of the partition function over the pairing model.
//!
//! For color counts `n_i` and edge counts `e_ij` (with `Σ_{j≠i} e_ij + 2e_ii = Δ n_i`)
//! the number of pairings realising `e` is
//! `Π_i (Δn_i)! / (Π_{i<j} e_ij! · Π_i 2^{e_ii} e_ii!)` out of `(Δn−1)!!`. Everything is
//! accumulated in the log domain.

use crate::error::{invalid, Error, Result};
use crate::spinsys::InteractionMatrix;

/// Default bound on the number of lattice points visited by one exact evaluation.
pub const DEFAULT_TERM_LIMIT: u64 = 50_000_000;

struct LogFact(Vec<f64>);

impl LogFact {
    fn new(n: usize) -> Self {
        let mut t = vec![0.0; n + 1];
        for k in 1..=n {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        Self(t)
    }

    fn at(&self, k: usize) -> f64 {
        self.0[k]
    }
}

#[derive(Default)]
struct Lse {
    max: f64,
    sum: f64,
    any: bool,
}

impl Lse {
    fn push(&mut self, t: f64) {
        if !self.any {
            self.max = t;
            self.sum = 1.0;
            self.any = true;
        } else if t > self.max {
            self.sum = self.sum * (self.max - t).exp() + 1.0;
            self.max = t;
        } else {
            self.sum += (t - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.any {
            self.max + self.sum.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Integer color counts `n α`, rejecting non-integral entries.
pub fn counts_from_alpha(n: usize, alpha: &[f64]) -> Result<Vec<usize>> {
    let s: f64 = alpha.iter().sum();
    if alpha.iter().any(|a| !(*a >= 0.0)) || (s - 1.0).abs() > 1e-9 {
        return invalid("alpha must be a probability vector");
    }
    let mut counts = Vec::with_capacity(alpha.len());
    for a in alpha {
        let c = a * n as f64;
        let r = c.round();
        if (c - r).abs() > 1e-9 {
            return invalid(format!("n·alpha must be integral, got {c}"));
        }
        counts.push(r as usize);
    }
    if counts.iter().sum::<usize>() != n {
        return invalid("color counts do not add up to n");
    }
    Ok(counts)
}

fn check_parity(n: usize, delta: usize) -> Result<()> {
    if n == 0 || delta == 0 {
        return invalid("n and delta must be positive");
    }
    if (n * delta) % 2 == 1 {
        return invalid(format!("Δn must be even, got {}", n * delta));
    }
    Ok(())
}

/// `ln E[Z^α]` for explicit color counts `n α` and a `q×q` weight table.
pub fn ln_first_moment_counts(
    delta: usize,
    q: usize,
    weights: &[f64],
    counts: &[usize],
    term_limit: u64,
) -> Result<f64> {
    Ok(first_moment_lattice(delta, q, weights, counts, term_limit)?.0)
}

/// Log first moment and the number of lattice points visited.
fn first_moment_lattice(
    delta: usize,
    q: usize,
    weights: &[f64],
    counts: &[usize],
    term_limit: u64,
) -> Result<(f64, u64)> {
    let n: usize = counts.iter().sum();
    check_parity(n, delta)?;
    if counts.len() != q || weights.len() != q * q {
        return invalid("dimension mismatch");
    }
    let lf = LogFact::new(delta * n);
    let half = delta * n / 2;
    let ln_pairings = lf.at(delta * n) - half as f64 * 2f64.ln() - lf.at(half);
    let mut base = lf.at(n) - ln_pairings;
    for &c in counts {
        base += lf.at(delta * c) - lf.at(c);
    }

    let live: Vec<usize> = (0..q).filter(|&i| counts[i] > 0).collect();
    let pairs: Vec<(usize, usize)> =
        live.iter().flat_map(|&i| live.iter().filter(move |&&j| j > i).map(move |&j| (i, j))).collect();
    let mut last_use = vec![usize::MAX; q];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        last_use[i] = k;
        last_use[j] = k;
    }

    struct Ctx<'a> {
        q: usize,
        weights: &'a [f64],
        pairs: &'a [(usize, usize)],
        last_use: &'a [usize],
        live: &'a [usize],
        lf: &'a LogFact,
        visited: u64,
        limit: u64,
        acc: Lse,
    }

    fn rec(ctx: &mut Ctx, k: usize, rem: &mut [usize], partial: f64) -> Result<()> {
        ctx.visited += 1;
        if ctx.visited > ctx.limit {
            return Err(Error::Guard(format!("exact moment exceeds {} lattice points", ctx.limit)));
        }
        if k == ctx.pairs.len() {
            let mut t = partial;
            for &i in ctx.live {
                if rem[i] % 2 == 1 {
                    return Ok(());
                }
                let e = rem[i] / 2;
                if e > 0 {
                    let w = ctx.weights[i * ctx.q + i];
                    if w == 0.0 {
                        return Ok(());
                    }
                    t += e as f64 * (w.ln() - 2f64.ln()) - ctx.lf.at(e);
                }
            }
            ctx.acc.push(t);
            return Ok(());
        }
        let (i, j) = ctx.pairs[k];
        let w = ctx.weights[i * ctx.q + j];
        let top = if w == 0.0 { 0 } else { rem[i].min(rem[j]) };
        for e in 0..=top {
            rem[i] -= e;
            rem[j] -= e;
            let closes_parity = (ctx.last_use[i] == k && rem[i] % 2 == 1) || (ctx.last_use[j] == k && rem[j] % 2 == 1);
            if !closes_parity {
                let t = partial + if e > 0 { e as f64 * w.ln() } else { 0.0 } - ctx.lf.at(e);
                rec(ctx, k + 1, rem, t)?;
            }
            rem[i] += e;
            rem[j] += e;
        }
        Ok(())
    }

    let mut rem: Vec<usize> = counts.iter().map(|c| delta * c).collect();
    let mut ctx = Ctx {
        q,
        weights,
        pairs: &pairs,
        last_use: &last_use,
        live: &live,
        lf: &lf,
        visited: 0,
        limit: term_limit,
        acc: Lse::default(),
    };
    rec(&mut ctx, 0, &mut rem, base)?;
    Ok((ctx.acc.value(), ctx.visited))
}

/// `ln E[Z^α]` over the pairing model, `Z^α` summing the weights of colorings whose
/// color counts are `n α`.
pub fn ln_first_moment_exact(n: usize, delta: usize, m: &InteractionMatrix, alpha: &[f64]) -> Result<f64> {
    let counts = counts_from_alpha(n, alpha)?;
    ln_first_moment_counts(delta, m.q(), m.entries(), &counts, DEFAULT_TERM_LIMIT)
}

pub fn first_moment_exact(n: usize, delta: usize, m: &InteractionMatrix, alpha: &[f64]) -> Result<f64> {
    Ok(ln_first_moment_exact(n, delta, m, alpha)?.exp())
}

/// `ln E[(Z^α)²]`: a sum over overlap count matrices of the paired-spin first moment.
pub fn ln_second_moment_exact(
    n: usize,
    delta: usize,
    m: &InteractionMatrix,
    alpha: &[f64],
    term_limit: u64,
) -> Result<f64> {
    let counts = counts_from_alpha(n, alpha)?;
    check_parity(n, delta)?;
    let q = m.q();
    let weights = super::kron_square(q, m.entries());

    fn overlaps(
        q: usize,
        row: usize,
        col: usize,
        rows: &mut [usize],
        cols: &mut [usize],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if row == q {
            out.push(cur.clone());
            return;
        }
        let (nr, nc) = if col + 1 == q { (row + 1, 0) } else { (row, col + 1) };
        let range: Vec<usize> = if col + 1 == q {
            if rows[row] <= cols[col] {
                vec![rows[row]]
            } else {
                vec![]
            }
        } else {
            (0..=rows[row].min(cols[col])).collect()
        };
        for v in range {
            rows[row] -= v;
            cols[col] -= v;
            cur.push(v);
            overlaps(q, nr, nc, rows, cols, cur, out);
            cur.pop();
            rows[row] += v;
            cols[col] += v;
        }
    }
    let mut list = Vec::new();
    let (mut rows, mut cols) = (counts.clone(), counts.clone());
    overlaps(q, 0, 0, &mut rows, &mut cols, &mut Vec::new(), &mut list);
    list.retain(|g| (0..q).all(|k| (0..q).map(|i| g[i * q + k]).sum::<usize>() == counts[k]));

    let mut acc = Lse::default();
    let mut budget = term_limit;
    for gamma in &list {
        let (t, used) = first_moment_lattice(delta, q * q, &weights, gamma, budget)?;
        budget -= used;
        acc.push(t);
    }
    Ok(acc.value())
}

pub fn second_moment_exact(n: usize, delta: usize, m: &InteractionMatrix, alpha: &[f64]) -> Result<f64> {
    Ok(ln_second_moment_exact(n, delta, m, alpha, DEFAULT_TERM_LIMIT)?.exp())
}
