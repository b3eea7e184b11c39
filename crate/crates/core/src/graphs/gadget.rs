//! Bipartite gadgets with tree-attached terminals, and the graph `H^G` obtained by
//! wiring one gadget per vertex of `H`.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{RegularGraph, Role};
use crate::error::{invalid, Result};
use crate::rng;
use crate::treefix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub delta: usize,
    pub trees_per_side: usize,
    pub tree_depth: usize,
    pub n_core: usize,
    pub seed: u64,
}

impl GadgetSpec {
    /// Number of core vertices per side that lose an edge: `trees·(Δ−1)^depth`.
    pub fn removed(&self) -> usize {
        self.trees_per_side * (self.delta - 1).pow(self.tree_depth as u32)
    }

    /// Internal (non-leaf) vertices of one attached tree, root included.
    pub fn internal_per_tree(&self) -> usize {
        (0..self.tree_depth).map(|l| (self.delta - 1).pow(l as u32)).sum()
    }

    pub fn vertex_count(&self) -> usize {
        2 * (self.n_core + self.removed()) + 2 * self.trees_per_side * self.internal_per_tree()
    }
}

/// Bipartite core from Δ random perfect matchings between `V⁺` and `V⁻`
/// (`|V^±| = nCore + m′`) with `m′` edges of the first matching removed; the endpoints
/// of the removed edges on each side become the leaves of `treesPerSide` complete
/// `(Δ−1)`-ary trees of depth `treeDepth`. Tree roots keep degree `Δ−1`.
pub fn build_gadget(spec: &GadgetSpec) -> Result<RegularGraph> {
    let &GadgetSpec { delta, trees_per_side, tree_depth, n_core, seed } = spec;
    if delta < 3 {
        return invalid("gadget degree must be at least 3");
    }
    if trees_per_side == 0 || tree_depth == 0 {
        return invalid("need at least one tree of depth at least one per side");
    }
    let m_rem = spec.removed();
    if m_rem > n_core {
        return invalid(format!("m′ = {m_rem} exceeds nCore = {n_core}"));
    }
    let side = n_core + m_rem;
    let mut g = rng::from_seed(seed);
    let mut edges = Vec::new();
    let mut first: Vec<usize> = Vec::new();
    for k in 0..delta {
        let mut perm: Vec<usize> = (0..side).collect();
        perm.shuffle(&mut g);
        if k == 0 {
            first = perm;
        } else {
            edges.extend((0..side).map(|i| (i, side + perm[i])));
        }
    }
    let mut removed: Vec<usize> = index::sample(&mut g, side, m_rem).into_vec();
    removed.sort_unstable();
    let mut is_removed = vec![false; side];
    removed.iter().for_each(|&i| is_removed[i] = true);
    let mut first_edges: Vec<(usize, usize)> =
        (0..side).filter(|&i| !is_removed[i]).map(|i| (i, side + first[i])).collect();
    first_edges.extend(edges);
    let mut edges = first_edges;

    let mut roles = vec![Role::Uplus; side];
    roles.extend(vec![Role::Uminus; side]);
    let w_plus: Vec<usize> = removed.clone();
    let mut w_minus: Vec<usize> = removed.iter().map(|&i| side + first[i]).collect();
    w_minus.sort_unstable();
    w_plus.iter().for_each(|&v| roles[v] = Role::Wplus);
    w_minus.iter().for_each(|&v| roles[v] = Role::Wminus);

    let group = (delta - 1).pow(tree_depth as u32);
    let mut next = 2 * side;
    for (leaves, root_role) in [(&w_plus, Role::RootPlus), (&w_minus, Role::RootMinus)] {
        for t in 0..trees_per_side {
            let mut level: Vec<usize> = leaves[t * group..(t + 1) * group].to_vec();
            for depth in (0..tree_depth).rev() {
                let parents: Vec<usize> = (0..level.len() / (delta - 1)).map(|p| next + p).collect();
                next += parents.len();
                for (c, &child) in level.iter().enumerate() {
                    edges.push((child, parents[c / (delta - 1)]));
                }
                let role = if depth == 0 { root_role } else { Role::TreeInternal };
                roles.extend(std::iter::repeat_n(role, parents.len()));
                level = parents;
            }
        }
    }
    debug_assert_eq!(next, spec.vertex_count());
    let mut out = RegularGraph::new(next, delta, edges)?.with_roles(roles)?;
    out.seed = Some(seed);
    Ok(out)
}

/// Disjoint union of the gadgets with one extra edge per edge of `h`. Edges of `h` are
/// oriented from the smaller to the larger endpoint; each uses the next unused
/// `rootPlus` of the tail gadget and `rootMinus` of the head gadget.
pub fn build_reduction(h: &RegularGraph, gadgets: &[RegularGraph]) -> Result<RegularGraph> {
    if gadgets.len() != h.n {
        return invalid(format!("need one gadget per vertex of H: {} vs {}", gadgets.len(), h.n));
    }
    let delta = gadgets.first().map(|g| g.delta).unwrap_or(h.delta);
    let mut offsets = Vec::with_capacity(gadgets.len());
    let mut edges = Vec::new();
    let mut roles = Vec::new();
    let mut total = 0;
    for g in gadgets {
        let Some(r) = &g.roles else {
            return invalid("gadgets must carry roles");
        };
        offsets.push(total);
        edges.extend(g.edges.iter().map(|&(u, v)| (u + total, v + total)));
        roles.extend(r.iter().copied());
        total += g.n;
    }
    let plus: Vec<Vec<usize>> = gadgets.iter().map(|g| g.vertices_with_role(Role::RootPlus)).collect();
    let minus: Vec<Vec<usize>> = gadgets.iter().map(|g| g.vertices_with_role(Role::RootMinus)).collect();
    let mut used_plus = vec![0usize; h.n];
    let mut used_minus = vec![0usize; h.n];
    for &(a, b) in &h.edges {
        if a == b {
            return invalid("H must not contain self-loops");
        }
        let (tail, head) = (a.min(b), a.max(b));
        let Some(&rp) = plus[tail].get(used_plus[tail]) else {
            return invalid(format!("gadget {tail} has too few rootPlus vertices"));
        };
        let Some(&rm) = minus[head].get(used_minus[head]) else {
            return invalid(format!("gadget {head} has too few rootMinus vertices"));
        };
        used_plus[tail] += 1;
        used_minus[head] += 1;
        edges.push((rp + offsets[tail], rm + offsets[head]));
    }
    RegularGraph::new(total, delta, edges)?.with_roles(roles)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionConstants {
    pub p: f64,
    pub a: f64,
    pub d: f64,
    pub b_star: f64,
}

impl ReductionConstants {
    /// `C_H = D^{|E(H)|}`.
    pub fn c_h(&self, edges_of_h: usize) -> f64 {
        self.d.powi(edges_of_h as i32)
    }
}

/// `A` and `D` for a root marginal `p`.
pub fn reduction_weights(q: usize, b: f64, p: f64) -> (f64, f64) {
    let qm = q as f64 - 1.0;
    let a = 1.0 + (b - 1.0) * (p * p + (1.0 - p).powi(2) / qm);
    let d = 1.0 + (b - 1.0) * (2.0 * p * (1.0 - p) / (qm * qm) + (q as f64 - 2.0) * (1.0 - p).powi(2) / (qm * qm));
    (a, d)
}

pub fn reduction_constants(q: usize, delta: usize, b: f64) -> Result<ReductionConstants> {
    let bo = treefix::coexistence_activity(q, delta)?;
    if !(b > bo) {
        return invalid(format!("B = {b} must exceed the coexistence activity {bo}"));
    }
    let p = treefix::ordered_root_marginal(q, delta, b)?;
    let (a, d) = reduction_weights(q, b, p);
    Ok(ReductionConstants { p, a, d, b_star: a / d })
}
