//! Multigraphs from the pairing model, cycle counts, exact Gibbs oracles and the
//! bipartite gadget construction.

mod cycles;
mod gadget;
mod gibbs;
mod pairing;

pub use cycles::count_cycles;
pub use gadget::{
    build_gadget, build_reduction, reduction_constants, reduction_weights, GadgetSpec, ReductionConstants,
};
pub(crate) use gibbs::state_count as gibbs_state_count;
pub use gibbs::{brute_gibbs, decode_state, GibbsOracle, GIBBS_STATE_LIMIT};
pub use pairing::{
    double_factorial, enumerate_pairings, pairing_sample, pairing_to_graph, PairingIter, ENUMERATION_POINT_LIMIT,
};

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Role {
    Uplus,
    Uminus,
    Wplus,
    Wminus,
    TreeInternal,
    RootPlus,
    RootMinus,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Uplus => "Uplus",
            Role::Uminus => "Uminus",
            Role::Wplus => "Wplus",
            Role::Wminus => "Wminus",
            Role::TreeInternal => "treeInternal",
            Role::RootPlus => "rootPlus",
            Role::RootMinus => "rootMinus",
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Role::Uplus, Role::Uminus, Role::Wplus, Role::Wminus, Role::TreeInternal, Role::RootPlus, Role::RootMinus]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown role {s:?}")))
    }
}

/// An undirected multigraph with a nominal degree. Self-loops add 2 to the degree of
/// their vertex; parallel edges are repeated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularGraph {
    pub n: usize,
    pub delta: usize,
    /// Edges with `u <= v`, in construction order.
    pub edges: Vec<(usize, usize)>,
    pub roles: Option<Vec<Role>>,
    /// Seed of the sampler that produced the graph, if any.
    pub seed: Option<u64>,
}

impl RegularGraph {
    pub fn new(n: usize, delta: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            norm.push((u.min(v), u.max(v)));
        }
        Ok(Self { n, delta, edges: norm, roles: None, seed: None })
    }

    pub fn with_roles(mut self, roles: Vec<Role>) -> Result<Self> {
        if roles.len() != self.n {
            return invalid("one role per vertex required");
        }
        self.roles = Some(roles);
        Ok(self)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn is_regular(&self) -> bool {
        self.degrees().iter().all(|&d| d == self.delta)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn self_loops(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    /// Neighbor lists with multiplicity; a self-loop lists its vertex once.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            if u != v {
                adj[v].push(u);
            }
        }
        adj
    }

    /// A proper 2-coloring if one exists.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let adj = self.adjacency();
        let mut side = vec![u8::MAX; self.n];
        for s in 0..self.n {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if side[v] == u8::MAX {
                        side[v] = 1 - side[u];
                        stack.push(v);
                    } else if side[v] == side[u] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }

    pub fn vertices_with_role(&self, role: Role) -> Vec<usize> {
        match &self.roles {
            Some(r) => (0..self.n).filter(|&v| r[v] == role).collect(),
            None => Vec::new(),
        }
    }

    /// Text form: `n delta`, optional `# seed S` and `# role v name` lines, then one
    /// `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.delta);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed {seed}");
        }
        if let Some(roles) = &self.roles {
            for (v, r) in roles.iter().enumerate() {
                let _ = writeln!(s, "# role {v} {}", r.name());
            }
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("header: {e}"))))
            .collect::<Result<_>>()?;
        let [n, delta] = nums[..] else {
            return Err(Error::Parse("header must be `n delta`".into()));
        };
        let mut edges = Vec::new();
        let mut roles: Vec<Option<Role>> = vec![None; n];
        let mut any_role = false;
        let mut seed = None;
        for line in lines {
            if let Some(rest) = line.strip_prefix('#') {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                match toks.as_slice() {
                    ["role", v, name] => {
                        let v: usize = v.parse().map_err(|e| Error::Parse(format!("role vertex: {e}")))?;
                        if v >= n {
                            return Err(Error::Parse(format!("role vertex {v} out of range")));
                        }
                        roles[v] = Some(name.parse()?);
                        any_role = true;
                    }
                    ["seed", s] => seed = Some(s.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?),
                    _ => {}
                }
                continue;
            }
            let toks: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("edge line {line:?}: {e}"))))
                .collect::<Result<_>>()?;
            let [u, v] = toks[..] else {
                return Err(Error::Parse(format!("edge line must be `u v`: {line:?}")));
            };
            edges.push((u, v));
        }
        let mut g = RegularGraph::new(n, delta, edges)?;
        g.seed = seed;
        if any_role {
            let r: Option<Vec<Role>> = roles.into_iter().collect();
            g.roles = Some(r.ok_or_else(|| Error::Parse("roles must be given for every vertex".into()))?);
        }
        Ok(g)
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self { n, delta: n.saturating_sub(1), edges, roles: None, seed: None }
    }

    /// Path on `n` vertices.
    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|v| (v - 1, v)).collect();
        Self { n, delta: 2, edges, roles: None, seed: None }
    }

    /// Cycle on `n ≥ 3` vertices.
    pub fn cycle(n: usize) -> Self {
        let edges = (0..n).map(|v| (v.min((v + 1) % n), v.max((v + 1) % n))).collect();
        Self { n, delta: 2, edges, roles: None, seed: None }
    }
}
