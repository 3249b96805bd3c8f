//! Conductance networks and effective resistance via a grounded Laplacian solve.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;

/// Undirected network with positive, symmetric conductances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    n: usize,
    conductances: BTreeMap<(usize, usize), f64>,
}

impl Network {
    pub fn new(n: usize) -> Self {
        Self { n, conductances: BTreeMap::new() }
    }

    /// Unit conductance on every edge of `g`.
    pub fn from_graph(g: &Graph) -> Self {
        let mut net = Self::new(g.n());
        for (u, v) in g.edges() {
            net.conductances.insert((u, v), 1.0);
        }
        net
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `c` to the conductance between `a` and `b`. Loops are ignored.
    pub fn add(&mut self, a: usize, b: usize, c: f64) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(Error::UnknownState(format!("network node {}", a.max(b))));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Precondition(format!("conductance {c} on {{{a}, {b}}} must be positive")));
        }
        if a != b {
            *self.conductances.entry((a.min(b), a.max(b))).or_insert(0.0) += c;
        }
        Ok(())
    }

    pub fn conductance(&self, a: usize, b: usize) -> f64 {
        self.conductances.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    pub fn conductances(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.conductances.iter().map(|(&k, &v)| (k, v))
    }

    /// Merges nodes according to `map` (old id → new id in `0..new_n`),
    /// summing parallel conductances and dropping the resulting loops.
    pub fn contract(&self, map: &[usize], new_n: usize) -> Result<Network> {
        if map.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: map.len() });
        }
        let mut out = Network::new(new_n);
        for (&(a, b), &c) in &self.conductances {
            out.add(map[a], map[b], c)?;
        }
        Ok(out)
    }

    /// Glues `source` into one node and `sink` into another; every other node
    /// keeps its relative order. Returns the network and the two glued ids.
    pub fn glue(&self, source: &[usize], sink: &[usize]) -> Result<(Network, usize, usize)> {
        let mut role = vec![0u8; self.n];
        for &s in source {
            role[s] = 1;
        }
        for &t in sink {
            if role[t] == 1 {
                return Err(Error::Precondition(format!("node {t} is both source and sink")));
            }
            role[t] = 2;
        }
        if source.is_empty() || sink.is_empty() {
            return Err(Error::Precondition("source and sink must be nonempty".into()));
        }
        let mut map = vec![0; self.n];
        let mut next = 2;
        for (i, r) in role.iter().enumerate() {
            map[i] = match r {
                1 => 0,
                2 => 1,
                _ => {
                    next += 1;
                    next - 1
                }
            };
        }
        Ok((self.contract(&map, next)?, 0, 1))
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in self.conductances.keys() {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Effective resistance between `a` and `b`: the potential at `a` when a
/// unit current enters at `a` and `b` is grounded.
pub fn effective_resistance(net: &Network, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::Precondition("effective resistance needs two distinct nodes".into()));
    }
    if a >= net.n || b >= net.n {
        return Err(Error::UnknownState(format!("network node {}", a.max(b))));
    }
    if !net.is_connected() {
        return Err(Error::Disconnected);
    }
    // Laplacian with row and column `b` deleted.
    let idx = |v: usize| if v < b { v } else { v - 1 };
    let m = net.n - 1;
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for (&(u, v), &c) in &net.conductances {
        if u != b {
            lap[(idx(u), idx(u))] += c;
        }
        if v != b {
            lap[(idx(v), idx(v))] += c;
        }
        if u != b && v != b {
            lap[(idx(u), idx(v))] -= c;
            lap[(idx(v), idx(u))] -= c;
        }
    }
    let mut rhs = DVector::zeros(m);
    rhs[idx(a)] = 1.0;
    let potential = linalg::solve(lap, rhs)?;
    Ok(potential[idx(a)])
}
