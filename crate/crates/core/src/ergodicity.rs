//! Irreducibility and period of kernel supports, and the graph-level
//! sufficient conditions for ergodicity of the wedge chain.

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Params};
use crate::kernel::{build_edge_kernel, build_wedge_kernel, Kernel};

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Strongly connected components of the support digraph.
pub fn components(k: &Kernel) -> Vec<Vec<usize>> {
    let mut dg = DiGraph::<(), ()>::with_capacity(k.dim(), k.nnz());
    let nodes: Vec<_> = (0..k.dim()).map(|_| dg.add_node(())).collect();
    for i in 0..k.dim() {
        for &(j, _) in k.row(i) {
            dg.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&dg)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    comps
}

/// Components with no arc leaving them.
pub fn closed_classes(k: &Kernel) -> Vec<Vec<usize>> {
    let comps = components(k);
    let mut label = vec![0; k.dim()];
    for (c, members) in comps.iter().enumerate() {
        for &i in members {
            label[i] = c;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .filter(|(c, members)| members.iter().all(|&i| k.row(i).iter().all(|&(j, _)| label[j] == *c)))
        .map(|(_, m)| m)
        .collect()
}

pub fn is_irreducible(k: &Kernel) -> bool {
    components(k).len() == 1
}

/// Period of one strongly connected class: gcd of `level(u) + 1 - level(v)`
/// over the arcs `u -> v` inside the class, with BFS levels from its first state.
pub fn class_period(k: &Kernel, members: &[usize]) -> usize {
    let mut inside = vec![false; k.dim()];
    for &i in members {
        inside[i] = true;
    }
    let mut level = vec![usize::MAX; k.dim()];
    let root = members[0];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut g = 0;
    while let Some(u) = queue.pop_front() {
        for &(v, _) in k.row(u) {
            if !inside[v] {
                continue;
            }
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            } else {
                g = gcd(g, (level[u] + 1).abs_diff(level[v]));
            }
        }
    }
    g
}

pub fn period(k: &Kernel) -> Result<usize> {
    let comps = components(k);
    if comps.len() != 1 {
        return Err(Error::NotIrreducible);
    }
    Ok(class_period(k, &comps[0]))
}

/// The unique closed class of a kernel, if there is exactly one.
pub fn unique_closed_class(k: &Kernel) -> Result<Vec<usize>> {
    let mut closed = closed_classes(k);
    if closed.len() == 1 {
        Ok(closed.pop().unwrap())
    } else {
        Err(Error::NotUnichain(closed.len()))
    }
}

/// Restriction of the wedge kernel to wedges of positive weight. With
/// `alpha = 0` the flat wedges are never entered, so the chain lives on the
/// remaining wedges.
pub fn live_wedge_kernel(g: &Graph, p: &Params) -> Result<(Kernel, Vec<usize>)> {
    let k = build_wedge_kernel(g, p)?;
    let keep: Vec<bool> = g.enumerate_wedges().iter().map(|w| p.lambda(w.kind) > 0.0).collect();
    k.restrict(&keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremCase {
    /// `alpha > 0`: irreducible.
    AlphaPositive,
    /// `alpha > 0` and a triangle: irreducible and aperiodic.
    AlphaPositiveTriangle,
    /// `alpha = 0`, min degree >= 2 and max degree > 2: irreducible.
    AlphaZero,
    /// No sufficient condition applies; only measurements are reported.
    OutsideHypotheses,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witnesses {
    pub triangle: Option<(usize, usize, usize)>,
    pub min_degree_violator: Option<usize>,
    pub cycle_graph: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityVerdict {
    /// Wedge chain on the positive-weight wedges.
    pub irreducible: bool,
    pub period: Option<usize>,
    pub edge_irreducible: bool,
    pub edge_period: Option<usize>,
    pub thm_case: TheoremCase,
    pub predicted_irreducible: bool,
    pub predicted_aperiodic: bool,
    /// Every prediction made is confirmed by the measured kernel structure.
    pub consistent: bool,
    pub witnesses: Witnesses,
    /// Set when a kernel could not be built (walk trapped at a leaf).
    pub dead_end: Option<String>,
}

/// Evaluates the sufficient ergodicity conditions and cross-checks them
/// against the support structure of the built kernels.
pub fn check_ergodicity(g: &Graph, p: &Params) -> Result<ErgodicityVerdict> {
    g.ensure_connected()?;
    let min_deg = g.min_degree();
    let max_deg = g.max_degree();
    let witnesses = Witnesses {
        triangle: g.find_triangle(),
        min_degree_violator: (0..g.n()).find(|&v| g.degree(v) < 2),
        cycle_graph: min_deg == 2 && max_deg == 2,
    };
    let thm_case = if p.alpha > 0.0 {
        if witnesses.triangle.is_some() {
            TheoremCase::AlphaPositiveTriangle
        } else {
            TheoremCase::AlphaPositive
        }
    } else if min_deg >= 2 && max_deg > 2 {
        TheoremCase::AlphaZero
    } else {
        TheoremCase::OutsideHypotheses
    };
    let predicted_irreducible = thm_case != TheoremCase::OutsideHypotheses;
    let predicted_aperiodic = thm_case == TheoremCase::AlphaPositiveTriangle;

    let (irreducible, period, edge_irreducible, edge_period, dead_end) =
        match (live_wedge_kernel(g, p), build_edge_kernel(g, p)) {
            (Ok((kw, _)), Ok(ke)) => {
                let wi = is_irreducible(&kw);
                let ei = is_irreducible(&ke);
                let wp = wi.then(|| period(&kw).unwrap());
                let ep = ei.then(|| period(&ke).unwrap());
                (wi, wp, ei, ep, None)
            }
            (Err(Error::DeadEnd(s)), _) | (_, Err(Error::DeadEnd(s))) => (false, None, false, None, Some(s)),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
    let consistent = (!predicted_irreducible || (irreducible && edge_irreducible))
        && (!predicted_aperiodic || (period == Some(1) && edge_period == Some(1)));
    Ok(ErgodicityVerdict {
        irreducible,
        period,
        edge_irreducible,
        edge_period,
        thm_case,
        predicted_irreducible,
        predicted_aperiodic,
        consistent,
        witnesses,
        dead_end,
    })
}

/// gcd of the lengths of all simple cycles of `g`, or `None` for a forest.
pub fn cycle_length_gcd(g: &Graph) -> Option<usize> {
    fn dfs(g: &Graph, start: usize, u: usize, depth: usize, on_path: &mut [bool], acc: &mut usize) {
        if *acc == 1 {
            return;
        }
        for &v in g.neighbors(u) {
            if v == start && depth >= 3 {
                *acc = gcd(*acc, depth);
            } else if v > start && !on_path[v] {
                on_path[v] = true;
                dfs(g, start, v, depth + 1, on_path, acc);
                on_path[v] = false;
            }
        }
    }
    let mut acc = 0;
    let mut on_path = vec![false; g.n()];
    for s in 0..g.n() {
        on_path[s] = true;
        dfs(g, s, s, 1, &mut on_path, &mut acc);
        on_path[s] = false;
    }
    (acc > 0).then_some(acc)
}

/// Returns `(graph aperiodic, non-backtracking kernel aperiodic)`: the first
/// means the cycle lengths of `g` have gcd one, the second that the
/// `alpha = 0` edge chain has period one. Agreement is an observation, not
/// an invariant.
pub fn aperiodicity_comparison(g: &Graph) -> Result<(bool, bool)> {
    let p = Params::new(0.0, 1.0, 1.0)?;
    let k = build_edge_kernel(g, &p)?;
    let kernel_period = period(&k)?;
    let graph_aperiodic = cycle_length_gcd(g) == Some(1);
    Ok((graph_aperiodic, kernel_period == 1))
}
