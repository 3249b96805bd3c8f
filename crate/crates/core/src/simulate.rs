//! Direct simulation of the second-order walk on nodes.
//!
//! Each step draws one uniform variate and inverts the cumulative λ-weights
//! of the candidate next nodes, taken in increasing node order. Together with
//! the fixed generator this makes trajectories reproducible bit for bit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedEdge, Graph, Params};
use crate::kernel::Space;
use crate::rng::{self, WalkRng};
use crate::stationary::Measure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub nodes: Vec<usize>,
    pub seed: u64,
    pub params: Params,
    pub start_edge: DirectedEdge,
}

impl Trajectory {
    /// Number of transitions taken after the start edge.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 2
    }
}

/// Stateful sampler positioned on a directed edge `(prev, cur)`.
pub struct Walker<'a> {
    g: &'a Graph,
    p: Params,
    prev: usize,
    cur: usize,
    rng: WalkRng,
    weights: Vec<f64>,
}

impl<'a> Walker<'a> {
    pub fn new(g: &'a Graph, p: &Params, start: DirectedEdge, seed: u64) -> Result<Self> {
        if start.tail >= g.n() || start.head >= g.n() || !g.has_edge(start.tail, start.head) {
            return Err(Error::UnknownState(start.to_string()));
        }
        Ok(Self { g, p: *p, prev: start.tail, cur: start.head, rng: rng::seeded(seed), weights: Vec::new() })
    }

    pub fn current(&self) -> usize {
        self.cur
    }

    pub fn edge(&self) -> DirectedEdge {
        DirectedEdge::new(self.prev, self.cur)
    }

    /// Moves to the next node and returns it, or `DeadEnd` when every
    /// candidate has weight zero.
    pub fn step(&mut self) -> Result<usize> {
        let nbrs = self.g.neighbors(self.cur);
        self.weights.clear();
        let mut total = 0.0;
        for &x in nbrs {
            let w = self.p.lambda(self.g.classify(self.prev, x));
            total += w;
            self.weights.push(total);
        }
        if total <= 0.0 {
            return Err(Error::DeadEnd(self.edge().to_string()));
        }
        let u = rng::next_unit(&mut self.rng) * total;
        // First candidate whose cumulative weight exceeds u; zero-weight
        // candidates never qualify since their cumulative value repeats.
        let pick = self.weights.partition_point(|&c| c <= u).min(nbrs.len() - 1);
        let next = nbrs[pick];
        let w = self.p.lambda(self.g.classify(self.prev, next));
        if w <= 0.0 {
            return Err(Error::Precondition(format!("sampled a zero-probability move {} -> {next}", self.edge())));
        }
        self.prev = self.cur;
        self.cur = next;
        Ok(next)
    }
}

/// Runs `steps` transitions from `start`. A trapped walk returns
/// [`Error::Trapped`] carrying the trajectory up to the dead end.
pub fn walk(g: &Graph, p: &Params, start: DirectedEdge, steps: usize, seed: u64) -> Result<Trajectory> {
    let mut walker = Walker::new(g, p, start, seed)?;
    let mut nodes = Vec::with_capacity(steps + 2);
    nodes.extend([start.tail, start.head]);
    for _ in 0..steps {
        match walker.step() {
            Ok(v) => nodes.push(v),
            Err(Error::DeadEnd(edge)) => return Err(Error::Trapped { edge, prefix: nodes }),
            Err(e) => return Err(e),
        }
    }
    Ok(Trajectory { nodes, seed, params: *p, start_edge: start })
}

/// Independent trajectories with seeds `base_seed + i`, in task order.
pub fn walk_many(
    g: &Graph,
    p: &Params,
    start: DirectedEdge,
    steps: usize,
    base_seed: u64,
    count: usize,
) -> Result<Vec<Trajectory>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| walk(g, p, start, steps, base_seed.wrapping_add(i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupation {
    pub nodes: Measure,
    pub edges: Measure,
    pub wedges: Measure,
}

/// Visit frequencies of nodes, directed edges and wedges, counting only
/// positions at or after `burn_in`.
pub fn occupation(g: &Graph, tr: &Trajectory, burn_in: usize) -> Result<Occupation> {
    let len = tr.nodes.len();
    if burn_in + 2 >= len {
        return Err(Error::Precondition(format!("burn-in {burn_in} leaves no wedge in a trajectory of {len} nodes")));
    }
    let mut nodes = vec![0.0; g.n()];
    let mut edges = vec![0.0; g.num_directed_edges()];
    let mut wedges = vec![0.0; g.num_wedges()];
    let x = &tr.nodes;
    for i in burn_in..len {
        nodes[x[i]] += 1.0;
        if i >= 1 {
            edges[g.edge_id(DirectedEdge::new(x[i - 1], x[i])).unwrap()] += 1.0;
        }
        if i >= 2 {
            wedges[g.wedge_id(x[i - 2], x[i - 1], x[i]).unwrap()] += 1.0;
        }
    }
    let norm = |v: Vec<f64>, space| Measure::new(space, v).normalize();
    Ok(Occupation {
        nodes: norm(nodes, Space::Node),
        edges: norm(edges, Space::Edge),
        wedges: norm(wedges, Space::Wedge),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub target: usize,
    pub gaps: Vec<usize>,
    pub count: usize,
    pub mean: f64,
    pub max: usize,
}

/// Gaps between successive visits of `target`.
pub fn return_times(tr: &Trajectory, target: usize) -> Result<ReturnStats> {
    let visits: Vec<usize> = tr.nodes.iter().enumerate().filter(|&(_, &v)| v == target).map(|(i, _)| i).collect();
    if visits.len() < 2 {
        return Err(Error::NeverReturned(target));
    }
    let gaps: Vec<usize> = visits.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<usize>() as f64 / gaps.len() as f64;
    let max = *gaps.iter().max().unwrap();
    Ok(ReturnStats { target, count: gaps.len(), mean, max, gaps })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnExperiment {
    pub start_edge: DirectedEdge,
    pub trials: usize,
    pub base_seed: u64,
    pub returns: usize,
    pub frequency: f64,
}

/// Fraction of walks started on `start` that come back to `start.head`
/// before reaching a node flagged in `absorbing`. Trial `i` uses seed
/// `base_seed + i`.
pub fn return_before_absorption(
    g: &Graph,
    p: &Params,
    start: DirectedEdge,
    absorbing: &[bool],
    trials: usize,
    base_seed: u64,
    max_steps: usize,
) -> Result<ReturnExperiment> {
    let home = start.head;
    let outcomes: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut walker = Walker::new(g, p, start, base_seed.wrapping_add(i))?;
            for _ in 0..max_steps {
                let v = walker.step()?;
                if v == home {
                    return Ok(true);
                }
                if absorbing[v] {
                    return Ok(false);
                }
            }
            Err(Error::NoConvergence { iterations: max_steps, residual: f64::NAN })
        })
        .collect::<Result<_>>()?;
    let returns = outcomes.iter().filter(|&&b| b).count();
    Ok(ReturnExperiment { start_edge: start, trials, base_seed, returns, frequency: returns as f64 / trials as f64 })
}
