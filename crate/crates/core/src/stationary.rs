//! Stationary measures on the wedge and edge spaces and the relations
//! between the wedge, edge and node levels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ergodicity::{class_period, unique_closed_class};
use crate::error::{Error, Result};
use crate::graph::{Graph, Params};
use crate::kernel::{wedge_choice_prob, Kernel, Space};
use crate::linalg::{self, tv_distance};

/// Nonnegative measure indexed by the canonical state order of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub space: Space,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl Measure {
    pub fn new(space: Space, values: Vec<f64>) -> Self {
        let total: f64 = values.iter().sum();
        Self { space, normalized: (total - 1.0).abs() <= 1e-10, values }
    }

    pub fn uniform(space: Space, dim: usize) -> Self {
        Self { space, values: vec![1.0 / dim as f64; dim], normalized: true }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn normalize(mut self) -> Self {
        let total = self.total();
        for v in &mut self.values {
            *v /= total;
        }
        self.normalized = true;
        self
    }

    pub fn expect_space(&self, space: Space) -> Result<()> {
        if self.space == space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { expected: space.name().into(), found: self.space.name().into() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Direct,
    Power,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    /// Above this dimension the direct method falls back to power iteration.
    pub max_direct_dim: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { method: Method::Direct, tol: 1e-10, max_iter: 1_000_000, max_direct_dim: 20_000 }
    }
}

impl SolverOptions {
    pub fn power() -> Self {
        Self { method: Method::Power, tol: 1e-13, ..Self::default() }
    }
}

/// `‖πK − π‖₁`.
pub fn invariance_residual(k: &Kernel, pi: &[f64]) -> f64 {
    linalg::l1_distance(&k.left_mul(pi), pi)
}

/// The invariant probability vector of `k`.
///
/// The kernel must have exactly one closed class (so the vector is unique);
/// transient states receive zero mass. The power method additionally needs
/// that class to be aperiodic.
pub fn stationary(k: &Kernel, opts: &SolverOptions) -> Result<Measure> {
    let closed = unique_closed_class(k).map_err(|_| Error::NotIrreducible)?;
    let method = if opts.method == Method::Direct && k.dim() > opts.max_direct_dim {
        log::warn!("dimension {} above direct-solve cap {}, using power iteration", k.dim(), opts.max_direct_dim);
        Method::Power
    } else {
        opts.method
    };
    let values = match method {
        Method::Direct => direct(k)?,
        Method::Power => {
            let per = class_period(k, &closed);
            if per != 1 {
                return Err(Error::NotAperiodic(per));
            }
            power(k, opts.tol, opts.max_iter)?
        }
    };
    let residual = invariance_residual(k, &values);
    if residual > opts.tol.max(1e-10) {
        return Err(Error::NoConvergence { iterations: 0, residual });
    }
    Ok(Measure { space: k.space(), values, normalized: true })
}

fn direct(k: &Kernel) -> Result<Vec<f64>> {
    let n = k.dim();
    // (Kᵀ − I) π = 0 with the last equation replaced by Σ π = 1.
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, row) in k.rows().iter().enumerate() {
        for &(j, v) in row {
            a[(j, i)] += v;
        }
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = linalg::solve(a, b)?;
    clean_probability(x.iter().copied().collect())
}

fn clean_probability(mut x: Vec<f64>) -> Result<Vec<f64>> {
    for (i, v) in x.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -1e-12 {
                return Err(Error::NegativeMass { state: i, value: *v });
            }
            *v = 0.0;
        }
    }
    let total: f64 = x.iter().sum();
    Ok(x.into_iter().map(|v| v / total).collect())
}

fn power(k: &Kernel, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = k.dim();
    let mut pi = vec![1.0 / n as f64; n];
    let mut diff = f64::INFINITY;
    for _ in 0..max_iter {
        let next = k.left_mul(&pi);
        diff = linalg::l1_distance(&next, &pi);
        pi = next;
        if diff < tol {
            return clean_probability(pi);
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: diff })
}

/// `max_w |π̂(w) − p(w) Σ_{w'∈IN(w)} π̂(w')|`.
pub fn verify_simplified_invariance(g: &Graph, p: &Params, pi_hat: &Measure) -> Result<f64> {
    pi_hat.expect_space(Space::Wedge)?;
    let mut worst: f64 = 0.0;
    for (wid, w) in g.enumerate_wedges().iter().enumerate() {
        let inflow: f64 = g.in_wedges_of_edge(w.first_edge()).iter().map(|&x| pi_hat.values[x]).sum();
        let pw = wedge_choice_prob(g, p, w)?;
        worst = worst.max((pi_hat.values[wid] - pw * inflow).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Edges,
    Nodes,
}

/// Pushes a wedge measure down to edges (`Σ_{w∈IN(e)}`) or nodes
/// (`Σ_{w∈IN(v)}`), i.e. by the last edge or the last node of each wedge.
pub fn pullback(g: &Graph, m: &Measure, target: Target) -> Result<Measure> {
    m.expect_space(Space::Wedge)?;
    let mut out = match target {
        Target::Edges => vec![0.0; g.num_directed_edges()],
        Target::Nodes => vec![0.0; g.n()],
    };
    for (wid, w) in g.enumerate_wedges().iter().enumerate() {
        let slot = match target {
            Target::Edges => g.edge_id(w.second_edge()).unwrap(),
            Target::Nodes => w.c,
        };
        out[slot] += m.values[wid];
    }
    let space = match target {
        Target::Edges => Space::Edge,
        Target::Nodes => Space::Node,
    };
    Ok(Measure::new(space, out))
}

/// Node measure from an edge measure, by edge heads.
pub fn edge_to_nodes(g: &Graph, m: &Measure) -> Result<Measure> {
    m.expect_space(Space::Edge)?;
    let mut out = vec![0.0; g.n()];
    for (eid, v) in m.values.iter().enumerate() {
        out[g.edge_head(eid)] += v;
    }
    Ok(Measure::new(Space::Node, out))
}

/// Wedge measure `π̂(w) = π⃗(e1(w)) P⃗(e1(w), e2(w))` built from an edge measure.
pub fn wedge_measure_from_edges(g: &Graph, pi_edge: &Measure, k_edge: &Kernel) -> Result<Measure> {
    pi_edge.expect_space(Space::Edge)?;
    let values = g
        .enumerate_wedges()
        .iter()
        .map(|w| {
            let e1 = g.edge_id(w.first_edge()).unwrap();
            let e2 = g.edge_id(w.second_edge()).unwrap();
            pi_edge.values[e1] * k_edge.get(e1, e2)
        })
        .collect();
    Ok(Measure::new(Space::Wedge, values))
}

/// `max_w |π̂(w) − π⃗(e1(w)) P⃗(e1(w), e2(w))|`.
pub fn verify_edge_wedge_product(g: &Graph, pi_edge: &Measure, k_edge: &Kernel, pi_hat: &Measure) -> Result<f64> {
    pi_hat.expect_space(Space::Wedge)?;
    let built = wedge_measure_from_edges(g, pi_edge, k_edge)?;
    Ok(linalg::max_abs_diff(&built.values, &pi_hat.values))
}

/// Node carried by a state: the head of an edge, the last node of a wedge.
pub fn node_of_state(g: &Graph, space: Space, id: usize) -> Result<usize> {
    match space {
        Space::Edge => Ok(g.edge_head(id)),
        Space::Wedge => Ok(g.wedge(id).c),
        Space::Node => Ok(id),
        Space::UndirectedEdge => Err(Error::SpaceMismatch { expected: "edge or wedge".into(), found: space.name().into() }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingReport {
    pub steps: usize,
    pub starts: Vec<usize>,
    /// Node law after `steps` steps from each start.
    pub node_laws: Vec<Vec<f64>>,
    pub stationary_nodes: Vec<f64>,
    /// Max over starts of the TV distance to the stationary node law.
    pub max_tv: f64,
    /// Max over pairs of starts of the TV distance between their node laws.
    pub max_pairwise_tv: f64,
}

/// Rows of `kⁿ` from the given start states, pushed to nodes and compared
/// with the node law of the stationary vector.
pub fn limiting_distribution_empirical(g: &Graph, k: &Kernel, starts: &[usize], steps: usize) -> Result<LimitingReport> {
    let closed = unique_closed_class(k).map_err(|_| Error::NotIrreducible)?;
    let per = class_period(k, &closed);
    if per != 1 {
        return Err(Error::NotAperiodic(per));
    }
    let pi = stationary(k, &SolverOptions::default())?;
    let to_nodes = |dist: &[f64]| -> Result<Vec<f64>> {
        let mut out = vec![0.0; g.n()];
        for (s, &m) in dist.iter().enumerate() {
            out[node_of_state(g, k.space(), s)?] += m;
        }
        Ok(out)
    };
    let stationary_nodes = to_nodes(&pi.values)?;
    let node_laws = starts
        .iter()
        .map(|&s| to_nodes(&k.propagate(s, steps)))
        .collect::<Result<Vec<_>>>()?;
    let max_tv = node_laws.iter().map(|l| tv_distance(l, &stationary_nodes)).fold(0.0, f64::max);
    let mut max_pairwise_tv: f64 = 0.0;
    for i in 0..node_laws.len() {
        for j in i + 1..node_laws.len() {
            max_pairwise_tv = max_pairwise_tv.max(tv_distance(&node_laws[i], &node_laws[j]));
        }
    }
    Ok(LimitingReport { steps, starts: starts.to_vec(), node_laws, stationary_nodes, max_tv, max_pairwise_tv })
}
