//! The auxiliary chains behind the recurrence comparison: the backtrack
//! floor, the conditioned edge kernel, its collapse to a reversible chain on
//! undirected edges, the `alpha = 0` averaging construction, and effective
//! resistance growth on finite patches.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{check_edb, check_reversal_symmetry};
use crate::error::{Error, Result};
use crate::generators::{regular_tree3, triangular_patch, Patch};
use crate::graph::{Graph, Params};
use crate::kernel::{build_edge_kernel, DenseBudget, Kernel, Space, VERDICT_TOL};
use crate::linalg;
use crate::resistance::{effective_resistance, Network};
use crate::stationary::{stationary, Measure, SolverOptions};

/// `min_e P⃗(e, −e)`.
pub fn backtrack_floor(g: &Graph, k_edge: &Kernel) -> Result<f64> {
    let p = (0..k_edge.dim()).map(|e| k_edge.get(e, g.reverse_edge_id(e))).fold(f64::INFINITY, f64::min);
    if p > 0.0 {
        Ok(p)
    } else {
        Err(Error::ZeroBacktrack)
    }
}

/// `K(e,e') = P(e,e')/(1−p)` off the reversal and `(P(e,−e) − p)/(1−p)` on it:
/// the edge chain conditioned on a failed Bernoulli(p) backtrack flip.
pub fn conditioned_kernel(g: &Graph, k: &Kernel, p: f64) -> Result<Kernel> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("backtrack floor {p} must lie in (0, 1)")));
    }
    let scale = 1.0 / (1.0 - p);
    let mut rows = Vec::with_capacity(k.dim());
    for e in 0..k.dim() {
        let rev = g.reverse_edge_id(e);
        let mut row = Vec::with_capacity(k.row(e).len());
        let mut saw_rev = false;
        for &(f, v) in k.row(e) {
            let v = if f == rev {
                saw_rev = true;
                v - p
            } else {
                v
            };
            if v < -1e-15 {
                return Err(Error::NegativeEntry { state: e, value: v * scale });
            }
            if v > 1e-15 {
                row.push((f, v * scale));
            }
        }
        if !saw_rev {
            return Err(Error::NegativeEntry { state: e, value: -p * scale });
        }
        rows.push(row);
    }
    Kernel::from_rows(Space::Edge, rows, 1e-10)
}

/// Collapsed kernel on undirected edges,
/// `K̄(x, y) = ½ Σ_{e1∈x, e2∈y} p [(I − (1−p) K_L)⁻¹](e1, e2)`,
/// and `π̄({e, −e}) = π⃗(e) + π⃗(−e)`.
pub fn collapse_to_undirected(g: &Graph, k_lazy: &Kernel, p: f64, pi_edge: &Measure) -> Result<(Kernel, Measure)> {
    pi_edge.expect_space(Space::Edge)?;
    let n = k_lazy.dim();
    DenseBudget::default().check(n)?;
    let mut a = DMatrix::<f64>::identity(n, n) - k_lazy.to_dense() * (1.0 - p);
    a = linalg::inverse(a)? * p;
    let und = g.undirected_edge_ids();
    let m = g.num_edges();
    let mut kbar = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            kbar[(und[i], und[j])] += 0.5 * a[(i, j)];
        }
    }
    for i in 0..m {
        for j in 0..m {
            let v = kbar[(i, j)];
            if v < 0.0 {
                if v < -1e-14 {
                    return Err(Error::NegativeEntry { state: i, value: v });
                }
                log::warn!("clamping collapsed-kernel entry ({i}, {j}) = {v:e} to zero");
                kbar[(i, j)] = 0.0;
            }
        }
    }
    let k = Kernel::from_dense(Space::UndirectedEdge, &kbar, 0.0, 1e-10)?;
    let mut pi_bar = vec![0.0; m];
    for (e, &v) in pi_edge.values.iter().enumerate() {
        pi_bar[und[e]] += v;
    }
    Ok((k, Measure::new(Space::UndirectedEdge, pi_bar)))
}

/// `max |π(x)K(x,y) − π(y)K(y,x)|`.
pub fn reversibility_residual(k: &Kernel, pi: &Measure) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..k.dim() {
        for &(y, v) in k.row(x) {
            worst = worst.max((pi.values[x] * v - pi.values[y] * k.get(y, x)).abs());
        }
    }
    worst
}

/// `max_{n ≤ n_max} max_{e,e'} |π⃗(e)P⃗ⁿ(e,e') − π⃗(e')P⃗ⁿ(−e',−e)|`.
pub fn verify_nstep_directed_balance(g: &Graph, pi_edge: &Measure, k_edge: &Kernel, n_max: usize) -> Result<f64> {
    pi_edge.expect_space(Space::Edge)?;
    let n = k_edge.dim();
    DenseBudget::default().check(n)?;
    let pi = &pi_edge.values;
    let rev: Vec<usize> = (0..n).map(|e| g.reverse_edge_id(e)).collect();
    let base = k_edge.to_dense();
    let mut power = base.clone();
    let mut worst: f64 = 0.0;
    for step in 1..=n_max {
        if step > 1 {
            power = &power * &base;
        }
        for e in 0..n {
            for f in 0..n {
                worst = worst.max((pi[e] * power[(e, f)] - pi[f] * power[(rev[f], rev[e])]).abs());
            }
        }
    }
    Ok(worst)
}

/// Whether the subgraph induced by the ball of radius `r` around `x` has a cycle.
pub fn ball_contains_cycle(g: &Graph, x: usize, r: usize) -> bool {
    let dist = g.bfs_distances(x);
    let inside: Vec<bool> = dist.iter().map(|d| d.is_some_and(|d| d <= r)).collect();
    let nodes = inside.iter().filter(|&&b| b).count();
    let edges = g.edges().into_iter().filter(|&(u, v)| inside[u] && inside[v]).count();
    // The ball is connected, so it is a tree exactly when |E| = |V| − 1.
    edges >= nodes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaZeroSetup {
    /// Largest number of edge-chain steps needed to go from `e` to `−e`.
    pub m: usize,
    pub p: f64,
    /// `(M+1)⁻¹ Σ_{i=0}^{M} P⃗ⁱ`.
    #[serde(skip)]
    pub d: Option<Kernel>,
    /// `min_e D(e, −e) / (2p)`; at least one by construction.
    pub min_return_margin: f64,
}

/// Builds `M`, `p` and `D` for a walk without backtracking, checking that
/// every ball of radius `r_cap` contains a cycle and that `D(e, −e) ≥ 2p`.
pub fn alpha_zero_setup(g: &Graph, params: &Params, r_cap: usize) -> Result<AlphaZeroSetup> {
    if params.alpha != 0.0 {
        return Err(Error::Precondition("alpha_zero_setup needs alpha = 0".into()));
    }
    g.ensure_connected()?;
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) < 2) {
        return Err(Error::DeadEnd(format!("node {v} has degree {}", g.degree(v))));
    }
    if let Some(x) = (0..g.n()).find(|&x| !ball_contains_cycle(g, x, r_cap)) {
        return Err(Error::NoCycleInBall { node: x, radius: r_cap });
    }
    let k = build_edge_kernel(g, params)?;
    let n = k.dim();
    let mut m = 0;
    for e in 0..n {
        let target = g.reverse_edge_id(e);
        let mut dist = vec![usize::MAX; n];
        dist[e] = 0;
        let mut queue = VecDeque::from([e]);
        while let Some(u) = queue.pop_front() {
            if u == target {
                break;
            }
            for &(v, _) in k.row(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if dist[target] == usize::MAX {
            return Err(Error::NotIrreducible);
        }
        m = m.max(dist[target]);
    }
    let lo = params.beta.min(params.gamma);
    let hi = params.beta.max(params.gamma);
    let d = g.max_degree() as f64;
    let q = lo / (lo + (d - 1.0) * hi);
    let p = q.powi(m as i32) / (2.0 * (m as f64 + 1.0));

    DenseBudget::default().check(n)?;
    let base = k.to_dense();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut sum = power.clone();
    for _ in 0..m {
        power = &power * &base;
        sum += &power;
    }
    sum /= m as f64 + 1.0;
    let dk = Kernel::from_dense(Space::Edge, &sum, 0.0, 1e-10)?;
    let mut margin = f64::INFINITY;
    for e in 0..n {
        let back = dk.get(e, g.reverse_edge_id(e));
        margin = margin.min(back / (2.0 * p));
        if back < 2.0 * p {
            return Err(Error::HypothesisViolated(format!("D(e, -e) = {back:e} < 2p = {:e} at edge {e}", 2.0 * p)));
        }
    }
    Ok(AlphaZeroSetup { m, p, d: Some(dk), min_return_margin: margin })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AuxMode {
    AlphaPositive,
    AlphaZero { m: usize },
}

#[derive(Debug, Clone)]
pub struct AuxChain {
    pub p: f64,
    pub k: Kernel,
    pub k_lazy: Kernel,
    pub k_bar: Kernel,
    pub pi_bar: Measure,
    pub mode: AuxMode,
}

/// Summary of an [`AuxChain`] for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxSummary {
    pub mode: AuxMode,
    pub p: f64,
    pub row_sum_deviation: f64,
    pub reversibility_residual: f64,
    pub nstep_balance_residual: f64,
    pub nstep_max: usize,
}

/// Builds the collapsed chain from the edge kernel and an edge measure that
/// satisfies directed balance (and, for `alpha = 0`, reversal symmetry).
pub fn build_aux_chain(g: &Graph, params: &Params, pi_edge: &Measure, k_edge: &Kernel, r_cap: usize) -> Result<AuxChain> {
    let edb = check_edb(g, pi_edge, k_edge)?;
    if edb > VERDICT_TOL {
        return Err(Error::HypothesisViolated(format!("edge directed balance fails (residual {edb:e})")));
    }
    let (p, base, mode) = if params.alpha > 0.0 {
        (backtrack_floor(g, k_edge)?, k_edge.clone(), AuxMode::AlphaPositive)
    } else {
        let sym = check_reversal_symmetry(g, pi_edge)?;
        if sym > VERDICT_TOL {
            return Err(Error::HypothesisViolated(format!("edge measure not reversal symmetric ({sym:e})")));
        }
        let setup = alpha_zero_setup(g, params, r_cap)?;
        (setup.p, setup.d.unwrap(), AuxMode::AlphaZero { m: setup.m })
    };
    let k = conditioned_kernel(g, &base, p)?;
    let k_lazy = k.lazy();
    let (k_bar, pi_bar) = collapse_to_undirected(g, &k_lazy, p, pi_edge)?;
    Ok(AuxChain { p, k, k_lazy, k_bar, pi_bar, mode })
}

impl AuxChain {
    pub fn summary(&self, g: &Graph, pi_edge: &Measure, k_edge: &Kernel, nstep_max: usize) -> Result<AuxSummary> {
        Ok(AuxSummary {
            mode: self.mode.clone(),
            p: self.p,
            row_sum_deviation: self.k_bar.row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max),
            reversibility_residual: reversibility_residual(&self.k_bar, &self.pi_bar),
            nstep_balance_residual: verify_nstep_directed_balance(g, pi_edge, k_edge, nstep_max)?,
            nstep_max,
        })
    }

    /// Conductance network `c(x, y) = s π̄(x) K̄(x, y)` on undirected edges,
    /// symmetrized by averaging both directions. The scale `s` lets callers
    /// compare patches of different sizes under a common normalization.
    pub fn network(&self, scale: f64) -> Result<Network> {
        let mut net = Network::new(self.k_bar.dim());
        for x in 0..self.k_bar.dim() {
            for &(y, v) in self.k_bar.row(x) {
                if x < y {
                    let c = 0.5 * scale * (self.pi_bar.values[x] * v + self.pi_bar.values[y] * self.k_bar.get(y, x));
                    if c > 0.0 {
                        net.add(x, y, c)?;
                    }
                }
            }
        }
        Ok(net)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Triangular,
    Tree3,
}

impl Family {
    pub fn patch(self, radius: usize) -> Result<Patch> {
        match self {
            Family::Triangular => triangular_patch(radius),
            Family::Tree3 => regular_tree3(radius),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" | "tri" => Ok(Family::Triangular),
            "tree3" | "tree" => Ok(Family::Tree3),
            other => Err(Error::InvalidSize(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub size: usize,
    pub r_srw: f64,
    pub r_kbar: f64,
    pub ratio: f64,
}

/// Resistance from the center of a patch to its glued boundary for the
/// simple random walk network.
pub fn srw_resistance(patch: &Patch) -> Result<f64> {
    let (net, s, t) = Network::from_graph(&patch.graph).glue(&[patch.center], &patch.boundary)?;
    effective_resistance(&net, s, t)
}

/// Resistance in the collapsed-chain network between the undirected edges
/// at the center (glued) and those touching the boundary (glued). The edge
/// measure is scaled to unit mean mass per directed edge, the finite-patch
/// analogue of an invariant measure on the infinite graph.
pub fn kbar_resistance(patch: &Patch, params: &Params) -> Result<f64> {
    let g = &patch.graph;
    let k_edge = build_edge_kernel(g, params)?;
    let pi_edge = stationary(&k_edge, &SolverOptions::default())?;
    let aux = build_aux_chain(g, params, &pi_edge, &k_edge, 2)?;
    let net = aux.network(g.num_directed_edges() as f64)?;
    let mut at_boundary = vec![false; g.n()];
    for &b in &patch.boundary {
        at_boundary[b] = true;
    }
    let edges = g.edges();
    let source: Vec<usize> =
        (0..edges.len()).filter(|&i| edges[i].0 == patch.center || edges[i].1 == patch.center).collect();
    let sink: Vec<usize> = (0..edges.len()).filter(|&i| at_boundary[edges[i].0] || at_boundary[edges[i].1]).collect();
    let (net, s, t) = net.glue(&source, &sink)?;
    effective_resistance(&net, s, t)
}

/// Growth table of center-to-boundary resistances over patch radii. Rows
/// are computed in parallel and returned in the order of `radii`.
pub fn recurrence_proxy_experiment(family: Family, radii: &[usize], params: &Params) -> Result<Vec<GrowthRow>> {
    radii
        .par_iter()
        .map(|&r| {
            let patch = family.patch(r)?;
            let r_srw = srw_resistance(&patch)?;
            let r_kbar = kbar_resistance(&patch, params)?;
            Ok(GrowthRow { size: r, r_srw, r_kbar, ratio: r_kbar / r_srw })
        })
        .collect()
}

pub fn growth_csv(rows: &[GrowthRow]) -> String {
    let mut out = String::from("size,R_srw,R_kbar,ratio\n");
    for r in rows {
        writeln!(out, "{},{:.12},{:.12},{:.12}", r.size, r.r_srw, r.r_kbar, r.ratio).unwrap();
    }
    out
}
