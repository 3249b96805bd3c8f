//! Sparse stochastic kernels over the lifted state spaces.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedEdge, Graph, Params, Wedge, WedgeCounts};

/// Row-sum tolerance enforced when a kernel is constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Default tolerance for verdicts.
pub const VERDICT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    Edge,
    Wedge,
    UndirectedEdge,
    Node,
}

impl Space {
    pub fn name(&self) -> &'static str {
        match self {
            Space::Edge => "edge",
            Space::Wedge => "wedge",
            Space::UndirectedEdge => "undirected-edge",
            Space::Node => "node",
        }
    }
}

/// Row-stochastic matrix with sparse rows of `(column, probability)` pairs,
/// columns strictly increasing within a row. Only positive entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    space: Space,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Kernel {
    /// Validates and wraps the given rows. Entries must lie in `(0, 1 + tol]`
    /// and each row must sum to one within `tol`.
    pub fn from_rows(space: Space, mut rows: Vec<Vec<(usize, f64)>>, tol: f64) -> Result<Self> {
        let dim = rows.len();
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Precondition(format!("row {i} has a repeated column")));
            }
            let mut sum = 0.0;
            for &(j, v) in row.iter() {
                if j >= dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: j + 1 });
                }
                if !(v > 0.0 && v <= 1.0 + tol) {
                    return Err(Error::Precondition(format!("entry ({i}, {j}) = {v} outside (0, 1]")));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::Precondition(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { space, rows })
    }

    pub fn identity(space: Space, dim: usize) -> Self {
        Self { space, rows: (0..dim).map(|i| vec![(i, 1.0)]).collect() }
    }

    /// Converts a dense row-stochastic matrix; entries at or below `drop_below`
    /// are discarded (they must not be meaningfully negative).
    pub fn from_dense(space: Space, m: &DMatrix<f64>, drop_below: f64, tol: f64) -> Result<Self> {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter_map(|j| {
                        let v = m[(i, j)];
                        (v > drop_below).then_some((j, v.min(1.0)))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(space, rows, tol)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => row[k].1,
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(_, v)| v).sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim()];
        for row in &self.rows {
            for &(j, v) in row {
                sums[j] += v;
            }
        }
        sums
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Row vector times kernel.
    pub fn left_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for &(j, v) in row {
                out[j] += xi * v;
            }
        }
        out
    }

    /// `(I + K) / 2`.
    pub fn lazy(&self) -> Kernel {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut out: Vec<(usize, f64)> = row.iter().map(|&(j, v)| (j, 0.5 * v)).collect();
                match out.binary_search_by_key(&i, |&(c, _)| c) {
                    Ok(k) => out[k].1 += 0.5,
                    Err(k) => out.insert(k, (i, 0.5)),
                }
                out
            })
            .collect();
        Kernel { space: self.space, rows }
    }

    /// Restricts the kernel to the states flagged in `keep`, which must be
    /// closed under the kernel. Returns the restricted kernel and the original
    /// index of each retained state.
    pub fn restrict(&self, keep: &[bool]) -> Result<(Kernel, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.dim()).filter(|&i| keep[i]).collect();
        let mut new_index = vec![usize::MAX; self.dim()];
        for (k, &i) in kept.iter().enumerate() {
            new_index[i] = k;
        }
        let mut rows = Vec::with_capacity(kept.len());
        for &i in &kept {
            let mut row = Vec::with_capacity(self.rows[i].len());
            for &(j, v) in &self.rows[i] {
                if new_index[j] == usize::MAX {
                    return Err(Error::Precondition(format!(
                        "state {i} leaks into excluded state {j}"
                    )));
                }
                row.push((new_index[j], v));
            }
            rows.push(row);
        }
        Ok((Kernel { space: self.space, rows }, kept))
    }

    /// `K^n` as a kernel, computed row by row in a fixed summation order so
    /// that the parallel and sequential results coincide bit for bit.
    pub fn n_step(&self, n: usize, budget: &DenseBudget) -> Result<Kernel> {
        if n == 0 {
            return Err(Error::Precondition("n_step needs n >= 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let dim = self.dim();
        budget.check(dim)?;
        let rows = (0..dim)
            .into_par_iter()
            .map(|i| {
                let mut dist = vec![0.0; dim];
                dist[i] = 1.0;
                for _ in 0..n {
                    dist = self.left_mul(&dist);
                }
                dist.into_iter().enumerate().filter(|&(_, v)| v > 0.0).collect()
            })
            .collect();
        Kernel::from_rows(self.space, rows, 1e-10)
    }

    /// Distribution after `n` steps from a point mass at `start`.
    pub fn propagate(&self, start: usize, n: usize) -> Vec<f64> {
        let mut dist = vec![0.0; self.dim()];
        dist[start] = 1.0;
        for _ in 0..n {
            dist = self.left_mul(&dist);
        }
        dist
    }
}

/// Cap on the number of dense entries materialized by matrix powers.
#[derive(Debug, Clone, Copy)]
pub struct DenseBudget {
    pub max_entries: usize,
}

impl Default for DenseBudget {
    fn default() -> Self {
        Self { max_entries: 25_000_000 }
    }
}

impl DenseBudget {
    pub fn check(&self, dim: usize) -> Result<()> {
        let requested = dim.saturating_mul(dim);
        if requested > self.max_entries {
            Err(Error::Overflow { requested, budget: self.max_entries })
        } else {
            Ok(())
        }
    }
}

/// `Σ λ` over the wedges leaving directed edge `e`, with its kind counts.
pub fn out_denominator(g: &Graph, p: &Params, e: DirectedEdge) -> (WedgeCounts, f64) {
    let counts = g.out_counts(e);
    (counts, p.weigh(counts))
}

/// Probability of choosing wedge `w` among the out-options of its first edge.
pub fn wedge_choice_prob(g: &Graph, p: &Params, w: &Wedge) -> Result<f64> {
    let w = g.make_wedge(w.a, w.b, w.c).ok_or_else(|| Error::UnknownState(w.to_string()))?;
    let (_, denom) = out_denominator(g, p, w.first_edge());
    if denom <= 0.0 {
        return Err(Error::DeadEnd(w.first_edge().to_string()));
    }
    Ok(p.lambda(w.kind) / denom)
}

/// Per-directed-edge choice probabilities laid out by wedge id.
fn wedge_probabilities(g: &Graph, p: &Params) -> Result<Vec<f64>> {
    let mut probs = vec![0.0; g.num_wedges()];
    for (eid, e) in g.directed_edges().into_iter().enumerate() {
        let (_, denom) = out_denominator(g, p, e);
        if denom <= 0.0 {
            return Err(Error::DeadEnd(e.to_string()));
        }
        for wid in g.out_block(eid) {
            let c = g.neighbors(e.head)[wid - g.out_block(eid).start];
            probs[wid] = p.lambda(g.classify(e.tail, c)) / denom;
        }
    }
    Ok(probs)
}

/// Edge kernel: from `(u, v)` to `(v, x)` with the choice probability of
/// the wedge `(u, v, x)`. Zero-weight moves are left out of the structure.
pub fn build_edge_kernel(g: &Graph, p: &Params) -> Result<Kernel> {
    let probs = wedge_probabilities(g, p)?;
    let rows = (0..g.num_directed_edges())
        .map(|eid| {
            let head = g.edge_head(eid);
            let block = g.out_block(eid);
            g.neighbors(head)
                .iter()
                .zip(block)
                .filter(|&(_, wid)| probs[wid] > 0.0)
                .map(|(&x, wid)| (g.edge_id(DirectedEdge::new(head, x)).unwrap(), probs[wid]))
                .collect()
        })
        .collect();
    Kernel::from_rows(Space::Edge, rows, CONSTRUCTION_TOL)
}

/// Wedge kernel: from `w` to every `w'` whose first edge is the second edge
/// of `w`, with probability `p(w')` independent of `w`.
pub fn build_wedge_kernel(g: &Graph, p: &Params) -> Result<Kernel> {
    let probs = wedge_probabilities(g, p)?;
    let rows = (0..g.num_wedges())
        .map(|wid| {
            let w = g.wedge(wid);
            let second = g.edge_id(w.second_edge()).unwrap();
            g.out_block(second).filter(|&x| probs[x] > 0.0).map(|x| (x, probs[x])).collect()
        })
        .collect();
    Kernel::from_rows(Space::Wedge, rows, CONSTRUCTION_TOL)
}

/// Two consecutive edge steps started from the first edge of each wedge:
/// `Q(w, w') = P(e1(w), e2(w)) P(e2(w), e2(w'))` for `w ∈ IN(w')`. Its rows sum
/// to `P(e1(w), e2(w))`, so it is sub-Markov on the wedge space.
pub fn two_step_edge_on_wedges(g: &Graph, p: &Params) -> Result<Vec<Vec<(usize, f64)>>> {
    let probs = wedge_probabilities(g, p)?;
    Ok((0..g.num_wedges())
        .map(|wid| {
            let w = g.wedge(wid);
            let second = g.edge_id(w.second_edge()).unwrap();
            g.out_block(second)
                .filter(|&x| probs[x] > 0.0)
                .map(|x| (x, probs[wid] * probs[x]))
                .collect()
        })
        .collect())
}

/// Column-sum verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BistochasticVerdict {
    pub bistochastic: bool,
    pub max_deviation: f64,
    pub worst_column: usize,
    pub tol: f64,
}

pub fn is_bistochastic(k: &Kernel, tol: f64) -> BistochasticVerdict {
    let (worst_column, max_deviation) = k
        .column_sums()
        .into_iter()
        .map(|s| (s - 1.0).abs())
        .enumerate()
        .fold((0, 0.0), |acc, (j, d)| if d > acc.1 { (j, d) } else { acc });
    BistochasticVerdict { bistochastic: max_deviation <= tol, max_deviation, worst_column, tol }
}

/// Human-readable labels of the states of a space, using external node labels.
pub fn state_labels(g: &Graph, space: Space) -> Vec<String> {
    let l = |v: usize| g.label(v);
    match space {
        Space::Edge => g.directed_edges().iter().map(|e| format!("({},{})", l(e.tail), l(e.head))).collect(),
        Space::Wedge => g
            .enumerate_wedges()
            .iter()
            .map(|w| format!("({},{},{})", l(w.a), l(w.b), l(w.c)))
            .collect(),
        Space::UndirectedEdge => g.edges().iter().map(|&(u, v)| format!("{{{},{}}}", l(u), l(v))).collect(),
        Space::Node => (0..g.n()).map(|v| l(v).to_string()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenominatorAudit {
    pub edge: String,
    pub flat: usize,
    pub triangle: usize,
    pub open: usize,
    pub value: f64,
}

/// Debug dump of a kernel with the denominator of every directed edge
/// written as `flat·α + triangle·β + open·γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDump {
    pub space: Space,
    pub params: Params,
    pub states: Vec<String>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub denominators: Vec<DenominatorAudit>,
}

pub fn dump_kernel(g: &Graph, p: &Params, k: &Kernel) -> KernelDump {
    let denominators = g
        .directed_edges()
        .into_iter()
        .map(|e| {
            let (c, value) = out_denominator(g, p, e);
            DenominatorAudit {
                edge: format!("({},{})", g.label(e.tail), g.label(e.head)),
                flat: c.flat,
                triangle: c.triangle,
                open: c.open,
                value,
            }
        })
        .collect();
    KernelDump {
        space: k.space(),
        params: *p,
        states: state_labels(g, k.space()),
        rows: k.rows().to_vec(),
        denominators,
    }
}
