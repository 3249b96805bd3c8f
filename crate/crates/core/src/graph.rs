//! Simple undirected graphs and their lifted state spaces.
//!
//! A [`Graph`] stores sorted adjacency lists in CSR form. Directed edges are
//! indexed lexicographically by `(tail, head)`, which coincides with the CSR
//! order, and wedges `(a, b, c)` are indexed lexicographically as well: the
//! wedges sharing a first edge `(a, b)` form one contiguous block (the
//! out-neighborhood `ON`), ordered by `c`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered pair of adjacent nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub tail: usize,
    pub head: usize,
}

impl DirectedEdge {
    pub fn new(tail: usize, head: usize) -> Self {
        Self { tail, head }
    }

    pub fn reverse(self) -> Self {
        Self { tail: self.head, head: self.tail }
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.tail, self.head)
    }
}

/// Type of a wedge: backtrack, triangle-closing or open move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WedgeKind {
    Flat,
    Triangle,
    Open,
}

/// Directed two-step walk `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wedge {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub kind: WedgeKind,
}

impl Wedge {
    pub fn first_edge(&self) -> DirectedEdge {
        DirectedEdge::new(self.a, self.b)
    }

    pub fn second_edge(&self) -> DirectedEdge {
        DirectedEdge::new(self.b, self.c)
    }

    pub fn reverse(self) -> Self {
        Self { a: self.c, b: self.b, c: self.a, kind: self.kind }
    }
}

impl fmt::Display for Wedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Walk weights for backtracking (`alpha`), triangle (`beta`) and open
/// (`gamma`) moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Params {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParams("weights must be finite".into()));
        }
        if alpha < 0.0 {
            return Err(Error::InvalidParams(format!("alpha = {alpha} < 0")));
        }
        if beta <= 0.0 || gamma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta and gamma must be positive (beta = {beta}, gamma = {gamma})"
            )));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn lambda(&self, kind: WedgeKind) -> f64 {
        match kind {
            WedgeKind::Flat => self.alpha,
            WedgeKind::Triangle => self.beta,
            WedgeKind::Open => self.gamma,
        }
    }

    /// True when all three weights are whole numbers, so that sums of
    /// weights over wedge sets are exact in floating point.
    pub fn is_integral(&self) -> bool {
        [self.alpha, self.beta, self.gamma]
            .iter()
            .all(|x| x.fract() == 0.0 && x.abs() < 2f64.powi(40))
    }

    pub fn weigh(&self, counts: WedgeCounts) -> f64 {
        self.alpha * counts.flat as f64
            + self.beta * counts.triangle as f64
            + self.gamma * counts.open as f64
    }
}

/// Weight of a wedge under `p`; invariant under wedge reversal.
pub fn lambda(p: &Params, w: &Wedge) -> f64 {
    p.lambda(w.kind)
}

/// Number of wedges of each kind in some wedge set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WedgeCounts {
    pub flat: usize,
    pub triangle: usize,
    pub open: usize,
}

impl WedgeCounts {
    pub fn total(&self) -> usize {
        self.flat + self.triangle + self.open
    }

    pub fn add(&mut self, kind: WedgeKind) {
        match kind {
            WedgeKind::Flat => self.flat += 1,
            WedgeKind::Triangle => self.triangle += 1,
            WedgeKind::Open => self.open += 1,
        }
    }
}

/// Neighborhood queries on the lifted spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    /// Wedges whose second edge is the first edge of the given wedge.
    InOfWedge(Wedge),
    /// Wedges sharing the first two nodes of the given wedge.
    OutOfWedge(Wedge),
    /// Wedges ending in the given directed edge.
    InOfEdge(DirectedEdge),
    /// Wedges ending at the given node.
    InOfNode(usize),
    /// Directed edges with the given head.
    InEdgesOfNode(usize),
}

/// Simple undirected graph with dense node ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    /// `wedge_offsets[e]` is the index of the first wedge whose first edge is `e`.
    wedge_offsets: Vec<usize>,
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph on nodes `0..n` from undirected edge pairs.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..n as u64).collect();
        Self::with_labels(labels, edges)
    }

    /// Builds a graph whose node `i` carries the external label `labels[i]`.
    pub fn with_labels(labels: Vec<u64>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Malformed {
                    line: i + 1,
                    text: format!("edge ({u}, {v}) out of range for {n} nodes"),
                });
            }
            if u == v {
                return Err(Error::SelfLoop { line: i + 1, node: labels[u] });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge { line: 0, u: labels[v], v: labels[w[0]] });
            }
            if list.is_empty() {
                return Err(Error::IsolatedNode(v));
            }
        }
        Ok(Self::from_sorted_adjacency(adj, labels))
    }

    fn from_sorted_adjacency(adj: Vec<Vec<usize>>, labels: Vec<u64>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &adj {
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let mut wedge_offsets = Vec::with_capacity(targets.len() + 1);
        wedge_offsets.push(0);
        let mut acc = 0;
        for &head in &targets {
            acc += adj[head].len();
            wedge_offsets.push(acc);
        }
        Self { offsets, targets, wedge_offsets, labels }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn num_directed_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn num_wedges(&self) -> usize {
        *self.wedge_offsets.last().unwrap()
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges `{u, v}` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    /// Number of common neighbors of `u` and `v`, by sorted-list intersection.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        let (a, b) = (self.neighbors(u), self.neighbors(v));
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        let dist = self.bfs_distances(0);
        dist.iter().all(|d| d.is_some())
    }

    pub fn ensure_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Some triangle `(a, b, c)` with `a < b < c`, if the graph has one.
    pub fn find_triangle(&self) -> Option<(usize, usize, usize)> {
        for a in 0..self.n() {
            for &b in self.neighbors(a).iter().filter(|&&b| b > a) {
                for &c in self.neighbors(b).iter().filter(|&&c| c > b) {
                    if self.has_edge(a, c) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    // ---- directed edges ----

    pub fn directed_edges(&self) -> Vec<DirectedEdge> {
        (0..self.n())
            .flat_map(|u| self.neighbors(u).iter().map(move |&v| DirectedEdge::new(u, v)))
            .collect()
    }

    pub fn edge_id(&self, e: DirectedEdge) -> Option<usize> {
        if e.tail >= self.n() {
            return None;
        }
        self.neighbors(e.tail).binary_search(&e.head).ok().map(|i| self.offsets[e.tail] + i)
    }

    pub fn edge(&self, id: usize) -> DirectedEdge {
        let tail = self.offsets.partition_point(|&o| o <= id) - 1;
        DirectedEdge::new(tail, self.targets[id])
    }

    pub fn edge_head(&self, id: usize) -> usize {
        self.targets[id]
    }

    pub fn reverse_edge_id(&self, id: usize) -> usize {
        let e = self.edge(id);
        self.edge_id(e.reverse()).expect("graph adjacency is symmetric")
    }

    /// Index of `{u, v}` among the undirected edges listed by [`Graph::edges`].
    pub fn undirected_edge_ids(&self) -> Vec<usize> {
        let mut next = 0;
        let mut map = vec![usize::MAX; self.num_directed_edges()];
        for (id, slot) in map.iter_mut().enumerate() {
            let e = self.edge(id);
            if e.tail < e.head {
                *slot = next;
                next += 1;
            }
        }
        for id in 0..self.num_directed_edges() {
            if map[id] == usize::MAX {
                map[id] = map[self.reverse_edge_id(id)];
            }
        }
        map
    }

    // ---- wedges ----

    pub fn classify(&self, a: usize, c: usize) -> WedgeKind {
        if a == c {
            WedgeKind::Flat
        } else if self.has_edge(a, c) {
            WedgeKind::Triangle
        } else {
            WedgeKind::Open
        }
    }

    pub fn make_wedge(&self, a: usize, b: usize, c: usize) -> Option<Wedge> {
        if self.has_edge(a, b) && self.has_edge(b, c) {
            Some(Wedge { a, b, c, kind: self.classify(a, c) })
        } else {
            None
        }
    }

    pub fn enumerate_wedges(&self) -> Vec<Wedge> {
        let mut out = Vec::with_capacity(self.num_wedges());
        for a in 0..self.n() {
            for &b in self.neighbors(a) {
                for &c in self.neighbors(b) {
                    out.push(Wedge { a, b, c, kind: self.classify(a, c) });
                }
            }
        }
        out
    }

    pub fn wedge_id(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        let e = self.edge_id(DirectedEdge::new(a, b))?;
        let pos = self.neighbors(b).binary_search(&c).ok()?;
        Some(self.wedge_offsets[e] + pos)
    }

    pub fn wedge(&self, id: usize) -> Wedge {
        let e = self.wedge_offsets.partition_point(|&o| o <= id) - 1;
        let first = self.edge(e);
        let c = self.neighbors(first.head)[id - self.wedge_offsets[e]];
        Wedge { a: first.tail, b: first.head, c, kind: self.classify(first.tail, c) }
    }

    pub fn reverse_wedge_id(&self, id: usize) -> usize {
        let w = self.wedge(id);
        self.wedge_id(w.c, w.b, w.a).expect("reverse of a wedge is a wedge")
    }

    /// Wedge ids with first edge `edge_id`: the out-neighborhood block.
    pub fn out_block(&self, edge_id: usize) -> Range<usize> {
        self.wedge_offsets[edge_id]..self.wedge_offsets[edge_id + 1]
    }

    /// Kind counts of the wedges leaving directed edge `(u, v)`.
    pub fn out_counts(&self, e: DirectedEdge) -> WedgeCounts {
        let t = self.common_neighbors(e.tail, e.head);
        WedgeCounts { flat: 1, triangle: t, open: self.degree(e.head) - 1 - t }
    }

    /// Kind counts of the wedges entering directed edge `(u, v)`, i.e. the
    /// wedges `(x, u, v)`.
    pub fn in_counts(&self, e: DirectedEdge) -> WedgeCounts {
        let t = self.common_neighbors(e.tail, e.head);
        WedgeCounts { flat: 1, triangle: t, open: self.degree(e.tail) - 1 - t }
    }

    fn wedge_of(&self, w: Wedge) -> Result<Wedge> {
        self.make_wedge(w.a, w.b, w.c).ok_or_else(|| Error::UnknownState(w.to_string()))
    }

    fn check_edge(&self, e: DirectedEdge) -> Result<usize> {
        self.edge_id(e).ok_or_else(|| Error::UnknownState(e.to_string()))
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownState(format!("node {v}")))
        }
    }

    /// Wedge ids `(x, u, v)` ending in the directed edge `(u, v)`.
    pub fn in_wedges_of_edge(&self, e: DirectedEdge) -> Vec<usize> {
        let pos = match self.neighbors(e.tail).binary_search(&e.head) {
            Ok(p) => p,
            Err(_) => return Vec::new(),
        };
        self.neighbors(e.tail)
            .iter()
            .map(|&x| {
                let xe = self.edge_id(DirectedEdge::new(x, e.tail)).unwrap();
                self.wedge_offsets[xe] + pos
            })
            .collect()
    }

    /// Answers a neighborhood query with state ids: wedge ids for all
    /// wedge-valued queries and directed-edge ids for [`Query::InEdgesOfNode`].
    pub fn query(&self, q: Query) -> Result<Vec<usize>> {
        match q {
            Query::InOfWedge(w) => {
                let w = self.wedge_of(w)?;
                Ok(self.in_wedges_of_edge(w.first_edge()))
            }
            Query::OutOfWedge(w) => {
                let w = self.wedge_of(w)?;
                let e = self.edge_id(w.first_edge()).unwrap();
                Ok(self.out_block(e).collect())
            }
            Query::InOfEdge(e) => {
                self.check_edge(e)?;
                Ok(self.in_wedges_of_edge(e))
            }
            Query::InOfNode(v) => {
                self.check_node(v)?;
                let mut ids: Vec<usize> = self
                    .neighbors(v)
                    .iter()
                    .flat_map(|&y| self.in_wedges_of_edge(DirectedEdge::new(y, v)))
                    .collect();
                ids.sort_unstable();
                Ok(ids)
            }
            Query::InEdgesOfNode(v) => {
                self.check_node(v)?;
                let mut ids: Vec<usize> = self
                    .neighbors(v)
                    .iter()
                    .map(|&y| self.edge_id(DirectedEdge::new(y, v)).unwrap())
                    .collect();
                ids.sort_unstable();
                Ok(ids)
            }
        }
    }

    /// Writes the graph in edge-list format using the external labels.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{} {}\n", self.labels[u], self.labels[v]));
        }
        out
    }
}

/// Parses the whitespace-separated edge-list format. `#` starts a comment,
/// blank lines are skipped. Node labels are compacted to `0..n` in order of
/// first appearance.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut seen = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let malformed = || Error::Malformed { line: line_no, text: raw.to_string() };
        let mut fields = content.split_whitespace();
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(malformed()),
        };
        let a: u64 = a.parse().map_err(|_| malformed())?;
        let b: u64 = b.parse().map_err(|_| malformed())?;
        if a == b {
            return Err(Error::SelfLoop { line: line_no, node: a });
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key, line_no).is_some() {
            return Err(Error::DuplicateEdge { line: line_no, u: a, v: b });
        }
        let mut intern = |x: u64| {
            *index.entry(x).or_insert_with(|| {
                labels.push(x);
                labels.len() - 1
            })
        };
        let (u, v) = (intern(a), intern(b));
        edges.push((u, v));
    }
    Graph::with_labels(labels, &edges)
}
