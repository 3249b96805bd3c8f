//! Named graph families.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

/// A finite piece of an infinite graph: the graph, a distinguished center
/// node and the outermost shell.
#[derive(Debug, Clone)]
pub struct Patch {
    pub graph: Graph,
    pub center: usize,
    pub boundary: Vec<usize>,
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("complete graph needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::new(n, &edges)
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
    Graph::new(n, &edges)
}

pub fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("path needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n - 1).map(|u| (u, u + 1)).collect();
    Graph::new(n, &edges)
}

/// Circulant graph: `u ~ u ± k (mod n)` for every offset `k`.
pub fn circulant(n: usize, offsets: &[usize]) -> Result<Graph> {
    if n < 3 || offsets.is_empty() {
        return Err(Error::InvalidSize(format!("circulant needs n >= 3 and offsets, got n = {n}")));
    }
    let mut set = std::collections::BTreeSet::new();
    for &k in offsets {
        if k == 0 || k % n == 0 {
            return Err(Error::InvalidSize(format!("offset {k} is a multiple of n = {n}")));
        }
        for u in 0..n {
            let v = (u + k) % n;
            set.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<_> = set.into_iter().collect();
    Graph::new(n, &edges)
}

/// Triangular lattice on a `rows x cols` torus; 6-regular for `rows, cols >= 3`.
pub fn triangular_torus(rows: usize, cols: usize) -> Result<Graph> {
    if rows < 3 || cols < 3 {
        return Err(Error::InvalidSize(format!(
            "triangular torus needs rows, cols >= 3, got {rows} x {cols}"
        )));
    }
    let id = |i: usize, j: usize| (i % rows) * cols + (j % cols);
    let mut edges = Vec::with_capacity(3 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let u = id(i, j);
            edges.push((u, id(i, j + 1)));
            edges.push((u, id(i + 1, j)));
            edges.push((u, id(i + 1, j + cols - 1)));
        }
    }
    Graph::new(rows * cols, &edges)
}

/// Triangle `a-b-c` with a pendant edge `c-d`; nodes `a, b, c, d = 0, 1, 2, 3`.
pub fn triangle_arm() -> Graph {
    Graph::new(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).expect("fixed graph")
}

/// Four-clique on `v1..v4` (ids `0..4`) without the edge `{v1, v3}`.
pub fn clique4_minus_edge() -> Graph {
    Graph::new(4, &[(0, 1), (0, 3), (1, 2), (1, 3), (2, 3)]).expect("fixed graph")
}

pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::new(10, &edges).expect("fixed graph")
}

pub fn complete_bipartite(m: usize, n: usize) -> Result<Graph> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSize(format!("K_{{{m},{n}}} needs both sides nonempty")));
    }
    let edges: Vec<_> = (0..m).flat_map(|u| (0..n).map(move |v| (u, m + v))).collect();
    Graph::new(m + n, &edges)
}

/// Cycle on `n` nodes plus the chord `{a, b}`.
pub fn cycle_with_chord(n: usize, a: usize, b: usize) -> Result<Graph> {
    let dist = a.abs_diff(b);
    if n < 4 || a >= n || b >= n || dist < 2 || dist > n - 2 {
        return Err(Error::InvalidSize(format!("invalid chord {{{a}, {b}}} on cycle({n})")));
    }
    let mut edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
    edges.push((a, b));
    Graph::new(n, &edges)
}

/// Square grid graph `rows x cols` (no wrap-around).
pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows * cols < 2 || rows == 0 || cols == 0 {
        return Err(Error::InvalidSize(format!("grid {rows} x {cols} has no edges")));
    }
    let mut edges = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let u = i * cols + j;
            if j + 1 < cols {
                edges.push((u, u + 1));
            }
            if i + 1 < rows {
                edges.push((u, u + cols));
            }
        }
    }
    Graph::new(rows * cols, &edges)
}

/// G(n, p) sample. Nodes left isolated are dropped; the remaining nodes keep
/// their original ids as labels.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidSize(format!("erdos_renyi needs n >= 2 and p in [0,1], got n = {n}, p = {p}")));
    }
    let mut rng = rng::seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng::next_unit(&mut rng) < p {
                edges.push((u, v));
            }
        }
    }
    let mut used = vec![false; n];
    for &(u, v) in &edges {
        used[u] = true;
        used[v] = true;
    }
    let mut remap = vec![usize::MAX; n];
    let mut labels = Vec::new();
    for v in 0..n {
        if used[v] {
            remap[v] = labels.len();
            labels.push(v as u64);
        }
    }
    if labels.is_empty() {
        return Err(Error::InvalidSize(format!("G({n}, {p}) with seed {seed} has no edges")));
    }
    let edges: Vec<_> = edges.into_iter().map(|(u, v)| (remap[u], remap[v])).collect();
    Graph::with_labels(labels, &edges)
}

/// Ball of radius `radius` around the origin of the infinite triangular
/// lattice, in axial coordinates. Boundary = nodes at distance `radius`.
pub fn triangular_patch(radius: usize) -> Result<Patch> {
    if radius == 0 {
        return Err(Error::InvalidSize("triangular patch needs radius >= 1".into()));
    }
    let r = radius as i64;
    let dist = |q: i64, s: i64| ((q.abs() + s.abs() + (q + s).abs()) / 2) as usize;
    let mut index = BTreeMap::new();
    for q in -r..=r {
        for s in -r..=r {
            if dist(q, s) <= radius {
                let next = index.len();
                index.insert((q, s), next);
            }
        }
    }
    let mut edges = Vec::new();
    for (&(q, s), &u) in &index {
        for (dq, ds) in [(1, 0), (0, 1), (-1, 1)] {
            if let Some(&v) = index.get(&(q + dq, s + ds)) {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::new(index.len(), &edges)?;
    let center = index[&(0, 0)];
    let boundary = index.iter().filter(|(&(q, s), _)| dist(q, s) == radius).map(|(_, &v)| v).collect();
    Ok(Patch { graph, center, boundary })
}

/// The 3-regular tree truncated at depth `radius`: the root has three
/// children, every other internal node two. Boundary = the leaves.
pub fn regular_tree3(radius: usize) -> Result<Patch> {
    if radius == 0 {
        return Err(Error::InvalidSize("tree needs radius >= 1".into()));
    }
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next = 1;
    for depth in 0..radius {
        let mut grown = Vec::new();
        for &u in &frontier {
            let children = if depth == 0 { 3 } else { 2 };
            for _ in 0..children {
                edges.push((u, next));
                grown.push(next);
                next += 1;
            }
        }
        frontier = grown;
    }
    let graph = Graph::new(next, &edges)?;
    Ok(Patch { graph, center: 0, boundary: frontier })
}

/// Generator names accepted by [`generate`].
pub const GENERATOR_NAMES: &[&str] = &[
    "complete",
    "cycle",
    "path",
    "circulant",
    "tri-torus",
    "triangle-arm",
    "clique4-minus-edge",
    "petersen",
    "complete-bipartite",
    "cycle-chord",
    "grid",
    "erdos-renyi",
    "tri-patch",
    "tree3",
];

/// Size arguments for [`generate`]; unused fields are ignored.
#[derive(Debug, Clone, Default)]
pub struct GenSpec {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub radius: Option<usize>,
    pub offsets: Vec<usize>,
    pub prob: Option<f64>,
    pub chord: Option<(usize, usize)>,
    pub seed: Option<u64>,
}

/// Dispatches a generator by name.
pub fn generate(kind: &str, spec: &GenSpec) -> Result<Graph> {
    let need = |x: Option<usize>, what: &str| {
        x.ok_or_else(|| Error::InvalidSize(format!("generator {kind} needs {what}")))
    };
    match kind {
        "complete" => complete(need(spec.n, "n")?),
        "cycle" => cycle(need(spec.n, "n")?),
        "path" => path(need(spec.n, "n")?),
        "circulant" => circulant(need(spec.n, "n")?, &spec.offsets),
        "tri-torus" => triangular_torus(need(spec.rows, "rows")?, need(spec.cols, "cols")?),
        "triangle-arm" | "fig3" => Ok(triangle_arm()),
        "clique4-minus-edge" => Ok(clique4_minus_edge()),
        "petersen" => Ok(petersen()),
        "complete-bipartite" => complete_bipartite(need(spec.n, "n")?, need(spec.m, "m")?),
        "cycle-chord" => {
            let (a, b) = spec.chord.ok_or_else(|| Error::InvalidSize("cycle-chord needs a chord".into()))?;
            cycle_with_chord(need(spec.n, "n")?, a, b)
        }
        "grid" => grid(need(spec.rows, "rows")?, need(spec.cols, "cols")?),
        "erdos-renyi" => erdos_renyi(
            need(spec.n, "n")?,
            spec.prob.ok_or_else(|| Error::InvalidSize("erdos-renyi needs p".into()))?,
            spec.seed.unwrap_or(0),
        ),
        "tri-patch" => triangular_patch(need(spec.radius, "radius")?).map(|p| p.graph),
        "tree3" => regular_tree3(need(spec.radius, "radius")?).map(|p| p.graph),
        other => Err(Error::InvalidSize(format!(
            "unknown generator {other:?}; expected one of {}",
            GENERATOR_NAMES.join(", ")
        ))),
    }
}

/// Degree histogram, used in tests and reports.
pub fn degree_histogram(g: &Graph) -> HashMap<usize, usize> {
    let mut h = HashMap::new();
    for d in g.degrees() {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}
