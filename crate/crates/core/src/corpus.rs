//! Test corpora: a list of named graphs and all connected graphs on a few
//! nodes up to isomorphism.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::generators::*;
use crate::graph::Graph;

/// Named graphs of small to moderate size covering regular, irregular,
/// bipartite, triangle-free and leafy cases.
pub fn named_corpus() -> Result<Vec<(String, Graph)>> {
    let mut out = vec![
        ("K4".to_string(), complete(4)?),
        ("K5".to_string(), complete(5)?),
        ("petersen".to_string(), petersen()),
        ("cycle5".to_string(), cycle(5)?),
        ("cycle7".to_string(), cycle(7)?),
        ("triangle-arm".to_string(), triangle_arm()),
        ("clique4-minus-edge".to_string(), clique4_minus_edge()),
        ("tri-torus-4x4".to_string(), triangular_torus(4, 4)?),
        ("K3,3".to_string(), complete_bipartite(3, 3)?),
        ("K2,3".to_string(), complete_bipartite(2, 3)?),
        ("cycle6-chord".to_string(), cycle_with_chord(6, 0, 3)?),
        ("cycle5-chord".to_string(), cycle_with_chord(5, 0, 2)?),
        ("grid3x3".to_string(), grid(3, 3)?),
        ("path4".to_string(), path(4)?),
        ("circulant8-12".to_string(), circulant(8, &[1, 2])?),
        ("tri-patch-2".to_string(), triangular_patch(2)?.graph),
        ("tree3-2".to_string(), regular_tree3(2)?.graph),
    ];
    for seed in [1u64, 2, 3] {
        let g = erdos_renyi(9, 0.45, seed)?;
        if g.is_connected() {
            out.push((format!("er9-{seed}"), g));
        }
    }
    Ok(out)
}

/// Simple graph on at most 16 nodes as adjacency bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Small {
    adj: Vec<u16>,
}

impl Small {
    fn n(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    fn extend(&self, mask: u16) -> Small {
        let n = self.n();
        let mut adj = self.adj.clone();
        for (u, row) in adj.iter_mut().enumerate() {
            if mask >> u & 1 == 1 {
                *row |= 1 << n;
            }
        }
        adj.push(mask);
        Small { adj }
    }

    fn is_connected(&self) -> bool {
        let mut seen: u16 = 1;
        let mut frontier: u16 = 1;
        while frontier != 0 {
            let mut next = 0;
            for v in 0..self.n() {
                if frontier >> v & 1 == 1 {
                    next |= self.adj[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen.count_ones() as usize == self.n()
    }

    /// Sorted degrees plus the rounded adjacency spectrum.
    fn invariant(&self) -> (Vec<u32>, Vec<i64>) {
        let n = self.n();
        let mut degs: Vec<u32> = (0..n).map(|v| self.degree(v)).collect();
        degs.sort_unstable();
        let m = DMatrix::from_fn(n, n, |i, j| f64::from(self.adj[i] >> j & 1));
        let mut spec: Vec<i64> = m.symmetric_eigenvalues().iter().map(|x| (x * 1e6).round() as i64).collect();
        spec.sort_unstable();
        (degs, spec)
    }

    fn isomorphic(&self, other: &Small) -> bool {
        fn extend_map(a: &Small, b: &Small, map: &mut Vec<usize>, used: &mut u16) -> bool {
            let k = map.len();
            if k == a.n() {
                return true;
            }
            for c in 0..b.n() {
                if *used >> c & 1 == 1 || a.degree(k) != b.degree(c) {
                    continue;
                }
                let consistent =
                    (0..k).all(|i| (a.adj[k] >> i & 1) == (b.adj[c] >> map[i] & 1));
                if consistent {
                    map.push(c);
                    *used |= 1 << c;
                    if extend_map(a, b, map, used) {
                        return true;
                    }
                    *used &= !(1 << c);
                    map.pop();
                }
            }
            false
        }
        self.n() == other.n() && extend_map(self, other, &mut Vec::new(), &mut 0)
    }

    fn to_graph(&self) -> Result<Graph> {
        let mut edges = Vec::new();
        for u in 0..self.n() {
            for v in u + 1..self.n() {
                if self.adj[u] >> v & 1 == 1 {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(self.n(), &edges)
    }
}

/// One representative per isomorphism class of all graphs on `n` nodes,
/// built by attaching a new node to every graph on `n − 1` nodes in every
/// possible way and rejecting isomorphs.
fn all_graphs(n: usize) -> Vec<Small> {
    let mut level = vec![Small { adj: vec![0] }];
    for k in 1..n {
        let mut buckets: HashMap<(Vec<u32>, Vec<i64>), Vec<Small>> = HashMap::new();
        let mut order = Vec::new();
        for g in &level {
            for mask in 0..(1u16 << k) {
                let h = g.extend(mask);
                let key = h.invariant();
                let bucket = buckets.entry(key.clone()).or_default();
                if !bucket.iter().any(|x| x.isomorphic(&h)) {
                    bucket.push(h.clone());
                    order.push(h);
                }
            }
        }
        level = order;
    }
    level
}

/// Number of isomorphism classes of all simple graphs on `n` nodes.
pub fn count_all_graphs(n: usize) -> usize {
    all_graphs(n).len()
}

/// One graph per isomorphism class of connected graphs on `n` nodes
/// (`2 ≤ n ≤ 16`), in a deterministic order.
pub fn connected_graphs(n: usize) -> Result<Vec<Graph>> {
    assert!((2..=16).contains(&n), "connected_graphs supports 2..=16 nodes");
    all_graphs(n).into_iter().filter(Small::is_connected).map(|s| s.to_graph()).collect()
}
