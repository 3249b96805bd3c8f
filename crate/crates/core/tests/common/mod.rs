//! Independent oracles for the integration tests. Nothing here calls the
//! library's kernel builders or solvers; inputs are graphs and parameters only.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::DMatrix;
use walklab::generators::*;
use walklab::{Graph, Params};

pub fn params(a: f64, b: f64, c: f64) -> Params {
    Params::new(a, b, c).unwrap()
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// Weight of moving to `c` from `b` after coming from `a`.
pub fn weight(adj: &[Vec<bool>], p: &Params, a: usize, c: usize) -> f64 {
    if a == c {
        p.alpha
    } else if adj[a][c] {
        p.beta
    } else {
        p.gamma
    }
}

/// Wedges in lexicographic order, rebuilt from the adjacency matrix.
pub fn wedges(g: &Graph) -> Vec<(usize, usize, usize)> {
    let adj = adjacency(g);
    let n = g.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if adj[a][b] && adj[b][c] {
                    out.push((a, b, c));
                }
            }
        }
    }
    out
}

pub fn directed_edges(g: &Graph) -> Vec<(usize, usize)> {
    let adj = adjacency(g);
    let n = g.n();
    (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).filter(|&(u, v)| adj[u][v]).collect()
}

/// Dense edge kernel straight from the transition rule.
pub fn edge_matrix(g: &Graph, p: &Params) -> DMatrix<f64> {
    let adj = adjacency(g);
    let es = directed_edges(g);
    let idx = |e: (usize, usize)| es.iter().position(|&x| x == e).unwrap();
    let mut m = DMatrix::zeros(es.len(), es.len());
    for (i, &(a, b)) in es.iter().enumerate() {
        let denom: f64 = (0..g.n()).filter(|&c| adj[b][c]).map(|c| weight(&adj, p, a, c)).sum();
        for c in (0..g.n()).filter(|&c| adj[b][c]) {
            m[(i, idx((b, c)))] = weight(&adj, p, a, c) / denom;
        }
    }
    m
}

/// Dense wedge kernel straight from the transition rule.
pub fn wedge_matrix(g: &Graph, p: &Params) -> DMatrix<f64> {
    let adj = adjacency(g);
    let ws = wedges(g);
    let mut m = DMatrix::zeros(ws.len(), ws.len());
    for (i, &(_, b, c)) in ws.iter().enumerate() {
        let denom: f64 = (0..g.n()).filter(|&d| adj[c][d]).map(|d| weight(&adj, p, b, d)).sum();
        for (j, &(b2, c2, d)) in ws.iter().enumerate() {
            if b2 == b && c2 == c {
                m[(i, j)] = weight(&adj, p, b, d) / denom;
            }
        }
    }
    m
}

/// Stationary vector by Gauss–Jordan elimination on `[Pᵀ − I; 1ᵀ]` with
/// full pivoting, written out so that it does not share code with the library.
pub fn stationary_oracle(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = m[(j, i)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[n - 1][j] = 1.0;
    }
    a[n - 1][n] = 1.0;
    let mut col_of = (0..n).collect::<Vec<_>>();
    for k in 0..n {
        let (mut bi, mut bj, mut best) = (k, k, 0.0);
        for i in k..n {
            for j in k..n {
                if a[i][j].abs() > best {
                    (bi, bj, best) = (i, j, a[i][j].abs());
                }
            }
        }
        a.swap(k, bi);
        for row in a.iter_mut() {
            row.swap(k, bj);
        }
        col_of.swap(k, bj);
        let piv = a[k][k];
        for j in k..=n {
            a[k][j] /= piv;
        }
        for i in 0..n {
            if i != k && a[i][k] != 0.0 {
                let f = a[i][k];
                for j in k..=n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[col_of[k]] = a[k][n];
    }
    x
}

/// Boolean transitive closure: irreducible iff every state reaches every state.
pub fn irreducible_oracle(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] > 0.0).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r.iter().all(|row| row.iter().all(|&b| b))
}

/// Period of an irreducible support: gcd of the lengths `t ≤ 3n` with a
/// closed walk at state 0, from boolean matrix powers.
pub fn period_oracle(m: &DMatrix<f64>) -> usize {
    let n = m.nrows();
    let b: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] > 0.0).collect()).collect();
    let mut reach = vec![false; n];
    reach[0] = true;
    let mut g = 0;
    for t in 1..=3 * n {
        let mut next = vec![false; n];
        for i in 0..n {
            if reach[i] {
                for j in 0..n {
                    next[j] |= b[i][j];
                }
            }
        }
        reach = next;
        if reach[0] {
            g = gcd(g, t);
        }
    }
    g
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Closed-form stationary wedge measure on the 4-clique with one edge
/// removed, keyed by wedge kind and the degrees of its three nodes.
pub fn clique4_minus_edge_closed_form(g: &Graph, p: &Params) -> Vec<f64> {
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    let z = 10.0 * a + 12.0 * b + 8.0 * c;
    let r = (a + b + c) / (a + b);
    let adj = adjacency(g);
    wedges(g)
        .into_iter()
        .map(|(x, y, w)| {
            let d = (g.degree(x), g.degree(y), g.degree(w));
            if x == w {
                match d {
                    (3, 3, 3) => a / z,
                    (3, 2, 3) => r * a / z,
                    (2, 3, 2) => a / z,
                    other => panic!("unexpected flat wedge class {other:?}"),
                }
            } else if adj[x][w] {
                if d.1 == 2 {
                    r * b / z
                } else {
                    b / z
                }
            } else {
                c / z
            }
        })
        .collect()
}

/// The designated column sum on the triangle with a pendant edge.
pub fn triangle_arm_column_sum(p: &Params) -> f64 {
    let (a, b, c) = (p.alpha, p.beta, p.gamma);
    a / (a + b + c) + c / (a + 2.0 * c) + b / (a + b + c)
}

/// Effective resistance from the root of the depth-`r` 3-regular tree to
/// its glued leaves: three branches in parallel, each a chain of levels whose
/// resistance halves level by level.
pub fn tree3_resistance(r: usize) -> f64 {
    (1..=r).map(|k| 1.0 / (3.0 * 2f64.powi(k as i32 - 1))).sum()
}

/// Resistance to infinity of the infinite 3-regular tree.
pub const TREE3_RESISTANCE_LIMIT: f64 = 2.0 / 3.0;

/// `Σ_{i ≤ t} (1−p)^i p K_Lⁱ`, summed into undirected-edge blocks.
pub fn kbar_series(k_lazy: &DMatrix<f64>, p: f64, und: &[usize], m: usize, t: usize) -> DMatrix<f64> {
    let n = k_lazy.nrows();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let mut w = p;
    for _ in 0..=t {
        acc += &power * w;
        power = &power * k_lazy;
        w *= 1.0 - p;
    }
    let mut out = DMatrix::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            out[(und[i], und[j])] += 0.5 * acc[(i, j)];
        }
    }
    out
}

/// Named fixtures used across test files.
pub fn regular_fixtures() -> Vec<(&'static str, Graph)> {
    vec![
        ("K4", complete(4).unwrap()),
        ("K5", complete(5).unwrap()),
        ("petersen", petersen()),
        ("cycle7", cycle(7).unwrap()),
        ("tri-torus-4x4", triangular_torus(4, 4).unwrap()),
    ]
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
