//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines print in order.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use walklab::balance::{check_edb, check_eulerianity, check_regular, check_reversal_symmetry, check_wdb};
use walklab::corpus::{connected_graphs, named_corpus};
use walklab::ergodicity::{is_irreducible, live_wedge_kernel};
use walklab::generators::*;
use walklab::kernel::{build_edge_kernel, build_wedge_kernel, is_bistochastic};
use walklab::recurrence::{
    alpha_zero_setup, build_aux_chain, growth_csv, recurrence_proxy_experiment, reversibility_residual,
    verify_nstep_directed_balance, Family,
};
use walklab::simulate::{occupation, return_times, walk};
use walklab::stationary::{
    edge_to_nodes, invariance_residual, pullback, stationary, verify_edge_wedge_product, wedge_measure_from_edges,
    SolverOptions, Target,
};
use walklab::{DirectedEdge, Graph};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn solve(k: &walklab::Kernel) -> Vec<f64> {
    stationary(k, &SolverOptions::default()).unwrap().values
}

fn c1_clique4_minus_edge_closed_form() -> Outcome {
    let g = clique4_minus_edge();
    let mut worst: f64 = 0.0;
    for p in [params(1.0, 1.0, 1.0), params(1.0, 2.0, 3.0)] {
        let pi = solve(&build_wedge_kernel(&g, &p).unwrap());
        let diff = max_diff(&pi, &clique4_minus_edge_closed_form(&g, &p));
        ensure(diff < 1e-10, || format!("{p:?}: max deviation {diff:e}"))?;
        worst = worst.max(diff);
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn c2_regular_closed_form() -> Outcome {
    let triples = [params(1.0, 1.0, 1.0), params(1.0, 2.0, 3.0), params(0.5, 2.0, 0.7)];
    let (mut worst_pi, mut worst_wdb): (f64, f64) = (0.0, 0.0);
    for (name, g) in regular_fixtures() {
        let adj = adjacency(&g);
        for p in &triples {
            let kw = build_wedge_kernel(&g, p).unwrap();
            let pi = stationary(&kw, &SolverOptions::default()).unwrap();
            let lambdas: Vec<f64> = wedges(&g).iter().map(|&(a, _, c)| weight(&adj, p, a, c)).collect();
            let z: f64 = lambdas.iter().sum();
            let closed: Vec<f64> = lambdas.iter().map(|l| l / z).collect();
            let d = max_diff(&pi.values, &closed);
            let wdb = check_wdb(&g, &pi, &kw).unwrap();
            let eul = check_eulerianity(&g, p);
            ensure(d < 1e-10, || format!("{name} {p:?}: π̂ off λ/Z by {d:e}"))?;
            ensure(wdb < 1e-10, || format!("{name} {p:?}: WDB residual {wdb:e}"))?;
            ensure(eul.eulerian && eul.max_violation == 0.0, || format!("{name} {p:?}: not Eulerian"))?;
            worst_pi = worst_pi.max(d);
            worst_wdb = worst_wdb.max(wdb);
        }
    }
    Ok(format!("15 instances, max |π̂−λ/Z| {worst_pi:.2e}, max WDB {worst_wdb:.2e}"))
}

fn c3_eulerian_iff_regular() -> Outcome {
    let grid = [params(1.0, 1.0, 1.0), params(1.0, 2.0, 3.0), params(2.0, 1.0, 1.0), params(0.0, 1.0, 2.0)];
    let expected = [(4, 6), (5, 21), (6, 112), (7, 853)];
    let mut checks = 0;
    let mut disagreements = 0;
    for (n, count) in expected {
        let graphs = connected_graphs(n).unwrap();
        ensure(graphs.len() == count, || format!("{} connected graphs on {n} nodes, expected {count}", graphs.len()))?;
        for g in &graphs {
            let regular = check_regular(g).unwrap();
            for p in &grid {
                checks += 1;
                if check_eulerianity(g, p).eulerian != regular {
                    disagreements += 1;
                }
            }
        }
    }
    ensure(disagreements == 0, || format!("{disagreements} disagreements"))?;
    Ok(format!("992 graphs × 4 triples = {checks} checks, 0 disagreements"))
}

fn c4_bistochasticity() -> Outcome {
    let g = triangle_arm();
    // Column of the directed edge (c, a) with a, b, c the triangle and d the pendant.
    let col = g.edge_id(DirectedEdge::new(2, 0)).unwrap();
    let mut worst: f64 = 0.0;
    for p in [params(1.0, 2.0, 3.0), params(0.3, 1.7, 0.4), params(2.0, 1.0, 1.0)] {
        let sum = build_edge_kernel(&g, &p).unwrap().column_sums()[col];
        let d = (sum - triangle_arm_column_sum(&p)).abs();
        ensure(d < 1e-12, || format!("{p:?}: column sum {sum} vs formula, diff {d:e}"))?;
        worst = worst.max(d);
    }
    let values = [0.5, 1.0, 2.0, 3.0, 5.0];
    for &b in &values {
        for &c in &values {
            let v = is_bistochastic(&build_edge_kernel(&g, &params(1.0, b, c)).unwrap(), 1e-12);
            ensure(v.bistochastic == (b == c), || format!("β={b}, γ={c}: verdict {}", v.bistochastic))?;
        }
    }
    Ok(format!("column-sum formula within {worst:.2e}; verdict ⟺ β=γ on 25 grid points"))
}

fn measure_corpus() -> Vec<(String, Graph)> {
    let mut out = named_corpus().unwrap();
    for n in 4..=6 {
        for (i, g) in connected_graphs(n).unwrap().into_iter().enumerate() {
            out.push((format!("n{n}-{i}"), g));
        }
    }
    out
}

fn full_corpus() -> Vec<(String, Graph)> {
    let mut out = measure_corpus();
    for (i, g) in connected_graphs(7).unwrap().into_iter().enumerate() {
        out.push((format!("n7-{i}"), g));
    }
    out
}

const GRID: [(f64, f64, f64); 5] = [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0), (2.0, 1.0, 1.0), (0.0, 1.0, 2.0), (0.5, 3.0, 3.0)];

fn c5_measure_relations() -> Outcome {
    let mut instances = 0;
    let (mut worst, mut worst_deg): (f64, f64) = (0.0, 0.0);
    for (name, g) in measure_corpus() {
        for &(a, b, c) in &GRID {
            let p = params(a, b, c);
            let (Ok(ke), Ok((kw_live, _)), Ok(kw)) =
                (build_edge_kernel(&g, &p), live_wedge_kernel(&g, &p), build_wedge_kernel(&g, &p))
            else {
                continue;
            };
            if !(is_irreducible(&ke) && is_irreducible(&kw_live)) {
                continue;
            }
            instances += 1;
            let pe = stationary(&ke, &SolverOptions::default()).unwrap();
            let pw = stationary(&kw, &SolverOptions::default()).unwrap();
            let product = verify_edge_wedge_product(&g, &pe, &ke, &pw).unwrap();
            let edges = max_diff(&pullback(&g, &pw, Target::Edges).unwrap().values, &pe.values);
            let nodes_w = pullback(&g, &pw, Target::Nodes).unwrap();
            let nodes = max_diff(&nodes_w.values, &edge_to_nodes(&g, &pe).unwrap().values);
            let r = product.max(edges).max(nodes);
            ensure(r < 1e-10, || format!("{name} {p:?}: product {product:e}, edge {edges:e}, node {nodes:e}"))?;
            worst = worst.max(r);
            if b == c {
                let total = g.num_directed_edges() as f64;
                let deg: Vec<f64> = (0..g.n()).map(|v| g.degree(v) as f64 / total).collect();
                let d = max_diff(&deg, &nodes_w.values);
                ensure(d < 1e-12, || format!("{name} {p:?}: node law off d_v/|E⃗| by {d:e}"))?;
                worst_deg = worst_deg.max(d);
            }
        }
    }
    Ok(format!("{instances} irreducible instances, max relation residual {worst:.2e}, max degree-law gap {worst_deg:.2e}"))
}

fn c6_balance_implications() -> Outcome {
    let (mut instances, mut edb_holds, mut wdb_holds) = (0, 0, 0);
    for (name, g) in full_corpus() {
        for &(a, b, c) in &GRID {
            let p = params(a, b, c);
            let (Ok(ke), Ok(kw)) = (build_edge_kernel(&g, &p), build_wedge_kernel(&g, &p)) else {
                continue;
            };
            let (Ok(pe), Ok(pw)) =
                (stationary(&ke, &SolverOptions::default()), stationary(&kw, &SolverOptions::default()))
            else {
                continue;
            };
            instances += 1;
            if check_edb(&g, &pe, &ke).unwrap() < 1e-10 {
                edb_holds += 1;
                let inv = invariance_residual(&ke, &pe.values);
                ensure(inv < 1e-10, || format!("{name} {p:?}: invariance residual {inv:e}"))?;
                let sym = check_reversal_symmetry(&g, &pe).unwrap();
                if a > 0.0 {
                    ensure(sym < 1e-10, || format!("{name} {p:?}: edge reversal residual {sym:e}"))?;
                }
                if sym < 1e-10 {
                    let built = wedge_measure_from_edges(&g, &pe, &ke).unwrap();
                    let wdb = check_wdb(&g, &built, &kw).unwrap();
                    let wsym = check_reversal_symmetry(&g, &built).unwrap();
                    ensure(wdb < 1e-10 && wsym < 1e-10, || {
                        format!("{name} {p:?}: built wedge measure WDB {wdb:e}, symmetry {wsym:e}")
                    })?;
                }
            }
            if check_wdb(&g, &pw, &kw).unwrap() < 1e-10 {
                wdb_holds += 1;
                let inv = invariance_residual(&kw, &pw.values);
                ensure(inv < 1e-10, || format!("{name} {p:?}: wedge invariance residual {inv:e}"))?;
                if a > 0.0 {
                    let s = check_reversal_symmetry(&g, &pw).unwrap();
                    ensure(s < 1e-10, || format!("{name} {p:?}: wedge reversal residual {s:e}"))?;
                }
            }
        }
    }
    Ok(format!("{instances} instances; EDB held on {edb_holds}, WDB on {wdb_holds}; all implications confirmed"))
}

fn c7_recurrence_machinery() -> Outcome {
    let fixtures = [
        ("K4", complete(4).unwrap()),
        ("tri-torus-4x4", triangular_torus(4, 4).unwrap()),
        ("clique4-minus-edge", clique4_minus_edge()),
    ];
    let (mut rows, mut rev, mut series, mut nstep): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (name, g) in &fixtures {
        let p = params(1.0, 1.0, 1.0);
        let ke = build_edge_kernel(g, &p).unwrap();
        let pe = stationary(&ke, &SolverOptions::default()).unwrap();
        let aux = build_aux_chain(g, &p, &pe, &ke, 1).map_err(|e| format!("{name}: {e}"))?;
        let dev = aux.k_bar.row_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
        let r = reversibility_residual(&aux.k_bar, &aux.pi_bar);
        let oracle = kbar_series(&aux.k_lazy.to_dense(), aux.p, &g.undirected_edge_ids(), g.num_edges(), 200);
        let s = (aux.k_bar.to_dense() - oracle).abs().max();
        let n = verify_nstep_directed_balance(g, &pe, &ke, 5).unwrap();
        ensure(dev < 1e-10, || format!("{name}: row-sum deviation {dev:e}"))?;
        ensure(r < 1e-10, || format!("{name}: reversibility residual {r:e}"))?;
        ensure(s < 1e-12, || format!("{name}: closed form vs series {s:e}"))?;
        ensure(n < 1e-10, || format!("{name}: n-step balance residual {n:e}"))?;
        (rows, rev, series, nstep) = (rows.max(dev), rev.max(r), series.max(s), nstep.max(n));
    }
    Ok(format!("rows {rows:.1e}, reversibility {rev:.1e}, series gap {series:.1e}, n≤5 balance {nstep:.1e}"))
}

fn c8_alpha_zero() -> Outcome {
    let g = triangular_torus(4, 4).unwrap();
    let s = alpha_zero_setup(&g, &params(0.0, 1.0, 2.0), 1).map_err(|e| e.to_string())?;
    let d = s.d.as_ref().unwrap();
    let mut worst = f64::INFINITY;
    for e in 0..g.num_directed_edges() {
        let back = d.get(e, g.reverse_edge_id(e));
        ensure(back >= 2.0 * s.p, || format!("edge {e}: D(e,−e) = {back:e} < 2p = {:e}", 2.0 * s.p))?;
        worst = worst.min(back / (2.0 * s.p));
    }
    Ok(format!("M = {}, p = {:.3e}, min D(e,−e)/(2p) = {worst:.3} over {} edges", s.m, s.p, g.num_directed_edges()))
}

fn c9_monte_carlo() -> Outcome {
    let g = clique4_minus_edge();
    let p = params(1.0, 2.0, 3.0);
    let ws = wedges(&g);
    let pi_hat = stationary_oracle(&wedge_matrix(&g, &p));
    let mut pi = vec![0.0; g.n()];
    for (i, &(_, _, c)) in ws.iter().enumerate() {
        pi[c] += pi_hat[i];
    }
    let tr = walk(&g, &p, DirectedEdge::new(0, 1), 1_000_000, 42).map_err(|e| e.to_string())?;
    let occ = occupation(&g, &tr, 0).unwrap();
    let d = tv(&occ.nodes.values, &pi);
    ensure(d < 0.01, || format!("TV {d:e}"))?;
    let mut worst: f64 = 0.0;
    for (v, &pv) in pi.iter().enumerate() {
        let stats = return_times(&tr, v).map_err(|e| e.to_string())?;
        let rel = (stats.mean * pv - 1.0).abs();
        ensure(rel < 0.1, || format!("node {v}: mean gap {} vs 1/π = {}", stats.mean, 1.0 / pv))?;
        worst = worst.max(rel);
    }
    Ok(format!("TV {d:.2e}; worst relative return-gap error {worst:.2e}"))
}

fn c10_recurrence_proxy() -> Outcome {
    let p = params(1.0, 1.0, 1.0);
    let radii: Vec<usize> = (2..=6).collect();
    let tri = recurrence_proxy_experiment(Family::Triangular, &radii, &p).map_err(|e| e.to_string())?;
    let tree = recurrence_proxy_experiment(Family::Tree3, &radii, &p).map_err(|e| e.to_string())?;
    println!("  triangular growth table:\n{}", indent(&growth_csv(&tri)));
    println!("  tree3 growth table:\n{}", indent(&growth_csv(&tree)));
    for w in tri.windows(2) {
        ensure(w[1].r_srw > w[0].r_srw, || format!("R_srw not increasing at radius {}", w[1].size))?;
        ensure(w[1].r_kbar > w[0].r_kbar, || format!("R_kbar not increasing at radius {}", w[1].size))?;
    }
    for row in &tree {
        let oracle = tree3_resistance(row.size);
        ensure((row.r_srw - oracle).abs() < 1e-10, || format!("tree radius {}: {} vs oracle {oracle}", row.size, row.r_srw))?;
        ensure(row.r_srw < TREE3_RESISTANCE_LIMIT, || format!("tree radius {}: {} not below 2/3", row.size, row.r_srw))?;
    }
    Ok(format!(
        "triangular R_srw {:.3}→{:.3}, R_kbar {:.3}→{:.3}; tree R_srw ≤ {:.4} < 2/3",
        tri[0].r_srw,
        tri[4].r_srw,
        tri[0].r_kbar,
        tri[4].r_kbar,
        tree[4].r_srw
    ))
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}

/// Name, check and time limit.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("clique4-minus-edge closed form", c1_clique4_minus_edge_closed_form, Duration::from_secs(1)),
        ("regular-graph closed form", c2_regular_closed_form, Duration::from_secs(5)),
        ("Eulerianity iff regularity", c3_eulerian_iff_regular, Duration::from_secs(600)),
        ("bistochasticity", c4_bistochasticity, Duration::from_secs(1)),
        ("measure relations", c5_measure_relations, Duration::from_secs(600)),
        ("balance implications", c6_balance_implications, Duration::from_secs(60)),
        ("recurrence machinery", c7_recurrence_machinery, Duration::from_secs(10)),
        ("alpha = 0 machinery", c8_alpha_zero, Duration::from_secs(5)),
        ("Monte Carlo agreement", c9_monte_carlo, Duration::from_secs(30)),
        ("recurrence proxy", c10_recurrence_proxy, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = t.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *limit => Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg} [{elapsed:.2?}]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {msg} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

