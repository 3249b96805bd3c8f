//! One-shot analysis of a graph and parameter triple: every verifier in the
//! crate, the predictions they are expected to confirm, and the violations.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::balance::{balance_report, check_reversal_symmetry, check_wdb, BalanceReport};
use crate::ergodicity::{check_ergodicity, ErgodicityVerdict};
use crate::error::{Error, Result};
use crate::graph::{Graph, Params, WedgeCounts};
use crate::kernel::{build_edge_kernel, build_wedge_kernel, is_bistochastic, BistochasticVerdict, Kernel};
use crate::linalg::max_abs_diff;
use crate::recurrence::{build_aux_chain, AuxSummary};
use crate::stationary::{
    edge_to_nodes, invariance_residual, pullback, stationary, verify_edge_wedge_product,
    verify_simplified_invariance, wedge_measure_from_edges, Measure, Method, SolverOptions, Target,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub tol: f64,
    pub method: Method,
    pub max_cycle_len: usize,
    pub recurrence_lab: bool,
    /// Ball radius used by the cycle-in-every-ball check when `alpha = 0`.
    pub ball_radius: usize,
    /// Largest `n` in the n-step directed balance check.
    pub nstep_max: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, method: Method::Direct, max_cycle_len: 8, recurrence_lab: false, ball_radius: 3, nstep_max: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub directed_edges: usize,
    pub wedges: usize,
    pub wedge_kinds: WedgeCounts,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        let mut kinds = WedgeCounts::default();
        for w in g.enumerate_wedges() {
            kinds.add(w.kind);
        }
        Self {
            nodes: g.n(),
            edges: g.num_edges(),
            directed_edges: g.num_directed_edges(),
            wedges: g.num_wedges(),
            wedge_kinds: kinds,
            min_degree: g.min_degree(),
            max_degree: g.max_degree(),
            mean_degree: g.num_directed_edges() as f64 / g.n() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySection {
    pub method: Method,
    pub wedge: Measure,
    pub edge: Measure,
    pub node: Measure,
    pub wedge_invariance_residual: f64,
    pub edge_invariance_residual: f64,
    pub simplified_invariance_residual: f64,
    pub edge_pullback_residual: f64,
    pub node_pullback_residual: f64,
    pub product_residual: f64,
    /// Distance to `λ/Z`, reported on regular graphs.
    pub closed_form_residual: Option<f64>,
    /// Distance of the node law to `d_v/|E⃗|`, reported when `beta = gamma`.
    pub degree_proportional_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistochasticSection {
    pub edge: BistochasticVerdict,
    pub wedge: BistochasticVerdict,
    /// `p(w) |IN(w)| = 1` for every wedge.
    pub wedge_criterion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub tol: f64,
    pub params: Params,
    pub graph: GraphSummary,
    pub ergodicity: ErgodicityVerdict,
    pub stationary: Option<StationarySection>,
    pub stationary_error: Option<String>,
    pub balance: Option<BalanceReport>,
    pub bistochastic: Option<BistochasticSection>,
    pub recurrence: Option<AuxSummary>,
    pub recurrence_note: Option<String>,
    pub violations: Vec<String>,
    pub timing_ms: f64,
}

impl AnalysisReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `λ(w)/Z` with `Z = Σ_W λ`.
pub fn lambda_measure(g: &Graph, p: &Params) -> Vec<f64> {
    let lambdas: Vec<f64> = g.enumerate_wedges().iter().map(|w| p.lambda(w.kind)).collect();
    let z: f64 = lambdas.iter().sum();
    lambdas.into_iter().map(|l| l / z).collect()
}

fn wedge_criterion(g: &Graph, k_wedge: &Kernel, tol: f64) -> bool {
    // p(w) is the entry of any row into column w; |IN(w)| = d_a.
    (0..g.num_wedges()).all(|w| {
        let wedge = g.wedge(w);
        let into = g.in_wedges_of_edge(wedge.first_edge());
        let pw = into.first().map_or(0.0, |&src| k_wedge.get(src, w));
        (pw * g.degree(wedge.a) as f64 - 1.0).abs() <= tol
    })
}

struct Measures {
    k_edge: Kernel,
    k_wedge: Kernel,
    pi_edge: Measure,
    pi_hat: Measure,
}

fn solve_measures(g: &Graph, p: &Params, opts: &AnalyzeOptions) -> Result<Measures> {
    let k_edge = build_edge_kernel(g, p)?;
    let k_wedge = build_wedge_kernel(g, p)?;
    let so = SolverOptions { method: opts.method, ..SolverOptions::default() };
    let pi_edge = stationary(&k_edge, &so)?;
    let pi_hat = stationary(&k_wedge, &so)?;
    Ok(Measures { k_edge, k_wedge, pi_edge, pi_hat })
}

/// Runs every check on `g` with parameters `p`.
pub fn analyze(g: &Graph, p: &Params, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let started = Instant::now();
    let tol = opts.tol;
    let ergodicity = check_ergodicity(g, p)?;
    let mut violations = Vec::new();
    if !ergodicity.consistent {
        violations.push(format!("ergodicity prediction {:?} not confirmed by the kernel structure", ergodicity.thm_case));
    }

    let mut stationary_section = None;
    let mut stationary_error = None;
    let mut balance = None;
    let mut bistochastic = None;
    let mut recurrence = None;
    let mut recurrence_note = None;

    // Kernels exist whenever no walk can get trapped.
    let kernels = build_edge_kernel(g, p).and_then(|ke| Ok((ke, build_wedge_kernel(g, p)?)));
    if let Ok((ke, kw)) = &kernels {
        let edge = is_bistochastic(ke, tol);
        let wedge = is_bistochastic(kw, tol);
        let criterion = wedge_criterion(g, kw, tol);
        if wedge.bistochastic != criterion {
            violations.push("wedge bistochasticity disagrees with p(w)|IN(w)| = 1".into());
        }
        if p.beta == p.gamma && !edge.bistochastic {
            violations.push(format!("beta = gamma but edge kernel column sums deviate by {:e}", edge.max_deviation));
        }
        bistochastic = Some(BistochasticSection { edge, wedge, wedge_criterion: criterion });
    }

    let regular = g.min_degree() == g.max_degree();
    match solve_measures(g, p, opts) {
        Ok(m) => {
            let node = pullback(g, &m.pi_hat, Target::Nodes)?;
            let edge_from_wedges = pullback(g, &m.pi_hat, Target::Edges)?;
            let node_from_edges = edge_to_nodes(g, &m.pi_edge)?;
            let section = StationarySection {
                method: opts.method,
                wedge_invariance_residual: invariance_residual(&m.k_wedge, &m.pi_hat.values),
                edge_invariance_residual: invariance_residual(&m.k_edge, &m.pi_edge.values),
                simplified_invariance_residual: verify_simplified_invariance(g, p, &m.pi_hat)?,
                edge_pullback_residual: max_abs_diff(&edge_from_wedges.values, &m.pi_edge.values),
                node_pullback_residual: max_abs_diff(&node.values, &node_from_edges.values),
                product_residual: verify_edge_wedge_product(g, &m.pi_edge, &m.k_edge, &m.pi_hat)?,
                closed_form_residual: regular.then(|| max_abs_diff(&lambda_measure(g, p), &m.pi_hat.values)),
                degree_proportional_residual: (p.beta == p.gamma).then(|| {
                    let total = g.num_directed_edges() as f64;
                    let expect: Vec<f64> = (0..g.n()).map(|v| g.degree(v) as f64 / total).collect();
                    max_abs_diff(&expect, &node.values)
                }),
                wedge: m.pi_hat.clone(),
                edge: m.pi_edge.clone(),
                node,
            };
            for (what, r) in [
                ("simplified wedge invariance", section.simplified_invariance_residual),
                ("edge pullback", section.edge_pullback_residual),
                ("node pullback", section.node_pullback_residual),
                ("edge-wedge product relation", section.product_residual),
            ] {
                if r > tol {
                    violations.push(format!("{what} residual {r:e} exceeds {tol:e}"));
                }
            }
            if let Some(r) = section.closed_form_residual.filter(|&r| r > tol) {
                violations.push(format!("regular graph but wedge measure differs from λ/Z by {r:e}"));
            }
            if let Some(r) = section.degree_proportional_residual.filter(|&r| r > tol) {
                violations.push(format!("beta = gamma but node law differs from degree-proportional by {r:e}"));
            }

            let b = balance_report(g, p, &m.pi_edge, &m.k_edge, &m.pi_hat, &m.k_wedge, opts.max_cycle_len)?;
            balance_violations(g, p, &m, &b, regular, tol, &mut violations)?;
            balance = Some(b);

            if opts.recurrence_lab {
                match build_aux_chain(g, p, &m.pi_edge, &m.k_edge, opts.ball_radius) {
                    Ok(aux) => {
                        let s = aux.summary(g, &m.pi_edge, &m.k_edge, opts.nstep_max)?;
                        for (what, r) in [
                            ("collapsed kernel row sums", s.row_sum_deviation),
                            ("collapsed kernel reversibility", s.reversibility_residual),
                            ("n-step directed balance", s.nstep_balance_residual),
                        ] {
                            if r > tol {
                                violations.push(format!("{what} residual {r:e} exceeds {tol:e}"));
                            }
                        }
                        recurrence = Some(s);
                    }
                    Err(
                        e @ (Error::HypothesisViolated(_)
                        | Error::NoCycleInBall { .. }
                        | Error::NotIrreducible
                        | Error::DeadEnd(_)
                        | Error::Overflow { .. }),
                    ) => recurrence_note = Some(e.to_string()),
                    Err(e) => return Err(e),
                }
            }
            stationary_section = Some(section);
        }
        Err(e) => {
            if ergodicity.predicted_irreducible {
                violations.push(format!("irreducibility predicted but no stationary measure: {e}"));
            }
            stationary_error = Some(e.to_string());
        }
    }

    let eulerian = crate::balance::check_eulerianity(g, p).eulerian;
    if eulerian != regular {
        violations.push(format!("weighted Eulerianity ({eulerian}) disagrees with regularity ({regular})"));
    }

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        tol,
        params: *p,
        graph: GraphSummary::of(g),
        ergodicity,
        stationary: stationary_section,
        stationary_error,
        balance,
        bistochastic,
        recurrence,
        recurrence_note,
        violations,
        timing_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn balance_violations(
    g: &Graph,
    p: &Params,
    m: &Measures,
    b: &BalanceReport,
    regular: bool,
    tol: f64,
    violations: &mut Vec<String>,
) -> Result<()> {
    if b.wedgefact_violation > tol {
        violations.push(format!("concatenated-wedge identity off by {:e}", b.wedgefact_violation));
    }
    if regular {
        if b.wdb_residual > tol {
            violations.push(format!("regular graph but wedge directed balance residual {:e}", b.wdb_residual));
        }
        if b.edb_residual > tol || b.edge_reversal_residual > tol {
            violations.push(format!(
                "regular graph but edge balance/reversal residuals {:e}/{:e}",
                b.edb_residual, b.edge_reversal_residual
            ));
        }
    }
    let edb = b.edb_residual <= tol;
    if edb && b.edge_invariance_residual > tol {
        violations.push(format!("edge directed balance holds but invariance residual is {:e}", b.edge_invariance_residual));
    }
    if edb && p.alpha > 0.0 && b.edge_reversal_residual > tol {
        violations.push(format!("edge directed balance holds but reversal residual is {:e}", b.edge_reversal_residual));
    }
    if edb && b.edge_reversal_residual <= tol {
        let built = wedge_measure_from_edges(g, &m.pi_edge, &m.k_edge)?;
        let wdb = check_wdb(g, &built, &m.k_wedge)?;
        let sym = check_reversal_symmetry(g, &built)?;
        if wdb > tol || sym > tol {
            violations.push(format!("wedge measure built from edges fails balance ({wdb:e}) or symmetry ({sym:e})"));
        }
        if let Some(c) = b.cycle_condition.as_ref().filter(|c| !c.holds) {
            violations.push(format!(
                "edge measure is reversal symmetric but the cycle product condition fails (gap {:e})",
                c.worst_relative_gap
            ));
        }
    }
    if b.wdb_residual <= tol && p.alpha > 0.0 && b.wedge_reversal_residual > tol {
        violations.push(format!("wedge directed balance holds but reversal residual is {:e}", b.wedge_reversal_residual));
    }
    Ok(())
}
