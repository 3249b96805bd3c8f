//! Directed detailed balance on edges and wedges, weighted Eulerianity,
//! reversal symmetry and the cycle-product condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Params, Wedge};
use crate::kernel::{Kernel, Space};
use crate::stationary::{invariance_residual, Measure};

/// Tolerance for comparing non-integral λ-sums.
pub const LAMBDA_TOL: f64 = 1e-12;

/// Default cap on the number of cycles enumerated by [`check_cycle_condition`].
pub const CYCLE_BUDGET: usize = 1_000_000;

/// `(Σ_{ON} λ, Σ_{IN} λ)` for the wedges leaving and entering edge `e`.
pub fn edge_lambda_sums(g: &Graph, p: &Params, e: usize) -> (f64, f64) {
    let de = g.edge(e);
    (p.weigh(g.out_counts(de)), p.weigh(g.in_counts(de)))
}

fn lambda_sums_equal(p: &Params, a: f64, b: f64) -> bool {
    if p.is_integral() {
        a == b
    } else {
        (a - b).abs() <= LAMBDA_TOL * a.abs().max(b.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerianVerdict {
    pub eulerian: bool,
    pub max_violation: f64,
    /// A wedge attaining the largest violation, when there is one.
    pub witness: Option<Wedge>,
}

/// Weighted Eulerianity: the λ-sum over `ON(w)` equals the λ-sum over
/// `IN(w)` for every wedge `w`. Both sums only depend on the first edge of
/// `w`, so the check runs over directed edges with a nonempty out-block.
pub fn check_eulerianity(g: &Graph, p: &Params) -> EulerianVerdict {
    let mut eulerian = true;
    let mut max_violation = 0.0;
    let mut witness = None;
    for e in 0..g.num_directed_edges() {
        let block = g.out_block(e);
        if block.is_empty() {
            continue;
        }
        let (on, inn) = edge_lambda_sums(g, p, e);
        let diff = (on - inn).abs();
        if !lambda_sums_equal(p, on, inn) {
            eulerian = false;
            if diff > max_violation {
                max_violation = diff;
                witness = Some(g.wedge(block.start));
            }
        }
    }
    EulerianVerdict { eulerian, max_violation, witness }
}

pub fn check_regular(g: &Graph) -> Result<bool> {
    g.ensure_connected()?;
    Ok(g.min_degree() == g.max_degree())
}

/// `max |π⃗(e)P⃗(e,e') − π⃗(e')P⃗(−e',−e)|` over pairs joined by a wedge.
pub fn check_edb(g: &Graph, pi_edge: &Measure, k_edge: &Kernel) -> Result<f64> {
    pi_edge.expect_space(Space::Edge)?;
    let pi = &pi_edge.values;
    let mut worst: f64 = 0.0;
    for w in g.enumerate_wedges() {
        let e = g.edge_id(w.first_edge()).unwrap();
        let f = g.edge_id(w.second_edge()).unwrap();
        let (rf, re) = (g.reverse_edge_id(f), g.reverse_edge_id(e));
        worst = worst.max((pi[e] * k_edge.get(e, f) - pi[f] * k_edge.get(rf, re)).abs());
    }
    Ok(worst)
}

/// `max |π̂(w)P̂(w,w') − π̂(−w')P̂(−w',−w)|` over concatenated pairs, i.e.
/// `w = (a,b,c)`, `w' = (b,c,d)`.
pub fn check_wdb(g: &Graph, pi_hat: &Measure, k_wedge: &Kernel) -> Result<f64> {
    pi_hat.expect_space(Space::Wedge)?;
    let pi = &pi_hat.values;
    let mut worst: f64 = 0.0;
    for w in 0..g.num_wedges() {
        let rw = g.reverse_wedge_id(w);
        let second = g.edge_id(g.wedge(w).second_edge()).unwrap();
        for w2 in g.out_block(second) {
            let rw2 = g.reverse_wedge_id(w2);
            let lhs = pi[w] * k_wedge.get(w, w2);
            let rhs = pi[rw2] * k_wedge.get(rw2, rw);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// `max |m(s) − m(−s)|` for an edge or wedge measure.
pub fn check_reversal_symmetry(g: &Graph, m: &Measure) -> Result<f64> {
    let rev: Box<dyn Fn(usize) -> usize> = match m.space {
        Space::Edge => Box::new(|i| g.reverse_edge_id(i)),
        Space::Wedge => Box::new(|i| g.reverse_wedge_id(i)),
        other => {
            return Err(Error::SpaceMismatch { expected: "edge or wedge".into(), found: other.name().into() })
        }
    };
    Ok((0..m.len()).map(|i| (m.values[i] - m.values[rev(i)]).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub holds: bool,
    pub max_len: usize,
    pub cycles_checked: usize,
    /// Directed-edge ids of the cycle with the largest relative discrepancy.
    pub worst_cycle: Option<Vec<usize>>,
    pub worst_relative_gap: f64,
}

/// Checks `Π Σ_{ON(e_i)} λ = Π Σ_{IN(e_i)} λ` on every simple cycle of the
/// edge chain with length in `3..=max_len`. Requires `alpha = 0`.
pub fn check_cycle_condition(g: &Graph, p: &Params, max_len: usize, budget: usize) -> Result<CycleReport> {
    if p.alpha != 0.0 {
        return Err(Error::Precondition("cycle condition applies to alpha = 0".into()));
    }
    let m = g.num_directed_edges();
    let succ: Vec<Vec<usize>> = (0..m)
        .map(|e| {
            g.out_block(e)
                .filter(|&w| p.lambda(g.wedge(w).kind) > 0.0)
                .map(|w| g.edge_id(g.wedge(w).second_edge()).unwrap())
                .collect()
        })
        .collect();
    let sums: Vec<(f64, f64)> = (0..m).map(|e| edge_lambda_sums(g, p, e)).collect();
    let integral = p.is_integral();

    let mut report =
        CycleReport { holds: true, max_len, cycles_checked: 0, worst_cycle: None, worst_relative_gap: 0.0 };
    let mut path = Vec::with_capacity(max_len);
    let mut on_path = vec![false; m];

    struct Ctx<'a> {
        succ: &'a [Vec<usize>],
        sums: &'a [(f64, f64)],
        integral: bool,
        max_len: usize,
        budget: usize,
    }

    fn close(ctx: &Ctx, path: &[usize], report: &mut CycleReport) -> Result<()> {
        report.cycles_checked += 1;
        if report.cycles_checked > ctx.budget {
            return Err(Error::BudgetExceeded(ctx.budget));
        }
        let (ok, gap) = if ctx.integral {
            let mut on: u128 = 1;
            let mut inn: u128 = 1;
            let mut exact = true;
            for &e in path {
                match (on.checked_mul(ctx.sums[e].0 as u128), inn.checked_mul(ctx.sums[e].1 as u128)) {
                    (Some(a), Some(b)) => (on, inn) = (a, b),
                    _ => exact = false,
                }
            }
            if exact {
                let gap = on.abs_diff(inn) as f64 / on.max(inn) as f64;
                (on == inn, gap)
            } else {
                float_products(ctx, path)
            }
        } else {
            float_products(ctx, path)
        };
        if !ok {
            report.holds = false;
        }
        if gap > report.worst_relative_gap || (!ok && report.worst_cycle.is_none()) {
            report.worst_relative_gap = gap;
            report.worst_cycle = Some(path.to_vec());
        }
        Ok(())
    }

    fn float_products(ctx: &Ctx, path: &[usize]) -> (bool, f64) {
        let log_ratio: f64 = path.iter().map(|&e| (ctx.sums[e].0 / ctx.sums[e].1).ln()).sum();
        let gap = 1.0 - (-log_ratio.abs()).exp();
        (gap <= LAMBDA_TOL, gap)
    }

    fn dfs(
        ctx: &Ctx,
        start: usize,
        u: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        report: &mut CycleReport,
    ) -> Result<()> {
        for &v in &ctx.succ[u] {
            if v == start {
                if path.len() >= 3 {
                    close(ctx, path, report)?;
                }
            } else if v > start && !on_path[v] && path.len() < ctx.max_len {
                on_path[v] = true;
                path.push(v);
                dfs(ctx, start, v, path, on_path, report)?;
                path.pop();
                on_path[v] = false;
            }
        }
        Ok(())
    }

    let ctx = Ctx { succ: &succ, sums: &sums, integral, max_len, budget };
    for s in 0..m {
        path.push(s);
        on_path[s] = true;
        dfs(&ctx, s, s, &mut path, &mut on_path, &mut report)?;
        on_path[s] = false;
        path.pop();
    }
    Ok(report)
}

/// `max |Σ_{ON(w2)} λ − Σ_{IN(−w1)} λ|` over `w2` and `w1 ∈ IN(w2)`.
pub fn check_wedgefact(g: &Graph, p: &Params) -> f64 {
    let lambdas: Vec<f64> = g.enumerate_wedges().iter().map(|w| p.lambda(w.kind)).collect();
    let mut worst: f64 = 0.0;
    for e in 0..g.num_directed_edges() {
        // Every w2 in the out-block of e = (r, s) has ON(w2) = that block, and
        // every w1 ∈ IN(w2) has the form (x, r, s), so -w1 = (s, r, x).
        let on: f64 = g.out_block(e).map(|w| lambdas[w]).sum();
        let de = g.edge(e);
        for w1 in g.in_wedges_of_edge(de) {
            let rw1 = g.wedge(g.reverse_wedge_id(w1));
            let inn: f64 = g.in_wedges_of_edge(rw1.first_edge()).iter().map(|&w| lambdas[w]).sum();
            worst = worst.max((on - inn).abs());
        }
    }
    worst
}

/// `‖πK − π‖∞`, refusing measures that violate edge directed balance.
pub fn edb_implies_invariance(g: &Graph, pi: &Measure, k: &Kernel, tol: f64) -> Result<f64> {
    let edb = check_edb(g, pi, k)?;
    if edb > tol {
        return Err(Error::Precondition(format!("measure violates edge directed balance ({edb:e})")));
    }
    let image = k.left_mul(&pi.values);
    Ok(image.iter().zip(&pi.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub edb_residual: f64,
    pub wdb_residual: f64,
    pub edge_reversal_residual: f64,
    pub wedge_reversal_residual: f64,
    pub edge_invariance_residual: f64,
    pub eulerian: EulerianVerdict,
    pub regular: bool,
    pub wedgefact_violation: f64,
    /// Present for `alpha = 0`.
    pub cycle_condition: Option<CycleReport>,
}

pub fn balance_report(
    g: &Graph,
    p: &Params,
    pi_edge: &Measure,
    k_edge: &Kernel,
    pi_hat: &Measure,
    k_wedge: &Kernel,
    max_cycle_len: usize,
) -> Result<BalanceReport> {
    let cycle_condition = if p.alpha == 0.0 {
        match check_cycle_condition(g, p, max_cycle_len, CYCLE_BUDGET) {
            Ok(r) => Some(r),
            Err(Error::BudgetExceeded(b)) => {
                log::warn!("cycle enumeration stopped at budget {b}");
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(BalanceReport {
        edb_residual: check_edb(g, pi_edge, k_edge)?,
        wdb_residual: check_wdb(g, pi_hat, k_wedge)?,
        edge_reversal_residual: check_reversal_symmetry(g, pi_edge)?,
        wedge_reversal_residual: check_reversal_symmetry(g, pi_hat)?,
        edge_invariance_residual: invariance_residual(k_edge, &pi_edge.values),
        eulerian: check_eulerianity(g, p),
        regular: check_regular(g)?,
        wedgefact_violation: check_wedgefact(g, p),
        cycle_condition,
    })
}
