//! Dense simplex with best-first branch and bound on binaries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{DenseProblem, DenseRow, LpStatus};
use super::{duals_by_tag, ensure_lp, Limits, SolveOutcome, SolveStatus};
use crate::error::Result;
use crate::model::{LinearModel, ObjSense, VarKind};

const INT_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-7;

/// In-process engine for small models. No external dependencies; the node
/// count is capped so a runaway search reports an iteration limit.
#[derive(Debug, Clone)]
pub struct BuiltinBackend {
    pub max_nodes: usize,
}

impl Default for BuiltinBackend {
    fn default() -> Self {
        BuiltinBackend { max_nodes: 200_000 }
    }
}

fn dense(model: &LinearModel, lower: Vec<f64>, upper: Vec<f64>) -> DenseProblem {
    let nvar = model.variables.len();
    let mut cost = vec![0.0; nvar];
    for (i, c) in &model.objective.coeffs {
        cost[*i] += c;
    }
    let rows = model
        .constraints
        .iter()
        .map(|c| {
            let mut coeffs = vec![0.0; nvar];
            for (i, a) in &c.coeffs {
                coeffs[*i] += a;
            }
            DenseRow { coeffs, sense: c.sense, rhs: c.rhs }
        })
        .collect();
    DenseProblem { maximize: model.objective.sense == ObjSense::Maximize, cost, lower, upper, rows }
}

fn bounds(model: &LinearModel) -> (Vec<f64>, Vec<f64>) {
    model.variables.iter().map(|v| (v.lower, v.upper)).unzip()
}

struct Node {
    /// Relaxation bound in maximization terms.
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    depth: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(self.depth.cmp(&other.depth))
    }
}

fn point_feasible(model: &LinearModel, x: &[f64]) -> bool {
    if x.len() != model.variables.len() {
        return false;
    }
    let in_bounds = model.variables.iter().zip(x).all(|(v, &xi)| {
        xi >= v.lower - FEAS_TOL
            && xi <= v.upper + FEAS_TOL
            && (v.kind == VarKind::Continuous || (xi - xi.round()).abs() <= INT_TOL)
    });
    in_bounds
        && model.constraints.iter().all(|c| {
            let lhs: f64 = c.coeffs.iter().map(|(i, a)| a * x[*i]).sum();
            let tol = FEAS_TOL * (1.0 + c.rhs.abs());
            match c.sense {
                crate::model::Sense::Le => lhs <= c.rhs + tol,
                crate::model::Sense::Ge => lhs >= c.rhs - tol,
                crate::model::Sense::Eq => (lhs - c.rhs).abs() <= tol,
            }
        })
}

fn gap_closed(incumbent: f64, bound: f64, rel: f64) -> bool {
    bound - incumbent <= rel * incumbent.abs().max(1.0) + 1e-9
}

impl super::Backend for BuiltinBackend {
    fn name(&self) -> &'static str {
        "builtin"
    }

    fn solve_lp(&self, model: &LinearModel, _limits: &Limits) -> Result<SolveOutcome> {
        ensure_lp(model)?;
        let start = Instant::now();
        let (lo, hi) = bounds(model);
        let sol = dense(model, lo, hi).solve();
        let wall = start.elapsed().as_secs_f64();
        let status = match sol.status {
            LpStatus::Optimal => SolveStatus::Optimal,
            LpStatus::Infeasible => SolveStatus::Infeasible,
            LpStatus::Unbounded => SolveStatus::Unbounded,
            LpStatus::IterationLimit => SolveStatus::IterationLimit,
        };
        if status != SolveStatus::Optimal {
            return Ok(SolveOutcome::without_point(status, wall));
        }
        Ok(SolveOutcome {
            status,
            objective: Some(sol.objective),
            best_bound: Some(sol.objective),
            duals: duals_by_tag(model, &sol.duals),
            values: sol.x,
            wall_time: wall,
        })
    }

    fn solve_milp(&self, model: &LinearModel, limits: &Limits, warm_start: Option<&[f64]>) -> Result<SolveOutcome> {
        model.check()?;
        let start = Instant::now();
        let sign = if model.objective.sense == ObjSense::Maximize { 1.0 } else { -1.0 };
        let ints: Vec<usize> =
            (0..model.variables.len()).filter(|&i| model.variables[i].kind != VarKind::Continuous).collect();

        let mut incumbent: Option<(f64, Vec<f64>)> = None;
        if let Some(w) = warm_start {
            if point_feasible(model, w) {
                incumbent = Some((sign * model.objective_value(w), w.to_vec()));
            }
        }

        let (lo, hi) = bounds(model);
        let mut heap = BinaryHeap::new();
        heap.push(Node { bound: f64::INFINITY, lower: lo, upper: hi, depth: 0 });
        let mut nodes = 0usize;
        let mut unbounded = false;
        let mut stopped: Option<SolveStatus> = None;
        // Largest bound among nodes discarded only because of the gap.
        let mut pruned = f64::NEG_INFINITY;

        while let Some(node) = heap.pop() {
            if let Some((inc, _)) = &incumbent {
                if gap_closed(*inc, node.bound, limits.mip_gap) {
                    heap.push(node);
                    break;
                }
            }
            if limits.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() > t) {
                heap.push(node);
                stopped = Some(SolveStatus::TimeLimit);
                break;
            }
            nodes += 1;
            if nodes > self.max_nodes {
                heap.push(node);
                stopped = Some(SolveStatus::IterationLimit);
                break;
            }
            let sol = dense(model, node.lower.clone(), node.upper.clone()).solve();
            match sol.status {
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    unbounded = true;
                    break;
                }
                LpStatus::IterationLimit => {
                    stopped = Some(SolveStatus::IterationLimit);
                    break;
                }
                LpStatus::Optimal => {}
            }
            let bound = sign * sol.objective;
            if incumbent.as_ref().is_some_and(|(inc, _)| gap_closed(*inc, bound, limits.mip_gap)) {
                pruned = pruned.max(bound);
                continue;
            }
            let branch = ints
                .iter()
                .map(|&i| (i, (sol.x[i] - sol.x[i].round()).abs()))
                .filter(|(_, f)| *f > INT_TOL)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            match branch {
                None => {
                    let mut x = sol.x;
                    ints.iter().for_each(|&i| x[i] = x[i].round());
                    incumbent = Some((bound, x));
                }
                Some((i, _)) => {
                    let v = sol.x[i];
                    let mut down_upper = node.upper.clone();
                    down_upper[i] = v.floor();
                    let mut up_lower = node.lower.clone();
                    up_lower[i] = v.ceil();
                    heap.push(Node { bound, lower: node.lower, upper: down_upper, depth: node.depth + 1 });
                    heap.push(Node { bound, lower: up_lower, upper: node.upper, depth: node.depth + 1 });
                }
            }
        }

        let wall = start.elapsed().as_secs_f64();
        if unbounded {
            return Ok(SolveOutcome::without_point(SolveStatus::Unbounded, wall));
        }
        let open_bound = heap.iter().map(|n| n.bound).fold(pruned, f64::max);
        let status = stopped.unwrap_or(if incumbent.is_some() { SolveStatus::Optimal } else { SolveStatus::Infeasible });
        let mut out = SolveOutcome::without_point(status, wall);
        match incumbent {
            Some((inc, x)) => {
                out.objective = Some(sign * inc);
                out.best_bound = Some(sign * open_bound.max(inc));
                out.values = x;
            }
            None if stopped.is_some() && open_bound.is_finite() => {
                out.best_bound = Some(sign * open_bound);
            }
            None => {}
        }
        Ok(out)
    }
}
