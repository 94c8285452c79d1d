//! HiGHS engine via the `highs` crate.

use std::time::Instant;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense as HighsSense};

use super::{duals_by_tag, ensure_lp, Limits, SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::model::{LinearModel, ObjSense, Sense, VarKind};

/// HiGHS row duals are the derivative of the optimum with respect to the
/// active row bound, which is already the crate's convention; the finite
/// difference test in the parent module pins this.
const DUAL_SIGN: f64 = 1.0;

#[derive(Debug, Clone, Default)]
pub struct HighsBackend {
    /// Worker threads HiGHS may use per solve; `None` keeps its default.
    pub threads: Option<u32>,
}

fn build(model: &LinearModel, limits: &Limits, presolve: bool, lp: bool) -> highs::Model {
    let mut pb = RowProblem::default();
    let mut cost = vec![0.0; model.variables.len()];
    for (i, c) in &model.objective.coeffs {
        cost[*i] += c;
    }
    let cols: Vec<_> = model
        .variables
        .iter()
        .zip(&cost)
        .map(|(v, &c)| {
            let integer = !lp && v.kind != VarKind::Continuous;
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (true, true) => pb.add_column_with_integrality(c, v.lower..=v.upper, integer),
                (true, false) => pb.add_column_with_integrality(c, v.lower.., integer),
                (false, true) => pb.add_column_with_integrality(c, ..=v.upper, integer),
                (false, false) => pb.add_column_with_integrality::<f64, _>(c, .., integer),
            }
        })
        .collect();
    for row in &model.constraints {
        let factors: Vec<_> = row.coeffs.iter().map(|(i, a)| (cols[*i], *a)).collect();
        match row.sense {
            Sense::Le => pb.add_row(..=row.rhs, &factors),
            Sense::Ge => pb.add_row(row.rhs.., &factors),
            Sense::Eq => pb.add_row(row.rhs..=row.rhs, &factors),
        }
    }
    let sense = match model.objective.sense {
        ObjSense::Maximize => HighsSense::Maximise,
        ObjSense::Minimize => HighsSense::Minimise,
    };
    let mut hm = pb.optimise(sense);
    hm.make_quiet();
    if let Some(t) = limits.time_limit {
        hm.set_option("time_limit", t.max(0.0));
    }
    hm.set_option("mip_rel_gap", limits.mip_gap);
    if !presolve {
        hm.set_option("presolve", "off");
    }
    hm
}

fn map_status(s: HighsModelStatus) -> SolveStatus {
    match s {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded => SolveStatus::Unbounded,
        HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
        HighsModelStatus::ReachedIterationLimit | HighsModelStatus::ReachedSolutionLimit => {
            SolveStatus::IterationLimit
        }
        _ => SolveStatus::Failed,
    }
}

impl HighsBackend {
    fn run(&self, model: &LinearModel, limits: &Limits, warm: Option<&[f64]>, lp: bool) -> Result<SolveOutcome> {
        let start = Instant::now();
        let mut solved = None;
        // An "unbounded or infeasible" verdict from presolve is resolved by
        // solving again without it.
        for presolve in [true, false] {
            let mut hm = build(model, limits, presolve, lp);
            if let Some(n) = self.threads {
                hm.set_option("threads", n as i32);
            }
            if let Some(w) = warm {
                if w.len() == model.variables.len() {
                    let _ = hm.try_set_solution(Some(w), None, None, None);
                }
            }
            let s = hm.try_solve().map_err(|e| Error::Solver(format!("HiGHS: {e:?}")))?;
            let ambiguous = s.status() == HighsModelStatus::UnboundedOrInfeasible;
            solved = Some(s);
            if !ambiguous {
                break;
            }
        }
        let solved = solved.expect("at least one attempt");
        let wall = start.elapsed().as_secs_f64();
        let raw = solved.status();
        let status = match raw {
            HighsModelStatus::UnboundedOrInfeasible if lp => SolveStatus::Unbounded,
            HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Infeasible,
            other => map_status(other),
        };
        let mut out = SolveOutcome::without_point(status, wall);
        let has_point = solved.primal_solution_status() == HighsSolutionStatus::Feasible
            && matches!(status, SolveStatus::Optimal | SolveStatus::TimeLimit | SolveStatus::IterationLimit);
        let sol = solved.get_solution();
        if has_point {
            out.values = sol.columns().to_vec();
            out.objective = Some(model.objective_value(&out.values));
        }
        if lp {
            if status == SolveStatus::Optimal {
                out.best_bound = out.objective;
                let duals: Vec<f64> = sol.dual_rows().iter().map(|d| DUAL_SIGN * d).collect();
                out.duals = duals_by_tag(model, &duals);
            }
        } else if status == SolveStatus::Optimal || status.hit_limit() {
            let bound = solved.double_info_value(c"mip_dual_bound").ok().filter(|b| b.is_finite());
            out.best_bound = match (bound, out.objective) {
                (Some(b), Some(z)) if model.objective.sense == ObjSense::Maximize => Some(b.max(z)),
                (Some(b), Some(z)) => Some(b.min(z)),
                (b, _) => b,
            };
        }
        Ok(out)
    }
}

impl super::Backend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve_lp(&self, model: &LinearModel, limits: &Limits) -> Result<SolveOutcome> {
        ensure_lp(model)?;
        self.run(model, limits, None, true)
    }

    fn solve_milp(&self, model: &LinearModel, limits: &Limits, warm_start: Option<&[f64]>) -> Result<SolveOutcome> {
        model.check()?;
        self.run(model, limits, warm_start, !model.has_integers())
    }
}
