//! Solver backends and the enumeration oracle.
//!
//! A [`Backend`] solves LPs (with row duals) and MILPs (incumbent plus best
//! bound). Two implementations ship: [`HighsBackend`] wraps the HiGHS
//! engine and [`BuiltinBackend`] runs a dense simplex under best-first
//! branch and bound, suitable for small models. The [`oracle`] module
//! enumerates exceedance sets with its own dense LP solves and is the
//! ground truth the MILP path is tested against.

mod builtin;
#[cfg(feature = "highs")]
mod highs_backend;
pub mod oracle;
pub mod simplex;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinearModel, RowTag};

pub use builtin::BuiltinBackend;
#[cfg(feature = "highs")]
pub use highs_backend::HighsBackend;

/// Default duals below this are treated as zero shadow prices.
pub const DEFAULT_DUAL_TOL: f64 = 1e-7;
pub const DEFAULT_MIP_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    IterationLimit,
    /// The engine gave up for numerical or internal reasons.
    Failed,
}

impl SolveStatus {
    pub fn hit_limit(self) -> bool {
        matches!(self, SolveStatus::TimeLimit | SolveStatus::IterationLimit)
    }
}

/// Result of one LP or MILP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Primal values in model variable order; empty when no point is known.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    /// Best proven bound on the optimum (same sense as the objective). For
    /// a solved LP this equals the objective.
    pub best_bound: Option<f64>,
    /// Row duals by tag, LPs only. Each value is the rate at which the
    /// optimum improves per unit increase of the row's right-hand side, so
    /// a binding `<=` row of a maximization has a non-negative dual.
    pub duals: BTreeMap<RowTag, f64>,
    pub wall_time: f64,
}

impl SolveOutcome {
    pub(crate) fn without_point(status: SolveStatus, wall_time: f64) -> Self {
        SolveOutcome {
            status,
            values: Vec::new(),
            objective: None,
            best_bound: None,
            duals: BTreeMap::new(),
            wall_time,
        }
    }

    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }

    /// Primal values keyed by variable name.
    pub fn named_values(&self, model: &LinearModel) -> BTreeMap<String, f64> {
        model.variables.iter().zip(&self.values).map(|(v, x)| (v.name.clone(), *x)).collect()
    }

    /// Portfolio weights pulled from the model layout.
    pub fn portfolio(&self, model: &LinearModel) -> Option<Vec<f64>> {
        self.has_point().then(|| model.layout.x.iter().map(|&i| self.values[i]).collect())
    }

    /// Scenarios whose indicator is set (value above one half), ascending.
    pub fn active_indicators(&self, model: &LinearModel) -> Vec<usize> {
        if !self.has_point() {
            return Vec::new();
        }
        let mut v: Vec<usize> =
            model.layout.y.iter().filter(|(_, var)| self.values[*var] > 0.5).map(|(j, _)| *j).collect();
        v.sort_unstable();
        v
    }

    pub fn dual(&self, tag: RowTag) -> Option<f64> {
        self.duals.get(&tag).copied()
    }
}

/// Per-solve limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Wall-clock limit per solve, seconds.
    pub time_limit: Option<f64>,
    /// Relative MILP gap at which a solve counts as optimal.
    pub mip_gap: f64,
    /// Threshold for a positive shadow price.
    pub dual_tol: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { time_limit: None, mip_gap: DEFAULT_MIP_GAP, dual_tol: DEFAULT_DUAL_TOL }
    }
}

impl Limits {
    pub fn with_time_limit(mut self, secs: f64) -> Self {
        self.time_limit = Some(secs);
        self
    }

    /// Applies `VAROPT_TIME_LIMIT`, `VAROPT_MIP_GAP` and `VAROPT_DUAL_TOL`
    /// when set.
    pub fn from_env(mut self) -> Result<Self> {
        let read = |key: &str| -> Result<Option<f64>> {
            match std::env::var(key) {
                Ok(v) => v
                    .trim()
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("{key}={v:?} is not a number"))),
                Err(_) => Ok(None),
            }
        };
        if let Some(t) = read("VAROPT_TIME_LIMIT")? {
            self.time_limit = Some(t);
        }
        if let Some(g) = read("VAROPT_MIP_GAP")? {
            self.mip_gap = g;
        }
        if let Some(d) = read("VAROPT_DUAL_TOL")? {
            self.dual_tol = d;
        }
        Ok(self)
    }
}

/// Capability interface every solver engine implements.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Solves a model with no binary variables, returning duals for every
    /// tagged row when optimal.
    fn solve_lp(&self, model: &LinearModel, limits: &Limits) -> Result<SolveOutcome>;

    /// Solves a MILP. `warm_start` is a full primal vector hint, used when
    /// the engine supports it.
    fn solve_milp(&self, model: &LinearModel, limits: &Limits, warm_start: Option<&[f64]>) -> Result<SolveOutcome>;

    /// Dispatches on whether the model has integer variables.
    fn solve(&self, model: &LinearModel, limits: &Limits) -> Result<SolveOutcome> {
        if model.has_integers() {
            self.solve_milp(model, limits, None)
        } else {
            self.solve_lp(model, limits)
        }
    }
}

/// The default engine: HiGHS when compiled in, otherwise the built-in one.
pub fn default_backend() -> Box<dyn Backend> {
    #[cfg(feature = "highs")]
    {
        Box::new(HighsBackend::default())
    }
    #[cfg(not(feature = "highs"))]
    {
        Box::new(BuiltinBackend::default())
    }
}

/// Looks a backend up by name (`highs` or `builtin`).
pub fn backend_by_name(name: &str) -> Result<Box<dyn Backend>> {
    match name {
        #[cfg(feature = "highs")]
        "highs" => Ok(Box::new(HighsBackend::default())),
        "builtin" => Ok(Box::new(BuiltinBackend::default())),
        other => Err(Error::Config(format!("unknown backend {other:?}"))),
    }
}

pub(crate) fn ensure_lp(model: &LinearModel) -> Result<()> {
    model.check()?;
    let unfixed = model
        .variables
        .iter()
        .find(|v| v.kind == crate::model::VarKind::Binary && v.lower != v.upper);
    match unfixed {
        Some(v) => Err(Error::InvalidInput(format!("solve_lp given unfixed binary variable {}", v.name))),
        None => Ok(()),
    }
}

pub(crate) fn duals_by_tag(model: &LinearModel, row_duals: &[f64]) -> BTreeMap<RowTag, f64> {
    model
        .constraints
        .iter()
        .zip(row_duals)
        .filter_map(|(c, d)| c.tag.map(|t| (t, *d)))
        .collect()
}


#[cfg(test)]
mod tests {
    use super::test_support::{backends, e1};
    use super::*;
    use crate::model::{
        build_cvar_lp, build_fixed_y_lp, build_full_milp, build_max_return_milp, Constraint, LinearModel, Objective,
        ObjSense, Sense, VarKind, Variable,
    };
    use crate::problem::ProblemSpec;

    fn spec() -> ProblemSpec {
        ProblemSpec::new(0.2, 0.5)
    }

    #[test]
    fn fixed_y_lp_duals_form_convex_combination() {
        let y = [true, false, false, false, false];
        let model = build_fixed_y_lp(&e1(), &spec(), &y).unwrap();
        for b in backends() {
            let out = b.solve_lp(&model, &Limits::default()).unwrap();
            assert_eq!(out.status, SolveStatus::Optimal, "{}", b.name());
            assert!((out.objective.unwrap() - 0.5).abs() < 1e-7);
            let d0 = out.dual(RowTag::BigM(0)).unwrap();
            assert!(d0.abs() < 1e-9, "{}: relaxed row has dual {d0}", b.name());
            let sum: f64 = (1..5).map(|j| out.dual(RowTag::BigM(j)).unwrap()).sum();
            assert!((sum - 1.0).abs() < 1e-7, "{}: duals sum to {sum}", b.name());
            assert!((1..5).all(|j| out.dual(RowTag::BigM(j)).unwrap() >= -1e-9));
        }
    }

    #[test]
    fn lp_duals_match_finite_differences() {
        // Non-degenerate: two scenarios bind at x = (0.6, 0.4), the third is slack.
        let s = crate::problem::ScenarioSet::new(vec![vec![1.0, -1.0], vec![-1.0, 2.0], vec![3.0, 3.0]], vec![])
            .unwrap();
        let spec = ProblemSpec::new(0.1, f64::NEG_INFINITY);
        let model = build_fixed_y_lp(&s, &spec, &[false; 3]).unwrap();
        for b in backends() {
            let base = b.solve_lp(&model, &Limits::default()).unwrap();
            for (r, c) in model.constraints.iter().enumerate() {
                let Some(tag) = c.tag else { continue };
                let mut bumped = model.clone();
                bumped.constraints[r].rhs += 1e-5;
                let z = b.solve_lp(&bumped, &Limits::default()).unwrap().objective.unwrap();
                let fd = (z - base.objective.unwrap()) / 1e-5;
                let d = base.dual(tag).unwrap();
                assert!((fd - d).abs() < 1e-3, "{}: {tag} fd {fd} dual {d}", b.name());
            }
        }
    }

    fn tiny(vars: Vec<Variable>, rows: Vec<Constraint>, obj: Vec<(usize, f64)>) -> LinearModel {
        LinearModel {
            name: "tiny".into(),
            variables: vars,
            constraints: rows,
            objective: Objective { sense: ObjSense::Maximize, coeffs: obj },
            layout: Default::default(),
            notes: vec![],
        }
    }

    fn var(name: &str, kind: VarKind, lower: f64, upper: f64) -> Variable {
        Variable { name: name.into(), kind, lower, upper }
    }

    #[test]
    fn infeasible_and_unbounded_lps() {
        let infeasible = tiny(
            vec![var("x0", VarKind::Continuous, 0.0, f64::INFINITY), var("x1", VarKind::Continuous, 0.0, f64::INFINITY)],
            vec![
                Constraint { name: "budget".into(), coeffs: vec![(0, 1.0), (1, 1.0)], sense: Sense::Eq, rhs: 1.0, tag: None },
                Constraint { name: "floor".into(), coeffs: vec![(0, 1.0)], sense: Sense::Ge, rhs: 2.0, tag: None },
            ],
            vec![(0, 1.0)],
        );
        let unbounded = tiny(vec![var("nu", VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY)], vec![], vec![(0, 1.0)]);
        for b in backends() {
            assert_eq!(b.solve_lp(&infeasible, &Limits::default()).unwrap().status, SolveStatus::Infeasible, "{}", b.name());
            let st = b.solve_lp(&unbounded, &Limits::default()).unwrap().status;
            assert_eq!(st, SolveStatus::Unbounded, "{}", b.name());
        }
    }

    #[test]
    fn trivial_milp_rounds_down() {
        let model = tiny(
            vec![var("y", VarKind::Binary, 0.0, 1.0)],
            vec![Constraint { name: "half".into(), coeffs: vec![(0, 1.0)], sense: Sense::Le, rhs: 0.5, tag: None }],
            vec![(0, 1.0)],
        );
        for b in backends() {
            let out = b.solve_milp(&model, &Limits::default(), None).unwrap();
            assert_eq!(out.status, SolveStatus::Optimal);
            assert!(out.objective.unwrap().abs() < 1e-9);
            assert!(out.values[0].abs() < 1e-9);
        }
    }

    #[test]
    fn e1_full_and_max_return() {
        let full = build_full_milp(&e1(), &spec()).unwrap();
        let infeasible_floor = build_full_milp(&e1(), &spec().with_mu0(0.9)).unwrap();
        let at_half = build_max_return_milp(&e1(), &spec(), 0.5).unwrap();
        let above = build_max_return_milp(&e1(), &spec(), 0.505).unwrap();
        for b in backends() {
            let out = b.solve_milp(&full, &Limits::default(), None).unwrap();
            assert_eq!(out.status, SolveStatus::Optimal);
            assert!((out.objective.unwrap() - 0.5).abs() < 1e-7);
            assert!(out.best_bound.unwrap() >= out.objective.unwrap() - 1e-6);
            assert_eq!(out.active_indicators(&full).len(), 1);

            assert_eq!(b.solve_milp(&infeasible_floor, &Limits::default(), None).unwrap().status, SolveStatus::Infeasible);
            let out = b.solve_milp(&at_half, &Limits::default(), None).unwrap();
            assert!((out.objective.unwrap() - 0.5).abs() < 1e-7);
            assert_eq!(b.solve_milp(&above, &Limits::default(), None).unwrap().status, SolveStatus::Infeasible, "{}", b.name());
        }
    }

    #[test]
    fn cvar_lp_on_e1_is_maximin() {
        let model = build_cvar_lp(&e1(), &spec()).unwrap();
        for b in backends() {
            let out = b.solve_lp(&model, &Limits::default()).unwrap();
            assert!((out.objective.unwrap() - 0.5).abs() < 1e-7, "{}", b.name());
            let x = out.portfolio(&model).unwrap();
            assert!((x[0] - 0.5).abs() < 1e-7);
        }
    }

    #[test]
    fn solve_lp_rejects_binaries() {
        let full = build_full_milp(&e1(), &spec()).unwrap();
        for b in backends() {
            assert!(matches!(b.solve_lp(&full, &Limits::default()), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn limits_from_env() {
        // Only this test touches these variables.
        std::env::set_var("VAROPT_MIP_GAP", "0.01");
        std::env::set_var("VAROPT_TIME_LIMIT", "12.5");
        let l = Limits::default().from_env().unwrap();
        std::env::remove_var("VAROPT_MIP_GAP");
        std::env::remove_var("VAROPT_TIME_LIMIT");
        assert_eq!(l.mip_gap, 0.01);
        assert_eq!(l.time_limit, Some(12.5));
        assert_eq!(l.dual_tol, DEFAULT_DUAL_TOL);
    }
}
