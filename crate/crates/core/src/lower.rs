//! Lower bound on the optimal sampled quantile by restricted MILPs.
//!
//! Only scenarios in a working set `J` get indicator variables; every other
//! scenario is forced to stay at or above `nu`. Each restricted optimum is
//! feasible for the full problem, so its true quantile is a lower bound.
//! After each solve, the indicator pattern is fixed and an LP over all rows
//! prices the forced rows: those with a positive shadow price join `J`.

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_fixed_y_lp, build_restricted_milp, RowTag};
use crate::problem::{ceil_guarded, lowest_k, portfolio_quantile, Portfolio, ProblemSpec, QuantileIndex, ScenarioSet};
use crate::solve::{Backend, Limits, SolveStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundOptions {
    pub max_iter: usize,
    /// Wall-clock budget for the whole loop, seconds.
    pub time_limit: Option<f64>,
    /// Return the last iterate rather than the best one seen.
    pub last_iterate: bool,
    pub limits: Limits,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        LowerBoundOptions { max_iter: 50, time_limit: None, last_iterate: false, limits: Limits::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The previous working set is contained in the new one.
    FixedPoint,
    /// The working set covers every scenario, so the restriction is the
    /// full problem (also the case when no scenario may exceed).
    Exact,
    IterationCap,
    CycleDetected,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub set_size: usize,
    /// Optimum of the restricted MILP.
    pub restricted_value: f64,
    /// True sampled quantile of the restricted optimum.
    pub quantile: f64,
    /// Best quantile over this and earlier iterations.
    pub best_quantile: f64,
    /// Scenarios that entered through a positive shadow price.
    pub priced_in: Vec<usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub portfolio: Portfolio,
    /// Sampled quantile of `portfolio`; a lower bound on the optimum.
    pub quantile: f64,
    /// Restricted optimum of the final iteration.
    pub last_restricted_value: f64,
    /// The `floor(alpha m)` scenarios with the lowest returns under
    /// `portfolio`, ties broken by index.
    pub exceedance: Vec<usize>,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    pub seconds: f64,
}

impl LowerBoundResult {
    /// Trace as CSV: iteration, set size, restricted value, quantile, seconds.
    pub fn trace_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iteration", "set_size", "restricted_value", "quantile", "best_quantile", "priced_in", "seconds"])?;
        for r in &self.trace {
            let priced: Vec<String> = r.priced_in.iter().map(|j| j.to_string()).collect();
            w.write_record([
                r.iteration.to_string(),
                r.set_size.to_string(),
                r.restricted_value.to_string(),
                r.quantile.to_string(),
                r.best_quantile.to_string(),
                priced.join(" "),
                r.seconds.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// The first `ceil(2 alpha m)` scenarios, clamped to `[floor(alpha m), m]`.
pub fn default_initial_set(s: &ScenarioSet, spec: &ProblemSpec) -> Result<Vec<usize>> {
    let k = QuantileIndex::new(spec.alpha, s.m())?.k;
    let size = ceil_guarded(2.0 * spec.alpha * s.m() as f64).clamp(k, s.m());
    Ok((0..size).collect())
}

struct Incumbent {
    x: Vec<f64>,
    quantile: f64,
}

pub fn lower_bound(
    s: &ScenarioSet,
    spec: &ProblemSpec,
    initial: &[usize],
    backend: &dyn Backend,
    opts: &LowerBoundOptions,
) -> Result<LowerBoundResult> {
    let start = Instant::now();
    let m = s.m();
    let k = QuantileIndex::new(spec.alpha, m)?.k;
    let mut set: Vec<usize> = initial.to_vec();
    set.sort_unstable();
    set.dedup();
    if let Some(&j) = set.iter().find(|&&j| j >= m) {
        return Err(Error::InvalidInput(format!("initial set contains scenario {j}, but m = {m}")));
    }
    if set.len() < k {
        return Err(Error::Precondition(format!("|J0| = {} is below floor(alpha m) = {k}", set.len())));
    }

    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(set.clone());
    let mut trace = Vec::new();
    let mut best: Option<Incumbent> = None;
    let mut last: Option<Incumbent> = None;
    let mut last_value = f64::NEG_INFINITY;
    let termination;

    loop {
        if trace.len() >= opts.max_iter {
            termination = Termination::IterationCap;
            break;
        }
        let elapsed = start.elapsed().as_secs_f64();
        if opts.time_limit.is_some_and(|t| elapsed >= t) {
            termination = Termination::TimeLimit;
            break;
        }
        let iter_start = Instant::now();
        let mut limits = opts.limits;
        if let Some(t) = opts.time_limit {
            let left = (t - elapsed).max(0.0);
            limits.time_limit = Some(limits.time_limit.map_or(left, |l| l.min(left)));
        }

        let restricted = build_restricted_milp(s, spec, &set)?;
        let out = backend.solve(&restricted, &limits)?;
        match out.status {
            SolveStatus::Infeasible => {
                return Err(Error::Infeasible(format!(
                    "restricted problem on {} scenarios has no admissible portfolio meeting the return floor {}",
                    set.len(),
                    spec.mu0
                )))
            }
            SolveStatus::Unbounded | SolveStatus::Failed => {
                return Err(Error::Solver(format!("restricted MILP ended with status {:?}", out.status)))
            }
            _ => {}
        }
        let Some(x) = out.portfolio(&restricted) else {
            termination = Termination::TimeLimit;
            break;
        };
        let z = out.objective.expect("point has objective");
        let q = portfolio_quantile(&Portfolio(x.clone()), s, spec.alpha)?;
        if best.as_ref().is_none_or(|b| q > b.quantile) {
            best = Some(Incumbent { x: x.clone(), quantile: q });
        }
        last = Some(Incumbent { x, quantile: q });
        last_value = z;
        let best_q = best.as_ref().map(|b| b.quantile).unwrap_or(q);

        if k == 0 || set.len() == m {
            trace.push(IterationRecord {
                iteration: trace.len() + 1,
                set_size: set.len(),
                restricted_value: z,
                quantile: q,
                best_quantile: best_q,
                priced_in: Vec::new(),
                seconds: iter_start.elapsed().as_secs_f64(),
            });
            termination = Termination::Exact;
            break;
        }
        if out.status.hit_limit() {
            trace.push(IterationRecord {
                iteration: trace.len() + 1,
                set_size: set.len(),
                restricted_value: z,
                quantile: q,
                best_quantile: best_q,
                priced_in: Vec::new(),
                seconds: iter_start.elapsed().as_secs_f64(),
            });
            termination = Termination::TimeLimit;
            break;
        }

        // Fix the indicator pattern and price every forced row.
        let active = out.active_indicators(&restricted);
        let mut y = vec![false; m];
        active.iter().for_each(|&j| y[j] = true);
        let lp = build_fixed_y_lp(s, spec, &y)?;
        let priced = backend.solve_lp(&lp, &limits)?;
        if priced.status != SolveStatus::Optimal {
            return Err(Error::Solver(format!("fixed-indicator LP ended with status {:?}", priced.status)));
        }
        let mut in_set = vec![false; m];
        set.iter().for_each(|&j| in_set[j] = true);
        let priced_in: Vec<usize> = (0..m)
            .filter(|&j| !in_set[j])
            .filter(|&j| priced.dual(RowTag::BigM(j)).unwrap_or(0.0) > opts.limits.dual_tol)
            .collect();
        let mut next: Vec<usize> = active.iter().copied().chain(priced_in.iter().copied()).collect();
        next.sort_unstable();
        next.dedup();

        trace.push(IterationRecord {
            iteration: trace.len() + 1,
            set_size: set.len(),
            restricted_value: z,
            quantile: q,
            best_quantile: best_q,
            priced_in,
            seconds: iter_start.elapsed().as_secs_f64(),
        });

        let contains_old = set.iter().all(|j| next.binary_search(j).is_ok());
        if contains_old {
            termination = Termination::FixedPoint;
            break;
        }
        if !visited.insert(next.clone()) {
            termination = Termination::CycleDetected;
            break;
        }
        set = next;
    }

    let chosen = if opts.last_iterate { last } else { best };
    let Some(inc) = chosen else {
        return Err(Error::LimitReached(format!("no incumbent found before stopping ({termination:?})")));
    };
    let returns = s.portfolio_returns(&inc.x)?;
    Ok(LowerBoundResult {
        exceedance: lowest_k(&returns, k),
        quantile: inc.quantile,
        portfolio: Portfolio(inc.x),
        last_restricted_value: last_value,
        trace,
        termination,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::test_support::{backends, e1};

    fn spec() -> ProblemSpec {
        ProblemSpec::new(0.2, 0.5)
    }

    #[test]
    fn e1_reaches_optimum() {
        for b in backends() {
            let r = lower_bound(&e1(), &spec(), &[0, 1], b.as_ref(), &LowerBoundOptions::default()).unwrap();
            assert!((r.quantile - 0.5).abs() < 1e-7, "{}", b.name());
            assert!((r.portfolio.0[0] - 0.5).abs() < 1e-6);
            assert_eq!(r.exceedance.len(), 1);
            let q = portfolio_quantile(&r.portfolio, &e1(), 0.2).unwrap();
            assert_eq!(q, r.quantile);
        }
    }

    #[test]
    fn full_initial_set_is_one_iteration() {
        let b = crate::solve::default_backend();
        let r = lower_bound(&e1(), &spec(), &[0, 1, 2, 3, 4], b.as_ref(), &LowerBoundOptions::default()).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.termination, Termination::Exact);
        assert!((r.last_restricted_value - 0.5).abs() < 1e-7);
    }

    #[test]
    fn single_asset_is_exact() {
        let s = ScenarioSet::new((0..10).map(|j| vec![((j * 7) % 10) as f64 - 4.0]).collect(), vec![]).unwrap();
        let spec = ProblemSpec::new(0.1, f64::NEG_INFINITY);
        let b = crate::solve::default_backend();
        for j0 in [vec![0], vec![3, 4, 5], (0..10).collect()] {
            let r = lower_bound(&s, &spec, &j0, b.as_ref(), &LowerBoundOptions::default()).unwrap();
            assert_eq!(r.quantile, -3.0);
        }
    }

    #[test]
    fn default_initial_sets() {
        let s = |m: usize| ScenarioSet::new(vec![vec![0.0]; m], vec![]).unwrap();
        assert_eq!(default_initial_set(&s(1000), &ProblemSpec::new(0.01, 0.0)).unwrap(), (0..20).collect::<Vec<_>>());
        assert_eq!(default_initial_set(&e1(), &spec()).unwrap(), vec![0, 1]);
        assert_eq!(default_initial_set(&s(10), &ProblemSpec::new(0.05, 0.0)).unwrap(), vec![0]);
    }

    #[test]
    fn errors() {
        let b = crate::solve::default_backend();
        let o = LowerBoundOptions::default();
        assert!(matches!(lower_bound(&e1(), &spec(), &[], b.as_ref(), &o), Err(Error::Precondition(_))));
        assert!(matches!(lower_bound(&e1(), &spec().with_mu0(0.9), &[0], b.as_ref(), &o), Err(Error::Infeasible(_))));
    }

    #[test]
    fn iteration_cap_and_trace_csv() {
        let b = crate::solve::default_backend();
        let o = LowerBoundOptions { max_iter: 1, ..Default::default() };
        let r = lower_bound(&e1(), &spec(), &[0], b.as_ref(), &o).unwrap();
        assert!(r.trace.len() <= 1);
        let csv = r.trace_csv().unwrap();
        assert!(csv.starts_with("iteration,set_size,restricted_value,quantile"));
        assert_eq!(csv.lines().count(), r.trace.len() + 1);
    }
}
