//! Near-optimality certificate for a lower-bound incumbent.
//!
//! If no portfolio with sampled quantile at least `nu + delta` can reach the
//! return floor, the optimum lies in `[nu, nu + delta]`. That is checked on
//! a relaxation of the max-return MILP which keeps indicator rows only for
//! a growing scenario set `I`: once the relaxation's best bound falls below
//! the floor (or it is infeasible), the full problem's does too.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lower::LowerBoundResult;
use crate::model::build_upper_milp;
use crate::problem::{floor_guarded, lowest_k, order_statistic, ProblemSpec, QuantileIndex, ScenarioSet};
use crate::solve::{Backend, Limits, SolveStatus};

/// Which scenarios the growth cutoff is ranked over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffBase {
    /// Scenarios outside the incumbent's exceedance set.
    #[default]
    Initial,
    /// Scenarios outside the current set `I`.
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub beta: f64,
    /// Width of the enclosure; `None` uses [`default_delta`].
    pub delta: Option<f64>,
    pub iter_max: usize,
    /// Wall-clock budget for the whole loop, seconds.
    pub time_limit: Option<f64>,
    pub cutoff_base: CutoffBase,
    /// Treat an infeasible relaxation as `+inf` and keep growing `I`
    /// instead of certifying at once.
    pub infeasible_as_unbounded: bool,
    /// The relaxation bound must sit this far below the floor.
    pub margin: f64,
    pub limits: Limits,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            beta: 0.1,
            delta: None,
            iter_max: 200,
            time_limit: None,
            cutoff_base: CutoffBase::Initial,
            infeasible_as_unbounded: false,
            margin: 1e-9,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Proven,
    NotVerified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    IterationCap,
    /// `I` covers every scenario and the relaxation still reaches the floor.
    SetExhausted,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyStep {
    pub iteration: usize,
    pub set_size: usize,
    /// Relaxation value: best bound on the max return, `-inf` if infeasible.
    pub upper_return: f64,
    pub status: SolveStatus,
    pub added: Vec<usize>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
    pub threshold: f64,
    pub beta: f64,
    pub mu0: f64,
    pub alpha: f64,
    pub iter_max: usize,
    pub cutoff_base: CutoffBase,
    pub initial_set: Vec<usize>,
    pub iterations: usize,
    pub final_set_size: usize,
    pub reason: Option<Reason>,
    pub trace: Vec<CertifyStep>,
    pub seconds: f64,
}

impl Certificate {
    pub fn is_proven(&self) -> bool {
        self.verdict == Verdict::Proven
    }

    /// Trace as CSV: iteration, set size, relaxation value, added, seconds.
    pub fn trace_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iteration", "set_size", "upper_return", "status", "added", "seconds"])?;
        for r in &self.trace {
            let added: Vec<String> = r.added.iter().map(|j| j.to_string()).collect();
            w.write_record([
                r.iteration.to_string(),
                r.set_size.to_string(),
                r.upper_return.to_string(),
                format!("{:?}", r.status),
                added.join(" "),
                r.seconds.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One percent of `|nu|`, or `1e-4` when `nu` is zero.
pub fn default_delta(nu: f64) -> f64 {
    if nu == 0.0 {
        1e-4
    } else {
        0.01 * nu.abs()
    }
}

pub fn certify(
    s: &ScenarioSet,
    spec: &ProblemSpec,
    lb: &LowerBoundResult,
    backend: &dyn Backend,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    let start = Instant::now();
    let m = s.m();
    let k = QuantileIndex::new(spec.alpha, m)?.k;
    let delta = opts.delta.unwrap_or_else(|| default_delta(lb.quantile));
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!("delta = {delta} must be positive and finite")));
    }
    if !(opts.beta >= 0.0) {
        return Err(Error::InvalidInput(format!("beta = {} must be non-negative", opts.beta)));
    }
    let mut set = lb.exceedance.clone();
    set.sort_unstable();
    set.dedup();
    if set.len() < k || set.iter().any(|&j| j >= m) {
        return Err(Error::Precondition(format!(
            "initial set must hold at least floor(alpha m) = {k} valid scenarios, got {:?}",
            set
        )));
    }
    let initial = set.clone();
    let cutoff_rank = floor_guarded(opts.beta * spec.alpha * m as f64);
    let threshold = lb.quantile + delta;
    let floor = spec.mu0;

    let mut trace: Vec<CertifyStep> = Vec::new();
    let mut last_x: Option<Vec<f64>> = None;
    let finish = |verdict, reason, set: &[usize], trace: Vec<CertifyStep>| Certificate {
        verdict,
        lower: lb.quantile,
        upper: threshold,
        delta,
        threshold,
        beta: opts.beta,
        mu0: spec.mu0,
        alpha: spec.alpha,
        iter_max: opts.iter_max,
        cutoff_base: opts.cutoff_base,
        initial_set: initial.clone(),
        iterations: trace.len(),
        final_set_size: set.len(),
        reason,
        trace,
        seconds: start.elapsed().as_secs_f64(),
    };

    loop {
        if trace.len() >= opts.iter_max {
            return Ok(finish(Verdict::NotVerified, Some(Reason::IterationCap), &set, trace));
        }
        let elapsed = start.elapsed().as_secs_f64();
        if opts.time_limit.is_some_and(|t| elapsed >= t) {
            return Ok(finish(Verdict::NotVerified, Some(Reason::TimeLimit), &set, trace));
        }
        let mut limits = opts.limits;
        if let Some(t) = opts.time_limit {
            let left = (t - elapsed).max(0.0);
            limits.time_limit = Some(limits.time_limit.map_or(left, |l| l.min(left)));
        }
        let step_start = Instant::now();
        let model = build_upper_milp(s, spec, &set, threshold)?;
        let out = backend.solve(&model, &limits)?;
        let upper_return = match out.status {
            SolveStatus::Infeasible => f64::NEG_INFINITY,
            SolveStatus::Optimal => out.best_bound.or(out.objective).expect("optimal solve has a value"),
            SolveStatus::TimeLimit | SolveStatus::IterationLimit => out.best_bound.unwrap_or(f64::INFINITY),
            SolveStatus::Unbounded | SolveStatus::Failed => {
                return Err(Error::Solver(format!("relaxation ended with status {:?}", out.status)))
            }
        };
        let mut step = CertifyStep {
            iteration: trace.len() + 1,
            set_size: set.len(),
            upper_return,
            status: out.status,
            added: Vec::new(),
            seconds: 0.0,
        };

        let infeasible = out.status == SolveStatus::Infeasible;
        if (infeasible && !opts.infeasible_as_unbounded) || (!infeasible && upper_return < floor - opts.margin) {
            step.seconds = step_start.elapsed().as_secs_f64();
            trace.push(step);
            return Ok(finish(Verdict::Proven, None, &set, trace));
        }
        if out.status.hit_limit() {
            step.seconds = step_start.elapsed().as_secs_f64();
            trace.push(step);
            return Ok(finish(Verdict::NotVerified, Some(Reason::TimeLimit), &set, trace));
        }
        if set.len() == m {
            step.seconds = step_start.elapsed().as_secs_f64();
            trace.push(step);
            return Ok(finish(Verdict::NotVerified, Some(Reason::SetExhausted), &set, trace));
        }

        if let Some(x) = out.portfolio(&model) {
            last_x = Some(x);
        }
        let mut in_set = vec![false; m];
        set.iter().for_each(|&j| in_set[j] = true);
        let outside: Vec<usize> = (0..m).filter(|&j| !in_set[j]).collect();
        let added: Vec<usize> = match &last_x {
            Some(x) => {
                let r = s.portfolio_returns(x)?;
                let base: Vec<f64> = match opts.cutoff_base {
                    CutoffBase::Initial => (0..m).filter(|j| initial.binary_search(j).is_err()).map(|j| r[j]).collect(),
                    CutoffBase::Current => outside.iter().map(|&j| r[j]).collect(),
                };
                let cutoff = order_statistic(&base, cutoff_rank.min(base.len() - 1));
                let mut added: Vec<usize> = outside.iter().copied().filter(|&j| r[j] <= cutoff).collect();
                if added.is_empty() {
                    let out_r: Vec<f64> = outside.iter().map(|&j| r[j]).collect();
                    added = lowest_k(&out_r, (cutoff_rank + 1).min(outside.len())).into_iter().map(|i| outside[i]).collect();
                }
                added
            }
            None => outside.iter().copied().take(cutoff_rank + 1).collect(),
        };
        set.extend(&added);
        set.sort_unstable();
        step.added = added;
        step.seconds = step_start.elapsed().as_secs_f64();
        trace.push(step);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lower::{lower_bound, LowerBoundOptions, Termination};
    use crate::problem::Portfolio;
    use crate::solve::test_support::{backends, e1};

    fn e1_lb(exceedance: Vec<usize>) -> LowerBoundResult {
        LowerBoundResult {
            portfolio: Portfolio(vec![0.5, 0.5]),
            quantile: 0.5,
            last_restricted_value: 0.5,
            exceedance,
            trace: vec![],
            termination: Termination::FixedPoint,
            seconds: 0.0,
        }
    }

    #[test]
    fn delta_defaults() {
        assert!((default_delta(-2.560) - 0.0256).abs() < 1e-15);
        assert!((default_delta(0.5) - 0.005).abs() < 1e-15);
        assert_eq!(default_delta(0.0), 1e-4);
    }

    #[test]
    fn e1_is_proven() {
        let spec = ProblemSpec::new(0.2, 0.5);
        for b in backends() {
            let lb = lower_bound(&e1(), &spec, &[0, 1], b.as_ref(), &LowerBoundOptions::default()).unwrap();
            let c = certify(&e1(), &spec, &lb, b.as_ref(), &CertifyOptions::default()).unwrap();
            assert!(c.is_proven(), "{}: {c:?}", b.name());
            assert!((c.lower - 0.5).abs() < 1e-7);
            assert!((c.upper - 0.505).abs() < 1e-7);
            assert!((c.delta - 0.005).abs() < 1e-9);
        }
    }

    #[test]
    fn full_initial_set_certifies_in_one_step() {
        let spec = ProblemSpec::new(0.2, 0.5);
        let b = crate::solve::default_backend();
        let c = certify(&e1(), &spec, &e1_lb((0..5).collect()), b.as_ref(), &CertifyOptions::default()).unwrap();
        assert!(c.is_proven());
        assert_eq!(c.iterations, 1);
        assert_eq!(c.trace[0].upper_return, f64::NEG_INFINITY);
    }

    #[test]
    fn wide_delta_certifies_immediately() {
        let spec = ProblemSpec::new(0.2, 0.5);
        let b = crate::solve::default_backend();
        let o = CertifyOptions { delta: Some(10.0), ..Default::default() };
        let c = certify(&e1(), &spec, &e1_lb(vec![2]), b.as_ref(), &o).unwrap();
        assert!(c.is_proven());
        assert_eq!(c.iterations, 1);
        assert_eq!(c.threshold, 10.5);
    }

    #[test]
    fn caps_and_bad_parameters() {
        let spec = ProblemSpec::new(0.2, 0.5);
        let b = crate::solve::default_backend();
        let o = CertifyOptions { iter_max: 0, ..Default::default() };
        let c = certify(&e1(), &spec, &e1_lb(vec![2]), b.as_ref(), &o).unwrap();
        assert_eq!(c.verdict, Verdict::NotVerified);
        assert_eq!(c.reason, Some(Reason::IterationCap));
        for d in [0.0, -1.0, f64::NAN] {
            let o = CertifyOptions { delta: Some(d), ..Default::default() };
            assert!(matches!(certify(&e1(), &spec, &e1_lb(vec![2]), b.as_ref(), &o), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn strict_mode_exhausts_the_set() {
        // An infeasible relaxation no longer certifies, so the set grows to
        // every scenario and the run ends unverified.
        let spec = ProblemSpec::new(0.2, 0.5);
        let b = crate::solve::default_backend();
        let o = CertifyOptions { infeasible_as_unbounded: true, ..Default::default() };
        let c = certify(&e1(), &spec, &e1_lb(vec![2]), b.as_ref(), &o).unwrap();
        assert_eq!(c.reason, Some(Reason::SetExhausted));
        assert_eq!(c.final_set_size, 5);
    }

    #[test]
    fn relaxation_values_never_increase() {
        let spec = ProblemSpec::new(0.2, 0.5);
        let b = crate::solve::default_backend();
        let c = certify(&e1(), &spec, &e1_lb(vec![2]), b.as_ref(), &CertifyOptions::default()).unwrap();
        for w in c.trace.windows(2) {
            assert!(w[1].upper_return <= w[0].upper_return + 1e-6);
        }
        assert!(c.trace_csv().unwrap().lines().count() == c.trace.len() + 1);
    }
}
