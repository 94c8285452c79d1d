//! Brute-force enumeration of exceedance sets.
//!
//! For every set `S` of exactly `floor(alpha m)` scenarios allowed to fall
//! below the quantile, an LP is solved over the remaining rows with the
//! dense simplex. The best LP over all sets is the exact optimum. Nothing
//! here goes through [`crate::model`] or a [`crate::solve::Backend`], so it
//! serves as an independent check on the MILP path.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simplex::{DenseProblem, DenseRow, LpStatus};
use crate::error::{Error, Result};
use crate::model::Sense;
use crate::problem::{ProblemSpec, QuantileIndex, ScenarioSet};

/// Default cap on the number of subsets enumerated.
pub const DEFAULT_SUBSET_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// Optimal value, `-inf` when no admissible portfolio exists.
    pub value: f64,
    pub weights: Option<Vec<f64>>,
    /// The exceedance set achieving the optimum (first in lexicographic order).
    pub exceedance: Vec<usize>,
    pub subsets: u128,
}

/// `C(m, k)`, saturating at `u128::MAX`.
pub fn binomial(m: usize, k: usize) -> u128 {
    let k = k.min(m - k.min(m));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((m - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn admissible_base(s: &ScenarioSet, spec: &ProblemSpec, extra_cols: usize) -> (Vec<f64>, Vec<f64>, Vec<DenseRow>) {
    let n = s.n();
    let width = n + extra_cols;
    let (mut lower, mut upper): (Vec<f64>, Vec<f64>) = spec.asset_bounds(n).into_iter().unzip();
    lower.resize(width, f64::NEG_INFINITY);
    upper.resize(width, f64::INFINITY);
    let pad = |c: &[f64]| {
        let mut v = c.to_vec();
        v.resize(width, 0.0);
        v
    };
    let mut rows = vec![DenseRow { coeffs: pad(&vec![1.0; n]), sense: Sense::Eq, rhs: 1.0 }];
    rows.extend(spec.extra_rows.iter().map(|r| DenseRow { coeffs: pad(&r.coeffs), sense: r.sense, rhs: r.rhs }));
    (lower, upper, rows)
}

fn enumerate<F>(s: &ScenarioSet, spec: &ProblemSpec, limit: u128, solve_one: F) -> Result<OracleSolution>
where
    F: Fn(&[usize]) -> Option<(f64, Vec<f64>)> + Sync,
{
    let issues = spec.violations(s.n());
    if !issues.is_empty() {
        return Err(Error::InvalidInput(issues.join("; ")));
    }
    let k = QuantileIndex::new(spec.alpha, s.m())?.k;
    let count = binomial(s.m(), k);
    if count > limit {
        return Err(Error::TooLarge { m: s.m(), k, count, limit });
    }
    let sets: Vec<Vec<usize>> = (0..s.m()).combinations(k).collect();
    let best = sets
        .par_iter()
        .enumerate()
        .filter_map(|(i, set)| solve_one(set).map(|(v, x)| (i, v, x)))
        .reduce_with(|a, b| {
            // Strictly better value wins; ties go to the earlier set.
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        });
    Ok(match best {
        Some((i, value, x)) => OracleSolution { value, weights: Some(x), exceedance: sets[i].clone(), subsets: count },
        None => OracleSolution { value: f64::NEG_INFINITY, weights: None, exceedance: Vec::new(), subsets: count },
    })
}

/// Optimal sampled quantile by enumeration, with the default subset cap.
pub fn oracle_var(s: &ScenarioSet, spec: &ProblemSpec) -> Result<OracleSolution> {
    oracle_var_with_limit(s, spec, DEFAULT_SUBSET_LIMIT)
}

pub fn oracle_var_with_limit(s: &ScenarioSet, spec: &ProblemSpec, limit: u128) -> Result<OracleSolution> {
    let n = s.n();
    // Columns: x_0..x_{n-1}, nu.
    let (lower, upper, mut base) = admissible_base(s, spec, 1);
    if spec.has_return_floor() {
        let mut c = s.mu().to_vec();
        c.push(0.0);
        base.push(DenseRow { coeffs: c, sense: Sense::Ge, rhs: spec.mu0 });
    }
    let mut cost = vec![0.0; n + 1];
    cost[n] = 1.0;
    enumerate(s, spec, limit, |set| {
        let mut rows = base.clone();
        for j in (0..s.m()).filter(|j| !set.contains(j)) {
            // nu - x^T xi^j <= 0
            let mut c: Vec<f64> = s.scenario(j).iter().map(|v| -v).collect();
            c.push(1.0);
            rows.push(DenseRow { coeffs: c, sense: Sense::Le, rhs: 0.0 });
        }
        let sol = DenseProblem { maximize: true, cost: cost.clone(), lower: lower.clone(), upper: upper.clone(), rows }
            .solve();
        (sol.status == LpStatus::Optimal).then(|| (sol.objective, sol.x[..n].to_vec()))
    })
}

/// Maximum expected return with at most `floor(alpha m)` scenarios below
/// `threshold`, by enumeration. Sets of exactly that size suffice, since
/// dropping a row from a smaller set only relaxes the LP.
pub fn oracle_max_return(s: &ScenarioSet, spec: &ProblemSpec, threshold: f64) -> Result<OracleSolution> {
    oracle_max_return_with_limit(s, spec, threshold, DEFAULT_SUBSET_LIMIT)
}

pub fn oracle_max_return_with_limit(
    s: &ScenarioSet,
    spec: &ProblemSpec,
    threshold: f64,
    limit: u128,
) -> Result<OracleSolution> {
    let (lower, upper, base) = admissible_base(s, spec, 0);
    enumerate(s, spec, limit, |set| {
        let mut rows = base.clone();
        for j in (0..s.m()).filter(|j| !set.contains(j)) {
            rows.push(DenseRow { coeffs: s.scenario(j).to_vec(), sense: Sense::Ge, rhs: threshold });
        }
        let sol =
            DenseProblem { maximize: true, cost: s.mu().to_vec(), lower: lower.clone(), upper: upper.clone(), rows }
                .solve();
        (sol.status == LpStatus::Optimal).then_some((sol.objective, sol.x))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{portfolio_quantile, Portfolio};
    use crate::solve::test_support::e1;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 1), 5);
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
        assert_eq!(binomial(1000, 500), u128::MAX);
    }

    #[test]
    fn e1_oracle() {
        let spec = ProblemSpec::new(0.2, 0.5);
        let sol = oracle_var(&e1(), &spec).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-9);
        assert_eq!(sol.subsets, 5);
        let x = Portfolio(sol.weights.unwrap());
        assert!((portfolio_quantile(&x, &e1(), 0.2).unwrap() - 0.5).abs() < 1e-9);

        assert!((oracle_max_return(&e1(), &spec, 0.5).unwrap().value - 0.5).abs() < 1e-9);
        assert_eq!(oracle_max_return(&e1(), &spec, 0.505).unwrap().value, f64::NEG_INFINITY);
        assert_eq!(oracle_var(&e1(), &spec.with_mu0(0.9)).unwrap().value, f64::NEG_INFINITY);
    }

    #[test]
    fn subset_cap_is_enforced() {
        let err = oracle_var_with_limit(&e1(), &ProblemSpec::new(0.2, 0.5), 4).unwrap_err();
        assert!(matches!(err, Error::TooLarge { count: 5, limit: 4, .. }));
    }
}
