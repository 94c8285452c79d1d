//! Domain types shared by every other module: scenario matrices, problem
//! parameters, portfolios, and the sample-quantile machinery.
//!
//! Returns are kept in the units they were ingested in (percent per period
//! for Fama-French data); nothing here rescales them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Sense;
use crate::solve::simplex::{DenseProblem, DenseRow, LpStatus};

/// Relative tolerance used when checking that a stored mean vector matches
/// the column means.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance for portfolio feasibility checks.
pub const WEIGHT_TOLERANCE: f64 = 1e-8;

/// `m` sampled joint return vectors over `n` assets, plus the mean vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioSetRepr", into = "ScenarioSetRepr")]
pub struct ScenarioSet {
    m: usize,
    n: usize,
    /// Row-major, `m * n`.
    returns: Vec<f64>,
    labels: Vec<String>,
    mu: Vec<f64>,
    mu_overridden: bool,
}

#[derive(Serialize, Deserialize)]
struct ScenarioSetRepr {
    #[serde(default)]
    labels: Vec<String>,
    returns: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<Vec<f64>>,
}

impl TryFrom<ScenarioSetRepr> for ScenarioSet {
    type Error = Error;

    fn try_from(r: ScenarioSetRepr) -> Result<Self> {
        let s = ScenarioSet::new(r.returns, r.labels)?;
        match r.mu {
            Some(mu) => s.with_mu(mu),
            None => Ok(s),
        }
    }
}

impl From<ScenarioSet> for ScenarioSetRepr {
    fn from(s: ScenarioSet) -> Self {
        ScenarioSetRepr {
            returns: s.rows().map(<[f64]>::to_vec).collect(),
            mu: s.mu_overridden.then(|| s.mu.clone()),
            labels: s.labels,
        }
    }
}

impl ScenarioSet {
    /// Builds a scenario set from rows (one per scenario). Empty `labels`
    /// yields `A1..An`.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::InvalidInput("scenario set needs at least one scenario".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("scenario set needs at least one asset".into()));
        }
        let mut returns = Vec::with_capacity(m * n);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "scenario {j} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite return at scenario {j}, asset {i}")));
            }
            returns.extend_from_slice(row);
        }
        let labels = if labels.is_empty() {
            (1..=n).map(|i| format!("A{i}")).collect()
        } else if labels.len() == n {
            labels
        } else {
            return Err(Error::InvalidInput(format!("{} labels for {n} assets", labels.len())));
        };
        let mu = column_means(&returns, m, n);
        Ok(ScenarioSet { m, n, returns, labels, mu, mu_overridden: false })
    }

    /// Replaces the sample-mean vector with caller-supplied estimates.
    pub fn with_mu(mut self, mu: Vec<f64>) -> Result<Self> {
        if mu.len() != self.n {
            return Err(Error::InvalidInput(format!("mu has {} entries, expected {}", mu.len(), self.n)));
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("mu contains non-finite entries".into()));
        }
        self.mu_overridden = mu != column_means(&self.returns, self.m, self.n);
        self.mu = mu;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu_overridden(&self) -> bool {
        self.mu_overridden
    }

    /// Return vector of scenario `j` (0-based).
    pub fn scenario(&self, j: usize) -> &[f64] {
        &self.returns[j * self.n..(j + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.returns.chunks_exact(self.n)
    }

    /// Largest absolute return over the whole matrix.
    pub fn max_abs(&self) -> f64 {
        self.returns.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Portfolio return `x^T xi^j` for every scenario.
    pub fn portfolio_returns(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "portfolio has {} weights, scenario set has {} assets",
                x.len(),
                self.n
            )));
        }
        Ok(self.rows().map(|r| dot(r, x)).collect())
    }

    pub fn expected_return(&self, x: &[f64]) -> f64 {
        dot(&self.mu, x)
    }

    /// Keeps the given columns (in order), recomputing the mean vector.
    pub fn select_assets(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n) {
            return Err(Error::InvalidInput(format!("asset index {c} out of range (n = {})", self.n)));
        }
        let rows = self.rows().map(|r| columns.iter().map(|&c| r[c]).collect()).collect();
        let labels = columns.iter().map(|&c| self.labels[c].clone()).collect();
        ScenarioSet::new(rows, labels)
    }

    /// Keeps scenarios `range` (0-based, half-open), recomputing the means.
    pub fn select_scenarios(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.m || range.is_empty() {
            return Err(Error::InvalidInput(format!("scenario range {range:?} invalid for m = {}", self.m)));
        }
        let rows = range.map(|j| self.scenario(j).to_vec()).collect();
        ScenarioSet::new(rows, self.labels.clone())
    }

    /// Checks the stored means against the column means.
    pub fn mean_mismatch(&self) -> Option<usize> {
        if self.mu_overridden {
            return None;
        }
        let means = column_means(&self.returns, self.m, self.n);
        means.iter().zip(&self.mu).position(|(a, b)| (a - b).abs() > MEAN_TOLERANCE * a.abs().max(1.0))
    }
}

fn column_means(returns: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mut mu = vec![0.0; n];
    for row in returns.chunks_exact(n) {
        for (acc, v) in mu.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mu.iter_mut().for_each(|v| *v /= m as f64);
    mu
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// A general linear inequality over the portfolio weights, part of the
/// admissible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Parameters of one VaR portfolio problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub alpha: f64,
    /// Minimum expected portfolio return. `-inf` drops the return floor.
    pub mu0: f64,
    /// Per-asset `[lower, upper]` weight bounds; `None` means `[0, 1]`
    /// (or `[-U, U]` when short selling is allowed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_rows: Vec<LinearRow>,
    #[serde(default)]
    pub allow_short: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_m_override: Option<f64>,
}

impl ProblemSpec {
    /// Long-only spec with default `[0, 1]` bounds.
    pub fn new(alpha: f64, mu0: f64) -> Self {
        ProblemSpec {
            alpha,
            mu0,
            bounds: None,
            extra_rows: Vec::new(),
            allow_short: false,
            short_cap: None,
            big_m_override: None,
        }
    }

    pub fn with_mu0(&self, mu0: f64) -> Self {
        ProblemSpec { mu0, ..self.clone() }
    }

    /// Bounds for each of `n` assets, with defaults filled in.
    pub fn asset_bounds(&self, n: usize) -> Vec<(f64, f64)> {
        match &self.bounds {
            Some(b) => b.clone(),
            None if self.allow_short => {
                let u = self.short_cap.unwrap_or(1.0);
                vec![(-u, u); n]
            }
            None => vec![(0.0, 1.0); n],
        }
    }

    pub fn has_return_floor(&self) -> bool {
        self.mu0 > f64::NEG_INFINITY
    }

    /// Returns every invariant violation, in a stable order.
    pub fn violations(&self, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            out.push(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if self.mu0.is_nan() || self.mu0 == f64::INFINITY {
            out.push(format!("mu0 = {} is not a usable return floor", self.mu0));
        }
        if let Some(b) = &self.bounds {
            if b.len() != n {
                out.push(format!("{} bound pairs for {n} assets", b.len()));
            }
            for (i, (lo, hi)) in b.iter().enumerate() {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    out.push(format!("asset {i}: lower bound {lo} exceeds upper bound {hi}"));
                }
                if !self.allow_short && *lo < 0.0 {
                    out.push(format!("asset {i}: negative lower bound {lo} without allow_short"));
                }
            }
        }
        for (r, row) in self.extra_rows.iter().enumerate() {
            if row.coeffs.len() != n {
                out.push(format!("extra row {r} has {} coefficients, expected {n}", row.coeffs.len()));
            }
        }
        if self.allow_short {
            match self.short_cap {
                None => out.push("allow_short requires a short cap U".into()),
                Some(u) if !(u > 0.0) => out.push(format!("short cap U = {u} must be positive")),
                Some(u) => {
                    let max_bound =
                        self.asset_bounds(n).iter().fold(0.0_f64, |acc, (lo, hi)| acc.max(lo.abs()).max(hi.abs()));
                    if u < max_bound {
                        out.push(format!("short cap U = {u} is below the largest |bound| {max_bound}"));
                    }
                }
            }
        }
        if let Some(mv) = self.big_m_override {
            if !(mv > 0.0) {
                out.push(format!("big-M override {mv} must be positive"));
            }
        }
        out
    }
}

/// Portfolio weights as fractions of wealth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Portfolio(pub Vec<f64>);

impl Portfolio {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    /// Checks budget, bounds and extra rows within [`WEIGHT_TOLERANCE`].
    pub fn check(&self, spec: &ProblemSpec) -> Result<()> {
        let n = self.0.len();
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidInput(format!("weights sum to {sum}, expected 1")));
        }
        for (i, (w, (lo, hi))) in self.0.iter().zip(spec.asset_bounds(n)).enumerate() {
            if *w < lo - WEIGHT_TOLERANCE || *w > hi + WEIGHT_TOLERANCE {
                return Err(Error::InvalidInput(format!("weight {i} = {w} outside [{lo}, {hi}]")));
            }
        }
        for (r, row) in spec.extra_rows.iter().enumerate() {
            let lhs = dot(&row.coeffs, &self.0);
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + WEIGHT_TOLERANCE,
                Sense::Ge => lhs >= row.rhs - WEIGHT_TOLERANCE,
                Sense::Eq => (lhs - row.rhs).abs() <= WEIGHT_TOLERANCE,
            };
            if !ok {
                return Err(Error::InvalidInput(format!("extra row {r} violated: {lhs} vs {}", row.rhs)));
            }
        }
        Ok(())
    }
}

/// Which order statistic defines the sampled quantile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantileIndex {
    /// Number of scenarios allowed below the quantile, `floor(alpha * m)`.
    pub k: usize,
    /// 1-based order statistic, `k + 1`.
    pub order: usize,
}

impl QuantileIndex {
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        let k = floor_guarded(alpha * m as f64);
        if k >= m {
            return Err(Error::InvalidInput(format!("floor(alpha * m) = {k} must be below m = {m}")));
        }
        Ok(QuantileIndex { k, order: k + 1 })
    }
}

/// `floor` that absorbs representation error just below an integer, so
/// that e.g. `0.07 * 100` counts as 7.
pub(crate) fn floor_guarded(v: f64) -> usize {
    (v + 1e-9).floor().max(0.0) as usize
}

pub(crate) fn ceil_guarded(v: f64) -> usize {
    (v - 1e-9).ceil().max(0.0) as usize
}

/// Value at 0-based rank `k` of the ascending multiset.
pub fn order_statistic(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k, f64::total_cmp);
    *kth
}

/// Indices of the `k` smallest values, ties broken by lower index, sorted.
pub fn lowest_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// The sampled alpha-quantile of portfolio returns: the
/// `(floor(alpha m) + 1)`-th smallest of `x^T xi^j`. Loss VaR is its negation.
pub fn portfolio_quantile(x: &Portfolio, s: &ScenarioSet, alpha: f64) -> Result<f64> {
    let q = QuantileIndex::new(alpha, s.m())?;
    let r = s.portfolio_returns(x.weights())?;
    Ok(order_statistic(&r, q.k))
}

/// Big-M constant for the indicator rows. Exceeds every possible
/// `nu - x^T xi^j` gap by construction.
pub fn big_m(s: &ScenarioSet, spec: &ProblemSpec) -> Result<f64> {
    if let Some(m) = spec.big_m_override {
        return Ok(m);
    }
    let max_abs = s.max_abs();
    if spec.allow_short {
        let u = spec
            .short_cap
            .ok_or_else(|| Error::Config("allow_short requires a short cap U".into()))?;
        Ok(2.0 * u * max_abs + 1.0)
    } else {
        Ok(2.0 * max_abs + 1.0)
    }
}

/// Structured result of [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub issues: Vec<String>,
    pub m: usize,
    pub n: usize,
    pub k: Option<usize>,
    /// `floor(alpha m) = 0`: the MILP collapses to a pure LP.
    pub k_zero: bool,
    /// Largest `x^T mu` over the admissible set, `None` if the set is empty
    /// or the LP could not be solved.
    pub max_expected_return: Option<f64>,
    pub mu0_attainable: Option<bool>,
}

/// Checks every invariant and whether the return floor can be met. Never
/// fails; all findings land in the report.
pub fn validate_instance(s: &ScenarioSet, spec: &ProblemSpec) -> ValidationReport {
    let mut issues = spec.violations(s.n());
    if let Some(i) = s.mean_mismatch() {
        issues.push(format!("mu[{i}] differs from the column mean"));
    }
    let k = QuantileIndex::new(spec.alpha, s.m()).ok().map(|q| q.k);
    if k.is_none() && issues.is_empty() {
        issues.push("floor(alpha * m) must be below m".into());
    }
    let max_ret = if spec.violations(s.n()).is_empty() { max_expected_return(s, spec) } else { None };
    let mu0_attainable = max_ret.map(|r| !spec.has_return_floor() || spec.mu0 <= r + WEIGHT_TOLERANCE);
    if max_ret.is_none() && spec.violations(s.n()).is_empty() {
        issues.push("admissible set is empty".into());
    }
    if mu0_attainable == Some(false) {
        issues.push(format!(
            "mu0 = {} exceeds the largest attainable expected return {}",
            spec.mu0,
            max_ret.unwrap_or(f64::NAN)
        ));
    }
    ValidationReport {
        valid: issues.is_empty(),
        issues,
        m: s.m(),
        n: s.n(),
        k,
        k_zero: k == Some(0),
        max_expected_return: max_ret,
        mu0_attainable,
    }
}

/// `max x^T mu` over bounds, extra rows and the budget.
pub(crate) fn max_expected_return(s: &ScenarioSet, spec: &ProblemSpec) -> Option<f64> {
    let n = s.n();
    let (lower, upper): (Vec<f64>, Vec<f64>) = spec.asset_bounds(n).into_iter().unzip();
    let mut rows = vec![DenseRow { coeffs: vec![1.0; n], sense: Sense::Eq, rhs: 1.0 }];
    rows.extend(spec.extra_rows.iter().map(|r| DenseRow { coeffs: r.coeffs.clone(), sense: r.sense, rhs: r.rhs }));
    let lp = DenseProblem { maximize: true, cost: s.mu().to_vec(), lower, upper, rows };
    let sol = lp.solve();
    (sol.status == LpStatus::Optimal).then_some(sol.objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn e1() -> ScenarioSet {
        ScenarioSet::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn e1_means() {
        assert_eq!(e1().mu(), &[0.5, 0.5]);
    }

    #[test]
    fn quantile_of_equal_weights_is_constant_return() {
        let q = portfolio_quantile(&Portfolio(vec![0.5, 0.5]), &e1(), 0.2).unwrap();
        assert_eq!(q, 0.5);
    }

    #[test]
    fn quantile_second_smallest() {
        // returns {1, 0, -1, 2, 0.5}; sorted -1, 0, 0.5, 1, 2
        let q = portfolio_quantile(&Portfolio(vec![1.0, 0.0]), &e1(), 0.2).unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn single_scenario_quantile_is_the_return() {
        let s = ScenarioSet::new(vec![vec![0.3, -0.7]], vec![]).unwrap();
        let q = portfolio_quantile(&Portfolio(vec![0.25, 0.75]), &s, 0.9).unwrap();
        assert_eq!(q, 0.25 * 0.3 - 0.75 * 0.7);
    }

    #[test]
    fn quantile_keeps_ties() {
        let s = ScenarioSet::new(vec![vec![1.0], vec![1.0], vec![1.0], vec![5.0]], vec![]).unwrap();
        assert_eq!(portfolio_quantile(&Portfolio(vec![1.0]), &s, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn quantile_dimension_mismatch() {
        let err = portfolio_quantile(&Portfolio(vec![1.0]), &e1(), 0.2).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn big_m_rules() {
        let spec = ProblemSpec::new(0.2, 0.5);
        assert_eq!(big_m(&e1(), &spec).unwrap(), 5.0);

        let zeros = ScenarioSet::new(vec![vec![0.0, 0.0]; 3], vec![]).unwrap();
        assert_eq!(big_m(&zeros, &spec).unwrap(), 1.0);

        let short = ProblemSpec { allow_short: true, short_cap: Some(3.0), ..spec.clone() };
        assert_eq!(big_m(&e1(), &short).unwrap(), 13.0);

        let missing = ProblemSpec { allow_short: true, ..spec.clone() };
        assert!(matches!(big_m(&e1(), &missing), Err(Error::Config(_))));

        let fixed = ProblemSpec { big_m_override: Some(42.5), ..spec };
        assert_eq!(big_m(&e1(), &fixed).unwrap(), 42.5);
    }

    #[test]
    fn validate_e1() {
        let r = validate_instance(&e1(), &ProblemSpec::new(0.2, 0.5));
        assert!(r.valid, "{:?}", r.issues);
        assert_eq!(r.k, Some(1));
        assert_eq!(r.mu0_attainable, Some(true));
        assert!((r.max_expected_return.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn validate_flags_unattainable_mu0() {
        let r = validate_instance(&e1(), &ProblemSpec::new(0.2, 0.9));
        assert!(!r.valid);
        assert_eq!(r.mu0_attainable, Some(false));
    }

    #[test]
    fn validate_flags_bad_alpha_and_k_zero() {
        let r = validate_instance(&e1(), &ProblemSpec::new(0.0, 0.5));
        assert!(!r.valid);
        assert!(r.issues.iter().any(|i| i.contains("alpha")));

        let r = validate_instance(&e1(), &ProblemSpec::new(0.1, 0.5));
        assert!(r.valid);
        assert!(r.k_zero);
    }

    #[test]
    fn quantile_index_guards_representation_error() {
        assert_eq!(QuantileIndex::new(0.07, 100).unwrap().k, 7);
        assert_eq!(QuantileIndex::new(0.01, 1000).unwrap().k, 10);
        assert_eq!(QuantileIndex::new(0.2, 5).unwrap(), QuantileIndex { k: 1, order: 2 });
    }

    #[test]
    fn lowest_k_breaks_ties_by_index() {
        assert_eq!(lowest_k(&[0.5, 0.5, 0.5, 0.1], 2), vec![0, 3]);
    }

    #[test]
    fn scenario_set_rejects_ragged_and_nonfinite() {
        assert!(ScenarioSet::new(vec![vec![1.0], vec![1.0, 2.0]], vec![]).is_err());
        assert!(ScenarioSet::new(vec![vec![f64::NAN]], vec![]).is_err());
        assert!(ScenarioSet::new(vec![], vec![]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
            (1usize..5, 1usize..20).prop_flat_map(|(n, m)| {
                (
                    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, n), m),
                    prop::collection::vec(0.0..1.0f64, n),
                )
            })
        }

        proptest! {
            #[test]
            fn at_most_k_below_quantile((rows, w) in matrix(), alpha in 0.01..0.99f64) {
                let s = ScenarioSet::new(rows, vec![]).unwrap();
                let total: f64 = w.iter().sum::<f64>() + 1e-9;
                let x = Portfolio(w.iter().map(|v| (v + 1e-9 / w.len() as f64) / total).collect());
                prop_assume!(QuantileIndex::new(alpha, s.m()).is_ok());
                let k = QuantileIndex::new(alpha, s.m()).unwrap().k;
                let q = portfolio_quantile(&x, &s, alpha).unwrap();
                let below = s.portfolio_returns(x.weights()).unwrap().iter().filter(|r| **r < q).count();
                prop_assert!(below <= k);
            }

            #[test]
            fn quantile_is_positively_homogeneous((rows, w) in matrix(), c in 0.01..100.0f64) {
                let s = ScenarioSet::new(rows.clone(), vec![]).unwrap();
                let scaled = ScenarioSet::new(
                    rows.iter().map(|r| r.iter().map(|v| v * c).collect()).collect(), vec![]).unwrap();
                let x = Portfolio(w);
                let a = portfolio_quantile(&x, &s, 0.3).unwrap();
                let b = portfolio_quantile(&x, &scaled, 0.3).unwrap();
                prop_assert!((b - c * a).abs() <= 1e-9 * (1.0 + (c * a).abs()));
            }

            #[test]
            fn big_m_exceeds_twice_max_abs((rows, _w) in matrix()) {
                let s = ScenarioSet::new(rows, vec![]).unwrap();
                let m = big_m(&s, &ProblemSpec::new(0.1, 0.0)).unwrap();
                prop_assert!(m > 2.0 * s.max_abs());
            }
        }
    }
}
