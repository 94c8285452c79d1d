//! Risk-reward frontiers and the composition test between them.
//!
//! `beta(a)` is the least risk reachable with reward at least `a`;
//! `alpha(b)` is the most reward reachable with risk at most `b`. The two
//! invert each other (`alpha(beta(a)) = a`) exactly where `beta` is strictly
//! increasing. On a flat stretch of `beta` the composition overshoots, and
//! sampled VaR frontiers have such stretches.
//!
//! VaR risk is the negated sampled quantile, so "least risk" means
//! "largest quantile".

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{build_cvar_lp, build_cvar_return_lp, build_full_milp, build_max_return_milp};
use crate::problem::{max_expected_return, ProblemSpec, ScenarioSet};
use crate::solve::oracle::{oracle_max_return, oracle_var};
use crate::solve::{Backend, Limits, SolveStatus};

/// Values within this distance count as one plateau level.
pub const PLATEAU_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskKind {
    VarQuantile,
    Cvar,
    HuberDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Minimum risk against a reward floor.
    Beta,
    /// Maximum reward against a risk cap.
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Reward floor for a beta curve, risk cap for an alpha curve.
    pub level: f64,
    /// `+inf` for an unreachable reward floor, `-inf` for an unmeetable cap.
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolio: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CurvePoint {
    fn exact(level: f64, value: f64, portfolio: Option<Vec<f64>>) -> Self {
        CurvePoint { level, value, portfolio, error: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub id: usize,
    pub start: f64,
    pub end: f64,
    pub value: f64,
    /// Grid indices covered, inclusive.
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierCurve {
    pub risk: RiskKind,
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub plateaus: Vec<Plateau>,
}

impl FrontierCurve {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Plateau containing grid index `i`, if any.
    pub fn plateau_of(&self, i: usize) -> Option<&Plateau> {
        self.plateaus.iter().find(|p| p.first <= i && i <= p.last)
    }

    /// CSV with columns `level,value,plateau_id` (empty id off plateaus).
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["level", "value", "plateau_id"])?;
        for (i, p) in self.points.iter().enumerate() {
            let id = self.plateau_of(i).map(|p| p.id.to_string()).unwrap_or_default();
            w.write_record([p.level.to_string(), p.value.to_string(), id])?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// A risk measure paired with a reward, able to evaluate both frontiers.
pub trait RiskReward: Sync {
    fn risk_kind(&self) -> RiskKind;

    /// Least risk subject to reward at least `a`; `+inf` if unreachable.
    fn beta(&self, a: f64) -> CurvePoint;

    /// Most reward subject to risk at most `b`; `-inf` if no portfolio qualifies.
    fn alpha(&self, b: f64) -> CurvePoint;

    /// Smallest attainable risk with no reward floor.
    fn min_risk(&self) -> f64;

    /// Largest attainable reward.
    fn max_reward(&self) -> f64;

    /// Evenly spaced reward floors from the reward of the least-risk
    /// portfolio to the largest reward. A single level when the two coincide.
    fn reward_grid(&self, points: usize) -> Vec<f64> {
        let lo = self.alpha(self.min_risk()).value;
        let hi = self.max_reward();
        if hi - lo <= PLATEAU_TOL {
            return linspace(lo, hi, points.min(1));
        }
        linspace(lo, hi, points)
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

fn failed(level: f64, value: f64, msg: String) -> CurvePoint {
    CurvePoint { level, value, portfolio: None, error: Some(msg) }
}

/// Sampled VaR frontier, each point one MILP solve.
pub struct VarFrontier<'a> {
    pub scenarios: &'a ScenarioSet,
    pub spec: ProblemSpec,
    pub backend: &'a dyn Backend,
    pub limits: Limits,
}

impl RiskReward for VarFrontier<'_> {
    fn risk_kind(&self) -> RiskKind {
        RiskKind::VarQuantile
    }

    fn beta(&self, a: f64) -> CurvePoint {
        let run = || -> Result<CurvePoint> {
            let model = build_full_milp(self.scenarios, &self.spec.with_mu0(a))?;
            let out = self.backend.solve(&model, &self.limits)?;
            Ok(match out.status {
                SolveStatus::Infeasible => CurvePoint::exact(a, f64::INFINITY, None),
                SolveStatus::Optimal => {
                    CurvePoint::exact(a, -out.objective.expect("optimal"), out.portfolio(&model))
                }
                s => failed(a, f64::NAN, format!("solve ended with status {s:?}")),
            })
        };
        run().unwrap_or_else(|e| failed(a, f64::NAN, e.to_string()))
    }

    fn alpha(&self, b: f64) -> CurvePoint {
        let run = || -> Result<CurvePoint> {
            let model = build_max_return_milp(self.scenarios, &self.spec, -b)?;
            let out = self.backend.solve(&model, &self.limits)?;
            Ok(match out.status {
                SolveStatus::Infeasible => CurvePoint::exact(b, f64::NEG_INFINITY, None),
                SolveStatus::Optimal => CurvePoint::exact(b, out.objective.expect("optimal"), out.portfolio(&model)),
                s => failed(b, f64::NAN, format!("solve ended with status {s:?}")),
            })
        };
        run().unwrap_or_else(|e| failed(b, f64::NAN, e.to_string()))
    }

    fn min_risk(&self) -> f64 {
        self.beta(f64::NEG_INFINITY).value
    }

    fn max_reward(&self) -> f64 {
        max_expected_return(self.scenarios, &self.spec).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Sampled VaR frontier evaluated by subset enumeration, for small instances.
pub struct VarOracleFrontier<'a> {
    pub scenarios: &'a ScenarioSet,
    pub spec: ProblemSpec,
}

impl RiskReward for VarOracleFrontier<'_> {
    fn risk_kind(&self) -> RiskKind {
        RiskKind::VarQuantile
    }

    fn beta(&self, a: f64) -> CurvePoint {
        match oracle_var(self.scenarios, &self.spec.with_mu0(a)) {
            Ok(sol) => CurvePoint::exact(a, -sol.value, sol.weights),
            Err(e) => failed(a, f64::NAN, e.to_string()),
        }
    }

    fn alpha(&self, b: f64) -> CurvePoint {
        match oracle_max_return(self.scenarios, &self.spec, -b) {
            Ok(sol) => CurvePoint::exact(b, sol.value, sol.weights),
            Err(e) => failed(b, f64::NAN, e.to_string()),
        }
    }

    fn min_risk(&self) -> f64 {
        self.beta(f64::NEG_INFINITY).value
    }

    fn max_reward(&self) -> f64 {
        max_expected_return(self.scenarios, &self.spec).unwrap_or(f64::NEG_INFINITY)
    }
}

/// CVaR frontier (risk is the negated lower-tail mean), one LP per point.
pub struct CvarFrontier<'a> {
    pub scenarios: &'a ScenarioSet,
    pub spec: ProblemSpec,
    pub backend: &'a dyn Backend,
    pub limits: Limits,
}

impl RiskReward for CvarFrontier<'_> {
    fn risk_kind(&self) -> RiskKind {
        RiskKind::Cvar
    }

    fn beta(&self, a: f64) -> CurvePoint {
        let run = || -> Result<CurvePoint> {
            let model = build_cvar_lp(self.scenarios, &self.spec.with_mu0(a))?;
            let out = self.backend.solve_lp(&model, &self.limits)?;
            Ok(match out.status {
                SolveStatus::Infeasible => CurvePoint::exact(a, f64::INFINITY, None),
                SolveStatus::Optimal => {
                    CurvePoint::exact(a, -out.objective.expect("optimal"), out.portfolio(&model))
                }
                s => failed(a, f64::NAN, format!("solve ended with status {s:?}")),
            })
        };
        run().unwrap_or_else(|e| failed(a, f64::NAN, e.to_string()))
    }

    fn alpha(&self, b: f64) -> CurvePoint {
        let run = || -> Result<CurvePoint> {
            let model = build_cvar_return_lp(self.scenarios, &self.spec, b)?;
            let out = self.backend.solve_lp(&model, &self.limits)?;
            Ok(match out.status {
                SolveStatus::Infeasible => CurvePoint::exact(b, f64::NEG_INFINITY, None),
                SolveStatus::Optimal => CurvePoint::exact(b, out.objective.expect("optimal"), out.portfolio(&model)),
                s => failed(b, f64::NAN, format!("solve ended with status {s:?}")),
            })
        };
        run().unwrap_or_else(|e| failed(b, f64::NAN, e.to_string()))
    }

    fn min_risk(&self) -> f64 {
        self.beta(f64::NEG_INFINITY).value
    }

    fn max_reward(&self) -> f64 {
        max_expected_return(self.scenarios, &self.spec).unwrap_or(f64::NEG_INFINITY)
    }
}

/// One-dimensional example with a non-convex risk whose `beta` is still
/// strictly increasing. Risk is `x^2` for `|x| <= kappa` and
/// `|x| + kappa (kappa - 1)` beyond, reward is `x`, and `x` ranges over
/// `[-2 kappa, 2 kappa]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberDemo {
    pub kappa: f64,
}

impl HuberDemo {
    pub fn risk(&self, x: f64) -> f64 {
        let k = self.kappa;
        if x.abs() <= k {
            x * x
        } else {
            x.abs() + k * (k - 1.0)
        }
    }
}

impl RiskReward for HuberDemo {
    fn risk_kind(&self) -> RiskKind {
        RiskKind::HuberDemo
    }

    fn beta(&self, a: f64) -> CurvePoint {
        if a > 2.0 * self.kappa {
            return CurvePoint::exact(a, f64::INFINITY, None);
        }
        let x = a.max(0.0);
        CurvePoint::exact(a, self.risk(x), Some(vec![x]))
    }

    fn alpha(&self, b: f64) -> CurvePoint {
        let k = self.kappa;
        if b < 0.0 {
            return CurvePoint::exact(b, f64::NEG_INFINITY, None);
        }
        let x = if b <= k * k { b.sqrt() } else { (b - k * (k - 1.0)).min(2.0 * k) };
        CurvePoint::exact(b, x, Some(vec![x]))
    }

    fn min_risk(&self) -> f64 {
        0.0
    }

    fn max_reward(&self) -> f64 {
        2.0 * self.kappa
    }
}

/// Maximal runs of at least two consecutive finite values within
/// [`PLATEAU_TOL`] of the run's first value, over a non-empty level range.
pub fn detect_plateaus(points: &[CurvePoint]) -> Vec<Plateau> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < points.len() {
        let v = points[i].value;
        let mut j = i;
        if v.is_finite() {
            while j + 1 < points.len()
                && points[j + 1].value.is_finite()
                && (points[j + 1].value - v).abs() <= PLATEAU_TOL
            {
                j += 1;
            }
        }
        if j > i && points[j].level > points[i].level {
            out.push(Plateau {
                id: out.len(),
                start: points[i].level,
                end: points[j].level,
                value: v,
                first: i,
                last: j,
            });
        }
        i = j + 1;
    }
    out
}

/// `beta` on each grid level, evaluated in parallel, assembled in grid order.
pub fn beta_curve(rr: &dyn RiskReward, grid: &[f64]) -> FrontierCurve {
    let points: Vec<CurvePoint> = grid.par_iter().map(|&a| rr.beta(a)).collect();
    let plateaus = detect_plateaus(&points);
    FrontierCurve { risk: rr.risk_kind(), kind: CurveKind::Beta, points, plateaus }
}

/// `alpha` on each grid level, evaluated in parallel, assembled in grid order.
pub fn alpha_curve(rr: &dyn RiskReward, grid: &[f64]) -> FrontierCurve {
    let points: Vec<CurvePoint> = grid.par_iter().map(|&b| rr.alpha(b)).collect();
    let plateaus = detect_plateaus(&points);
    FrontierCurve { risk: rr.risk_kind(), kind: CurveKind::Alpha, points, plateaus }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub a: f64,
    pub beta: f64,
    /// `alpha(beta(a))`.
    pub composed: f64,
    pub equal: bool,
    pub on_plateau: bool,
    /// On a plateau and not its right end, so the composition must overshoot.
    pub plateau_interior: bool,
    /// For an overshoot landing before the next grid level: whether `beta`
    /// at the landing point still equals `beta(a)`, i.e. an off-grid plateau.
    pub witnessed: Option<bool>,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub risk: RiskKind,
    pub tol: f64,
    pub rows: Vec<DualityRow>,
    pub plateaus: Vec<Plateau>,
    pub failures: usize,
    /// Every overshoot lies on a plateau and every plateau interior overshoots.
    pub consistent: bool,
}

/// Checks `a = alpha(beta(a))` along a beta curve against its plateaus.
/// Grid levels with unreachable or failed `beta` are skipped.
pub fn duality_check(rr: &dyn RiskReward, curve: &FrontierCurve, tol: f64) -> DualityReport {
    let rows: Vec<DualityRow> = (0..curve.points.len())
        .into_par_iter()
        .filter(|&i| curve.points[i].value.is_finite())
        .map(|i| {
            let p = &curve.points[i];
            let composed = rr.alpha(p.value).value;
            let equal = (composed - p.level).abs() <= tol;
            let plateau = curve.plateau_of(i);
            let on_plateau = plateau.is_some();
            let plateau_interior = plateau.is_some_and(|pl| i < pl.last);
            let next_level = curve.points.get(i + 1).map(|q| q.level).unwrap_or(f64::INFINITY);
            let overshoot = composed > p.level + tol;
            let witnessed = (overshoot && !plateau_interior && composed < next_level)
                .then(|| (rr.beta(composed).value - p.value).abs() <= tol);
            let consistent = if overshoot {
                plateau_interior || witnessed == Some(true)
            } else {
                equal && !plateau_interior
            };
            DualityRow { a: p.level, beta: p.value, composed, equal, on_plateau, plateau_interior, witnessed, consistent }
        })
        .collect();
    let failures = rows.iter().filter(|r| !r.equal).count();
    let consistent = rows.iter().all(|r| r.consistent);
    DualityReport { risk: rr.risk_kind(), tol, rows, plateaus: curve.plateaus.clone(), failures, consistent }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub a: f64,
    pub b: f64,
    pub alpha_b: f64,
    pub beta_a: f64,
    /// `alpha(b) < a`, the premise of the implication.
    pub premise: bool,
    pub holds: bool,
}

/// Checks that `alpha(b) < a` implies `beta(a) >= b` on each pair.
pub fn bound_check(rr: &dyn RiskReward, pairs: &[(f64, f64)], tol: f64) -> Vec<BoundRow> {
    pairs
        .par_iter()
        .map(|&(a, b)| {
            let alpha_b = rr.alpha(b).value;
            let beta_a = rr.beta(a).value;
            let premise = alpha_b < a - tol;
            BoundRow { a, b, alpha_b, beta_a, premise, holds: !premise || beta_a >= b - tol }
        })
        .collect()
}

/// Synthetic two-asset instance whose VaR frontier has a plateau: two
/// exceedance patterns give the same quantile over a range of reward floors.
/// A stand-in for a real two-stock example; `alpha = 0.2` so one of six
/// scenarios may fall below the quantile.
pub fn plateau_instance() -> (ScenarioSet, ProblemSpec) {
    let rows = vec![
        vec![2.0, -1.0],
        vec![0.0, -2.0],
        vec![-0.5, 1.5],
        vec![-2.5, 2.5],
        vec![2.5, 0.0],
        vec![3.0, 0.5],
    ];
    let s = ScenarioSet::new(rows, vec!["STOCK_A".into(), "STOCK_B".into()]).expect("valid instance");
    (s, ProblemSpec::new(0.2, f64::NEG_INFINITY))
}
