//! Solver-agnostic LP/MILP descriptions of every formulation the toolkit
//! solves.
//!
//! Row tags are the contract with dual extraction: every big-M row carries
//! `RowTag::BigM(j)` with its 0-based scenario index, so callers look duals
//! up by tag rather than by row position.

mod lp_format;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{big_m, ProblemSpec, QuantileIndex, ScenarioSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

/// Semantic role of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowTag {
    /// Indicator row of scenario `j`: `nu - x^T xi^j <= M y_j` (or its
    /// fixed-threshold variant).
    BigM(usize),
    Cardinality,
    Budget,
    ReturnFloor,
    Extra(usize),
    /// CVaR shortfall row of scenario `j`.
    Shortfall(usize),
    CvarCap,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowTag::BigM(j) => write!(f, "bigM:{j}"),
            RowTag::Cardinality => f.write_str("cardinality"),
            RowTag::Budget => f.write_str("budget"),
            RowTag::ReturnFloor => f.write_str("return-floor"),
            RowTag::Extra(r) => write!(f, "extra:{r}"),
            RowTag::Shortfall(j) => write!(f, "shortfall:{j}"),
            RowTag::CvarCap => f.write_str("cvar-cap"),
        }
    }
}

impl std::str::FromStr for RowTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown row tag {s:?}"));
        let index = |v: &str| v.parse::<usize>().map_err(|_| bad());
        Ok(match s.split_once(':') {
            Some(("bigM", j)) => RowTag::BigM(index(j)?),
            Some(("extra", r)) => RowTag::Extra(index(r)?),
            Some(("shortfall", j)) => RowTag::Shortfall(index(j)?),
            Some(_) => return Err(bad()),
            None => match s {
                "cardinality" => RowTag::Cardinality,
                "budget" => RowTag::Budget,
                "return-floor" => RowTag::ReturnFloor,
                "cvar-cap" => RowTag::CvarCap,
                _ => return Err(bad()),
            },
        })
    }
}

impl Serialize for RowTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RowTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// Sparse `(variable index, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub tag: Option<RowTag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: ObjSense,
    pub coeffs: Vec<(usize, f64)>,
}

/// Where the semantic variables live in a model's variable list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub x: Vec<usize>,
    pub nu: Option<usize>,
    /// `(scenario j, variable index)` for every indicator present.
    pub y: Vec<(usize, usize)>,
    pub zeta: Option<usize>,
    pub u: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
    pub layout: Layout,
    /// Builder remarks such as degenerate inputs.
    pub notes: Vec<String>,
}

impl LinearModel {
    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.kind == VarKind::Binary)
    }

    pub fn num_binaries(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Constraint name to tag, for every tagged row.
    pub fn tags(&self) -> BTreeMap<String, RowTag> {
        self.constraints.iter().filter_map(|c| c.tag.map(|t| (c.name.clone(), t))).collect()
    }

    pub fn row_by_tag(&self, tag: RowTag) -> Option<usize> {
        self.constraints.iter().position(|c| c.tag == Some(tag))
    }

    pub fn var_by_name(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Checks that every row references declared variables and bounds are
    /// ordered.
    pub fn check(&self) -> Result<()> {
        let nv = self.variables.len();
        for c in &self.constraints {
            if let Some((i, _)) = c.coeffs.iter().find(|(i, _)| *i >= nv) {
                return Err(Error::InvalidInput(format!("row {} references undeclared variable {i}", c.name)));
            }
        }
        if let Some((i, _)) = self.objective.coeffs.iter().find(|(i, _)| *i >= nv) {
            return Err(Error::InvalidInput(format!("objective references undeclared variable {i}")));
        }
        if let Some(v) = self.variables.iter().find(|v| v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan()) {
            return Err(Error::InvalidInput(format!("variable {} has bounds [{}, {}]", v.name, v.lower, v.upper)));
        }
        Ok(())
    }

    /// Evaluates the objective at a primal point.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.coeffs.iter().map(|(i, c)| c * values[*i]).sum()
    }

    /// Writes the model in CPLEX LP text format.
    pub fn to_lp_string(&self) -> String {
        lp_format::write(self)
    }
}

struct Builder {
    model: LinearModel,
}

impl Builder {
    fn new(name: &str, sense: ObjSense) -> Self {
        Builder {
            model: LinearModel {
                name: name.to_string(),
                variables: Vec::new(),
                constraints: Vec::new(),
                objective: Objective { sense, coeffs: Vec::new() },
                layout: Layout::default(),
                notes: Vec::new(),
            },
        }
    }

    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        self.model.variables.push(Variable { name, kind, lower, upper });
        self.model.variables.len() - 1
    }

    fn row(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64, tag: Option<RowTag>) {
        let coeffs = coeffs.into_iter().filter(|(_, c)| *c != 0.0).collect();
        self.model.constraints.push(Constraint { name, coeffs, sense, rhs, tag });
    }

    /// Portfolio weights with their bounds; returns the indices.
    fn portfolio(&mut self, s: &ScenarioSet, spec: &ProblemSpec) -> Vec<usize> {
        let x: Vec<usize> = spec
            .asset_bounds(s.n())
            .into_iter()
            .enumerate()
            .map(|(i, (lo, hi))| self.var(format!("x{i}"), VarKind::Continuous, lo, hi))
            .collect();
        self.model.layout.x = x.clone();
        x
    }

    fn nu(&mut self) -> usize {
        let nu = self.var("nu".into(), VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY);
        self.model.layout.nu = Some(nu);
        nu
    }

    fn binary(&mut self, j: usize) -> usize {
        let y = self.var(format!("y{j}"), VarKind::Binary, 0.0, 1.0);
        self.model.layout.y.push((j, y));
        y
    }

    /// Budget and the general rows of the admissible set.
    fn admissible(&mut self, x: &[usize], spec: &ProblemSpec) {
        self.row("budget".into(), x.iter().map(|&i| (i, 1.0)).collect(), Sense::Eq, 1.0, Some(RowTag::Budget));
        for (r, row) in spec.extra_rows.iter().enumerate() {
            let coeffs = x.iter().zip(&row.coeffs).map(|(&i, &c)| (i, c)).collect();
            self.row(format!("extra_{r}"), coeffs, row.sense, row.rhs, Some(RowTag::Extra(r)));
        }
    }

    fn return_floor(&mut self, x: &[usize], s: &ScenarioSet, spec: &ProblemSpec) {
        if spec.has_return_floor() {
            let coeffs = x.iter().zip(s.mu()).map(|(&i, &c)| (i, c)).collect();
            self.row("ret_floor".into(), coeffs, Sense::Ge, spec.mu0, Some(RowTag::ReturnFloor));
        }
    }

    /// `nu - x^T xi^j - big_m * y_j <= rhs` with `nu` and `y_j` optional.
    fn indicator_row(
        &mut self,
        j: usize,
        x: &[usize],
        s: &ScenarioSet,
        nu: Option<usize>,
        y: Option<(usize, f64)>,
        rhs: f64,
    ) {
        let mut coeffs: Vec<(usize, f64)> = nu.map(|v| (v, 1.0)).into_iter().collect();
        coeffs.extend(x.iter().zip(s.scenario(j)).map(|(&i, &xi)| (i, -xi)));
        if let Some((yv, m)) = y {
            coeffs.push((yv, -m));
        }
        self.row(format!("bigM_{j}"), coeffs, Sense::Le, rhs, Some(RowTag::BigM(j)));
    }

    fn maximize(&mut self, coeffs: Vec<(usize, f64)>) {
        self.model.objective.coeffs = coeffs.into_iter().filter(|(_, c)| *c != 0.0).collect();
    }

    fn finish(self) -> LinearModel {
        self.model
    }
}

fn checked(s: &ScenarioSet, spec: &ProblemSpec) -> Result<(usize, f64)> {
    let issues = spec.violations(s.n());
    if !issues.is_empty() {
        return Err(Error::InvalidInput(issues.join("; ")));
    }
    Ok((QuantileIndex::new(spec.alpha, s.m())?.k, big_m(s, spec)?))
}

fn index_set(set: &[usize], m: usize, what: &str) -> Result<Vec<usize>> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&j) = v.iter().find(|&&j| j >= m) {
        return Err(Error::InvalidInput(format!("{what} contains scenario {j}, but m = {m}")));
    }
    Ok(v)
}

/// Full VaR MILP: `max nu` with exactly `floor(alpha m)` indicators set.
/// Its optimum is the optimal sampled quantile.
///
/// With `floor(alpha m) = 0` no indicators are created and the model is the
/// pure LP `max nu s.t. nu <= x^T xi^j`.
pub fn build_full_milp(s: &ScenarioSet, spec: &ProblemSpec) -> Result<LinearModel> {
    let all: Vec<usize> = (0..s.m()).collect();
    let mut model = restricted(s, spec, &all)?;
    model.name = "var_full".into();
    Ok(model)
}

/// Restriction of the full MILP with `y_j = 0` fixed for `j` outside `set`.
pub fn build_restricted_milp(s: &ScenarioSet, spec: &ProblemSpec, set: &[usize]) -> Result<LinearModel> {
    restricted(s, spec, set)
}

fn restricted(s: &ScenarioSet, spec: &ProblemSpec, set: &[usize]) -> Result<LinearModel> {
    let (k, m_big) = checked(s, spec)?;
    let set = index_set(set, s.m(), "J")?;
    if set.len() < k {
        return Err(Error::Precondition(format!("|J| = {} is below floor(alpha m) = {k}", set.len())));
    }
    let mut b = Builder::new("var_restricted", ObjSense::Maximize);
    let x = b.portfolio(s, spec);
    let nu = b.nu();
    let mut in_set = vec![false; s.m()];
    set.iter().for_each(|&j| in_set[j] = true);
    let mut ys = Vec::new();
    for j in 0..s.m() {
        if k > 0 && in_set[j] {
            let y = b.binary(j);
            ys.push(y);
            b.indicator_row(j, &x, s, Some(nu), Some((y, m_big)), 0.0);
        } else {
            b.indicator_row(j, &x, s, Some(nu), None, 0.0);
        }
    }
    if k > 0 {
        b.row("card".into(), ys.iter().map(|&y| (y, 1.0)).collect(), Sense::Eq, k as f64, Some(RowTag::Cardinality));
    } else {
        b.model.notes.push("floor(alpha m) = 0: pure LP, no indicators".into());
    }
    b.return_floor(&x, s, spec);
    b.admissible(&x, spec);
    b.maximize(vec![(nu, 1.0)]);
    Ok(b.finish())
}

/// Alternate formulation: maximize expected return subject to at most
/// `floor(alpha m)` scenarios falling below `threshold`.
///
/// The cardinality row sums over all `m` indicators.
pub fn build_max_return_milp(s: &ScenarioSet, spec: &ProblemSpec, threshold: f64) -> Result<LinearModel> {
    let all: Vec<usize> = (0..s.m()).collect();
    let mut model = upper(s, spec, &all, threshold)?;
    model.name = "var_max_return".into();
    Ok(model)
}

/// Relaxation of [`build_max_return_milp`] keeping only the indicator rows
/// of scenarios in `set`. Its optimum bounds the full problem's from above.
pub fn build_upper_milp(s: &ScenarioSet, spec: &ProblemSpec, set: &[usize], threshold: f64) -> Result<LinearModel> {
    upper(s, spec, set, threshold)
}

fn upper(s: &ScenarioSet, spec: &ProblemSpec, set: &[usize], threshold: f64) -> Result<LinearModel> {
    let (k, m_big) = checked(s, spec)?;
    let set = index_set(set, s.m(), "I")?;
    if set.len() < k {
        return Err(Error::Precondition(format!("|I| = {} is below floor(alpha m) = {k}", set.len())));
    }
    let mut b = Builder::new("var_upper", ObjSense::Maximize);
    let x = b.portfolio(s, spec);
    let mut ys = Vec::new();
    for &j in &set {
        // threshold - x^T xi^j - M y_j <= 0
        if k > 0 {
            let y = b.binary(j);
            ys.push(y);
            b.indicator_row(j, &x, s, None, Some((y, m_big)), -threshold);
        } else {
            b.indicator_row(j, &x, s, None, None, -threshold);
        }
    }
    if k > 0 {
        b.row("card".into(), ys.iter().map(|&y| (y, 1.0)).collect(), Sense::Le, k as f64, Some(RowTag::Cardinality));
    }
    b.admissible(&x, spec);
    b.maximize(x.iter().zip(s.mu()).map(|(&i, &c)| (i, c)).collect());
    Ok(b.finish())
}

/// LP over `(x, nu)` with every indicator fixed: `nu - x^T xi^j <= M y_j`.
/// Duals of the tagged big-M rows drive the lower-bound iteration.
pub fn build_fixed_y_lp(s: &ScenarioSet, spec: &ProblemSpec, y: &[bool]) -> Result<LinearModel> {
    let (_, m_big) = checked(s, spec)?;
    if y.len() != s.m() {
        return Err(Error::InvalidInput(format!("indicator vector has {} entries, m = {}", y.len(), s.m())));
    }
    let mut b = Builder::new("var_fixed_y", ObjSense::Maximize);
    let x = b.portfolio(s, spec);
    let nu = b.nu();
    for (j, &on) in y.iter().enumerate() {
        b.indicator_row(j, &x, s, Some(nu), None, if on { m_big } else { 0.0 });
    }
    if y.iter().all(|&on| on) {
        b.model.notes.push("degenerate: every scenario relaxed, nu is capped only by M".into());
    }
    b.return_floor(&x, s, spec);
    b.admissible(&x, spec);
    b.maximize(vec![(nu, 1.0)]);
    Ok(b.finish())
}

fn cvar_core(b: &mut Builder, x: &[usize], s: &ScenarioSet) -> (usize, Vec<usize>) {
    let zeta = b.var("zeta".into(), VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY);
    b.model.layout.zeta = Some(zeta);
    let u: Vec<usize> = (0..s.m()).map(|j| b.var(format!("u{j}"), VarKind::Continuous, 0.0, f64::INFINITY)).collect();
    b.model.layout.u = u.clone();
    for (j, &uj) in u.iter().enumerate() {
        // zeta - x^T xi^j - u_j <= 0
        let mut coeffs = vec![(zeta, 1.0)];
        coeffs.extend(x.iter().zip(s.scenario(j)).map(|(&i, &xi)| (i, -xi)));
        coeffs.push((uj, -1.0));
        b.row(format!("short_{j}"), coeffs, Sense::Le, 0.0, Some(RowTag::Shortfall(j)));
    }
    (zeta, u)
}

/// Rockafellar-Uryasev CVaR LP, maximizing `zeta - sum(u) / (alpha m)`.
/// Its optimum is a lower bound on the optimal sampled quantile and its
/// portfolio is feasible for the VaR problem.
pub fn build_cvar_lp(s: &ScenarioSet, spec: &ProblemSpec) -> Result<LinearModel> {
    checked(s, spec)?;
    let mut b = Builder::new("cvar", ObjSense::Maximize);
    let x = b.portfolio(s, spec);
    let (zeta, u) = cvar_core(&mut b, &x, s);
    b.return_floor(&x, s, spec);
    b.admissible(&x, spec);
    let w = 1.0 / (spec.alpha * s.m() as f64);
    let mut obj = vec![(zeta, 1.0)];
    obj.extend(u.iter().map(|&uj| (uj, -w)));
    b.maximize(obj);
    Ok(b.finish())
}

/// Maximum expected return subject to CVaR risk `-(zeta - sum(u)/(alpha m))`
/// not exceeding `risk_cap`.
pub fn build_cvar_return_lp(s: &ScenarioSet, spec: &ProblemSpec, risk_cap: f64) -> Result<LinearModel> {
    checked(s, spec)?;
    let mut b = Builder::new("cvar_max_return", ObjSense::Maximize);
    let x = b.portfolio(s, spec);
    let (zeta, u) = cvar_core(&mut b, &x, s);
    let w = 1.0 / (spec.alpha * s.m() as f64);
    let mut cap = vec![(zeta, -1.0)];
    cap.extend(u.iter().map(|&uj| (uj, w)));
    b.row("cvar_cap".into(), cap, Sense::Le, risk_cap, Some(RowTag::CvarCap));
    b.admissible(&x, spec);
    b.maximize(x.iter().zip(s.mu()).map(|(&i, &c)| (i, c)).collect());
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> ScenarioSet {
        ScenarioSet::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn full_milp_shape() {
        let m = build_full_milp(&e1(), &ProblemSpec::new(0.2, 0.5)).unwrap();
        assert_eq!(m.variables.len(), 8);
        assert_eq!(m.num_binaries(), 5);
        let bigm = m.constraints.iter().filter(|c| matches!(c.tag, Some(RowTag::BigM(_)))).count();
        assert_eq!(bigm, 5);
        let card = &m.constraints[m.row_by_tag(RowTag::Cardinality).unwrap()];
        assert_eq!(card.sense, Sense::Eq);
        assert_eq!(card.rhs, 1.0);
        m.check().unwrap();
    }

    #[test]
    fn k_zero_collapses_to_lp() {
        let m = build_full_milp(&e1(), &ProblemSpec::new(0.1, 0.5)).unwrap();
        assert!(!m.has_integers());
        assert!(m.row_by_tag(RowTag::Cardinality).is_none());
        assert!(m.constraints.iter().filter(|c| matches!(c.tag, Some(RowTag::BigM(_)))).all(|c| c.rhs == 0.0));
    }

    #[test]
    fn restricted_requires_enough_scenarios() {
        let err = build_restricted_milp(&e1(), &ProblemSpec::new(0.4, 0.5), &[0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = build_upper_milp(&e1(), &ProblemSpec::new(0.4, 0.5), &[3], 0.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn restricted_binaries_only_in_set() {
        let m = build_restricted_milp(&e1(), &ProblemSpec::new(0.2, 0.5), &[1, 0]).unwrap();
        assert_eq!(m.layout.y.iter().map(|(j, _)| *j).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(m.constraints.iter().filter(|c| matches!(c.tag, Some(RowTag::BigM(_)))).count(), 5);
    }

    #[test]
    fn upper_rows_only_in_set() {
        let m = build_upper_milp(&e1(), &ProblemSpec::new(0.2, 0.5), &[0, 1], 0.505).unwrap();
        let rows: Vec<_> = m.constraints.iter().filter_map(|c| match c.tag {
            Some(RowTag::BigM(j)) => Some((j, c.rhs)),
            _ => None,
        }).collect();
        assert_eq!(rows, vec![(0, -0.505), (1, -0.505)]);
        assert!(m.row_by_tag(RowTag::ReturnFloor).is_none());
        assert_eq!(m.constraints[m.row_by_tag(RowTag::Cardinality).unwrap()].sense, Sense::Le);
    }

    #[test]
    fn fixed_y_all_ones_is_flagged() {
        let m = build_fixed_y_lp(&e1(), &ProblemSpec::new(0.2, 0.5), &[true; 5]).unwrap();
        assert!(!m.notes.is_empty());
        assert!(m.constraints.iter().filter(|c| matches!(c.tag, Some(RowTag::BigM(_)))).all(|c| c.rhs == 5.0));
        let m = build_fixed_y_lp(&e1(), &ProblemSpec::new(0.2, 0.5), &[true, false, false, false, false]).unwrap();
        assert!(m.notes.is_empty());
    }

    #[test]
    fn row_tags_round_trip_as_strings() {
        for tag in [RowTag::BigM(7), RowTag::Budget, RowTag::Cardinality, RowTag::ReturnFloor, RowTag::Extra(2),
                    RowTag::Shortfall(3), RowTag::CvarCap] {
            assert_eq!(tag.to_string().parse::<RowTag>().unwrap(), tag);
        }
        assert_eq!(RowTag::BigM(4).to_string(), "bigM:4");
        assert!("bigM:x".parse::<RowTag>().is_err());
    }

    #[test]
    fn unbounded_return_floor_is_dropped() {
        let m = build_full_milp(&e1(), &ProblemSpec::new(0.2, f64::NEG_INFINITY)).unwrap();
        assert!(m.row_by_tag(RowTag::ReturnFloor).is_none());
    }
}
