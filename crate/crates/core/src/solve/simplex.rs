//! Dense two-phase tableau simplex with row duals.
//!
//! Sized for the enumeration oracle and small built-in solves: a few dozen
//! rows and columns. Dantzig pricing with a switch to Bland's rule after a
//! run of degenerate pivots.

use crate::model::Sense;

const PIVOT_EPS: f64 = 1e-9;
const OPT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseRow {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `max/min cost^T x` subject to `rows` and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProblem {
    pub maximize: bool,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<DenseRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Rate of objective improvement per unit increase of each row's rhs.
    pub duals: Vec<f64>,
}

/// How an original variable maps onto non-negative standard columns.
#[derive(Debug, Clone, Copy)]
enum ColMap {
    /// `x = lower + s`
    Shift(usize, f64),
    /// `x = upper - s`
    Mirror(usize, f64),
    /// `x = s+ - s-`
    Split(usize, usize),
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the rhs.
    t: Vec<Vec<f64>>,
    /// Reduced costs `z_j - c_j` (length `cols + 1`, last is the objective).
    obj: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    barred: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        self.t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            self.obj.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let n = self.cols;
        let mut obj = vec![0.0; n + 1];
        for j in 0..n {
            obj[j] = -cost[j];
        }
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                obj.iter_mut().zip(&self.t[i]).for_each(|(o, v)| *o += cb * v);
            }
        }
        self.obj = obj;
    }

    /// Maximizes the current objective row. Returns `Err(status)` when
    /// unbounded or out of pivots.
    fn run(&mut self, pivots: &mut usize) -> Result<(), LpStatus> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -OPT_EPS;
            for j in 0..self.cols {
                if self.barred[j] || self.obj[j] >= -OPT_EPS {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if self.obj[j] < best {
                    best = self.obj[j];
                    enter = Some(j);
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_EPS {
                    let ratio = row[self.cols] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else { return Err(LpStatus::Unbounded) };
            degenerate = if ratio.abs() <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, c);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(LpStatus::IterationLimit);
            }
        }
    }
}

impl DenseProblem {
    pub fn solve(&self) -> DenseSolution {
        let nvar = self.cost.len();
        let nrow_orig = self.rows.len();
        let fail = |status| DenseSolution {
            status,
            x: vec![0.0; nvar],
            objective: f64::NAN,
            duals: vec![0.0; nrow_orig],
        };
        if (0..nvar).any(|j| self.lower[j] > self.upper[j]) {
            return fail(LpStatus::Infeasible);
        }

        // Map variables onto non-negative columns.
        let mut maps = Vec::with_capacity(nvar);
        let mut ncols = 0usize;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..nvar {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let map = if lo.is_finite() {
                if hi.is_finite() {
                    bound_rows.push((ncols, hi - lo));
                }
                ColMap::Shift(ncols, lo)
            } else if hi.is_finite() {
                ColMap::Mirror(ncols, hi)
            } else {
                ncols += 1;
                ColMap::Split(ncols - 1, ncols)
            };
            ncols += 1;
            maps.push(map);
        }

        let sign = if self.maximize { 1.0 } else { -1.0 };
        let mut cost = vec![0.0; ncols];
        for (j, map) in maps.iter().enumerate() {
            let c = sign * self.cost[j];
            match *map {
                ColMap::Shift(col, _) => cost[col] = c,
                ColMap::Mirror(col, _) => cost[col] = -c,
                ColMap::Split(p, q) => {
                    cost[p] = c;
                    cost[q] = -c;
                }
            }
        }

        // Standard-form rows.
        let mut std_rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(nrow_orig + bound_rows.len());
        for row in &self.rows {
            let mut a = vec![0.0; ncols];
            let mut b = row.rhs;
            for (j, map) in maps.iter().enumerate() {
                let v = row.coeffs[j];
                if v == 0.0 {
                    continue;
                }
                match *map {
                    ColMap::Shift(col, lo) => {
                        a[col] += v;
                        b -= v * lo;
                    }
                    ColMap::Mirror(col, hi) => {
                        a[col] -= v;
                        b -= v * hi;
                    }
                    ColMap::Split(p, q) => {
                        a[p] += v;
                        a[q] -= v;
                    }
                }
            }
            std_rows.push((a, row.sense, b));
        }
        for &(col, width) in &bound_rows {
            let mut a = vec![0.0; ncols];
            a[col] = 1.0;
            std_rows.push((a, Sense::Le, width));
        }

        let nrows = std_rows.len();
        let mut flipped = vec![false; nrows];
        for (i, (a, sense, b)) in std_rows.iter_mut().enumerate() {
            if *b < 0.0 {
                a.iter_mut().for_each(|v| *v = -*v);
                *b = -*b;
                *sense = match *sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                flipped[i] = true;
            }
        }

        // Column layout: structural | slack/surplus | artificial.
        let n_slack = std_rows.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
        let n_art = std_rows.iter().filter(|(_, s, _)| *s != Sense::Le).count();
        let total = ncols + n_slack + n_art;
        let mut t = vec![vec![0.0; total + 1]; nrows];
        let mut basis = vec![0usize; nrows];
        let mut unit_col = vec![0usize; nrows];
        let mut is_art = vec![false; total];
        let (mut next_slack, mut next_art) = (ncols, ncols + n_slack);
        for (i, (a, sense, b)) in std_rows.iter().enumerate() {
            t[i][..ncols].copy_from_slice(a);
            t[i][total] = *b;
            match sense {
                Sense::Le => {
                    t[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    unit_col[i] = next_slack;
                    next_slack += 1;
                }
                Sense::Ge => {
                    t[i][next_slack] = -1.0;
                    next_slack += 1;
                    t[i][next_art] = 1.0;
                    is_art[next_art] = true;
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
                Sense::Eq => {
                    t[i][next_art] = 1.0;
                    is_art[next_art] = true;
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
            }
        }

        let mut tab = Tableau { t, obj: Vec::new(), basis, cols: total, barred: vec![false; total] };
        let mut pivots = 0usize;

        if n_art > 0 {
            let phase1: Vec<f64> = (0..total).map(|j| if is_art[j] { -1.0 } else { 0.0 }).collect();
            tab.set_costs(&phase1);
            if let Err(status) = tab.run(&mut pivots) {
                // Phase 1 is bounded; only the pivot cap can stop it.
                return fail(status);
            }
            let infeas = -tab.obj[total];
            let scale = 1.0 + std_rows.iter().map(|(_, _, b)| b.abs()).fold(0.0, f64::max);
            if infeas > 1e-8 * scale {
                return fail(LpStatus::Infeasible);
            }
            // Drive zero-level artificials out of the basis where possible.
            for i in 0..nrows {
                if is_art[tab.basis[i]] {
                    if let Some(c) = (0..total).find(|&j| !is_art[j] && tab.t[i][j].abs() > PIVOT_EPS) {
                        tab.pivot(i, c);
                    }
                }
            }
            tab.barred[..total].copy_from_slice(&is_art[..total]);
        }

        let mut full_cost = vec![0.0; total];
        full_cost[..ncols].copy_from_slice(&cost);
        tab.set_costs(&full_cost);
        if let Err(status) = tab.run(&mut pivots) {
            return fail(status);
        }

        let mut s = vec![0.0; total];
        for (i, &b) in tab.basis.iter().enumerate() {
            s[b] = tab.t[i][total];
        }
        let x: Vec<f64> = maps
            .iter()
            .map(|map| match *map {
                ColMap::Shift(col, lo) => lo + s[col],
                ColMap::Mirror(col, hi) => hi - s[col],
                ColMap::Split(p, q) => s[p] - s[q],
            })
            .collect();
        let duals = (0..nrow_orig)
            .map(|i| {
                let y = tab.obj[unit_col[i]];
                if flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        DenseSolution { status: LpStatus::Optimal, x, objective, duals }
    }
}
