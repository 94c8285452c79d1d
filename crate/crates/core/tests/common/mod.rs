//! Shared helpers for integration tests: random small instances and an
//! exact reference solver that shares no code with the library.
//!
//! The sampled quantile `q_k(x)` (the (k+1)-th smallest scenario return) is
//! piecewise linear, linear on every cell of the arrangement of hyperplanes
//! `x.(xi_a - xi_b) = 0`. Over the long-only simplex its maximum therefore
//! sits at a vertex of that arrangement intersected with the feasible set,
//! and every such vertex solves an `n x n` system: the budget row plus
//! `n - 1` hyperplanes. Enumerating them is exponential but exact.

#![allow(dead_code)]

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use varopt::{ProblemSpec, ScenarioSet};

pub const FEAS_TOL: f64 = 1e-9;

pub fn e1() -> ScenarioSet {
    ScenarioSet::new(
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
        vec![],
    )
    .unwrap()
}

pub fn e1_spec() -> ProblemSpec {
    ProblemSpec::new(0.2, 0.5)
}

/// `n` in {2,3,4}, `m` in 8..=14, `floor(alpha m)` in {1,2}, returns uniform
/// in [-3, 3], and an attainable floor (or none, one time in eight).
pub fn random_instance(seed: u64) -> (ScenarioSet, ProblemSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(8..=14);
    let k = rng.gen_range(1..=2);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
    let s = ScenarioSet::new(rows, vec![]).unwrap();
    let alpha = (k as f64 + 0.5) / m as f64;
    let lo = s.mu().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.mu().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mu0 = if rng.gen_range(0..8) == 0 { f64::NEG_INFINITY } else { lo + rng.gen_range(0.0..0.95) * (hi - lo) };
    (s, ProblemSpec::new(alpha, mu0))
}

pub fn k_of(spec: &ProblemSpec, m: usize) -> usize {
    (spec.alpha * m as f64 + 1e-9).floor() as usize
}

/// (k+1)-th smallest return of `x`, by sorting.
pub fn sorted_quantile(s: &ScenarioSet, x: &[f64], k: usize) -> f64 {
    let mut r: Vec<f64> = (0..s.m()).map(|j| s.scenario(j).iter().zip(x).map(|(a, b)| a * b).sum()).collect();
    r.sort_by(f64::total_cmp);
    r[k]
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for cc in c..n {
                a[r][cc] -= f * a[c][cc];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let t: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - t) / a[r][r];
    }
    Some(x)
}

/// Candidate points: budget row plus every choice of `n - 1` hyperplanes.
fn vertices(n: usize, planes: &[(Vec<f64>, f64)]) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0]];
    }
    let combos: Vec<Vec<usize>> = (0..planes.len()).combinations(n - 1).collect();
    combos
        .par_iter()
        .filter_map(|c| {
            let mut a = vec![vec![1.0; n]];
            let mut b = vec![1.0];
            for &i in c {
                a.push(planes[i].0.clone());
                b.push(planes[i].1);
            }
            solve_square(a, b)
        })
        .collect()
}

fn plain(spec: &ProblemSpec) {
    assert!(spec.bounds.is_none() && spec.extra_rows.is_empty() && !spec.allow_short, "reference solver is long-only");
}

fn feasible(s: &ScenarioSet, spec: &ProblemSpec, x: &[f64]) -> bool {
    x.iter().all(|&v| v >= -FEAS_TOL)
        && (!spec.has_return_floor() || x.iter().zip(s.mu()).map(|(a, b)| a * b).sum::<f64>() >= spec.mu0 - FEAS_TOL)
}

/// Exact optimal sampled quantile; `-inf` if no portfolio meets the floor.
pub fn reference_var(s: &ScenarioSet, spec: &ProblemSpec) -> f64 {
    plain(spec);
    let n = s.n();
    let k = k_of(spec, s.m());
    let mut planes: Vec<(Vec<f64>, f64)> = (0..n).map(|i| ((0..n).map(|c| f64::from(c == i)).collect(), 0.0)).collect();
    if spec.has_return_floor() {
        planes.push((s.mu().to_vec(), spec.mu0));
    }
    for (a, b) in (0..s.m()).tuple_combinations() {
        let d: Vec<f64> = s.scenario(a).iter().zip(s.scenario(b)).map(|(p, q)| p - q).collect();
        if d.iter().any(|v| v.abs() > 1e-12) {
            planes.push((d, 0.0));
        }
    }
    vertices(n, &planes)
        .into_iter()
        .filter(|x| feasible(s, spec, x))
        .map(|x| sorted_quantile(s, &x, k))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact maximum expected return with at most `k` scenario returns below
/// `threshold`; `-inf` if none qualifies. Ignores the return floor.
pub fn reference_max_return(s: &ScenarioSet, spec: &ProblemSpec, threshold: f64) -> f64 {
    plain(spec);
    let n = s.n();
    let k = k_of(spec, s.m());
    let mut planes: Vec<(Vec<f64>, f64)> = (0..n).map(|i| ((0..n).map(|c| f64::from(c == i)).collect(), 0.0)).collect();
    for j in 0..s.m() {
        planes.push((s.scenario(j).to_vec(), threshold));
    }
    vertices(n, &planes)
        .into_iter()
        .filter(|x| x.iter().all(|&v| v >= -FEAS_TOL))
        .filter(|x| sorted_quantile(s, x, k) >= threshold - FEAS_TOL)
        .map(|x| x.iter().zip(s.mu()).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}
