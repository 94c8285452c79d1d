//! Return-floor grids for benchmark sweeps.

use crate::problem::ScenarioSet;

/// `k` evenly spaced floors strictly between the lowest and highest asset
/// mean return: `lo + i/(k+1) * (hi - lo)` for `i = 1..=k`.
pub fn mu0_grid(s: &ScenarioSet, k: usize) -> Vec<f64> {
    let lo = s.mu().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.mu().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1..=k).map(|i| lo + i as f64 / (k + 1) as f64 * (hi - lo)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn with_means(mu: &[f64]) -> ScenarioSet {
        ScenarioSet::new(vec![mu.to_vec()], vec![]).unwrap()
    }

    #[test]
    fn round_numbers() {
        let g = mu0_grid(&with_means(&[0.0, 0.7, 0.3]), 6);
        for (got, want) in g.iter().zip([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_and_single() {
        assert_eq!(mu0_grid(&with_means(&[0.25, 0.25]), 3), vec![0.25; 3]);
        assert_eq!(mu0_grid(&with_means(&[-1.0, 3.0]), 1), vec![1.0]);
    }
}
