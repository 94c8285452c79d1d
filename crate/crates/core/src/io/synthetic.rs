//! Seeded synthetic scenario sets shaped like daily percent returns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::problem::ScenarioSet;

/// One-factor model: each asset loads on a common market draw plus its own
/// noise. Values are rounded to two decimals, as in published return files,
/// so ties occur at realistic rates. Same `(n, m, seed)` gives the same set.
pub fn factor_scenarios(n: usize, m: usize, seed: u64) -> Result<ScenarioSet> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("need n, m >= 1, got n = {n}, m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assets: Vec<(f64, f64, Normal<f64>)> = (0..n)
        .map(|_| {
            let drift = rng.gen_range(-0.02..0.08);
            let load = rng.gen_range(0.6..1.4);
            let sd = rng.gen_range(0.4..1.6);
            (drift, load, Normal::new(0.0, sd).expect("positive sd"))
        })
        .collect();
    let market = Normal::new(0.0, 1.0).expect("unit normal");
    let rows = (0..m)
        .map(|_| {
            let f = market.sample(&mut rng);
            assets
                .iter()
                .map(|(drift, load, noise)| ((drift + load * f + noise.sample(&mut rng)) * 100.0).round() / 100.0)
                .collect()
        })
        .collect();
    ScenarioSet::new(rows, (1..=n).map(|i| format!("S{i}")).collect())
}
