//! Scenario-based Value-at-Risk portfolio optimization.
//!
//! The sampled quantile of portfolio returns is maximized exactly with a
//! big-M MILP, approximated from below by a dual-guided restriction
//! heuristic, and certified near-optimal with a growing relaxation of the
//! max-return formulation.
//!
//! ```
//! use varopt::{ProblemSpec, ScenarioSet};
//! use varopt::lower::{lower_bound, LowerBoundOptions};
//!
//! let s = ScenarioSet::new(
//!     vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
//!     vec![],
//! )
//! .unwrap();
//! let spec = ProblemSpec::new(0.2, 0.5);
//! let backend = varopt::solve::default_backend();
//! let lb = lower_bound(&s, &spec, &[0, 1], backend.as_ref(), &LowerBoundOptions::default()).unwrap();
//! assert!((lb.quantile - 0.5).abs() < 1e-7);
//! ```

pub mod certify;
pub mod cli;
pub mod error;
pub mod frontier;
pub mod io;
pub mod lower;
pub mod model;
pub mod problem;
pub mod solve;

pub use error::{Error, Result};
pub use problem::{
    big_m, lowest_k, order_statistic, portfolio_quantile, validate_instance, LinearRow, Portfolio, ProblemSpec,
    QuantileIndex, ScenarioSet, ValidationReport,
};
