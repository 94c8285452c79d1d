//! Inspecting models: the restricted MILP in CPLEX LP format, and the
//! shadow prices of the fixed-indicator LP that decide which scenarios
//! join the working set.

use varopt::model::{build_fixed_y_lp, build_restricted_milp, RowTag};
use varopt::solve::{default_backend, Limits};
use varopt::{ProblemSpec, ScenarioSet};

fn main() -> varopt::Result<()> {
    let s = ScenarioSet::new(
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
        vec![],
    )?;
    let spec = ProblemSpec::new(0.2, 0.5);
    let restricted = build_restricted_milp(&s, &spec, &[0, 1])?;
    print!("{}", restricted.to_lp_string());

    let y = [false, false, true, false, false];
    let lp = build_fixed_y_lp(&s, &spec, &y)?;
    let out = default_backend().solve_lp(&lp, &Limits::default())?;
    println!("fixed-indicator LP: {:?}, value {:.4}", out.status, out.objective.unwrap_or(f64::NAN));
    for j in 0..s.m() {
        println!("  scenario {j}: shadow price {:.4}", out.dual(RowTag::BigM(j)).unwrap_or(0.0));
    }
    Ok(())
}
