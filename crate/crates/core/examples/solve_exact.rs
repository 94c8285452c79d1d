//! Exact optimum of a five-scenario, two-asset problem, three ways: the full
//! MILP on each backend and brute-force enumeration.

use varopt::model::build_full_milp;
use varopt::solve::oracle::oracle_var;
use varopt::solve::{backend_by_name, Limits};
use varopt::{ProblemSpec, ScenarioSet};

fn main() -> varopt::Result<()> {
    let s = ScenarioSet::new(
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
        vec!["BOND".into(), "STOCK".into()],
    )?;
    // One of five scenarios may fall below the quantile; mean return >= 0.5.
    let spec = ProblemSpec::new(0.2, 0.5);
    let model = build_full_milp(&s, &spec)?;
    println!("{} variables, {} rows, {} binaries", model.variables.len(), model.constraints.len(), model.num_binaries());

    for name in ["highs", "builtin"] {
        let Ok(backend) = backend_by_name(name) else { continue };
        let out = backend.solve(&model, &Limits::default())?;
        let x = out.portfolio(&model).expect("optimal point");
        println!("{name:>8}: {:?} quantile {:.6} weights {:?}", out.status, out.objective.unwrap(), x);
    }

    let o = oracle_var(&s, &spec)?;
    println!("enumerated {} exceedance sets: quantile {:.6}, exceedance {:?}", o.subsets, o.value, o.exceedance);
    Ok(())
}
