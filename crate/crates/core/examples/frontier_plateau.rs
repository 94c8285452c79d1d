//! Risk/reward frontier of a two-asset instance whose VaR curve is flat over
//! a range of reward floors, and the check that composing the two frontier
//! maps fails exactly there. The CVaR frontier of the same data is flat only
//! below the reward of its least-risk portfolio and composes cleanly above it.

use varopt::frontier::{beta_curve, duality_check, linspace, plateau_instance, CvarFrontier, VarFrontier, PLATEAU_TOL};
use varopt::solve::{default_backend, Limits};

fn main() -> varopt::Result<()> {
    let (s, spec) = plateau_instance();
    let backend = default_backend();
    let grid = linspace(0.25, 0.75, 21);

    let var = VarFrontier { scenarios: &s, spec: spec.clone(), backend: backend.as_ref(), limits: Limits::default() };
    let curve = beta_curve(&var, &grid);
    let report = duality_check(&var, &curve, PLATEAU_TOL);
    println!("VaR frontier (min risk per reward floor):");
    for r in &report.rows {
        let mark = if r.equal { "" } else { "  <- composition overshoots" };
        println!("  a = {:.3}  risk {:.4}  alpha(beta(a)) = {:.4}{mark}", r.a, r.beta, r.composed);
    }
    for p in &curve.plateaus {
        println!("plateau at risk {:.4} over rewards [{:.3}, {:.3}]", p.value, p.start, p.end);
    }
    println!("consistent with plateaus: {}", report.consistent);

    let cvar = CvarFrontier { scenarios: &s, spec, backend: backend.as_ref(), limits: Limits::default() };
    let curve = beta_curve(&cvar, &grid);
    let report = duality_check(&cvar, &curve, PLATEAU_TOL);
    let above = report.rows.iter().filter(|r| !r.on_plateau);
    let (total, equal) = above.fold((0, 0), |(t, e), r| (t + 1, e + usize::from(r.equal)));
    println!("CVaR frontier: {} plateaus; off them, a = alpha(beta(a)) at {equal} of {total} levels", curve.plateaus.len());
    Ok(())
}
