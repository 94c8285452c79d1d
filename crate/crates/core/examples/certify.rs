//! Lower bound plus a near-optimality certificate on a synthetic instance,
//! with the certificate trace.

use varopt::certify::{certify, CertifyOptions};
use varopt::io::{factor_scenarios, mu0_grid};
use varopt::lower::{default_initial_set, lower_bound, LowerBoundOptions};
use varopt::solve::default_backend;
use varopt::ProblemSpec;

fn main() -> varopt::Result<()> {
    let s = factor_scenarios(8, 200, 11)?;
    let spec = ProblemSpec::new(0.05, mu0_grid(&s, 6)[2]);
    let backend = default_backend();

    let j0 = default_initial_set(&s, &spec)?;
    let lb = lower_bound(&s, &spec, &j0, backend.as_ref(), &LowerBoundOptions::default())?;
    let cert = certify(&s, &spec, &lb, backend.as_ref(), &CertifyOptions::default())?;

    print!("{}", cert.trace_csv()?);
    println!(
        "{:?}: optimum within [{:.5}, {:.5}] after {} relaxations, |I| = {}",
        cert.verdict, cert.lower, cert.upper, cert.iterations, cert.final_set_size
    );
    if let Some(reason) = cert.reason {
        println!("stopped: {reason:?}");
    }
    Ok(())
}
