//! Lower-bound loop on 250 days of a ten-portfolio daily return file,
//! printing the per-iteration trace.

use varopt::io::{mu0_grid, parse_ff_daily, ColumnRef, FfOptions, RowRange};
use varopt::lower::{default_initial_set, lower_bound, LowerBoundOptions};
use varopt::solve::default_backend;
use varopt::ProblemSpec;

fn main() -> varopt::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ff_fixture.txt");
    let opts = FfOptions {
        columns: Some((0..10).map(ColumnRef::Index).collect()),
        rows: RowRange { take: Some(252), ..Default::default() },
        ..Default::default()
    };
    let data = parse_ff_daily(path, &opts)?;
    let s = data.scenarios;
    let spec = ProblemSpec::new(0.02, mu0_grid(&s, 6)[3]);
    println!("m = {}, n = {}, dropped {} rows, floor {:.4}", s.m(), s.n(), data.dropped_rows, spec.mu0);

    let j0 = default_initial_set(&s, &spec)?;
    let backend = default_backend();
    let lb = lower_bound(&s, &spec, &j0, backend.as_ref(), &LowerBoundOptions::default())?;
    print!("{}", lb.trace_csv()?);
    println!("lower bound {:.6} after {} iterations ({:?}), exceedance {:?}", lb.quantile, lb.trace.len(), lb.termination, lb.exceedance);
    Ok(())
}
