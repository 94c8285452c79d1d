//! Small benchmark sweep: for two synthetic sizes and three return floors,
//! full MILP against lower bound plus certificate, with the CVaR LP as the
//! comparison lower bound. Prints both summary tables.

use varopt::cli::{cmd_bench, Command, RunConfig};

fn main() -> varopt::Result<()> {
    let cfg = RunConfig {
        command: Command::Bench,
        ns: vec![5],
        ms: vec![100, 150],
        alpha: Some(0.03),
        grid_k: 3,
        time_limit: 60.0,
        seed: 3,
        ..Default::default()
    };
    let result = cmd_bench(&cfg)?;
    print!("{}", result.tables.render_text());
    print!("{}", result.tables.table2_csv()?);
    Ok(())
}
