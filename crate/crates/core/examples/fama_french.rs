//! Reads a Fama-French daily file, selects assets by label and a date
//! window, and writes the result as a self-contained instance file.

use varopt::io::{parse_ff_daily, ColumnRef, FfOptions, InstanceFile, MissingPolicy, RowRange};
use varopt::ProblemSpec;

fn main() -> varopt::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/ff_fixture.txt");
    let labels = ["ME1BM1", "ME1BM4", "ME5BM5", "ME10BM1", "ME10BM10"];
    let opts = FfOptions {
        columns: Some(labels.iter().map(|l| ColumnRef::Label(l.to_string())).collect()),
        rows: RowRange { from_date: Some(20190201), to_date: Some(20191231), ..Default::default() },
        missing: MissingPolicy::DropRows,
        ..Default::default()
    };
    let data = parse_ff_daily(path, &opts)?;
    let s = &data.scenarios;
    println!("{} sections in file; kept {} days x {} assets, dropped {} rows", data.sections, s.m(), s.n(), data.dropped_rows);
    for (label, mu) in s.labels().iter().zip(s.mu()) {
        println!("  {label:>9}: mean daily return {mu:+.4}%");
    }

    let out = std::env::temp_dir().join("varopt_ff_instance.json");
    InstanceFile::inline(s, &ProblemSpec::new(0.01, 0.03)).save(&out)?;
    let reloaded = InstanceFile::open(&out)?;
    println!("wrote {} ({} bytes); reload identical: {}", out.display(), std::fs::metadata(&out)?.len(), &reloaded.scenarios == s);
    Ok(())
}
