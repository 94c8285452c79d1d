//! Benchmark records and the two summary tables built from them.
//!
//! Table 1 compares lower-bound quality per `(n, m)` size: mean gap to the
//! optimum and mean time relative to the fastest method. Table 2 compares the
//! full MILP against the lower-bound-plus-certificate pipeline per instance.
//! Cells a method did not finish within its limit render as `*`; speed-up
//! ratios that cannot be formed render as `★`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const UNSOLVED: &str = "*";
pub const NO_RATIO: &str = "★";
/// Name of the comparison method in outputs.
pub const BASELINE_LABEL: &str = "cvar_lp_baseline";

/// Value and wall time of one method on one instance. `value` is `None`
/// when the method did not finish within its limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timed {
    pub value: Option<f64>,
    pub seconds: f64,
}

impl Timed {
    pub fn solved(value: f64, seconds: f64) -> Self {
        Timed { value: Some(value), seconds }
    }

    pub fn unsolved(seconds: f64) -> Self {
        Timed { value: None, seconds }
    }
}

/// One benchmark cell. All values are quantile levels (higher is better).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub mu0: f64,
    /// Full MILP.
    pub exact: Timed,
    /// Lower-bound loop.
    pub lower: Timed,
    /// Certificate phase; `None` if it did not run or ran out of time.
    pub certify_seconds: Option<f64>,
    pub proven: Option<bool>,
    /// Quantile of the CVaR LP portfolio.
    pub baseline: Option<Timed>,
}

impl BenchRecord {
    /// Time and value of the lower-bound-plus-certificate pipeline.
    pub fn pipeline(&self) -> Timed {
        let seconds = self.lower.seconds + self.certify_seconds.unwrap_or(0.0);
        match (self.lower.value, self.certify_seconds) {
            (Some(v), Some(_)) => Timed::solved(v, seconds),
            _ => Timed::unsolved(seconds),
        }
    }

    /// Optimum, or the best lower bound found when the MILP did not finish.
    pub fn reference(&self) -> Option<f64> {
        self.exact.value.or_else(|| {
            [Some(self.lower), self.baseline].iter().flatten().filter_map(|t| t.value).reduce(f64::max)
        })
    }
}

/// Relative gap in percent, `(z - v) / |z| * 100`.
pub fn gap_percent(reference: f64, value: f64) -> Option<f64> {
    if reference == value {
        Some(0.0)
    } else if reference == 0.0 {
        None
    } else {
        Some((reference - value) / reference.abs() * 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub gap: Option<f64>,
    pub time_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub n: usize,
    pub m: usize,
    pub mu0_min: f64,
    pub mu0_max: f64,
    pub methods: Vec<MethodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub n: usize,
    pub m: usize,
    pub mu0: f64,
    pub var_star: Option<f64>,
    pub t_star: Option<f64>,
    pub var: Option<f64>,
    pub t: Option<f64>,
    pub t_lower: f64,
    pub t_certify: Option<f64>,
    pub speed_up: Option<f64>,
    /// Rendering of the ratio cell when it is not a number.
    pub speed_up_mark: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tables {
    pub table1: Vec<Table1Row>,
    pub table2: Vec<Table2Row>,
    pub average_speed_up: Option<f64>,
    pub records: Vec<BenchRecord>,
}

fn mean(vals: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = vals.into_iter().fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn table1(records: &[BenchRecord]) -> Vec<Table1Row> {
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    for r in records {
        if !sizes.contains(&(r.n, r.m)) {
            sizes.push((r.n, r.m));
        }
    }
    let has_baseline = records.iter().any(|r| r.baseline.is_some());
    sizes
        .into_iter()
        .map(|(n, m)| {
            let group: Vec<&BenchRecord> = records.iter().filter(|r| (r.n, r.m) == (n, m)).collect();
            let mu0_min = group.iter().map(|r| r.mu0).fold(f64::INFINITY, f64::min);
            let mu0_max = group.iter().map(|r| r.mu0).fold(f64::NEG_INFINITY, f64::max);
            let mut methods = vec![summarize("lower_bound", &group, |r| Some(r.lower))];
            if has_baseline {
                methods.push(summarize(BASELINE_LABEL, &group, |r| r.baseline));
            }
            Table1Row { n, m, mu0_min, mu0_max, methods }
        })
        .collect()
}

fn summarize(name: &str, group: &[&BenchRecord], pick: impl Fn(&BenchRecord) -> Option<Timed>) -> MethodSummary {
    let gaps = group.iter().filter_map(|r| {
        let v = pick(r)?.value?;
        gap_percent(r.reference()?, v)
    });
    let ratios = group.iter().filter_map(|r| {
        let own = pick(r)?;
        own.value?;
        let fastest = [Some(r.lower), r.baseline]
            .iter()
            .flatten()
            .filter(|t| t.value.is_some())
            .map(|t| t.seconds)
            .fold(f64::INFINITY, f64::min);
        (fastest > 0.0).then(|| own.seconds / fastest)
    });
    MethodSummary { method: name.to_string(), gap: mean(gaps), time_ratio: mean(ratios) }
}

fn table2(records: &[BenchRecord]) -> Vec<Table2Row> {
    records
        .iter()
        .map(|r| {
            let p = r.pipeline();
            let (speed_up, mark) = match (r.exact.value, p.value) {
                (_, None) => (None, Some(UNSOLVED.to_string())),
                (None, Some(_)) => (None, Some(NO_RATIO.to_string())),
                (Some(_), Some(_)) if p.seconds > 0.0 => (Some(r.exact.seconds / p.seconds), None),
                _ => (None, Some(NO_RATIO.to_string())),
            };
            Table2Row {
                n: r.n,
                m: r.m,
                mu0: r.mu0,
                var_star: r.exact.value,
                t_star: r.exact.value.map(|_| r.exact.seconds),
                var: p.value,
                t: p.value.map(|_| p.seconds),
                t_lower: r.lower.seconds,
                t_certify: r.certify_seconds,
                speed_up,
                speed_up_mark: mark,
            }
        })
        .collect()
}

impl Tables {
    pub fn build(records: &[BenchRecord]) -> Self {
        let table2 = table2(records);
        let average_speed_up = mean(table2.iter().filter_map(|r| r.speed_up));
        Tables { table1: table1(records), table2, average_speed_up, records: records.to_vec() }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    fn method_names(&self) -> Vec<String> {
        self.table1.first().map(|r| r.methods.iter().map(|m| m.method.clone()).collect()).unwrap_or_else(|| {
            let mut v = vec!["lower_bound".to_string()];
            if self.records.iter().any(|r| r.baseline.is_some()) {
                v.push(BASELINE_LABEL.to_string());
            }
            v
        })
    }

    pub fn table1_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["n", "m", "mu0_min", "mu0_max"].map(String::from).to_vec();
        for name in self.method_names() {
            header.push(format!("{name}_gap_pct"));
            header.push(format!("{name}_t_over_tmin"));
        }
        w.write_record(&header)?;
        for r in &self.table1 {
            let mut rec = vec![r.n.to_string(), r.m.to_string(), num(r.mu0_min), num(r.mu0_max)];
            for s in &r.methods {
                rec.push(opt(s.gap, NO_RATIO));
                rec.push(opt(s.time_ratio, NO_RATIO));
            }
            w.write_record(&rec)?;
        }
        finish(w)
    }

    pub fn table2_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "m", "mu0", "var_star", "t_star", "var", "t", "t_lower", "t_certify", "t_star_over_t"])?;
        for r in &self.table2 {
            w.write_record([
                r.n.to_string(),
                r.m.to_string(),
                num(r.mu0),
                opt(r.var_star, UNSOLVED),
                opt(r.t_star, UNSOLVED),
                opt(r.var, UNSOLVED),
                opt(r.t, UNSOLVED),
                num(r.t_lower),
                opt(r.t_certify, UNSOLVED),
                ratio_cell(r, num),
            ])?;
        }
        if !self.table2.is_empty() {
            let avg = opt(self.average_speed_up, NO_RATIO);
            w.write_record(["Average Speed Up", "", "", "", "", "", "", "", "", avg.as_str()])?;
        }
        finish(w)
    }

    /// Fixed-width text rendering with table-style rounding.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let names = self.method_names();
        out.push_str(&format!("{:>4} {:>6} {:>8} {:>8}", "n", "m", "mu0_min", "mu0_max"));
        for name in &names {
            out.push_str(&format!(" | {:>18} {:>6} {:>6}", name, "gap", "T/T*"));
        }
        out.push('\n');
        for r in &self.table1 {
            out.push_str(&format!("{:>4} {:>6} {:>8.3} {:>8.3}", r.n, r.m, r.mu0_min, r.mu0_max));
            for s in &r.methods {
                let gap = s.gap.map_or(NO_RATIO.to_string(), |g| format!("{g:.2}"));
                let t = s.time_ratio.map_or(NO_RATIO.to_string(), |t| format!("{t:.1}"));
                out.push_str(&format!(" | {:>18} {:>6} {:>6}", "", gap, t));
            }
            out.push('\n');
        }
        out.push('\n');
        out.push_str(&format!(
            "{:>4} {:>6} {:>8} {:>9} {:>8} {:>9} {:>8} {:>7}\n",
            "n", "m", "mu0", "VaR*", "T*", "VaR", "T", "T*/T"
        ));
        for r in &self.table2 {
            let f3 = |v: Option<f64>| v.map_or(UNSOLVED.to_string(), |v| format!("{v:.3}"));
            let f1 = |v: Option<f64>| v.map_or(UNSOLVED.to_string(), |v| format!("{v:.1}"));
            let t = r.t.map_or(UNSOLVED.to_string(), |v| format!("{v:.2}"));
            out.push_str(&format!(
                "{:>4} {:>6} {:>8.3} {:>9} {:>8} {:>9} {:>8} {:>7}\n",
                r.n,
                r.m,
                r.mu0,
                f3(r.var_star),
                f1(r.t_star),
                f3(r.var),
                t,
                ratio_cell(r, |v| format!("{v:.1}"))
            ));
        }
        if !self.table2.is_empty() {
            let avg = self.average_speed_up.map_or(NO_RATIO.to_string(), |v| format!("{v:.2}"));
            out.push_str(&format!("Average Speed Up {avg:>52}\n"));
        }
        out
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>, missing: &str) -> String {
    v.map_or(missing.to_string(), num)
}

fn ratio_cell(r: &Table2Row, fmt: impl Fn(f64) -> String) -> String {
    match (r.speed_up, &r.speed_up_mark) {
        (Some(v), _) => fmt(v),
        (None, Some(mark)) => mark.clone(),
        (None, None) => NO_RATIO.to_string(),
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Writes the tables under `stem`: `<stem>.json`, or `<stem>_table1.csv` and
/// `<stem>_table2.csv`. Returns the written paths.
pub fn emit_results(records: &[BenchRecord], format: Format, stem: &Path) -> Result<Vec<PathBuf>> {
    let tables = Tables::build(records);
    let with_suffix = |suffix: &str| {
        let mut name = stem.file_name().map(|s| s.to_os_string()).unwrap_or_default();
        name.push(suffix);
        stem.with_file_name(name)
    };
    let written = match format {
        Format::Json => {
            let p = with_suffix(".json");
            std::fs::write(&p, tables.to_json()?)?;
            vec![p]
        }
        Format::Csv => {
            let p1 = with_suffix("_table1.csv");
            let p2 = with_suffix("_table2.csv");
            std::fs::write(&p1, tables.table1_csv()?)?;
            std::fs::write(&p2, tables.table2_csv()?)?;
            vec![p1, p2]
        }
    };
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mu0: f64, exact: Timed, lower: Timed, certify: Option<f64>) -> BenchRecord {
        BenchRecord { n: 30, m: 1000, mu0, exact, lower, certify_seconds: certify, proven: Some(true), baseline: None }
    }

    #[test]
    fn published_first_row_gives_ratio() {
        let r = row(0.058, Timed::solved(-2.554, 2.2), Timed::solved(-2.560, 1.78), Some(0.0));
        let t = Tables::build(&[r]);
        let speed = t.table2[0].speed_up.unwrap();
        assert_eq!(format!("{speed:.1}"), "1.2");
        assert!(t.render_text().contains(" 1.2\n"));
        assert!(t.table2_csv().unwrap().lines().nth(1).unwrap().ends_with(&num(2.2 / 1.78)));
        let gap = t.table1[0].methods[0].gap.unwrap();
        assert!((gap - 0.006 / 2.554 * 100.0).abs() < 1e-9);
    }

    #[test]
    fn timeouts_render_markers() {
        let milp_out = row(0.005, Timed::unsolved(3600.0), Timed::solved(-1.851, 600.0), Some(67.7));
        let both_out = row(0.043, Timed::unsolved(3600.0), Timed::solved(-1.9, 3000.0), None);
        let t = Tables::build(&[milp_out, both_out]);
        assert_eq!(t.table2[0].speed_up_mark.as_deref(), Some(NO_RATIO));
        assert_eq!(t.table2[1].speed_up_mark.as_deref(), Some(UNSOLVED));
        let csv = t.table2_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "30,1000,0.005,*,*,-1.851,667.7,600,67.7,★");
        assert_eq!(lines[2], "30,1000,0.043,*,*,*,*,3000,*,*");
        assert_eq!(lines[3], "Average Speed Up,,,,,,,,,★");
        // With no optimum the best lower bound stands in as the reference.
        assert_eq!(t.table1[0].methods[0].gap, Some(0.0));
    }

    #[test]
    fn empty_list_is_header_only() {
        let t = Tables::build(&[]);
        assert_eq!(t.table1_csv().unwrap(), "n,m,mu0_min,mu0_max,lower_bound_gap_pct,lower_bound_t_over_tmin\n");
        assert_eq!(t.table2_csv().unwrap(), "n,m,mu0,var_star,t_star,var,t,t_lower,t_certify,t_star_over_t\n");
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_results(&[], Format::Json, &dir.path().join("out")).unwrap();
        let back: Tables = serde_json::from_str(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn table1_groups_by_size_and_averages() {
        let mut a = row(0.01, Timed::solved(-2.0, 5.0), Timed::solved(-2.02, 1.0), Some(1.0));
        a.baseline = Some(Timed::solved(-2.2, 0.5));
        let mut b = row(0.03, Timed::solved(-1.0, 5.0), Timed::solved(-1.0, 2.0), Some(1.0));
        b.baseline = Some(Timed::solved(-1.1, 1.0));
        let mut c = b.clone();
        c.n = 50;
        let t = Tables::build(&[a, b, c]);
        assert_eq!(t.table1.len(), 2);
        let r = &t.table1[0];
        assert_eq!((r.mu0_min, r.mu0_max), (0.01, 0.03));
        assert!((r.methods[0].gap.unwrap() - 0.5).abs() < 1e-9);
        assert!((r.methods[0].time_ratio.unwrap() - 2.0).abs() < 1e-12);
        assert!((r.methods[1].gap.unwrap() - 10.0).abs() < 1e-9);
        assert_eq!(r.methods[1].time_ratio, Some(1.0));
        let csv = t.table1_csv().unwrap();
        assert!(csv.starts_with("n,m,mu0_min,mu0_max,lower_bound_gap_pct,lower_bound_t_over_tmin,cvar_lp_baseline_gap_pct"));
    }
}
