//! Reader for Fama-French daily return files.
//!
//! The text layout is a free-form header followed by one or more blocks of
//! rows `YYYYMMDD v1 v2 ...` (whitespace or comma separated), with values in
//! percent. Any line whose first token is not an 8-digit date counts as
//! non-data; a run of consecutive data lines forms one section. Section
//! boundaries and header lengths vary between file vintages, so this is a
//! pattern-based heuristic rather than a fixed line count.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ScenarioSet;

/// Values at or below this are missing-data codes (`-99.99`, `-999`).
pub const MISSING_SENTINEL: f64 = -99.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop every scenario with a missing value in a selected column.
    #[default]
    DropRows,
    /// Drop every selected column with a missing value anywhere in range.
    DropColumns,
}

/// Which raw rows of the section to keep. The date window applies first,
/// then `skip` and `take`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RowRange {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_date: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_date: Option<u32>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub skip: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub take: Option<usize>,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FfOptions {
    /// Columns to keep; `None` keeps all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<ColumnRef>>,
    #[serde(default)]
    pub rows: RowRange,
    /// 0-based data section (the first block is usually value-weighted returns).
    #[serde(default)]
    pub section: usize,
    #[serde(default)]
    pub missing: MissingPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfData {
    pub scenarios: ScenarioSet,
    /// Date of each kept scenario.
    pub dates: Vec<u32>,
    pub dropped_rows: usize,
    pub dropped_columns: Vec<String>,
    /// Data sections found in the file.
    pub sections: usize,
}

struct Section {
    labels: Option<Vec<String>>,
    /// (line number, date, values)
    rows: Vec<(usize, u32, Vec<f64>)>,
}

fn tokens(line: &str) -> Vec<&str> {
    line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect()
}

fn is_date(tok: &str) -> bool {
    tok.len() == 8 && tok.bytes().all(|b| b.is_ascii_digit())
}

fn split_sections(text: &str, path: &Path) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    let mut current: Option<Section> = None;
    let mut last_text: Option<Vec<String>> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = tokens(line);
        let Some(first) = toks.first() else { continue };
        if !is_date(first) {
            if let Some(sec) = current.take() {
                sections.push(sec);
            }
            last_text = Some(toks.iter().map(|t| t.to_string()).collect());
            continue;
        }
        let date: u32 = first.parse().expect("8 ascii digits");
        let values = toks[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: format!("value {t:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::Parse { path: path.to_path_buf(), line: lineno, msg: "date with no values".into() });
        }
        let sec = current.get_or_insert_with(|| Section {
            labels: last_text.take().filter(|l| l.len() == values.len()),
            rows: Vec::new(),
        });
        if let Some((_, _, prev)) = sec.rows.first() {
            if prev.len() != values.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    msg: format!("expected {} values, found {}", prev.len(), values.len()),
                });
            }
        }
        sec.rows.push((lineno, date, values));
    }
    if let Some(sec) = current {
        sections.push(sec);
    }
    Ok(sections)
}

/// Parses file contents; `path` is used in error messages only.
pub fn parse_ff_str(text: &str, path: &Path, opts: &FfOptions) -> Result<FfData> {
    let sections = split_sections(text, path)?;
    let count = sections.len();
    let Some(section) = sections.into_iter().nth(opts.section) else {
        return Err(Error::EmptySelection(format!("section {} requested, file has {count}", opts.section)));
    };
    let width = section.rows[0].2.len();
    let labels: Vec<String> =
        section.labels.clone().unwrap_or_else(|| (1..=width).map(|i| format!("C{i}")).collect());

    let columns: Vec<usize> = match &opts.columns {
        None => (0..width).collect(),
        Some(refs) => refs
            .iter()
            .map(|r| match r {
                ColumnRef::Index(i) if *i < width => Ok(*i),
                ColumnRef::Index(i) => Err(Error::InvalidInput(format!("column {i} out of range, file has {width}"))),
                ColumnRef::Label(l) => labels
                    .iter()
                    .position(|x| x == l)
                    .ok_or_else(|| Error::InvalidInput(format!("no column labelled {l:?}"))),
            })
            .collect::<Result<_>>()?,
    };
    if columns.is_empty() {
        return Err(Error::EmptySelection("no columns selected".into()));
    }

    let r = &opts.rows;
    let in_window = |d: u32| r.from_date.is_none_or(|f| d >= f) && r.to_date.is_none_or(|t| d <= t);
    let raw: Vec<&(usize, u32, Vec<f64>)> = section
        .rows
        .iter()
        .filter(|(_, d, _)| in_window(*d))
        .skip(r.skip)
        .take(r.take.unwrap_or(usize::MAX))
        .collect();

    let missing = |v: f64| v <= MISSING_SENTINEL;
    let (columns, dropped_columns) = match opts.missing {
        MissingPolicy::DropRows => (columns, Vec::new()),
        MissingPolicy::DropColumns => {
            let (keep, drop): (Vec<usize>, Vec<usize>) =
                columns.into_iter().partition(|&c| raw.iter().all(|(_, _, v)| !missing(v[c])));
            (keep, drop.into_iter().map(|c| labels[c].clone()).collect())
        }
    };
    if columns.is_empty() {
        return Err(Error::EmptySelection("every selected column has missing values".into()));
    }

    let mut dates = Vec::new();
    let mut rows = Vec::new();
    let mut dropped_rows = 0;
    for (_, d, v) in raw {
        let picked: Vec<f64> = columns.iter().map(|&c| v[c]).collect();
        if picked.iter().any(|&x| missing(x)) {
            dropped_rows += 1;
            continue;
        }
        dates.push(*d);
        rows.push(picked);
    }
    if rows.is_empty() {
        return Err(Error::EmptySelection("no scenarios left after row selection".into()));
    }
    let scenarios = ScenarioSet::new(rows, columns.iter().map(|&c| labels[c].clone()).collect())?;
    Ok(FfData { scenarios, dates, dropped_rows, dropped_columns, sections: count })
}

/// Reads and parses a Fama-French daily file.
pub fn parse_ff_daily(path: impl AsRef<Path>, opts: &FfOptions) -> Result<FfData> {
    let path: PathBuf = path.as_ref().to_path_buf();
    let text = std::fs::read_to_string(&path)?;
    parse_ff_str(&text, &path, opts)
}
