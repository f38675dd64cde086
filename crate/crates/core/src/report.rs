//! Result files: the trial/aggregate CSV, its JSON twin, and the ratio table.

use std::fmt::Write as _;
use std::io::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{AggregateStats, SimMode, TrialResult};
use crate::protocol::ProtocolKind;

pub const TRIAL_HEADER: &str = "protocol,k,seed,run_index,mode,makespan_slots,ratio";
pub const AGGREGATE_HEADER: &str = "protocol,k,runs,mean_steps,mean_ratio,std_dev";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed results file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
struct TrialRow {
    protocol: ProtocolKind,
    k: u64,
    seed: u64,
    run_index: u64,
    mode: SimMode,
    makespan_slots: u64,
    ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<AggregateStats>,
}

fn section<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| ReportError::Format(e.to_string()))
}

/// Trial rows, a blank line, then the aggregate rows; each block has its own header.
pub fn to_csv(results: &Results) -> Result<String, ReportError> {
    let mut out = if results.trials.is_empty() {
        format!("{TRIAL_HEADER}\n")
    } else {
        section(results.trials.iter().map(|t| TrialRow {
            protocol: t.protocol,
            k: t.k,
            seed: t.seed,
            run_index: t.run_index,
            mode: t.mode,
            makespan_slots: t.makespan_slots,
            ratio: t.ratio(),
        }))?
    };
    out.push('\n');
    if results.aggregates.is_empty() {
        out.push_str(AGGREGATE_HEADER);
        out.push('\n');
    } else {
        out.push_str(&section(&results.aggregates)?);
    }
    Ok(out)
}

fn read_section<T: for<'de> Deserialize<'de>>(text: &str, header: &str) -> Result<Vec<T>, ReportError> {
    let first = text.lines().next().unwrap_or_default().trim_end();
    if first != header {
        return Err(ReportError::Format(format!(
            "expected header {header:?}, found {first:?}"
        )));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(ReportError::from)).collect()
}

/// Parses a file written by [`to_csv`]. A file holding only the trial block is accepted.
pub fn from_csv(text: &str) -> Result<Results, ReportError> {
    let text = text.trim_start();
    let (trial_part, agg_part) = match text.find(&format!("\n{AGGREGATE_HEADER}")) {
        Some(pos) => (&text[..pos + 1], Some(&text[pos + 1..])),
        None => (text, None),
    };
    let rows: Vec<TrialRow> = read_section(trial_part, TRIAL_HEADER)?;
    let trials = rows
        .into_iter()
        .map(|r| TrialResult {
            protocol: r.protocol,
            k: r.k,
            seed: r.seed,
            run_index: r.run_index,
            mode: r.mode,
            makespan_slots: r.makespan_slots,
        })
        .collect();
    let aggregates = match agg_part {
        Some(part) => read_section(part, AGGREGATE_HEADER)?,
        None => Vec::new(),
    };
    Ok(Results { trials, aggregates })
}

pub fn to_json(results: &Results) -> Result<String, ReportError> {
    let mut s = serde_json::to_string_pretty(results)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<Results, ReportError> {
    Ok(serde_json::from_str(text)?)
}

/// Mean ratios laid out with one row per protocol and one column per k.
pub fn ratio_table(aggregates: &[AggregateStats]) -> String {
    let mut ks: Vec<u64> = aggregates.iter().map(|a| a.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut out = String::new();
    let _ = write!(out, "{:<26}", "k");
    for k in &ks {
        let _ = write!(out, "{:>10}", k);
    }
    out.push('\n');
    for kind in ProtocolKind::ALL {
        if !aggregates.iter().any(|a| a.protocol == kind) {
            continue;
        }
        let _ = write!(out, "{:<26}", kind.display_name());
        for k in &ks {
            match aggregates.iter().find(|a| a.protocol == kind && a.k == *k) {
                Some(a) => {
                    let _ = write!(out, "{:>10.1}", a.mean_ratio);
                }
                None => {
                    let _ = write!(out, "{:>10}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomically(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::aggregate;

    fn sample() -> Results {
        let trials: Vec<TrialResult> = (0..3)
            .map(|i| TrialResult {
                protocol: ProtocolKind::Ebobo,
                k: 10,
                seed: 1000 + i,
                run_index: i,
                mode: SimMode::Fast,
                makespan_slots: 37 + i * 3,
            })
            .collect();
        let aggregates = aggregate(&trials);
        Results { trials, aggregates }
    }

    #[test]
    fn csv_layout() {
        let text = to_csv(&sample()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRIAL_HEADER);
        assert_eq!(lines[1], "ebobo,10,1000,0,fast,37,3.7");
        assert_eq!(lines[4], "");
        assert_eq!(lines[5], AGGREGATE_HEADER);
        assert!(lines[6].starts_with("ebobo,10,3,40.0,4.0,"));
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn csv_round_trip_reproduces_aggregates() {
        let r = sample();
        let parsed = from_csv(&to_csv(&r).unwrap()).unwrap();
        assert_eq!(parsed, r);
        assert_eq!(aggregate(&parsed.trials), parsed.aggregates);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(from_json(&to_json(&r).unwrap()).unwrap(), r);
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(from_csv("a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn table_layout() {
        let t = ratio_table(&sample().aggregates);
        assert!(t.contains("Exp Back-on/Back-off"));
        assert!(t.contains("4.0"));
        assert_eq!(t.lines().count(), 2);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomically(&path, "one").unwrap();
        write_atomically(&path, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
