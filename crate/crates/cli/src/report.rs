//! Run reports and their JSON / CSV encodings.
//!
//! Floats are rounded to 15 significant digits before they enter a report,
//! so a report parsed back from JSON re-emits byte-identically. Counts are
//! decimal strings. Map keys are sorted.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.14e}").parse().expect("formatted float parses")
    } else {
        x
    }
}

/// A float as a report value; non-finite values become strings.
pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(round15(x)) {
        Some(n) => Value::Number(n),
        None => Value::String(x.to_string()),
    }
}

pub fn int(x: impl Into<u64>) -> Value {
    Value::from(x.into())
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}

pub fn list(xs: &[u64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::from(x)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Computed and reported; nothing asserted.
    Report,
    /// Input or budget refusal.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub key: String,
    pub check: String,
    pub statement: String,
    pub n: u64,
    pub set: String,
    pub params: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Value>,
    pub outcome: Outcome,
    pub tolerance: Option<f64>,
    pub slack: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub version: String,
    pub rng: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub reported: usize,
    pub errors: usize,
    /// Smallest count/bound ratio over records that carry one.
    pub min_ratio: Option<f64>,
    pub max_rudin_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provenance: Provenance,
    pub aggregate: Aggregate,
    pub records: Vec<Record>,
}

fn value_f64(v: Option<&Value>) -> Option<f64> {
    v.and_then(Value::as_f64)
}

impl RunReport {
    /// Sorts records by key and recomputes the aggregate.
    pub fn new(provenance: Provenance, mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.key.cmp(&b.key));
        let mut agg = Aggregate { records: records.len(), ..Aggregate::default() };
        for r in &records {
            match r.outcome {
                Outcome::Pass => agg.passed += 1,
                Outcome::Fail => agg.failed += 1,
                Outcome::Report => agg.reported += 1,
                Outcome::Error => agg.errors += 1,
            }
            if let Some(x) = value_f64(r.values.get("ratio")) {
                agg.min_ratio = Some(agg.min_ratio.map_or(x, |m| m.min(x)));
            }
            if let Some(x) = value_f64(r.values.get("rudin_constant")) {
                agg.max_rudin_constant = Some(agg.max_rudin_constant.map_or(x, |m| m.max(x)));
            }
        }
        RunReport { provenance, aggregate: agg, records }
    }

    /// 0 when every asserted check passes, 1 on any violation, 2 on refusals only.
    pub fn exit_code(&self) -> i32 {
        if self.aggregate.failed > 0 {
            1
        } else if self.aggregate.errors > 0 {
            2
        } else {
            0
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.outcome == Outcome::Fail)
    }
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(text)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn float_cell(x: Option<f64>) -> String {
    x.map(|x| num(x).to_string()).unwrap_or_default()
}

/// One row per record; `param.*` and `value.*` columns are the sorted union
/// over all records.
pub fn write_csv<W: Write>(report: &RunReport, out: W) -> csv::Result<()> {
    let mut params = BTreeSet::new();
    let mut values = BTreeSet::new();
    for r in &report.records {
        params.extend(r.params.keys().cloned());
        values.extend(r.values.keys().cloned());
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["key", "check", "n", "set", "outcome", "tolerance", "error", "slack", "statement"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(params.iter().map(|p| format!("param.{p}")));
    header.extend(values.iter().map(|v| format!("value.{v}")));
    w.write_record(&header)?;
    for r in &report.records {
        let outcome = serde_json::to_value(r.outcome).expect("outcome serializes");
        let mut row = vec![
            r.key.clone(),
            r.check.clone(),
            r.n.to_string(),
            r.set.clone(),
            cell(&outcome),
            float_cell(r.tolerance),
            r.error.clone().unwrap_or_default(),
            r.slack.join(";"),
            r.statement.clone(),
        ];
        row.extend(params.iter().map(|p| r.params.get(p).map(cell).unwrap_or_default()));
        row.extend(values.iter().map(|v| r.values.get(v).map(cell).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv(report: &RunReport) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}
