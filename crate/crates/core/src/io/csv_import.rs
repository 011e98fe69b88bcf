//! Import of crisp logs from `case,activity,timestamp` CSV files.

use std::collections::HashMap;
use std::io::Read;

use crate::io::format::Diagnostic;
use crate::model::{UncertainEvent, UncertainLog, UncertainTrace};
use crate::time::Time;

/// Result of a CSV import. Rows that could not be read are skipped and
/// reported in `diagnostics`.
#[derive(Clone, Debug, PartialEq)]
pub struct Imported {
    pub log: UncertainLog,
    pub diagnostics: Vec<Diagnostic>,
}

impl Imported {
    pub fn is_partial(&self) -> bool {
        !self.diagnostics.is_empty()
    }
}

/// Groups rows by case in order of first appearance. Event ids are `e1`,
/// `e2`, ... per case in file order. Fails only when the header is missing
/// a required column.
pub fn import_crisp<R: Read>(input: R) -> Result<Imported, Diagnostic> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Diagnostic::error(Some(1), "header", format!("unreadable header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Diagnostic::error(Some(1), "header", format!("missing column {name:?}")))
    };
    let (case_col, act_col, ts_col) = (column("case")?, column("activity")?, column("timestamp")?);

    let mut traces: Vec<UncertainTrace> = Vec::new();
    let mut by_case: HashMap<String, usize> = HashMap::new();
    let mut diagnostics = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let path = format!("row {}", i + 1);
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                diagnostics.push(Diagnostic::error(Some(line), path, format!("unreadable row: {e}")));
                continue;
            }
        };
        let (Some(case), Some(activity), Some(ts)) = (record.get(case_col), record.get(act_col), record.get(ts_col))
        else {
            diagnostics.push(Diagnostic::error(Some(line), path, "missing field"));
            continue;
        };
        let t: Time = match ts.parse() {
            Ok(t) => t,
            Err(e) => {
                diagnostics.push(Diagnostic::error(Some(line), path, format!("bad timestamp: {e}")));
                continue;
            }
        };
        if activity.is_empty() {
            diagnostics.push(Diagnostic::error(Some(line), path, "empty activity label"));
            continue;
        }
        let idx = *by_case.entry(case.to_string()).or_insert_with(|| {
            traces.push(UncertainTrace::new(case, Vec::new()));
            traces.len() - 1
        });
        let trace = &mut traces[idx];
        let id = format!("e{}", trace.events.len() + 1);
        trace.events.push(UncertainEvent::certain(id, t, activity));
    }
    Ok(Imported { log: UncertainLog::new(traces), diagnostics })
}
