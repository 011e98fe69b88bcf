//! Text, JSON and CSV reports.

use std::fmt::Write;

use serde::Serialize;

use crate::conformance::ConformanceBounds;
use crate::discovery::Udfg;
use crate::realizations::{sort_for_report, Realization};

#[derive(Serialize)]
struct RealizationReport<'a> {
    case_id: &'a str,
    count: usize,
    realizations: &'a [Realization],
}

/// Realizations sorted by descending probability, then by their steps.
pub fn realizations_json(case_id: &str, realizations: &[Realization]) -> String {
    let mut sorted = realizations.to_vec();
    sort_for_report(&mut sorted);
    let report = RealizationReport { case_id, count: sorted.len(), realizations: &sorted };
    serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
}

pub fn realizations_text(case_id: &str, realizations: &[Realization]) -> String {
    let mut sorted = realizations.to_vec();
    sort_for_report(&mut sorted);
    let mut out = format!("case {case_id}: {} realizations\n", sorted.len());
    for r in &sorted {
        let seq = r
            .steps
            .iter()
            .map(|s| format!("{}:{}", s.event_id, s.label))
            .collect::<Vec<_>>()
            .join(" ");
        match r.probability {
            Some(p) => writeln!(out, "{p:.6}\t<{seq}>").unwrap(),
            None => writeln!(out, "-\t<{seq}>").unwrap(),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub traces: Vec<ConformanceBounds>,
    pub mean_min_cost: f64,
    pub mean_max_cost: f64,
    /// Present when every trace has an expected cost.
    pub mean_expected_cost: Option<f64>,
}

impl ConformanceReport {
    pub fn new(traces: Vec<ConformanceBounds>) -> Self {
        let n = traces.len().max(1) as f64;
        let mean_min_cost = traces.iter().map(|b| b.min_cost as f64).sum::<f64>() / n;
        let mean_max_cost = traces.iter().map(|b| b.max_cost as f64).sum::<f64>() / n;
        let mean_expected_cost = traces
            .iter()
            .map(|b| b.expected_cost)
            .sum::<Option<f64>>()
            .filter(|_| !traces.is_empty())
            .map(|s| s / n);
        ConformanceReport { traces, mean_min_cost, mean_max_cost, mean_expected_cost }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("case\tmin\tmax\texpected\tbest\tworst\n");
        for b in &self.traces {
            let expected = b.expected_cost.map(|e| format!("{e:.6}")).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{}\t{}\t{}\t{expected}\t<{}>\t<{}>",
                b.case_id,
                b.min_cost,
                b.max_cost,
                b.witness_best.labels().join(","),
                b.witness_worst.labels().join(",")
            )
            .unwrap();
        }
        let expected = self.mean_expected_cost.map(|e| format!("{e:.6}")).unwrap_or_else(|| "-".into());
        writeln!(out, "mean\t{:.6}\t{:.6}\t{expected}", self.mean_min_cost, self.mean_max_cost).unwrap();
        out
    }
}

/// `kind,from,to,min,max,expected` rows; activities leave `to` empty.
pub fn udfg_csv(u: &Udfg) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "from", "to", "min", "max", "expected"]).expect("in-memory write");
    let exp = |e: Option<f64>| e.map(|e| e.to_string()).unwrap_or_default();
    for (a, b) in &u.activities {
        w.write_record(["activity", a, "", &b.min.to_string(), &b.max.to_string(), &exp(b.expected)])
            .expect("in-memory write");
    }
    for ((a, c), b) in &u.edges {
        w.write_record(["edge", a, c, &b.min.to_string(), &b.max.to_string(), &exp(b.expected)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
