//! The `uel-1` log document.
//!
//! ```json
//! {
//!   "version": "uel-1",
//!   "attributes": { "source": "ward 3" },
//!   "traces": [
//!     { "case_id": "ID192-1", "events": [
//!       { "id": "e1", "timestamp": 5, "activity": "NightSweats", "indeterminate": true },
//!       { "id": "e2", "timestamp": 8, "activity": ["PrTP", "SecTP"] },
//!       { "id": "e3", "timestamp": { "interval": [4, 10] }, "activity": "Splenomeg" }
//!     ] }
//!   ]
//! }
//! ```
//!
//! `timestamp` is a number, `{"interval":[lo,hi]}`, `{"normal":{"mu":m,"sigma":s}}`
//! or `{"uniform":[lo,hi]}`. `activity` is a label, a list of labels, or an
//! object mapping labels to probabilities. `indeterminate` is absent, `true`,
//! or the probability that the event did not happen.
//!
//! Timestamps are read as exact decimals. Singleton label lists, single-entry
//! distributions with probability 1 and `indeterminate: 0` are normalized to
//! their certain forms; events with `indeterminate: 1` are dropped with a
//! warning.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::model::{
    event_violations, ActivityInfo, Density, Field, IndeterminacyInfo, TimestampInfo,
    UncertainEvent, UncertainLog, UncertainTrace,
};
use crate::time::Time;

pub const FORMAT_VERSION: &str = "uel-1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A located problem in an input document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based line, when known.
    pub line: Option<usize>,
    /// JSON pointer (or `row N` for CSV input).
    pub path: String,
    pub rule: String,
}

impl Diagnostic {
    pub fn error(line: Option<usize>, path: impl Into<String>, rule: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, line, path: path.into(), rule: rule.into() }
    }

    pub fn warning(line: Option<usize>, path: impl Into<String>, rule: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, line, path: path.into(), rule: rule.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.line {
            Some(l) => write!(f, "{sev}: line {l}: {}: {}", self.path, self.rule),
            None => write!(f, "{sev}: {}: {}", self.path, self.rule),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub log: UncertainLog,
    pub warnings: Vec<Diagnostic>,
}

/// Parses a `uel-1` document. On failure every diagnostic found is returned,
/// warnings included.
pub fn parse(text: &str) -> Result<Parsed, Vec<Diagnostic>> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic::error(Some(e.line()), "", format!("malformed JSON: {e}"))]
    })?;
    let lines = value_lines(text);
    let mut p = Parser { lines: &lines, diags: Vec::new() };
    let log = p.document(&root);
    let has_errors = p.diags.iter().any(|d| d.severity == Severity::Error);
    match log {
        Some(log) if !has_errors => Ok(Parsed { log, warnings: p.diags }),
        _ => Err(p.diags),
    }
}

struct Parser<'a> {
    lines: &'a HashMap<String, usize>,
    diags: Vec<Diagnostic>,
}

fn child(path: &str, key: &str) -> String {
    format!("{path}/{}", key.replace('~', "~0").replace('/', "~1"))
}

impl Parser<'_> {
    fn line_of(&self, path: &str) -> Option<usize> {
        let mut p = path;
        loop {
            if let Some(&l) = self.lines.get(p) {
                return Some(l);
            }
            p = &p[..p.rfind('/')?];
        }
    }

    fn error(&mut self, path: &str, rule: impl Into<String>) {
        self.diags.push(Diagnostic::error(self.line_of(path), path, rule));
    }

    fn warning(&mut self, path: &str, rule: impl Into<String>) {
        self.diags.push(Diagnostic::warning(self.line_of(path), path, rule));
    }

    fn document(&mut self, root: &Value) -> Option<UncertainLog> {
        let Some(obj) = root.as_object() else {
            self.error("", "document must be an object");
            return None;
        };
        match obj.get("version") {
            Some(Value::String(v)) if v == FORMAT_VERSION => {}
            Some(Value::String(v)) => {
                self.error("/version", format!("unknown version {v:?}"));
                return None;
            }
            _ => {
                self.error("/version", format!("missing version (expected {FORMAT_VERSION:?})"));
                return None;
            }
        }
        for key in obj.keys() {
            if !["version", "attributes", "traces"].contains(&key.as_str()) {
                self.warning(&child("", key), "unknown field ignored");
            }
        }
        let mut log = UncertainLog::default();
        match obj.get("attributes") {
            None => {}
            Some(Value::Object(attrs)) => {
                for (k, v) in attrs {
                    match v {
                        Value::String(s) => {
                            log.attributes.insert(k.clone(), s.clone());
                        }
                        _ => self.error(&child("/attributes", k), "attribute values must be strings"),
                    }
                }
            }
            Some(_) => self.error("/attributes", "attributes must be an object"),
        }
        let Some(traces) = obj.get("traces").and_then(Value::as_array) else {
            self.error("/traces", "traces must be an array");
            return None;
        };
        let mut cases = HashSet::new();
        for (i, t) in traces.iter().enumerate() {
            let path = format!("/traces/{i}");
            if let Some(trace) = self.trace(&path, t) {
                if !cases.insert(trace.case_id.clone()) {
                    self.error(&format!("{path}/case_id"), "duplicate case id");
                }
                log.traces.push(trace);
            }
        }
        Some(log)
    }

    fn trace(&mut self, path: &str, value: &Value) -> Option<UncertainTrace> {
        let Some(obj) = value.as_object() else {
            self.error(path, "trace must be an object");
            return None;
        };
        for key in obj.keys() {
            if !["case_id", "events"].contains(&key.as_str()) {
                self.warning(&child(path, key), "unknown field ignored");
            }
        }
        let case_id = match obj.get("case_id") {
            Some(Value::String(s)) => s.clone(),
            _ => {
                self.error(&child(path, "case_id"), "case_id must be a string");
                return None;
            }
        };
        let Some(events) = obj.get("events").and_then(Value::as_array) else {
            self.error(&child(path, "events"), "events must be an array");
            return None;
        };
        let mut trace = UncertainTrace::new(case_id, Vec::new());
        let mut ids = HashSet::new();
        for (j, e) in events.iter().enumerate() {
            let epath = format!("{path}/events/{j}");
            if let Some(ev) = self.event(&epath, e) {
                if !ids.insert(ev.id.clone()) {
                    self.error(&child(&epath, "id"), "duplicate event id");
                }
                trace.events.push(ev);
            }
        }
        Some(trace)
    }

    fn event(&mut self, path: &str, value: &Value) -> Option<UncertainEvent> {
        let Some(obj) = value.as_object() else {
            self.error(path, "event must be an object");
            return None;
        };
        for key in obj.keys() {
            if !["id", "timestamp", "activity", "indeterminate"].contains(&key.as_str()) {
                self.warning(&child(path, key), "unknown field ignored");
            }
        }
        let before = self.diags.len();
        let id = match obj.get("id") {
            Some(Value::String(s)) => Some(s.clone()),
            _ => {
                self.error(&child(path, "id"), "id must be a string");
                None
            }
        };
        let timestamp = match obj.get("timestamp") {
            Some(v) => self.timestamp(&child(path, "timestamp"), v),
            None => {
                self.error(&child(path, "timestamp"), "missing timestamp");
                None
            }
        };
        let activity = match obj.get("activity") {
            Some(v) => self.activity(&child(path, "activity"), v),
            None => {
                self.error(&child(path, "activity"), "missing activity");
                None
            }
        };
        let ipath = child(path, "indeterminate");
        let indeterminacy = match obj.get("indeterminate") {
            None | Some(Value::Bool(false)) => Some(IndeterminacyInfo::Determinate),
            Some(Value::Bool(true)) => Some(IndeterminacyInfo::Indeterminate),
            Some(Value::Number(n)) => {
                let p = n.as_f64().unwrap_or(f64::NAN);
                if p == 1.0 {
                    self.warning(path, "event dropped: indeterminate probability 1 means it never happened");
                    return None;
                }
                Some(IndeterminacyInfo::Probable { p_absent: p }.normalized())
            }
            Some(_) => {
                self.error(&ipath, "indeterminate must be true or a probability");
                None
            }
        };
        let (Some(id), Some(timestamp), Some(activity), Some(indeterminacy)) =
            (id, timestamp, activity, indeterminacy)
        else {
            return None;
        };
        let ev = UncertainEvent { id, timestamp, activity: activity.normalized(), indeterminacy };
        for (field, rule) in event_violations(&ev) {
            let key = match field {
                Field::Timestamp => "timestamp",
                Field::Activity => "activity",
                Field::Indeterminacy => "indeterminate",
                Field::Id | Field::Case => "id",
            };
            self.error(&child(path, key), rule);
        }
        (self.diags[before..].iter().all(|d| d.severity != Severity::Error)).then_some(ev)
    }

    fn time(&mut self, path: &str, value: &Value) -> Option<Time> {
        match value {
            Value::Number(n) => match n.to_string().parse::<Time>() {
                Ok(t) => Some(t),
                Err(e) => {
                    self.error(path, e.to_string());
                    None
                }
            },
            _ => {
                self.error(path, "time must be a number");
                None
            }
        }
    }

    fn pair(&mut self, path: &str, value: &Value) -> Option<(Time, Time)> {
        match value.as_array().map(Vec::as_slice) {
            Some([lo, hi]) => {
                let lo = self.time(&format!("{path}/0"), lo);
                let hi = self.time(&format!("{path}/1"), hi);
                lo.zip(hi)
            }
            _ => {
                self.error(path, "expected [lo, hi]");
                None
            }
        }
    }

    fn timestamp(&mut self, path: &str, value: &Value) -> Option<TimestampInfo> {
        if let Value::Number(_) = value {
            return self.time(path, value).map(TimestampInfo::Certain);
        }
        let obj = match value.as_object() {
            Some(o) if o.len() == 1 => o,
            _ => {
                self.error(path, "timestamp must be a number or one of interval/normal/uniform");
                return None;
            }
        };
        let (kind, body) = obj.iter().next().expect("one entry");
        let bpath = child(path, kind);
        match kind.as_str() {
            "interval" => self
                .pair(&bpath, body)
                .map(|(lo, hi)| TimestampInfo::Interval { lo, hi }),
            "uniform" => self
                .pair(&bpath, body)
                .map(|(lo, hi)| TimestampInfo::Density(Density::Uniform { lo, hi })),
            "normal" => {
                let Some(params) = body.as_object() else {
                    self.error(&bpath, "normal needs mu and sigma");
                    return None;
                };
                let mu = match params.get("mu") {
                    Some(v) => self.time(&child(&bpath, "mu"), v),
                    None => {
                        self.error(&child(&bpath, "mu"), "missing mu");
                        None
                    }
                };
                let sigma = match params.get("sigma").and_then(Value::as_f64) {
                    Some(s) => Some(s),
                    None => {
                        self.error(&child(&bpath, "sigma"), "sigma must be a number");
                        None
                    }
                };
                Some(TimestampInfo::Density(Density::Normal { mu: mu?, sigma: sigma? }))
            }
            other => {
                self.error(path, format!("unknown timestamp kind {other:?}"));
                None
            }
        }
    }

    fn activity(&mut self, path: &str, value: &Value) -> Option<ActivityInfo> {
        let label_ok = |p: &mut Self, at: &str, l: &str| {
            if l.is_empty() {
                p.error(at, "empty activity label");
                false
            } else {
                true
            }
        };
        match value {
            Value::String(s) => label_ok(self, path, s).then(|| ActivityInfo::Certain(s.clone())),
            Value::Array(items) => {
                let mut set = BTreeSet::new();
                let mut ok = !items.is_empty();
                if items.is_empty() {
                    self.error(path, "label set must not be empty");
                }
                for (i, item) in items.iter().enumerate() {
                    let ipath = format!("{path}/{i}");
                    match item {
                        Value::String(s) if label_ok(self, &ipath, s) => {
                            if !set.insert(s.clone()) {
                                self.error(&ipath, "duplicate label in set");
                                ok = false;
                            }
                        }
                        Value::String(_) => ok = false,
                        _ => {
                            self.error(&ipath, "labels must be strings");
                            ok = false;
                        }
                    }
                }
                ok.then_some(ActivityInfo::Set(set))
            }
            Value::Object(entries) => {
                let mut pmf = BTreeMap::new();
                let mut ok = true;
                for (label, p) in entries {
                    let epath = child(path, label);
                    ok &= label_ok(self, &epath, label);
                    match p.as_f64() {
                        Some(p) => {
                            pmf.insert(label.clone(), p);
                        }
                        None => {
                            self.error(&epath, "probability must be a number");
                            ok = false;
                        }
                    }
                }
                ok.then_some(ActivityInfo::Pmf(pmf))
            }
            _ => {
                self.error(path, "activity must be a label, a list of labels, or a distribution");
                None
            }
        }
    }
}

/// JSON pointer of every value in `text`, mapped to the line it starts on.
/// Only meaningful for syntactically valid JSON.
fn value_lines(text: &str) -> HashMap<String, usize> {
    enum Frame {
        Object { path: String, key: Option<String> },
        Array { path: String, index: usize },
    }
    fn value_path(stack: &[Frame]) -> String {
        match stack.last() {
            None => String::new(),
            Some(Frame::Object { path, key }) => child(path, key.as_deref().unwrap_or("")),
            Some(Frame::Array { path, index }) => format!("{path}/{index}"),
        }
    }
    let bytes = text.as_bytes();
    let mut out = HashMap::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\n' => line += 1,
            b' ' | b'\t' | b'\r' | b':' => {}
            b',' => match stack.last_mut() {
                Some(Frame::Array { index, .. }) => *index += 1,
                Some(Frame::Object { key, .. }) => *key = None,
                None => {}
            },
            b'{' => {
                let path = value_path(&stack);
                out.insert(path.clone(), line);
                stack.push(Frame::Object { path, key: None });
            }
            b'[' => {
                let path = value_path(&stack);
                out.insert(path.clone(), line);
                stack.push(Frame::Array { path, index: 0 });
            }
            b'}' | b']' => {
                stack.pop();
            }
            b'"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                let raw = &text[start..=i.min(text.len() - 1)];
                match stack.last_mut() {
                    Some(Frame::Object { key: key @ None, .. }) => {
                        *key = Some(serde_json::from_str(raw).unwrap_or_default());
                    }
                    _ => {
                        out.insert(value_path(&stack), line);
                    }
                }
            }
            _ => {
                out.insert(value_path(&stack), line);
                while i + 1 < bytes.len() && !b",}] \t\r\n".contains(&bytes[i + 1]) {
                    i += 1;
                }
            }
        }
        i += 1;
    }
    out
}

fn time_value(t: Time) -> Value {
    Value::Number(t.to_string().parse::<Number>().expect("decimal literal"))
}

fn real_value(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn event_value(ev: &UncertainEvent) -> Value {
    let mut obj = Map::new();
    obj.insert("id".into(), Value::String(ev.id.clone()));
    let ts = match ev.timestamp {
        TimestampInfo::Certain(t) => time_value(t),
        TimestampInfo::Interval { lo, hi } => {
            serde_json::json!({ "interval": [time_value(lo), time_value(hi)] })
        }
        TimestampInfo::Density(Density::Normal { mu, sigma }) => {
            serde_json::json!({ "normal": { "mu": time_value(mu), "sigma": real_value(sigma) } })
        }
        TimestampInfo::Density(Density::Uniform { lo, hi }) => {
            serde_json::json!({ "uniform": [time_value(lo), time_value(hi)] })
        }
    };
    obj.insert("timestamp".into(), ts);
    let act = match &ev.activity {
        ActivityInfo::Certain(l) => Value::String(l.clone()),
        ActivityInfo::Set(s) => Value::Array(s.iter().cloned().map(Value::String).collect()),
        ActivityInfo::Pmf(m) => Value::Object(m.iter().map(|(k, &p)| (k.clone(), real_value(p))).collect()),
    };
    obj.insert("activity".into(), act);
    match ev.indeterminacy {
        IndeterminacyInfo::Determinate => {}
        IndeterminacyInfo::Indeterminate => {
            obj.insert("indeterminate".into(), Value::Bool(true));
        }
        IndeterminacyInfo::Probable { p_absent } => {
            obj.insert("indeterminate".into(), real_value(p_absent));
        }
    }
    Value::Object(obj)
}

/// Canonical `uel-1` text: two-space indentation, trailing newline.
pub fn serialize(log: &UncertainLog) -> String {
    let mut root = Map::new();
    root.insert("version".into(), Value::String(FORMAT_VERSION.into()));
    if !log.attributes.is_empty() {
        root.insert(
            "attributes".into(),
            Value::Object(log.attributes.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()),
        );
    }
    let traces = log
        .traces
        .iter()
        .map(|t| {
            let mut obj = Map::new();
            obj.insert("case_id".into(), Value::String(t.case_id.clone()));
            obj.insert("events".into(), Value::Array(t.events.iter().map(event_value).collect()));
            Value::Object(obj)
        })
        .collect();
    root.insert("traces".into(), Value::Array(traces));
    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("values serialize");
    text.push('\n');
    text
}
