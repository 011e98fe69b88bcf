//! Uncertain events, traces and logs.
//!
//! Each event attribute is either certain or carries one of four kinds of
//! uncertainty: strong (possible values only) or weak (values with
//! probabilities), over discrete (activity labels) or continuous
//! (timestamps) domains. Existence uncertainty is tracked separately as
//! indeterminacy.
//!
//! The types are plain data. Anything can be constructed; [`validate_log`]
//! reports which invariants a value breaks.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::time::Time;

/// Tolerance for a probability mass function summing to one.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Density {
    Normal { mu: Time, sigma: f64 },
    Uniform { lo: Time, hi: Time },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimestampInfo {
    Certain(Time),
    /// Closed interval; `lo == hi` behaves exactly like `Certain(lo)`.
    Interval { lo: Time, hi: Time },
    Density(Density),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ActivityInfo {
    Certain(String),
    Set(BTreeSet<String>),
    Pmf(BTreeMap<String, f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum IndeterminacyInfo {
    #[default]
    Determinate,
    /// Recorded, but possibly did not happen; no probability known.
    Indeterminate,
    /// Recorded, and did not happen with probability `p_absent`.
    Probable { p_absent: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct UncertainEvent {
    pub id: String,
    pub timestamp: TimestampInfo,
    pub activity: ActivityInfo,
    pub indeterminacy: IndeterminacyInfo,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct UncertainTrace {
    pub case_id: String,
    /// Storage order carries no meaning; order comes from the timestamps.
    pub events: Vec<UncertainEvent>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct UncertainLog {
    pub traces: Vec<UncertainTrace>,
    pub attributes: BTreeMap<String, String>,
}

/// Probability mass captured by the effective support of a density
/// timestamp. Always strictly between 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SupportMass(f64);

impl SupportMass {
    pub const DEFAULT: SupportMass = SupportMass(0.9999);

    pub fn new(mass: f64) -> Option<Self> {
        (mass > 0.0 && mass < 1.0).then_some(SupportMass(mass))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for SupportMass {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Effective support of a timestamp as a closed interval.
///
/// Normal densities get the central interval holding `mass` probability,
/// rounded outwards to the time grid. Uniform densities return their bounds.
pub fn support(ts: &TimestampInfo, mass: SupportMass) -> (Time, Time) {
    match *ts {
        TimestampInfo::Certain(t) => (t, t),
        TimestampInfo::Interval { lo, hi } => (lo, hi),
        TimestampInfo::Density(Density::Uniform { lo, hi }) => (lo, hi),
        TimestampInfo::Density(Density::Normal { mu, sigma }) => {
            let z = standard_normal().inverse_cdf((1.0 + mass.get()) / 2.0);
            let mu = mu.as_f64();
            (Time::floor_f64(mu - z * sigma), Time::ceil_f64(mu + z * sigma))
        }
    }
}

pub(crate) fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    /// Possible values without probabilities.
    Strong,
    /// Possible values with probabilities.
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Discrete,
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Quadrant {
    pub strength: Strength,
    pub domain: Domain,
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.strength {
            Strength::Strong => "strong",
            Strength::Weak => "weak",
        };
        let d = match self.domain {
            Domain::Discrete => "discrete",
            Domain::Continuous => "continuous",
        };
        write!(f, "{s}-{d}")
    }
}

/// Which kinds of uncertainty an event carries, per attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub struct UncertaintyProfile {
    pub timestamp: Option<Quadrant>,
    pub activity: Option<Quadrant>,
    pub indeterminacy: Option<Strength>,
}

impl UncertaintyProfile {
    pub fn is_certain(&self) -> bool {
        self.timestamp.is_none() && self.activity.is_none() && self.indeterminacy.is_none()
    }

    pub fn is_strong(&self) -> bool {
        self.timestamp.map(|q| q.strength) == Some(Strength::Strong)
            || self.activity.map(|q| q.strength) == Some(Strength::Strong)
            || self.indeterminacy == Some(Strength::Strong)
    }
}

pub fn classify(ev: &UncertainEvent) -> UncertaintyProfile {
    let timestamp = match ev.timestamp {
        TimestampInfo::Certain(_) => None,
        TimestampInfo::Interval { lo, hi } if lo == hi => None,
        TimestampInfo::Interval { .. } => Some(Quadrant {
            strength: Strength::Strong,
            domain: Domain::Continuous,
        }),
        TimestampInfo::Density(_) => Some(Quadrant {
            strength: Strength::Weak,
            domain: Domain::Continuous,
        }),
    };
    let activity = match ev.activity {
        ActivityInfo::Certain(_) => None,
        ActivityInfo::Set(_) => Some(Quadrant {
            strength: Strength::Strong,
            domain: Domain::Discrete,
        }),
        ActivityInfo::Pmf(_) => Some(Quadrant {
            strength: Strength::Weak,
            domain: Domain::Discrete,
        }),
    };
    let indeterminacy = match ev.indeterminacy {
        IndeterminacyInfo::Determinate => None,
        IndeterminacyInfo::Indeterminate => Some(Strength::Strong),
        IndeterminacyInfo::Probable { .. } => Some(Strength::Weak),
    };
    UncertaintyProfile {
        timestamp,
        activity,
        indeterminacy,
    }
}

impl ActivityInfo {
    /// Possible labels in ascending order.
    pub fn labels(&self) -> Vec<&str> {
        match self {
            ActivityInfo::Certain(l) => vec![l.as_str()],
            ActivityInfo::Set(s) => s.iter().map(String::as_str).collect(),
            ActivityInfo::Pmf(m) => m.keys().map(String::as_str).collect(),
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        match self {
            ActivityInfo::Certain(l) => l == label,
            ActivityInfo::Set(s) => s.contains(label),
            ActivityInfo::Pmf(m) => m.contains_key(label),
        }
    }

    /// Canonical form: one possible label becomes `Certain`.
    pub fn normalized(self) -> Self {
        match self {
            ActivityInfo::Set(s) if s.len() == 1 => {
                ActivityInfo::Certain(s.into_iter().next().expect("one element"))
            }
            ActivityInfo::Pmf(m) if m.len() == 1 && m.values().all(|&p| p == 1.0) => {
                ActivityInfo::Certain(m.into_keys().next().expect("one element"))
            }
            other => other,
        }
    }
}

impl IndeterminacyInfo {
    pub fn is_indeterminate(&self) -> bool {
        !matches!(self, IndeterminacyInfo::Determinate)
    }

    /// `p_absent == 0` becomes `Determinate`.
    pub fn normalized(self) -> Self {
        match self {
            IndeterminacyInfo::Probable { p_absent: 0.0 } => IndeterminacyInfo::Determinate,
            other => other,
        }
    }
}

impl UncertainEvent {
    pub fn certain(id: impl Into<String>, t: Time, label: impl Into<String>) -> Self {
        UncertainEvent {
            id: id.into(),
            timestamp: TimestampInfo::Certain(t),
            activity: ActivityInfo::Certain(label.into()),
            indeterminacy: IndeterminacyInfo::Determinate,
        }
    }

    pub fn is_indeterminate(&self) -> bool {
        self.indeterminacy.is_indeterminate()
    }

    /// The same event with every strong annotation replaced by its uniform
    /// weak counterpart: label sets become equiprobable distributions,
    /// intervals become uniform densities, and `?` becomes a 50% chance of
    /// absence.
    pub fn weak_counterpart(&self) -> UncertainEvent {
        let timestamp = match self.timestamp {
            TimestampInfo::Interval { lo, hi } if lo == hi => TimestampInfo::Certain(lo),
            TimestampInfo::Interval { lo, hi } => {
                TimestampInfo::Density(Density::Uniform { lo, hi })
            }
            other => other,
        };
        let activity = match &self.activity {
            ActivityInfo::Set(s) => {
                let p = 1.0 / s.len() as f64;
                ActivityInfo::Pmf(s.iter().map(|l| (l.clone(), p)).collect())
            }
            other => other.clone(),
        };
        let indeterminacy = match self.indeterminacy {
            IndeterminacyInfo::Indeterminate => IndeterminacyInfo::Probable { p_absent: 0.5 },
            other => other,
        };
        UncertainEvent {
            id: self.id.clone(),
            timestamp,
            activity,
            indeterminacy,
        }
    }
}

impl UncertainTrace {
    pub fn new(case_id: impl Into<String>, events: Vec<UncertainEvent>) -> Self {
        UncertainTrace {
            case_id: case_id.into(),
            events,
        }
    }

    pub fn event(&self, id: &str) -> Option<&UncertainEvent> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn is_crisp(&self) -> bool {
        self.events.iter().all(|e| classify(e).is_certain())
    }
}

impl UncertainLog {
    pub fn new(traces: Vec<UncertainTrace>) -> Self {
        UncertainLog {
            traces,
            attributes: BTreeMap::new(),
        }
    }

    pub fn trace(&self, case_id: &str) -> Option<&UncertainTrace> {
        self.traces.iter().find(|t| t.case_id == case_id)
    }

    /// Every label any event may carry, ascending.
    pub fn alphabet(&self) -> BTreeSet<String> {
        self.traces
            .iter()
            .flat_map(|t| &t.events)
            .flat_map(|e| e.activity.labels())
            .map(str::to_string)
            .collect()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Case,
    Id,
    Timestamp,
    Activity,
    Indeterminacy,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Case => "case_id",
            Field::Id => "id",
            Field::Timestamp => "timestamp",
            Field::Activity => "activity",
            Field::Indeterminacy => "indeterminate",
        })
    }
}

/// A broken invariant, located by case, event and attribute.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub case_id: String,
    pub event_id: Option<String>,
    pub field: Field,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.event_id {
            Some(e) => write!(f, "case {:?}, event {:?}, {}: {}", self.case_id, e, self.field, self.rule),
            None => write!(f, "case {:?}, {}: {}", self.case_id, self.field, self.rule),
        }
    }
}

/// Checks the attribute invariants of a single event.
pub fn event_violations(ev: &UncertainEvent) -> Vec<(Field, String)> {
    let mut out = Vec::new();
    match ev.timestamp {
        TimestampInfo::Certain(_) => {}
        TimestampInfo::Interval { lo, hi } => {
            if lo > hi {
                out.push((Field::Timestamp, "lo > hi".to_string()));
            }
        }
        TimestampInfo::Density(Density::Normal { sigma, .. }) => {
            if !(sigma.is_finite() && sigma > 0.0) {
                out.push((Field::Timestamp, "normal sigma must be > 0".to_string()));
            }
        }
        TimestampInfo::Density(Density::Uniform { lo, hi }) => {
            if lo >= hi {
                out.push((Field::Timestamp, "uniform requires lo < hi".to_string()));
            }
        }
    }
    match &ev.activity {
        ActivityInfo::Certain(_) => {}
        ActivityInfo::Set(s) => {
            if s.len() < 2 {
                out.push((Field::Activity, "label set needs at least 2 labels".to_string()));
            }
        }
        ActivityInfo::Pmf(m) => {
            if m.len() < 2 {
                out.push((Field::Activity, "pmf needs at least 2 entries".to_string()));
            }
            if m.values().any(|&p| !(p > 0.0 && p <= 1.0)) {
                out.push((Field::Activity, "pmf probability outside (0,1]".to_string()));
            }
            let sum: f64 = m.values().sum();
            if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
                out.push((Field::Activity, "pmf sum ≠ 1".to_string()));
            }
        }
    }
    if let IndeterminacyInfo::Probable { p_absent } = ev.indeterminacy {
        if !(p_absent > 0.0 && p_absent < 1.0) {
            out.push((Field::Indeterminacy, "p_absent outside (0,1)".to_string()));
        }
    }
    out
}

pub fn validate_trace(trace: &UncertainTrace) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for ev in &trace.events {
        if !seen.insert(ev.id.as_str()) {
            out.push(Violation {
                case_id: trace.case_id.clone(),
                event_id: Some(ev.id.clone()),
                field: Field::Id,
                rule: "duplicate event id".to_string(),
            });
        }
        for (field, rule) in event_violations(ev) {
            out.push(Violation {
                case_id: trace.case_id.clone(),
                event_id: Some(ev.id.clone()),
                field,
                rule,
            });
        }
    }
    out
}

/// Every broken invariant in the log; empty iff the log is well-formed.
pub fn validate_log(log: &UncertainLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut cases = HashSet::new();
    for trace in &log.traces {
        if !cases.insert(trace.case_id.as_str()) {
            out.push(Violation {
                case_id: trace.case_id.clone(),
                event_id: None,
                field: Field::Case,
                rule: "duplicate case id".to_string(),
            });
        }
        out.extend(validate_trace(trace));
    }
    out
}
