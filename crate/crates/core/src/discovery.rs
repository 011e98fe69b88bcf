//! Uncertain directly-follows graphs.
//!
//! For every activity and every directly-follows pair, the UDFG records the
//! smallest and largest count over a trace's realizations, summed over the
//! traces of the log. Traces are independent, so the per-trace sums equal
//! the bounds over joint realizations of the whole log.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SupportMass, UncertainLog, UncertainTrace};
use crate::realizations::{
    enumerate, ProbabilityConfig, ProbabilityModel, Realization, DEFAULT_MAX_REALIZATIONS,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub min: u64,
    pub max: u64,
    pub expected: Option<f64>,
}

impl Bounds {
    fn statistic(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::Min => self.min as f64,
            Statistic::Max => self.max as f64,
            Statistic::Expected => self.expected.unwrap_or(self.max as f64),
        }
    }

    fn merge(self, other: Bounds) -> Bounds {
        Bounds {
            min: self.min + other.min,
            max: self.max + other.max,
            expected: self.expected.zip(other.expected).map(|(a, b)| a + b),
        }
    }
}

pub type Edge = (String, String);

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct Udfg {
    pub activities: BTreeMap<String, Bounds>,
    #[serde(serialize_with = "serialize_edges")]
    pub edges: BTreeMap<Edge, Bounds>,
}

fn serialize_edges<S: serde::Serializer>(
    edges: &BTreeMap<Edge, Bounds>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry<'a> {
        from: &'a str,
        to: &'a str,
        #[serde(flatten)]
        bounds: &'a Bounds,
    }
    s.collect_seq(edges.iter().map(|((from, to), bounds)| Entry { from, to, bounds }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Min,
    Max,
    /// Falls back to `max` on entries without an expected count.
    Expected,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscoveryConfig {
    pub max_realizations: usize,
    pub support_mass: SupportMass,
    /// Expected counts are added when set and every trace is probabilizable.
    pub probability: Option<ProbabilityConfig>,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            max_realizations: DEFAULT_MAX_REALIZATIONS,
            support_mass: SupportMass::DEFAULT,
            probability: None,
        }
    }
}

/// Activity and directly-follows counts of one sequence of labels.
pub fn dfg_counts<S: AsRef<str>>(labels: &[S]) -> (BTreeMap<String, u64>, BTreeMap<Edge, u64>) {
    let mut acts = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for l in labels {
        *acts.entry(l.as_ref().to_string()).or_insert(0) += 1;
    }
    for w in labels.windows(2) {
        *edges
            .entry((w[0].as_ref().to_string(), w[1].as_ref().to_string()))
            .or_insert(0) += 1;
    }
    (acts, edges)
}

fn bounds_over<K: Ord + Clone>(
    per_realization: &[BTreeMap<K, u64>],
    weights: Option<&[f64]>,
) -> BTreeMap<K, Bounds> {
    let keys: BTreeSet<&K> = per_realization.iter().flat_map(|m| m.keys()).collect();
    keys.into_iter()
        .map(|k| {
            let counts: Vec<u64> = per_realization
                .iter()
                .map(|m| m.get(k).copied().unwrap_or(0))
                .collect();
            let min = *counts.iter().min().expect("at least one realization");
            let max = *counts.iter().max().expect("at least one realization");
            let expected = weights.map(|w| {
                let e: f64 = counts.iter().zip(w).map(|(&c, &p)| c as f64 * p).sum();
                e.clamp(min as f64, max as f64)
            });
            (k.clone(), Bounds { min, max, expected })
        })
        .collect()
}

/// Bounds for a single trace.
pub fn trace_udfg(trace: &UncertainTrace, cfg: &DiscoveryConfig) -> Result<Udfg> {
    let realizations = enumerate(trace, cfg.max_realizations, cfg.support_mass)?;
    let weights = match cfg.probability {
        Some(pcfg) => normalized_weights(trace, &realizations, pcfg.with_support_mass(cfg.support_mass))?,
        None => None,
    };
    let (acts, edges): (Vec<_>, Vec<_>) = realizations.iter().map(|r| dfg_counts(&r.labels())).unzip();
    Ok(Udfg {
        activities: bounds_over(&acts, weights.as_deref()),
        edges: bounds_over(&edges, weights.as_deref()),
    })
}

/// Realization probabilities rescaled to sum to one, so expected counts are
/// convex combinations and stay inside the bounds. `None` when the trace
/// carries strong uncertainty the configuration cannot read.
fn normalized_weights(
    trace: &UncertainTrace,
    realizations: &[Realization],
    cfg: ProbabilityConfig,
) -> Result<Option<Vec<f64>>> {
    let model = match ProbabilityModel::new(trace, cfg) {
        Ok(m) => m,
        Err(Error::NonProbabilizable { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let weights = realizations
        .iter()
        .map(|r| model.probability(r))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(None);
    }
    Ok(Some(weights.into_iter().map(|w| w / total).collect()))
}

pub fn udfg(log: &UncertainLog, cfg: &DiscoveryConfig) -> Result<Udfg> {
    let mut acc = Udfg::default();
    let mut expected_ok = true;
    for trace in &log.traces {
        let part = trace_udfg(trace, cfg)?;
        expected_ok &= part.activities.values().chain(part.edges.values()).all(|b| b.expected.is_some());
        merge_into(&mut acc.activities, part.activities);
        merge_into(&mut acc.edges, part.edges);
    }
    if !expected_ok || cfg.probability.is_none() {
        for b in acc.activities.values_mut().chain(acc.edges.values_mut()) {
            b.expected = None;
        }
    }
    Ok(acc)
}

fn merge_into<K: Ord>(acc: &mut BTreeMap<K, Bounds>, part: BTreeMap<K, Bounds>) {
    // a key missing on one side counts as zero there
    for (k, b) in part {
        acc.entry(k).and_modify(|e| *e = e.merge(b)).or_insert(b);
    }
}

/// Keeps activities and edges whose chosen statistic reaches the threshold.
/// Edges touching a dropped activity are dropped too.
pub fn filter_udfg(u: &Udfg, min_activity: f64, min_edge: f64, stat: Statistic) -> Udfg {
    let activities: BTreeMap<String, Bounds> = u
        .activities
        .iter()
        .filter(|(_, b)| b.statistic(stat) >= min_activity)
        .map(|(k, b)| (k.clone(), *b))
        .collect();
    let edges = u
        .edges
        .iter()
        .filter(|((a, b), bounds)| {
            activities.contains_key(a) && activities.contains_key(b) && bounds.statistic(stat) >= min_edge
        })
        .map(|(k, b)| (k.clone(), *b))
        .collect();
    Udfg { activities, edges }
}
