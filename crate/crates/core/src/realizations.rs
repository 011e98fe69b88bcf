//! Realizations of uncertain traces and their probabilities.
//!
//! A realization fixes which indeterminate events happened, one label per
//! included event, and a total order of the included events compatible with
//! the behavior graph.
//!
//! Probabilities assume independence across events and across the attributes
//! of one event. A realization's probability is the product of its
//! inclusion factor, its label factor, and the probability that the included
//! events' timestamps fall in the chosen order. The last factor is exact
//! when the included events are pairwise disjoint in time or tied at equal
//! certain timestamps (ties are broken uniformly); otherwise it is estimated
//! by seeded Monte Carlo sampling.

use std::cell::OnceCell;
use std::collections::{BTreeMap, HashMap, HashSet};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::behavior_graph::{build_optimized, BehaviorGraph};
use crate::error::{Error, Result};
use crate::model::{
    classify, support, ActivityInfo, Density, IndeterminacyInfo, Strength, SupportMass,
    TimestampInfo, UncertainEvent, UncertainTrace,
};
use crate::time::Time;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_MAX_REALIZATIONS: usize = 100_000;

/// Above this many cached draws the Monte Carlo stream is regenerated per
/// realization instead of kept in memory.
const SAMPLE_CACHE_LIMIT: usize = 1 << 23;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Step {
    pub event_id: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Realization {
    pub steps: Vec<Step>,
    pub probability: Option<f64>,
}

impl Realization {
    pub fn labels(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityConfig {
    pub samples: usize,
    pub seed: u64,
    /// Read strong annotations as their uniform weak counterparts instead of
    /// rejecting the trace.
    pub uniform_defaults: bool,
    pub support_mass: SupportMass,
}

impl ProbabilityConfig {
    pub fn new(seed: u64) -> Self {
        ProbabilityConfig {
            samples: DEFAULT_SAMPLES,
            seed,
            uniform_defaults: false,
            support_mass: SupportMass::DEFAULT,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_uniform_defaults(mut self, on: bool) -> Self {
        self.uniform_defaults = on;
        self
    }

    pub fn with_support_mass(mut self, mass: SupportMass) -> Self {
        self.support_mass = mass;
        self
    }
}

/// All realizations of `trace`, in a deterministic order: inclusion choices
/// (included before skipped, in event order), then linear extensions, then
/// label choices.
pub fn enumerate(trace: &UncertainTrace, max_count: usize, mass: SupportMass) -> Result<Vec<Realization>> {
    let bg = build_optimized(trace, mass);
    Enumerator::new(&bg, max_count).run()
}

struct Enumerator<'a> {
    bg: &'a BehaviorGraph,
    /// `before[v]`: nodes that must precede `v`.
    before: Vec<FixedBitSet>,
    optional: Vec<usize>,
    labels: Vec<Vec<&'a str>>,
    max_count: usize,
    out: Vec<Realization>,
}

impl<'a> Enumerator<'a> {
    fn new(bg: &'a BehaviorGraph, max_count: usize) -> Self {
        let n = bg.len();
        let reach = bg.reachability();
        let mut before = vec![FixedBitSet::with_capacity(n); n];
        for (u, r) in reach.iter().enumerate() {
            for v in r.ones() {
                before[v].insert(u);
            }
        }
        Enumerator {
            bg,
            before,
            optional: (0..n).filter(|&v| bg.nodes()[v].indeterminacy.is_indeterminate()).collect(),
            labels: bg.nodes().iter().map(|node| node.activity.labels()).collect(),
            max_count,
            out: Vec::new(),
        }
    }

    fn run(mut self) -> Result<Vec<Realization>> {
        let mut included = FixedBitSet::with_capacity(self.bg.len());
        included.insert_range(..);
        self.choose_inclusion(0, &mut included)?;
        Ok(self.out)
    }

    fn choose_inclusion(&mut self, k: usize, included: &mut FixedBitSet) -> Result<()> {
        if k == self.optional.len() {
            let mut placed = FixedBitSet::with_capacity(self.bg.len());
            let mut order = Vec::with_capacity(included.count_ones(..));
            return self.extend_order(included, &mut placed, &mut order);
        }
        let v = self.optional[k];
        self.choose_inclusion(k + 1, included)?;
        included.set(v, false);
        self.choose_inclusion(k + 1, included)?;
        included.set(v, true);
        Ok(())
    }

    fn extend_order(
        &mut self,
        included: &FixedBitSet,
        placed: &mut FixedBitSet,
        order: &mut Vec<usize>,
    ) -> Result<()> {
        if order.len() == included.count_ones(..) {
            let mut chosen = Vec::with_capacity(order.len());
            return self.choose_labels(order, &mut chosen);
        }
        for v in included.ones() {
            if placed.contains(v) {
                continue;
            }
            // only included predecessors constrain v
            let blocked = self.before[v].ones().any(|u| included.contains(u) && !placed.contains(u));
            if blocked {
                continue;
            }
            placed.insert(v);
            order.push(v);
            self.extend_order(included, placed, order)?;
            order.pop();
            placed.set(v, false);
        }
        Ok(())
    }

    fn choose_labels(&mut self, order: &[usize], chosen: &mut Vec<&'a str>) -> Result<()> {
        if chosen.len() == order.len() {
            if self.out.len() == self.max_count {
                return Err(Error::TooManyRealizations {
                    case_id: self.bg.case_id().to_string(),
                    limit: self.max_count,
                    partial: self.out.len(),
                });
            }
            let nodes = self.bg.nodes();
            self.out.push(Realization {
                steps: order
                    .iter()
                    .zip(chosen.iter())
                    .map(|(&v, &label)| Step {
                        event_id: nodes[v].event_id.clone(),
                        label: label.to_string(),
                    })
                    .collect(),
                probability: None,
            });
            return Ok(());
        }
        let v = order[chosen.len()];
        for i in 0..self.labels[v].len() {
            chosen.push(self.labels[v][i]);
            self.choose_labels(order, chosen)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// Probability evaluation for the realizations of one trace. Monte Carlo
/// draws are shared across realizations (same seed, same stream), so the
/// estimates over a trace's realizations sum to the fraction of samples whose
/// order is an enumerated one.
pub struct ProbabilityModel<'a> {
    trace: &'a UncertainTrace,
    events: Vec<UncertainEvent>,
    index: HashMap<&'a str, usize>,
    cfg: ProbabilityConfig,
    /// Sampled column of each event with a density timestamp.
    columns: Vec<Option<usize>>,
    cache: OnceCell<Option<Vec<f64>>>,
}

impl<'a> ProbabilityModel<'a> {
    pub fn new(trace: &'a UncertainTrace, cfg: ProbabilityConfig) -> Result<Self> {
        if cfg.samples == 0 {
            return Err(Error::InvalidParameter("Monte Carlo sample count must be positive".into()));
        }
        let events: Vec<UncertainEvent> = if cfg.uniform_defaults {
            trace.events.iter().map(UncertainEvent::weak_counterpart).collect()
        } else {
            for ev in &trace.events {
                let profile = classify(ev);
                let attribute = if profile.timestamp.map(|q| q.strength) == Some(Strength::Strong) {
                    Some("timestamp")
                } else if profile.activity.map(|q| q.strength) == Some(Strength::Strong) {
                    Some("activity")
                } else if profile.indeterminacy == Some(Strength::Strong) {
                    Some("indeterminacy")
                } else {
                    None
                };
                if let Some(attribute) = attribute {
                    return Err(Error::NonProbabilizable {
                        case_id: trace.case_id.clone(),
                        event_id: ev.id.clone(),
                        attribute: attribute.to_string(),
                    });
                }
            }
            trace.events.clone()
        };
        let mut next = 0;
        let columns = events
            .iter()
            .map(|e| match e.timestamp {
                TimestampInfo::Density(_) => {
                    next += 1;
                    Some(next - 1)
                }
                _ => None,
            })
            .collect();
        Ok(ProbabilityModel {
            trace,
            index: trace.events.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect(),
            events,
            cfg,
            columns,
            cache: OnceCell::new(),
        })
    }

    pub fn probability(&self, r: &Realization) -> Result<f64> {
        let foreign = || Error::ForeignRealization(self.trace.case_id.clone());
        let mut included = Vec::with_capacity(r.steps.len());
        let mut seen = HashSet::new();
        let mut factor = 1.0;
        for step in &r.steps {
            let &i = self.index.get(step.event_id.as_str()).ok_or_else(foreign)?;
            if !seen.insert(i) {
                return Err(foreign());
            }
            factor *= match &self.events[i].activity {
                ActivityInfo::Certain(l) if *l == step.label => 1.0,
                ActivityInfo::Pmf(m) => *m.get(&step.label).ok_or_else(foreign)?,
                _ => return Err(foreign()),
            };
            included.push(i);
        }
        for (i, ev) in self.events.iter().enumerate() {
            match (ev.indeterminacy, seen.contains(&i)) {
                (IndeterminacyInfo::Probable { p_absent }, true) => factor *= 1.0 - p_absent,
                (IndeterminacyInfo::Probable { p_absent }, false) => factor *= p_absent,
                (IndeterminacyInfo::Determinate, false) => return Err(foreign()),
                _ => {}
            }
        }
        let supports: Vec<(Time, Time)> = included
            .iter()
            .map(|&i| support(&self.events[i].timestamp, self.cfg.support_mass))
            .collect();
        for a in 0..supports.len() {
            for b in a + 1..supports.len() {
                if supports[b].1 < supports[a].0 {
                    return Err(foreign());
                }
            }
        }
        Ok(factor * self.order_probability(&included, &supports))
    }

    fn order_probability(&self, included: &[usize], supports: &[(Time, Time)]) -> f64 {
        let exact = (0..included.len()).all(|a| {
            (a + 1..included.len()).all(|b| {
                let (sa, sb) = (supports[a], supports[b]);
                sa.1 < sb.0
                    || sb.1 < sa.0
                    || (point(&self.events[included[a]].timestamp).is_some()
                        && point(&self.events[included[b]].timestamp) == point(&self.events[included[a]].timestamp))
            })
        });
        if exact {
            let times: Vec<f64> = supports.iter().map(|s| s.0.as_f64()).collect();
            return tie_weight(&times);
        }
        let mut total = 0.0;
        let mut times = vec![0.0; included.len()];
        self.for_each_sample(|row| {
            for (slot, &i) in times.iter_mut().zip(included) {
                *slot = match self.columns[i] {
                    Some(c) => row[c],
                    None => point(&self.events[i].timestamp).expect("non-density timestamps are points").as_f64(),
                };
            }
            total += tie_weight(&times);
        });
        total / self.cfg.samples as f64
    }

    fn for_each_sample(&self, mut f: impl FnMut(&[f64])) {
        let width = self.columns.iter().flatten().count();
        if width == 0 {
            for _ in 0..self.cfg.samples {
                f(&[]);
            }
            return;
        }
        let cached = self.cache.get_or_init(|| {
            (width.saturating_mul(self.cfg.samples) <= SAMPLE_CACHE_LIMIT).then(|| {
                let mut all = Vec::with_capacity(width * self.cfg.samples);
                self.draw(|row| all.extend_from_slice(row));
                all
            })
        });
        match cached {
            Some(all) => all.chunks_exact(width).for_each(f),
            None => self.draw(f),
        }
    }

    fn draw(&self, mut f: impl FnMut(&[f64])) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let densities: Vec<Density> = self
            .events
            .iter()
            .filter_map(|e| match e.timestamp {
                TimestampInfo::Density(d) => Some(d),
                _ => None,
            })
            .collect();
        let mut row = vec![0.0; densities.len()];
        for _ in 0..self.cfg.samples {
            for (slot, d) in row.iter_mut().zip(&densities) {
                *slot = match *d {
                    Density::Normal { mu, sigma } => {
                        let z: f64 = rng.sample(StandardNormal);
                        mu.as_f64() + sigma * z
                    }
                    Density::Uniform { lo, hi } => {
                        let u: f64 = rng.random();
                        lo.as_f64() + u * (hi.as_f64() - lo.as_f64())
                    }
                };
            }
            f(&row);
        }
    }
}

fn point(ts: &TimestampInfo) -> Option<Time> {
    match *ts {
        TimestampInfo::Certain(t) => Some(t),
        TimestampInfo::Interval { lo, hi } if lo == hi => Some(lo),
        _ => None,
    }
}

/// Probability that times listed in a proposed order realize that order:
/// zero if they decrease anywhere, otherwise `1/k!` for every run of `k`
/// equal times (ties broken uniformly).
fn tie_weight(times: &[f64]) -> f64 {
    let mut weight = 1.0;
    let mut run = 1;
    for w in times.windows(2) {
        if w[1] < w[0] {
            return 0.0;
        }
        if w[1] == w[0] {
            run += 1;
            weight /= run as f64;
        } else {
            run = 1;
        }
    }
    weight
}

pub fn probability(trace: &UncertainTrace, r: &Realization, cfg: ProbabilityConfig) -> Result<f64> {
    ProbabilityModel::new(trace, cfg)?.probability(r)
}

/// Enumerates and attaches a probability to every realization.
pub fn enumerate_with_probabilities(
    trace: &UncertainTrace,
    max_count: usize,
    cfg: ProbabilityConfig,
) -> Result<Vec<Realization>> {
    let model = ProbabilityModel::new(trace, cfg)?;
    let mut all = enumerate(trace, max_count, cfg.support_mass)?;
    for r in &mut all {
        r.probability = Some(model.probability(r)?);
    }
    Ok(all)
}

/// Probability-weighted number of occurrences of each label.
pub fn expected_counts(
    trace: &UncertainTrace,
    max_count: usize,
    cfg: ProbabilityConfig,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for r in enumerate_with_probabilities(trace, max_count, cfg)? {
        let p = r.probability.expect("attached above");
        for step in &r.steps {
            *out.entry(step.label.clone()).or_insert(0.0) += p;
        }
    }
    Ok(out)
}

/// Sorted for reports: descending probability, then by steps.
pub fn sort_for_report(realizations: &mut [Realization]) {
    realizations.sort_by(|a, b| {
        let pa = a.probability.unwrap_or(0.0);
        let pb = b.probability.unwrap_or(0.0);
        pb.total_cmp(&pa).then_with(|| a.steps.cmp(&b.steps))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{strong_trace, weak_trace};

    const M: SupportMass = SupportMass::DEFAULT;

    fn t(v: i64) -> Time {
        Time::from_int(v)
    }

    fn realization(steps: &[(&str, &str)]) -> Realization {
        Realization {
            steps: steps
                .iter()
                .map(|(e, l)| Step { event_id: e.to_string(), label: l.to_string() })
                .collect(),
            probability: None,
        }
    }

    #[test]
    fn strong_trace_has_ten() {
        let all = enumerate(&strong_trace(), 1000, M).unwrap();
        assert_eq!(all.len(), 10);
        assert_eq!(all.iter().filter(|r| r.len() == 3).count(), 6);
        assert_eq!(all.iter().filter(|r| r.len() == 2).count(), 4);
    }

    #[test]
    fn crisp_trace_has_one() {
        let tr = UncertainTrace::new(
            "c",
            vec![
                UncertainEvent::certain("b", t(2), "B"),
                UncertainEvent::certain("a", t(1), "A"),
                UncertainEvent::certain("c", t(3), "C"),
            ],
        );
        let all = enumerate(&tr, 10, M).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].labels(), ["A", "B", "C"]);
        let p = probability(&tr, &all[0], ProbabilityConfig::new(1)).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn overlapping_pair_has_both_orders() {
        let mut a = UncertainEvent::certain("a", t(0), "A");
        a.timestamp = TimestampInfo::Interval { lo: t(0), hi: t(5) };
        let mut b = UncertainEvent::certain("b", t(0), "B");
        b.timestamp = TimestampInfo::Interval { lo: t(3), hi: t(9) };
        let all = enumerate(&UncertainTrace::new("c", vec![a, b]), 10, M).unwrap();
        let mut seqs: Vec<_> = all.iter().map(|r| r.labels().join("")).collect();
        seqs.sort();
        assert_eq!(seqs, ["AB", "BA"]);
    }

    #[test]
    fn bound_error_carries_partial_count() {
        let err = enumerate(&strong_trace(), 4, M).unwrap_err();
        assert_eq!(
            err,
            Error::TooManyRealizations { case_id: "ID192-1".into(), limit: 4, partial: 4 }
        );
    }

    #[test]
    fn empty_trace_has_empty_realization() {
        let all = enumerate(&UncertainTrace::new("c", vec![]), 10, M).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].is_empty());
    }

    #[test]
    fn strong_trace_is_not_probabilizable() {
        let r = realization(&[("e1", "NightSweats"), ("e2", "PrTP"), ("e3", "Splenomeg")]);
        let err = probability(&strong_trace(), &r, ProbabilityConfig::new(7)).unwrap_err();
        assert_eq!(
            err,
            Error::NonProbabilizable {
                case_id: "ID192-1".into(),
                event_id: "e1".into(),
                attribute: "indeterminacy".into()
            }
        );
        let cfg = ProbabilityConfig::new(7).with_uniform_defaults(true).with_samples(20_000);
        let all = enumerate_with_probabilities(&strong_trace(), 100, cfg).unwrap();
        let sum: f64 = all.iter().map(|r| r.probability.unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-3, "{sum}");
    }

    #[test]
    fn weak_trace_realization_probability() {
        let r = realization(&[("e4", "NightSweats"), ("e5", "PrTP"), ("e6", "Splenomeg")]);
        let cfg = ProbabilityConfig::new(42).with_samples(200_000);
        let p = probability(&weak_trace(), &r, cfg).unwrap();
        // 0.75 * 0.9 * P(N(7,1) > 8); P(Z > 1) = 0.158655
        assert!((p - 0.75 * 0.9 * 0.158655).abs() < 2e-3, "{p}");
    }

    #[test]
    fn foreign_realizations_rejected() {
        let cfg = ProbabilityConfig::new(1);
        let tr = weak_trace();
        for steps in [
            vec![("e4", "NightSweats"), ("e5", "Nope"), ("e6", "Splenomeg")],
            vec![("e4", "NightSweats"), ("e6", "Splenomeg")],
            vec![("e5", "PrTP"), ("e4", "NightSweats"), ("e6", "Splenomeg")],
            vec![("e4", "NightSweats"), ("e4", "NightSweats"), ("e5", "PrTP"), ("e6", "Splenomeg")],
            vec![("x", "NightSweats"), ("e5", "PrTP"), ("e6", "Splenomeg")],
        ] {
            assert_eq!(
                probability(&tr, &realization(&steps), cfg),
                Err(Error::ForeignRealization("ID192-2".into()))
            );
        }
    }

    #[test]
    fn ties_share_probability() {
        let tr = UncertainTrace::new(
            "c",
            vec![
                UncertainEvent::certain("a", t(1), "A"),
                UncertainEvent::certain("b", t(1), "B"),
                UncertainEvent::certain("c", t(1), "C"),
            ],
        );
        let all = enumerate_with_probabilities(&tr, 10, ProbabilityConfig::new(0)).unwrap();
        assert_eq!(all.len(), 6);
        for r in &all {
            assert!((r.probability.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_counts_of_crisp_repeat() {
        let tr = UncertainTrace::new(
            "c",
            vec![UncertainEvent::certain("a", t(1), "A"), UncertainEvent::certain("b", t(2), "A")],
        );
        let counts = expected_counts(&tr, 10, ProbabilityConfig::new(0)).unwrap();
        assert_eq!(counts, [("A".to_string(), 2.0)].into());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let cfg = ProbabilityConfig::new(99).with_samples(5_000);
        let a = enumerate_with_probabilities(&weak_trace(), 100, cfg).unwrap();
        let b = enumerate_with_probabilities(&weak_trace(), 100, cfg).unwrap();
        let bits = |v: &[Realization]| v.iter().map(|r| r.probability.unwrap().to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn tie_weights() {
        assert_eq!(tie_weight(&[]), 1.0);
        assert_eq!(tie_weight(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(tie_weight(&[2.0, 1.0]), 0.0);
        assert_eq!(tie_weight(&[1.0, 1.0, 2.0, 2.0, 2.0]), 1.0 / 12.0);
    }
}
