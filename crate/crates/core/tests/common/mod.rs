//! Generators and brute-force oracles shared by the integration tests.
//!
//! The oracles deliberately avoid the library's algorithms: realizations come
//! from permutations filtered by pairwise precedence, net languages from an
//! unmemoized token game, alignment costs from longest common subsequences.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use uncertain_core::model::{support, Density, IndeterminacyInfo, SupportMass, TimestampInfo};
use uncertain_core::{
    ActivityInfo, PetriNet, Realization, Time, UncertainEvent, UncertainLog, UncertainTrace,
};

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/clinical.uel.json");
pub const REFERENCE_MODEL: &str =
    concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reference_model.net");

pub fn label(i: usize) -> String {
    ((b'A' + i as u8) as char).to_string()
}

fn half_units(h: i64) -> Time {
    Time::from_units(h * 500_000)
}

/// Event attributes before ids are assigned.
#[derive(Clone, Debug)]
pub struct Parts {
    pub timestamp: TimestampInfo,
    pub activity: ActivityInfo,
    pub indeterminacy: IndeterminacyInfo,
}

fn label_subset(labels: usize) -> impl Strategy<Value = Vec<String>> {
    let max = labels.min(3);
    prop::sample::subsequence((0..labels).collect::<Vec<_>>(), 2..=max)
        .prop_map(|ix| ix.into_iter().map(label).collect())
}

/// Intervals, uniform and normal densities, mixed with certain values.
pub fn any_timestamp(span: i64) -> impl Strategy<Value = TimestampInfo> {
    prop_oneof![
        3 => (0..span).prop_map(|t| TimestampInfo::Certain(half_units(t))),
        2 => (0..span, 0..6i64).prop_map(|(lo, w)| TimestampInfo::Interval {
            lo: half_units(lo),
            hi: half_units(lo + w),
        }),
        1 => (0..span, prop::sample::select(vec![0.1, 0.25, 0.5, 1.0])).prop_map(|(mu, sigma)| {
            TimestampInfo::Density(Density::Normal { mu: half_units(mu), sigma })
        }),
        1 => (0..span, 1..6i64).prop_map(|(lo, w)| {
            TimestampInfo::Density(Density::Uniform { lo: half_units(lo), hi: half_units(lo + w) })
        }),
    ]
}

pub fn any_activity(labels: usize) -> impl Strategy<Value = ActivityInfo> {
    prop_oneof![
        3 => (0..labels).prop_map(|i| ActivityInfo::Certain(label(i))),
        1 => label_subset(labels).prop_map(|ls| ActivityInfo::Set(ls.into_iter().collect())),
        1 => label_subset(labels).prop_flat_map(|ls| {
            let n = ls.len();
            // tenths summing to exactly ten
            prop::collection::vec(1u32..=4, n - 1).prop_map(move |ws| {
                let mut tenths: Vec<u32> = ws;
                tenths.push(10 - tenths.iter().sum::<u32>());
                ActivityInfo::Pmf(
                    ls.iter().cloned().zip(tenths.iter().map(|&w| f64::from(w) / 10.0)).collect(),
                )
            })
        }),
    ]
}

pub fn any_indeterminacy() -> impl Strategy<Value = IndeterminacyInfo> {
    prop_oneof![
        4 => Just(IndeterminacyInfo::Determinate),
        1 => Just(IndeterminacyInfo::Indeterminate),
        1 => prop::sample::select(vec![0.1, 0.25, 0.5, 0.75])
            .prop_map(|p_absent| IndeterminacyInfo::Probable { p_absent }),
    ]
}

pub fn strong_timestamp(span: i64) -> impl Strategy<Value = TimestampInfo> {
    prop_oneof![
        2 => (0..span).prop_map(|t| TimestampInfo::Certain(half_units(t))),
        1 => (0..span, 1..6i64).prop_map(|(lo, w)| TimestampInfo::Interval {
            lo: half_units(lo),
            hi: half_units(lo + w),
        }),
    ]
}

pub fn strong_activity(labels: usize) -> impl Strategy<Value = ActivityInfo> {
    prop_oneof![
        3 => (0..labels).prop_map(|i| ActivityInfo::Certain(label(i))),
        1 => label_subset(labels).prop_map(|ls| ActivityInfo::Set(ls.into_iter().collect())),
    ]
}

pub fn strong_indeterminacy() -> impl Strategy<Value = IndeterminacyInfo> {
    prop_oneof![4 => Just(IndeterminacyInfo::Determinate), 1 => Just(IndeterminacyInfo::Indeterminate)]
}

fn assemble(case_id: String, parts: Vec<Parts>) -> UncertainTrace {
    let events = parts
        .into_iter()
        .enumerate()
        .map(|(i, p)| UncertainEvent {
            id: format!("e{}", i + 1),
            timestamp: p.timestamp,
            activity: p.activity,
            indeterminacy: p.indeterminacy,
        })
        .collect();
    UncertainTrace::new(case_id, events)
}

/// Traces over every kind of uncertainty. Timestamps fall in a window that
/// grows with the trace so that events overlap now and then.
pub fn any_trace(max_events: usize, labels: usize) -> impl Strategy<Value = UncertainTrace> {
    let span = 4 * max_events.max(1) as i64;
    let parts = (any_timestamp(span), any_activity(labels), any_indeterminacy())
        .prop_map(|(timestamp, activity, indeterminacy)| Parts { timestamp, activity, indeterminacy });
    prop::collection::vec(parts, 0..=max_events).prop_map(|p| assemble("c".into(), p))
}

/// Traces with strong uncertainty only.
pub fn strong_trace(max_events: usize, labels: usize) -> impl Strategy<Value = UncertainTrace> {
    let span = 4 * max_events.max(1) as i64;
    let parts = (strong_timestamp(span), strong_activity(labels), strong_indeterminacy())
        .prop_map(|(timestamp, activity, indeterminacy)| Parts { timestamp, activity, indeterminacy });
    prop::collection::vec(parts, 0..=max_events).prop_map(|p| assemble("c".into(), p))
}

/// All-certain traces with pairwise distinct timestamps, stored out of order.
pub fn crisp_trace(max_events: usize, labels: usize) -> impl Strategy<Value = UncertainTrace> {
    prop::collection::vec((0..labels, 1..4i64), 0..=max_events)
        .prop_map(|raw| {
            let mut t = 0;
            raw.into_iter()
                .map(|(l, gap)| {
                    t += gap;
                    Parts {
                        timestamp: TimestampInfo::Certain(half_units(t)),
                        activity: ActivityInfo::Certain(label(l)),
                        indeterminacy: IndeterminacyInfo::Determinate,
                    }
                })
                .collect::<Vec<_>>()
        })
        .prop_shuffle()
        .prop_map(|p| assemble("c".into(), p))
}

pub fn log_of(
    trace: impl Strategy<Value = UncertainTrace>,
    max_traces: usize,
) -> impl Strategy<Value = UncertainLog> {
    prop::collection::vec(trace, 0..=max_traces).prop_map(|ts| {
        UncertainLog::new(
            ts.into_iter()
                .enumerate()
                .map(|(i, mut t)| {
                    t.case_id = format!("case-{i}");
                    t
                })
                .collect(),
        )
    })
}

/// `n` deterministic draws from `strategy`.
pub fn draw<S: Strategy>(strategy: S, n: usize, seed: u8) -> Vec<S::Value> {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy draws").current())
        .collect()
}

/// Widens some strong or certain attributes of a trace: grows intervals,
/// adds labels and marks events as indeterminate.
pub fn widen(trace: &UncertainTrace, choices: &[u8], labels: usize) -> UncertainTrace {
    let mut out = trace.clone();
    for (ev, &c) in out.events.iter_mut().zip(choices.iter().cycle()) {
        if c & 1 != 0 {
            ev.timestamp = match ev.timestamp {
                TimestampInfo::Certain(t) => TimestampInfo::Interval {
                    lo: t.checked_sub(half_units(1)).unwrap(),
                    hi: t.checked_add(half_units(2)).unwrap(),
                },
                TimestampInfo::Interval { lo, hi } => TimestampInfo::Interval {
                    lo: lo.checked_sub(half_units(2)).unwrap(),
                    hi: hi.checked_add(half_units(1)).unwrap(),
                },
                other => other,
            };
        }
        if c & 2 != 0 {
            let mut set: BTreeSet<String> = ev.activity.labels().into_iter().map(String::from).collect();
            if let Some(extra) = (0..labels).map(label).find(|l| !set.contains(l)) {
                if !matches!(ev.activity, ActivityInfo::Pmf(_)) {
                    set.insert(extra);
                    ev.activity = ActivityInfo::Set(set);
                }
            }
        }
        if c & 4 != 0 && ev.indeterminacy == IndeterminacyInfo::Determinate {
            ev.indeterminacy = IndeterminacyInfo::Indeterminate;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Oracles

pub type Run = Vec<(String, String)>;

pub fn steps_of(r: &Realization) -> Run {
    r.steps.iter().map(|s| (s.event_id.clone(), s.label.clone())).collect()
}

fn permutations(items: &[usize], out: &mut Vec<Vec<usize>>) {
    fn go(items: &[usize], used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == items.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..items.len() {
            if !used[i] {
                used[i] = true;
                cur.push(items[i]);
                go(items, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    go(items, &mut vec![false; items.len()], &mut Vec::new(), out);
}

/// Strict precedence between effective supports.
pub fn before(a: (Time, Time), b: (Time, Time)) -> bool {
    a.1 < b.0
}

/// Every inclusion subset, every ordering of it that no pair of strictly
/// ordered events contradicts, and every label choice.
pub fn oracle_realizations(trace: &UncertainTrace, mass: SupportMass) -> BTreeSet<Run> {
    let events = &trace.events;
    let n = events.len();
    let supports: Vec<_> = events.iter().map(|e| support(&e.timestamp, mass)).collect();
    let optional: Vec<bool> = events.iter().map(|e| e.indeterminacy != IndeterminacyInfo::Determinate).collect();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        if (0..n).any(|i| !optional[i] && mask & (1 << i) == 0) {
            continue;
        }
        let included: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut perms = Vec::new();
        permutations(&included, &mut perms);
        for p in perms {
            let consistent = (0..p.len())
                .all(|i| (i + 1..p.len()).all(|j| !before(supports[p[j]], supports[p[i]])));
            if !consistent {
                continue;
            }
            let mut runs: Vec<Run> = vec![Vec::new()];
            for &e in &p {
                let labels = events[e].activity.labels();
                runs = runs
                    .into_iter()
                    .flat_map(|r| {
                        labels.iter().map(move |l| {
                            let mut r = r.clone();
                            r.push((events[e].id.clone(), l.to_string()));
                            r
                        })
                    })
                    .collect();
            }
            out.extend(runs);
        }
    }
    out
}

/// Immediate precedences by definition: `a` before `b` with nothing in between.
pub fn oracle_edges(trace: &UncertainTrace, mass: SupportMass) -> BTreeSet<(String, String)> {
    let s: Vec<_> = trace.events.iter().map(|e| support(&e.timestamp, mass)).collect();
    let n = s.len();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            if before(s[a], s[b]) && !(0..n).any(|c| before(s[a], s[c]) && before(s[c], s[b])) {
                out.insert((trace.events[a].id.clone(), trace.events[b].id.clone()));
            }
        }
    }
    out
}

/// Complete runs of an acyclic net as visible transition indices, by plain
/// depth-first token play without memoization.
pub fn net_runs(net: &PetriNet) -> BTreeSet<Vec<usize>> {
    fn go(net: &PetriNet, m: &mut Vec<u32>, fin: &[u32], cur: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if m == fin {
            out.insert(cur.clone());
        }
        for (ti, t) in net.transitions().iter().enumerate() {
            if !t.inputs.iter().all(|&p| m[p] > 0) {
                continue;
            }
            for &p in &t.inputs {
                m[p] -= 1;
            }
            for &p in &t.outputs {
                m[p] += 1;
            }
            let visible = t.label.is_some();
            if visible {
                cur.push(ti);
            }
            go(net, m, fin, cur, out);
            if visible {
                cur.pop();
            }
            for &p in &t.outputs {
                m[p] -= 1;
            }
            for &p in &t.inputs {
                m[p] += 1;
            }
        }
    }
    let mut m = net.initial_marking().0;
    let fin = net.final_marking().0;
    let mut out = BTreeSet::new();
    go(net, &mut m, &fin, &mut Vec::new(), &mut out);
    out
}

pub fn net_words(net: &PetriNet) -> BTreeSet<Vec<String>> {
    net_runs(net)
        .into_iter()
        .map(|run| {
            run.into_iter()
                .map(|t| net.transitions()[t].label.clone().expect("visible"))
                .collect()
        })
        .collect()
}

/// Straightforward directly-follows counts of one crisp sequence.
pub fn classic_dfg(labels: &[String]) -> (BTreeMap<String, u64>, BTreeMap<(String, String), u64>) {
    let mut acts = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        *acts.entry(l.clone()).or_insert(0u64) += 1;
        if i + 1 < labels.len() {
            *edges.entry((l.clone(), labels[i + 1].clone())).or_insert(0u64) += 1;
        }
    }
    (acts, edges)
}

/// The events of a crisp trace read in timestamp order.
pub fn sorted_labels(trace: &UncertainTrace) -> Vec<String> {
    let mut evs: Vec<_> = trace
        .events
        .iter()
        .map(|e| match (&e.timestamp, &e.activity) {
            (TimestampInfo::Certain(t), ActivityInfo::Certain(l)) => (*t, l.clone()),
            _ => panic!("not a crisp event"),
        })
        .collect();
    evs.sort();
    evs.into_iter().map(|(_, l)| l).collect()
}

pub type CountBounds<K> = BTreeMap<K, (u64, u64)>;

fn bounds_of<K: Ord + Clone>(per_run: &[BTreeMap<K, u64>]) -> CountBounds<K> {
    let keys: BTreeSet<K> = per_run.iter().flat_map(|m| m.keys().cloned()).collect();
    keys.into_iter()
        .map(|k| {
            let counts: Vec<u64> = per_run.iter().map(|m| m.get(&k).copied().unwrap_or(0)).collect();
            let min = *counts.iter().min().unwrap();
            let max = *counts.iter().max().unwrap();
            (k, (min, max))
        })
        .collect()
}

fn add_bounds<K: Ord>(acc: &mut CountBounds<K>, part: CountBounds<K>) {
    for (k, (lo, hi)) in part {
        let e = acc.entry(k).or_insert((0, 0));
        e.0 += lo;
        e.1 += hi;
    }
}

/// UDFG bounds from brute-force realizations.
pub fn oracle_udfg(
    log: &UncertainLog,
    mass: SupportMass,
) -> (CountBounds<String>, CountBounds<(String, String)>) {
    let mut acts = CountBounds::new();
    let mut edges = CountBounds::new();
    for t in &log.traces {
        let (a, e): (Vec<_>, Vec<_>) = oracle_realizations(t, mass)
            .iter()
            .map(|run| classic_dfg(&run.iter().map(|(_, l)| l.clone()).collect::<Vec<_>>()))
            .unzip();
        add_bounds(&mut acts, bounds_of(&a));
        add_bounds(&mut edges, bounds_of(&e));
    }
    (acts, edges)
}

fn lcs(a: &[String], b: &[String]) -> usize {
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            dp[i][j] = if a[i - 1] == b[j - 1] {
                dp[i - 1][j - 1] + 1
            } else {
                dp[i - 1][j].max(dp[i][j - 1])
            };
        }
    }
    dp[a.len()][b.len()]
}

/// Optimal alignment cost with unit log and visible model moves: the
/// cheapest insert/delete edit towards any word of the model.
pub fn oracle_alignment_cost(sequence: &[String], words: &BTreeSet<Vec<String>>) -> u64 {
    words
        .iter()
        .map(|w| (sequence.len() + w.len() - 2 * lcs(sequence, w)) as u64)
        .min()
        .expect("model has a complete run")
}

/// Min and max alignment cost over the brute-force realizations.
pub fn oracle_conformance(trace: &UncertainTrace, model: &PetriNet, mass: SupportMass) -> (u64, u64) {
    let words = net_words(model);
    let costs: Vec<u64> = oracle_realizations(trace, mass)
        .iter()
        .map(|run| oracle_alignment_cost(&run.iter().map(|(_, l)| l.clone()).collect::<Vec<_>>(), &words))
        .collect();
    (*costs.iter().min().unwrap(), *costs.iter().max().unwrap())
}

/// Upper tail of the standard normal by composite Simpson quadrature.
pub fn normal_upper_tail(z: f64) -> f64 {
    let n = 20_000;
    let h = z / n as f64;
    let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for i in 1..n {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 - s * h / 3.0
}

// ---------------------------------------------------------------------------
// DOT

/// Structure recovered from a DOT document.
#[derive(Debug, Default)]
pub struct Dot {
    pub name: String,
    pub nodes: BTreeSet<String>,
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Punct(char),
    Arrow,
}

fn dot_tokens(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => {
                        let next = *chars.get(i + 1).ok_or("dangling escape")?;
                        if next != '"' && next != '\\' {
                            s.push('\\');
                        }
                        s.push(next);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Id(s));
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Tok::Arrow);
            i += 2;
        } else if "{}[];=,".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || "_.-".contains(chars[i])) {
                if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                    break;
                }
                i += 1;
            }
            out.push(Tok::Id(chars[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

/// Checks a `digraph` document: balanced braces, well-formed statements and
/// attribute lists, and edges only between declared nodes.
pub fn parse_dot(src: &str) -> Result<Dot, String> {
    let toks = dot_tokens(src)?;
    let mut pos = 0;
    let next = |pos: &mut usize| -> Result<Tok, String> {
        let t = toks.get(*pos).cloned().ok_or("unexpected end")?;
        *pos += 1;
        Ok(t)
    };
    let expect = |pos: &mut usize, c: char| -> Result<(), String> {
        match toks.get(*pos) {
            Some(Tok::Punct(p)) if *p == c => {
                *pos += 1;
                Ok(())
            }
            other => Err(format!("expected {c:?}, found {other:?}")),
        }
    };
    let mut dot = Dot::default();
    match next(&mut pos)? {
        Tok::Id(k) if k == "digraph" => {}
        other => return Err(format!("expected digraph, found {other:?}")),
    }
    if let Some(Tok::Id(name)) = toks.get(pos) {
        dot.name = name.clone();
        pos += 1;
    }
    expect(&mut pos, '{')?;
    let attr_list = |pos: &mut usize| -> Result<(), String> {
        expect(pos, '[')?;
        loop {
            match next(pos)? {
                Tok::Punct(']') => return Ok(()),
                Tok::Id(_) => {
                    expect(pos, '=')?;
                    match next(pos)? {
                        Tok::Id(_) => {}
                        other => return Err(format!("bad attribute value {other:?}")),
                    }
                    if let Some(Tok::Punct(',' | ';')) = toks.get(*pos) {
                        *pos += 1;
                    }
                }
                other => return Err(format!("bad attribute list at {other:?}")),
            }
        }
    };
    loop {
        match next(&mut pos)? {
            Tok::Punct('}') => break,
            Tok::Punct(';') => continue,
            Tok::Id(id) => match toks.get(pos) {
                Some(Tok::Punct('=')) => {
                    pos += 1;
                    match next(&mut pos)? {
                        Tok::Id(_) => {}
                        other => return Err(format!("bad graph attribute {other:?}")),
                    }
                }
                Some(Tok::Punct('[')) if matches!(id.as_str(), "graph" | "node" | "edge") => {
                    attr_list(&mut pos)?;
                }
                Some(Tok::Arrow) => {
                    pos += 1;
                    let to = match next(&mut pos)? {
                        Tok::Id(to) => to,
                        other => return Err(format!("bad edge target {other:?}")),
                    };
                    if let Some(Tok::Punct('[')) = toks.get(pos) {
                        attr_list(&mut pos)?;
                    }
                    dot.edges.push((id, to));
                }
                _ => {
                    if let Some(Tok::Punct('[')) = toks.get(pos) {
                        attr_list(&mut pos)?;
                    }
                    dot.nodes.insert(id);
                }
            },
            other => return Err(format!("unexpected {other:?}")),
        }
    }
    if pos != toks.len() {
        return Err("content after closing brace".into());
    }
    for (a, b) in &dot.edges {
        if !dot.nodes.contains(a) || !dot.nodes.contains(b) {
            return Err(format!("edge {a} -> {b} uses an undeclared node"));
        }
    }
    Ok(dot)
}
