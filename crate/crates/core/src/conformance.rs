//! Alignment-based conformance bounds for uncertain traces.
//!
//! Every realization is aligned against the model with an A* search over the
//! synchronous product (unit costs: log moves and visible model moves cost 1,
//! synchronous and silent moves cost 0). The bounds are the cheapest and the
//! most expensive optimal alignment over all realizations.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SupportMass, UncertainTrace};
use crate::petri::{Marking, PetriNet};
use crate::realizations::{
    enumerate, ProbabilityConfig, ProbabilityModel, Realization, DEFAULT_MAX_REALIZATIONS,
};

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Move {
    Log { label: String },
    Model { transition: String, label: Option<String> },
    Sync { transition: String, label: String },
}

impl Move {
    pub fn cost(&self) -> u64 {
        match self {
            Move::Log { .. } => 1,
            Move::Model { label: Some(_), .. } => 1,
            Move::Model { label: None, .. } | Move::Sync { .. } => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlignmentResult {
    pub cost: u64,
    pub moves: Vec<Move>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformanceConfig {
    pub max_states: usize,
    pub max_realizations: usize,
    pub support_mass: SupportMass,
    /// Adds the expected cost when set and the trace is probabilizable.
    pub probability: Option<ProbabilityConfig>,
}

impl Default for ConformanceConfig {
    fn default() -> Self {
        ConformanceConfig {
            max_states: DEFAULT_MAX_STATES,
            max_realizations: DEFAULT_MAX_REALIZATIONS,
            support_mass: SupportMass::DEFAULT,
            probability: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct State {
    marking: Marking,
    position: usize,
}

#[derive(Clone, Copy)]
enum Step {
    Log,
    Model(usize),
    Sync(usize),
}

/// Optimal alignment of `sequence` against `model`.
pub fn align<S: AsRef<str>>(sequence: &[S], model: &PetriNet, cfg: &ConformanceConfig) -> Result<AlignmentResult> {
    let labels: BTreeSet<&str> = model.labels();
    // suffix_unmatched[i]: labels at positions >= i the model cannot produce;
    // each costs a log move, so this is a consistent heuristic
    let mut suffix_unmatched = vec![0u64; sequence.len() + 1];
    for i in (0..sequence.len()).rev() {
        suffix_unmatched[i] = suffix_unmatched[i + 1] + u64::from(!labels.contains(sequence[i].as_ref()));
    }
    let target = model.final_marking();
    let start = State { marking: model.initial_marking(), position: 0 };

    let mut states: Vec<State> = vec![start.clone()];
    let mut index: HashMap<State, usize> = HashMap::from([(start, 0)]);
    let mut best: Vec<u64> = vec![0];
    let mut parent: Vec<Option<(usize, Step)>> = vec![None];
    let mut closed: Vec<bool> = vec![false];
    // (f, tie-break on insertion order, state)
    let mut open = BinaryHeap::from([Reverse((suffix_unmatched[0], 0usize, 0usize))]);
    let mut pushes = 0usize;

    while let Some(Reverse((_, _, s))) = open.pop() {
        if closed[s] {
            continue;
        }
        closed[s] = true;
        let g = best[s];
        let State { marking, position } = states[s].clone();
        if position == sequence.len() && marking == target {
            return Ok(reconstruct(s, g, &parent, sequence, model));
        }
        let mut successors: Vec<(State, u64, Step)> = Vec::new();
        if position < sequence.len() {
            successors.push((State { marking: marking.clone(), position: position + 1 }, 1, Step::Log));
        }
        for t in model.enabled(&marking) {
            let next = model.fire(&marking, t);
            let tr = &model.transitions()[t];
            match &tr.label {
                None => successors.push((State { marking: next, position }, 0, Step::Model(t))),
                Some(label) => {
                    if position < sequence.len() && sequence[position].as_ref() == label {
                        successors.push((
                            State { marking: next.clone(), position: position + 1 },
                            0,
                            Step::Sync(t),
                        ));
                    }
                    successors.push((State { marking: next, position }, 1, Step::Model(t)));
                }
            }
        }
        for (state, cost, step) in successors {
            let g_next = g + cost;
            let h = suffix_unmatched[state.position];
            let id = match index.entry(state) {
                Entry::Occupied(o) => {
                    let id = *o.get();
                    if closed[id] || best[id] <= g_next {
                        continue;
                    }
                    best[id] = g_next;
                    parent[id] = Some((s, step));
                    id
                }
                Entry::Vacant(v) => {
                    if states.len() >= cfg.max_states {
                        return Err(Error::StateBoundExceeded { max_states: cfg.max_states });
                    }
                    let id = states.len();
                    states.push(v.key().clone());
                    v.insert(id);
                    best.push(g_next);
                    parent.push(Some((s, step)));
                    closed.push(false);
                    id
                }
            };
            pushes += 1;
            open.push(Reverse((g_next + h, pushes, id)));
        }
    }
    Err(Error::FinalMarkingUnreachable)
}

fn reconstruct<S: AsRef<str>>(
    mut s: usize,
    cost: u64,
    parent: &[Option<(usize, Step)>],
    sequence: &[S],
    model: &PetriNet,
) -> AlignmentResult {
    let mut steps = Vec::new();
    while let Some((prev, step)) = parent[s] {
        steps.push(step);
        s = prev;
    }
    steps.reverse();
    let mut position = 0;
    let moves = steps
        .into_iter()
        .map(|step| match step {
            Step::Log => {
                position += 1;
                Move::Log { label: sequence[position - 1].as_ref().to_string() }
            }
            Step::Model(t) => {
                let tr = &model.transitions()[t];
                Move::Model { transition: tr.id.clone(), label: tr.label.clone() }
            }
            Step::Sync(t) => {
                position += 1;
                let tr = &model.transitions()[t];
                Move::Sync {
                    transition: tr.id.clone(),
                    label: tr.label.clone().expect("sync moves are visible"),
                }
            }
        })
        .collect();
    AlignmentResult { cost, moves }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformanceBounds {
    pub case_id: String,
    pub min_cost: u64,
    pub max_cost: u64,
    pub expected_cost: Option<f64>,
    pub witness_best: Realization,
    pub witness_worst: Realization,
    pub realizations: usize,
}

/// Best-case, worst-case and expected alignment cost over every realization
/// of `trace`. Witnesses are the first realization (in enumeration order)
/// attaining each bound.
pub fn conformance_bounds(
    trace: &UncertainTrace,
    model: &PetriNet,
    cfg: &ConformanceConfig,
) -> Result<ConformanceBounds> {
    let realizations = enumerate(trace, cfg.max_realizations, cfg.support_mass)?;
    let mut costs = Vec::with_capacity(realizations.len());
    // identical label sequences from different events align identically
    let mut memo: HashMap<Vec<&str>, u64> = HashMap::new();
    for r in &realizations {
        let labels = r.labels();
        let cost = match memo.get(&labels) {
            Some(&c) => c,
            None => {
                let c = align(&labels, model, cfg)?.cost;
                memo.insert(labels, c);
                c
            }
        };
        costs.push(cost);
    }
    let (mut best, mut worst) = (0, 0);
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = i;
        }
        if c > costs[worst] {
            worst = i;
        }
    }
    let expected_cost = match cfg.probability {
        Some(pcfg) => expected(trace, &realizations, &costs, pcfg.with_support_mass(cfg.support_mass))?,
        None => None,
    };
    let expected_cost = expected_cost.map(|e| e.clamp(costs[best] as f64, costs[worst] as f64));
    Ok(ConformanceBounds {
        case_id: trace.case_id.clone(),
        min_cost: costs[best],
        max_cost: costs[worst],
        expected_cost,
        witness_best: realizations[best].clone(),
        witness_worst: realizations[worst].clone(),
        realizations: realizations.len(),
    })
}

fn expected(
    trace: &UncertainTrace,
    realizations: &[Realization],
    costs: &[u64],
    cfg: ProbabilityConfig,
) -> Result<Option<f64>> {
    let model = match ProbabilityModel::new(trace, cfg) {
        Ok(m) => m,
        Err(Error::NonProbabilizable { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut total = 0.0;
    let mut weighted = 0.0;
    for (r, &c) in realizations.iter().zip(costs) {
        let p = model.probability(r)?;
        total += p;
        weighted += p * c as f64;
    }
    // Monte Carlo mass can fall slightly short of one; renormalize
    Ok((total > 0.0).then(|| weighted / total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::strong_trace;
    use crate::model::{ActivityInfo, UncertainEvent};
    use crate::petri::{sequence_net, Arc};
    use crate::time::Time;

    fn cfg() -> ConformanceConfig {
        ConformanceConfig::default()
    }

    #[test]
    fn perfect_fit() {
        let r = align(&["A", "B"], &sequence_net(&["A", "B"]), &cfg()).unwrap();
        assert_eq!(r.cost, 0);
        assert!(r.moves.iter().all(|m| matches!(m, Move::Sync { .. })));
    }

    #[test]
    fn missing_model_move() {
        let r = align(&["A"], &sequence_net(&["A", "B"]), &cfg()).unwrap();
        assert_eq!(r.cost, 1);
        assert_eq!(r.moves.iter().map(Move::cost).sum::<u64>(), 1);
        assert!(matches!(&r.moves[1], Move::Model { label: Some(l), .. } if l == "B"));
    }

    #[test]
    fn empty_sequence_costs_every_mandatory_transition() {
        let r = align::<&str>(&[], &sequence_net(&["A", "B", "C"]), &cfg()).unwrap();
        assert_eq!(r.cost, 3);
    }

    #[test]
    fn log_moves_for_foreign_labels() {
        let r = align(&["X", "A", "Y"], &sequence_net(&["A"]), &cfg()).unwrap();
        assert_eq!(r.cost, 2);
        assert_eq!(r.moves.len(), 3);
    }

    #[test]
    fn swapped_pair_costs_two() {
        let r = align(&["B", "A"], &sequence_net(&["A", "B"]), &cfg()).unwrap();
        assert_eq!(r.cost, 2);
    }

    #[test]
    fn silent_moves_are_free() {
        let mut net = sequence_net(&["A"]);
        let last = net.place_index("p1").unwrap();
        let end = net.add_place("end");
        let tau = net.add_transition("tau", None);
        net.add_arc(Arc::PlaceToTransition(last, tau));
        net.add_arc(Arc::TransitionToPlace(tau, end));
        net.set_final(last, 0);
        net.set_final(end, 1);
        assert_eq!(align(&["A"], &net, &cfg()).unwrap().cost, 0);
    }

    #[test]
    fn unreachable_final_marking() {
        let mut net = sequence_net(&["A"]);
        let orphan = net.add_place("orphan");
        net.set_final(orphan, 1);
        assert_eq!(align(&["A"], &net, &cfg()), Err(Error::FinalMarkingUnreachable));
    }

    #[test]
    fn state_bound() {
        let small = ConformanceConfig { max_states: 2, ..cfg() };
        assert!(matches!(
            align(&["A", "B", "C"], &sequence_net(&["A", "B", "C"]), &small),
            Err(Error::StateBoundExceeded { max_states: 2 })
        ));
    }

    #[test]
    fn strong_trace_bounds() {
        let model = sequence_net(&["NightSweats", "PrTP", "Splenomeg"]);
        let b = conformance_bounds(&strong_trace(), &model, &cfg()).unwrap();
        assert_eq!(b.min_cost, 0);
        assert!(b.max_cost >= 1);
        assert_eq!(b.witness_best.labels(), ["NightSweats", "PrTP", "Splenomeg"]);
        assert_eq!(b.realizations, 10);
    }

    #[test]
    fn label_set_bounds() {
        let mut ev = UncertainEvent::certain("a", Time::from_int(1), "A");
        ev.activity = ActivityInfo::Set(["A".to_string(), "B".to_string()].into());
        let tr = UncertainTrace::new("c", vec![ev]);
        let b = conformance_bounds(&tr, &sequence_net(&["A"]), &cfg()).unwrap();
        // <B> needs a log move and a model move
        assert_eq!((b.min_cost, b.max_cost), (0, 2));
        assert_eq!(b.witness_worst.labels(), ["B"]);
    }
}
