//! Place/transition nets with unit arc weights.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    /// `None` for silent transitions.
    pub label: Option<String>,
    /// Sorted place indices.
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arc {
    PlaceToTransition(usize, usize),
    TransitionToPlace(usize, usize),
}

/// Token count per place, indexed like [`PetriNet::places`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub Vec<u32>);

impl Marking {
    pub fn empty(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn tokens(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Every place holds at least as many tokens as in `other`.
    pub fn covers(&self, other: &Marking) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PetriNet {
    places: Vec<String>,
    transitions: Vec<Transition>,
    initial: Vec<(usize, u32)>,
    final_: Vec<(usize, u32)>,
}

impl PetriNet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_place(&mut self, id: impl Into<String>) -> usize {
        self.places.push(id.into());
        self.places.len() - 1
    }

    pub fn add_transition(&mut self, id: impl Into<String>, label: Option<String>) -> usize {
        self.transitions.push(Transition {
            id: id.into(),
            label,
            inputs: Vec::new(),
            outputs: Vec::new(),
        });
        self.transitions.len() - 1
    }

    pub fn add_arc(&mut self, arc: Arc) {
        match arc {
            Arc::PlaceToTransition(p, t) => insert_sorted(&mut self.transitions[t].inputs, p),
            Arc::TransitionToPlace(t, p) => insert_sorted(&mut self.transitions[t].outputs, p),
        }
    }

    pub fn set_initial(&mut self, place: usize, tokens: u32) {
        set_tokens(&mut self.initial, place, tokens);
    }

    pub fn set_final(&mut self, place: usize, tokens: u32) {
        set_tokens(&mut self.final_, place, tokens);
    }

    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn place_index(&self, id: &str) -> Option<usize> {
        self.places.iter().position(|p| p == id)
    }

    pub fn transition_index(&self, id: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.id == id)
    }

    pub fn arcs(&self) -> BTreeSet<Arc> {
        let mut arcs = BTreeSet::new();
        for (t, tr) in self.transitions.iter().enumerate() {
            arcs.extend(tr.inputs.iter().map(|&p| Arc::PlaceToTransition(p, t)));
            arcs.extend(tr.outputs.iter().map(|&p| Arc::TransitionToPlace(t, p)));
        }
        arcs
    }

    pub fn initial_marking(&self) -> Marking {
        self.marking_of(&self.initial)
    }

    pub fn final_marking(&self) -> Marking {
        self.marking_of(&self.final_)
    }

    /// Place/token pairs with a positive count, in place order.
    pub fn initial_tokens(&self) -> Vec<(usize, u32)> {
        self.initial.clone()
    }

    pub fn final_tokens(&self) -> Vec<(usize, u32)> {
        self.final_.clone()
    }

    fn marking_of(&self, tokens: &[(usize, u32)]) -> Marking {
        let mut m = Marking::empty(self.places.len());
        for &(p, n) in tokens {
            m.0[p] = n;
        }
        m
    }

    /// Visible labels, ascending.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.transitions.iter().filter_map(|t| t.label.as_deref()).collect()
    }

    pub fn is_enabled(&self, m: &Marking, t: usize) -> bool {
        self.transitions[t].inputs.iter().all(|&p| m.0[p] > 0)
    }

    pub fn enabled(&self, m: &Marking) -> impl Iterator<Item = usize> + '_ {
        let m = m.clone();
        (0..self.transitions.len()).filter(move |&t| self.is_enabled(&m, t))
    }

    /// The marking after firing `t`; the caller checks enablement.
    pub fn fire(&self, m: &Marking, t: usize) -> Marking {
        let mut next = m.clone();
        let tr = &self.transitions[t];
        for &p in &tr.inputs {
            next.0[p] -= 1;
        }
        for &p in &tr.outputs {
            next.0[p] += 1;
        }
        next
    }

    /// Structural checks: unique ids and non-empty pre- and postsets.
    pub fn check(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for p in &self.places {
            if !seen.insert(p.as_str()) {
                return Err(Error::MalformedNet(format!("duplicate place id {p:?}")));
            }
        }
        let mut seen = HashSet::new();
        for t in &self.transitions {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::MalformedNet(format!("duplicate transition id {:?}", t.id)));
            }
            if t.inputs.is_empty() || t.outputs.is_empty() {
                return Err(Error::MalformedNet(format!(
                    "transition {:?} needs at least one input and one output place",
                    t.id
                )));
            }
        }
        Ok(())
    }

    /// No directed cycle through places and transitions.
    pub fn is_acyclic(&self) -> bool {
        // places are 0..P, transitions P..P+T
        let np = self.places.len();
        let n = np + self.transitions.len();
        let mut succ = vec![Vec::new(); n];
        for (t, tr) in self.transitions.iter().enumerate() {
            for &p in &tr.inputs {
                succ[p].push(np + t);
            }
            for &p in &tr.outputs {
                succ[np + t].push(p);
            }
        }
        crate::reduction::IndexDag { succ }.topological_order().is_ok()
    }
}

fn insert_sorted(places: &mut Vec<usize>, p: usize) {
    if let Err(pos) = places.binary_search(&p) {
        places.insert(pos, p);
    }
}

fn set_tokens(tokens: &mut Vec<(usize, u32)>, place: usize, n: u32) {
    tokens.retain(|&(p, _)| p != place);
    if n > 0 {
        tokens.push((place, n));
        tokens.sort_unstable();
    }
}

type Language = BTreeSet<Vec<String>>;

/// Every complete firing sequence from the initial to the final marking,
/// with silent transitions erased and duplicates removed.
pub fn fire_sequences(net: &PetriNet, max_count: usize) -> Result<Language> {
    if !net.is_acyclic() {
        return Err(Error::CyclicNet);
    }
    let mut memo: HashMap<Marking, Rc<Language>> = HashMap::new();
    let lang = language_from(net, &net.initial_marking(), &net.final_marking(), max_count, &mut memo)?;
    Ok(Rc::try_unwrap(lang).unwrap_or_else(|rc| (*rc).clone()))
}

fn language_from(
    net: &PetriNet,
    m: &Marking,
    target: &Marking,
    max_count: usize,
    memo: &mut HashMap<Marking, Rc<Language>>,
) -> Result<Rc<Language>> {
    if let Some(l) = memo.get(m) {
        return Ok(l.clone());
    }
    let mut lang = Language::new();
    if m == target {
        lang.insert(Vec::new());
    }
    for t in net.enabled(m).collect::<Vec<_>>() {
        let next = net.fire(m, t);
        let tail = language_from(net, &next, target, max_count, memo)?;
        match &net.transitions[t].label {
            None => lang.extend(tail.iter().cloned()),
            Some(label) => lang.extend(tail.iter().map(|s| {
                let mut seq = Vec::with_capacity(s.len() + 1);
                seq.push(label.clone());
                seq.extend(s.iter().cloned());
                seq
            })),
        }
        // any suffix set reached from the initial marking embeds injectively
        // into the full language, so it may not exceed the bound either
        if lang.len() > max_count {
            return Err(Error::TooManySequences { limit: max_count });
        }
    }
    let lang = Rc::new(lang);
    memo.insert(m.clone(), lang.clone());
    Ok(lang)
}

/// Outcome of an exhaustive reachability check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Soundness {
    pub reachable_markings: usize,
    /// Every reachable marking can still reach the final marking.
    pub option_to_complete: bool,
    /// No reachable marking strictly covers the final marking.
    pub proper_completion: bool,
    /// Ids of transitions that never fire.
    pub dead_transitions: Vec<String>,
}

impl Soundness {
    pub fn is_sound(&self) -> bool {
        self.option_to_complete && self.proper_completion && self.dead_transitions.is_empty()
    }
}

pub fn check_soundness(net: &PetriNet, max_states: usize) -> Result<Soundness> {
    let init = net.initial_marking();
    let fin = net.final_marking();
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
    index.insert(init, 0);
    let mut fired = vec![false; net.transitions.len()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let m = states[s].clone();
        for t in net.enabled(&m).collect::<Vec<_>>() {
            fired[t] = true;
            let next = net.fire(&m, t);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= max_states {
                        return Err(Error::StateBoundExceeded { max_states });
                    }
                    let id = states.len();
                    index.insert(next.clone(), id);
                    states.push(next);
                    preds.push(Vec::new());
                    queue.push_back(id);
                    id
                }
            };
            preds[id].push(s);
        }
    }
    let mut can_finish = vec![false; states.len()];
    let mut stack: Vec<usize> = index.get(&fin).into_iter().copied().collect();
    for &s in &stack {
        can_finish[s] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &preds[s] {
            if !can_finish[p] {
                can_finish[p] = true;
                stack.push(p);
            }
        }
    }
    Ok(Soundness {
        reachable_markings: states.len(),
        option_to_complete: can_finish.iter().all(|&b| b),
        proper_completion: !states.iter().any(|m| m != &fin && m.covers(&fin)),
        dead_transitions: net
            .transitions
            .iter()
            .zip(&fired)
            .filter(|(_, &f)| !f)
            .map(|(t, _)| t.id.clone())
            .collect(),
    })
}

/// A sequential workflow net firing `labels` in order.
pub fn sequence_net(labels: &[&str]) -> PetriNet {
    let mut net = PetriNet::new();
    let mut prev = net.add_place("p0");
    net.set_initial(prev, 1);
    for (i, label) in labels.iter().enumerate() {
        let t = net.add_transition(format!("t{i}"), Some(label.to_string()));
        let next = net.add_place(format!("p{}", i + 1));
        net.add_arc(Arc::PlaceToTransition(prev, t));
        net.add_arc(Arc::TransitionToPlace(t, next));
        prev = next;
    }
    net.set_final(prev, 1);
    net
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(lang: &Language) -> Vec<String> {
        lang.iter().map(|s| s.join(",")).collect()
    }

    #[test]
    fn empty_net_accepts_empty_sequence() {
        let mut net = PetriNet::new();
        let p = net.add_place("p");
        net.set_initial(p, 1);
        net.set_final(p, 1);
        let lang = fire_sequences(&net, 10).unwrap();
        assert_eq!(lang.len(), 1);
        assert!(lang.contains(&Vec::<String>::new()));
    }

    #[test]
    fn chain_has_one_sequence() {
        let net = sequence_net(&["A", "B", "C"]);
        assert_eq!(seqs(&fire_sequences(&net, 10).unwrap()), ["A,B,C"]);
        assert!(check_soundness(&net, 100).unwrap().is_sound());
    }

    #[test]
    fn parallel_split_interleaves() {
        let mut net = PetriNet::new();
        let i = net.add_place("i");
        let a_in = net.add_place("a_in");
        let b_in = net.add_place("b_in");
        let a_out = net.add_place("a_out");
        let b_out = net.add_place("b_out");
        let o = net.add_place("o");
        let split = net.add_transition("split", None);
        let a = net.add_transition("a", Some("A".into()));
        let b = net.add_transition("b", Some("B".into()));
        let join = net.add_transition("join", None);
        net.add_arc(Arc::PlaceToTransition(i, split));
        net.add_arc(Arc::TransitionToPlace(split, a_in));
        net.add_arc(Arc::TransitionToPlace(split, b_in));
        net.add_arc(Arc::PlaceToTransition(a_in, a));
        net.add_arc(Arc::TransitionToPlace(a, a_out));
        net.add_arc(Arc::PlaceToTransition(b_in, b));
        net.add_arc(Arc::TransitionToPlace(b, b_out));
        net.add_arc(Arc::PlaceToTransition(a_out, join));
        net.add_arc(Arc::PlaceToTransition(b_out, join));
        net.add_arc(Arc::TransitionToPlace(join, o));
        net.set_initial(i, 1);
        net.set_final(o, 1);
        assert_eq!(seqs(&fire_sequences(&net, 10).unwrap()), ["A,B", "B,A"]);
        assert!(matches!(
            fire_sequences(&net, 1),
            Err(Error::TooManySequences { limit: 1 })
        ));
        let s = check_soundness(&net, 100).unwrap();
        assert!(s.is_sound());
        assert_eq!(s.reachable_markings, 6);
    }

    #[test]
    fn cyclic_net_is_rejected() {
        let mut net = PetriNet::new();
        let p = net.add_place("p");
        let t = net.add_transition("t", Some("A".into()));
        net.add_arc(Arc::PlaceToTransition(p, t));
        net.add_arc(Arc::TransitionToPlace(t, p));
        net.set_initial(p, 1);
        net.set_final(p, 1);
        assert!(!net.is_acyclic());
        assert_eq!(fire_sequences(&net, 10), Err(Error::CyclicNet));
    }

    #[test]
    fn unsound_net_detected() {
        // choice where one branch deadlocks
        let mut net = PetriNet::new();
        let i = net.add_place("i");
        let o = net.add_place("o");
        let stuck = net.add_place("stuck");
        let dead_in = net.add_place("never");
        let a = net.add_transition("a", Some("A".into()));
        let b = net.add_transition("b", Some("B".into()));
        let c = net.add_transition("c", Some("C".into()));
        net.add_arc(Arc::PlaceToTransition(i, a));
        net.add_arc(Arc::TransitionToPlace(a, o));
        net.add_arc(Arc::PlaceToTransition(i, b));
        net.add_arc(Arc::TransitionToPlace(b, stuck));
        net.add_arc(Arc::PlaceToTransition(dead_in, c));
        net.add_arc(Arc::TransitionToPlace(c, o));
        net.set_initial(i, 1);
        net.set_final(o, 1);
        let s = check_soundness(&net, 100).unwrap();
        assert!(!s.option_to_complete);
        assert_eq!(s.dead_transitions, ["c"]);
        assert!(!s.is_sound());
    }

    #[test]
    fn structural_check() {
        let mut net = PetriNet::new();
        let p = net.add_place("p");
        net.add_transition("t", None);
        net.set_initial(p, 1);
        assert!(matches!(net.check(), Err(Error::MalformedNet(_))));
        net.add_place("p");
        assert!(net.check().is_err());
        assert!(sequence_net(&["A"]).check().is_ok());
    }
}
