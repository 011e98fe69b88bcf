//! Behavior nets: workflow nets whose complete firing sequences are the
//! realizations of an uncertain trace.
//!
//! Each behavior-graph edge becomes a place between the two events. Every
//! event is an exclusive choice between one transition per possible label
//! and, if the event is indeterminate, a silent skip. Minimal events hang
//! off a silent start transition and maximal events feed a silent end
//! transition, giving a single source place `i` and sink place `o`.
//! Events that are unordered in the graph share no place.

use crate::behavior_graph::BehaviorGraph;
use crate::petri::{Arc, PetriNet};

pub const SOURCE_PLACE: &str = "i";
pub const SINK_PLACE: &str = "o";

pub fn to_behavior_net(bg: &BehaviorGraph) -> PetriNet {
    let mut net = PetriNet::new();
    let source = net.add_place(SOURCE_PLACE);
    net.set_initial(source, 1);
    if bg.is_empty() {
        net.set_final(source, 1);
        return net;
    }
    let sink = net.add_place(SINK_PLACE);
    net.set_final(sink, 1);

    let nodes = bg.nodes();
    let mut inputs: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut outputs: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for &(u, v) in bg.edges() {
        let p = net.add_place(format!("{}->{}", nodes[u].event_id, nodes[v].event_id));
        outputs[u].push(p);
        inputs[v].push(p);
    }

    let start = net.add_transition("tau:start", None);
    net.add_arc(Arc::PlaceToTransition(source, start));
    let end = net.add_transition("tau:end", None);
    net.add_arc(Arc::TransitionToPlace(end, sink));
    for (v, node) in nodes.iter().enumerate() {
        if inputs[v].is_empty() {
            let p = net.add_place(format!("start:{}", node.event_id));
            net.add_arc(Arc::TransitionToPlace(start, p));
            inputs[v].push(p);
        }
        if outputs[v].is_empty() {
            let p = net.add_place(format!("end:{}", node.event_id));
            net.add_arc(Arc::PlaceToTransition(p, end));
            outputs[v].push(p);
        }
    }

    for (v, node) in nodes.iter().enumerate() {
        let mut cluster: Vec<usize> = node
            .activity
            .labels()
            .into_iter()
            .map(|label| {
                net.add_transition(format!("t:{}:{}", node.event_id, label), Some(label.to_string()))
            })
            .collect();
        if node.indeterminacy.is_indeterminate() {
            cluster.push(net.add_transition(format!("skip:{}", node.event_id), None));
        }
        for t in cluster {
            for &p in &inputs[v] {
                net.add_arc(Arc::PlaceToTransition(p, t));
            }
            for &p in &outputs[v] {
                net.add_arc(Arc::TransitionToPlace(t, p));
            }
        }
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior_graph::build_optimized;
    use crate::fixtures::strong_trace;
    use crate::model::{ActivityInfo, SupportMass, UncertainEvent, UncertainTrace};
    use crate::petri::{check_soundness, fire_sequences};
    use crate::time::Time;

    fn net_of(trace: &UncertainTrace) -> PetriNet {
        to_behavior_net(&build_optimized(trace, SupportMass::DEFAULT))
    }

    #[test]
    fn strong_trace_net() {
        let net = net_of(&strong_trace());
        net.check().unwrap();
        assert!(net.is_acyclic());
        // 1 + 2 + 1 visible, 1 skip, start and end
        assert_eq!(net.transitions().len(), 7);
        assert_eq!(net.transitions().iter().filter(|t| t.is_silent()).count(), 3);
        let lang = fire_sequences(&net, 100).unwrap();
        assert_eq!(lang.len(), 10);
        assert!(check_soundness(&net, 1000).unwrap().is_sound());
    }

    #[test]
    fn single_certain_event() {
        let tr = UncertainTrace::new("c", vec![UncertainEvent::certain("a", Time::from_int(1), "A")]);
        let net = net_of(&tr);
        assert_eq!(net.transitions().iter().filter(|t| !t.is_silent()).count(), 1);
        let lang = fire_sequences(&net, 10).unwrap();
        assert_eq!(lang.into_iter().collect::<Vec<_>>(), vec![vec!["A".to_string()]]);
    }

    #[test]
    fn label_set_is_exclusive_choice() {
        let mut ev = UncertainEvent::certain("a", Time::from_int(1), "A");
        ev.activity = ActivityInfo::Set(["A".to_string(), "B".to_string()].into());
        let net = net_of(&UncertainTrace::new("c", vec![ev]));
        let visible: Vec<_> = net.transitions().iter().filter(|t| !t.is_silent()).collect();
        assert_eq!(visible.len(), 2);
        assert_eq!(visible[0].inputs, visible[1].inputs);
        assert_eq!(visible[0].outputs, visible[1].outputs);
        let lang = fire_sequences(&net, 10).unwrap();
        assert_eq!(
            lang.into_iter().collect::<Vec<_>>(),
            vec![vec!["A".to_string()], vec!["B".to_string()]]
        );
    }

    #[test]
    fn empty_trace_net() {
        let net = net_of(&UncertainTrace::new("c", vec![]));
        assert_eq!(net.initial_marking(), net.final_marking());
        assert_eq!(fire_sequences(&net, 10).unwrap().len(), 1);
    }
}
