//! Behavior graphs: the precedence partial order among a trace's events,
//! transitively reduced.
//!
//! Event `a` precedes `b` when every possible timestamp of `a` is strictly
//! before every possible timestamp of `b`. Overlapping (or touching) supports
//! leave the pair unordered. Indeterminate events stay in the graph.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::model::{support, ActivityInfo, IndeterminacyInfo, SupportMass, UncertainEvent, UncertainTrace};
use crate::reduction::IndexDag;
use crate::time::Time;

#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorNode {
    pub event_id: String,
    pub activity: ActivityInfo,
    pub indeterminacy: IndeterminacyInfo,
    /// Effective support of the event's timestamp.
    pub support: (Time, Time),
}

/// Nodes follow the trace's storage order; edges are index pairs into
/// `nodes`.
#[derive(Clone, Debug, PartialEq)]
pub struct BehaviorGraph {
    case_id: String,
    nodes: Vec<BehaviorNode>,
    edges: BTreeSet<(usize, usize)>,
}

pub fn strictly_precedes(a: &UncertainEvent, b: &UncertainEvent, mass: SupportMass) -> bool {
    support(&a.timestamp, mass).1 < support(&b.timestamp, mass).0
}

fn nodes_of(trace: &UncertainTrace, mass: SupportMass) -> Vec<BehaviorNode> {
    trace
        .events
        .iter()
        .map(|e| BehaviorNode {
            event_id: e.id.clone(),
            activity: e.activity.clone(),
            indeterminacy: e.indeterminacy,
            support: support(&e.timestamp, mass),
        })
        .collect()
}

/// Pairwise scan over all events followed by a generic transitive reduction.
pub fn build_baseline(trace: &UncertainTrace, mass: SupportMass) -> BehaviorGraph {
    let nodes = nodes_of(trace, mass);
    let n = nodes.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if nodes[i].support.1 < nodes[j].support.0 {
                pairs.push((i, j));
            }
        }
    }
    let (_, kept) = IndexDag::new(n, pairs)
        .reduce()
        .expect("strict interval precedence is acyclic");
    BehaviorGraph {
        case_id: trace.case_id.clone(),
        nodes,
        edges: kept.into_iter().collect(),
    }
}

/// Builds the reduced graph directly in `O(n log n + |E|)`.
///
/// With events sorted by support end, the predecessors of `v` are a prefix
/// (ends before `v` starts). A predecessor `u` is immediate iff no other
/// predecessor starts after `u` ends, i.e. `hi(u) >= max lo` over the prefix.
/// Those form a suffix of the prefix, found by binary search.
pub fn build_optimized(trace: &UncertainTrace, mass: SupportMass) -> BehaviorGraph {
    let nodes = nodes_of(trace, mass);
    let mut by_hi: Vec<usize> = (0..nodes.len()).collect();
    by_hi.sort_by_key(|&i| nodes[i].support.1);
    let his: Vec<Time> = by_hi.iter().map(|&i| nodes[i].support.1).collect();
    // prefix_max_lo[k] = max lo among by_hi[..k]
    let mut prefix_max_lo = Vec::with_capacity(nodes.len() + 1);
    prefix_max_lo.push(Time::from_units(i64::MIN));
    for &i in &by_hi {
        let last = *prefix_max_lo.last().expect("seeded");
        prefix_max_lo.push(last.max(nodes[i].support.0));
    }
    let mut edges = BTreeSet::new();
    for (v, node) in nodes.iter().enumerate() {
        let k = his.partition_point(|&hi| hi < node.support.0);
        if k == 0 {
            continue;
        }
        let frontier = prefix_max_lo[k];
        let start = his[..k].partition_point(|&hi| hi < frontier);
        for &u in &by_hi[start..k] {
            edges.insert((u, v));
        }
    }
    BehaviorGraph {
        case_id: trace.case_id.clone(),
        nodes,
        edges,
    }
}

impl BehaviorGraph {
    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn nodes(&self) -> &[BehaviorNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, event_id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.event_id == event_id)
    }

    /// Edges as event id pairs.
    pub fn edge_ids(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(u, v)| (self.nodes[u].event_id.clone(), self.nodes[v].event_id.clone()))
            .collect()
    }

    pub fn predecessors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == v).map(|e| e.0)
    }

    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((u, 0)..=(u, usize::MAX)).map(|e| e.1)
    }

    /// `reach[u]` holds every node reachable from `u` by a non-empty path.
    pub fn reachability(&self) -> Vec<FixedBitSet> {
        IndexDag::new(self.nodes.len(), self.edges.iter().copied())
            .reduce()
            .expect("behavior graphs are acyclic")
            .0
    }
}
