//! Graphviz DOT rendering.

use std::fmt::Write;

use crate::behavior_graph::BehaviorGraph;
use crate::discovery::{Bounds, Udfg};
use crate::model::{ActivityInfo, IndeterminacyInfo};
use crate::petri::PetriNet;

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// `PrTP`, `{PrTP, SecTP}` or `{PrTP: 0.9, SecTP: 0.1}`.
pub fn activity_descriptor(a: &ActivityInfo) -> String {
    match a {
        ActivityInfo::Certain(l) => l.clone(),
        ActivityInfo::Set(s) => format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", ")),
        ActivityInfo::Pmf(m) => format!(
            "{{{}}}",
            m.iter().map(|(l, p)| format!("{l}: {p}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn indeterminacy_marker(i: IndeterminacyInfo) -> String {
    match i {
        IndeterminacyInfo::Determinate => String::new(),
        IndeterminacyInfo::Indeterminate => " ?".into(),
        IndeterminacyInfo::Probable { p_absent } => format!(" ?: {p_absent}"),
    }
}

/// One box per event (dashed when indeterminate), one arrow per edge.
pub fn behavior_graph_dot(bg: &BehaviorGraph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", esc(bg.case_id())).unwrap();
    out.push_str("  rankdir=LR;\n  node [shape=box];\n");
    for node in bg.nodes() {
        let label = format!(
            "{}\n{}{}",
            node.event_id,
            activity_descriptor(&node.activity),
            indeterminacy_marker(node.indeterminacy)
        );
        let style = if node.indeterminacy.is_indeterminate() { ", style=dashed" } else { "" };
        writeln!(out, "  {} [label={}{style}];", esc(&node.event_id), esc(&label)).unwrap();
    }
    for (u, v) in bg.edge_ids() {
        writeln!(out, "  {} -> {};", esc(&u), esc(&v)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Places as circles, visible transitions as labelled boxes, silent
/// transitions as filled black boxes. Marked places show their tokens.
pub fn petri_net_dot(net: &PetriNet, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", esc(name)).unwrap();
    out.push_str("  rankdir=LR;\n");
    let initial = net.initial_marking();
    let fin = net.final_marking();
    for (i, p) in net.places().iter().enumerate() {
        let tokens = initial.0[i];
        let label = if tokens > 0 { tokens.to_string() } else { String::new() };
        let extra = if fin.0[i] > 0 { ", peripheries=2" } else { "" };
        writeln!(out, "  {} [shape=circle, label={}{extra}];", esc(&format!("p:{p}")), esc(&label)).unwrap();
    }
    for t in net.transitions() {
        let id = esc(&format!("t:{}", t.id));
        match &t.label {
            Some(l) => writeln!(out, "  {id} [shape=box, label={}];", esc(l)).unwrap(),
            None => writeln!(out, "  {id} [shape=box, style=filled, fillcolor=black, label=\"\", width=0.15];").unwrap(),
        }
    }
    for t in net.transitions() {
        let tid = esc(&format!("t:{}", t.id));
        for &p in &t.inputs {
            writeln!(out, "  {} -> {tid};", esc(&format!("p:{}", net.places()[p]))).unwrap();
        }
        for &p in &t.outputs {
            writeln!(out, "  {tid} -> {};", esc(&format!("p:{}", net.places()[p]))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

fn bounds_label(b: &Bounds) -> String {
    match b.expected {
        Some(e) => format!("{}-{} ~{e:.3}", b.min, b.max),
        None => format!("{}-{}", b.min, b.max),
    }
}

/// Activities labelled with their bounds; edges labelled `min-max` and
/// `~expected` when known.
pub fn udfg_dot(u: &Udfg) -> String {
    let mut out = String::new();
    out.push_str("digraph udfg {\n  rankdir=LR;\n  node [shape=box];\n");
    for (a, b) in &u.activities {
        writeln!(out, "  {} [label={}];", esc(a), esc(&format!("{a}\n{}", bounds_label(b)))).unwrap();
    }
    for ((a, c), b) in &u.edges {
        writeln!(out, "  {} -> {} [label={}];", esc(a), esc(c), esc(&bounds_label(b))).unwrap();
    }
    out.push_str("}\n");
    out
}
