//! Flat line-based Petri net text, used both to export behavior nets and to
//! load reference models.
//!
//! ```text
//! behaviornet-v1
//! # comments and blank lines are ignored
//! place "i"
//! place "o"
//! transition "t1" "Register"
//! transition "tau" silent
//! arc "i" "t1"
//! arc "t1" "o"
//! initial "i" 1
//! final "o" 1
//! ```
//!
//! Identifiers and labels are JSON string literals. Places and transitions
//! share one namespace, so an `arc` line is unambiguous.

use std::collections::HashMap;
use std::fmt::Write;

use crate::io::format::Diagnostic;
use crate::petri::{Arc, PetriNet};

pub const NET_HEADER: &str = "behaviornet-v1";

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

pub fn to_text(net: &PetriNet) -> String {
    let mut out = String::new();
    out.push_str(NET_HEADER);
    out.push('\n');
    for p in net.places() {
        writeln!(out, "place {}", quote(p)).unwrap();
    }
    for t in net.transitions() {
        match &t.label {
            Some(l) => writeln!(out, "transition {} {}", quote(&t.id), quote(l)).unwrap(),
            None => writeln!(out, "transition {} silent", quote(&t.id)).unwrap(),
        }
    }
    for arc in net.arcs() {
        let (from, to) = match arc {
            Arc::PlaceToTransition(p, t) => (&net.places()[p], &net.transitions()[t].id),
            Arc::TransitionToPlace(t, p) => (&net.transitions()[t].id, &net.places()[p]),
        };
        writeln!(out, "arc {} {}", quote(from), quote(to)).unwrap();
    }
    for (p, n) in net.initial_tokens() {
        writeln!(out, "initial {} {n}", quote(&net.places()[p])).unwrap();
    }
    for (p, n) in net.final_tokens() {
        writeln!(out, "final {} {n}", quote(&net.places()[p])).unwrap();
    }
    out
}

#[derive(Debug, PartialEq)]
enum Token {
    Str(String),
    Word(String),
}

fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' | b'\t' => i += 1,
            b'"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err("unterminated string".into());
                }
                let s: String = serde_json::from_str(&line[start..=i]).map_err(|e| format!("bad string: {e}"))?;
                tokens.push(Token::Str(s));
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t') {
                    i += 1;
                }
                tokens.push(Token::Word(line[start..i].to_string()));
            }
        }
    }
    Ok(tokens)
}

enum Node {
    Place(usize),
    Transition(usize),
}

pub fn from_text(text: &str) -> Result<PetriNet, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.find(|(_, l)| !l.is_empty() && !l.starts_with('#')) {
        Some((_, NET_HEADER)) => {}
        Some((n, other)) => {
            return Err(vec![Diagnostic::error(Some(n), "header", format!("expected {NET_HEADER:?}, found {other:?}"))]);
        }
        None => return Err(vec![Diagnostic::error(None, "header", "empty net file")]),
    }
    let mut net = PetriNet::new();
    let mut ids: HashMap<String, Node> = HashMap::new();
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut err = |rule: String| diags.push(Diagnostic::error(Some(n), format!("line {n}"), rule));
        let tokens = match tokenize(line) {
            Ok(t) => t,
            Err(e) => {
                err(e);
                continue;
            }
        };
        use Token::{Str, Word};
        match tokens.as_slice() {
            [Word(k), Str(id)] if k == "place" => {
                if ids.contains_key(id) {
                    err(format!("duplicate id {id:?}"));
                } else {
                    ids.insert(id.clone(), Node::Place(net.add_place(id.clone())));
                }
            }
            [Word(k), Str(id), label] if k == "transition" => {
                let label = match label {
                    Str(l) => Some(l.clone()),
                    Word(w) if w == "silent" => None,
                    Word(w) => {
                        err(format!("expected a quoted label or `silent`, found {w:?}"));
                        continue;
                    }
                };
                if ids.contains_key(id) {
                    err(format!("duplicate id {id:?}"));
                } else {
                    ids.insert(id.clone(), Node::Transition(net.add_transition(id.clone(), label)));
                }
            }
            [Word(k), Str(from), Str(to)] if k == "arc" => match (ids.get(from), ids.get(to)) {
                (Some(&Node::Place(p)), Some(&Node::Transition(t))) => net.add_arc(Arc::PlaceToTransition(p, t)),
                (Some(&Node::Transition(t)), Some(&Node::Place(p))) => net.add_arc(Arc::TransitionToPlace(t, p)),
                (None, _) => err(format!("unknown id {from:?}")),
                (_, None) => err(format!("unknown id {to:?}")),
                _ => err("arcs must connect a place and a transition".into()),
            },
            [Word(k), Str(id), Word(count)] if k == "initial" || k == "final" => {
                let Ok(count) = count.parse::<u32>() else {
                    err(format!("bad token count {count:?}"));
                    continue;
                };
                match ids.get(id) {
                    Some(&Node::Place(p)) if k == "initial" => net.set_initial(p, count),
                    Some(&Node::Place(p)) => net.set_final(p, count),
                    _ => err(format!("unknown place {id:?}")),
                }
            }
            _ => err(format!("unrecognized line {line:?}")),
        }
    }
    if diags.is_empty() {
        if let Err(e) = net.check() {
            diags.push(Diagnostic::error(None, "net", e.to_string()));
        }
    }
    if diags.is_empty() {
        Ok(net)
    } else {
        Err(diags)
    }
}
