//! Transitive reduction of directed acyclic graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Reachability sets and kept edges.
pub(crate) type Reduced = (Vec<FixedBitSet>, Vec<(usize, usize)>);

/// Dense DAG over `0..n` used by the reduction and reachability helpers.
pub(crate) struct IndexDag {
    pub succ: Vec<Vec<usize>>,
}

impl IndexDag {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut succ = vec![Vec::new(); n];
        for (u, v) in edges {
            succ[u].push(v);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        IndexDag { succ }
    }

    /// Kahn's algorithm; `Err` carries one node cycle when the graph is cyclic.
    pub fn topological_order(&self) -> Result<Vec<usize>, Vec<usize>> {
        let n = self.succ.len();
        let mut indeg = vec![0usize; n];
        for s in &self.succ {
            for &v in s {
                indeg[v] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = stack.pop() {
            order.push(u);
            for &v in self.succ[u].iter().rev() {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(self.cycle_witness(&indeg))
        }
    }

    /// Every node left with positive in-degree after Kahn lies on or behind a
    /// cycle; walking predecessors inside that set must revisit a node.
    fn cycle_witness(&self, indeg: &[usize]) -> Vec<usize> {
        let n = self.succ.len();
        let mut pred = vec![None; n];
        for u in 0..n {
            if indeg[u] == 0 {
                continue;
            }
            for &v in &self.succ[u] {
                if indeg[v] > 0 && pred[v].is_none() {
                    pred[v] = Some(u);
                }
            }
        }
        let start = (0..n).find(|&v| indeg[v] > 0).expect("cyclic graph has residue");
        let mut pos = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut cur = start;
        while pos[cur] == usize::MAX {
            pos[cur] = walk.len();
            walk.push(cur);
            cur = pred[cur].expect("residual node has a residual predecessor");
        }
        let mut cycle: Vec<usize> = walk[pos[cur]..].to_vec();
        cycle.reverse();
        cycle.push(cycle[0]);
        cycle
    }

    /// Reachability sets (excluding the node itself) and the reduced edges.
    pub fn reduce(&self) -> Result<Reduced, Vec<usize>> {
        let n = self.succ.len();
        let order = self.topological_order()?;
        let mut rank = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        let mut reach = vec![FixedBitSet::with_capacity(n); n];
        let mut kept = Vec::new();
        for &u in order.iter().rev() {
            let mut succ = self.succ[u].clone();
            succ.sort_unstable_by_key(|&v| rank[v]);
            let mut acc = FixedBitSet::with_capacity(n);
            for v in succ {
                // successors in topological order: a redundant edge's head is
                // already covered by an earlier successor
                if acc.contains(v) {
                    continue;
                }
                kept.push((u, v));
                acc.insert(v);
                acc.union_with(&reach[v]);
            }
            reach[u] = acc;
        }
        kept.sort_unstable();
        Ok((reach, kept))
    }
}

/// The unique minimal edge set with the same reachability as `edges`.
///
/// Fails with [`Error::Cycle`] when `edges` is not acyclic; the witness
/// lists the cycle's nodes with the first repeated at the end.
pub fn transitive_reduction<N>(edges: &BTreeSet<(N, N)>) -> Result<BTreeSet<(N, N)>>
where
    N: Ord + Clone + Display,
{
    let mut nodes: Vec<&N> = edges.iter().flat_map(|(u, v)| [u, v]).collect();
    nodes.sort();
    nodes.dedup();
    let index: BTreeMap<&N, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let dag = IndexDag::new(nodes.len(), edges.iter().map(|(u, v)| (index[u], index[v])));
    match dag.reduce() {
        Ok((_, kept)) => Ok(kept
            .into_iter()
            .map(|(u, v)| (nodes[u].clone(), nodes[v].clone()))
            .collect()),
        Err(cycle) => Err(Error::Cycle {
            witness: cycle.into_iter().map(|i| nodes[i].to_string()).collect(),
        }),
    }
}
