use std::collections::{BTreeMap, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use super::{Definitions, Pred};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("recursion through negation: {}", cycle.join(" -> "))]
pub struct CycleError {
    /// Starts and ends at the same definition.
    pub cycle: Vec<String>,
}

/// Every definition referenced from `p`, with a flag telling whether the
/// occurrence sits under some negation.
pub fn def_references(p: &Pred) -> Vec<(String, bool)> {
    fn walk(p: &Pred, negated: bool, out: &mut Vec<(String, bool)>) {
        match p {
            Pred::Def(d) => out.push((d.clone(), negated)),
            Pred::Not(q) => walk(q, true, out),
            other => {
                for c in other.children() {
                    walk(c, negated, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(p, false, &mut out);
    out
}

/// Strongly connected components of a dependency graph, dependencies first.
/// The flag marks components that are genuinely recursive.
pub(crate) fn components(edges: &[Vec<usize>]) -> Vec<(Vec<usize>, bool)> {
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<NodeIndex> = (0..edges.len()).map(|_| g.add_node(())).collect();
    for (from, tos) in edges.iter().enumerate() {
        for &to in tos {
            g.add_edge(nodes[from], nodes[to], ());
        }
    }
    // tarjan_scc yields sinks (dependencies) first
    tarjan_scc(&g)
        .into_iter()
        .map(|scc| {
            let mut members: Vec<usize> = scc.into_iter().map(|n| n.index()).collect();
            members.sort_unstable();
            let recursive = members.len() > 1 || edges[members[0]].contains(&members[0]);
            (members, recursive)
        })
        .collect()
}

/// Rejects any recursive definition that is referenced under negation from
/// within its own cycle. References to unknown names are ignored here.
pub fn check_stratified(defs: &Definitions) -> Result<(), CycleError> {
    let names: Vec<&str> = defs.names().collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let refs: Vec<Vec<(usize, bool)>> = names
        .iter()
        .map(|n| {
            def_references(defs.get(n).expect("listed"))
                .into_iter()
                .filter_map(|(d, neg)| index.get(d.as_str()).map(|&i| (i, neg)))
                .collect()
        })
        .collect();
    let edges: Vec<Vec<usize>> = refs
        .iter()
        .map(|r| r.iter().map(|&(i, _)| i).collect())
        .collect();
    let mut component_of = BTreeMap::new();
    for (c, (members, recursive)) in components(&edges).into_iter().enumerate() {
        if recursive {
            for m in members {
                component_of.insert(m, c);
            }
        }
    }
    for (from, targets) in refs.iter().enumerate() {
        for &(to, negated) in targets {
            let same = matches!(
                (component_of.get(&from), component_of.get(&to)),
                (Some(a), Some(b)) if a == b
            );
            if negated && same {
                let mut cycle = vec![names[from].to_string()];
                cycle.extend(path(&edges, to, from).into_iter().map(|i| names[i].to_string()));
                return Err(CycleError { cycle });
            }
        }
    }
    Ok(())
}

/// Shortest path `from ..= to` by breadth-first search.
fn path(edges: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; edges.len()];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(n) = queue.pop_front() {
        if n == to {
            break;
        }
        for &m in &edges[n] {
            if prev[m] == usize::MAX {
                prev[m] = n;
                queue.push_back(m);
            }
        }
    }
    let mut out = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        out.push(cur);
    }
    out.reverse();
    out
}
