//! Bounded emptiness for nondeterministic automata.
//!
//! A run of an NLDAg gives every node a state sequence, and two nodes with
//! the same sequence can be merged without anyone noticing. So it suffices
//! to look for a set of pairwise distinct sequences together with, for each
//! of them, a choice of in-neighbors among the set that justifies every
//! transition. Searching such sets of size `k` covers exactly the digraphs
//! with at most `k` nodes.

use std::collections::BTreeMap;

use super::{decide_acceptance_alt, validate_alt, AltAutomaton};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Label};
use crate::sets::{StateId, StateSet};

/// Largest node count the search accepts.
pub const MAX_EMPTINESS_NODES: usize = 8;

/// Upper bound on distinct state sequences considered.
const MAX_TRACES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmptinessMode {
    /// Search up to `|Q|^(len+1)` nodes; fails if that exceeds
    /// [`MAX_EMPTINESS_NODES`].
    FullBound,
    Capped(usize),
}

impl Default for EmptinessMode {
    fn default() -> Self {
        EmptinessMode::Capped(5)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Emptiness {
    /// No accepted digraph with at most `searched` nodes; `exact` when that
    /// covers the pigeonhole bound, so the language is empty.
    Empty { exact: bool, searched: usize },
    Witness(Digraph),
}

struct Trace {
    label: Label,
    states: Vec<StateId>,
}

fn traces(a: &AltAutomaton, len: usize) -> Result<Vec<Trace>> {
    let mut by_states: BTreeMap<Vec<StateId>, Label> = BTreeMap::new();
    for label in 0..1u32 << a.bits() {
        let mut stack = vec![vec![a.init_state(label)]];
        while let Some(seq) = stack.pop() {
            if seq.len() == len + 1 {
                by_states.entry(seq).or_insert(label);
                if by_states.len() > MAX_TRACES {
                    return Err(Error::Bound(format!("more than {MAX_TRACES} state sequences")));
                }
                continue;
            }
            for s in a.syntactic_successors(*seq.last().unwrap()) {
                let mut next = seq.clone();
                next.push(s);
                stack.push(next);
            }
        }
    }
    Ok(by_states.into_iter().map(|(states, label)| Trace { label, states }).collect())
}

/// In-neighbor sets (one node mask per relation) that justify every
/// transition of `me` when the other nodes follow `group`.
fn justify(a: &AltAutomaton, me: &Trace, group: &[&Trace]) -> Option<Vec<u32>> {
    let k = group.len();
    let r = a.rels();
    let len = me.states.len() - 1;
    'choice: for m in 0u64..1 << (k * r) {
        let masks: Vec<u32> = (0..r).map(|i| (m >> (i * k) & ((1 << k) - 1)) as u32).collect();
        for t in 0..len {
            let q = me.states[t];
            if a.is_permanent(q) {
                continue;
            }
            let n: Vec<StateSet> = masks
                .iter()
                .map(|&mask| (0..k).filter(|j| mask >> j & 1 == 1).map(|j| group[j].states[t]).collect())
                .collect();
            if !a.local(q, &n).contains(&me.states[t + 1]) {
                continue 'choice;
            }
        }
        return Some(masks);
    }
    None
}

fn witness(a: &AltAutomaton, group: &[&Trace]) -> Option<Digraph> {
    let mut f: Vec<StateId> = group.iter().map(|t| *t.states.last().unwrap()).collect();
    f.sort_unstable();
    f.dedup();
    if !a.accepts_set(&f) {
        return None;
    }
    let mut edges = Vec::new();
    for (v, me) in group.iter().enumerate() {
        let masks = justify(a, me, group)?;
        for (rel, mask) in masks.into_iter().enumerate() {
            edges.extend((0..group.len()).filter(|u| mask >> u & 1 == 1).map(|u| (rel, u, v)));
        }
    }
    Digraph::new(a.bits(), a.rels(), group.iter().map(|t| t.label).collect(), edges).ok()
}

fn search(a: &AltAutomaton, ts: &[Trace], size: usize, start: usize, group: &mut Vec<usize>) -> Option<Digraph> {
    if group.len() == size {
        let g: Vec<&Trace> = group.iter().map(|&i| &ts[i]).collect();
        return witness(a, &g);
    }
    for i in start..ts.len() {
        group.push(i);
        if let Some(d) = search(a, ts, size, i + 1, group) {
            return Some(d);
        }
        group.pop();
    }
    None
}

/// Looks for an accepted digraph, smallest node count first.
pub fn nldag_emptiness(a: &AltAutomaton, mode: EmptinessMode) -> Result<Emptiness> {
    if !a.is_nondeterministic() {
        return Err(Error::Class("emptiness search needs an automaton without universal states".into()));
    }
    let len = validate_alt(a).map_err(|v| Error::Automaton(v.to_string()))?.length;
    let bound = (a.state_count() as u64).checked_pow(len as u32 + 1).unwrap_or(u64::MAX);
    let limit = match mode {
        EmptinessMode::FullBound => bound,
        EmptinessMode::Capped(n) => bound.min(n as u64),
    };
    if limit > MAX_EMPTINESS_NODES as u64 {
        return Err(Error::Bound(format!("searching digraphs with {limit} nodes")));
    }
    let limit = limit as usize;
    let ts = traces(a, len)?;
    for size in 1..=limit.min(ts.len()) {
        if let Some(d) = search(a, &ts, size, 0, &mut Vec::new()) {
            if !decide_acceptance_alt(a, &d)? {
                return Err(Error::NoWitness("synthesized digraph is not accepted".into()));
            }
            return Ok(Emptiness::Witness(d));
        }
    }
    Ok(Emptiness::Empty { exact: limit as u64 >= bound || limit >= ts.len(), searched: limit })
}

#[cfg(test)]
mod tests {
    use super::super::{AltBuilder, Kind};
    use super::*;
    use crate::catalog::{non_three_colorability, three_colorability};
    use crate::rules::GuardOp;

    #[test]
    fn no_accepting_sets_means_empty() {
        let mut b = AltBuilder::new(0, 1);
        b.state("yes", Kind::Permanent);
        b.init_all("yes");
        let a = b.build().unwrap();
        assert_eq!(nldag_emptiness(&a, EmptinessMode::FullBound).unwrap(), Emptiness::Empty { exact: true, searched: 1 });
    }

    #[test]
    fn single_node_witness() {
        let mut b = AltBuilder::new(0, 1);
        b.state("yes", Kind::Permanent);
        b.init_all("yes").accepting_set(&["yes"]);
        match nldag_emptiness(&b.build().unwrap(), EmptinessMode::default()).unwrap() {
            Emptiness::Witness(d) => assert_eq!(d.node_count(), 1),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn three_colorability_is_nonempty() {
        match nldag_emptiness(&three_colorability(), EmptinessMode::default()).unwrap() {
            Emptiness::Witness(d) => assert_eq!(d.node_count(), 1),
            e => panic!("{e:?}"),
        }
        assert!(matches!(nldag_emptiness(&non_three_colorability(), EmptinessMode::default()), Err(Error::Class(_))));
    }

    #[test]
    fn needs_two_nodes() {
        // Accepts iff some node sees a predecessor in state b while itself a.
        let mut b = AltBuilder::new(1, 1);
        b.state("a", Kind::Existential);
        b.state("b", Kind::Existential);
        b.state("hit", Kind::Permanent);
        b.state("idle", Kind::Permanent);
        b.init(0, "a").init(1, "b");
        b.rule("a", &[(1, GuardOp::Meets, &["b"])], &["hit"]).rule("a", &[], &["idle"]);
        b.rule("b", &[], &["idle"]);
        b.accepting_set(&["hit", "idle"]);
        match nldag_emptiness(&b.build().unwrap(), EmptinessMode::default()).unwrap() {
            Emptiness::Witness(d) => assert_eq!((d.node_count(), d.edge_count()), (2, 1)),
            e => panic!("{e:?}"),
        }
    }
}
