//! Emptiness procedures: exact for forgetful automata, bounded ditree
//! search for everything else.
//!
//! For a forgetful automaton the set `Σ_t` of states that some node can be
//! in at time `t` obeys `Σ_{t+1} = δ̂(Σ_t)`: any tuple of subsets of `Σ_t` is
//! realized by a fresh node whose in-neighbors are disjoint copies of
//! witnesses for time `t`, and those copies are not influenced by the new
//! node.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forgetful::{forgetful_run, ForgetfulAutomaton};
use crate::graph::{enumerate_ditrees, Digraph, Label, Pointed};
use crate::rules::neighbor_tuples;
use crate::sets::{StateId, StateSet};
use crate::sync::{decide_acceptance_sync, DistributedAutomaton, Horizon, Lasso};

/// Witnesses larger than this are refused.
pub const MAX_WITNESS_NODES: usize = 1 << 20;

/// `Σ_0, Σ_1, …` up to the first repetition.
#[derive(Clone, Debug)]
pub struct ReachableStateSets {
    pub sets: Vec<StateSet>,
    pub lasso: Lasso,
    /// For each `t ≥ 1` and `q ∈ Σ_t`, the first `(a, U⃗)` with `δ_a(U⃗) = q`;
    /// one entry longer than `sets`.
    generators: Vec<BTreeMap<StateId, (Label, Vec<StateSet>)>>,
}

impl ReachableStateSets {
    pub fn compute(a: &ForgetfulAutomaton) -> Result<Self> {
        let mut letters = a.letters().to_vec();
        letters.sort_unstable();
        let mut sets = vec![StateSet::singleton(a.initial())];
        let mut generators = vec![BTreeMap::new()];
        let mut seen: HashMap<StateSet, usize> = HashMap::new();
        // δ_a lookups repeat across iterations.
        let mut memo: HashMap<(Label, Vec<StateSet>), StateId> = HashMap::new();
        loop {
            let t = sets.len() - 1;
            if let Some(&first) = seen.get(&sets[t]) {
                // Keep the generators that produced the repeat: they close the cycle.
                sets.pop();
                return Ok(ReachableStateSets { sets, lasso: Lasso { prefix: first, period: t - first }, generators });
            }
            seen.insert(sets[t].clone(), t);
            let cur: Vec<StateId> = sets[t].iter().collect();
            let mut gens = BTreeMap::new();
            for &l in &letters {
                for u in neighbor_tuples(&cur, a.rels())? {
                    let q = match memo.get(&(l, u.clone())) {
                        Some(&q) => q,
                        None => {
                            let q = a.step(l, &u)?;
                            memo.insert((l, u.clone()), q);
                            q
                        }
                    };
                    gens.entry(q).or_insert((l, u));
                }
            }
            sets.push(gens.keys().copied().collect());
            generators.push(gens);
        }
    }

    /// `Σ_t`, following the lasso past its end.
    pub fn at(&self, t: usize) -> &StateSet {
        &self.sets[self.index(t)]
    }

    fn index(&self, t: usize) -> usize {
        let Lasso { prefix, period } = self.lasso;
        if t < prefix + period { t } else { prefix + (t - prefix) % period }
    }

    /// Position of a generator whose `U⃗` lies in `Σ_{t-1}`.
    fn generator_index(&self, t: usize) -> usize {
        let Lasso { prefix, period } = self.lasso;
        if t <= prefix + period { t } else { prefix + 1 + (t - prefix - 1) % period }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ForgetfulEmptiness {
    Empty,
    Nonempty { time: usize, state: StateId },
}

/// Decides emptiness exactly: the first `t` and the smallest accepting
/// `q ∈ Σ_t`, or `Empty` once the sequence of sets repeats.
pub fn forgetful_emptiness(a: &ForgetfulAutomaton) -> Result<ForgetfulEmptiness> {
    let r = ReachableStateSets::compute(a)?;
    for (t, s) in r.sets.iter().enumerate() {
        if let Some(q) = s.iter().find(|&q| a.is_accepting(q)) {
            return Ok(ForgetfulEmptiness::Nonempty { time: t, state: q });
        }
    }
    Ok(ForgetfulEmptiness::Empty)
}

struct WitnessBuilder<'a> {
    a: &'a ForgetfulAutomaton,
    sets: &'a ReachableStateSets,
    labels: Vec<Label>,
    edges: Vec<(usize, usize, usize)>,
}

impl WitnessBuilder<'_> {
    /// Adds a fresh ditree whose root is in state `q` at time `t`; returns the root.
    fn grow(&mut self, t: usize, q: StateId) -> Result<usize> {
        if self.labels.len() >= MAX_WITNESS_NODES {
            return Err(Error::Bound(format!("witness exceeds {MAX_WITNESS_NODES} nodes")));
        }
        let root = self.labels.len();
        if t == 0 {
            if q != self.a.initial() {
                return Err(Error::NoWitness(format!("only the initial state occurs at time 0, not {}", self.a.name(q))));
            }
            self.labels.push(*self.a.letters().iter().min().expect("letters exist"));
            return Ok(root);
        }
        let (label, u) = self.sets.generators[self.sets.generator_index(t)]
            .get(&q)
            .cloned()
            .ok_or_else(|| Error::NoWitness(format!("{} does not occur at time {t}", self.a.name(q))))?;
        self.labels.push(label);
        for (rel, s) in u.iter().enumerate() {
            for p in s.iter() {
                let child = self.grow(t - 1, p)?;
                self.edges.push((rel, child, root));
            }
        }
        Ok(root)
    }
}

/// Builds a pointed ditree whose root is in state `q` at time `t`, checked
/// by simulation.
pub fn forgetful_witness(a: &ForgetfulAutomaton, t: usize, q: StateId) -> Result<Pointed> {
    let sets = ReachableStateSets::compute(a)?;
    let mut b = WitnessBuilder { a, sets: &sets, labels: Vec::new(), edges: Vec::new() };
    let root = b.grow(t, q)?;
    let d = Digraph::new(a.bits(), a.rels(), b.labels, b.edges)?;
    let run = forgetful_run(a, &d, Horizon::Steps(t))?;
    if run.at(t).expect("horizon covers t")[root] != q {
        return Err(Error::NoWitness("synthesized witness does not reach the state".into()));
    }
    d.pointed(root)
}

/// Largest ditree size the search accepts.
pub const MAX_SEARCH_NODES: usize = 9;

/// First accepted labeled pointed ditree with at most `max_nodes` nodes.
/// `None` says nothing about larger digraphs.
pub fn bounded_ditree_search(a: &DistributedAutomaton, max_nodes: usize) -> Result<Option<Pointed>> {
    if max_nodes > MAX_SEARCH_NODES {
        return Err(Error::Bound(format!("ditree search is limited to {MAX_SEARCH_NODES} nodes")));
    }
    if a.accepting().next().is_none() {
        return Ok(None);
    }
    for pd in enumerate_ditrees(max_nodes, a.bits(), a.rels())? {
        if pd.graph.labels().iter().any(|&l| a.init_state(l).is_err()) {
            continue;
        }
        if decide_acceptance_sync(a, &pd)? {
            return Ok(Some(pd));
        }
    }
    Ok(None)
}
