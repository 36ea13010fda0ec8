//! Asynchronous runs: edges are FIFO buffers of traces, and an adversarial
//! timing decides which nodes and edges act in each round.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId, Pointed};
use crate::rules::neighbor_tuples;
use crate::sets::{StateId, StateSet};
use crate::sync::{has_nontrivial_cycle, run_until_lasso, DistributedAutomaton, Horizon, Lasso};

/// Nonempty state sequence without two equal neighbors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(Vec<StateId>);

impl Trace {
    pub fn new(q: StateId) -> Self {
        Trace(vec![q])
    }

    pub fn from_states(states: Vec<StateId>) -> Result<Self> {
        if states.is_empty() || states.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Automaton(format!("{states:?} is not a trace")));
        }
        Ok(Trace(states))
    }

    pub fn first(&self) -> StateId {
        self.0[0]
    }

    pub fn last(&self) -> StateId {
        *self.0.last().expect("nonempty")
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn push(&self, q: StateId) -> Trace {
        let mut t = self.clone();
        t.push_mut(q);
        t
    }

    pub fn pop(&self) -> Trace {
        let mut t = self.clone();
        t.pop_mut();
        t
    }

    pub(crate) fn push_mut(&mut self, q: StateId) {
        if self.last() != q {
            self.0.push(q);
        }
    }

    pub(crate) fn pop_mut(&mut self) {
        if self.0.len() > 1 {
            self.0.remove(0);
        }
    }
}

/// Which nodes and edges act in one round. Edges follow
/// [`Digraph::all_edges`] order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Activity {
    pub nodes: Vec<bool>,
    pub edges: Vec<bool>,
}

/// A finite prefix `T_1 … T_k` followed by the synchronous tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timing {
    prefix: Vec<Activity>,
    lossless: bool,
}

impl Timing {
    pub fn synchronous() -> Self {
        Timing { prefix: Vec::new(), lossless: true }
    }

    pub fn new(d: &Digraph, prefix: Vec<Activity>, lossless: bool) -> Result<Self> {
        let edges: Vec<_> = d.all_edges().collect();
        for (t, act) in prefix.iter().enumerate() {
            if act.nodes.len() != d.node_count() || act.edges.len() != edges.len() {
                return Err(Error::Timing(format!("activity map {} has the wrong size", t + 1)));
            }
            if lossless {
                if let Some(i) = (0..edges.len()).find(|&i| act.edges[i] && !act.nodes[edges[i].2]) {
                    let (_, u, v) = edges[i];
                    return Err(Error::Timing(format!(
                        "edge ({u},{v}) is active at time {} while its target is not",
                        t + 1
                    )));
                }
            }
        }
        Ok(Timing { prefix, lossless })
    }

    pub fn prefix(&self) -> &[Activity] {
        &self.prefix
    }

    pub fn is_lossless(&self) -> bool {
        self.lossless
    }

    pub fn to_json(&self) -> TimingJson {
        let bits = |v: &[bool]| v.iter().map(|&b| b as u8).collect();
        TimingJson {
            lossless: self.lossless,
            prefix: self.prefix.iter().map(|a| ActivityJson { nodes: bits(&a.nodes), edges: bits(&a.edges) }).collect(),
        }
    }

    pub fn from_json(d: &Digraph, j: &TimingJson) -> Result<Self> {
        let bools = |v: &[u8]| {
            v.iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    _ => Err(Error::Timing(format!("activity bit {b} is not 0 or 1"))),
                })
                .collect::<Result<Vec<_>>>()
        };
        let prefix = j
            .prefix
            .iter()
            .map(|a| Ok(Activity { nodes: bools(&a.nodes)?, edges: bools(&a.edges)? }))
            .collect::<Result<_>>()?;
        Timing::new(d, prefix, j.lossless)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingJson {
    pub lossless: bool,
    pub prefix: Vec<ActivityJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityJson {
    pub nodes: Vec<u8>,
    pub edges: Vec<u8>,
}

/// Uniform activity bits; with `lossless`, edges into inactive nodes are
/// switched off.
pub fn sample_timing(d: &Digraph, prefix_len: usize, lossless: bool, seed: u64) -> Timing {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = d.all_edges().collect();
    let prefix = (0..prefix_len)
        .map(|_| {
            let nodes: Vec<bool> = (0..d.node_count()).map(|_| rng.gen_bool(0.5)).collect();
            let edges = edges.iter().map(|&(_, _, v)| rng.gen_bool(0.5) && (!lossless || nodes[v])).collect();
            Activity { nodes, edges }
        })
        .collect();
    Timing { prefix, lossless }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AsyncConfig {
    pub nodes: Vec<StateId>,
    /// One buffer per edge, in [`Digraph::all_edges`] order.
    pub buffers: Vec<Trace>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsyncRun {
    pub configs: Vec<AsyncConfig>,
    /// Lasso of the synchronous tail, in absolute time.
    pub lasso: Option<Lasso>,
}

struct Stepper<'a> {
    a: &'a DistributedAutomaton,
    edges: Vec<(NodeId, NodeId)>,
    /// Incoming edge indices per node.
    inc: Vec<Vec<usize>>,
}

impl<'a> Stepper<'a> {
    fn new(a: &'a DistributedAutomaton, d: &Digraph) -> Result<Self> {
        if a.rels() != 1 {
            return Err(Error::Arity { expected: 1, found: a.rels() });
        }
        if d.rels() != 1 {
            return Err(Error::Arity { expected: 1, found: d.rels() });
        }
        let edges: Vec<_> = d.all_edges().map(|(_, u, v)| (u, v)).collect();
        let mut inc = vec![Vec::new(); d.node_count()];
        for (i, &(_, v)) in edges.iter().enumerate() {
            inc[v].push(i);
        }
        Ok(Stepper { a, edges, inc })
    }

    fn init(&self, d: &Digraph) -> Result<AsyncConfig> {
        let nodes = self.a.initial_config(d)?;
        let buffers = self.edges.iter().map(|&(u, _)| Trace::new(nodes[u])).collect();
        Ok(AsyncConfig { nodes, buffers })
    }

    fn step(&self, c: &AsyncConfig, act: Option<&Activity>) -> AsyncConfig {
        let node_on = |v: usize| act.is_none_or(|a| a.nodes[v]);
        let edge_on = |e: usize| act.is_none_or(|a| a.edges[e]);
        let nodes: Vec<StateId> = (0..c.nodes.len())
            .map(|v| {
                if node_on(v) {
                    let heard: StateSet = self.inc[v].iter().map(|&e| c.buffers[e].first()).collect();
                    self.a.step(c.nodes[v], &[heard])
                } else {
                    c.nodes[v]
                }
            })
            .collect();
        let buffers = c
            .buffers
            .iter()
            .enumerate()
            .map(|(e, b)| {
                let mut b = b.clone();
                b.push_mut(nodes[self.edges[e].0]);
                if edge_on(e) {
                    b.pop_mut();
                }
                b
            })
            .collect();
        AsyncConfig { nodes, buffers }
    }
}

/// The run timed by `timing`. With an automatic horizon it stops once the
/// synchronous tail repeats a configuration.
pub fn async_run(a: &DistributedAutomaton, d: &Digraph, timing: &Timing, horizon: Horizon) -> Result<AsyncRun> {
    let s = Stepper::new(a, d)?;
    let mut configs = vec![s.init(d)?];
    let k = timing.prefix.len();
    let stop = match horizon {
        Horizon::Steps(h) => h.min(k),
        Horizon::Auto(_) => k,
    };
    for act in &timing.prefix[..stop] {
        let next = s.step(configs.last().unwrap(), Some(act));
        configs.push(next);
    }
    let tail_horizon = match horizon {
        Horizon::Steps(h) if h <= k => return Ok(AsyncRun { configs, lasso: None }),
        Horizon::Steps(h) => Horizon::Steps(h - k),
        auto => auto,
    };
    let start = configs.pop().unwrap();
    let (tail, lasso) = run_until_lasso(start, tail_horizon, |c| s.step(c, None))?;
    configs.extend(tail);
    Ok(AsyncRun { configs, lasso: lasso.map(|l| Lasso { prefix: l.prefix + k, period: l.period }) })
}

/// Per-node timed acceptance; the tail is decided by its lasso.
pub fn accepted_nodes_timed(a: &DistributedAutomaton, d: &Digraph, timing: &Timing) -> Result<Vec<bool>> {
    let run = async_run(a, d, timing, Horizon::default())?;
    let mut acc = vec![false; d.node_count()];
    for c in &run.configs {
        for (v, &q) in c.nodes.iter().enumerate() {
            acc[v] |= a.is_accepting(q);
        }
    }
    Ok(acc)
}

pub fn decide_acceptance_timed(a: &DistributedAutomaton, pd: &Pointed, timing: &Timing) -> Result<bool> {
    Ok(accepted_nodes_timed(a, &pd.graph, timing)?[pd.point])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Falsification {
    /// Not a proof of asynchrony: only the sampled timings were tried.
    ConsistentSoFar { timings: usize },
    Counterexample { first: Timing, second: Timing, node: NodeId },
}

/// Compares every sampled timing against the synchronous one; sample `i`
/// is drawn with seed `seed + i`.
pub fn falsify_consistency(
    a: &DistributedAutomaton,
    d: &Digraph,
    samples: usize,
    prefix_len: usize,
    lossless: bool,
    seed: u64,
) -> Result<Falsification> {
    let sync = Timing::synchronous();
    let base = accepted_nodes_timed(a, d, &sync)?;
    for i in 0..samples {
        let t = sample_timing(d, prefix_len, lossless, seed.wrapping_add(i as u64));
        let got = accepted_nodes_timed(a, d, &t)?;
        if let Some(node) = (0..base.len()).find(|&v| base[v] != got[v]) {
            return Ok(Falsification::Counterexample { first: sync, second: t, node });
        }
    }
    Ok(Falsification::ConsistentSoFar { timings: samples + 1 })
}

/// Cap on the number of traces [`compute_traces`] will list.
pub const TRACE_LIMIT: usize = 1 << 20;

/// `q → δ(q, N)` for `N ⊆ R`, excluding self-loops.
pub(crate) fn moves(a: &DistributedAutomaton, within: &[StateId]) -> Result<Vec<Vec<StateId>>> {
    let tuples = neighbor_tuples(within, a.rels())?;
    Ok((0..a.state_count() as StateId)
        .map(|q| {
            let mut s: Vec<StateId> = tuples.iter().map(|n| a.step(q, n)).filter(|&p| p != q).collect();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect())
}

/// Every maximal and non-maximal path of the move graph starting at `starts`.
pub(crate) fn traces_from(succ: &[Vec<StateId>], starts: &[StateId]) -> Result<Vec<Trace>> {
    if has_nontrivial_cycle(succ) {
        return Err(Error::Class("the trace set is infinite: the automaton is not quasi-acyclic".into()));
    }
    let mut out = Vec::new();
    let mut stack: Vec<Vec<StateId>> = starts.iter().map(|&q| vec![q]).collect();
    while let Some(t) = stack.pop() {
        for &p in &succ[*t.last().unwrap() as usize] {
            let mut u = t.clone();
            u.push(p);
            stack.push(u);
        }
        out.push(Trace(t));
        if out.len() > TRACE_LIMIT {
            return Err(Error::Bound(format!("more than {TRACE_LIMIT} traces")));
        }
    }
    out.sort();
    Ok(out)
}

/// The full trace set over all states, sorted.
pub fn compute_traces(a: &DistributedAutomaton) -> Result<Vec<Trace>> {
    let all: Vec<StateId> = (0..a.state_count() as StateId).collect();
    traces_from(&moves(a, &all)?, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::sync::{sync_run, Builder};

    #[test]
    fn push_and_pop() {
        let t = Trace::new(0);
        assert_eq!(t.push(0).states(), &[0]);
        assert_eq!(t.push(1).states(), &[0, 1]);
        assert_eq!(t.push(1).push(0).states(), &[0, 1, 0]);
        assert_eq!(t.pop().states(), &[0]);
        assert_eq!(t.push(1).pop().states(), &[1]);
        assert_eq!(t.push(1).push(0).pop().states(), &[1, 0]);
        assert!(Trace::from_states(vec![1, 1]).is_err());
    }

    #[test]
    fn empty_prefix_matches_sync() {
        let a = catalog::marked_ancestor();
        let d = Digraph::new(1, 1, vec![1, 0, 0], [(0, 0, 1), (0, 1, 2), (0, 2, 2)]).unwrap();
        let s = sync_run(&a, &d, Horizon::Steps(8)).unwrap();
        let r = async_run(&a, &d, &Timing::synchronous(), Horizon::Steps(8)).unwrap();
        for t in 0..=8 {
            assert_eq!(s.at(t).unwrap(), r.configs.get(t).map(|c| c.nodes.as_slice()).unwrap_or_else(|| s.at(t).unwrap()));
        }
    }

    fn counter() -> DistributedAutomaton {
        let mut b = Builder::new(0, 1);
        b.init(0, "c0");
        for i in 0..4 {
            b.rule(&format!("c{i}"), &[], &format!("c{}", i + 1));
        }
        b.rule("c4", &[], "c4");
        b.build().unwrap()
    }

    #[test]
    fn buffer_accumulates_while_target_sleeps() {
        let a = counter();
        let d = Digraph::unlabeled(2, 1, [(0, 0, 1)]).unwrap();
        let act = Activity { nodes: vec![true, false], edges: vec![false] };
        let t = Timing::new(&d, vec![act; 3], true).unwrap();
        let run = async_run(&a, &d, &t, Horizon::Steps(3)).unwrap();
        assert_eq!(run.configs[3].buffers[0].states(), &[0, 1, 2, 3]);
        assert_eq!(run.configs[3].nodes, vec![3, 0]);
    }

    #[test]
    fn lossless_is_enforced() {
        let d = Digraph::unlabeled(2, 1, [(0, 0, 1)]).unwrap();
        let act = Activity { nodes: vec![true, false], edges: vec![true] };
        assert!(matches!(Timing::new(&d, vec![act.clone()], true), Err(Error::Timing(_))));
        assert!(Timing::new(&d, vec![act], false).is_ok());
    }

    #[test]
    fn staggered_timing_breaks_the_detector() {
        let a = catalog::synchrony_detector();
        let d = catalog::synchrony_graph();
        let pd = Pointed::new(d.clone(), 2).unwrap();
        let t1 = Activity { nodes: vec![true, false, true], edges: vec![true, false] };
        let t2 = Activity { nodes: vec![false, false, true], edges: vec![false, false] };
        let t = Timing::new(&d, vec![t1, t2], true).unwrap();
        assert!(decide_acceptance_timed(&a, &pd, &Timing::synchronous()).unwrap());
        assert!(!decide_acceptance_timed(&a, &pd, &t).unwrap());
        assert!(matches!(falsify_consistency(&a, &d, 50, 4, true, 1).unwrap(), Falsification::Counterexample { node: 2, .. }));
    }

    #[test]
    fn isolated_node_is_always_consistent() {
        let d = Digraph::unlabeled(1, 1, []).unwrap();
        let r = falsify_consistency(&counter(), &d, 20, 5, false, 0).unwrap();
        assert_eq!(r, Falsification::ConsistentSoFar { timings: 21 });
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = catalog::synchrony_graph();
        assert_eq!(sample_timing(&d, 5, true, 9), sample_timing(&d, 5, true, 9));
        assert!(sample_timing(&d, 0, true, 9).prefix().is_empty());
        let t = sample_timing(&d, 30, true, 3);
        assert!(Timing::new(&d, t.prefix().to_vec(), true).is_ok());
    }

    #[test]
    fn chain_traces() {
        let mut b = Builder::new(0, 1);
        b.init(0, "q0").rule("q0", &[], "q1").rule("q1", &[], "q1");
        let ts = compute_traces(&b.build().unwrap()).unwrap();
        let got: Vec<&[StateId]> = ts.iter().map(Trace::states).collect();
        assert_eq!(got, vec![&[0][..], &[0, 1], &[1]]);
    }

    #[test]
    fn timing_json_roundtrip() {
        let d = catalog::synchrony_graph();
        let t = sample_timing(&d, 3, true, 4);
        let j = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(Timing::from_json(&d, &serde_json::from_str(&j).unwrap()).unwrap(), t);
    }
}
