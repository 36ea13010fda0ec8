//! Distributed automata and their synchronous semantics.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{label_to_string, parse_label, Digraph, Label, NodeId, Pointed};
use crate::rules::{guard_from_json, guard_to_json, neighbor_tuples, Guard, GuardJson, GuardOp, Rule, RuleTable};
use crate::sets::{StateId, StateSet};

/// Default cap on synchronous rounds before giving up on lasso detection.
pub const DEFAULT_HORIZON: usize = 1_000_000;

/// A deterministic distributed automaton `⟨Q, ι, δ, F⟩` over `rels` relations.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributedAutomaton {
    names: Vec<String>,
    bits: usize,
    rels: usize,
    init: BTreeMap<Label, StateId>,
    accepting: Vec<bool>,
    delta: RuleTable<StateId>,
}

impl DistributedAutomaton {
    /// Checks that states are consistent and that `δ` is total: every state
    /// needs a catch-all rule, or else every neighbor-set tuple is tried.
    pub fn new(
        names: Vec<String>,
        bits: usize,
        rels: usize,
        init: BTreeMap<Label, StateId>,
        accepting: impl IntoIterator<Item = StateId>,
        delta: RuleTable<StateId>,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Automaton("no states".into()));
        }
        if rels == 0 {
            return Err(Error::Automaton("no relations".into()));
        }
        if delta.by_source.len() != n {
            return Err(Error::Automaton("rule table does not match the state count".into()));
        }
        let mut acc = vec![false; n];
        for q in accepting {
            *acc.get_mut(q as usize).ok_or_else(|| Error::Automaton(format!("accepting state {q} unknown")))? = true;
        }
        if init.values().any(|&q| q as usize >= n) {
            return Err(Error::Automaton("initial state out of range".into()));
        }
        for rules in &delta.by_source {
            for r in rules {
                if r.to as usize >= n || r.guards.iter().any(|g| g.rel >= rels) {
                    return Err(Error::Automaton("rule mentions an unknown state or relation".into()));
                }
            }
        }
        let a = DistributedAutomaton { names, bits, rels, init, accepting: acc, delta };
        a.check_total()?;
        Ok(a)
    }

    fn check_total(&self) -> Result<()> {
        let all: Vec<StateId> = (0..self.state_count() as StateId).collect();
        let mut tuples = None;
        for (q, rules) in self.delta.by_source.iter().enumerate() {
            if rules.iter().any(Rule::is_catch_all) {
                continue;
            }
            if tuples.is_none() {
                tuples = Some(neighbor_tuples(&all, self.rels).map_err(|_| {
                    Error::Automaton(format!("state {} lacks a catch-all rule and is too large to check", self.names[q]))
                })?);
            }
            for n in tuples.as_ref().unwrap() {
                if self.delta.lookup(q, n).is_none() {
                    return Err(Error::Automaton(format!("no rule of state {} matches {:?}", self.names[q], n)));
                }
            }
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn rels(&self) -> usize {
        self.rels
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.names[q as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|s| s == name).map(|i| i as StateId)
    }

    pub fn init_map(&self) -> &BTreeMap<Label, StateId> {
        &self.init
    }

    pub fn init_state(&self, label: Label) -> Result<StateId> {
        self.init.get(&label).copied().ok_or_else(|| Error::Initialization(label_to_string(label, self.bits)))
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn accepting(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_count() as StateId).filter(|&q| self.accepting[q as usize])
    }

    pub fn rules(&self) -> &RuleTable<StateId> {
        &self.delta
    }

    /// `δ(q, N⃗)`.
    pub fn step(&self, q: StateId, n: &[StateSet]) -> StateId {
        *self.delta.lookup(q as usize, n).expect("δ is total")
    }

    fn check_graph(&self, d: &Digraph) -> Result<()> {
        if d.rels() != self.rels {
            return Err(Error::Arity { expected: self.rels, found: d.rels() });
        }
        Ok(())
    }

    /// `ρ0(v) = ι(λ(v))`.
    pub fn initial_config(&self, d: &Digraph) -> Result<Vec<StateId>> {
        self.check_graph(d)?;
        d.labels().iter().map(|&l| self.init_state(l)).collect()
    }
}

/// Number of rounds to simulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    /// Run until the configuration repeats, up to a safety cap.
    Auto(usize),
    /// Exactly this many rounds.
    Steps(usize),
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon::Auto(DEFAULT_HORIZON)
    }
}

/// `ρ_{t} = ρ_{t+period}` for all `t ≥ prefix`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Lasso {
    pub prefix: usize,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncRun {
    /// `ρ_0, ρ_1, …`; with an automatic horizon these are exactly the
    /// configurations up to, but excluding, the first repetition.
    pub configs: Vec<Vec<StateId>>,
    pub lasso: Option<Lasso>,
}

impl SyncRun {
    /// `ρ_t` for any `t`, using the lasso beyond the stored prefix.
    pub fn at(&self, t: usize) -> Option<&[StateId]> {
        if t < self.configs.len() {
            return Some(&self.configs[t]);
        }
        let l = self.lasso?;
        Some(&self.configs[l.prefix + (t - l.prefix) % l.period])
    }
}

pub(crate) fn neighbor_sets(inc: &[Vec<NodeId>], cur: &[StateId]) -> Vec<StateSet> {
    inc.iter().map(|us| us.iter().map(|&u| cur[u]).collect()).collect()
}

/// Generic lasso-detecting driver for deterministic global dynamics.
pub(crate) fn run_until_lasso<C: Clone + Eq + std::hash::Hash>(
    init: C,
    horizon: Horizon,
    mut next: impl FnMut(&C) -> C,
) -> Result<(Vec<C>, Option<Lasso>)> {
    let mut seen: HashMap<C, usize> = HashMap::new();
    let mut configs = vec![init];
    loop {
        let t = configs.len() - 1;
        let cur = &configs[t];
        if let Some(&first) = seen.get(cur) {
            let lasso = Lasso { prefix: first, period: t - first };
            if let Horizon::Auto(_) = horizon {
                configs.pop();
            }
            return Ok((configs, Some(lasso)));
        }
        match horizon {
            Horizon::Steps(h) if t >= h => return Ok((configs, None)),
            Horizon::Auto(cap) if t >= cap => return Err(Error::HorizonExceeded(cap)),
            _ => {}
        }
        seen.insert(cur.clone(), t);
        let nxt = next(cur);
        configs.push(nxt);
    }
}

/// Synchronous run `ρ_{t+1}(v) = δ(ρ_t(v), ⟨{ρ_t(u) : (u,v) ∈ E_i}⟩_i)`.
pub fn sync_run(a: &DistributedAutomaton, d: &Digraph, horizon: Horizon) -> Result<SyncRun> {
    let init = a.initial_config(d)?;
    let inc = d.incoming();
    let (configs, lasso) = run_until_lasso(init, horizon, |cur| {
        (0..cur.len()).map(|v| a.step(cur[v], &neighbor_sets(&inc[v], cur))).collect()
    })?;
    Ok(SyncRun { configs, lasso })
}

/// Nodes that visit an accepting state at some time, decided exactly via the lasso.
pub fn accepted_nodes(a: &DistributedAutomaton, d: &Digraph) -> Result<Vec<bool>> {
    let run = sync_run(a, d, Horizon::default())?;
    let mut acc = vec![false; d.node_count()];
    for c in &run.configs {
        for (v, &q) in c.iter().enumerate() {
            acc[v] |= a.is_accepting(q);
        }
    }
    Ok(acc)
}

pub fn decide_acceptance_sync(a: &DistributedAutomaton, pd: &Pointed) -> Result<bool> {
    Ok(accepted_nodes(a, &pd.graph)?[pd.point])
}

/// Structural class flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AutomatonClass {
    pub is_local: bool,
    pub is_quasi_acyclic: bool,
    pub is_monovisioned: bool,
}

/// Successor relation of the state diagram: `q → δ(q, N⃗)` for all `N⃗`.
/// Exhaustive over neighbor tuples, so only small automata qualify.
pub fn state_diagram(a: &DistributedAutomaton) -> Result<Vec<Vec<StateId>>> {
    let all: Vec<StateId> = (0..a.state_count() as StateId).collect();
    let tuples = neighbor_tuples(&all, a.rels)?;
    Ok(all
        .iter()
        .map(|&q| {
            let mut succ: Vec<StateId> = tuples.iter().map(|n| a.step(q, n)).collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect())
}

pub(crate) fn has_nontrivial_cycle(succ: &[Vec<StateId>]) -> bool {
    // Kahn's algorithm on the diagram without self-loops.
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for (q, ss) in succ.iter().enumerate() {
        for &s in ss {
            if s as usize != q {
                indeg[s as usize] += 1;
            }
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&q| indeg[q] == 0).collect();
    let mut removed = 0;
    while let Some(q) = stack.pop() {
        removed += 1;
        for &s in &succ[q] {
            if s as usize != q {
                indeg[s as usize] -= 1;
                if indeg[s as usize] == 0 {
                    stack.push(s as usize);
                }
            }
        }
    }
    removed < n
}

pub fn classify(a: &DistributedAutomaton) -> Result<AutomatonClass> {
    let succ = state_diagram(a)?;
    let is_quasi_acyclic = !has_nontrivial_cycle(&succ);
    // A state that loops under some N⃗ must loop under all of them.
    let is_local = is_quasi_acyclic
        && succ.iter().enumerate().all(|(q, ss)| !ss.contains(&(q as StateId)) || ss.len() == 1);
    Ok(AutomatonClass { is_local, is_quasi_acyclic, is_monovisioned: monovisioned_sink(a)?.is_some() })
}

/// The rejecting sink witnessing monovisionedness, if any.
pub fn monovisioned_sink(a: &DistributedAutomaton) -> Result<Option<StateId>> {
    if a.rels != 1 {
        return Ok(None);
    }
    let all: Vec<StateId> = (0..a.state_count() as StateId).collect();
    let tuples = neighbor_tuples(&all, 1)?;
    Ok(all.iter().copied().filter(|&s| !a.is_accepting(s)).find(|&s| {
        all.iter().all(|&q| {
            tuples.iter().all(|n| {
                let forced = q == s || n[0].len() > 1 || n[0].contains(s);
                !forced || a.step(q, n) == s
            })
        })
    }))
}

/// Adds a rejecting sink entered whenever more than one state, or the sink
/// itself, is seen. Behavior on dipaths is unchanged.
pub fn monovisioned_transform(a: &DistributedAutomaton) -> Result<DistributedAutomaton> {
    if a.rels != 1 {
        return Err(Error::Arity { expected: 1, found: a.rels });
    }
    let n = a.state_count();
    let sink = n as StateId;
    let mut names = a.names.clone();
    let mut sink_name = "⊥".to_string();
    while names.contains(&sink_name) {
        sink_name.push('\'');
    }
    names.push(sink_name);
    let universe = n + 1;
    // Two distinct states differ in some bit of their index, so |N| ≥ 2
    // iff N meets both halves of some bit split.
    let mut splits = Vec::new();
    let mut bit = 1usize;
    while bit < n {
        let (hi, lo): (Vec<StateId>, Vec<StateId>) = (0..n as StateId).partition(|&q| q as usize & bit != 0);
        splits.push(vec![Guard::of(0, GuardOp::Meets, universe, hi), Guard::of(0, GuardOp::Meets, universe, lo)]);
        bit <<= 1;
    }
    let mut delta = RuleTable::new(universe);
    for q in 0..n {
        delta.push(q, Rule { guards: vec![Guard::of(0, GuardOp::Meets, universe, [sink])], to: sink });
        for guards in &splits {
            delta.push(q, Rule { guards: guards.clone(), to: sink });
        }
        for rule in &a.delta.by_source[q] {
            delta.push(q, rule.clone());
        }
    }
    delta.push(n, Rule { guards: vec![], to: sink });
    DistributedAutomaton::new(names, a.bits, 1, a.init.clone(), a.accepting(), delta)
}

/// Convenience builder that refers to states by name.
#[derive(Clone, Debug, Default)]
pub struct Builder {
    names: Vec<String>,
    bits: usize,
    rels: usize,
    init: BTreeMap<Label, StateId>,
    accepting: Vec<StateId>,
    rules: Vec<(StateId, Vec<(usize, GuardOp, Vec<StateId>)>, StateId)>,
}

impl Builder {
    pub fn new(bits: usize, rels: usize) -> Self {
        Builder { bits, rels, ..Default::default() }
    }

    /// Id of `name`, registering it on first use.
    pub fn state(&mut self, name: &str) -> StateId {
        match self.names.iter().position(|s| s == name) {
            Some(i) => i as StateId,
            None => {
                self.names.push(name.to_string());
                (self.names.len() - 1) as StateId
            }
        }
    }

    pub fn init(&mut self, label: Label, state: &str) -> &mut Self {
        let q = self.state(state);
        self.init.insert(label, q);
        self
    }

    pub fn accept(&mut self, state: &str) -> &mut Self {
        let q = self.state(state);
        self.accepting.push(q);
        self
    }

    /// Adds a rule; relations in `guards` are 1-based.
    pub fn rule(&mut self, from: &str, guards: &[(usize, GuardOp, &[&str])], to: &str) -> &mut Self {
        let f = self.state(from);
        let gs = guards.iter().map(|(r, op, set)| (r - 1, *op, set.iter().map(|s| self.state(s)).collect())).collect();
        let t = self.state(to);
        self.rules.push((f, gs, t));
        self
    }

    pub fn build(&self) -> Result<DistributedAutomaton> {
        let n = self.names.len();
        let mut delta = RuleTable::new(n);
        for (f, gs, t) in &self.rules {
            let guards = gs.iter().map(|(r, op, set)| Guard::of(*r, *op, n, set.iter().copied())).collect();
            delta.push(*f as usize, Rule { guards, to: *t });
        }
        DistributedAutomaton::new(self.names.clone(), self.bits, self.rels, self.init.clone(), self.accepting.clone(), delta)
    }
}

/// External JSON form of a distributed automaton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomatonJson {
    pub states: Vec<String>,
    pub relations: usize,
    pub init: BTreeMap<String, String>,
    pub accepting: Vec<String>,
    pub rules: Vec<RuleJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleJson {
    pub from: String,
    #[serde(default)]
    pub guards: Vec<GuardJson>,
    pub to: String,
}

pub(crate) fn name_lookup(names: &[String]) -> impl Fn(&str) -> Result<StateId> + '_ {
    let index: HashMap<&str, StateId> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i as StateId)).collect();
    move |s| index.get(s).copied().ok_or_else(|| Error::Automaton(format!("unknown state {s:?}")))
}

pub(crate) fn parse_init(init: &BTreeMap<String, String>, lookup: &dyn Fn(&str) -> Result<StateId>) -> Result<(usize, BTreeMap<Label, StateId>)> {
    let bits = init.keys().next().map_or(0, String::len);
    let mut out = BTreeMap::new();
    for (l, s) in init {
        if l.len() != bits {
            return Err(Error::Automaton("initialization labels differ in width".into()));
        }
        out.insert(parse_label(l)?, lookup(s)?);
    }
    Ok((bits, out))
}

impl DistributedAutomaton {
    pub fn to_json(&self) -> AutomatonJson {
        let mut rules = Vec::with_capacity(self.delta.rule_count());
        for (q, rs) in self.delta.by_source.iter().enumerate() {
            for r in rs {
                rules.push(RuleJson {
                    from: self.names[q].clone(),
                    guards: r.guards.iter().map(|g| guard_to_json(g, &self.names)).collect(),
                    to: self.names[r.to as usize].clone(),
                });
            }
        }
        AutomatonJson {
            states: self.names.clone(),
            relations: self.rels,
            init: self.init.iter().map(|(&l, &q)| (label_to_string(l, self.bits), self.names[q as usize].clone())).collect(),
            accepting: self.accepting().map(|q| self.names[q as usize].clone()).collect(),
            rules,
        }
    }

    pub fn from_json(j: &AutomatonJson) -> Result<Self> {
        let lookup = name_lookup(&j.states);
        let mut uniq = j.states.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != j.states.len() {
            return Err(Error::Automaton("duplicate state names".into()));
        }
        let (bits, init) = parse_init(&j.init, &lookup)?;
        let accepting = j.accepting.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
        let n = j.states.len();
        let mut delta = RuleTable::new(n);
        for r in &j.rules {
            let guards = r.guards.iter().map(|g| guard_from_json(g, j.relations, &lookup, n)).collect::<Result<_>>()?;
            delta.push(lookup(&r.from)? as usize, Rule { guards, to: lookup(&r.to)? });
        }
        Self::new(j.states.clone(), bits, j.relations, init, accepting, delta)
    }
}
