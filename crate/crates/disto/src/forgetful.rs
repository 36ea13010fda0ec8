//! Forgetful distributed automata: a node rereads its label every round
//! and never sees its own previous state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{label_to_string, parse_label, Digraph, Label, Pointed};
use crate::rules::{guard_from_json, guard_to_json, neighbor_tuples, Guard, GuardJson, GuardOp, Rule, RuleTable};
use crate::sets::{BitSet, StateId, StateSet};
use crate::sync::{name_lookup, neighbor_sets, run_until_lasso, DistributedAutomaton, Horizon, SyncRun};

#[derive(Clone, Debug, PartialEq)]
pub struct ForgetfulAutomaton {
    names: Vec<String>,
    bits: usize,
    rels: usize,
    initial: StateId,
    accepting: Vec<bool>,
    letters: Vec<Label>,
    delta: RuleTable<StateId>,
}

impl ForgetfulAutomaton {
    /// `delta[i]` holds the rules of `δ_{letters[i]}`.
    pub fn new(
        names: Vec<String>,
        bits: usize,
        rels: usize,
        initial: StateId,
        accepting: impl IntoIterator<Item = StateId>,
        letters: Vec<Label>,
        delta: RuleTable<StateId>,
    ) -> Result<Self> {
        let n = names.len();
        if initial as usize >= n {
            return Err(Error::Automaton("initial state out of range".into()));
        }
        if rels == 0 || delta.by_source.len() != letters.len() {
            return Err(Error::Automaton("one rule list per letter is required".into()));
        }
        let mut acc = vec![false; n];
        for q in accepting {
            *acc.get_mut(q as usize).ok_or_else(|| Error::Automaton(format!("accepting state {q} unknown")))? = true;
        }
        for rules in &delta.by_source {
            if rules.iter().any(|r| r.to as usize >= n || r.guards.iter().any(|g| g.rel >= rels)) {
                return Err(Error::Automaton("rule mentions an unknown state or relation".into()));
            }
        }
        let a = ForgetfulAutomaton { names, bits, rels, initial, accepting: acc, letters, delta };
        let all: Vec<StateId> = (0..n as StateId).collect();
        for (i, rules) in a.delta.by_source.iter().enumerate() {
            if rules.iter().any(Rule::is_catch_all) {
                continue;
            }
            for t in neighbor_tuples(&all, rels)? {
                if a.delta.lookup(i, &t).is_none() {
                    return Err(Error::Automaton(format!("δ_{} is not total", label_to_string(a.letters[i], bits))));
                }
            }
        }
        Ok(a)
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn rels(&self) -> usize {
        self.rels
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.names[q as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|s| s == name).map(|i| i as StateId)
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn accepting(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_count() as StateId).filter(|&q| self.accepting[q as usize])
    }

    pub fn letters(&self) -> &[Label] {
        &self.letters
    }

    pub fn rules(&self) -> &RuleTable<StateId> {
        &self.delta
    }

    fn letter_index(&self, a: Label) -> Result<usize> {
        self.letters.iter().position(|&l| l == a).ok_or_else(|| Error::Initialization(label_to_string(a, self.bits)))
    }

    /// `δ_a(N⃗)`.
    pub fn step(&self, a: Label, n: &[StateSet]) -> Result<StateId> {
        Ok(*self.delta.lookup(self.letter_index(a)?, n).expect("δ_a is total"))
    }
}

impl ForgetfulAutomaton {
    /// Equivalent ordinary automaton on states `(a, q)`: the letter is stored
    /// in the state and each guard is rewritten over the letter-blind
    /// projection, so `Eq` and `Supseteq` become conjunctions.
    pub fn to_distributed(&self) -> Result<DistributedAutomaton> {
        let (n, k) = (self.state_count(), self.letters.len());
        let universe = n * k;
        let pair = |i: usize, q: StateId| (i * n) as StateId + q;
        let lift = |s: &BitSet| -> Vec<StateId> { (0..k).flat_map(|i| s.iter().map(move |q| pair(i, q))).collect() };
        let mut names = Vec::with_capacity(universe);
        for &a in &self.letters {
            for q in &self.names {
                names.push(format!("{}:{q}", label_to_string(a, self.bits)));
            }
        }
        let mut delta = RuleTable::new(universe);
        for (i, rules) in self.delta.by_source.iter().enumerate() {
            let lifted: Vec<Rule<StateId>> = rules
                .iter()
                .map(|r| {
                    let mut guards = Vec::new();
                    for g in &r.guards {
                        let within = || Guard::of(g.rel, GuardOp::Subseteq, universe, lift(&g.set));
                        let each = || g.set.iter().map(|q| Guard::of(g.rel, GuardOp::Meets, universe, lift(&BitSet::from_states(n, [q]))));
                        match g.op {
                            GuardOp::Any => {}
                            GuardOp::Subseteq => guards.push(within()),
                            GuardOp::Meets => guards.push(Guard::of(g.rel, GuardOp::Meets, universe, lift(&g.set))),
                            GuardOp::Supseteq => guards.extend(each()),
                            GuardOp::Eq => {
                                guards.push(within());
                                guards.extend(each());
                            }
                        }
                    }
                    Rule { guards, to: pair(i, r.to) }
                })
                .collect();
            for q in 0..n {
                delta.by_source[i * n + q] = lifted.clone();
            }
        }
        let init = self.letters.iter().enumerate().map(|(i, &a)| (a, pair(i, self.initial))).collect();
        let accepting = (0..k).flat_map(|i| self.accepting().map(move |q| pair(i, q))).collect::<Vec<_>>();
        DistributedAutomaton::new(names, self.bits, self.rels, init, accepting, delta)
    }
}

/// `ρ0 ≡ q0`, `ρ_{t+1}(v) = δ_{λ(v)}(⟨{ρ_t(u) : (u,v) ∈ E_i}⟩_i)`.
pub fn forgetful_run(a: &ForgetfulAutomaton, d: &Digraph, horizon: Horizon) -> Result<SyncRun> {
    if d.rels() != a.rels {
        return Err(Error::Arity { expected: a.rels, found: d.rels() });
    }
    let idx: Vec<usize> = d.labels().iter().map(|&l| a.letter_index(l)).collect::<Result<_>>()?;
    let inc = d.incoming();
    let init = vec![a.initial; d.node_count()];
    let (configs, lasso) = run_until_lasso(init, horizon, |cur| {
        (0..cur.len()).map(|v| *a.delta.lookup(idx[v], &neighbor_sets(&inc[v], cur)).expect("total")).collect()
    })?;
    Ok(SyncRun { configs, lasso })
}

pub fn forgetful_accepted_nodes(a: &ForgetfulAutomaton, d: &Digraph) -> Result<Vec<bool>> {
    let run = forgetful_run(a, d, Horizon::default())?;
    let mut acc = vec![false; d.node_count()];
    for c in &run.configs {
        for (v, &q) in c.iter().enumerate() {
            acc[v] |= a.is_accepting(q);
        }
    }
    Ok(acc)
}

pub fn decide_acceptance_forgetful(a: &ForgetfulAutomaton, pd: &Pointed) -> Result<bool> {
    Ok(forgetful_accepted_nodes(a, &pd.graph)?[pd.point])
}

/// Random total automaton with one `Eq`-guarded rule per neighbor tuple.
pub fn random_forgetful(states: usize, bits: usize, rels: usize, rng: &mut impl rand::Rng) -> Result<ForgetfulAutomaton> {
    if states == 0 {
        return Err(Error::Automaton("at least one state is required".into()));
    }
    let all: Vec<StateId> = (0..states as StateId).collect();
    let tuples = neighbor_tuples(&all, rels)?;
    let letters: Vec<Label> = (0..1 << bits).collect();
    let mut delta = RuleTable::new(0);
    for _ in &letters {
        delta.by_source.push(
            tuples
                .iter()
                .map(|t| Rule {
                    guards: t
                        .iter()
                        .enumerate()
                        .map(|(i, s)| crate::rules::Guard::of(i, crate::rules::GuardOp::Eq, states, s.iter()))
                        .collect(),
                    to: rng.gen_range(0..states as StateId),
                })
                .collect(),
        );
    }
    let names = (0..states).map(|i| format!("q{i}")).collect();
    let accepting: Vec<StateId> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    ForgetfulAutomaton::new(names, bits, rels, 0, accepting, letters, delta)
}

/// External JSON form of a forgetful automaton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgetfulJson {
    pub states: Vec<String>,
    pub relations: usize,
    pub bits: usize,
    pub initial: String,
    pub accepting: Vec<String>,
    pub rules: Vec<LetterRuleJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LetterRuleJson {
    pub letter: String,
    #[serde(default)]
    pub guards: Vec<GuardJson>,
    pub to: String,
}

impl ForgetfulAutomaton {
    pub fn to_json(&self) -> ForgetfulJson {
        let mut rules = Vec::new();
        for (i, rs) in self.delta.by_source.iter().enumerate() {
            for r in rs {
                rules.push(LetterRuleJson {
                    letter: label_to_string(self.letters[i], self.bits),
                    guards: r.guards.iter().map(|g| guard_to_json(g, &self.names)).collect(),
                    to: self.names[r.to as usize].clone(),
                });
            }
        }
        ForgetfulJson {
            states: self.names.clone(),
            relations: self.rels,
            bits: self.bits,
            initial: self.names[self.initial as usize].clone(),
            accepting: self.accepting().map(|q| self.names[q as usize].clone()).collect(),
            rules,
        }
    }

    pub fn from_json(j: &ForgetfulJson) -> Result<Self> {
        let lookup = name_lookup(&j.states);
        let n = j.states.len();
        let mut letters: BTreeMap<Label, Vec<Rule<StateId>>> = BTreeMap::new();
        for r in &j.rules {
            if r.letter.len() != j.bits {
                return Err(Error::Automaton(format!("letter {:?} does not have {} bits", r.letter, j.bits)));
            }
            let guards = r.guards.iter().map(|g| guard_from_json(g, j.relations, &lookup, n)).collect::<Result<_>>()?;
            letters.entry(parse_label(&r.letter)?).or_default().push(Rule { guards, to: lookup(&r.to)? });
        }
        let (ls, rules): (Vec<Label>, Vec<_>) = letters.into_iter().unzip();
        let accepting = j.accepting.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
        Self::new(j.states.clone(), j.bits, j.relations, lookup(&j.initial)?, accepting, ls, RuleTable { by_source: rules })
    }
}

/// Builder referring to states by name and letters by bitstring.
#[derive(Clone, Debug, Default)]
pub struct ForgetfulBuilder {
    names: Vec<String>,
    bits: usize,
    rels: usize,
    initial: Option<StateId>,
    accepting: Vec<StateId>,
    rules: BTreeMap<Label, Vec<(Vec<(usize, crate::rules::GuardOp, Vec<StateId>)>, StateId)>>,
}

impl ForgetfulBuilder {
    pub fn new(bits: usize, rels: usize) -> Self {
        ForgetfulBuilder { bits, rels, ..Default::default() }
    }

    pub fn state(&mut self, name: &str) -> StateId {
        match self.names.iter().position(|s| s == name) {
            Some(i) => i as StateId,
            None => {
                self.names.push(name.to_string());
                (self.names.len() - 1) as StateId
            }
        }
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        self.initial = Some(self.state(name));
        self
    }

    pub fn accept(&mut self, name: &str) -> &mut Self {
        let q = self.state(name);
        self.accepting.push(q);
        self
    }

    /// Relations in `guards` are 1-based.
    pub fn rule(&mut self, letter: Label, guards: &[(usize, crate::rules::GuardOp, &[&str])], to: &str) -> &mut Self {
        let gs = guards.iter().map(|(r, op, s)| (r - 1, *op, s.iter().map(|x| self.state(x)).collect())).collect();
        let t = self.state(to);
        self.rules.entry(letter).or_default().push((gs, t));
        self
    }

    pub fn build(&self) -> Result<ForgetfulAutomaton> {
        let n = self.names.len();
        let mut letters = Vec::new();
        let mut table = RuleTable::new(0);
        for (&l, rs) in &self.rules {
            letters.push(l);
            table.by_source.push(
                rs.iter()
                    .map(|(gs, t)| Rule {
                        guards: gs.iter().map(|(r, op, s)| crate::rules::Guard::of(*r, *op, n, s.iter().copied())).collect(),
                        to: *t,
                    })
                    .collect(),
            );
        }
        let init = self.initial.ok_or_else(|| Error::Automaton("no initial state".into()))?;
        ForgetfulAutomaton::new(self.names.clone(), self.bits, self.rels, init, self.accepting.clone(), letters, table)
    }
}
