//! Alternating local distributed automata with a global acceptance
//! condition: leveled state sets, run semantics as a finite game, Boolean
//! closure constructions, a compiler from MSO, and bounded emptiness.

mod closure;
mod emptiness;
mod mso;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{label_to_string, Digraph, Label};
use crate::rules::{guard_from_json, guard_to_json, Guard, GuardJson, GuardOp, Rule, RuleTable};
use crate::sets::{StateId, StateSet};
use crate::sync::{name_lookup, parse_init};

pub use closure::{apply_closure, complement, intersect, normalize, project, prune, relabel, union, ClosureKind, Projection};
pub use emptiness::{nldag_emptiness, Emptiness, EmptinessMode, MAX_EMPTINESS_NODES};
pub use mso::compile_mso_to_aldag;

/// Largest permanent-state count for which accepting sets are listed
/// explicitly (JSON output enumerates all subsets).
pub const MAX_LISTED_PERMANENT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "E")]
    Existential,
    #[serde(rename = "U")]
    Universal,
    #[serde(rename = "P")]
    Permanent,
}

/// Membership test for the accepting sets. Constructions compose these
/// predicates instead of listing `2^|P|` subsets.
#[derive(Clone)]
pub struct Acceptance(Arc<dyn Fn(&[StateId]) -> bool + Send + Sync>);

impl Acceptance {
    pub fn new(f: impl Fn(&[StateId]) -> bool + Send + Sync + 'static) -> Self {
        Acceptance(Arc::new(f))
    }

    /// Explicit list of accepting sets.
    pub fn from_sets(sets: impl IntoIterator<Item = Vec<StateId>>) -> Self {
        let sets: BTreeSet<StateSet> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Acceptance::new(move |f| sets.contains(&f.iter().copied().collect::<StateSet>()))
    }

    pub fn none() -> Self {
        Acceptance::new(|_| false)
    }

    /// `f` must be sorted and duplicate-free.
    pub fn accepts(&self, f: &[StateId]) -> bool {
        (self.0)(f)
    }
}

impl fmt::Debug for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Acceptance(..)")
    }
}

/// `⟨⟨E, U, P⟩, ι, δ, Acc⟩`. Permanent states carry no rules; their
/// transitions are the implicit self-loops.
#[derive(Clone, Debug)]
pub struct AltAutomaton {
    names: Vec<String>,
    kinds: Vec<Kind>,
    bits: usize,
    rels: usize,
    /// Indexed by label; total over `0..2^bits`.
    init: Vec<StateId>,
    delta: RuleTable<Vec<StateId>>,
    acc: Acceptance,
    ids: Vec<StateId>,
}

impl AltAutomaton {
    /// Structural checks only; the level discipline is reported by
    /// [`validate_alt`].
    pub fn new(
        names: Vec<String>,
        kinds: Vec<Kind>,
        bits: usize,
        rels: usize,
        init: Vec<StateId>,
        mut delta: RuleTable<Vec<StateId>>,
        acc: Acceptance,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 || kinds.len() != n || delta.by_source.len() != n {
            return Err(Error::Automaton("state names, kinds and rule table differ in size".into()));
        }
        if rels == 0 {
            return Err(Error::Automaton("no relations".into()));
        }
        if bits > 16 || init.len() != 1 << bits {
            return Err(Error::Automaton(format!("initialization must cover all {} labels", 1u64 << bits.min(63))));
        }
        if init.iter().any(|&q| q as usize >= n) {
            return Err(Error::Automaton("initial state out of range".into()));
        }
        for (q, rules) in delta.by_source.iter_mut().enumerate() {
            if kinds[q] == Kind::Permanent {
                if !rules.is_empty() {
                    return Err(Error::Automaton(format!("permanent state {} has outgoing rules", names[q])));
                }
                continue;
            }
            if !rules.iter().any(Rule::is_catch_all) {
                return Err(Error::Automaton(format!("no catch-all rule for {}", names[q])));
            }
            for r in rules.iter_mut() {
                r.to.sort_unstable();
                r.to.dedup();
                if r.to.is_empty() {
                    return Err(Error::Automaton(format!("empty target set in a rule of {}", names[q])));
                }
                if r.to.iter().any(|&t| t as usize >= n) || r.guards.iter().any(|g| g.rel >= rels) {
                    return Err(Error::Automaton("rule mentions an unknown state or relation".into()));
                }
            }
        }
        let ids = (0..n as StateId).collect();
        Ok(AltAutomaton { names, kinds, bits, rels, init, delta, acc, ids })
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

    pub fn kind(&self, q: StateId) -> Kind {
        self.kinds[q as usize]
    }

    pub fn kinds(&self) -> &[Kind] {
        &self.kinds
    }

    pub fn init_state(&self, label: Label) -> StateId {
        self.init[label as usize]
    }

    pub fn init_vec(&self) -> &[StateId] {
        &self.init
    }

    pub fn rules(&self) -> &RuleTable<Vec<StateId>> {
        &self.delta
    }

    pub fn acceptance(&self) -> &Acceptance {
        &self.acc
    }

    pub fn is_permanent(&self, q: StateId) -> bool {
        self.kinds[q as usize] == Kind::Permanent
    }

    pub fn permanent_states(&self) -> Vec<StateId> {
        (0..self.state_count() as StateId).filter(|&q| self.is_permanent(q)).collect()
    }

    pub fn is_nondeterministic(&self) -> bool {
        !self.kinds.contains(&Kind::Universal)
    }

    /// `F ∈ Acc` for a set of permanent states (sorted, duplicate-free).
    pub fn accepts_set(&self, f: &[StateId]) -> bool {
        f.iter().all(|&q| self.is_permanent(q)) && self.acc.accepts(f)
    }

    /// `δ(q, N⃗)`.
    pub fn local(&self, q: StateId, n: &[StateSet]) -> &[StateId] {
        if self.is_permanent(q) {
            return &self.ids[q as usize..=q as usize];
        }
        self.delta.lookup(q as usize, n).expect("catch-all rule present")
    }

    /// Every state is reachable only through the rule targets listed here
    /// (targets of possibly shadowed rules included).
    pub(crate) fn syntactic_successors(&self, q: StateId) -> BTreeSet<StateId> {
        if self.is_permanent(q) {
            return [q].into();
        }
        self.delta.by_source[q as usize].iter().flat_map(|r| r.to.iter().copied()).collect()
    }

    /// Same automaton with states renamed `s0, s1, …`.
    pub fn with_plain_names(mut self) -> Self {
        self.names = (0..self.names.len()).map(|i| format!("s{i}")).collect();
        self
    }
}

/// Why no level assignment exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelViolation {
    NoPermanentState,
    /// A cycle among nonpermanent states through the named state.
    Cycle(String),
    /// The state receives transitions from two different levels.
    Inconsistent(String),
    /// An initial nonpermanent state is not on the lowest level.
    InitialNotLowest(String),
    /// States of different types share this level.
    MixedTypes(usize),
}

impl fmt::Display for LevelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelViolation::NoPermanentState => write!(f, "no permanent state"),
            LevelViolation::Cycle(q) => write!(f, "cycle through nonpermanent state {q}"),
            LevelViolation::Inconsistent(q) => write!(f, "state {q} is entered from two different levels"),
            LevelViolation::InitialNotLowest(q) => write!(f, "initial state {q} is neither permanent nor on level 0"),
            LevelViolation::MixedTypes(l) => write!(f, "level {l} mixes existential and universal states"),
        }
    }
}

/// The level of every state and the automaton length (the highest level).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Levels {
    pub level: Vec<usize>,
    pub length: usize,
}

impl Levels {
    /// Nonpermanent states grouped by level.
    pub fn layers(&self, a: &AltAutomaton) -> Vec<Vec<StateId>> {
        let top = if a.kinds.iter().all(|&k| k == Kind::Permanent) { 0 } else { self.length };
        let mut out = vec![Vec::new(); top];
        for q in 0..a.state_count() as StateId {
            if !a.is_permanent(q) {
                out[self.level[q as usize]].push(q);
            }
        }
        out
    }
}

pub fn validate_alt(a: &AltAutomaton) -> std::result::Result<Levels, LevelViolation> {
    let n = a.state_count();
    if !a.kinds.contains(&Kind::Permanent) {
        return Err(LevelViolation::NoPermanentState);
    }
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for p in 0..n {
        if a.kinds[p] == Kind::Permanent {
            continue;
        }
        for q in a.syntactic_successors(p as StateId) {
            if !a.is_permanent(q) {
                preds[q as usize].insert(p);
            }
        }
    }
    // Kahn's algorithm over nonpermanent states.
    let mut indeg: Vec<usize> = preds.iter().map(BTreeSet::len).collect();
    let mut order: Vec<usize> = (0..n).filter(|&q| a.kinds[q] != Kind::Permanent && indeg[q] == 0).collect();
    let mut i = 0;
    while i < order.len() {
        let p = order[i];
        i += 1;
        for q in a.syntactic_successors(p as StateId) {
            let q = q as usize;
            if a.kinds[q] != Kind::Permanent {
                indeg[q] -= 1;
                if indeg[q] == 0 {
                    order.push(q);
                }
            }
        }
    }
    let nonpermanent = (0..n).filter(|&q| a.kinds[q] != Kind::Permanent).count();
    if order.len() < nonpermanent {
        let q = (0..n).find(|&q| a.kinds[q] != Kind::Permanent && indeg[q] > 0).unwrap();
        return Err(LevelViolation::Cycle(a.names[q].clone()));
    }
    let mut level = vec![0usize; n];
    for &q in &order {
        let ls: BTreeSet<usize> = preds[q].iter().map(|&p| level[p]).collect();
        match ls.len() {
            0 => level[q] = 0,
            1 => level[q] = ls.first().unwrap() + 1,
            _ => return Err(LevelViolation::Inconsistent(a.names[q].clone())),
        }
    }
    for &q in &a.init {
        let q = q as usize;
        if a.kinds[q] != Kind::Permanent && level[q] != 0 {
            return Err(LevelViolation::InitialNotLowest(a.names[q].clone()));
        }
    }
    let mut types: BTreeMap<usize, Kind> = BTreeMap::new();
    for &q in &order {
        if *types.entry(level[q]).or_insert(a.kinds[q]) != a.kinds[q] {
            return Err(LevelViolation::MixedTypes(level[q]));
        }
    }
    let length = if nonpermanent == 0 { 0 } else { order.iter().map(|&q| level[q]).max().unwrap() + 1 };
    for q in 0..n {
        if a.kinds[q] == Kind::Permanent {
            level[q] = length;
        }
    }
    Ok(Levels { level, length })
}

/// A configuration assigns a state to every node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AltConfiguration(pub Vec<StateId>);

impl AltConfiguration {
    pub fn initial(a: &AltAutomaton, d: &Digraph) -> Self {
        AltConfiguration(d.labels().iter().map(|&l| a.init_state(l)).collect())
    }

    pub fn kind(&self, a: &AltAutomaton) -> Kind {
        config_kind(a, &self.0)
    }

    /// States occurring in the configuration.
    pub fn state_set(&self) -> Vec<StateId> {
        let s: StateSet = self.0.iter().copied().collect();
        s.as_slice().to_vec()
    }
}

fn config_kind(a: &AltAutomaton, c: &[StateId]) -> Kind {
    if c.iter().any(|&q| a.kind(q) == Kind::Universal) {
        Kind::Universal
    } else if c.iter().any(|&q| a.kind(q) == Kind::Existential) {
        Kind::Existential
    } else {
        Kind::Permanent
    }
}

fn check_input(a: &AltAutomaton, d: &Digraph) -> Result<()> {
    if d.rels() != a.rels {
        return Err(Error::Arity { expected: a.rels, found: d.rels() });
    }
    if d.bits() != a.bits {
        return Err(Error::Automaton(format!("automaton reads {}-bit labels, digraph has {}", a.bits, d.bits())));
    }
    Ok(())
}

/// Local choices of every node in configuration `c`.
fn local_options<'a>(a: &'a AltAutomaton, incoming: &[Vec<Vec<usize>>], c: &[StateId]) -> Vec<&'a [StateId]> {
    (0..c.len())
        .map(|v| {
            if a.is_permanent(c[v]) {
                return &a.init[..0];
            }
            let n: Vec<StateSet> = incoming[v].iter().map(|us| us.iter().map(|&u| c[u]).collect()).collect();
            a.local(c[v], &n)
        })
        .collect()
}

/// Calls `f` on every element of the product of `opts` (an empty option
/// list keeps the current state) until it returns `false`.
fn for_each_successor(c: &[StateId], opts: &[&[StateId]], mut f: impl FnMut(&[StateId]) -> bool) {
    let mut idx = vec![0usize; c.len()];
    let mut cur: Vec<StateId> = c.iter().zip(opts).map(|(&q, o)| o.first().copied().unwrap_or(q)).collect();
    loop {
        if !f(&cur) {
            return;
        }
        let mut v = 0;
        loop {
            if v == c.len() {
                return;
            }
            if idx[v] + 1 < opts[v].len() {
                idx[v] += 1;
                cur[v] = opts[v][idx[v]];
                break;
            }
            idx[v] = 0;
            if let Some(&q) = opts[v].first() {
                cur[v] = q;
            }
            v += 1;
        }
    }
}

/// All successor configurations of `c`.
pub fn global_successors(a: &AltAutomaton, c: &AltConfiguration, d: &Digraph) -> Result<BTreeSet<AltConfiguration>> {
    check_input(a, d)?;
    if c.0.len() != d.node_count() || c.0.iter().any(|&q| q as usize >= a.state_count()) {
        return Err(Error::Automaton("configuration does not fit the digraph".into()));
    }
    let incoming = d.incoming();
    let opts = local_options(a, &incoming, &c.0);
    let mut out = BTreeSet::new();
    for_each_successor(&c.0, &opts, |s| {
        out.insert(AltConfiguration(s.to_vec()));
        true
    });
    Ok(out)
}

struct Game<'a> {
    a: &'a AltAutomaton,
    incoming: Vec<Vec<Vec<usize>>>,
    memo: HashMap<Vec<StateId>, bool>,
}

impl Game<'_> {
    fn win(&mut self, c: &[StateId]) -> bool {
        if let Some(&w) = self.memo.get(c) {
            return w;
        }
        let w = match config_kind(self.a, c) {
            Kind::Permanent => {
                let f: StateSet = c.iter().copied().collect();
                self.a.acc.accepts(f.as_slice())
            }
            kind => {
                let opts = local_options(self.a, &self.incoming, c);
                let existential = kind == Kind::Existential;
                let mut result = !existential;
                let mut succs = Vec::new();
                for_each_successor(c, &opts, |s| {
                    succs.push(s.to_vec());
                    true
                });
                for s in succs {
                    if self.win(&s) == existential {
                        result = existential;
                        break;
                    }
                }
                result
            }
        };
        self.memo.insert(c.to_vec(), w);
        w
    }
}

/// Whether an accepting run exists, decided by evaluating the configuration
/// game: existential configurations need one winning successor, universal
/// ones need all.
pub fn decide_acceptance_alt(a: &AltAutomaton, d: &Digraph) -> Result<bool> {
    check_input(a, d)?;
    validate_alt(a).map_err(|v| Error::Automaton(v.to_string()))?;
    let mut g = Game { a, incoming: d.incoming(), memo: HashMap::new() };
    Ok(g.win(&AltConfiguration::initial(a, d).0))
}

/// Accepting sets listed explicitly; fails beyond [`MAX_LISTED_PERMANENT`]
/// permanent states.
pub fn accepting_sets(a: &AltAutomaton) -> Result<Vec<Vec<StateId>>> {
    let p = a.permanent_states();
    if p.len() > MAX_LISTED_PERMANENT {
        return Err(Error::Bound(format!("{} permanent states are too many to list accepting sets", p.len())));
    }
    let mut out = Vec::new();
    for m in 1u32..1 << p.len() {
        let f: Vec<StateId> = p.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &q)| q).collect();
        if a.acc.accepts(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

/// Builder for hand-written automata; relations in guards are 1-based.
#[derive(Default)]
pub struct AltBuilder {
    names: Vec<String>,
    kinds: Vec<Kind>,
    bits: usize,
    rels: usize,
    init: BTreeMap<Label, StateId>,
    rules: Vec<(StateId, Vec<(usize, GuardOp, Vec<StateId>)>, Vec<StateId>)>,
    accepting: Vec<Vec<StateId>>,
}

impl AltBuilder {
    pub fn new(bits: usize, rels: usize) -> Self {
        AltBuilder { bits, rels, ..Default::default() }
    }

    /// Declares a state, or returns the id of an existing one.
    pub fn state(&mut self, name: &str, kind: Kind) -> StateId {
        match self.names.iter().position(|s| s == name) {
            Some(i) => i as StateId,
            None => {
                self.names.push(name.to_string());
                self.kinds.push(kind);
                (self.names.len() - 1) as StateId
            }
        }
    }

    fn id(&self, name: &str) -> StateId {
        self.names.iter().position(|s| s == name).unwrap_or_else(|| panic!("undeclared state {name}")) as StateId
    }

    pub fn init(&mut self, label: Label, state: &str) -> &mut Self {
        let q = self.id(state);
        self.init.insert(label, q);
        self
    }

    /// Same initial state for every label.
    pub fn init_all(&mut self, state: &str) -> &mut Self {
        for l in 0..1 << self.bits {
            self.init(l, state);
        }
        self
    }

    pub fn rule(&mut self, from: &str, guards: &[(usize, GuardOp, &[&str])], to: &[&str]) -> &mut Self {
        let f = self.id(from);
        let gs = guards.iter().map(|(r, op, set)| (r - 1, *op, set.iter().map(|s| self.id(s)).collect())).collect();
        let t = to.iter().map(|s| self.id(s)).collect();
        self.rules.push((f, gs, t));
        self
    }

    pub fn accepting_set(&mut self, states: &[&str]) -> &mut Self {
        let s = states.iter().map(|s| self.id(s)).collect();
        self.accepting.push(s);
        self
    }

    pub fn build(&self) -> Result<AltAutomaton> {
        let n = self.names.len();
        let mut delta = RuleTable::new(n);
        for (f, gs, t) in &self.rules {
            let guards = gs.iter().map(|(r, op, set)| Guard::of(*r, *op, n, set.iter().copied())).collect();
            delta.push(*f as usize, Rule { guards, to: t.clone() });
        }
        let init = (0..1 << self.bits)
            .map(|l| self.init.get(&l).copied().ok_or_else(|| Error::Initialization(label_to_string(l, self.bits))))
            .collect::<Result<Vec<_>>>()?;
        AltAutomaton::new(
            self.names.clone(),
            self.kinds.clone(),
            self.bits,
            self.rels,
            init,
            delta,
            Acceptance::from_sets(self.accepting.clone()),
        )
    }
}

/// External JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltJson {
    pub states: Vec<String>,
    pub kind: BTreeMap<String, Kind>,
    pub relations: usize,
    pub init: BTreeMap<String, String>,
    #[serde(default)]
    pub rules: Vec<AltRuleJson>,
    pub accepting_sets: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltRuleJson {
    pub from: String,
    #[serde(default)]
    pub guards: Vec<GuardJson>,
    pub to: Vec<String>,
}

impl AltAutomaton {
    pub fn to_json(&self) -> Result<AltJson> {
        let name = |q: &StateId| self.names[*q as usize].clone();
        let mut rules = Vec::new();
        for (q, rs) in self.delta.by_source.iter().enumerate() {
            for r in rs {
                rules.push(AltRuleJson {
                    from: self.names[q].clone(),
                    guards: r.guards.iter().map(|g| guard_to_json(g, &self.names)).collect(),
                    to: r.to.iter().map(name).collect(),
                });
            }
        }
        Ok(AltJson {
            states: self.names.clone(),
            kind: self.names.iter().cloned().zip(self.kinds.iter().copied()).collect(),
            relations: self.rels,
            init: self.init.iter().enumerate().map(|(l, q)| (label_to_string(l as Label, self.bits), name(q))).collect(),
            rules,
            accepting_sets: accepting_sets(self)?.iter().map(|f| f.iter().map(name).collect()).collect(),
        })
    }

    pub fn from_json(j: &AltJson) -> Result<Self> {
        let lookup = name_lookup(&j.states);
        let n = j.states.len();
        if j.states.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Automaton("duplicate state names".into()));
        }
        let kinds = j
            .states
            .iter()
            .map(|s| j.kind.get(s).copied().ok_or_else(|| Error::Automaton(format!("no kind for state {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let (bits, init_map) = parse_init(&j.init, &lookup)?;
        let init = (0..1u32 << bits)
            .map(|l| init_map.get(&l).copied().ok_or_else(|| Error::Initialization(label_to_string(l, bits))))
            .collect::<Result<Vec<_>>>()?;
        let mut delta = RuleTable::new(n);
        for r in &j.rules {
            let guards = r.guards.iter().map(|g| guard_from_json(g, j.relations, &lookup, n)).collect::<Result<Vec<_>>>()?;
            let to = r.to.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
            delta.push(lookup(&r.from)? as usize, Rule { guards, to });
        }
        let mut sets = Vec::new();
        for f in &j.accepting_sets {
            let f = f.iter().map(|s| lookup(s)).collect::<Result<Vec<_>>>()?;
            if f.iter().any(|&q| kinds[q as usize] != Kind::Permanent) {
                return Err(Error::Automaton("accepting sets may only contain permanent states".into()));
            }
            sets.push(f);
        }
        AltAutomaton::new(j.states.clone(), kinds, bits, j.relations, init, delta, Acceptance::from_sets(sets))
    }
}
