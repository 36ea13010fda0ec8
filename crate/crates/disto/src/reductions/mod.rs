//! Bridges to classical automata on words and trees, and the space-time
//! simulation of Turing machines.

mod turing;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forgetful::ForgetfulAutomaton;
use crate::graph::{label_to_string, parse_label, Digraph, Label, Pointed};
use crate::rules::{Guard, GuardOp, Rule, RuleTable};
use crate::sets::StateId;
use crate::sync::name_lookup;

pub use turing::{tm_to_da, Cell, Move, TmConfig, TmJson, TuringMachine, MAX_SPACE_TIME_STATES};

/// Largest forgetful automaton [`fda_to_dfa`] will determinize.
pub const MAX_POWERSET_STATES: usize = 16;

fn fresh_name(names: &[String], base: &str) -> String {
    let mut s = base.to_string();
    while names.contains(&s) {
        s.push('\'');
    }
    s
}

fn check_unique(names: &[String]) -> Result<()> {
    let mut v = names.to_vec();
    v.sort();
    v.dedup();
    if v.len() != names.len() || names.is_empty() {
        return Err(Error::Automaton("state names must be nonempty and distinct".into()));
    }
    Ok(())
}

/// Deterministic word automaton over an explicit list of letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    names: Vec<String>,
    bits: usize,
    letters: Vec<Label>,
    initial: usize,
    /// `delta[q][i]` is the successor of `q` on `letters[i]`.
    delta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn new(
        names: Vec<String>,
        bits: usize,
        letters: Vec<Label>,
        initial: usize,
        delta: Vec<Vec<usize>>,
        accepting: Vec<bool>,
    ) -> Result<Self> {
        check_unique(&names)?;
        let n = names.len();
        if initial >= n || delta.len() != n || accepting.len() != n {
            return Err(Error::Automaton("DFA components disagree on the state count".into()));
        }
        if delta.iter().any(|row| row.len() != letters.len() || row.iter().any(|&q| q >= n)) {
            return Err(Error::Automaton("DFA transition function is not total".into()));
        }
        Ok(Dfa { names, bits, letters, initial, delta, accepting })
    }

    /// Random DFA over all `2^bits` letters.
    pub fn random(states: usize, bits: usize, rng: &mut impl Rng) -> Self {
        let letters: Vec<Label> = (0..1 << bits).collect();
        let delta = (0..states).map(|_| letters.iter().map(|_| rng.gen_range(0..states)).collect()).collect();
        let accepting = (0..states).map(|_| rng.gen_bool(0.5)).collect();
        Dfa::new((0..states).map(|i| format!("s{i}")).collect(), bits, letters, 0, delta, accepting).expect("well-formed")
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn letters(&self) -> &[Label] {
        &self.letters
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn step(&self, q: usize, a: Label) -> Result<usize> {
        let i = self
            .letters
            .iter()
            .position(|&l| l == a)
            .ok_or_else(|| Error::Initialization(format!("letter {} is not in the alphabet", label_to_string(a, self.bits))))?;
        Ok(self.delta[q][i])
    }

    pub fn accepts(&self, word: &[Label]) -> Result<bool> {
        let q = word.iter().try_fold(self.initial, |q, &a| self.step(q, a))?;
        Ok(self.accepting[q])
    }
}

/// `{"bits", "letters", "states", "initial", "accepting", "delta": [[q, a, q']]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfaJson {
    pub bits: usize,
    pub letters: Vec<String>,
    pub states: Vec<String>,
    pub initial: String,
    pub accepting: Vec<String>,
    pub delta: Vec<(String, String, String)>,
}

impl Dfa {
    pub fn to_json(&self) -> DfaJson {
        let mut delta = Vec::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                delta.push((self.names[q].clone(), label_to_string(self.letters[i], self.bits), self.names[p].clone()));
            }
        }
        DfaJson {
            bits: self.bits,
            letters: self.letters.iter().map(|&l| label_to_string(l, self.bits)).collect(),
            states: self.names.clone(),
            initial: self.names[self.initial].clone(),
            accepting: (0..self.state_count()).filter(|&q| self.accepting[q]).map(|q| self.names[q].clone()).collect(),
            delta,
        }
    }

    pub fn from_json(j: &DfaJson) -> Result<Self> {
        check_unique(&j.states)?;
        let lookup = name_lookup(&j.states);
        let letters: Vec<Label> = j.letters.iter().map(|s| letter(s, j.bits)).collect::<Result<_>>()?;
        let n = j.states.len();
        let mut delta = vec![vec![usize::MAX; letters.len()]; n];
        for (q, a, p) in &j.delta {
            let a = letter(a, j.bits)?;
            let i = letters.iter().position(|&l| l == a).ok_or_else(|| Error::Automaton(format!("letter {a} not declared")))?;
            delta[lookup(q)? as usize][i] = lookup(p)? as usize;
        }
        let mut accepting = vec![false; n];
        for s in &j.accepting {
            accepting[lookup(s)? as usize] = true;
        }
        Dfa::new(j.states.clone(), j.bits, letters, lookup(&j.initial)? as usize, delta, accepting)
    }
}

fn letter(s: &str, bits: usize) -> Result<Label> {
    if s.len() != bits {
        return Err(Error::Format(format!("letter {s:?} does not have {bits} bits")));
    }
    parse_label(s)
}

/// Forgetful automaton that waits in `⊥` until its predecessor has settled,
/// then applies the DFA step once and stays.
pub fn dfa_to_fda(b: &Dfa) -> Result<ForgetfulAutomaton> {
    let n = b.state_count();
    let wait = n as StateId;
    let mut names = b.names.clone();
    names.push(fresh_name(&b.names, "⊥"));
    let universe = n + 1;
    let mut delta = RuleTable::new(0);
    for i in 0..b.letters.len() {
        let mut rules = vec![Rule { guards: vec![Guard::of(0, GuardOp::Eq, universe, [])], to: b.delta[b.initial][i] as StateId }];
        for q in 0..n {
            rules.push(Rule { guards: vec![Guard::of(0, GuardOp::Eq, universe, [q as StateId])], to: b.delta[q][i] as StateId });
        }
        rules.push(Rule { guards: vec![], to: wait });
        delta.by_source.push(rules);
    }
    let accepting = (0..n).filter(|&q| b.accepting[q]).map(|q| q as StateId);
    ForgetfulAutomaton::new(names, b.bits, 1, wait, accepting, b.letters.clone(), delta)
}

fn subset_name(a: &ForgetfulAutomaton, mask: usize) -> String {
    let inner: Vec<&str> = (0..a.state_count()).filter(|q| mask >> q & 1 == 1).map(|q| a.name(q as StateId)).collect();
    format!("{{{}}}", inner.join(","))
}

/// Powerset DFA whose state after a prefix is the set of states the
/// corresponding dipath node visits.
pub fn fda_to_dfa(a: &ForgetfulAutomaton) -> Result<Dfa> {
    if a.rels() != 1 {
        return Err(Error::Arity { expected: 1, found: a.rels() });
    }
    let n = a.state_count();
    if n > MAX_POWERSET_STATES {
        return Err(Error::Bound(format!("powerset of {n} states")));
    }
    let empty = crate::sets::StateSet::new();
    let q0 = 1usize << a.initial();
    let mut delta = vec![vec![0; a.letters().len()]; 1 << n];
    for (mask, row) in delta.iter_mut().enumerate() {
        for (i, &l) in a.letters().iter().enumerate() {
            let mut next = q0;
            if mask == 0 {
                next |= 1 << a.step(l, std::slice::from_ref(&empty))?;
            } else {
                for q in (0..n).filter(|q| mask >> q & 1 == 1) {
                    next |= 1 << a.step(l, &[crate::sets::StateSet::singleton(q as StateId)])?;
                }
            }
            row[i] = next;
        }
    }
    let accepting = (0..1usize << n).map(|m| (0..n).any(|q| m >> q & 1 == 1 && a.is_accepting(q as StateId))).collect();
    let names = (0..1 << n).map(|m| subset_name(a, m)).collect();
    Dfa::new(names, a.bits(), a.letters().to_vec(), 0, delta, accepting)
}

/// Deterministic bottom-up automaton on ordered ditrees with arity at most
/// `arity`, over all `2^bits` letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeAutomaton {
    names: Vec<String>,
    bits: usize,
    arity: usize,
    /// `delta[k]` is indexed by `(children in base n, then letter)`.
    delta: Vec<Vec<usize>>,
    accepting: Vec<bool>,
}

impl TreeAutomaton {
    pub fn new(names: Vec<String>, bits: usize, arity: usize, delta: Vec<Vec<usize>>, accepting: Vec<bool>) -> Result<Self> {
        check_unique(&names)?;
        let n = names.len();
        if arity == 0 || delta.len() != arity + 1 || accepting.len() != n {
            return Err(Error::Automaton("tree automaton needs one transition table per arity".into()));
        }
        for (k, table) in delta.iter().enumerate() {
            let size = n.checked_pow(k as u32).and_then(|x| x.checked_mul(1 << bits));
            if Some(table.len()) != size || table.iter().any(|&q| q >= n) {
                return Err(Error::Automaton(format!("transition table of arity {k} is not total")));
            }
        }
        Ok(TreeAutomaton { names, bits, arity, delta, accepting })
    }

    pub fn random(states: usize, bits: usize, arity: usize, rng: &mut impl Rng) -> Self {
        let delta = (0..=arity)
            .map(|k| (0..states.pow(k as u32) << bits).map(|_| rng.gen_range(0..states)).collect())
            .collect();
        let accepting = (0..states).map(|_| rng.gen_bool(0.5)).collect();
        TreeAutomaton::new((0..states).map(|i| format!("t{i}")).collect(), bits, arity, delta, accepting).expect("well-formed")
    }

    fn index(&self, children: &[usize], a: Label) -> usize {
        let n = self.names.len();
        (children.iter().fold(0, |acc, &c| acc * n + c) << self.bits) | a as usize
    }

    /// `Δ_k(q1, …, qk, a)`.
    pub fn transition(&self, children: &[usize], a: Label) -> usize {
        self.delta[children.len()][self.index(children, a)]
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Bottom-up acceptance at the root of a pointed ordered ditree.
    pub fn accepts(&self, pd: &Pointed) -> Result<bool> {
        let d = &pd.graph;
        if d.rels() != self.arity || !d.is_ordered_ditree() || d.ditree_root() != Some(pd.point) {
            return Err(Error::Digraph("expected an ordered ditree pointed at its root".into()));
        }
        let inc = d.incoming();
        fn eval(t: &TreeAutomaton, d: &Digraph, inc: &[Vec<Vec<usize>>], v: usize) -> usize {
            let children: Vec<usize> = inc[v].iter().map_while(|us| us.first()).map(|&u| eval(t, d, inc, u)).collect();
            t.transition(&children, d.label(v))
        }
        Ok(self.accepting[eval(self, d, &inc, pd.point)])
    }
}

/// `{"bits", "arity", "states", "accepting", "delta": [[[children…], a, q]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeAutomatonJson {
    pub bits: usize,
    pub arity: usize,
    pub states: Vec<String>,
    pub accepting: Vec<String>,
    pub delta: Vec<(Vec<String>, String, String)>,
}

impl TreeAutomaton {
    pub fn to_json(&self) -> TreeAutomatonJson {
        let n = self.names.len();
        let mut delta = Vec::new();
        for (k, table) in self.delta.iter().enumerate() {
            for (i, &q) in table.iter().enumerate() {
                let a = (i & ((1 << self.bits) - 1)) as Label;
                let mut code = i >> self.bits;
                let mut children = vec![String::new(); k];
                for c in children.iter_mut().rev() {
                    *c = self.names[code % n].clone();
                    code /= n;
                }
                delta.push((children, label_to_string(a, self.bits), self.names[q].clone()));
            }
        }
        TreeAutomatonJson {
            bits: self.bits,
            arity: self.arity,
            states: self.names.clone(),
            accepting: (0..n).filter(|&q| self.accepting[q]).map(|q| self.names[q].clone()).collect(),
            delta,
        }
    }

    pub fn from_json(j: &TreeAutomatonJson) -> Result<Self> {
        check_unique(&j.states)?;
        let lookup = name_lookup(&j.states);
        let n = j.states.len();
        let mut delta: Vec<Vec<usize>> = (0..=j.arity)
            .map(|k| vec![usize::MAX; n.checked_pow(k as u32).unwrap_or(usize::MAX).saturating_mul(1 << j.bits).min(1 << 24)])
            .collect();
        for (children, a, q) in &j.delta {
            if children.len() > j.arity {
                return Err(Error::Automaton("transition exceeds the arity".into()));
            }
            let code = children.iter().try_fold(0usize, |acc, c| Ok::<_, Error>(acc * n + lookup(c)? as usize))?;
            let i = code << j.bits | letter(a, j.bits)? as usize;
            *delta[children.len()].get_mut(i).ok_or_else(|| Error::Bound("tree automaton too large".into()))? = lookup(q)? as usize;
        }
        let mut accepting = vec![false; n];
        for s in &j.accepting {
            accepting[lookup(s)? as usize] = true;
        }
        TreeAutomaton::new(j.states.clone(), j.bits, j.arity, delta, accepting)
    }
}

/// Forgetful automaton that waits until exactly the first `k` relations
/// each show one settled state, then applies `Δ_k` once.
pub fn treeautomaton_to_fda(t: &TreeAutomaton) -> Result<ForgetfulAutomaton> {
    let n = t.state_count();
    let wait = n as StateId;
    let mut names = t.names.clone();
    names.push(fresh_name(&t.names, "⊥"));
    let universe = n + 1;
    let letters: Vec<Label> = (0..1 << t.bits).collect();
    let mut delta = RuleTable::new(0);
    for &a in &letters {
        let mut rules = Vec::new();
        for k in 0..=t.arity {
            for code in 0..n.pow(k as u32) {
                let mut children = vec![0; k];
                let mut c = code;
                for x in children.iter_mut().rev() {
                    *x = c % n;
                    c /= n;
                }
                let guards = (0..t.arity)
                    .map(|i| match children.get(i) {
                        Some(&q) => Guard::of(i, GuardOp::Eq, universe, [q as StateId]),
                        None => Guard::of(i, GuardOp::Eq, universe, []),
                    })
                    .collect();
                rules.push(Rule { guards, to: t.transition(&children, a) as StateId });
            }
        }
        rules.push(Rule { guards: vec![], to: wait });
        delta.by_source.push(rules);
    }
    let accepting = (0..n).filter(|&q| t.accepting[q]).map(|q| q as StateId);
    ForgetfulAutomaton::new(names, t.bits, t.arity, wait, accepting, letters, delta)
}

/// The automaton a node runs when only relation 1 carries edges: guards on
/// other relations are evaluated against the empty set.
pub fn first_relation_restriction(a: &ForgetfulAutomaton) -> Result<ForgetfulAutomaton> {
    let empty = vec![crate::sets::StateSet::new(); a.rels()];
    let mut delta = RuleTable::new(0);
    for rules in &a.rules().by_source {
        let kept = rules
            .iter()
            .filter(|r| r.guards.iter().filter(|g| g.rel > 0).all(|g| g.holds(&empty)))
            .map(|r| Rule { guards: r.guards.iter().filter(|g| g.rel == 0).cloned().collect(), to: r.to })
            .collect();
        delta.by_source.push(kept);
    }
    ForgetfulAutomaton::new(a.names().to_vec(), a.bits(), 1, a.initial(), a.accepting().collect::<Vec<_>>(), a.letters().to_vec(), delta)
}

/// Whether every node's two subtrees (missing ones have height −1) have
/// equal heights. Binary ordered ditrees only.
pub fn is_perfectly_balanced(pd: &Pointed) -> bool {
    let inc = pd.graph.incoming();
    fn height(inc: &[Vec<Vec<usize>>], v: usize) -> Option<i64> {
        let hs: Vec<i64> = (0..2)
            .map(|i| inc[v].get(i).and_then(|us| us.first()).map_or(Some(-1), |&u| height(inc, u)))
            .collect::<Option<_>>()?;
        (hs[0] == hs[1]).then_some(hs[0] + 1)
    }
    height(&inc, pd.point).is_some()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::catalog::unbalanced_ditree;
    use crate::forgetful::{decide_acceptance_forgetful, random_forgetful};
    use crate::graph::{ordered_binary_ditrees_by_height, ordered_ditrees, word_dipath};

    fn words(bits: usize, max_len: usize) -> Vec<Vec<Label>> {
        let mut out = Vec::new();
        let k = 1usize << bits;
        for len in 1..=max_len {
            for code in 0..k.pow(len as u32) {
                out.push((0..len).map(|i| (code / k.pow(i as u32) % k) as Label).collect());
            }
        }
        out
    }

    fn even_ones() -> Dfa {
        Dfa::new(vec!["even".into(), "odd".into()], 1, vec![0, 1], 0, vec![vec![0, 1], vec![1, 0]], vec![true, false]).unwrap()
    }

    #[test]
    fn even_ones_on_dipaths() {
        let b = even_ones();
        let a = dfa_to_fda(&b).unwrap();
        for w in words(1, 8) {
            assert_eq!(decide_acceptance_forgetful(&a, &word_dipath(1, &w).unwrap()).unwrap(), b.accepts(&w).unwrap(), "{w:?}");
        }
        let back = fda_to_dfa(&a).unwrap();
        assert_eq!(back.state_count(), 8);
        for w in words(1, 8) {
            assert_eq!(back.accepts(&w).unwrap(), b.accepts(&w).unwrap());
        }
    }

    #[test]
    fn trivial_dfas() {
        let all = Dfa::new(vec!["s".into()], 1, vec![0, 1], 0, vec![vec![0, 0]], vec![true]).unwrap();
        let none = Dfa::new(vec!["s".into()], 1, vec![0, 1], 0, vec![vec![0, 0]], vec![false]).unwrap();
        for w in words(1, 4) {
            let pd = word_dipath(1, &w).unwrap();
            assert!(decide_acceptance_forgetful(&dfa_to_fda(&all).unwrap(), &pd).unwrap());
            assert!(!decide_acceptance_forgetful(&dfa_to_fda(&none).unwrap(), &pd).unwrap());
        }
    }

    #[test]
    fn initial_accepting_fda_gives_universal_dfa() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = loop {
            let a = random_forgetful(3, 1, 1, &mut rng).unwrap();
            if a.is_accepting(a.initial()) {
                break a;
            }
        };
        let b = fda_to_dfa(&a).unwrap();
        assert!(words(1, 5).iter().all(|w| b.accepts(w).unwrap()));
    }

    #[test]
    fn random_word_bridges() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ws = words(1, 6);
        for _ in 0..5 {
            let b = Dfa::random(rng.gen_range(1..=4), 1, &mut rng);
            let a = dfa_to_fda(&b).unwrap();
            let a2 = random_forgetful(rng.gen_range(1..=3), 1, 1, &mut rng).unwrap();
            let b2 = fda_to_dfa(&a2).unwrap();
            for w in &ws {
                let pd = word_dipath(1, w).unwrap();
                assert_eq!(decide_acceptance_forgetful(&a, &pd).unwrap(), b.accepts(w).unwrap());
                assert_eq!(decide_acceptance_forgetful(&a2, &pd).unwrap(), b2.accepts(w).unwrap());
            }
        }
    }

    #[test]
    fn dfa_json_roundtrip() {
        let b = Dfa::random(3, 1, &mut ChaCha8Rng::seed_from_u64(1));
        let text = serde_json::to_string(&b.to_json()).unwrap();
        assert_eq!(Dfa::from_json(&serde_json::from_str(&text).unwrap()).unwrap(), b);
    }

    /// Parity of the number of leaves.
    fn leaf_parity() -> TreeAutomaton {
        let delta = vec![vec![1], vec![0, 1], vec![0, 1, 1, 0]];
        TreeAutomaton::new(vec!["even".into(), "odd".into()], 0, 2, delta, vec![false, true]).unwrap()
    }

    #[test]
    fn tree_bridge() {
        let mut tas = vec![leaf_parity()];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        tas.extend((0..3).map(|_| TreeAutomaton::random(rng.gen_range(1..=3), 0, 2, &mut rng)));
        let trees = ordered_ditrees(5, 2).unwrap();
        for t in &tas {
            let a = treeautomaton_to_fda(t).unwrap();
            for d in &trees {
                let pd = d.clone().pointed(0).unwrap();
                assert_eq!(decide_acceptance_forgetful(&a, &pd).unwrap(), t.accepts(&pd).unwrap());
            }
        }
        let star = Digraph::unlabeled(3, 2, [(0, 1, 0), (1, 2, 0)]).unwrap().pointed(0).unwrap();
        assert!(!leaf_parity().accepts(&star).unwrap());
        let gap = Digraph::unlabeled(2, 2, [(1, 1, 0)]).unwrap().pointed(0).unwrap();
        assert!(leaf_parity().accepts(&gap).is_err());
    }

    #[test]
    fn tree_automaton_json_roundtrip() {
        let t = TreeAutomaton::random(2, 1, 2, &mut ChaCha8Rng::seed_from_u64(2));
        let text = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(TreeAutomaton::from_json(&serde_json::from_str(&text).unwrap()).unwrap(), t);
    }

    #[test]
    fn unbalanced_trees() {
        let a = unbalanced_ditree();
        for d in ordered_binary_ditrees_by_height(3) {
            let pd = d.pointed(0).unwrap();
            assert_eq!(decide_acceptance_forgetful(&a, &pd).unwrap(), !is_perfectly_balanced(&pd));
        }
    }

    #[test]
    fn unbalanced_on_dipaths() {
        let a = first_relation_restriction(&unbalanced_ditree()).unwrap();
        let b = fda_to_dfa(&a).unwrap();
        for n in 1..=6 {
            let pd = crate::graph::dipath(n).unwrap();
            assert_eq!(decide_acceptance_forgetful(&a, &pd).unwrap(), b.accepts(&vec![0; n]).unwrap());
            assert_eq!(b.accepts(&vec![0; n]).unwrap(), n > 1);
        }
    }
}
