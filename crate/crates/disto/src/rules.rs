//! Ordered guarded transition rules, shared by all automaton models.
//!
//! A rule fires when every one of its guards holds for the tuple of
//! neighbor state sets; the first firing rule wins. A rule without guards
//! always fires, which is how "otherwise" is written.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{BitSet, StateId, StateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuardOp {
    /// `N_i ⊆ S`
    Subseteq,
    /// `S ⊆ N_i`
    Supseteq,
    /// `N_i = S`
    Eq,
    /// `N_i ∩ S ≠ ∅`
    Meets,
    /// always true
    Any,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Guard {
    /// 0-based relation index.
    pub rel: usize,
    pub op: GuardOp,
    pub set: BitSet,
    size: usize,
}

impl Guard {
    pub fn new(rel: usize, op: GuardOp, set: BitSet) -> Self {
        let size = set.count();
        Guard { rel, op, set, size }
    }

    pub fn of(rel: usize, op: GuardOp, universe: usize, states: impl IntoIterator<Item = StateId>) -> Self {
        Self::new(rel, op, BitSet::from_states(universe, states))
    }

    pub fn holds(&self, n: &[StateSet]) -> bool {
        let ni = &n[self.rel];
        match self.op {
            GuardOp::Any => true,
            GuardOp::Subseteq => ni.iter().all(|q| self.set.contains(q)),
            GuardOp::Supseteq => self.size <= ni.len() && self.set.iter().all(|q| ni.contains(q)),
            GuardOp::Eq => self.size == ni.len() && ni.iter().all(|q| self.set.contains(q)),
            GuardOp::Meets => ni.iter().any(|q| self.set.contains(q)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule<T> {
    pub guards: Vec<Guard>,
    pub to: T,
}

impl<T> Rule<T> {
    pub fn fires(&self, n: &[StateSet]) -> bool {
        self.guards.iter().all(|g| g.holds(n))
    }

    pub fn is_catch_all(&self) -> bool {
        self.guards.iter().all(|g| g.op == GuardOp::Any)
    }
}

/// Rules indexed by a source (a state, or a letter for forgetful automata).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable<T> {
    pub by_source: Vec<Vec<Rule<T>>>,
}

impl<T> RuleTable<T> {
    pub fn new(sources: usize) -> Self {
        RuleTable { by_source: (0..sources).map(|_| Vec::new()).collect() }
    }

    pub fn push(&mut self, src: usize, rule: Rule<T>) {
        self.by_source[src].push(rule);
    }

    pub fn lookup(&self, src: usize, n: &[StateSet]) -> Option<&T> {
        self.by_source[src].iter().find(|r| r.fires(n)).map(|r| &r.to)
    }

    /// Totality is only checked syntactically: each source needs a final
    /// catch-all rule. Callers that build exhaustive tables may skip this.
    pub fn check_catch_all(&self, name: impl Fn(usize) -> String) -> Result<()> {
        for (src, rules) in self.by_source.iter().enumerate() {
            if !rules.iter().any(Rule::is_catch_all) {
                return Err(Error::Automaton(format!("no catch-all rule for {}", name(src))));
            }
        }
        Ok(())
    }

    pub fn rule_count(&self) -> usize {
        self.by_source.iter().map(Vec::len).sum()
    }
}

/// All tuples of subsets of `states`, one subset per relation.
pub fn neighbor_tuples(states: &[StateId], rels: usize) -> Result<Vec<Vec<StateSet>>> {
    let bits = states.len() * rels;
    if bits > 20 {
        return Err(Error::Bound(format!("{} neighbor-set tuples", 1u64 << bits.min(63))));
    }
    let k = states.len();
    Ok((0u32..1 << bits)
        .map(|m| {
            (0..rels)
                .map(|r| (0..k).filter(|i| m >> (r * k + i) & 1 == 1).map(|i| states[i]).collect())
                .collect()
        })
        .collect())
}

/// JSON form of a guard; relation index is 1-based and the set names states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardJson {
    pub rel: usize,
    pub op: GuardOp,
    #[serde(default)]
    pub set: Vec<String>,
}

pub(crate) fn guard_from_json(g: &GuardJson, rels: usize, names: &dyn Fn(&str) -> Result<StateId>, universe: usize) -> Result<Guard> {
    if g.rel == 0 || g.rel > rels {
        return Err(Error::Automaton(format!("guard relation {} out of range", g.rel)));
    }
    let set = g.set.iter().map(|s| names(s)).collect::<Result<Vec<_>>>()?;
    Ok(Guard::of(g.rel - 1, g.op, universe, set))
}

pub(crate) fn guard_to_json(g: &Guard, names: &[String]) -> GuardJson {
    GuardJson {
        rel: g.rel + 1,
        op: g.op,
        set: if g.op == GuardOp::Any { vec![] } else { g.set.iter().map(|q| names[q as usize].clone()).collect() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(sets: &[&[StateId]]) -> Vec<StateSet> {
        sets.iter().map(|s| s.iter().copied().collect()).collect()
    }

    #[test]
    fn guard_ops() {
        let sub = Guard::of(0, GuardOp::Subseteq, 8, [1, 2]);
        assert!(sub.holds(&n(&[&[]])));
        assert!(sub.holds(&n(&[&[2]])));
        assert!(!sub.holds(&n(&[&[2, 3]])));
        let sup = Guard::of(0, GuardOp::Supseteq, 8, [1, 2]);
        assert!(sup.holds(&n(&[&[1, 2, 3]])));
        assert!(!sup.holds(&n(&[&[1]])));
        let eq = Guard::of(0, GuardOp::Eq, 8, [1, 2]);
        assert!(eq.holds(&n(&[&[1, 2]])));
        assert!(!eq.holds(&n(&[&[1, 2, 3]])));
        let meets = Guard::of(0, GuardOp::Meets, 8, [4]);
        assert!(meets.holds(&n(&[&[1, 4]])));
        assert!(!meets.holds(&n(&[&[]])));
    }

    #[test]
    fn first_match_wins() {
        let mut t = RuleTable::new(1);
        t.push(0, Rule { guards: vec![Guard::of(0, GuardOp::Subseteq, 4, [1])], to: 10 });
        t.push(0, Rule { guards: vec![], to: 20 });
        assert_eq!(t.lookup(0, &n(&[&[]])), Some(&10));
        assert_eq!(t.lookup(0, &n(&[&[2]])), Some(&20));
        assert!(t.check_catch_all(|s| s.to_string()).is_ok());
    }

    #[test]
    fn tuples_enumerate_products() {
        assert_eq!(neighbor_tuples(&[0, 1], 2).unwrap().len(), 16);
        assert!(neighbor_tuples(&(0..30).collect::<Vec<_>>(), 1).is_err());
    }
}
