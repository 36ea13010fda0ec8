//! Boolean closure and projection constructions, plus the normal forms they
//! rely on.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::{validate_alt, Acceptance, AltAutomaton, Kind};
use crate::error::{Error, Result};
use crate::graph::Label;
use crate::rules::{Guard, GuardOp, Rule, RuleTable};
use crate::sets::{BitSet, StateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    Complement,
    Union,
    Intersect,
    Project,
}

/// Node projection `π: Σ → Σ'`, given as the image of every old label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub bits: usize,
    pub map: Vec<Label>,
}

impl Projection {
    /// Forgets the label bits listed in `drop` (0-based), shifting the
    /// remaining bits down.
    pub fn forget_bits(bits: usize, drop: &[usize]) -> Self {
        let keep: Vec<usize> = (0..bits).filter(|i| !drop.contains(i)).collect();
        let map = (0..1u32 << bits)
            .map(|l| keep.iter().enumerate().map(|(j, &i)| (l >> i & 1) << j).sum())
            .collect();
        Projection { bits: keep.len(), map }
    }
}

pub fn apply_closure(
    kind: ClosureKind,
    a: &AltAutomaton,
    b: Option<&AltAutomaton>,
    pi: Option<&Projection>,
) -> Result<AltAutomaton> {
    let second = || b.ok_or_else(|| Error::Automaton("this closure needs a second automaton".into()));
    match kind {
        ClosureKind::Complement => Ok(complement(a)),
        ClosureKind::Union => union(a, second()?),
        ClosureKind::Intersect => intersect(a, second()?),
        ClosureKind::Project => project(a, pi.ok_or_else(|| Error::Automaton("projection map missing".into()))?),
    }
}

/// Swaps existential and universal states and complements `Acc` within the
/// powerset of the permanent states.
pub fn complement(a: &AltAutomaton) -> AltAutomaton {
    let mut c = a.clone();
    for k in &mut c.kinds {
        *k = match *k {
            Kind::Existential => Kind::Universal,
            Kind::Universal => Kind::Existential,
            Kind::Permanent => Kind::Permanent,
        };
    }
    let acc = a.acc.clone();
    c.acc = Acceptance::new(move |f| !acc.accepts(f));
    c
}

/// `init'(l) = init(f(l))` over `bits`-bit labels.
pub fn relabel(a: &AltAutomaton, bits: usize, f: impl Fn(Label) -> Label) -> Result<AltAutomaton> {
    let init = (0..1u32 << bits)
        .map(|l| {
            let old = f(l);
            a.init.get(old as usize).copied().ok_or_else(|| Error::Automaton(format!("label {old} out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    AltAutomaton::new(a.names.clone(), a.kinds.clone(), bits, a.rels, init, a.delta.clone(), a.acc.clone())
}

/// Brings both operands to the same label width; extra bits are ignored by
/// the narrower automaton.
fn harmonize(a: &AltAutomaton, b: &AltAutomaton) -> Result<(AltAutomaton, AltAutomaton)> {
    if a.rels != b.rels {
        return Err(Error::Automaton(format!("alphabet mismatch: {} vs {} relations", a.rels, b.rels)));
    }
    let bits = a.bits.max(b.bits);
    let widen = |x: &AltAutomaton| {
        let mask = (1u32 << x.bits) - 1;
        relabel(x, bits, move |l| l & mask)
    };
    Ok((widen(a)?, widen(b)?))
}

/// Removes states that no run can visit.
pub fn prune(a: &AltAutomaton) -> AltAutomaton {
    let n = a.state_count();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<StateId> = a.init.iter().copied().collect();
    while let Some(q) = queue.pop_front() {
        if std::mem::replace(&mut seen[q as usize], true) {
            continue;
        }
        queue.extend(a.syntactic_successors(q).into_iter().filter(|&s| !seen[s as usize]));
    }
    if seen.iter().all(|&s| s) {
        return a.clone();
    }
    let old: Vec<StateId> = (0..n as StateId).filter(|&q| seen[q as usize]).collect();
    let mut new_id = vec![StateId::MAX; n];
    for (i, &q) in old.iter().enumerate() {
        new_id[q as usize] = i as StateId;
    }
    let m = old.len();
    let mut delta = RuleTable::new(m);
    for (i, &q) in old.iter().enumerate() {
        'rules: for r in &a.delta.by_source[q as usize] {
            let mut guards = Vec::with_capacity(r.guards.len());
            for g in &r.guards {
                let lost = g.set.iter().any(|s| !seen[s as usize]);
                if lost && matches!(g.op, GuardOp::Eq | GuardOp::Supseteq) {
                    // Requires an unreachable state to be present.
                    continue 'rules;
                }
                let set = g.set.iter().filter(|&s| seen[s as usize]).map(|s| new_id[s as usize]);
                guards.push(Guard::of(g.rel, g.op, m, set));
            }
            delta.push(i, Rule { guards, to: r.to.iter().map(|&t| new_id[t as usize]).collect() });
        }
    }
    let acc = a.acc.clone();
    let back = old.clone();
    AltAutomaton {
        names: old.iter().map(|&q| a.names[q as usize].clone()).collect(),
        kinds: old.iter().map(|&q| a.kinds[q as usize]).collect(),
        bits: a.bits,
        rels: a.rels,
        init: a.init.iter().map(|&q| new_id[q as usize]).collect(),
        delta,
        acc: Acceptance::new(move |f| acc.accepts(&f.iter().map(|&q| back[q as usize]).collect::<Vec<_>>())),
        ids: (0..m as StateId).collect(),
    }
}

fn expected_kind(level: usize) -> Kind {
    if level.is_multiple_of(2) {
        Kind::Existential
    } else {
        Kind::Universal
    }
}

/// Equivalent automaton whose nonpermanent levels alternate existential,
/// universal, existential, … from level 0. A level of the wrong type is
/// preceded by a deterministic copy level, which delays the node by one
/// round without changing what its neighbors will see when it next acts.
pub fn normalize(a: &AltAutomaton) -> Result<AltAutomaton> {
    let lv = validate_alt(a).map_err(|v| Error::Automaton(v.to_string()))?;
    let layers = lv.layers(a);
    let mut padded = vec![false; layers.len()];
    let mut pad_kind = vec![Kind::Existential; layers.len()];
    let mut idx = 0;
    for (k, layer) in layers.iter().enumerate() {
        let t = a.kind(layer[0]);
        if t != expected_kind(idx) {
            padded[k] = true;
            pad_kind[k] = expected_kind(idx);
            idx += 1;
        }
        idx += 1;
    }
    if !padded.contains(&true) {
        return Ok(a.clone());
    }
    let n = a.state_count();
    let mut names = a.names.clone();
    let mut kinds = a.kinds.clone();
    let mut hat = vec![None; n];
    for (k, layer) in layers.iter().enumerate() {
        if padded[k] {
            for &q in layer {
                hat[q as usize] = Some(names.len() as StateId);
                names.push(format!("{}'", a.names[q as usize]));
                kinds.push(pad_kind[k]);
            }
        }
    }
    let redirect = |q: StateId| hat[q as usize].unwrap_or(q);
    let mut delta = RuleTable::new(names.len());
    for (q, rules) in a.delta.by_source.iter().enumerate() {
        for r in rules {
            delta.push(q, Rule { guards: r.guards.clone(), to: r.to.iter().map(|&t| redirect(t)).collect() });
        }
    }
    for q in 0..n {
        if let Some(h) = hat[q] {
            delta.push(h as usize, Rule { guards: vec![], to: vec![q as StateId] });
        }
    }
    let init = a.init.iter().map(|&q| redirect(q)).collect();
    AltAutomaton::new(names, kinds, a.bits, a.rels, init, delta, a.acc.clone())
}

fn shift_guard(g: &Guard, universe: usize, offset: StateId) -> Guard {
    Guard::of(g.rel, g.op, universe, g.set.iter().map(|q| q + offset))
}

/// Each node first picks one operand to simulate; permanent states are
/// tagged with the operand, and a node that sees a neighbor of the other
/// operand falls into `conflict`, which spreads. Mixed or conflicting
/// permanent configurations are rejecting.
pub fn union(a: &AltAutomaton, b: &AltAutomaton) -> Result<AltAutomaton> {
    let (a, b) = harmonize(a, b)?;
    let a = normalize(&prune(&a))?;
    let b = normalize(&prune(&b))?;
    let (n1, n2) = (a.state_count() as StateId, b.state_count() as StateId);
    let conflict = n1 + n2;
    let mut starts: Vec<(StateId, StateId)> =
        a.init.iter().zip(&b.init).map(|(&p, &q)| (p, q + n1)).collect::<BTreeSet<_>>().into_iter().collect();
    starts.sort_unstable();
    let total = conflict as usize + 1 + starts.len();
    let mut names: Vec<String> = a.names.iter().map(|s| format!("{s}@1")).collect();
    names.extend(b.names.iter().map(|s| format!("{s}@2")));
    names.push("conflict".into());
    names.extend((0..starts.len()).map(|i| format!("start{i}")));
    let mut kinds: Vec<Kind> = a.kinds.iter().chain(&b.kinds).copied().collect();
    kinds.push(Kind::Permanent);
    kinds.extend(std::iter::repeat_n(Kind::Existential, starts.len()));

    let mut delta = RuleTable::new(total);
    for (src, offset, foreign) in [(&a, 0, n1..n1 + n2), (&b, n1, 0..n1)] {
        let alarm: Vec<StateId> = foreign.chain([conflict]).collect();
        for (q, rules) in src.delta.by_source.iter().enumerate() {
            if rules.is_empty() {
                continue;
            }
            let q = q + offset as usize;
            for rel in 0..src.rels {
                delta.push(q, Rule { guards: vec![Guard::of(rel, GuardOp::Meets, total, alarm.iter().copied())], to: vec![conflict] });
            }
            for r in rules {
                let guards = r.guards.iter().map(|g| shift_guard(g, total, offset)).collect();
                delta.push(q, Rule { guards, to: r.to.iter().map(|&t| t + offset).collect() });
            }
        }
    }
    for (i, &(p, q)) in starts.iter().enumerate() {
        delta.push(conflict as usize + 1 + i, Rule { guards: vec![], to: vec![p, q] });
    }
    let init = a
        .init
        .iter()
        .zip(&b.init)
        .map(|(&p, &q)| conflict + 1 + starts.binary_search(&(p, q + n1)).unwrap() as StateId)
        .collect();
    let (acc1, acc2) = (a.acc.clone(), b.acc.clone());
    let acc = Acceptance::new(move |f| {
        if f.contains(&conflict) {
            false
        } else if f.iter().all(|&q| q < n1) {
            acc1.accepts(f)
        } else if f.iter().all(|&q| q >= n1) {
            acc2.accepts(&f.iter().map(|&q| q - n1).collect::<Vec<_>>())
        } else {
            false
        }
    });
    AltAutomaton::new(names, kinds, a.bits, a.rels, init, delta, acc)
}

/// Product for nondeterministic operands.
pub fn intersect(a: &AltAutomaton, b: &AltAutomaton) -> Result<AltAutomaton> {
    let (a, b) = harmonize(a, b)?;
    let (a, b) = (prune(&a), prune(&b));
    if !a.is_nondeterministic() || !b.is_nondeterministic() {
        return Err(Error::Unsupported("intersection of automata with universal states".into()));
    }
    product(&a, &b, true)
}

/// Lifts a guard on one component to pair states.
fn lift_guard(g: &Guard, by_state: &[Vec<StateId>], universe: usize, out: &mut Vec<Guard>) {
    let lifted = |set: &mut dyn Iterator<Item = StateId>| {
        let mut s = BitSet::with_universe(universe);
        for q in set {
            for &p in &by_state[q as usize] {
                s.insert(p);
            }
        }
        s
    };
    match g.op {
        GuardOp::Any => {}
        GuardOp::Subseteq | GuardOp::Meets => out.push(Guard::new(g.rel, g.op, lifted(&mut g.set.iter()))),
        GuardOp::Supseteq | GuardOp::Eq => {
            if g.op == GuardOp::Eq {
                out.push(Guard::new(g.rel, GuardOp::Subseteq, lifted(&mut g.set.iter())));
            }
            for q in g.set.iter() {
                out.push(Guard::new(g.rel, GuardOp::Meets, lifted(&mut std::iter::once(q))));
            }
        }
    }
}

/// Rules up to and including the first catch-all; permanent states get
/// their self-loop.
fn effective_rules(a: &AltAutomaton, q: StateId) -> Vec<Rule<Vec<StateId>>> {
    if a.is_permanent(q) {
        return vec![Rule { guards: vec![], to: vec![q] }];
    }
    let rules = &a.delta.by_source[q as usize];
    let end = rules.iter().position(Rule::is_catch_all).map_or(rules.len(), |i| i + 1);
    rules[..end].to_vec()
}

/// Synchronized product accepting by conjunction (`and`) or disjunction of
/// the operands' acceptance. Nonpermanent levels of the operands must have
/// matching types.
pub(crate) fn product(a: &AltAutomaton, b: &AltAutomaton, and: bool) -> Result<AltAutomaton> {
    if a.bits != b.bits || a.rels != b.rels {
        return Err(Error::Automaton("product operands differ in alphabet".into()));
    }
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs: Vec<(StateId, StateId)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |p: (StateId, StateId), pairs: &mut Vec<_>, queue: &mut VecDeque<_>| -> StateId {
        *index.entry(p).or_insert_with(|| {
            pairs.push(p);
            queue.push_back(p);
            (pairs.len() - 1) as StateId
        })
    };
    let init: Vec<StateId> =
        a.init.iter().zip(&b.init).map(|(&p, &q)| intern((p, q), &mut pairs, &mut queue)).collect();
    while let Some((p, q)) = queue.pop_front() {
        for s in a.syntactic_successors(p) {
            for t in b.syntactic_successors(q) {
                intern((s, t), &mut pairs, &mut queue);
            }
        }
    }
    let m = pairs.len();
    let mut by_a = vec![Vec::new(); a.state_count()];
    let mut by_b = vec![Vec::new(); b.state_count()];
    for (i, &(p, q)) in pairs.iter().enumerate() {
        by_a[p as usize].push(i as StateId);
        by_b[q as usize].push(i as StateId);
    }
    let mut kinds = Vec::with_capacity(m);
    let mut delta = RuleTable::new(m);
    for (i, &(p, q)) in pairs.iter().enumerate() {
        let kind = match (a.kind(p), b.kind(q)) {
            (Kind::Permanent, k) | (k, Kind::Permanent) => k,
            (k, l) if k == l => k,
            _ => return Err(Error::Automaton("product operands have misaligned level types".into())),
        };
        kinds.push(kind);
        if kind == Kind::Permanent {
            continue;
        }
        let (ra, rb) = (effective_rules(a, p), effective_rules(b, q));
        for r1 in &ra {
            for r2 in &rb {
                let mut guards = Vec::new();
                for g in &r1.guards {
                    lift_guard(g, &by_a, m, &mut guards);
                }
                for g in &r2.guards {
                    lift_guard(g, &by_b, m, &mut guards);
                }
                let index = &index;
                let to = r1.to.iter().flat_map(|&s| r2.to.iter().map(move |&t| index[&(s, t)])).collect();
                delta.push(i, Rule { guards, to });
            }
        }
    }
    let names = pairs.iter().map(|&(p, q)| format!("({},{})", a.name(p), b.name(q))).collect();
    let (acc1, acc2) = (a.acc.clone(), b.acc.clone());
    let pairs = Arc::new(pairs);
    let acc = Acceptance::new(move |f| {
        let left: BTreeSet<StateId> = f.iter().map(|&x| pairs[x as usize].0).collect();
        let right: BTreeSet<StateId> = f.iter().map(|&x| pairs[x as usize].1).collect();
        let l = acc1.accepts(&left.into_iter().collect::<Vec<_>>());
        if and && !l {
            return false;
        }
        if !and && l {
            return true;
        }
        acc2.accepts(&right.into_iter().collect::<Vec<_>>())
    });
    AltAutomaton::new(names, kinds, a.bits, a.rels, init, delta, acc)
}

/// Every node guesses a preimage of its label and then runs `a`. Labels
/// without a preimage lead to a rejecting permanent state.
pub fn project(a: &AltAutomaton, pi: &Projection) -> Result<AltAutomaton> {
    if pi.map.len() != 1 << a.bits || pi.map.iter().any(|&l| l >> pi.bits != 0) || pi.bits > 16 {
        return Err(Error::Automaton("projection does not fit the automaton's alphabet".into()));
    }
    let a = prune(a);
    let n = a.state_count() as StateId;
    let void = n;
    let mut names = a.names.clone();
    let mut kinds = a.kinds.clone();
    names.push("void".into());
    kinds.push(Kind::Permanent);
    let mut choices: Vec<Vec<StateId>> = Vec::new();
    let mut init = Vec::with_capacity(1 << pi.bits);
    for l in 0..1u32 << pi.bits {
        let pre: Vec<StateId> = (0..a.init.len())
            .filter(|&old| pi.map[old] == l)
            .map(|old| a.init[old])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if pre.is_empty() {
            init.push(void);
            continue;
        }
        let i = choices.iter().position(|c| *c == pre).unwrap_or_else(|| {
            choices.push(pre);
            choices.len() - 1
        });
        init.push(n + 1 + i as StateId);
    }
    for i in 0..choices.len() {
        names.push(format!("guess{i}"));
        kinds.push(Kind::Existential);
    }
    let mut delta = RuleTable::new(names.len());
    for (q, rules) in a.delta.by_source.iter().enumerate() {
        for r in rules {
            delta.push(q, r.clone());
        }
    }
    for (i, c) in choices.into_iter().enumerate() {
        delta.push(n as usize + 1 + i, Rule { guards: vec![], to: c });
    }
    let acc = a.acc.clone();
    let acc = Acceptance::new(move |f| f.last() != Some(&void) && acc.accepts(f));
    AltAutomaton::new(names, kinds, pi.bits, a.rels, init, delta, acc)
}

#[cfg(test)]
mod tests {
    use super::super::{decide_acceptance_alt, AltBuilder};
    use super::*;
    use crate::catalog::{non_three_colorability, three_colorability};
    use crate::graph::{enumerate_digraphs, Digraph, StructureKind};

    /// Accepts iff some node with label bit 1 has an incoming edge.
    fn marked_with_predecessor() -> AltAutomaton {
        let mut b = AltBuilder::new(1, 1);
        b.state("m", Kind::Existential);
        b.state("u", Kind::Existential);
        for s in ["hit", "miss"] {
            b.state(s, Kind::Permanent);
        }
        b.init(1, "m").init(0, "u");
        b.rule("m", &[(1, GuardOp::Subseteq, &[])], &["miss"]).rule("m", &[], &["hit"]);
        b.rule("u", &[], &["miss"]);
        b.accepting_set(&["hit"]).accepting_set(&["hit", "miss"]);
        b.build().unwrap()
    }

    /// Accepts iff at most one node exists (universal split into markers).
    fn at_most_one_node() -> AltAutomaton {
        let mut b = AltBuilder::new(1, 1);
        b.state("s", Kind::Universal);
        b.state("x", Kind::Permanent);
        b.state("y", Kind::Permanent);
        b.init_all("s");
        b.rule("s", &[], &["x", "y"]);
        b.accepting_set(&["x"]).accepting_set(&["y"]);
        b.build().unwrap()
    }

    fn corpus() -> Vec<AltAutomaton> {
        let widen = |a: &AltAutomaton| relabel(a, 1, |_| 0).unwrap();
        vec![marked_with_predecessor(), at_most_one_node(), widen(&three_colorability()), widen(&non_three_colorability())]
    }

    fn graphs() -> Vec<Digraph> {
        enumerate_digraphs(3, 1, 1, StructureKind::General).unwrap().collect()
    }

    fn lang(a: &AltAutomaton, gs: &[Digraph]) -> Vec<bool> {
        gs.iter().map(|d| decide_acceptance_alt(a, d).unwrap()).collect()
    }

    #[test]
    fn complement_is_an_involution_and_negates() {
        let gs = graphs();
        for a in corpus() {
            let l = lang(&a, &gs);
            let c = complement(&a);
            assert_eq!(lang(&c, &gs), l.iter().map(|x| !x).collect::<Vec<_>>());
            assert_eq!(lang(&complement(&c), &gs), l);
        }
    }

    #[test]
    fn union_with_complement_is_universal() {
        let gs = graphs();
        for a in corpus() {
            let u = union(&a, &complement(&a)).unwrap();
            validate_alt(&u).unwrap();
            assert!(lang(&u, &gs).into_iter().all(|x| x));
        }
    }

    #[test]
    fn union_and_product_match_language_algebra() {
        let gs = graphs();
        let cs = corpus();
        for a in &cs {
            for b in &cs {
                let (la, lb) = (lang(a, &gs), lang(b, &gs));
                let or: Vec<bool> = la.iter().zip(&lb).map(|(x, y)| *x || *y).collect();
                let and: Vec<bool> = la.iter().zip(&lb).map(|(x, y)| *x && *y).collect();
                assert_eq!(lang(&union(a, b).unwrap(), &gs), or);
                let (na, nb) = (normalize(a).unwrap(), normalize(b).unwrap());
                assert_eq!(lang(&product(&na, &nb, false).unwrap(), &gs), or);
                assert_eq!(lang(&product(&na, &nb, true).unwrap(), &gs), and);
                if a.is_nondeterministic() && b.is_nondeterministic() {
                    assert_eq!(lang(&intersect(a, b).unwrap(), &gs), and);
                } else {
                    assert!(matches!(intersect(a, b), Err(Error::Unsupported(_))));
                }
            }
        }
    }

    #[test]
    fn projection_forgets_the_mark() {
        // Some node can be marked so that it has a predecessor: any edge.
        let p = project(&marked_with_predecessor(), &Projection::forget_bits(1, &[0])).unwrap();
        validate_alt(&p).unwrap();
        for d in enumerate_digraphs(3, 0, 1, StructureKind::General).unwrap() {
            assert_eq!(decide_acceptance_alt(&p, &d).unwrap(), d.edge_count() > 0);
        }
    }

    #[test]
    fn normalization_alternates_types() {
        for a in corpus() {
            let b = normalize(&complement(&a)).unwrap();
            let lv = validate_alt(&b).unwrap();
            for (k, layer) in lv.layers(&b).iter().enumerate() {
                assert!(layer.iter().all(|&q| b.kind(q) == expected_kind(k)));
            }
            assert_eq!(lang(&b, &graphs()), lang(&complement(&a), &graphs()));
        }
    }

    #[test]
    fn pruning_keeps_language() {
        let mut b = AltBuilder::new(0, 1);
        b.state("s", Kind::Existential);
        b.state("dead", Kind::Existential);
        b.state("ok", Kind::Permanent);
        b.state("bad", Kind::Permanent);
        b.init_all("s");
        b.rule("s", &[(1, GuardOp::Supseteq, &["dead"])], &["bad"]).rule("s", &[], &["ok"]);
        b.rule("dead", &[], &["bad"]);
        b.accepting_set(&["ok"]);
        let a = b.build().unwrap();
        let p = prune(&a);
        assert_eq!(p.state_count(), 3);
        for d in enumerate_digraphs(2, 0, 1, StructureKind::General).unwrap() {
            assert!(decide_acceptance_alt(&p, &d).unwrap());
        }
    }
}
