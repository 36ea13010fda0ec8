//! Translations between the backward μ-fragment and quasi-acyclic
//! distributed automata.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::asynchronous::{compute_traces, moves, traces_from, Trace};
use crate::error::{Error, Result};
use crate::graph::Label;
use crate::logic::{MuBody, MuSystem};
use crate::rules::{Guard, GuardOp, Rule, RuleTable};
use crate::sets::{subsets, StateId, StateSet};
use crate::sync::DistributedAutomaton;

/// Most propositions (`ℓ + m` after flattening) a compiled state may carry.
pub const MAX_PROPOSITIONS: usize = 10;
/// Most distinct modal subformulas; rule tables grow as `2^k` per state.
pub const MAX_MODAL_ATOMS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Atom {
    Dia(MuBody),
    Box(MuBody),
}

fn collect_atoms(b: &MuBody, out: &mut Vec<Atom>) {
    let atom = match b {
        MuBody::Or(bs) | MuBody::And(bs) => return bs.iter().for_each(|c| collect_atoms(c, out)),
        MuBody::BDia(c) => Atom::Dia((**c).clone()),
        MuBody::BBox(c) => Atom::Box((**c).clone()),
        _ => return,
    };
    if !out.contains(&atom) {
        out.push(atom);
    }
}

/// `⟨q, N⟩ ⊨ φ`, where the truth of each modal atom `N ⊆ S_j` is given.
fn holds(b: &MuBody, q: u32, bits: usize, atoms: &[Atom], subset_of: &dyn Fn(usize) -> bool) -> bool {
    let find = |a: Atom| atoms.iter().position(|x| *x == a).expect("collected");
    match b {
        MuBody::Bot => false,
        MuBody::Top => true,
        MuBody::Prop(i, pos) => (q >> (i - 1) & 1 == 1) == *pos,
        MuBody::Var(j) => q >> (bits + j) & 1 == 1,
        MuBody::Or(bs) => bs.iter().any(|c| holds(c, q, bits, atoms, subset_of)),
        MuBody::And(bs) => bs.iter().all(|c| holds(c, q, bits, atoms, subset_of)),
        MuBody::BDia(c) => !subset_of(find(Atom::Dia((**c).clone()))),
        MuBody::BBox(c) => subset_of(find(Atom::Box((**c).clone()))),
    }
}

fn state_name(q: u32, bits: usize, vars: &[String]) -> String {
    let mut parts: Vec<String> = (0..bits).filter(|i| q >> i & 1 == 1).map(|i| format!("P{}", i + 1)).collect();
    parts.extend(vars.iter().enumerate().filter(|(j, _)| q >> (bits + j) & 1 == 1).map(|(_, v)| v.clone()));
    format!("{{{}}}", parts.join(","))
}

/// States are sets of propositions; a node adds `Xi` once `φi` holds for
/// its own state and the set of states it receives, and never drops one.
pub fn compile_mu_to_aqda(m: &MuSystem) -> Result<DistributedAutomaton> {
    let flat = m.flatten();
    let bits = flat.bits();
    let props = bits + flat.var_count();
    if props > MAX_PROPOSITIONS {
        return Err(Error::Bound(format!("{props} propositions after flattening; at most {MAX_PROPOSITIONS}")));
    }
    let mut atoms = Vec::new();
    for b in flat.bodies() {
        collect_atoms(b, &mut atoms);
    }
    let k = atoms.len();
    if k > MAX_MODAL_ATOMS {
        return Err(Error::Bound(format!("{k} distinct modal subformulas; at most {MAX_MODAL_ATOMS}")));
    }
    let n = 1usize << props;
    let sat = |c: &MuBody, p: u32| {
        c.eval_flat(&|i| p >> (i - 1) & 1 == 1, &|j| p >> (bits + j) & 1 == 1)
    };
    // Atom j is read as `N ⊆ S_j`.
    let sets: Vec<Vec<StateId>> = atoms
        .iter()
        .map(|a| match a {
            Atom::Box(c) => (0..n as u32).filter(|&p| sat(c, p)).collect(),
            Atom::Dia(c) => (0..n as u32).filter(|&p| !sat(c, p)).collect(),
        })
        .collect();
    let mut truth: Vec<u32> = (0..1u32 << k).collect();
    truth.sort_by_key(|t| (std::cmp::Reverse(t.count_ones()), *t));
    let mut delta = RuleTable::new(n);
    for q in 0..n as u32 {
        let targets: Vec<u32> = truth
            .iter()
            .map(|&t| {
                let added = flat
                    .bodies()
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| holds(b, q, bits, &atoms, &|j| t >> j & 1 == 1))
                    .fold(0u32, |acc, (j, _)| acc | 1 << (bits + j));
                q | added
            })
            .collect();
        if targets.iter().all(|&t| t == targets[0]) {
            delta.push(q as usize, Rule { guards: vec![], to: targets[0] });
            continue;
        }
        for (&t, &to) in truth.iter().zip(&targets) {
            let guards = (0..k)
                .filter(|j| t >> j & 1 == 1)
                .map(|j| Guard::of(0, GuardOp::Subseteq, n, sets[j].iter().copied()))
                .collect();
            delta.push(q as usize, Rule { guards, to });
        }
    }
    let names = (0..n as u32).map(|q| state_name(q, bits, flat.vars())).collect();
    let init: BTreeMap<Label, StateId> = (0..1u32 << bits).map(|s| (s, s)).collect();
    let accepting = (0..n as u32).filter(|q| q >> bits & 1 == 1);
    DistributedAutomaton::new(names, bits, 1, init, accepting, delta)
}

/// `H ⊩ τ` over a fixed list of traces; `H` is a bitmask of trace indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnablesRelation {
    pub traces: Vec<Trace>,
    pub pairs: BTreeSet<(u64, usize)>,
    /// Rounds of the inductive clause until nothing new was derived.
    pub iterations: usize,
}

impl EnablesRelation {
    pub fn enables(&self, h: &[Trace], tau: &Trace) -> bool {
        let idx = |t: &Trace| self.traces.iter().position(|x| x == t);
        let Some(ti) = idx(tau) else { return false };
        let mut mask = 0;
        for t in h {
            match idx(t) {
                Some(i) => mask |= 1 << i,
                None => return false,
            }
        }
        self.pairs.contains(&(mask, ti))
    }
}

struct TraceIndex<'a> {
    index: HashMap<&'a [StateId], usize>,
    /// One-state extensions of each trace.
    ext: Vec<Vec<usize>>,
}

impl<'a> TraceIndex<'a> {
    fn new(traces: &'a [Trace]) -> Result<Self> {
        if traces.len() > 64 {
            return Err(Error::Bound(format!("{} traces; the enables relation handles at most 64", traces.len())));
        }
        let index: HashMap<&[StateId], usize> = traces.iter().enumerate().map(|(i, t)| (t.states(), i)).collect();
        let mut ext = vec![Vec::new(); traces.len()];
        for (i, t) in traces.iter().enumerate() {
            if t.len() >= 2 {
                if let Some(&p) = index.get(&t.states()[..t.len() - 1]) {
                    ext[p].push(i);
                }
            }
        }
        Ok(TraceIndex { index, ext })
    }

    fn singleton(&self, q: StateId) -> Option<usize> {
        self.index.get(&[q][..]).copied()
    }

    /// All `H'` with `H ⇝ H'`: unions of one nonempty choice among
    /// `{σ} ∪ ext(σ)` per member `σ`.
    fn successors(&self, h: u64) -> Result<Vec<u64>> {
        let mut acc: BTreeSet<u64> = [0].into();
        for i in (0..64).filter(|i| h >> i & 1 == 1) {
            let mut options = vec![i];
            options.extend(&self.ext[i]);
            if options.len() > 16 {
                return Err(Error::Bound(format!("{} one-state extensions of a trace", options.len() - 1)));
            }
            let choices: Vec<u64> =
                subsets(&options).skip(1).map(|s| s.iter().fold(0u64, |m, &j| m | 1 << j)).collect();
            acc = acc.iter().flat_map(|&a| choices.iter().map(move |&c| a | c)).collect();
            if acc.len() > 1 << 20 {
                return Err(Error::Bound("too many successor neighbor histories".into()));
            }
        }
        Ok(acc.into_iter().collect())
    }
}

fn enables_over(
    a: &DistributedAutomaton,
    traces: &[Trace],
    base_states: &[StateId],
    base_universe: &[StateId],
) -> Result<EnablesRelation> {
    let ti = TraceIndex::new(traces)?;
    let lookup = |t: &Trace| {
        ti.index.get(t.states()).copied().ok_or_else(|| Error::Class(format!("derived sequence {:?} is not a trace", t.states())))
    };
    let mut pairs = BTreeSet::new();
    let mut frontier = Vec::new();
    for &q in base_states {
        let Some(qi) = ti.singleton(q) else { continue };
        for n in subsets(base_universe) {
            let set: StateSet = n.iter().copied().collect();
            let to = a.step(q, &[set]);
            let h = n.iter().map(|&p| ti.singleton(p).expect("singletons are traces")).fold(0u64, |m, i| m | 1 << i);
            let tau = lookup(&traces[qi].push(to))?;
            if pairs.insert((h, tau)) {
                frontier.push((h, tau));
            }
        }
    }
    let mut iterations = 0;
    let mut cache: HashMap<u64, Vec<u64>> = HashMap::new();
    while !frontier.is_empty() {
        iterations += 1;
        let mut next = Vec::new();
        for (h, tau) in frontier {
            if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(h) {
                e.insert(ti.successors(h)?);
            }
            for &hp in &cache[&h] {
                let lasts: StateSet = (0..64).filter(|i| hp >> i & 1 == 1).map(|i| traces[i].last()).collect();
                let t = &traces[tau];
                let to = a.step(t.last(), &[lasts]);
                let tp = lookup(&t.push(to))?;
                if pairs.insert((hp, tp)) {
                    next.push((hp, tp));
                }
            }
        }
        frontier = next;
    }
    Ok(EnablesRelation { traces: traces.to_vec(), pairs, iterations })
}

fn require_one_relation(a: &DistributedAutomaton) -> Result<()> {
    if a.rels() != 1 {
        return Err(Error::Arity { expected: 1, found: a.rels() });
    }
    Ok(())
}

/// The least relation closed under the base and inductive clauses, over
/// the full trace set.
pub fn compute_enables(a: &DistributedAutomaton) -> Result<EnablesRelation> {
    require_one_relation(a)?;
    let traces = compute_traces(a)?;
    let all: Vec<StateId> = (0..a.state_count() as StateId).collect();
    if all.len() > 20 {
        return Err(Error::Bound(format!("{} states; base pairs enumerate all neighbor sets", all.len())));
    }
    enables_over(a, &traces, &all, &all)
}

/// States a node can ever hold: closure of `ι`'s image under `δ(q, N)`
/// with `q` and `N` drawn from the closure itself.
fn reachable_states(a: &DistributedAutomaton) -> Result<Vec<StateId>> {
    let mut r: BTreeSet<StateId> = a.init_map().values().copied().collect();
    loop {
        let cur: Vec<StateId> = r.iter().copied().collect();
        if cur.len() > 20 {
            return Err(Error::Bound(format!("more than 20 reachable states ({})", cur.len())));
        }
        let succ = moves(a, &cur)?;
        let before = r.len();
        for &q in &cur {
            r.extend(succ[q as usize].iter().copied());
        }
        if r.len() == before {
            return Ok(cur);
        }
    }
}

/// One variable per trace that a node can actually traverse, plus the main
/// variable. Traces through states no node can hold, or starting outside
/// `ι`'s image, have empty fixpoint semantics and are left out.
pub fn decompile_qda_to_mu(a: &DistributedAutomaton) -> Result<MuSystem> {
    require_one_relation(a)?;
    let reach = reachable_states(a)?;
    let init: Vec<StateId> = a.init_map().values().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let traces = traces_from(&moves(a, &reach)?, &init)?;
    let rel = enables_over(a, &traces, &init, &init)?;
    let var = |i: usize| MuBody::Var(i + 1);
    let single = |q: StateId| traces.iter().position(|t| t.states() == [q]).expect("initial singleton");

    let mut vars = vec!["X".to_string()];
    vars.extend((0..traces.len()).map(|i| format!("T{i}")));
    let mut bodies =
        vec![MuBody::Or(traces.iter().enumerate().filter(|(_, t)| a.is_accepting(t.last())).map(|(i, _)| var(i)).collect())];
    let mut by_trace: Vec<Vec<u64>> = vec![Vec::new(); traces.len()];
    for &(h, t) in &rel.pairs {
        by_trace[t].push(h);
    }
    for (i, t) in traces.iter().enumerate() {
        if t.len() == 1 {
            let q = t.first();
            let labels = a.init_map().iter().filter(|(_, &p)| p == q).map(|(&s, _)| {
                MuBody::And((0..a.bits()).map(|b| MuBody::Prop(b + 1, s >> b & 1 == 1)).collect())
            });
            bodies.push(MuBody::Or(labels.collect()));
        } else {
            let options = by_trace[i].iter().map(|&h| {
                let members: Vec<usize> = (0..64).filter(|j| h >> j & 1 == 1).collect();
                let mut conj: Vec<MuBody> = members.iter().map(|&j| MuBody::BDia(Box::new(var(j)))).collect();
                conj.push(MuBody::BBox(Box::new(MuBody::Or(members.iter().map(|&j| var(j)).collect()))));
                MuBody::And(conj)
            });
            bodies.push(MuBody::And(vec![var(single(t.first())), MuBody::Or(options.collect())]));
        }
    }
    MuSystem::new(a.bits(), vars, bodies)
}
