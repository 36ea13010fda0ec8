//! Random instance generators and brute-force oracles shared by the
//! acceptance suite and the property tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use disto::alternating::{AltAutomaton, AltBuilder, Kind};
use disto::graph::Label;
use disto::logic::{parse_formula, Formula, MuBody, MuSystem};
use disto::reductions::{Move, TmJson, TuringMachine};
use disto::rules::GuardOp;
use disto::tiling::{TileCell, TilingSystem};
use disto::Digraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- μ-systems

fn mu_body(rng: &mut impl Rng, depth: usize, vars: usize, bits: usize) -> MuBody {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..5) {
            0 if rng.gen_bool(0.3) => MuBody::Bot,
            0 => MuBody::Top,
            1 | 2 if bits > 0 => MuBody::Prop(rng.gen_range(1..=bits), rng.gen_bool(0.6)),
            _ => MuBody::Var(rng.gen_range(0..vars)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| mu_body(rng, depth - 1, vars, bits);
    let mut r = ChaCha8Rng::seed_from_u64(rng.gen());
    match rng.gen_range(0..4) {
        0 => MuBody::Or(vec![sub(&mut r), sub(&mut r)]),
        1 => MuBody::And(vec![sub(&mut r), sub(&mut r)]),
        2 => MuBody::BDia(Box::new(sub(&mut r))),
        _ => MuBody::BBox(Box::new(sub(&mut r))),
    }
}

/// Random system with `m` variables over `bits` label bits.
pub fn random_mu(rng: &mut impl Rng, m: usize, bits: usize) -> MuSystem {
    let vars = (1..=m).map(|i| format!("X{i}")).collect();
    let bodies = (0..m).map(|_| mu_body(rng, 2, m, bits)).collect();
    MuSystem::new(bits, vars, bodies).expect("well-formed")
}

/// The twenty systems used by several criteria: `m ≤ 2`, `ℓ ≤ 1`.
pub fn mu_corpus() -> Vec<MuSystem> {
    let mut r = rng(2024);
    (0..20).map(|i| random_mu(&mut r, 1 + i % 2, (i / 2) % 2)).collect()
}

/// Least fixpoint as the intersection of all prefixpoints `F(P⃗) ⊆ P⃗`.
pub fn prefixpoint_lfp(m: &MuSystem, d: &Digraph) -> Vec<Vec<bool>> {
    let (k, n) = (m.var_count(), d.node_count());
    let mut best = vec![vec![true; n]; k];
    for code in 0u64..1 << (k * n) {
        let vals: Vec<Vec<bool>> = (0..k).map(|i| (0..n).map(|v| code >> (i * n + v) & 1 == 1).collect()).collect();
        let img = disto::logic::mu_operator(m, d, &vals).unwrap();
        let pre = (0..k).all(|i| (0..n).all(|v| !img[i][v] || vals[i][v]));
        if pre {
            for i in 0..k {
                for v in 0..n {
                    best[i][v] &= vals[i][v];
                }
            }
        }
    }
    best
}

// ---------------------------------------------------------------- MSO

fn mso_body(rng: &mut impl Rng, depth: usize, fo: &mut Vec<String>, so: &mut Vec<String>, bits: usize) -> Formula {
    if depth > 0 && (fo.is_empty() || rng.gen_bool(0.7)) {
        let set = rng.gen_bool(0.3);
        let name = if set { format!("S{}", so.len()) } else { format!("x{}", fo.len()) };
        if set {
            so.push(name.clone());
        } else {
            fo.push(name.clone());
        }
        let body = Box::new(mso_body(rng, depth - 1, fo, so, bits));
        if set {
            so.pop();
        } else {
            fo.pop();
        }
        return match (set, rng.gen_bool(0.5)) {
            (true, true) => Formula::ExistsSet(name, body),
            (true, false) => Formula::ForallSet(name, body),
            (false, true) => Formula::Exists(name, body),
            (false, false) => Formula::Forall(name, body),
        };
    }
    let atoms = 1 + rng.gen_range(0..3);
    let parts: Vec<Formula> = (0..atoms).map(|_| mso_atom(rng, fo, so, bits)).collect();
    match rng.gen_range(0..3) {
        0 => Formula::Or(parts),
        1 => Formula::And(parts),
        _ => Formula::Imp(Box::new(parts[0].clone()), Box::new(Formula::Or(parts[1..].to_vec()))),
    }
}

fn mso_atom(rng: &mut impl Rng, fo: &[String], so: &[String], bits: usize) -> Formula {
    if fo.is_empty() {
        return if rng.gen_bool(0.5) { Formula::Top } else { Formula::Bot };
    }
    let pick = |rng: &mut dyn rand::RngCore| fo[rng.gen_range(0..fo.len())].clone();
    let atom = match rng.gen_range(0..4) {
        0 => Formula::Rel(1, pick(rng), pick(rng)),
        1 => Formula::Eq(pick(rng), pick(rng)),
        2 if !so.is_empty() => Formula::Mem(so[rng.gen_range(0..so.len())].clone(), pick(rng)),
        2 | 3 if bits > 0 => Formula::Mem(format!("P{}", rng.gen_range(1..=bits)), pick(rng)),
        _ => Formula::Rel(1, pick(rng), pick(rng)),
    };
    if rng.gen_bool(0.4) {
        Formula::Not(Box::new(atom))
    } else {
        atom
    }
}

/// Random sentence of quantifier depth at most `depth`.
pub fn random_mso(rng: &mut impl Rng, depth: usize, bits: usize) -> Formula {
    mso_body(rng, depth, &mut Vec::new(), &mut Vec::new(), bits)
}

pub fn three_color_sentence() -> Formula {
    parse_formula(
        "(exists-set R (exists-set G (exists-set B (and \
           (forall x (or (mem R x) (mem G x) (mem B x))) \
           (forall x (forall y (imp (rel x y) \
             (not (or (and (mem R x) (mem R y)) (and (mem G x) (mem G y)) (and (mem B x) (mem B y)))))))))))",
    )
    .unwrap()
}

pub fn edgeless_sentence() -> Formula {
    parse_formula("(not (exists x (exists y (rel x y))))").unwrap()
}

// ---------------------------------------------------------------- graphs

/// Every 1-relational digraph on `n` nodes from an adjacency bitmask
/// (bit `u*n + v` is the edge `u → v`).
pub fn from_mask(n: usize, bits: usize, mask: u64, labels: Vec<Label>) -> Digraph {
    let edges = (0..n * n).filter(|i| mask >> i & 1 == 1).map(|i| (0, i / n, i % n));
    Digraph::new(bits, 1, labels, edges).unwrap()
}

/// Edge masks on `n` nodes whose nodes are sorted by `(in, out, loop)`
/// degree. Every digraph is isomorphic to at least one of them.
pub fn degree_sorted_masks(n: usize) -> impl Iterator<Item = u64> {
    (0u64..1 << (n * n)).filter(move |&m| {
        let mut prev = (0, 0, 0);
        for v in 0..n {
            let mut key = (0u32, 0u32, 0u32);
            for u in 0..n {
                key.0 += (m >> (u * n + v) & 1) as u32;
                key.1 += (m >> (v * n + u) & 1) as u32;
            }
            key.2 = (m >> (v * n + v) & 1) as u32;
            if v > 0 && key < prev {
                return false;
            }
            prev = key;
        }
        true
    })
}

/// Backward reachability with the source included.
fn backward(d: &Digraph, s: usize) -> Vec<bool> {
    let inc = d.incoming();
    let mut seen = vec![false; d.node_count()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(x) = stack.pop() {
        for &u in &inc[x][0] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen
}

/// Going backwards from `v` one reaches a node labeled 1 from which no
/// directed cycle can be reached backwards.
pub fn marked_ancestor_oracle(d: &Digraph, v: usize) -> bool {
    let inc = d.incoming();
    let back: Vec<Vec<bool>> = (0..d.node_count()).map(|s| backward(d, s)).collect();
    let on_cycle = |x: usize| inc[x][0].iter().any(|&u| back[u][x]);
    (0..d.node_count()).any(|u| {
        back[v][u] && d.label(u) == 1 && !(0..d.node_count()).any(|w| back[u][w] && on_cycle(w))
    })
}

/// Proper 3-coloring of the underlying graph; a self-loop rules it out.
pub fn three_colorable(d: &Digraph) -> bool {
    let n = d.node_count();
    let edges: Vec<(usize, usize)> = d.all_edges().map(|(_, u, v)| (u, v)).collect();
    (0..3usize.pow(n as u32)).any(|code| {
        let c: Vec<usize> = (0..n).map(|v| code / 3usize.pow(v as u32) % 3).collect();
        edges.iter().all(|&(u, v)| c[u] != c[v])
    })
}

/// Is the 2-relational structure isomorphic to some `h × w` grid with
/// relation 1 pointing down and relation 2 pointing right?
pub fn grid_isomorphic(d: &Digraph) -> bool {
    let n = d.node_count();
    let edges: BTreeSet<(usize, usize, usize)> = d.all_edges().collect();
    for h in 1..=n {
        if !n.is_multiple_of(h) {
            continue;
        }
        let w = n / h;
        let mut target = BTreeSet::new();
        for i in 0..h {
            for j in 0..w {
                if i + 1 < h {
                    target.insert((0, i * w + j, (i + 1) * w + j));
                }
                if j + 1 < w {
                    target.insert((1, i * w + j, i * w + j + 1));
                }
            }
        }
        if target.len() != edges.len() {
            continue;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        if permutations(&mut perm, 0, &mut |p| edges.iter().all(|&(r, u, v)| target.contains(&(r, p[u], p[v])))) {
            return true;
        }
    }
    false
}

fn permutations(p: &mut Vec<usize>, k: usize, ok: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if k == p.len() {
        return ok(p);
    }
    for i in k..p.len() {
        p.swap(k, i);
        if permutations(p, k + 1, ok) {
            p.swap(k, i);
            return true;
        }
        p.swap(k, i);
    }
    false
}

// ---------------------------------------------------------------- NLDAg

fn random_guard(rng: &mut impl Rng, pool: &[&'static str]) -> (usize, GuardOp, Vec<&'static str>) {
    let op = *[GuardOp::Meets, GuardOp::Eq, GuardOp::Subseteq, GuardOp::Supseteq].choose(rng).unwrap();
    let set = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    (1, op, set)
}

fn choices(rng: &mut impl Rng, pool: &[&'static str]) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if out.is_empty() {
        out.push(pool[rng.gen_range(0..pool.len())]);
    }
    out
}

/// Unlabeled nondeterministic automaton with at most four states and length
/// one or two.
pub fn random_nldag(rng: &mut impl Rng) -> AltAutomaton {
    let mut b = AltBuilder::new(0, 1);
    let long = rng.gen_bool(0.5);
    b.state("e", Kind::Existential);
    let perm: &[&'static str] = if long { &["p", "r"] } else { &["p", "r", "s"] };
    if long {
        b.state("m", Kind::Existential);
    }
    for p in perm {
        b.state(p, Kind::Permanent);
    }
    b.init_all("e");
    let next: Vec<&'static str> = if long { vec!["m", "p", "r"] } else { perm.to_vec() };
    let add_rules = |b: &mut AltBuilder, rng: &mut dyn rand::RngCore, from: &str, see: &[&'static str], to: &[&'static str]| {
        let mut rng = ChaCha8Rng::seed_from_u64(rng.gen());
        for _ in 0..rng.gen_range(0..3) {
            let (r, op, set) = random_guard(&mut rng, see);
            b.rule(from, &[(r, op, &set)], &choices(&mut rng, to));
        }
        b.rule(from, &[], &choices(&mut rng, to));
    };
    add_rules(&mut b, rng, "e", &["e"], &next);
    if long {
        add_rules(&mut b, rng, "m", &["m", "p", "r"], perm);
    }
    let subsets: Vec<Vec<&str>> = (1..1u32 << perm.len())
        .map(|m| perm.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, s)| *s).collect())
        .collect();
    let mut any = false;
    for s in &subsets {
        if rng.gen_bool(0.25) {
            b.accepting_set(s);
            any = true;
        }
    }
    if !any {
        b.accepting_set(&subsets[rng.gen_range(0..subsets.len())]);
    }
    b.build().expect("well-formed")
}

// ---------------------------------------------------------------- Turing machines

pub fn machine(states: &[&str], rules: &[(&str, &str, &str, &str, Move)]) -> TuringMachine {
    let j = TmJson {
        states: states.iter().map(|s| s.to_string()).collect(),
        tape: vec!["_".into(), "1".into()],
        blank: "_".into(),
        initial: states[0].into(),
        halt: "h".into(),
        delta: rules.iter().map(|(a, b, c, d, m)| (a.to_string(), b.to_string(), c.to_string(), d.to_string(), *m)).collect(),
    };
    TuringMachine::from_json(&j).unwrap()
}

/// Machines paired with their halting times.
pub fn halting_machines() -> Vec<(&'static str, TuringMachine, usize)> {
    use Move::*;
    vec![
        ("one-step", machine(&["a", "h"], &[("a", "_", "h", "1", R), ("a", "1", "h", "1", R)]), 1),
        (
            "write-three",
            machine(
                &["a", "b", "c", "h"],
                &[
                    ("a", "_", "b", "1", R),
                    ("a", "1", "b", "1", R),
                    ("b", "_", "c", "1", R),
                    ("b", "1", "c", "1", R),
                    ("c", "_", "h", "1", R),
                    ("c", "1", "h", "1", R),
                ],
            ),
            3,
        ),
        (
            "bounce",
            machine(
                &["a", "b", "c", "h"],
                &[
                    ("a", "_", "b", "1", L),
                    ("a", "1", "a", "1", R),
                    ("b", "_", "b", "_", L),
                    ("b", "1", "c", "_", R),
                    ("c", "_", "h", "1", L),
                    ("c", "1", "c", "1", R),
                ],
            ),
            3,
        ),
        (
            "there-and-back",
            machine(
                &["a", "b", "c", "d", "h"],
                &[
                    ("a", "_", "b", "1", R),
                    ("a", "1", "b", "1", R),
                    ("b", "_", "c", "1", R),
                    ("b", "1", "c", "1", R),
                    ("c", "_", "d", "_", L),
                    ("c", "1", "d", "1", L),
                    ("d", "1", "d", "_", L),
                    ("d", "_", "h", "_", R),
                ],
            ),
            6,
        ),
        (
            "zigzag",
            machine(
                &["a", "b", "c", "h"],
                &[
                    ("a", "_", "b", "1", R),
                    ("a", "1", "c", "_", R),
                    ("b", "_", "a", "_", L),
                    ("b", "1", "h", "1", R),
                    ("c", "_", "c", "1", L),
                    ("c", "1", "h", "1", L),
                ],
            ),
            6,
        ),
    ]
}

// ---------------------------------------------------------------- tiling

/// Direct search over every state assignment of the interior.
pub fn tiling_oracle(ts: &TilingSystem, labels: &[Vec<Label>]) -> bool {
    let (h, w) = (labels.len(), labels[0].len());
    let q = ts.states().len();
    let cells = h * w;
    let mut assign = vec![0usize; cells];
    loop {
        let at = |i: usize, j: usize| -> TileCell {
            if i == 0 || j == 0 || i == h + 1 || j == w + 1 {
                TileCell::Border
            } else {
                TileCell::Cell(labels[i - 1][j - 1], assign[(i - 1) * w + j - 1])
            }
        };
        let ok = (0..=h).all(|i| {
            (0..=w).all(|j| ts.tiles().contains(&[at(i, j), at(i, j + 1), at(i + 1, j), at(i + 1, j + 1)]))
        });
        if ok {
            return true;
        }
        let mut k = 0;
        loop {
            if k == cells {
                return false;
            }
            assign[k] += 1;
            if assign[k] < q {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
    }
}
