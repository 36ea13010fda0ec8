//! MSO sentences to alternating automata, by induction on the formula.
//!
//! Free variables of a subformula are carried as extra label bits after the
//! `ℓ` bits of the input alphabet; a node variable is encoded by flagging
//! exactly the node it denotes.

use super::closure::{complement, normalize, product, project, relabel, Projection};
use super::{Acceptance, AltAutomaton, Kind};
use crate::error::{Error, Result};
use crate::graph::Label;
use crate::logic::sexpr::label_constant;
use crate::logic::{Formula, Kernel};
use crate::rules::{Guard, GuardOp, Rule, RuleTable};
use crate::sets::StateId;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Sym {
    Set,
    Node,
}

struct Compiled {
    a: AltAutomaton,
    /// Scope indices of the free variables, ascending; variable `syms[j]`
    /// is label bit `ℓ + j`.
    syms: Vec<usize>,
}

struct Compiler {
    bits: usize,
    rels: usize,
    scope: Vec<(String, Sym)>,
}

/// Where a set symbol lives in the label.
enum SetRef {
    Constant(usize),
    Var(usize),
}

impl Compiler {
    fn lookup(&self, name: &str) -> Option<(usize, Sym)> {
        self.scope.iter().rposition(|(n, _)| n == name).map(|i| (i, self.scope[i].1))
    }

    fn node(&self, name: &str) -> Result<usize> {
        match self.lookup(name) {
            Some((i, Sym::Node)) => Ok(i),
            Some(_) => Err(Error::Kernel(format!("{name} is a set variable used as a node"))),
            None => Err(Error::Unbound(name.into())),
        }
    }

    fn set(&self, name: &str) -> Result<SetRef> {
        match self.lookup(name) {
            Some((i, Sym::Set)) => Ok(SetRef::Var(i)),
            Some(_) => Err(Error::Kernel(format!("{name} is a node variable used as a set"))),
            None => match label_constant(name) {
                Some(i) if i <= self.bits => Ok(SetRef::Constant(i - 1)),
                _ => Err(Error::Unbound(name.into())),
            },
        }
    }

    /// Length-0 automaton: every node checks its own label.
    fn local_check(&self, syms: Vec<usize>, ok: impl Fn(Label) -> bool) -> Result<Compiled> {
        let bits = self.bits + syms.len();
        let init = (0..1u32 << bits).map(|l| if ok(l) { 0 } else { 1 }).collect();
        let a = AltAutomaton::new(
            vec!["ok".into(), "bad".into()],
            vec![Kind::Permanent; 2],
            bits,
            self.rels,
            init,
            RuleTable::new(2),
            Acceptance::new(|f| f == [0]),
        )?;
        Ok(Compiled { a, syms })
    }

    fn constant(&self, value: bool) -> Result<Compiled> {
        let mut c = self.local_check(vec![], |_| true)?;
        if !value {
            c.a.acc = Acceptance::none();
        }
        Ok(c)
    }

    /// Label bit of free variable `sym` within `syms`.
    fn bit(&self, syms: &[usize], sym: usize) -> usize {
        self.bits + syms.iter().position(|&s| s == sym).unwrap()
    }

    fn eq(&self, x: usize, y: usize) -> Result<Compiled> {
        if x == y {
            return self.local_check(vec![x], |_| true);
        }
        let syms = sorted(vec![x, y]);
        let (bx, by) = (self.bit(&syms, x), self.bit(&syms, y));
        self.local_check(syms, move |l| (l >> bx & 1) == (l >> by & 1))
    }

    fn mem(&self, set: SetRef, x: usize) -> Result<Compiled> {
        let (syms, set_bit) = match set {
            SetRef::Constant(i) => (vec![x], Some(i)),
            SetRef::Var(s) if s == x => unreachable!("kinds differ"),
            SetRef::Var(s) => (sorted(vec![x, s]), None),
        };
        let bx = self.bit(&syms, x);
        let bs = match (set_bit, set) {
            (Some(i), _) => i,
            (None, SetRef::Var(s)) => self.bit(&syms, s),
            _ => unreachable!(),
        };
        self.local_check(syms, move |l| l >> bx & 1 == 0 || l >> bs & 1 == 1)
    }

    /// One round: the node flagged `y` checks for an `rel`-predecessor
    /// flagged `x`.
    fn rel(&self, rel: usize, x: usize, y: usize) -> Result<Compiled> {
        if rel == 0 || rel > self.rels {
            return Err(Error::Arity { expected: self.rels, found: rel });
        }
        let syms = sorted(vec![x, y]);
        let bits = self.bits + syms.len();
        let (bx, by) = (self.bit(&syms, x), self.bit(&syms, y));
        // 0 = x only, 1 = y only, 2 = both, 3 = ok, 4 = bad.
        let names = ["x", "y", "xy", "ok", "bad"].map(String::from).to_vec();
        let kinds = vec![Kind::Existential, Kind::Existential, Kind::Existential, Kind::Permanent, Kind::Permanent];
        let init = (0..1u32 << bits)
            .map(|l| match (l >> bx & 1 == 1, l >> by & 1 == 1) {
                (true, true) => 2,
                (true, false) => 0,
                (false, true) => 1,
                (false, false) => 3,
            })
            .collect();
        let mut delta = RuleTable::new(5);
        delta.push(0, Rule { guards: vec![], to: vec![3] });
        for q in [1, 2] {
            delta.push(q, Rule { guards: vec![Guard::of(rel - 1, GuardOp::Meets, 5, [0, 2])], to: vec![3] });
            delta.push(q, Rule { guards: vec![], to: vec![4] });
        }
        let a = AltAutomaton::new(names, kinds, bits, self.rels, init, delta, Acceptance::new(|f| f == [3]))?;
        Ok(Compiled { a, syms })
    }

    /// Accepts iff exactly one node is flagged `x`: flagged nodes split
    /// universally into two markers, and no branch may show both.
    fn unique(&self, x: usize) -> Result<Compiled> {
        let bits = self.bits + 1;
        let names = ["one", "none", "m1", "m2"].map(String::from).to_vec();
        let kinds = vec![Kind::Universal, Kind::Permanent, Kind::Permanent, Kind::Permanent];
        let init = (0..1u32 << bits).map(|l| if l >> self.bits & 1 == 1 { 0 } else { 1 }).collect();
        let mut delta = RuleTable::new(4);
        delta.push(0, Rule { guards: vec![], to: vec![2, 3] });
        let acc = Acceptance::new(|f: &[StateId]| f.contains(&2) != f.contains(&3));
        let a = AltAutomaton::new(names, kinds, bits, self.rels, init, delta, acc)?;
        Ok(Compiled { a, syms: vec![x] })
    }

    /// Re-encodes `c` over the (larger) variable list `target`.
    fn widen(&self, c: &Compiled, target: &[usize]) -> Result<AltAutomaton> {
        if c.syms == target {
            return Ok(c.a.clone());
        }
        let base = (1u32 << self.bits) - 1;
        let moves: Vec<(usize, usize)> = c
            .syms
            .iter()
            .enumerate()
            .map(|(j, s)| (self.bits + target.iter().position(|t| t == s).unwrap(), self.bits + j))
            .collect();
        relabel(&c.a, self.bits + target.len(), move |l| {
            moves.iter().fold(l & base, |acc, &(from, to)| acc | (l >> from & 1) << to)
        })
    }

    fn combine(&self, x: Compiled, y: Compiled, and: bool) -> Result<Compiled> {
        let syms = sorted(x.syms.iter().chain(&y.syms).copied().collect());
        let (mut a, mut b) = (self.widen(&x, &syms)?, self.widen(&y, &syms)?);
        if !(a.is_nondeterministic() && b.is_nondeterministic()) {
            a = normalize(&a)?;
            b = normalize(&b)?;
        }
        Ok(Compiled { a: product(&a, &b, and)?.with_plain_names(), syms })
    }

    fn negate(c: Compiled) -> Compiled {
        Compiled { a: complement(&c.a), syms: c.syms }
    }

    /// Drops the innermost variable `var` by projection.
    fn hide(&self, c: Compiled, var: usize) -> Result<Compiled> {
        let Some(j) = c.syms.iter().position(|&s| s == var) else {
            return Ok(c);
        };
        let pi = Projection::forget_bits(self.bits + c.syms.len(), &[self.bits + j]);
        let mut syms = c.syms;
        syms.remove(j);
        Ok(Compiled { a: project(&c.a, &pi)?.with_plain_names(), syms })
    }

    fn bind<T>(&mut self, name: &str, sym: Sym, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<(T, usize)> {
        self.scope.push((name.to_string(), sym));
        let out = f(self);
        self.scope.pop();
        Ok((out?, self.scope.len()))
    }

    fn exists_node(&mut self, x: &str, g: &Formula) -> Result<Compiled> {
        let (c, i) = self.bind(x, Sym::Node, |s| s.compile(g))?;
        if !c.syms.contains(&i) {
            return Ok(c);
        }
        let u = self.unique(i)?;
        let checked = self.combine(c, u, true)?;
        self.hide(checked, i)
    }

    fn exists_set(&mut self, x: &str, g: &Formula) -> Result<Compiled> {
        let (c, i) = self.bind(x, Sym::Set, |s| s.compile(g))?;
        self.hide(c, i)
    }

    fn compile(&mut self, f: &Formula) -> Result<Compiled> {
        use Formula as F;
        match f {
            F::Top => self.constant(true),
            F::Bot => self.constant(false),
            F::Eq(x, y) => self.eq(self.node(x)?, self.node(y)?),
            F::Mem(s, x) => self.mem(self.set(s)?, self.node(x)?),
            F::Rel(r, x, y) => self.rel(*r, self.node(x)?, self.node(y)?),
            F::Not(g) => Ok(Self::negate(self.compile(g)?)),
            F::Or(gs) | F::And(gs) => {
                let and = matches!(f, F::And(_));
                let mut acc: Option<Compiled> = None;
                for g in gs {
                    let c = self.compile(g)?;
                    acc = Some(match acc {
                        None => c,
                        Some(prev) => self.combine(prev, c, and)?,
                    });
                }
                acc.map_or_else(|| self.constant(and), Ok)
            }
            F::Imp(g, h) => {
                let (g, h) = (Self::negate(self.compile(g)?), self.compile(h)?);
                self.combine(g, h, false)
            }
            F::Iff(g, h) => {
                let there = F::Imp(g.clone(), h.clone());
                let back = F::Imp(h.clone(), g.clone());
                self.compile(&F::And(vec![there, back]))
            }
            F::Exists(x, g) => self.exists_node(x, g),
            F::Forall(x, g) => {
                let inner = F::not((**g).clone());
                Ok(Self::negate(self.exists_node(x, &inner)?))
            }
            F::ExistsSet(x, g) => self.exists_set(x, g),
            F::ForallSet(x, g) => {
                let inner = F::not((**g).clone());
                Ok(Self::negate(self.exists_set(x, &inner)?))
            }
            other => Err(Error::Unsupported(format!("{other} is not an MSO sentence construct"))),
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Automaton over `bits`-labeled, `rels`-relational digraphs accepting
/// exactly the models of the sentence `f`; label bit `i` is the set
/// constant `P(i+1)`.
pub fn compile_mso_to_aldag(f: &Formula, bits: usize, rels: usize) -> Result<AltAutomaton> {
    Kernel::MSO.check(f)?;
    let mut c = Compiler { bits, rels, scope: Vec::new() };
    let out = c.compile(f)?;
    debug_assert!(out.syms.is_empty());
    Ok(out.a.with_plain_names())
}
