//! Brute-force semantics. Node sets are bitmasks, so structures are capped
//! at 64 nodes; set quantifiers have a much smaller configurable bound.

use std::collections::BTreeMap;

use super::sexpr::label_constant;
use super::{Formula, Kernel, POS};
use crate::error::{Error, Result};
use crate::graph::{Digraph, Pointed};

/// Largest node count for which set quantifiers are expanded.
pub const DEFAULT_SET_BOUND: usize = 6;

/// Interpretation of free node and set symbols. Label bits `P1 … Pℓ` are
/// read from the digraph unless overridden here.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env {
    pub nodes: BTreeMap<String, usize>,
    pub sets: BTreeMap<String, u64>,
    pub set_bound: Option<usize>,
}

impl Env {
    pub fn with_node(mut self, x: &str, v: usize) -> Self {
        self.nodes.insert(x.to_string(), v);
        self
    }

    pub fn with_set(mut self, p: &str, s: u64) -> Self {
        self.sets.insert(p.to_string(), s);
        self
    }
}

struct Model<'a> {
    d: &'a Digraph,
    n: usize,
    /// `succ[r][u]`: successors of `u` under relation `r`.
    succ: Vec<Vec<u64>>,
    pred: Vec<Vec<u64>>,
    set_bound: usize,
}

impl<'a> Model<'a> {
    fn new(d: &'a Digraph, set_bound: usize) -> Result<Self> {
        let n = d.node_count();
        if n > 64 {
            return Err(Error::Bound(format!("{n} nodes; formula evaluation handles at most 64")));
        }
        let mut succ = vec![vec![0u64; n]; d.rels()];
        let mut pred = vec![vec![0u64; n]; d.rels()];
        for (r, u, v) in d.all_edges() {
            succ[r][u] |= 1 << v;
            pred[r][v] |= 1 << u;
        }
        Ok(Model { d, n, succ, pred, set_bound })
    }

    fn node(&self, env: &Env, x: &str) -> Result<usize> {
        env.nodes.get(x).copied().ok_or_else(|| Error::Unbound(x.to_string()))
    }

    fn set(&self, env: &Env, p: &str) -> Result<u64> {
        if let Some(&s) = env.sets.get(p) {
            return Ok(s);
        }
        match label_constant(p) {
            Some(i) if i <= self.d.bits() => {
                Ok((0..self.n).filter(|&v| self.d.label(v) >> (i - 1) & 1 == 1).fold(0, |m, v| m | 1 << v))
            }
            _ => Err(Error::Unbound(p.to_string())),
        }
    }

    fn rel(&self, r: usize) -> Result<usize> {
        if r == 0 || r > self.d.rels() {
            return Err(Error::Unbound(format!("R{r}")));
        }
        Ok(r - 1)
    }

    fn with_node<T>(&self, env: &mut Env, x: &str, v: usize, f: impl FnOnce(&mut Env) -> T) -> T {
        let old = env.nodes.insert(x.to_string(), v);
        let out = f(env);
        match old {
            Some(o) => env.nodes.insert(x.to_string(), o),
            None => env.nodes.remove(x),
        };
        out
    }

    fn any_node(&self, env: &mut Env, x: &str, mask: u64, phi: &Formula) -> Result<bool> {
        for v in 0..self.n {
            if mask >> v & 1 == 1 && self.with_node(env, x, v, |e| self.eval(phi, e))? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn any_set(&self, env: &mut Env, x: &str, phi: &Formula) -> Result<bool> {
        if self.n > self.set_bound {
            return Err(Error::Bound(format!(
                "set quantifier over {} nodes exceeds the bound of {}",
                self.n, self.set_bound
            )));
        }
        let old = env.sets.remove(x);
        let mut found = Ok(false);
        for s in 0u64..1 << self.n {
            env.sets.insert(x.to_string(), s);
            match self.eval(phi, env) {
                Ok(true) => {
                    found = Ok(true);
                    break;
                }
                Ok(false) => {}
                e => {
                    found = e;
                    break;
                }
            }
        }
        env.sets.remove(x);
        if let Some(o) = old {
            env.sets.insert(x.to_string(), o);
        }
        found
    }

    fn all(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    fn eval(&self, f: &Formula, env: &mut Env) -> Result<bool> {
        use Formula as F;
        Ok(match f {
            F::Top => {
                self.node(env, POS)?;
                true
            }
            F::Bot => {
                self.node(env, POS)?;
                false
            }
            F::Is(x) => self.node(env, POS)? == self.node(env, x)?,
            F::In(p) => self.set(env, p)? >> self.node(env, POS)? & 1 == 1,
            F::Eq(x, y) => self.node(env, x)? == self.node(env, y)?,
            F::Mem(p, x) => self.set(env, p)? >> self.node(env, x)? & 1 == 1,
            F::Rel(r, x, y) => self.succ[self.rel(*r)?][self.node(env, x)?] >> self.node(env, y)? & 1 == 1,
            F::Not(a) => !self.eval(a, env)?,
            F::Or(fs) => {
                for g in fs {
                    if self.eval(g, env)? {
                        return Ok(true);
                    }
                }
                false
            }
            F::And(fs) => {
                for g in fs {
                    if !self.eval(g, env)? {
                        return Ok(false);
                    }
                }
                true
            }
            F::Imp(a, b) => !self.eval(a, env)? || self.eval(b, env)?,
            F::Iff(a, b) => self.eval(a, env)? == self.eval(b, env)?,
            F::Dia(r, a) => {
                let m = self.succ[self.rel(*r)?][self.node(env, POS)?];
                self.any_node(env, POS, m, a)?
            }
            F::BDia(r, a) => {
                let m = self.pred[self.rel(*r)?][self.node(env, POS)?];
                self.any_node(env, POS, m, a)?
            }
            F::Box(r, a) => {
                let m = self.succ[self.rel(*r)?][self.node(env, POS)?];
                !self.any_node(env, POS, m, &Formula::not((**a).clone()))?
            }
            F::BBox(r, a) => {
                let m = self.pred[self.rel(*r)?][self.node(env, POS)?];
                !self.any_node(env, POS, m, &Formula::not((**a).clone()))?
            }
            F::GDia(a) => self.any_node(env, POS, self.all(), a)?,
            F::GBox(a) => !self.any_node(env, POS, self.all(), &Formula::not((**a).clone()))?,
            F::Exists(x, a) => self.any_node(env, x, self.all(), a)?,
            F::Forall(x, a) => !self.any_node(env, x, self.all(), &Formula::not((**a).clone()))?,
            F::ExistsSet(x, a) => self.any_set(env, x, a)?,
            F::ForallSet(x, a) => !self.any_set(env, x, &Formula::not((**a).clone()))?,
        })
    }
}

fn bound(env: &Env) -> usize {
    env.set_bound.unwrap_or(DEFAULT_SET_BOUND)
}

/// Truth of `f` with free symbols taken from `env` only.
pub fn eval_sentence(f: &Formula, d: &Digraph, env: &Env) -> Result<bool> {
    Model::new(d, bound(env))?.eval(f, &mut env.clone())
}

/// Truth of `f` with `pos` bound to the point.
pub fn eval_at(f: &Formula, pd: &Pointed, env: &Env) -> Result<bool> {
    eval_sentence(f, &pd.graph, &env.clone().with_node(POS, pd.point))
}

/// `⟦f⟧`: the nodes at which `f` holds when `pos` ranges over all nodes.
pub fn eval_nodes(f: &Formula, d: &Digraph, env: &Env) -> Result<Vec<bool>> {
    let m = Model::new(d, bound(env))?;
    let mut e = env.clone();
    (0..d.node_count()).map(|v| m.with_node(&mut e, POS, v, |e| m.eval(f, e))).collect()
}

/// Modal evaluation; rejects first-order and set constructs.
pub fn eval_modal(f: &Formula, pd: &Pointed, env: &Env) -> Result<bool> {
    Kernel::DMLG.check(f)?;
    eval_at(f, pd, env)
}

/// Monadic second-order evaluation at the point, or as a sentence if
/// `point` is `None`.
pub fn eval_mso(f: &Formula, d: &Digraph, point: Option<usize>, env: &Env) -> Result<bool> {
    match point {
        Some(p) => eval_at(f, &Pointed::new(d.clone(), p)?, env),
        None => eval_sentence(f, d, env),
    }
}
