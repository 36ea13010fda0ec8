//! Systems of simultaneous least fixpoints in the backward μ-fragment.

use std::fmt;

use super::sexpr::print_mu_body;
use crate::error::{Error, Result};
use crate::graph::Digraph;

/// Body grammar `⊥ | ⊤ | Pi | ¬Pi | X | ∨ | ∧ | ◇̄ | □̄`; variables occur only
/// positively by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MuBody {
    Bot,
    Top,
    /// `Pi` (1-based) or its negation.
    Prop(usize, bool),
    /// 0-based variable index.
    Var(usize),
    Or(Vec<MuBody>),
    And(Vec<MuBody>),
    BDia(Box<MuBody>),
    BBox(Box<MuBody>),
}

impl MuBody {
    pub(crate) fn max_constant(&self) -> usize {
        match self {
            MuBody::Prop(i, _) => *i,
            MuBody::Or(bs) | MuBody::And(bs) => bs.iter().map(MuBody::max_constant).max().unwrap_or(0),
            MuBody::BDia(b) | MuBody::BBox(b) => b.max_constant(),
            _ => 0,
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            MuBody::Var(i) => Some(*i),
            MuBody::Or(bs) | MuBody::And(bs) => bs.iter().filter_map(MuBody::max_var).max(),
            MuBody::BDia(b) | MuBody::BBox(b) => b.max_var(),
            _ => None,
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            MuBody::Or(bs) | MuBody::And(bs) => bs.iter().map(MuBody::modal_depth).max().unwrap_or(0),
            MuBody::BDia(b) | MuBody::BBox(b) => 1 + b.modal_depth(),
            _ => 0,
        }
    }

    /// Truth of a modality-free body given the truth of constants and
    /// variables.
    pub fn eval_flat(&self, prop: &dyn Fn(usize) -> bool, var: &dyn Fn(usize) -> bool) -> bool {
        match self {
            MuBody::Bot => false,
            MuBody::Top => true,
            MuBody::Prop(i, pos) => prop(*i) == *pos,
            MuBody::Var(i) => var(*i),
            MuBody::Or(bs) => bs.iter().any(|b| b.eval_flat(prop, var)),
            MuBody::And(bs) => bs.iter().all(|b| b.eval_flat(prop, var)),
            MuBody::BDia(_) | MuBody::BBox(_) => panic!("eval_flat on a modal body"),
        }
    }
}

/// `μ(X1,…,Xm).(φ1,…,φm)` over `bits` label bits; `X1` is the main variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuSystem {
    bits: usize,
    vars: Vec<String>,
    bodies: Vec<MuBody>,
}

impl MuSystem {
    pub fn new(bits: usize, vars: Vec<String>, bodies: Vec<MuBody>) -> Result<Self> {
        if vars.is_empty() || vars.len() != bodies.len() {
            return Err(Error::Syntax { pos: 0, msg: "one body per variable is required".into() });
        }
        if bodies.iter().any(|b| b.max_var().is_some_and(|i| i >= vars.len())) {
            return Err(Error::Unbound("variable index".into()));
        }
        if let Some(c) = bodies.iter().map(MuBody::max_constant).max().filter(|&c| c > bits) {
            return Err(Error::Unbound(format!("P{c}")));
        }
        Ok(MuSystem { bits, vars, bodies })
    }

    pub fn with_bits(mut self, bits: usize) -> Result<Self> {
        if self.bodies.iter().map(MuBody::max_constant).max().unwrap_or(0) > bits {
            return Err(Error::Unbound("set constant beyond the label width".into()));
        }
        self.bits = bits;
        Ok(self)
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn bodies(&self) -> &[MuBody] {
        &self.bodies
    }

    /// Equivalent system whose modal arguments are modality-free: every
    /// offending argument becomes the body of a fresh variable.
    pub fn flatten(&self) -> MuSystem {
        let mut vars = self.vars.clone();
        let mut bodies = self.bodies.clone();
        let mut i = 0;
        while i < bodies.len() {
            let mut b = std::mem::replace(&mut bodies[i], MuBody::Bot);
            lift(&mut b, &mut vars, &mut bodies);
            bodies[i] = b;
            i += 1;
        }
        MuSystem { bits: self.bits, vars, bodies }
    }
}

fn fresh(vars: &[String]) -> String {
    (1..).map(|k| format!("Y{k}")).find(|v| !vars.contains(v)).unwrap()
}

fn lift(b: &mut MuBody, vars: &mut Vec<String>, bodies: &mut Vec<MuBody>) {
    match b {
        MuBody::Or(bs) | MuBody::And(bs) => bs.iter_mut().for_each(|c| lift(c, vars, bodies)),
        MuBody::BDia(inner) | MuBody::BBox(inner) if inner.modal_depth() > 0 => {
            let body = std::mem::replace(&mut **inner, MuBody::Var(vars.len()));
            vars.push(fresh(vars));
            bodies.push(body);
        }
        _ => {}
    }
}

impl fmt::Display for MuSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(mu (")?;
        for (i, (v, b)) in self.vars.iter().zip(&self.bodies).enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "({v} {})", print_mu_body(b, &self.vars))?;
        }
        write!(f, "))")
    }
}

struct Frame<'a> {
    d: &'a Digraph,
    preds: Vec<Vec<usize>>,
}

impl Frame<'_> {
    fn holds(&self, b: &MuBody, v: usize, vals: &[Vec<bool>]) -> bool {
        match b {
            MuBody::Bot => false,
            MuBody::Top => true,
            MuBody::Prop(i, pos) => (self.d.label(v) >> (i - 1) & 1 == 1) == *pos,
            MuBody::Var(i) => vals[*i][v],
            MuBody::Or(bs) => bs.iter().any(|c| self.holds(c, v, vals)),
            MuBody::And(bs) => bs.iter().all(|c| self.holds(c, v, vals)),
            MuBody::BDia(c) => self.preds[v].iter().any(|&u| self.holds(c, u, vals)),
            MuBody::BBox(c) => self.preds[v].iter().all(|&u| self.holds(c, u, vals)),
        }
    }
}

fn frame<'a>(m: &MuSystem, d: &'a Digraph) -> Result<Frame<'a>> {
    if d.bits() != m.bits {
        return Err(Error::Arity { expected: m.bits, found: d.bits() });
    }
    if d.rels() != 1 {
        return Err(Error::Arity { expected: 1, found: d.rels() });
    }
    Ok(Frame { d, preds: d.incoming().into_iter().map(|mut r| r.swap_remove(0)).collect() })
}

/// One application of `F_φ` to a valuation (one node vector per variable).
pub fn mu_operator(m: &MuSystem, d: &Digraph, vals: &[Vec<bool>]) -> Result<Vec<Vec<bool>>> {
    let f = frame(m, d)?;
    Ok(m.bodies.iter().map(|b| (0..d.node_count()).map(|v| f.holds(b, v, vals)).collect()).collect())
}

/// `P⃗⁰ = ∅⃗, P⃗¹, …` up to and including the first repeated valuation.
pub fn mu_approximants(m: &MuSystem, d: &Digraph) -> Result<Vec<Vec<Vec<bool>>>> {
    let f = frame(m, d)?;
    let mut seq = vec![vec![vec![false; d.node_count()]; m.var_count()]];
    loop {
        let cur = seq.last().unwrap();
        let next: Vec<Vec<bool>> =
            m.bodies.iter().map(|b| (0..d.node_count()).map(|v| f.holds(b, v, cur)).collect()).collect();
        if &next == cur {
            return Ok(seq);
        }
        seq.push(next);
    }
}

/// `⟦X1⟧`.
pub fn eval_mu(m: &MuSystem, d: &Digraph) -> Result<Vec<bool>> {
    Ok(mu_approximants(m, d)?.pop().unwrap().swap_remove(0))
}
