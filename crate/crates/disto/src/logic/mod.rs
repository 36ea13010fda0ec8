//! Modal, first-order and monadic second-order formulas over labeled
//! digraphs, and the backward μ-fragment.

mod eval;
mod mu;
pub(crate) mod sexpr;
mod translate;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{eval_at, eval_modal, eval_mso, eval_nodes, eval_sentence, Env, DEFAULT_SET_BOUND};
pub use mu::{eval_mu, mu_approximants, mu_operator, MuBody, MuSystem};
pub use sexpr::{parse_document, parse_formula, parse_formula_in, parse_mu, Document};
pub use translate::standard_translation;

use crate::error::{Error, Result};

/// The position symbol.
pub const POS: &str = "pos";

/// Formula AST. Relations are 1-based and binary, so every modality takes
/// exactly one argument.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bot,
    /// `pos = x`
    Is(String),
    /// `pos ∈ P`
    In(String),
    /// `x = y`
    Eq(String, String),
    /// `X(x)`
    Mem(String, String),
    /// `R_r(x, y)`
    Rel(usize, String, String),
    Not(Box<Formula>),
    Or(Vec<Formula>),
    And(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Dia(usize, Box<Formula>),
    BDia(usize, Box<Formula>),
    GDia(Box<Formula>),
    Box(usize, Box<Formula>),
    BBox(usize, Box<Formula>),
    GBox(Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn dia(f: Formula) -> Formula {
        Formula::Dia(1, Box::new(f))
    }

    pub fn bdia(f: Formula) -> Formula {
        Formula::BDia(1, Box::new(f))
    }

    pub fn in_set(p: &str) -> Formula {
        Formula::In(p.to_string())
    }

    pub fn and(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(fs.into_iter().collect())
    }

    pub fn or(fs: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(fs.into_iter().collect())
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula as F;
        match self {
            F::Top | F::Bot | F::Is(_) | F::In(_) | F::Eq(..) | F::Mem(..) | F::Rel(..) => vec![],
            F::Not(a) | F::Dia(_, a) | F::BDia(_, a) | F::GDia(a) | F::Box(_, a) | F::BBox(_, a) | F::GBox(a) => {
                vec![a]
            }
            F::ExistsSet(_, a) | F::ForallSet(_, a) | F::Exists(_, a) | F::Forall(_, a) => vec![a],
            F::Or(fs) | F::And(fs) => fs.iter().collect(),
            F::Imp(a, b) | F::Iff(a, b) => vec![a, b],
        }
    }

    /// Free node, set and relation symbols; relations are written `R1`, `R2`, ….
    pub fn free_symbols(&self) -> BTreeSet<String> {
        use Formula as F;
        let s = |x: &str| x.to_string();
        match self {
            F::Top | F::Bot => [s(POS)].into(),
            F::Is(x) => [s(POS), x.clone()].into(),
            F::In(p) => [s(POS), p.clone()].into(),
            F::Eq(x, y) => [x.clone(), y.clone()].into(),
            F::Mem(p, x) => [p.clone(), x.clone()].into(),
            F::Rel(r, x, y) => [format!("R{r}"), x.clone(), y.clone()].into(),
            F::Dia(r, a) | F::BDia(r, a) | F::Box(r, a) | F::BBox(r, a) => {
                let mut f = a.free_symbols();
                f.insert(s(POS));
                f.insert(format!("R{r}"));
                f
            }
            F::GDia(a) | F::GBox(a) => {
                let mut f = a.free_symbols();
                f.remove(POS);
                f
            }
            F::ExistsSet(x, a) | F::ForallSet(x, a) | F::Exists(x, a) | F::Forall(x, a) => {
                let mut f = a.free_symbols();
                f.remove(x);
                f
            }
            _ => self.children().into_iter().flat_map(Formula::free_symbols).collect(),
        }
    }

    /// Maximal nesting of modalities.
    pub fn modal_depth(&self) -> usize {
        use Formula as F;
        let inner = self.children().into_iter().map(Formula::modal_depth).max().unwrap_or(0);
        match self {
            F::Dia(..) | F::BDia(..) | F::GDia(_) | F::Box(..) | F::BBox(..) | F::GBox(_) => inner + 1,
            _ => inner,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&sexpr::print_formula(self))
    }
}

/// Which constructs a formula may use. Propositional atoms and connectives
/// are always allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub forward: bool,
    pub backward: bool,
    pub global: bool,
    pub first_order: bool,
    pub sets: bool,
}

impl Kernel {
    const NONE: Kernel = Kernel { forward: false, backward: false, global: false, first_order: false, sets: false };
    pub const ML: Kernel = Kernel { forward: true, ..Self::NONE };
    pub const BML: Kernel = Kernel { backward: true, ..Self::NONE };
    pub const DML: Kernel = Kernel { forward: true, backward: true, ..Self::NONE };
    pub const MLG: Kernel = Kernel { global: true, ..Self::ML };
    pub const BMLG: Kernel = Kernel { global: true, ..Self::BML };
    pub const DMLG: Kernel = Kernel { global: true, ..Self::DML };
    pub const FO: Kernel = Kernel { first_order: true, ..Self::NONE };
    pub const MSO: Kernel = Kernel { first_order: true, sets: true, ..Self::NONE };
    pub const ANY: Kernel = Kernel { forward: true, backward: true, global: true, first_order: true, sets: true };

    pub fn by_name(name: &str) -> Result<Kernel> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "ml" => Self::ML,
            "bml" => Self::BML,
            "dml" => Self::DML,
            "mlg" => Self::MLG,
            "bmlg" => Self::BMLG,
            "dmlg" => Self::DMLG,
            "fo" => Self::FO,
            "mso" => Self::MSO,
            "any" => Self::ANY,
            _ => return Err(Error::Kernel(format!("unknown kernel {name:?}"))),
        })
    }

    /// The first construct outside the kernel, if any.
    pub fn violation(&self, f: &Formula) -> Option<&'static str> {
        use Formula as F;
        let here = match f {
            F::Dia(..) | F::Box(..) if !self.forward => Some("forward modality"),
            F::BDia(..) | F::BBox(..) if !self.backward => Some("backward modality"),
            F::GDia(_) | F::GBox(_) if !self.global => Some("global modality"),
            F::Eq(..) | F::Mem(..) | F::Rel(..) | F::Exists(..) | F::Forall(..) if !self.first_order => {
                Some("first-order construct")
            }
            F::ExistsSet(..) | F::ForallSet(..) if !self.sets => Some("set quantifier"),
            _ => None,
        };
        here.or_else(|| f.children().into_iter().find_map(|c| self.violation(c)))
    }

    pub fn check(&self, f: &Formula) -> Result<()> {
        match self.violation(f) {
            Some(what) => Err(Error::Kernel(format!("{what} in {f}"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_symbols_follow_the_table() {
        let f = parse_formula("(gdia (and (in P) (dia 2 (is x))))").unwrap();
        let free: Vec<_> = f.free_symbols().into_iter().collect();
        assert_eq!(free, vec!["P", "R2", "x"]);
        let g = parse_formula("(exists x (mem X x))").unwrap();
        assert_eq!(g.free_symbols().into_iter().collect::<Vec<_>>(), vec!["X"]);
    }

    #[test]
    fn kernels() {
        let f = parse_formula("(bdia (in P))").unwrap();
        assert!(Kernel::ML.check(&f).is_err());
        assert!(Kernel::BML.check(&f).is_ok());
        assert_eq!(f.modal_depth(), 1);
    }
}
