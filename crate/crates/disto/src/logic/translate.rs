//! Standard translation of modal formulas into first-order logic.

use std::collections::BTreeSet;

use super::{Formula, Kernel, POS};
use crate::error::Result;

fn symbols(f: &Formula, out: &mut BTreeSet<String>) {
    use Formula as F;
    match f {
        F::Is(x) | F::In(x) => {
            out.insert(x.clone());
        }
        F::Eq(x, y) | F::Mem(x, y) | F::Rel(_, x, y) => {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        F::ExistsSet(x, _) | F::ForallSet(x, _) | F::Exists(x, _) | F::Forall(x, _) => {
            out.insert(x.clone());
        }
        _ => {}
    }
    for c in f.children() {
        symbols(c, out);
    }
}

fn subst_pos(f: &Formula, y: &str) -> Formula {
    use Formula as F;
    let s = |x: &String| if x == POS { y.to_string() } else { x.clone() };
    let b = |g: &Formula| Box::new(subst_pos(g, y));
    match f {
        F::Eq(a, c) => F::Eq(s(a), s(c)),
        F::Mem(p, a) => F::Mem(p.clone(), s(a)),
        F::Rel(r, a, c) => F::Rel(*r, s(a), s(c)),
        F::Not(g) => F::Not(b(g)),
        F::Or(gs) => F::Or(gs.iter().map(|g| subst_pos(g, y)).collect()),
        F::And(gs) => F::And(gs.iter().map(|g| subst_pos(g, y)).collect()),
        F::Imp(g, h) => F::Imp(b(g), b(h)),
        F::Iff(g, h) => F::Iff(b(g), b(h)),
        F::Exists(x, _) | F::Forall(x, _) if x == POS => f.clone(),
        F::Exists(x, g) => F::Exists(x.clone(), b(g)),
        F::Forall(x, g) => F::Forall(x.clone(), b(g)),
        other => other.clone(),
    }
}

struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn get(&mut self) -> String {
        loop {
            self.next += 1;
            let x = format!("x{}", self.next);
            if !self.taken.contains(&x) {
                return x;
            }
        }
    }
}

fn st(f: &Formula, fresh: &mut Fresh) -> Formula {
    use Formula as F;
    let pos = || POS.to_string();
    let mut b = |g: &Formula| Box::new(st(g, fresh));
    match f {
        F::Top => F::Eq(pos(), pos()),
        F::Bot => F::not(F::Eq(pos(), pos())),
        F::Is(x) => F::Eq(pos(), x.clone()),
        F::In(p) => F::Mem(p.clone(), pos()),
        F::Not(g) => F::Not(b(g)),
        F::Imp(g, h) => F::Imp(b(g), b(h)),
        F::Iff(g, h) => F::Iff(b(g), b(h)),
        F::Or(gs) => F::Or(gs.iter().map(|g| st(g, fresh)).collect()),
        F::And(gs) => F::And(gs.iter().map(|g| st(g, fresh)).collect()),
        F::Dia(r, g) | F::BDia(r, g) => {
            let inner = st(g, fresh);
            let y = fresh.get();
            let edge = if matches!(f, F::Dia(..)) { F::Rel(*r, pos(), y.clone()) } else { F::Rel(*r, y.clone(), pos()) };
            F::Exists(y.clone(), Box::new(F::And(vec![edge, subst_pos(&inner, &y)])))
        }
        F::Box(r, g) => st(&F::not(F::Dia(*r, Box::new(F::not((**g).clone())))), fresh),
        F::BBox(r, g) => st(&F::not(F::BDia(*r, Box::new(F::not((**g).clone())))), fresh),
        F::GDia(g) => F::Exists(pos(), b(g)),
        F::GBox(g) => F::Forall(pos(), b(g)),
        other => other.clone(),
    }
}

/// First-order formula with the same free symbols and the same truth value
/// on every structure.
pub fn standard_translation(f: &Formula) -> Result<Formula> {
    Kernel::DMLG.check(f)?;
    let mut taken = BTreeSet::new();
    symbols(f, &mut taken);
    Ok(st(f, &mut Fresh { taken, next: 0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_digraphs, StructureKind};
    use crate::logic::{eval_nodes, parse_formula, Env};

    #[test]
    fn table_rows() {
        let t = |s: &str| standard_translation(&parse_formula(s).unwrap()).unwrap().to_string();
        assert_eq!(t("(in P)"), "(mem P pos)");
        assert_eq!(t("(gdia (in P))"), "(exists pos (mem P pos))");
        assert_eq!(t("(dia (in P))"), "(exists x1 (and (rel pos x1) (mem P x1)))");
        assert!(Kernel::FO.check(&standard_translation(&parse_formula("(bbox (gbox (dia (top))))").unwrap()).unwrap()).is_ok());
    }

    #[test]
    fn agrees_on_small_graphs() {
        let f = parse_formula("(and (dia (in P1)) (bbox (gdia (bdia (not (in P1))))))").unwrap();
        let g = standard_translation(&f).unwrap();
        for d in enumerate_digraphs(3, 1, 1, StructureKind::General).unwrap() {
            assert_eq!(eval_nodes(&f, &d, &Env::default()).unwrap(), eval_nodes(&g, &d, &Env::default()).unwrap());
        }
    }
}
