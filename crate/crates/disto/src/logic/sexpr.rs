//! S-expression syntax for formulas and μ-systems.

use super::mu::{MuBody, MuSystem};
use super::{Formula, Kernel};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Syntax { pos, msg: msg.into() })
}

fn read(text: &str) -> Result<Sexp> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if done.is_some() {
            return err(i, "trailing input");
        }
        match c {
            b'(' => {
                stack.push((Vec::new(), i));
                i += 1;
            }
            b')' => {
                let (items, start) = stack.pop().map_or_else(|| err(i, "unbalanced ')'"), Ok)?;
                let list = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => done = Some(list),
                }
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'(' && bytes[i] != b')' {
                    i += 1;
                }
                let word = &text[start..i];
                if !word.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-'.".contains(ch)) {
                    return err(start, format!("unexpected token {word:?}"));
                }
                let atom = Sexp::Atom(word.to_string(), start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => done = Some(atom),
                }
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return err(*start, "unclosed '('");
    }
    done.map_or_else(|| err(0, "empty input"), Ok)
}

fn head(items: &[Sexp], pos: usize) -> Result<&str> {
    match items.first() {
        Some(Sexp::Atom(h, _)) => Ok(h),
        _ => err(pos, "expected an operator"),
    }
}

fn atom(s: &Sexp) -> Result<&str> {
    match s {
        Sexp::Atom(a, _) => Ok(a),
        Sexp::List(_, p) => err(*p, "expected a symbol"),
    }
}

/// Splits an optional leading relation index off modality arguments.
fn rel_and_args(args: &[Sexp]) -> Result<(usize, &[Sexp])> {
    match args.first() {
        Some(Sexp::Atom(a, p)) if a.chars().all(|c| c.is_ascii_digit()) => match a.parse() {
            Ok(r) if r >= 1 => Ok((r, &args[1..])),
            _ => err(*p, "relation indices start at 1"),
        },
        _ => Ok((1, args)),
    }
}

fn formula(s: &Sexp) -> Result<Formula> {
    use Formula as F;
    let (items, pos) = match s {
        // A bare set symbol abbreviates `(in X)`.
        Sexp::Atom(a, _) => return Ok(F::In(a.clone())),
        Sexp::List(items, p) => (items, *p),
    };
    let h = head(items, pos)?;
    let args = &items[1..];
    let arity = |n: usize| if args.len() == n { Ok(()) } else { err(pos, format!("{h} takes {n} argument(s)")) };
    let one = || -> Result<Box<Formula>> {
        arity(1)?;
        Ok(Box::new(formula(&args[0])?))
    };
    let modal = |build: fn(usize, Box<Formula>) -> Formula| -> Result<Formula> {
        let (r, rest) = rel_and_args(args)?;
        if rest.len() != 1 {
            return err(pos, format!("{h} takes one formula: relations are binary"));
        }
        Ok(build(r, Box::new(formula(&rest[0])?)))
    };
    let binder = |build: fn(String, Box<Formula>) -> Formula| -> Result<Formula> {
        arity(2)?;
        Ok(build(atom(&args[0])?.to_string(), Box::new(formula(&args[1])?)))
    };
    Ok(match h {
        "top" => {
            arity(0)?;
            F::Top
        }
        "bot" => {
            arity(0)?;
            F::Bot
        }
        "is" => {
            arity(1)?;
            F::Is(atom(&args[0])?.to_string())
        }
        "in" => {
            arity(1)?;
            F::In(atom(&args[0])?.to_string())
        }
        "eq" => {
            arity(2)?;
            F::Eq(atom(&args[0])?.to_string(), atom(&args[1])?.to_string())
        }
        "mem" => {
            arity(2)?;
            F::Mem(atom(&args[0])?.to_string(), atom(&args[1])?.to_string())
        }
        "rel" => {
            let (r, rest) = rel_and_args(args)?;
            if rest.len() != 2 {
                return err(pos, "rel takes two node symbols");
            }
            F::Rel(r, atom(&rest[0])?.to_string(), atom(&rest[1])?.to_string())
        }
        "not" => F::Not(one()?),
        "or" => F::Or(args.iter().map(formula).collect::<Result<_>>()?),
        "and" => F::And(args.iter().map(formula).collect::<Result<_>>()?),
        "imp" => {
            arity(2)?;
            F::Imp(Box::new(formula(&args[0])?), Box::new(formula(&args[1])?))
        }
        "iff" => {
            arity(2)?;
            F::Iff(Box::new(formula(&args[0])?), Box::new(formula(&args[1])?))
        }
        "dia" => modal(F::Dia)?,
        "bdia" => modal(F::BDia)?,
        "box" => modal(F::Box)?,
        "bbox" => modal(F::BBox)?,
        "gdia" => F::GDia(one()?),
        "gbox" => F::GBox(one()?),
        "exists-set" => binder(F::ExistsSet)?,
        "forall-set" => binder(F::ForallSet)?,
        "exists" => binder(F::Exists)?,
        "forall" => binder(F::Forall)?,
        "mu" => return err(pos, "a μ-system is not a formula here"),
        other => return err(items[0].pos(), format!("unknown operator {other:?}")),
    })
}

pub(crate) fn print_formula(f: &Formula) -> String {
    use Formula as F;
    let rel = |r: &usize| if *r == 1 { String::new() } else { format!("{r} ") };
    let list = |op: &str, fs: &[Formula]| {
        let mut s = format!("({op}");
        for g in fs {
            s.push(' ');
            s.push_str(&print_formula(g));
        }
        s.push(')');
        s
    };
    match f {
        F::Top => "(top)".into(),
        F::Bot => "(bot)".into(),
        F::Is(x) => format!("(is {x})"),
        F::In(p) => format!("(in {p})"),
        F::Eq(x, y) => format!("(eq {x} {y})"),
        F::Mem(p, x) => format!("(mem {p} {x})"),
        F::Rel(r, x, y) => format!("(rel {}{x} {y})", rel(r)),
        F::Not(a) => format!("(not {})", print_formula(a)),
        F::Or(fs) => list("or", fs),
        F::And(fs) => list("and", fs),
        F::Imp(a, b) => format!("(imp {} {})", print_formula(a), print_formula(b)),
        F::Iff(a, b) => format!("(iff {} {})", print_formula(a), print_formula(b)),
        F::Dia(r, a) => format!("(dia {}{})", rel(r), print_formula(a)),
        F::BDia(r, a) => format!("(bdia {}{})", rel(r), print_formula(a)),
        F::Box(r, a) => format!("(box {}{})", rel(r), print_formula(a)),
        F::BBox(r, a) => format!("(bbox {}{})", rel(r), print_formula(a)),
        F::GDia(a) => format!("(gdia {})", print_formula(a)),
        F::GBox(a) => format!("(gbox {})", print_formula(a)),
        F::ExistsSet(x, a) => format!("(exists-set {x} {})", print_formula(a)),
        F::ForallSet(x, a) => format!("(forall-set {x} {})", print_formula(a)),
        F::Exists(x, a) => format!("(exists {x} {})", print_formula(a)),
        F::Forall(x, a) => format!("(forall {x} {})", print_formula(a)),
    }
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    formula(&read(text)?)
}

/// Parses and rejects constructs outside `kernel`.
pub fn parse_formula_in(text: &str, kernel: Kernel) -> Result<Formula> {
    let f = parse_formula(text)?;
    kernel.check(&f)?;
    Ok(f)
}

/// `Pi` with `i ≥ 1`, the label-bit set constants.
pub(crate) fn label_constant(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('P')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn mu_body(s: &Sexp, vars: &[String]) -> Result<MuBody> {
    use MuBody as B;
    let (items, pos) = match s {
        Sexp::Atom(a, p) => {
            return match vars.iter().position(|v| v == a) {
                Some(i) => Ok(B::Var(i)),
                None => err(*p, format!("{a:?} is not a variable of this system")),
            }
        }
        Sexp::List(items, p) => (items, *p),
    };
    let h = head(items, pos)?;
    let args = &items[1..];
    let constant = |s: &Sexp| -> Result<usize> {
        let name = atom(s)?;
        label_constant(name).map_or_else(|| err(s.pos(), format!("{name:?} is not a set constant Pi")), Ok)
    };
    let only = |n: usize| if args.len() == n { Ok(()) } else { err(pos, format!("{h} takes {n} argument(s)")) };
    Ok(match h {
        "top" => B::Top,
        "bot" => B::Bot,
        "in" => {
            only(1)?;
            let name = atom(&args[0])?;
            match vars.iter().position(|v| v == name) {
                Some(i) => B::Var(i),
                None => B::Prop(constant(&args[0])?, true),
            }
        }
        "not" => {
            only(1)?;
            match &args[0] {
                Sexp::List(inner, p) if matches!(inner.first(), Some(Sexp::Atom(a, _)) if a == "in") && inner.len() == 2 => {
                    let name = atom(&inner[1])?;
                    if vars.iter().any(|v| v == name) {
                        return err(*p, "variables may only occur positively");
                    }
                    B::Prop(constant(&inner[1])?, false)
                }
                other => return err(other.pos(), "negation applies to set constants only"),
            }
        }
        "or" => B::Or(args.iter().map(|a| mu_body(a, vars)).collect::<Result<_>>()?),
        "and" => B::And(args.iter().map(|a| mu_body(a, vars)).collect::<Result<_>>()?),
        "bdia" | "bbox" => {
            let (r, rest) = rel_and_args(args)?;
            if r != 1 || rest.len() != 1 {
                return err(pos, format!("{h} in a μ-system reads relation 1 with one argument"));
            }
            let inner = Box::new(mu_body(&rest[0], vars)?);
            if h == "bdia" {
                B::BDia(inner)
            } else {
                B::BBox(inner)
            }
        }
        "dia" | "box" | "gdia" | "gbox" => return err(pos, format!("{h} is outside the backward μ-fragment")),
        other => return err(items[0].pos(), format!("unknown operator {other:?}")),
    })
}

fn mu_system(s: &Sexp) -> Result<MuSystem> {
    let (items, pos) = match s {
        Sexp::List(items, p) if matches!(items.first(), Some(Sexp::Atom(a, _)) if a == "mu") => (items, *p),
        other => return err(other.pos(), "expected (mu ((X φ) …))"),
    };
    if items.len() != 2 {
        return err(pos, "mu takes one list of equations");
    }
    let eqs = match &items[1] {
        Sexp::List(eqs, _) if !eqs.is_empty() => eqs,
        other => return err(other.pos(), "expected a nonempty list of equations"),
    };
    let mut vars = Vec::new();
    for e in eqs {
        match e {
            Sexp::List(pair, _) if pair.len() == 2 => {
                let name = atom(&pair[0])?;
                if label_constant(name).is_some() || vars.iter().any(|v| v == name) {
                    return err(pair[0].pos(), format!("{name:?} cannot be a fresh variable"));
                }
                vars.push(name.to_string());
            }
            other => return err(other.pos(), "expected (X φ)"),
        }
    }
    let bodies = eqs
        .iter()
        .map(|e| match e {
            Sexp::List(pair, _) => mu_body(&pair[1], &vars),
            _ => unreachable!(),
        })
        .collect::<Result<Vec<_>>>()?;
    let bits = bodies.iter().map(MuBody::max_constant).max().unwrap_or(0);
    MuSystem::new(bits, vars, bodies)
}

pub fn parse_mu(text: &str) -> Result<MuSystem> {
    mu_system(&read(text)?)
}

pub(crate) fn print_mu_body(b: &MuBody, vars: &[String]) -> String {
    use MuBody as B;
    let list = |op: &str, bs: &[MuBody]| {
        let mut s = format!("({op}");
        for x in bs {
            s.push(' ');
            s.push_str(&print_mu_body(x, vars));
        }
        s.push(')');
        s
    };
    match b {
        B::Top => "(top)".into(),
        B::Bot => "(bot)".into(),
        B::Prop(i, true) => format!("(in P{i})"),
        B::Prop(i, false) => format!("(not (in P{i}))"),
        B::Var(i) => vars[*i].clone(),
        B::Or(bs) => list("or", bs),
        B::And(bs) => list("and", bs),
        B::BDia(a) => format!("(bdia {})", print_mu_body(a, vars)),
        B::BBox(a) => format!("(bbox {})", print_mu_body(a, vars)),
    }
}

/// Either kind of top-level text.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Formula(Formula),
    Mu(MuSystem),
}

pub fn parse_document(text: &str) -> Result<Document> {
    let s = read(text)?;
    match &s {
        Sexp::List(items, _) if matches!(items.first(), Some(Sexp::Atom(a, _)) if a == "mu") => {
            Ok(Document::Mu(mu_system(&s)?))
        }
        _ => Ok(Document::Formula(formula(&s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        for text in [
            "(dia (in P))",
            "(bdia 2 (not (is x)))",
            "(or (top) (bot) (and))",
            "(exists-set X (forall x (imp (mem X x) (exists y (rel 2 x y)))))",
            "(iff (gdia (in P1)) (gbox (box (bbox (eq x y)))))",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(print_formula(&f), text);
            assert_eq!(parse_formula(&print_formula(&f)).unwrap(), f);
        }
        assert_eq!(print_formula(&parse_formula("( dia 1   (in P) )").unwrap()), "(dia (in P))");
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_formula("(dia (in P)").unwrap_err(), Error::Syntax { pos: 0, msg: "unclosed '('".into() });
        assert!(matches!(parse_formula("(frob)"), Err(Error::Syntax { pos: 1, .. })));
        assert!(matches!(parse_formula("(dia (in P) (in Q))"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_formula_in("(bdia X)", Kernel::ML), Err(Error::Kernel(_))));
        assert_eq!(parse_formula("(bdia X)").unwrap().to_string(), "(bdia (in X))");
    }

    #[test]
    fn mu_systems() {
        let m = parse_mu("(mu ((X (or (in P1) (bdia X)))))").unwrap();
        assert_eq!(m.var_count(), 1);
        assert_eq!(m.bits(), 1);
        assert!(parse_mu("(mu ((X (not X))))").is_err());
        assert!(parse_mu("(mu ((X (dia X))))").is_err());
        let text = "(mu ((X1 (or (and (in P1) X2) (bdia X1))) (X2 (bbox X2))))";
        let m = parse_mu(text).unwrap();
        assert_eq!(m.to_string(), text);
        assert!(matches!(parse_document(text).unwrap(), Document::Mu(_)));
    }
}
