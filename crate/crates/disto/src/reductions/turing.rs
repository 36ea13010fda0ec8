//! Turing machines and their simulation on dipaths with space and time
//! exchanged: node `t` walks through the tape of configuration `t`, one
//! cell per round, two cells behind its predecessor.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{Guard, GuardOp, Rule, RuleTable};
use crate::sets::StateId;
use crate::sync::DistributedAutomaton;

/// Largest state space `m³` that [`tm_to_da`] builds.
pub const MAX_SPACE_TIME_STATES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
}

/// Deterministic one-tape machine on a tape that is infinite to the right
/// and initially blank. Moving left on cell 0 keeps the head there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuringMachine {
    states: Vec<String>,
    tape: Vec<String>,
    blank: usize,
    initial: usize,
    halt: usize,
    /// Indexed by `q * |Γ| + σ`; `None` exactly on the halting state.
    delta: Vec<Option<(usize, usize, Move)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TmConfig {
    pub state: usize,
    pub head: usize,
    pub tape: Vec<usize>,
}

impl TuringMachine {
    pub fn new(
        states: Vec<String>,
        tape: Vec<String>,
        blank: usize,
        initial: usize,
        halt: usize,
        delta: BTreeMap<(usize, usize), (usize, usize, Move)>,
    ) -> Result<Self> {
        let (nq, ng) = (states.len(), tape.len());
        if blank >= ng || initial >= nq || halt >= nq {
            return Err(Error::Automaton("machine components out of range".into()));
        }
        if initial == halt {
            return Err(Error::Automaton("the initial state must differ from the halting state".into()));
        }
        for name in states.iter().chain(&tape) {
            if name.is_empty() || name == "⊥" || name.contains(['(', ')', ',', ':']) {
                return Err(Error::Automaton(format!("unusable machine name {name:?}")));
            }
        }
        let mut names: Vec<&String> = states.iter().chain(&tape).collect();
        names.sort();
        names.dedup();
        if names.len() != nq + ng {
            return Err(Error::Automaton("state and symbol names must be distinct".into()));
        }
        let mut table = vec![None; nq * ng];
        for (&(q, s), &(p, t, m)) in &delta {
            if q >= nq || s >= ng || p >= nq || t >= ng || q == halt {
                return Err(Error::Automaton("transition out of range".into()));
            }
            table[q * ng + s] = Some((p, t, m));
        }
        for q in (0..nq).filter(|&q| q != halt) {
            if let Some(s) = (0..ng).find(|&s| table[q * ng + s].is_none()) {
                return Err(Error::Automaton(format!("no transition for ({}, {})", states[q], tape[s])));
            }
        }
        Ok(TuringMachine { states, tape, blank, initial, halt, delta: table })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn symbol_count(&self) -> usize {
        self.tape.len()
    }

    pub fn halt(&self) -> usize {
        self.halt
    }

    pub fn transition(&self, q: usize, s: usize) -> Option<(usize, usize, Move)> {
        self.delta[q * self.tape.len() + s]
    }

    pub fn initial_config(&self) -> TmConfig {
        TmConfig { state: self.initial, head: 0, tape: vec![self.blank] }
    }

    /// One step, or `None` once halted.
    pub fn step(&self, c: &TmConfig) -> Option<TmConfig> {
        let (p, t, m) = self.transition(c.state, c.tape[c.head])?;
        let mut next = c.clone();
        next.tape[c.head] = t;
        next.state = p;
        match m {
            Move::L => next.head = c.head.saturating_sub(1),
            Move::R => {
                next.head += 1;
                if next.head == next.tape.len() {
                    next.tape.push(self.blank);
                }
            }
        }
        Some(next)
    }

    /// Configurations `C_0, …` up to halting or `max_steps`.
    pub fn run(&self, max_steps: usize) -> Vec<TmConfig> {
        let mut out = vec![self.initial_config()];
        while out.len() <= max_steps {
            match self.step(out.last().unwrap()) {
                Some(c) => out.push(c),
                None => break,
            }
        }
        out
    }

    /// Step at which the halting state is reached, if within `max_steps`.
    pub fn halting_time(&self, max_steps: usize) -> Option<usize> {
        let run = self.run(max_steps);
        (run.last().unwrap().state == self.halt).then(|| run.len() - 1)
    }

    /// Content of cell `j` in `c`, as seen by the simulation.
    pub fn cell(&self, c: &TmConfig, j: usize) -> Cell {
        let s = c.tape.get(j).copied().unwrap_or(self.blank);
        if j == c.head { Cell::Head(c.state, s) } else { Cell::Sym(s) }
    }
}

/// `{"states", "tape", "blank", "initial", "halt", "delta": [[q, s, q', s', "L"|"R"]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmJson {
    pub states: Vec<String>,
    pub tape: Vec<String>,
    pub blank: String,
    pub initial: String,
    pub halt: String,
    pub delta: Vec<(String, String, String, String, Move)>,
}

impl TuringMachine {
    pub fn to_json(&self) -> TmJson {
        let ng = self.tape.len();
        let delta = self
            .delta
            .iter()
            .enumerate()
            .filter_map(|(i, t)| {
                t.map(|(p, s, m)| {
                    (self.states[i / ng].clone(), self.tape[i % ng].clone(), self.states[p].clone(), self.tape[s].clone(), m)
                })
            })
            .collect();
        TmJson {
            states: self.states.clone(),
            tape: self.tape.clone(),
            blank: self.tape[self.blank].clone(),
            initial: self.states[self.initial].clone(),
            halt: self.states[self.halt].clone(),
            delta,
        }
    }

    pub fn from_json(j: &TmJson) -> Result<Self> {
        let find = |names: &[String], s: &str| {
            names.iter().position(|x| x == s).ok_or_else(|| Error::Automaton(format!("unknown machine name {s:?}")))
        };
        let mut delta = BTreeMap::new();
        for (q, s, p, t, m) in &j.delta {
            let key = (find(&j.states, q)?, find(&j.tape, s)?);
            if delta.insert(key, (find(&j.states, p)?, find(&j.tape, t)?, *m)).is_some() {
                return Err(Error::Automaton(format!("duplicate transition for ({q}, {s})")));
            }
        }
        TuringMachine::new(
            j.states.clone(),
            j.tape.clone(),
            find(&j.tape, &j.blank)?,
            find(&j.states, &j.initial)?,
            find(&j.states, &j.halt)?,
            delta,
        )
    }
}

/// One tape cell as carried in a state component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell {
    /// Nothing visited yet.
    Wait,
    Head(usize, usize),
    Sym(usize),
}

struct Cells<'a> {
    m: &'a TuringMachine,
}

impl Cells<'_> {
    fn count(&self) -> usize {
        1 + self.m.states.len() * self.m.tape.len() + self.m.tape.len()
    }

    fn encode(&self, c: Cell) -> usize {
        let ng = self.m.tape.len();
        match c {
            Cell::Wait => 0,
            Cell::Head(q, s) => 1 + q * ng + s,
            Cell::Sym(s) => 1 + self.m.states.len() * ng + s,
        }
    }

    fn decode(&self, i: usize) -> Cell {
        let ng = self.m.tape.len();
        let heads = self.m.states.len() * ng;
        match i {
            0 => Cell::Wait,
            i if i <= heads => Cell::Head((i - 1) / ng, (i - 1) % ng),
            i => Cell::Sym(i - 1 - heads),
        }
    }

    fn name(&self, c: Cell) -> String {
        match c {
            Cell::Wait => "⊥".into(),
            Cell::Head(q, s) => format!("{}:{}", self.m.states[q], self.m.tape[s]),
            Cell::Sym(s) => self.m.tape[s].clone(),
        }
    }

    /// Cell `j` of the next configuration from cells `j−1, j, j+1` of the
    /// current one; `c1 = Wait` means `j = 0`. A halted head is dropped.
    fn next(&self, c1: Cell, c2: Cell, c3: Cell) -> Cell {
        let moving = |c: Cell, dir: Move| match c {
            Cell::Head(q, s) if q != self.m.halt => {
                self.m.transition(q, s).filter(|t| t.2 == dir).map(|t| t.0)
            }
            _ => None,
        };
        match c2 {
            Cell::Wait => Cell::Wait,
            Cell::Head(q, s) if q == self.m.halt => Cell::Sym(s),
            Cell::Head(q, s) => {
                let (p, t, m) = self.m.transition(q, s).expect("total off the halting state");
                if m == Move::L && c1 == Cell::Wait { Cell::Head(p, t) } else { Cell::Sym(t) }
            }
            Cell::Sym(s) => match moving(c1, Move::R).or_else(|| moving(c3, Move::L)) {
                Some(p) => Cell::Head(p, s),
                None => Cell::Sym(s),
            },
        }
    }
}

/// Distributed automaton on unlabeled dipaths whose node `t` visits an
/// accepting state iff `m` halts at step `t`. States are all triples of
/// cells (two cells of history plus the current one), reachable or not.
pub fn tm_to_da(m: &TuringMachine) -> Result<DistributedAutomaton> {
    let cells = Cells { m };
    let k = cells.count();
    let n = k * k * k;
    if n > MAX_SPACE_TIME_STATES {
        return Err(Error::Bound(format!("space-time automaton with {n} states")));
    }
    let id = |a: usize, b: usize, c: usize| ((a * k + b) * k + c) as StateId;
    let parts = |q: usize| (q / (k * k), q / k % k, q % k);
    let wait = cells.encode(Cell::Wait);
    let mut names = Vec::with_capacity(n);
    for q in 0..n {
        let (a, b, c) = parts(q);
        names.push(format!("({},{},{})", cells.name(cells.decode(a)), cells.name(cells.decode(b)), cells.name(cells.decode(c))));
    }
    // Predecessor states grouped by the cell they let a node compute next.
    let mut by_next: BTreeMap<usize, Vec<StateId>> = BTreeMap::new();
    let mut waiting = Vec::new();
    for c in 0..n {
        let (c1, c2, c3) = parts(c);
        if c2 == wait {
            waiting.push(c as StateId);
        } else {
            let d = cells.next(cells.decode(c1), cells.decode(c2), cells.decode(c3));
            by_next.entry(cells.encode(d)).or_default().push(c as StateId);
        }
    }
    let start = cells.encode(Cell::Head(m.initial, m.blank));
    let blank = cells.encode(Cell::Sym(m.blank));
    let mut delta = RuleTable::new(n);
    for q in 0..n {
        let (_, s2, s3) = parts(q);
        let source_next = if s3 == wait { start } else { blank };
        delta.push(q, Rule { guards: vec![Guard::of(0, GuardOp::Eq, n, [])], to: id(s2, s3, source_next) });
        if s3 == wait {
            let guards = vec![Guard::of(0, GuardOp::Subseteq, n, waiting.iter().copied()), Guard::of(0, GuardOp::Meets, n, waiting.iter().copied())];
            delta.push(q, Rule { guards, to: q as StateId });
        }
        for (&d, preds) in &by_next {
            let guards = vec![Guard::of(0, GuardOp::Subseteq, n, preds.iter().copied()), Guard::of(0, GuardOp::Meets, n, preds.iter().copied())];
            delta.push(q, Rule { guards, to: id(s2, s3, d) });
        }
        delta.push(q, Rule { guards: vec![], to: id(wait, wait, wait) });
    }
    let accepting = (0..n).filter(|&q| matches!(cells.decode(parts(q).2), Cell::Head(p, _) if p == m.halt)).map(|q| q as StateId);
    let init = BTreeMap::from([(0, id(wait, wait, wait))]);
    DistributedAutomaton::new(names, 0, 1, init, accepting, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::dipath;
    use crate::sync::{decide_acceptance_sync, monovisioned_transform, sync_run, Horizon};

    fn machine(states: &[&str], halt: &str, rules: &[(&str, &str, &str, &str, Move)]) -> TuringMachine {
        let j = TmJson {
            states: states.iter().map(|s| s.to_string()).collect(),
            tape: vec!["_".into(), "x".into()],
            blank: "_".into(),
            initial: states[0].into(),
            halt: halt.into(),
            delta: rules.iter().map(|(a, b, c, d, m)| (a.to_string(), b.to_string(), c.to_string(), d.to_string(), *m)).collect(),
        };
        TuringMachine::from_json(&j).unwrap()
    }

    /// Halts after one step.
    fn quick() -> TuringMachine {
        machine(&["a", "h"], "h", &[("a", "_", "h", "x", Move::R), ("a", "x", "h", "x", Move::R)])
    }

    /// Writes x, goes left (bouncing off cell 0), then right twice, and halts on a blank.
    fn wanderer() -> TuringMachine {
        machine(
            &["a", "b", "c", "h"],
            "h",
            &[
                ("a", "_", "b", "x", Move::R),
                ("a", "x", "a", "x", Move::R),
                ("b", "_", "c", "x", Move::L),
                ("b", "x", "b", "x", Move::L),
                ("c", "x", "c", "_", Move::L),
                ("c", "_", "h", "_", Move::R),
            ],
        )
    }

    fn looping() -> TuringMachine {
        machine(&["a", "b", "h"], "h", &[("a", "_", "b", "_", Move::R), ("a", "x", "b", "x", Move::R), ("b", "_", "a", "_", Move::L), ("b", "x", "a", "x", Move::L)])
    }

    #[test]
    fn simulator() {
        assert_eq!(quick().halting_time(10), Some(1));
        assert_eq!(looping().halting_time(50), None);
        let w = wanderer();
        let k = w.halting_time(20).unwrap();
        assert!(k > 3);
        let run = w.run(20);
        assert!(run.iter().any(|c| c.head == 0 && c.state == w.states.iter().position(|s| s == "c").unwrap()));
    }

    #[test]
    fn cell_update_matches_machine() {
        for m in [quick(), wanderer(), looping()] {
            let cells = Cells { m: &m };
            let run = m.run(8);
            for w in run.windows(2) {
                for j in 0..w[0].tape.len() + 3 {
                    let left = if j == 0 { Cell::Wait } else { m.cell(&w[0], j - 1) };
                    assert_eq!(cells.next(left, m.cell(&w[0], j), m.cell(&w[0], j + 1)), m.cell(&w[1], j));
                }
            }
        }
    }

    #[test]
    fn dipaths_accept_at_halting_time() {
        for m in [quick(), wanderer()] {
            let k = m.halting_time(20).unwrap();
            let a = tm_to_da(&m).unwrap();
            let mono = monovisioned_transform(&a).unwrap();
            for len in 1..=k + 3 {
                let pd = dipath(len + 1).unwrap();
                let v = decide_acceptance_sync(&a, &pd).unwrap();
                assert_eq!(v, len == k, "length {len}");
                assert_eq!(decide_acceptance_sync(&mono, &pd).unwrap(), v);
            }
        }
        let a = tm_to_da(&looping()).unwrap();
        assert!((1..=8).all(|len| !decide_acceptance_sync(&a, &dipath(len + 1).unwrap()).unwrap()));
    }

    #[test]
    fn nodes_traverse_configurations() {
        let m = wanderer();
        let a = tm_to_da(&m).unwrap();
        let cells = Cells { m: &m };
        let k = cells.count();
        let configs = m.run(20);
        let n = configs.len();
        let run = sync_run(&a, &dipath(n).unwrap().graph, Horizon::Steps(60)).unwrap();
        for (t, c) in configs.iter().enumerate() {
            for j in 0..c.tape.len() + 2 {
                // Node t shows cell j of C_t at time j + 1 + 2t.
                let q = run.at(j + 1 + 2 * t).unwrap()[t] as usize;
                assert_eq!(cells.decode(q % k), m.cell(c, j), "t={t} j={j}");
            }
        }
    }

    #[test]
    fn staircase() {
        let m = wanderer();
        let a = tm_to_da(&m).unwrap();
        let k = Cells { m: &m }.count();
        let n = 6;
        let run = sync_run(&a, &dipath(n).unwrap().graph, Horizon::Steps(40)).unwrap();
        let first = |v: usize, comp: usize| {
            (0..40).find(|&s| {
                let q = run.at(s).unwrap()[v] as usize;
                [q / (k * k), q / k % k, q % k][comp] != 0
            })
        };
        for v in 1..n {
            assert_eq!(first(v, 2), first(v - 1, 1).map(|s| s + 1), "node {v}");
        }
    }

    #[test]
    fn json_and_validation() {
        let m = wanderer();
        let text = serde_json::to_string(&m.to_json()).unwrap();
        assert_eq!(TuringMachine::from_json(&serde_json::from_str(&text).unwrap()).unwrap(), m);
        let mut bad = m.to_json();
        bad.initial = bad.halt.clone();
        assert!(TuringMachine::from_json(&bad).is_err());
        let mut partial = m.to_json();
        partial.delta.pop();
        assert!(TuringMachine::from_json(&partial).is_err());
    }
}
