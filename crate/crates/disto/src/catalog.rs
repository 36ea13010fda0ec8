//! Ready-made automata used in examples, tests and the CLI.

use crate::alternating::{AltAutomaton, AltBuilder, Kind};
use crate::forgetful::{ForgetfulAutomaton, ForgetfulBuilder};
use crate::graph::Digraph;
use crate::rules::GuardOp::*;
use crate::sync::{Builder, DistributedAutomaton};

/// Quasi-acyclic automaton accepting at `v` iff walking backwards from `v`
/// reaches a 1-labeled node whose backward cone contains no directed cycle.
pub fn marked_ancestor() -> DistributedAutomaton {
    let mut b = Builder::new(1, 1);
    for s in ["1", "2", "3", "4", "5"] {
        b.state(s);
    }
    b.init(1, "1").init(0, "2").accept("3").accept("5");
    b.rule("1", &[(1, Subseteq, &["4", "5"])], "5")
        .rule("1", &[(1, Subseteq, &["1", "2", "4"])], "1")
        .rule("1", &[], "3");
    b.rule("2", &[(1, Subseteq, &["4"])], "4")
        .rule("2", &[(1, Subseteq, &["4", "5"]), (1, Supseteq, &["5"])], "5")
        .rule("2", &[(1, Subseteq, &["1", "2", "4"])], "2")
        .rule("2", &[], "3");
    b.rule("3", &[(1, Subseteq, &["4", "5"])], "5").rule("3", &[], "3");
    b.rule("4", &[(1, Meets, &["5"])], "5").rule("4", &[], "4");
    b.rule("5", &[], "5");
    b.build().expect("well-formed")
}

/// Accepts at a 0-labeled node iff, at the first round, it sees only
/// 1-labeled predecessors in their initial state. Under synchronous timing
/// all predecessors move together; a staggered timing lets the node see a
/// mixture, so acceptance depends on the timing.
pub fn synchrony_detector() -> DistributedAutomaton {
    let mut b = Builder::new(1, 1);
    b.init(1, "s").init(0, "w").accept("yes");
    b.rule("s", &[], "a").rule("a", &[], "a");
    b.rule("w", &[(1, Subseteq, &["s"])], "w")
        .rule("w", &[(1, Subseteq, &["a"])], "yes")
        .rule("w", &[], "no");
    b.rule("yes", &[], "yes").rule("no", &[], "no");
    b.build().expect("well-formed")
}

/// `u1 → v ← u2` with `u1, u2` labeled 1 and `v` labeled 0; `v` is node 2.
pub fn synchrony_graph() -> Digraph {
    Digraph::new(1, 1, vec![1, 1, 0], [(0, 0, 2), (0, 1, 2)]).expect("well-formed")
}

fn coloring(existential: bool) -> AltBuilder {
    let kind = if existential { Kind::Existential } else { Kind::Universal };
    let mut b = AltBuilder::new(0, 1);
    b.state("ini", kind);
    for c in ["c1", "c2", "c3"] {
        b.state(c, kind);
    }
    b.state("yes", Kind::Permanent);
    b.state("no", Kind::Permanent);
    b.init_all("ini").rule("ini", &[], &["c1", "c2", "c3"]);
    for c in ["c1", "c2", "c3"] {
        b.rule(c, &[(1, Meets, &[c])], &["no"]).rule(c, &[], &["yes"]);
    }
    b
}

/// Nondeterministic automaton for 3-colorable unlabeled digraphs: guess a
/// color, then check the in-neighbors.
pub fn three_colorability() -> AltAutomaton {
    let mut b = coloring(true);
    b.accepting_set(&["yes"]);
    b.build().expect("well-formed")
}

/// Its complement: every coloring is tried in a universal branch, and some
/// node must object in each.
pub fn non_three_colorability() -> AltAutomaton {
    let mut b = coloring(false);
    b.accepting_set(&["no"]).accepting_set(&["yes", "no"]);
    b.build().expect("well-formed")
}

/// Letters `a, b, c` are the labels `00, 10, 01`; `11` is rejected. Accepts
/// valid 3-colorings with a unique `a`-node whose neighbors are all `b`'s
/// and which has at least two in-neighbors.
pub fn concentric_circles() -> AltAutomaton {
    use Kind::*;
    let mut b = AltBuilder::new(2, 1);
    for (s, k) in [("qa", Existential), ("qb", Existential), ("qc", Existential)] {
        b.state(s, k);
    }
    for s in ["qa'", "qb1", "qb2"] {
        b.state(s, Universal);
    }
    for s in ["qa3", "qa4", "yes", "no"] {
        b.state(s, Permanent);
    }
    b.init(0, "qa").init(1, "qb").init(2, "qc").init(3, "no");
    b.rule("qa", &[], &["qa'"]);
    b.rule("qb", &[(1, Meets, &["qb"])], &["no"]).rule("qb", &[], &["qb1", "qb2"]);
    b.rule("qc", &[(1, Meets, &["qa", "qc"])], &["no"]).rule("qc", &[], &["yes"]);
    b.rule("qa'", &[(1, Eq, &["qb1", "qb2"])], &["qa3", "qa4"]).rule("qa'", &[], &["no"]);
    b.rule("qb1", &[], &["yes"]).rule("qb2", &[], &["yes"]);
    b.accepting_set(&["qa3", "yes"]).accepting_set(&["qa4", "yes"]);
    b.build().expect("well-formed")
}

/// Forgetful automaton on unlabeled binary ordered ditrees that accepts at
/// the root iff some node has subtrees of different heights.
pub fn unbalanced_ditree() -> ForgetfulAutomaton {
    let mut b = ForgetfulBuilder::new(0, 2);
    b.initial("w").accept("a");
    b.rule(0, &[(1, Eq, &["w"]), (2, Eq, &["w"])], "w");
    b.rule(0, &[(1, Subseteq, &["f"]), (2, Subseteq, &["f"])], "f");
    b.rule(0, &[], "a");
    b.build().expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{enumerate_digraphs, Pointed, StructureKind};
    use crate::sync::{accepted_nodes, decide_acceptance_sync};

    /// Walking backwards from `v`, some 1-labeled node is reachable from
    /// which no directed cycle is backward-reachable.
    fn marked_ancestor_oracle(d: &Digraph, v: usize) -> bool {
        let inc = d.incoming();
        let back = |s: usize| {
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
        };
        let on_cycle = |x: usize| inc[x][0].iter().any(|&u| back(u)[x]);
        back(v).iter().enumerate().any(|(u, &r)| {
            r && d.label(u) == 1 && !back(u).iter().enumerate().any(|(w, &rw)| rw && on_cycle(w))
        })
    }

    #[test]
    fn marked_ancestor_matches_oracle_on_small_digraphs() {
        for d in enumerate_digraphs(3, 1, 1, StructureKind::General).unwrap() {
            let acc = accepted_nodes(&marked_ancestor(), &d).unwrap();
            for v in 0..d.node_count() {
                assert_eq!(acc[v], marked_ancestor_oracle(&d, v), "{:?} at {v}", d);
            }
        }
    }

    #[test]
    fn synchrony_detector_accepts_synchronously() {
        let pd = Pointed::new(synchrony_graph(), 2).unwrap();
        assert!(decide_acceptance_sync(&synchrony_detector(), &pd).unwrap());
    }
}
