use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use disto::alternating::{complement, AltAutomaton};
use disto::asynchronous::sample_timing;
use disto::catalog;
use disto::forgetful::{ForgetfulAutomaton, ForgetfulBuilder};
use disto::graph::{grid, DigraphJson};
use disto::logic::parse_mu;
use disto::mu_compiler::{compile_mu_to_aqda, decompile_qda_to_mu};
use disto::reductions::{dfa_to_fda, fda_to_dfa, tm_to_da, Dfa, DfaJson, Move, TuringMachine};
use disto::rules::GuardOp;
use disto::sync::{AutomatonJson, Builder};
use disto::tiling::even_width;
use disto::{Digraph, DistributedAutomaton};

const MARKED_ANCESTOR: &str = "(mu ((X1 (or (and (in P1) X2) (bdia X1))) (X2 (bbox X2))))";

struct Dir(PathBuf);

impl Dir {
    fn new(name: &str) -> Self {
        let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
        let _ = std::fs::remove_dir_all(&p);
        std::fs::create_dir_all(&p).unwrap();
        Dir(p)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn json(&self, name: &str, v: &impl serde::Serialize) -> String {
        self.write(name, &serde_json::to_string_pretty(v).unwrap())
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

fn disto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disto")).args(args).output().unwrap()
}

/// Runs a verb that must succeed and returns its parsed report.
fn report(args: &[&str]) -> Value {
    let out = disto(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "disto/1");
    v
}

fn graph(d: &Digraph, point: Option<usize>) -> DigraphJson {
    d.to_json(point)
}

fn always_accepting() -> DistributedAutomaton {
    let mut b = Builder::new(0, 1);
    b.init(0, "yes").accept("yes").rule("yes", &[], "yes");
    b.build().unwrap()
}

fn never_accepting_forgetful() -> ForgetfulAutomaton {
    let mut b = ForgetfulBuilder::new(0, 1);
    b.initial("q").rule(0, &[], "q");
    b.build().unwrap()
}

fn two_node(labels: [u32; 2]) -> Digraph {
    Digraph::new(1, 1, labels.to_vec(), [(0, 0, 1)]).unwrap()
}

#[test]
fn accept_with_trivial_automaton() {
    let dir = Dir::new("accept");
    let a = dir.json("a.json", &always_accepting().to_json());
    let g = dir.json("g.json", &graph(&Digraph::new(0, 1, vec![0; 3], [(0, 0, 1)]).unwrap(), Some(2)));
    let out = disto(&["accept", &a, &g]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(r#"{"schema":"disto/1","verdict":"accepted","#), "{text}");
}

#[test]
fn empty_forgetful_and_strict_exit() {
    let dir = Dir::new("empty");
    let a = dir.json("a.json", &never_accepting_forgetful().to_json());
    assert_eq!(report(&["empty-forgetful", &a])["verdict"], "empty");
    assert_eq!(disto(&["empty-forgetful", &a, "--strict"]).status.code(), Some(2));
}

#[test]
fn forgetful_witness_round_trips() {
    let dir = Dir::new("witness");
    let a = catalog::unbalanced_ditree();
    let path = dir.json("a.json", &a.to_json());
    let out = dir.path("w.json");
    let r = report(&["empty-forgetful", &path, "--out", &out, "--strict"]);
    assert_eq!(r["verdict"], "nonempty");
    let embedded: DigraphJson = serde_json::from_value(r["details"]["witness"].clone()).unwrap();
    let written: DigraphJson = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(embedded, written);
    let (d, p) = Digraph::from_json(&written).unwrap();
    assert_eq!(d.to_json(p), written);
    let pd = disto::Pointed { graph: d, point: p.unwrap() };
    assert!(disto::forgetful::decide_acceptance_forgetful(&a, &pd).unwrap());
}

#[test]
fn compile_mu_then_accept_matches_oracle() {
    let dir = Dir::new("mu");
    let mu = dir.write("marked.mu", MARKED_ANCESTOR);
    let compiled = dir.path("a.json");
    let r = report(&["compile-mu", &mu, "--out", &compiled]);
    assert_eq!(r["details"]["class"]["is_quasi_acyclic"], true);
    let j: AutomatonJson = serde_json::from_value(r["details"]["automaton"].clone()).unwrap();
    let expected = compile_mu_to_aqda(&parse_mu(MARKED_ANCESTOR).unwrap()).unwrap();
    assert_eq!(DistributedAutomaton::from_json(&j).unwrap(), expected);

    // u -> v with u labeled 1: v reaches a 1 without meeting a cycle.
    let g = dir.json("path.json", &graph(&two_node([1, 0]), Some(1)));
    assert_eq!(report(&["accept", &compiled, &g])["verdict"], "accepted");
    let g = dir.json("rev.json", &graph(&two_node([0, 1]), Some(0)));
    assert_eq!(report(&["accept", &compiled, &g])["verdict"], "rejected");
    let looped = Digraph::new(1, 1, vec![1], [(0, 0, 0)]).unwrap();
    let g = dir.json("loop.json", &graph(&looped, Some(0)));
    assert_eq!(report(&["accept", &compiled, &g])["verdict"], "rejected");
    assert_eq!(disto(&["accept", &compiled, &g, "--strict"]).status.code(), Some(2));
}

#[test]
fn decompile_output_parses_back() {
    let dir = Dir::new("decompile");
    let a = catalog::marked_ancestor();
    let path = dir.json("a.json", &a.to_json());
    let r = report(&["decompile-qda", &path]);
    let text = r["details"]["mu"].as_str().unwrap();
    assert_eq!(parse_mu(text).unwrap(), decompile_qda_to_mu(&a).unwrap());
}

#[test]
fn run_lists_rounds() {
    let dir = Dir::new("run");
    let a = dir.json("a.json", &catalog::marked_ancestor().to_json());
    let g = dir.json("g.json", &graph(&two_node([1, 0]), None));
    let r = report(&["run", &a, &g, "--horizon", "3"]);
    assert_eq!(r["details"]["rounds"].as_array().unwrap().len(), 4);
    let auto = report(&["run", &a, &g]);
    assert!(auto["details"]["lasso"].is_object());
}

#[test]
fn timed_acceptance_and_falsification() {
    let dir = Dir::new("timed");
    let det = dir.json("det.json", &catalog::synchrony_detector().to_json());
    let d = catalog::synchrony_graph();
    let g = dir.json("g.json", &graph(&d, Some(0)));
    let t = dir.json("t.json", &sample_timing(&d, 10, true, 3).to_json());
    let r = report(&["accept-timed", &det, &g, &t]);
    assert!(r["verdict"] == "accepted" || r["verdict"] == "rejected");

    let args = ["falsify-async", &det, &g, "--seed", "1", "--samples", "50", "--prefix", "10"];
    let first = disto(&args);
    assert_eq!(first.stdout, disto(&args).stdout, "sampling must be reproducible");
    let r: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(r["verdict"], "counterexample");
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(disto(&strict).status.code(), Some(2));

    let marked = dir.json("marked.json", &catalog::marked_ancestor().to_json());
    let g2 = dir.json("g2.json", &graph(&two_node([1, 0]), None));
    let r = report(&["falsify-async", &marked, &g2, "--seed", "9", "--samples", "20", "--lossless"]);
    assert_eq!(r["verdict"], "consistent-so-far");
}

#[test]
fn seeds_are_mandatory_for_sampling() {
    let dir = Dir::new("seeds");
    let a = dir.json("a.json", &always_accepting().to_json());
    let g = dir.json("g.json", &graph(&two_node([0, 0]), None));
    assert_eq!(disto(&["falsify-async", &a, &g]).status.code(), Some(1));
    assert_eq!(disto(&["gen", "general", "--nodes", "4"]).status.code(), Some(1));
    let one = disto(&["gen", "general", "--nodes", "5", "--bits", "1", "--seed", "7"]);
    assert_eq!(one.stdout, disto(&["gen", "general", "--nodes", "5", "--bits", "1", "--seed", "7"]).stdout);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = Dir::new("errors");
    assert_eq!(disto(&["grid-check", &dir.path("missing.json")]).status.code(), Some(1));
    let bad = dir.write("bad.json", "{\n  \"bits\": 0,\n  oops\n}");
    let out = disto(&["grid-check", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("bad.json") && msg.contains("line 3"), "{msg}");

    let column = Digraph::new(0, 2, vec![0; 2], [(0, 0, 1)]).unwrap();
    let mut j = serde_json::to_value(graph(&column, None)).unwrap();
    j["schema"] = "disto/0".into();
    let old = dir.json("old.json", &j);
    let msg = String::from_utf8(disto(&["grid-check", &old]).stderr).unwrap();
    assert!(msg.contains("format version"), "{msg}");
    j["schema"] = "disto/1".into();
    let cur = dir.json("cur.json", &j);
    assert_eq!(report(&["grid-check", &cur])["verdict"], "grid");

    let mu = dir.write("bad.mu", "(mu ((X1\n (frob X1))))");
    let msg = String::from_utf8(disto(&["compile-mu", &mu]).stderr).unwrap();
    assert!(msg.contains("bad.mu:2:"), "{msg}");

    assert_eq!(disto(&["grid-check", &cur, "--bogus"]).status.code(), Some(1));
    assert_eq!(disto(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn grid_check_and_tiling() {
    let dir = Dir::new("grid");
    let out = dir.path("g.json");
    let r = report(&["gen", "grid", "--height", "2", "--width", "3", "--out", &out]);
    let j: DigraphJson = serde_json::from_value(r["details"]["digraph"].clone()).unwrap();
    assert_eq!(Digraph::from_json(&j).unwrap().0, grid(2, 3).unwrap().graph);
    let r = report(&["grid-check", &out]);
    assert_eq!((r["verdict"].as_str(), r["details"]["width"].as_u64()), (Some("grid"), Some(3)));

    let ts = dir.json("ts.json", &even_width().to_json());
    let odd = dir.json("odd.json", &grid(2, 3).unwrap().to_json());
    let even = dir.json("even.json", &grid(2, 4).unwrap().to_json());
    assert_eq!(report(&["ts-recognize", &ts, &odd])["verdict"], "rejected");
    let r = report(&["ts-recognize", &ts, &even]);
    assert_eq!(r["verdict"], "accepted");
    assert_eq!(r["details"]["run"].as_array().unwrap().len(), 4);
}

fn alt_from(v: &Value) -> AltAutomaton {
    AltAutomaton::from_json(&serde_json::from_value(v.clone()).unwrap()).unwrap()
}

#[test]
fn alternating_verbs() {
    let dir = Dir::new("alt");
    let three = dir.json("three.json", &catalog::three_colorability().to_json().unwrap());
    let tri = dir.json("tri.json", &graph(&Digraph::new(0, 1, vec![0; 3], [(0, 0, 1), (0, 1, 2), (0, 2, 0)]).unwrap(), None));
    let k4_edges: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (0, u, v))).collect();
    let k4 = dir.json("k4.json", &graph(&Digraph::new(0, 1, vec![0; 4], k4_edges).unwrap(), None));
    assert_eq!(report(&["alt-accept", &three, &tri])["verdict"], "accepted");
    assert_eq!(report(&["alt-accept", &three, &k4])["verdict"], "rejected");

    let comp = dir.path("comp.json");
    let r = report(&["alt-closure", "complement", &three, "--out", &comp]);
    assert_eq!(alt_from(&r["details"]["automaton"]).to_json().unwrap(), complement(&catalog::three_colorability()).to_json().unwrap());
    assert_eq!(report(&["alt-accept", &comp, &k4])["verdict"], "accepted");
    assert_eq!(report(&["alt-accept", &comp, &tri])["verdict"], "rejected");

    let r = report(&["empty-nldag", &three, "--max-nodes", "2"]);
    assert_eq!(r["verdict"], "nonempty");
    let w: DigraphJson = serde_json::from_value(r["details"]["witness"].clone()).unwrap();
    assert!(Digraph::from_json(&w).is_ok());

    let f = dir.write("edgeless.mso", "(not (exists x (exists y (rel x y))))");
    let a = dir.path("edgeless.json");
    report(&["compile-mso", &f, "--out", &a]);
    let lone = dir.json("lone.json", &graph(&Digraph::new(0, 1, vec![0; 2], []).unwrap(), None));
    assert_eq!(report(&["alt-accept", &a, &lone])["verdict"], "accepted");
    assert_eq!(report(&["alt-accept", &a, &tri])["verdict"], "rejected");

    // Too many permanent states to list: summarized, and run in place.
    let samples = concat!(env!("CARGO_MANIFEST_DIR"), "/samples/three-color.mso");
    let r = report(&["compile-mso", samples, "--graph", &tri]);
    assert_eq!(r["verdict"], "accepted");
    assert!(r["details"]["automaton"].is_null());
    assert_eq!(report(&["compile-mso", samples, "--graph", &k4])["verdict"], "rejected");
    assert_eq!(disto(&["compile-mso", samples, "--out", &dir.path("x.json")]).status.code(), Some(1));
}

#[test]
fn bridge_translations_round_trip() {
    let dir = Dir::new("bridges");
    let parity = Dfa::new(
        vec!["even".into(), "odd".into()],
        1,
        vec![0, 1],
        0,
        vec![vec![0, 1], vec![1, 0]],
        vec![true, false],
    )
    .unwrap();
    let path = dir.json("dfa.json", &parity.to_json());
    let r = report(&["dfa2fda", &path]);
    let fj = serde_json::from_value(r["details"]["automaton"].clone()).unwrap();
    let fda = ForgetfulAutomaton::from_json(&fj).unwrap();
    assert_eq!(fda, dfa_to_fda(&parity).unwrap());

    let fpath = dir.json("fda.json", &fj);
    let r = report(&["fda2dfa", &fpath]);
    let dj: DfaJson = serde_json::from_value(r["details"]["automaton"].clone()).unwrap();
    assert_eq!(Dfa::from_json(&dj).unwrap(), fda_to_dfa(&fda).unwrap());

    let mut b = ForgetfulBuilder::new(0, 2);
    b.initial("q").accept("q").rule(0, &[], "q");
    let two = dir.json("two.json", &b.build().unwrap().to_json());
    assert_eq!(disto(&["fda2dfa", &two]).status.code(), Some(1));
}

#[test]
fn tm_translation_and_search() {
    let dir = Dir::new("tm");
    let delta = [((0, 0), (1, 0, Move::R))].into_iter().collect();
    let m = TuringMachine::new(vec!["s".into(), "h".into()], vec!["_".into()], 0, 0, 1, delta).unwrap();
    let path = dir.json("tm.json", &m.to_json());
    let r = report(&["tm2da", &path]);
    let j: AutomatonJson = serde_json::from_value(r["details"]["automaton"].clone()).unwrap();
    assert_eq!(DistributedAutomaton::from_json(&j).unwrap(), tm_to_da(&m).unwrap());

    let mono = dir.path("mono.json");
    report(&["tm2da", &path, "--monovisioned", "--out", &mono]);
    let r = report(&["search-witness", &mono, "--max-nodes", "3"]);
    assert_eq!(r["verdict"], "found");
    let w: DigraphJson = serde_json::from_value(r["details"]["witness"].clone()).unwrap();
    assert_eq!(w.nodes.len(), 2, "the machine halts after one step");
}

#[test]
fn search_witness_reports_not_found() {
    let dir = Dir::new("search");
    let mut b = Builder::new(0, 1);
    b.state("acc");
    b.init(0, "q").accept("acc").rule("q", &[(1, GuardOp::Meets, &["acc"])], "acc").rule("q", &[], "q").rule("acc", &[], "acc");
    let a = dir.json("a.json", &b.build().unwrap().to_json());
    let r = report(&["search-witness", &a, "--max-nodes", "4"]);
    assert_eq!(r["verdict"], "not-found");
    assert_eq!(disto(&["search-witness", &a, "--max-nodes", "4", "--strict"]).status.code(), Some(2));
}
