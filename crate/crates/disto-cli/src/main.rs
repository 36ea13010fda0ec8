//! `disto`: command-line front end. Every verb prints one JSON report
//! `{"schema":"disto/1","verdict":…,"details":…}` on stdout.

mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use disto::alternating::{
    apply_closure, compile_mso_to_aldag, decide_acceptance_alt, nldag_emptiness, AltAutomaton, ClosureKind, Emptiness,
    EmptinessMode, Projection,
};
use disto::asynchronous::{decide_acceptance_timed, falsify_consistency, Falsification, Timing};
use disto::decision::{bounded_ditree_search, forgetful_emptiness, forgetful_witness, ForgetfulEmptiness};
use disto::forgetful::ForgetfulAutomaton;
use disto::graph::{generate, GenParams, StructureKind};
use disto::logic::Formula;
use disto::mu_compiler::{compile_mu_to_aqda, decompile_qda_to_mu};
use disto::reductions::{dfa_to_fda, fda_to_dfa, tm_to_da, treeautomaton_to_fda, Dfa, TreeAutomaton, TuringMachine};
use disto::sync::{classify, decide_acceptance_sync, monovisioned_transform, sync_run, Horizon, DEFAULT_HORIZON};
use disto::tiling::{grid_validate, ts_recognize, GridVerdict, TilingSystem};
use disto::{Digraph, DistributedAutomaton, Pointed};

use input::{read_digraph, read_json, InputError};

pub const SCHEMA: &str = "disto/1";

/// Verdicts that make `--strict` exit with status 2.
const NEGATIVE: &[&str] = &["rejected", "empty", "not-found", "counterexample", "not-grid"];

#[derive(Parser)]
#[command(name = "disto", version, about = "Distributed automata on labeled digraphs")]
struct Cli {
    /// Exit with status 2 on a negative verdict.
    #[arg(long, global = true)]
    strict: bool,
    /// Write the produced artifact (automaton, witness, digraph or text) here;
    /// verbs without an artifact write a copy of the report.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Synchronous run of an automaton on a digraph.
    Run {
        automaton: PathBuf,
        graph: PathBuf,
        /// Number of rounds, or `auto` to stop at the first repeated configuration.
        #[arg(long, default_value = "auto", value_parser = parse_horizon)]
        horizon: Horizon,
    },
    /// Synchronous acceptance of a pointed digraph.
    Accept { automaton: PathBuf, graph: PathBuf },
    /// Acceptance under an explicit timing.
    AcceptTimed { automaton: PathBuf, graph: PathBuf, timing: PathBuf },
    /// Compares sampled timings against the synchronous verdicts.
    FalsifyAsync {
        automaton: PathBuf,
        graph: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        prefix: usize,
        #[arg(long)]
        lossless: bool,
    },
    /// μ-fragment system to quasi-acyclic automaton.
    CompileMu { system: PathBuf },
    /// Quasi-acyclic automaton to μ-fragment system.
    DecompileQda { automaton: PathBuf },
    /// MSO sentence to alternating automaton.
    CompileMso {
        formula: PathBuf,
        #[arg(long, default_value_t = 0)]
        bits: usize,
        #[arg(long, default_value_t = 1)]
        relations: usize,
        /// Also decide acceptance of this digraph by the compiled automaton.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Acceptance of a digraph by an alternating automaton.
    AltAccept { automaton: PathBuf, graph: PathBuf },
    /// Boolean closure or projection of alternating automata.
    AltClosure {
        kind: ClosureArg,
        automaton: PathBuf,
        other: Option<PathBuf>,
        /// Label bits to forget (projection only).
        #[arg(long, value_delimiter = ',')]
        drop_bits: Vec<usize>,
    },
    /// Exact emptiness of a forgetful automaton.
    EmptyForgetful { automaton: PathBuf },
    /// Emptiness search for a nondeterministic alternating automaton.
    EmptyNldag {
        automaton: PathBuf,
        /// Node cap; without it the pigeonhole bound is used.
        #[arg(long)]
        max_nodes: Option<usize>,
    },
    /// Searches pointed ditrees for an accepted one.
    SearchWitness {
        automaton: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
    },
    /// Word automaton to forgetful automaton on dipaths
    Dfa2fda { dfa: PathBuf },
    /// Forgetful automaton to an equivalent word automaton on dipaths
    Fda2dfa { automaton: PathBuf },
    /// Tree automaton to forgetful automaton on ordered ditrees
    Ta2fda { tree_automaton: PathBuf },
    /// Space-time automaton of a Turing machine.
    Tm2da {
        machine: PathBuf,
        #[arg(long)]
        monovisioned: bool,
    },
    /// Tiling-system recognition of a grid.
    TsRecognize { tiling: PathBuf, graph: PathBuf },
    /// Checks the six grid conditions.
    GridCheck { graph: PathBuf },
    /// Generates a structure.
    Gen {
        kind: KindArg,
        #[arg(long, default_value_t = 1)]
        nodes: usize,
        #[arg(long, default_value_t = 1)]
        height: usize,
        #[arg(long, default_value_t = 1)]
        width: usize,
        #[arg(long, default_value_t = 1)]
        rels: usize,
        #[arg(long, default_value_t = 0)]
        bits: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        /// Required whenever the structure or labels are random.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosureArg {
    Complement,
    Union,
    Intersect,
    Project,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Dipath,
    OrderedDitree,
    Grid,
    General,
    Undirected,
}

fn parse_horizon(s: &str) -> Result<Horizon, String> {
    if s == "auto" {
        return Ok(Horizon::Auto(DEFAULT_HORIZON));
    }
    s.parse().map(Horizon::Steps).map_err(|_| format!("expected a number or `auto`, got {s:?}"))
}

struct Outcome {
    verdict: &'static str,
    details: Value,
    artifact: Option<String>,
}

impl Outcome {
    fn new(verdict: &'static str, details: Value) -> Self {
        Outcome { verdict, details, artifact: None }
    }

    fn with_artifact(mut self, artifact: impl Serialize) -> Self {
        self.artifact = Some(to_pretty(&artifact));
        self
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    verdict: &'a str,
    details: &'a Value,
}

fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn verdict(b: bool) -> &'static str {
    if b {
        "accepted"
    } else {
        "rejected"
    }
}

fn witness_json(pd: &Pointed) -> Value {
    serde_json::to_value(pd.to_json()).expect("serializable")
}

fn pointed(d: Digraph, point: Option<usize>, path: &std::path::Path) -> Result<Pointed, InputError> {
    match point {
        Some(point) => Ok(Pointed { graph: d, point }),
        None => Err(InputError::at(path, "the digraph needs a \"point\" for this verb")),
    }
}

fn da(path: &std::path::Path) -> Result<DistributedAutomaton, InputError> {
    let j = read_json(path)?;
    DistributedAutomaton::from_json(&j).map_err(|e| InputError::at(path, e))
}

fn fda(path: &std::path::Path) -> Result<ForgetfulAutomaton, InputError> {
    let j = read_json(path)?;
    ForgetfulAutomaton::from_json(&j).map_err(|e| InputError::at(path, e))
}

fn alt(path: &std::path::Path) -> Result<AltAutomaton, InputError> {
    let j = read_json(path)?;
    AltAutomaton::from_json(&j).map_err(|e| InputError::at(path, e))
}

fn alt_artifact(a: &AltAutomaton) -> Result<Outcome, InputError> {
    let j = a.to_json().map_err(InputError::plain)?;
    Ok(Outcome::new("compiled", json!({ "automaton": j, "states": a.state_count() })).with_artifact(j))
}

/// Like [`alt_artifact`], but an automaton whose accepting sets are too many
/// to list is still summarized, and can be run on a digraph directly.
fn mso_outcome(a: &AltAutomaton, graph: Option<&std::path::Path>, want_artifact: bool) -> Result<Outcome, InputError> {
    let mut details = json!({
        "states": a.state_count(),
        "permanent": a.permanent_states().len(),
    });
    let mut artifact = None;
    match a.to_json() {
        Ok(j) => {
            details["automaton"] = json!(j);
            artifact = Some(to_pretty(&j));
        }
        Err(e) if !want_artifact => {
            details["automaton"] = Value::Null;
            details["unlisted"] = json!(e.to_string());
        }
        Err(e) => return Err(InputError::plain(e)),
    }
    let verdict = match graph {
        Some(g) => {
            let (d, _) = read_digraph(g)?;
            verdict(decide_acceptance_alt(a, &d).map_err(InputError::plain)?)
        }
        None => "compiled",
    };
    Ok(Outcome { verdict, details, artifact })
}

fn dispatch(verb: Verb, want_artifact: bool) -> Result<Outcome, InputError> {
    Ok(match verb {
        Verb::Run { automaton, graph, horizon } => {
            let a = da(&automaton)?;
            let (d, _) = read_digraph(&graph)?;
            let run = sync_run(&a, &d, horizon).map_err(InputError::plain)?;
            let rounds: Vec<Vec<&str>> = run.configs.iter().map(|c| c.iter().map(|&q| a.name(q)).collect()).collect();
            Outcome::new("completed", json!({ "rounds": rounds, "lasso": run.lasso }))
        }
        Verb::Accept { automaton, graph } => {
            let a = da(&automaton)?;
            let (d, p) = read_digraph(&graph)?;
            let pd = pointed(d, p, &graph)?;
            let ok = decide_acceptance_sync(&a, &pd).map_err(InputError::plain)?;
            Outcome::new(verdict(ok), json!({ "point": pd.point }))
        }
        Verb::AcceptTimed { automaton, graph, timing } => {
            let a = da(&automaton)?;
            let (d, p) = read_digraph(&graph)?;
            let tj = read_json(&timing)?;
            let t = Timing::from_json(&d, &tj).map_err(|e| InputError::at(&timing, e))?;
            let pd = pointed(d, p, &graph)?;
            let ok = decide_acceptance_timed(&a, &pd, &t).map_err(InputError::plain)?;
            Outcome::new(verdict(ok), json!({ "point": pd.point, "lossless": tj.lossless }))
        }
        Verb::FalsifyAsync { automaton, graph, seed, samples, prefix, lossless } => {
            let a = da(&automaton)?;
            let (d, _) = read_digraph(&graph)?;
            match falsify_consistency(&a, &d, samples, prefix, lossless, seed).map_err(InputError::plain)? {
                Falsification::ConsistentSoFar { timings } => {
                    Outcome::new("consistent-so-far", json!({ "timings": timings, "seed": seed }))
                }
                Falsification::Counterexample { first, second, node } => Outcome::new(
                    "counterexample",
                    json!({ "node": node, "first": first.to_json(), "second": second.to_json(), "seed": seed }),
                )
                .with_artifact(second.to_json()),
            }
        }
        Verb::CompileMu { system } => {
            let m = input::read_mu(&system)?;
            let a = compile_mu_to_aqda(&m).map_err(InputError::plain)?;
            let class = classify(&a).ok();
            let j = a.to_json();
            Outcome::new("compiled", json!({ "automaton": j, "class": class })).with_artifact(j)
        }
        Verb::DecompileQda { automaton } => {
            let a = da(&automaton)?;
            let m = decompile_qda_to_mu(&a).map_err(InputError::plain)?;
            let text = m.to_string();
            let mut o = Outcome::new("compiled", json!({ "mu": text }));
            o.artifact = Some(text + "\n");
            o
        }
        Verb::CompileMso { formula, bits, relations, graph } => {
            let f: Formula = input::read_formula(&formula)?;
            let a = compile_mso_to_aldag(&f, bits, relations).map_err(InputError::plain)?;
            mso_outcome(&a, graph.as_deref(), want_artifact)?
        }
        Verb::AltAccept { automaton, graph } => {
            let a = alt(&automaton)?;
            let (d, _) = read_digraph(&graph)?;
            Outcome::new(verdict(decide_acceptance_alt(&a, &d).map_err(InputError::plain)?), json!({}))
        }
        Verb::AltClosure { kind, automaton, other, drop_bits } => {
            let a = alt(&automaton)?;
            let b = other.as_deref().map(alt).transpose()?;
            let kind = match kind {
                ClosureArg::Complement => ClosureKind::Complement,
                ClosureArg::Union => ClosureKind::Union,
                ClosureArg::Intersect => ClosureKind::Intersect,
                ClosureArg::Project => ClosureKind::Project,
            };
            let pi = Projection::forget_bits(a.bits(), &drop_bits);
            alt_artifact(&apply_closure(kind, &a, b.as_ref(), Some(&pi)).map_err(InputError::plain)?)?
        }
        Verb::EmptyForgetful { automaton } => {
            let a = fda(&automaton)?;
            match forgetful_emptiness(&a).map_err(InputError::plain)? {
                ForgetfulEmptiness::Empty => Outcome::new("empty", json!({})),
                ForgetfulEmptiness::Nonempty { time, state } => {
                    let w = forgetful_witness(&a, time, state).map_err(InputError::plain)?;
                    Outcome::new(
                        "nonempty",
                        json!({ "time": time, "state": a.name(state), "witness": witness_json(&w) }),
                    )
                    .with_artifact(w.to_json())
                }
            }
        }
        Verb::EmptyNldag { automaton, max_nodes } => {
            let a = alt(&automaton)?;
            let mode = max_nodes.map_or(EmptinessMode::FullBound, EmptinessMode::Capped);
            match nldag_emptiness(&a, mode).map_err(InputError::plain)? {
                Emptiness::Empty { exact, searched } => {
                    Outcome::new("empty", json!({ "exact": exact, "searched": searched }))
                }
                Emptiness::Witness(d) => {
                    let j = d.to_json(None);
                    Outcome::new("nonempty", json!({ "witness": j })).with_artifact(j)
                }
            }
        }
        Verb::SearchWitness { automaton, max_nodes } => {
            let a = da(&automaton)?;
            match bounded_ditree_search(&a, max_nodes).map_err(InputError::plain)? {
                Some(w) => Outcome::new("found", json!({ "witness": witness_json(&w) })).with_artifact(w.to_json()),
                None => Outcome::new("not-found", json!({ "max_nodes": max_nodes })),
            }
        }
        Verb::Dfa2fda { dfa } => {
            let j = read_json(&dfa)?;
            let b = Dfa::from_json(&j).map_err(|e| InputError::at(&dfa, e))?;
            let a = dfa_to_fda(&b).map_err(InputError::plain)?.to_json();
            Outcome::new("translated", json!({ "automaton": a })).with_artifact(a)
        }
        Verb::Fda2dfa { automaton } => {
            let a = fda(&automaton)?;
            let b = fda_to_dfa(&a).map_err(InputError::plain)?.to_json();
            Outcome::new("translated", json!({ "automaton": b })).with_artifact(b)
        }
        Verb::Ta2fda { tree_automaton } => {
            let j = read_json(&tree_automaton)?;
            let t = TreeAutomaton::from_json(&j).map_err(|e| InputError::at(&tree_automaton, e))?;
            let a = treeautomaton_to_fda(&t).map_err(InputError::plain)?.to_json();
            Outcome::new("translated", json!({ "automaton": a })).with_artifact(a)
        }
        Verb::Tm2da { machine, monovisioned } => {
            let j = read_json(&machine)?;
            let m = TuringMachine::from_json(&j).map_err(|e| InputError::at(&machine, e))?;
            let mut a = tm_to_da(&m).map_err(InputError::plain)?;
            if monovisioned {
                a = monovisioned_transform(&a).map_err(InputError::plain)?;
            }
            let j = a.to_json();
            Outcome::new("translated", json!({ "automaton": j, "states": a.state_count() })).with_artifact(j)
        }
        Verb::TsRecognize { tiling, graph } => {
            let j = read_json(&tiling)?;
            let ts = TilingSystem::from_json(&j).map_err(|e| InputError::at(&tiling, e))?;
            let (d, _) = read_digraph(&graph)?;
            match ts_recognize(&ts, &d).map_err(|e| InputError::at(&graph, e))? {
                Some(run) => {
                    let cells: Vec<Vec<String>> =
                        run.cells.iter().map(|r| r.iter().map(|&c| ts.cell_to_string(c)).collect()).collect();
                    Outcome::new("accepted", json!({ "run": cells }))
                }
                None => Outcome::new("rejected", json!({})),
            }
        }
        Verb::GridCheck { graph } => {
            let (d, _) = read_digraph(&graph)?;
            match grid_validate(&d).map_err(|e| InputError::at(&graph, e))? {
                GridVerdict::Grid { height, width, coords } => {
                    Outcome::new("grid", json!({ "height": height, "width": width, "coords": coords }))
                }
                GridVerdict::Failed(c) => Outcome::new("not-grid", json!({ "failed": c })),
            }
        }
        Verb::Gen { kind, nodes, height, width, rels, bits, density, seed } => {
            let kind = match kind {
                KindArg::Dipath => StructureKind::Dipath,
                KindArg::OrderedDitree => StructureKind::OrderedDitree,
                KindArg::Grid => StructureKind::Grid,
                KindArg::General => StructureKind::General,
                KindArg::Undirected => StructureKind::Undirected,
            };
            let random = bits > 0 || matches!(kind, StructureKind::General | StructureKind::Undirected);
            if random && seed.is_none() {
                return Err(InputError::plain("--seed is required for random structures and labels"));
            }
            let p = GenParams { nodes, height, width, rels, bits, labels: None, density, seed: seed.unwrap_or(0) };
            let (d, point) = generate(kind, &p).map_err(InputError::plain)?;
            let j = d.to_json(point);
            Outcome::new("generated", json!({ "digraph": j })).with_artifact(j)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Usage errors are input errors: status 1, never the strict status.
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let outcome = match dispatch(cli.verb, cli.out.is_some()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = serde_json::to_string(&Report { schema: SCHEMA, verdict: outcome.verdict, details: &outcome.details })
        .expect("serializable");
    println!("{report}");
    if let Some(path) = &cli.out {
        let body = outcome.artifact.unwrap_or(report + "\n");
        if let Err(e) = std::fs::write(path, body) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if cli.strict && NEGATIVE.contains(&outcome.verdict) {
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn horizon_flag() {
        assert_eq!(parse_horizon("7"), Ok(Horizon::Steps(7)));
        assert_eq!(parse_horizon("auto"), Ok(Horizon::Auto(DEFAULT_HORIZON)));
        assert!(parse_horizon("soon").is_err());
    }
}
