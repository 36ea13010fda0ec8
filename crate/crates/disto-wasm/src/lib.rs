//! Browser demo bindings: compile a μ-fragment system, simulate an automaton
//! on a digraph, and check the grid conditions. Every function takes and
//! returns JSON text so the page stays framework-free.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use disto::graph::DigraphJson;
use disto::logic::parse_mu;
use disto::mu_compiler::compile_mu_to_aqda;
use disto::sync::{accepted_nodes, classify, sync_run, AutomatonJson, Horizon};
use disto::tiling::{grid_validate, GridVerdict};
use disto::{Digraph, DistributedAutomaton};

fn parse<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn digraph(text: &str) -> Result<(Digraph, Option<usize>), String> {
    let j: DigraphJson = parse("digraph", text)?;
    Digraph::from_json(&j).map_err(|e| format!("digraph: {e}"))
}

pub fn compile_mu_json(system: &str) -> Result<String, String> {
    let m = parse_mu(system).map_err(|e| e.to_string())?;
    let a = compile_mu_to_aqda(&m).map_err(|e| e.to_string())?;
    Ok(json!({ "automaton": a.to_json(), "class": classify(&a).ok() }).to_string())
}

/// Synchronous run until the configuration repeats, capped at `max_rounds`.
pub fn simulate_json(automaton: &str, graph: &str, max_rounds: usize) -> Result<String, String> {
    let j: AutomatonJson = parse("automaton", automaton)?;
    let a = DistributedAutomaton::from_json(&j).map_err(|e| e.to_string())?;
    let (d, point) = digraph(graph)?;
    let run = sync_run(&a, &d, Horizon::Auto(max_rounds)).map_err(|e| e.to_string())?;
    let rounds: Vec<Vec<&str>> = run.configs.iter().map(|c| c.iter().map(|&q| a.name(q)).collect()).collect();
    let accepted = accepted_nodes(&a, &d).map_err(|e| e.to_string())?;
    let verdict: Value = match point {
        Some(p) if accepted[p] => "accepted".into(),
        Some(_) => "rejected".into(),
        None => Value::Null,
    };
    Ok(json!({ "rounds": rounds, "lasso": run.lasso, "accepted": accepted, "verdict": verdict }).to_string())
}

pub fn grid_check_json(graph: &str) -> Result<String, String> {
    let (d, _) = digraph(graph)?;
    Ok(match grid_validate(&d).map_err(|e| e.to_string())? {
        GridVerdict::Grid { height, width, .. } => json!({ "grid": true, "height": height, "width": width }),
        GridVerdict::Failed(c) => json!({ "grid": false, "failed": c }),
    }
    .to_string())
}

#[wasm_bindgen]
pub fn compile_mu(system: &str) -> Result<String, JsValue> {
    compile_mu_json(system).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(automaton: &str, graph: &str, max_rounds: usize) -> Result<String, JsValue> {
    simulate_json(automaton, graph, max_rounds).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn grid_check(graph: &str) -> Result<String, JsValue> {
    grid_check_json(graph).map_err(|e| JsValue::from_str(&e))
}
