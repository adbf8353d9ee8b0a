//! Browser bindings. Each export takes plain strings and numbers and returns
//! a JSON document, so the page needs no glue beyond `JSON.parse`.

use chorepick::entitle::{build_order, PipelineOptions};
use chorepick::rational::{self, Rational};
use chorepick::ridge::{covering_test_with, fixed_order, ridge_periods, CoveringOptions, Mode};
use chorepick::simulate::evaluate_order;
use chorepick::PeriodicOrder;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

// The page runs on the main thread.
const MAX_ROUNDS: usize = 2000;
const MAX_AGENTS: usize = 4096;

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rat_list(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| rational::parse(s).map_err(fail))
        .collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub fn ratio_test_report(n: usize, rho: &str, mode: &str) -> Result<Value, String> {
    if n > MAX_AGENTS {
        return Err(format!("at most {MAX_AGENTS} agents in the browser"));
    }
    let mode = match mode {
        "agent" => Mode::Agent,
        "super" => Mode::Super,
        other => return Err(format!("unknown mode {other:?}")),
    };
    let rho = rational::parse(rho).map_err(fail)?;
    let sched = ridge_periods(n, &rho, mode).map_err(fail)?;
    let opts = CoveringOptions {
        fallback_horizon: Some(200),
        ..Default::default()
    };
    let verdict = covering_test_with(&sched, opts).map_err(fail)?;
    let mut report = to_value(&verdict);
    if let Some(obj) = report.as_object_mut() {
        obj.remove("ratio_exact");
    }
    report["n"] = json!(n);
    report["rho"] = json!(rho.to_string());
    Ok(report)
}

pub fn evaluate_report(order: &str, m: usize) -> Result<Value, String> {
    if m > MAX_ROUNDS {
        return Err(format!("at most {MAX_ROUNDS} rounds in the browser"));
    }
    let order = order.trim();
    let periodic = match fixed_order(order) {
        Ok(o) => o,
        Err(_) => PeriodicOrder::parse(order).map_err(fail)?,
    };
    let n = periodic.agents();
    let expanded = periodic.expand(m).map_err(fail)?;
    let eval = evaluate_order(&expanded, n, m).map_err(fail)?;
    let mut report = to_value(&eval);
    report["order"] = json!(expanded.to_string());
    report["n"] = json!(n);
    Ok(report)
}

pub fn build_report(entitlements: &str, m: usize) -> Result<Value, String> {
    if m > MAX_ROUNDS {
        return Err(format!("at most {MAX_ROUNDS} rounds in the browser"));
    }
    let b = rat_list(entitlements)?;
    let opts = PipelineOptions::default();
    let (_, order) = build_order(&b, m, &opts).map_err(fail)?;
    Ok(json!({
        "order": order.to_string(),
        "sequence": order.to_sequence().to_string(),
        "guarantee": opts.scaling.guarantee().to_string(),
    }))
}

fn respond(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = ratioTest)]
pub fn ratio_test(n: usize, rho: &str, mode: &str) -> Result<String, JsValue> {
    respond(ratio_test_report(n, rho, mode))
}

#[wasm_bindgen(js_name = evaluateOrder)]
pub fn evaluate(order: &str, m: usize) -> Result<String, JsValue> {
    respond(evaluate_report(order, m))
}

#[wasm_bindgen(js_name = buildOrder)]
pub fn build(entitlements: &str, m: usize) -> Result<String, JsValue> {
    respond(build_report(entitlements, m))
}
