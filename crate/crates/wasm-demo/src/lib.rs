//! Browser bindings: DAG text in, JSON out.
//!
//! Each export has a plain Rust twin returning `wcde::Result<String>` so the
//! logic can be tested natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use wcde::adjustment::{check_vas, enumerate_vas, QuerySpec};
use wcde::graph::{Dag, VertexSet};
use wcde::io::parse_dag;
use wcde::separation::{first_open_path, is_d_separated};
use wcde::taxonomy::{mediator_sets, oset, partition};

fn names(s: &str) -> Vec<&str> {
    s.split([',', ' '])
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .collect()
}

fn set(g: &Dag, s: &str) -> wcde::Result<VertexSet> {
    g.set(&names(s))
}

fn graph_query(dag: &str, exposure: &str, outcome: &str) -> wcde::Result<(Dag, QuerySpec)> {
    let g = parse_dag(dag)?;
    let q = QuerySpec::by_name(&g, exposure.trim(), outcome.trim())?;
    Ok((g, q))
}

/// Mediators, partition labels, the O-set and every valid adjustment set.
pub fn analyze_json(dag: &str, exposure: &str, outcome: &str) -> wcde::Result<String> {
    let (g, q) = graph_query(dag, exposure, outcome)?;
    let med = mediator_sets(&g, &q)?;
    let o = oset(&g, &q)?;
    let labels: serde_json::Map<String, Value> = partition(&g, &q)?
        .into_iter()
        .map(|(v, l)| (g.name(v).to_string(), json!(l.to_string())))
        .collect();
    let sets: Vec<Value> = enumerate_vas(&g, &q, None)?
        .iter()
        .map(|a| {
            json!({
                "adjustment": a.names(&g),
                "z1": g.set_names(&a.z1),
                "z2": g.set_names(&a.z2),
                "optimal": a.z == o.set,
            })
        })
        .collect();
    let v = json!({
        "mediators": g.set_names(&med.m),
        "mediator_parents": g.set_names(&med.m_prime),
        "oset": g.set_names(&o.set),
        "degenerate": o.degenerate,
        "partition": labels,
        "valid_sets": sets,
    });
    Ok(serde_json::to_string_pretty(&v).expect("json values serialize"))
}

/// The four-criterion report for one candidate set.
pub fn check_json(dag: &str, exposure: &str, outcome: &str, adjust: &str) -> wcde::Result<String> {
    let (g, q) = graph_query(dag, exposure, outcome)?;
    let report = check_vas(&g, &q, &set(&g, adjust)?)?;
    Ok(serde_json::to_string_pretty(&report.to_json(&g)).expect("json values serialize"))
}

/// Whether `x` and `y` are d-separated given `given`, with an open path when
/// they are not.
pub fn dsep_json(dag: &str, x: &str, y: &str, given: &str) -> wcde::Result<String> {
    let g = parse_dag(dag)?;
    let (xs, ys, zs) = (set(&g, x)?, set(&g, y)?, set(&g, given)?);
    let separated = is_d_separated(&g, &xs, &ys, &zs)?;
    let path = if separated {
        None
    } else {
        first_open_path(&g, &xs, &ys, &zs)?.map(|p| p.render(&g))
    };
    Ok(json!({ "separated": separated, "path": path }).to_string())
}

/// The example graphs as DAG text, keyed by name.
pub fn presets_json() -> String {
    let v = json!({
        "figure1": wcde::fixtures::figure1_dag().to_string(),
        "figure3": wcde::fixtures::figure3_dag().to_string(),
        "figure4": wcde::fixtures::figure4_dag().to_string(),
    });
    v.to_string()
}

fn js(r: wcde::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn analyze(dag: &str, exposure: &str, outcome: &str) -> Result<String, JsError> {
    js(analyze_json(dag, exposure, outcome))
}

#[wasm_bindgen]
pub fn check(dag: &str, exposure: &str, outcome: &str, adjust: &str) -> Result<String, JsError> {
    js(check_json(dag, exposure, outcome, adjust))
}

#[wasm_bindgen]
pub fn dsep(dag: &str, x: &str, y: &str, given: &str) -> Result<String, JsError> {
    js(dsep_json(dag, x, y, given))
}

#[wasm_bindgen]
pub fn presets() -> String {
    presets_json()
}
