//! Text formats: DAG edge lists and JSON model specifications.
//!
//! DAG files hold one `PARENT -> CHILD` edge or one isolated `NODE` per line;
//! `#` starts a comment and blank lines are ignored.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adjustment::QuerySpec;
use crate::error::{Error, Result};
use crate::graph::{validate_name, Dag};
use crate::scm::{DiscreteNode, DiscreteScm, LinearNode, LinearScm, Scm};

pub fn parse_dag(text: &str) -> Result<Dag> {
    let mut nodes: Vec<String> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut edge_set: HashSet<(String, String)> = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split("->").map(str::trim).collect();
        for p in &parts {
            validate_name(p).map_err(|_| err(format!("invalid node name {p:?}")))?;
        }
        match parts.as_slice() {
            [_] => {}
            [u, v] => {
                let e = (u.to_string(), v.to_string());
                if !edge_set.insert(e.clone()) {
                    return Err(err(format!("duplicate edge {u} -> {v}")));
                }
                edges.push(e);
            }
            _ => return Err(err("expected `PARENT -> CHILD` or a single node".into())),
        }
        for p in parts {
            if seen.insert(p.to_string()) {
                nodes.push(p.to_string());
            }
        }
    }
    Dag::build(&nodes, &edges)
}

pub fn read_dag_file(path: &Path) -> Result<Dag> {
    parse_dag(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Discrete,
    Linear,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeSpec {
    name: String,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cardinality: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cpt: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intercept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    binary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryFile {
    exposure: String,
    outcome: String,
    #[serde(default = "one")]
    a: f64,
    #[serde(default)]
    a_star: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScmFile {
    #[serde(rename = "type")]
    kind: Kind,
    nodes: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    interactions: Vec<(String, String, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    query: Option<QueryFile>,
}

/// A model together with the query stored alongside it, if any.
#[derive(Debug, Clone)]
pub struct ScmSpec {
    pub scm: Scm,
    pub query: Option<QuerySpec>,
}

fn bad(msg: String) -> Error {
    Error::InvalidModel(msg)
}

pub fn parse_scm(text: &str) -> Result<ScmSpec> {
    let file: ScmFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let scm = match file.kind {
        Kind::Discrete => {
            if !file.interactions.is_empty() {
                return Err(bad("interactions apply to linear models only".into()));
            }
            let nodes = file
                .nodes
                .iter()
                .map(|n| {
                    if n.coeffs.is_some()
                        || n.noise_sd.is_some()
                        || n.intercept.is_some()
                        || n.binary
                    {
                        return Err(bad(format!(
                            "{}: linear fields in a discrete model",
                            n.name
                        )));
                    }
                    Ok(DiscreteNode {
                        name: n.name.clone(),
                        parents: n.parents.clone(),
                        cardinality: n.cardinality.unwrap_or(2),
                        cpt: n
                            .cpt
                            .clone()
                            .ok_or_else(|| bad(format!("{}: missing cpt", n.name)))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Scm::Discrete(DiscreteScm::from_nodes(nodes)?)
        }
        Kind::Linear => {
            let nodes = file
                .nodes
                .iter()
                .map(|n| {
                    if n.cpt.is_some() || n.cardinality.is_some() {
                        return Err(bad(format!(
                            "{}: discrete fields in a linear model",
                            n.name
                        )));
                    }
                    Ok(LinearNode {
                        name: n.name.clone(),
                        parents: n.parents.clone(),
                        coeffs: n
                            .coeffs
                            .clone()
                            .unwrap_or_else(|| vec![0.0; n.parents.len()]),
                        intercept: n.intercept.unwrap_or(0.0),
                        noise_sd: n.noise_sd.unwrap_or(1.0),
                        binary: n.binary,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let outcome = interaction_outcome(&file)?;
            let inter: Vec<(&str, &str, f64)> = file
                .interactions
                .iter()
                .map(|(e, m, g)| (e.as_str(), m.as_str(), *g))
                .collect();
            Scm::Linear(LinearScm::new(nodes, outcome.as_deref(), &inter)?)
        }
    };
    let query = file
        .query
        .map(|q| {
            let g = scm.dag();
            QuerySpec::new(g.id(&q.exposure)?, g.id(&q.outcome)?, q.a, q.a_star)
        })
        .transpose()?;
    Ok(ScmSpec { scm, query })
}

/// The node carrying the interaction terms: the query outcome when given,
/// otherwise the unique common child of every interaction pair.
fn interaction_outcome(file: &ScmFile) -> Result<Option<String>> {
    if file.interactions.is_empty() {
        return Ok(file.query.as_ref().map(|q| q.outcome.clone()));
    }
    if let Some(q) = &file.query {
        return Ok(Some(q.outcome.clone()));
    }
    let candidates: Vec<&NodeSpec> = file
        .nodes
        .iter()
        .filter(|n| {
            file.interactions
                .iter()
                .all(|(e, m, _)| n.parents.contains(e) && n.parents.contains(m))
        })
        .collect();
    match candidates.as_slice() {
        [n] => Ok(Some(n.name.clone())),
        _ => Err(bad(
            "cannot tell which node the interactions enter; add a query".into(),
        )),
    }
}

pub fn read_scm_file(path: &Path) -> Result<ScmSpec> {
    parse_scm(&std::fs::read_to_string(path)?)
}

/// Pretty-printed JSON specification of `scm`, with `query` stored alongside
/// when given.
pub fn scm_to_json(scm: &Scm, query: Option<&QuerySpec>) -> String {
    let g = scm.dag();
    let (kind, nodes, interactions) = match scm {
        Scm::Discrete(s) => (
            Kind::Discrete,
            s.to_nodes()
                .into_iter()
                .map(|n| NodeSpec {
                    name: n.name,
                    parents: n.parents,
                    cardinality: Some(n.cardinality),
                    cpt: Some(n.cpt),
                    coeffs: None,
                    intercept: None,
                    noise_sd: None,
                    binary: false,
                })
                .collect(),
            Vec::new(),
        ),
        Scm::Linear(s) => (
            Kind::Linear,
            s.to_nodes()
                .into_iter()
                .map(|n| NodeSpec {
                    name: n.name,
                    parents: n.parents,
                    cardinality: None,
                    cpt: None,
                    coeffs: Some(n.coeffs),
                    intercept: Some(n.intercept),
                    noise_sd: Some(n.noise_sd),
                    binary: n.binary,
                })
                .collect(),
            s.interactions()
                .iter()
                .map(|t| {
                    (
                        g.name(t.exposure).to_string(),
                        g.name(t.mediator).to_string(),
                        t.gamma,
                    )
                })
                .collect(),
        ),
    };
    let file = ScmFile {
        kind,
        nodes,
        interactions,
        query: query.map(|q| QueryFile {
            exposure: g.name(q.exposure).to_string(),
            outcome: g.name(q.outcome).to_string(),
            a: q.a,
            a_star: q.a_star,
        }),
    };
    serde_json::to_string_pretty(&file).expect("model specs serialize")
}
