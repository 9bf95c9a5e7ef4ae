//! Seeded random DAGs and binary discrete models.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::adjustment::QuerySpec;
use crate::graph::{Dag, NodeId};
use crate::scm::{DiscreteNode, DiscreteScm};

/// Random DAG on `n` nodes named `V0..`, each forward pair joined with
/// probability `p`. Node indices are shuffled against the causal order.
pub fn random_dag<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let names: Vec<String> = (0..n).map(|i| format!("V{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((names[order[i]].clone(), names[order[j]].clone()));
            }
        }
    }
    Dag::build(&names, &edges).expect("forward edges are acyclic")
}

/// Uniformly chosen exposure/outcome pair with the exposure a strict
/// ancestor of the outcome, or `None` if the graph has no edges.
pub fn random_query<R: Rng + ?Sized>(rng: &mut R, g: &Dag) -> Option<QuerySpec> {
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for y in g.nodes() {
        for a in g.ancestors(y).ok()?.iter() {
            pairs.push((a, y));
        }
    }
    let &(a, y) = pairs.choose(rng)?;
    QuerySpec::new(a, y, 1.0, 0.0).ok()
}

/// Binary model on `g` with every `P(v = 1 | parents)` uniform on `[lo, hi]`.
pub fn random_binary_scm<R: Rng + ?Sized>(rng: &mut R, g: &Dag, lo: f64, hi: f64) -> DiscreteScm {
    let nodes = g
        .nodes()
        .map(|v| {
            let parents: Vec<&str> = g.parent_ids(v).iter().map(|&p| g.name(p)).collect();
            let rows: Vec<f64> = (0..1usize << parents.len())
                .map(|_| rng.gen_range(lo..=hi))
                .collect();
            DiscreteNode::binary(g.name(v), &parents, &rows)
        })
        .collect();
    DiscreteScm::from_nodes(nodes).expect("valid by construction")
}
