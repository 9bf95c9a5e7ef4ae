//! Mediator sets, the eight-way causal partition relative to an
//! exposure/outcome pair, and the optimal adjustment set (O-set).

use std::fmt;

use serde::Serialize;

use crate::adjustment::{check_vas, QuerySpec};
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, VertexSet};
use crate::separation::is_d_separated;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediatorSets {
    /// `De(A) ∩ An(Y) ∖ {A, Y}`
    pub m: VertexSet,
    /// Mediators that are parents of the outcome.
    pub m_prime: VertexSet,
}

pub fn mediator_sets(g: &Dag, q: &QuerySpec) -> Result<MediatorSets> {
    if q.exposure == q.outcome {
        return Err(Error::SameEndpoints);
    }
    let m = g
        .descendants(q.exposure)?
        .intersection(&g.ancestors(q.outcome)?)
        .without(q.exposure)
        .without(q.outcome);
    let m_prime = m.intersection(&g.parents(q.outcome)?);
    Ok(MediatorSets { m, m_prime })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PartitionLabel {
    /// Confounders and their proxies.
    X1,
    /// Colliders and their proxies (residual class).
    X2,
    /// Mediators.
    X3,
    /// Non-descendants of Y independent of A but dependent on A given Y.
    X4,
    /// Instruments and their proxies.
    X5,
    /// Descendants of Y.
    X6,
    /// Descendants of A that are not ancestors of Y.
    X7,
    /// No active path to A or Y.
    X8,
}

impl fmt::Display for PartitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Assigns `w` to its partition by d-separation signatures. For parents of
/// the outcome the labels X1, X3 and X4 are exact; for other vertices the
/// label is informational.
pub fn classify(g: &Dag, q: &QuerySpec, w: NodeId) -> Result<PartitionLabel> {
    q.check_in(g)?;
    g.parents(w)?;
    if w == q.exposure || w == q.outcome {
        return Err(Error::IsEndpoint(g.name(w).to_string()));
    }
    let (a, y) = (q.exposure, q.outcome);
    let de_a = g.descendants(a)?;
    let de_y = g.descendants(y)?;
    if mediator_sets(g, q)?.m.contains(w) {
        return Ok(PartitionLabel::X3);
    }
    if de_y.contains(w) {
        return Ok(PartitionLabel::X6);
    }
    if de_a.contains(w) {
        return Ok(PartitionLabel::X7);
    }
    let ws = VertexSet::singleton(w);
    let sa = VertexSet::singleton(a);
    let sy = VertexSet::singleton(y);
    let empty = VertexSet::new();
    let sep_a = is_d_separated(g, &ws, &sa, &empty)?;
    let sep_y = is_d_separated(g, &ws, &sy, &empty)?;
    if sep_a && sep_y {
        return Ok(PartitionLabel::X8);
    }
    if !sep_a {
        let sep_y_given_a = is_d_separated(g, &ws, &sy, &sa)?;
        return Ok(if sep_y_given_a {
            PartitionLabel::X5
        } else {
            PartitionLabel::X1
        });
    }
    if !is_d_separated(g, &ws, &sa, &sy)? {
        return Ok(PartitionLabel::X4);
    }
    Ok(PartitionLabel::X2)
}

/// Labels for every vertex other than the exposure and outcome.
pub fn partition(g: &Dag, q: &QuerySpec) -> Result<Vec<(NodeId, PartitionLabel)>> {
    g.nodes()
        .filter(|&v| v != q.exposure && v != q.outcome)
        .map(|v| Ok((v, classify(g, q, v)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OSet {
    pub set: VertexSet,
    /// Set when the exposure is not an ancestor of the outcome; the effect
    /// is then identically zero.
    pub degenerate: bool,
}

/// Optimal adjustment set: parents of the outcome in partitions X1, X3, X4.
///
/// Computed twice (partition union and `Pa(Y) ∖ {A}`); the two must agree and
/// the result must pass the validity check, otherwise an internal error is
/// returned.
pub fn oset(g: &Dag, q: &QuerySpec) -> Result<OSet> {
    q.check_in(g)?;
    let pa_y = g.parents(q.outcome)?;
    let direct = pa_y.without(q.exposure);
    if !g.ancestors(q.outcome)?.contains(q.exposure) {
        return Ok(OSet {
            set: direct,
            degenerate: true,
        });
    }
    let mut by_partition = VertexSet::new();
    for p in pa_y.iter().filter(|&p| p != q.exposure) {
        if matches!(
            classify(g, q, p)?,
            PartitionLabel::X1 | PartitionLabel::X3 | PartitionLabel::X4
        ) {
            by_partition.insert(p);
        }
    }
    if by_partition != direct {
        return Err(Error::Internal(format!(
            "partition O-set {} differs from Pa(Y)\\{{A}} = {}",
            g.fmt_set(&by_partition),
            g.fmt_set(&direct)
        )));
    }
    if !check_vas(g, q, &direct)?.valid {
        return Err(Error::Internal(format!(
            "O-set {} fails the validity check",
            g.fmt_set(&direct)
        )));
    }
    Ok(OSet {
        set: direct,
        degenerate: false,
    })
}
