//! Example graphs and models used by tests, the CLI demo files and the
//! Monte Carlo experiments.
//!
//! Binary CPT entries come from `sigmoid(b0 + Σ b·parents)` rounded to four
//! decimals; the adversarial table was found by `examples/find_adversarial.rs`.

use crate::graph::Dag;
use crate::scm::{DiscreteNode, DiscreteScm, LinearNode, LinearScm};

const FIGURE1_EDGES: [(&str, &str); 8] = [
    ("A", "B1"),
    ("A", "Y"),
    ("B1", "G1"),
    ("G1", "Y"),
    ("G2", "A"),
    ("G2", "B1"),
    ("G2", "G1"),
    ("G2", "Y"),
];

/// `A -> B1 -> G1 -> Y`, `A -> Y`, with `G2` a parent of `A`, `B1`, `G1`, `Y`.
pub fn figure1_dag() -> Dag {
    Dag::build(&["A", "B1", "G1", "G2", "Y"], &FIGURE1_EDGES).expect("fixture")
}

/// `B2` confounds `A`, `G1` and `G2`; `G1` mediates.
pub fn figure3_dag() -> Dag {
    Dag::build(
        &["A", "B2", "G1", "G2", "Y"],
        &[
            ("A", "G1"),
            ("A", "Y"),
            ("B2", "A"),
            ("B2", "G1"),
            ("B2", "G2"),
            ("G1", "Y"),
            ("G2", "Y"),
        ],
    )
    .expect("fixture")
}

/// Figure 1 without the `G2 -> G1` edge.
pub fn figure4_dag() -> Dag {
    Dag::build(
        &["A", "B1", "G1", "G2", "Y"],
        &[
            ("A", "B1"),
            ("A", "Y"),
            ("B1", "G1"),
            ("G1", "Y"),
            ("G2", "A"),
            ("G2", "B1"),
            ("G2", "Y"),
        ],
    )
    .expect("fixture")
}

fn build(nodes: Vec<DiscreteNode>) -> DiscreteScm {
    DiscreteScm::from_nodes(nodes).expect("fixture")
}

const FIG14_Y: [f64; 8] = [0.1824, 0.5, 0.6225, 0.8808, 0.3775, 0.7311, 0.8176, 0.9526];

pub fn figure1_scm() -> DiscreteScm {
    figure1_with_g1(&[0.2315, 0.4502, 0.69, 0.8581])
}

fn figure1_with_g1(g1: &[f64]) -> DiscreteScm {
    build(vec![
        DiscreteNode::binary("A", &["G2"], &[0.3775, 0.7311]),
        DiscreteNode::binary("B1", &["A", "G2"], &[0.2689, 0.5, 0.6225, 0.8176]),
        DiscreteNode::binary("G1", &["B1", "G2"], g1),
        DiscreteNode::binary("G2", &[], &[0.5]),
        DiscreteNode::binary("Y", &["A", "G1", "G2"], &FIG14_Y),
    ])
}

/// Figure 1 model in which `G1` ignores `G2`: the graph still says
/// `{B1, G2}` is invalid, but the distribution makes it unbiased.
pub fn figure1_unfaithful_scm() -> DiscreteScm {
    figure1_with_g1(&[0.2315, 0.2315, 0.69, 0.69])
}

/// Figure 1 model where adjusting for `{B1, G2}` is visibly biased.
pub fn figure1_adversarial_scm() -> DiscreteScm {
    build(vec![
        DiscreteNode::binary("A", &["G2"], &ADVERSARIAL[0..2]),
        DiscreteNode::binary("B1", &["A", "G2"], &ADVERSARIAL[2..6]),
        DiscreteNode::binary("G1", &["B1", "G2"], &ADVERSARIAL[6..10]),
        DiscreteNode::binary("G2", &[], &ADVERSARIAL[10..11]),
        DiscreteNode::binary("Y", &["A", "G1", "G2"], &ADVERSARIAL[11..19]),
    ])
}

/// `A|G2`, `B1|A,G2`, `G1|B1,G2`, `G2`, `Y|A,G1,G2`, from
/// `find_adversarial 20000 2024`.
const ADVERSARIAL: [f64; 19] = [
    0.87, 0.34, 0.65, 0.45, 0.56, 0.6, 0.26, 0.85, 0.11, 0.78, 0.53, 0.14, 0.63, 0.71, 0.2, 0.64,
    0.72, 0.13, 0.8,
];

pub fn figure3_scm() -> DiscreteScm {
    build(vec![
        DiscreteNode::binary("A", &["B2"], &[0.3775, 0.7311]),
        DiscreteNode::binary("B2", &[], &[0.5]),
        DiscreteNode::binary("G1", &["A", "B2"], &[0.2689, 0.5, 0.6225, 0.8176]),
        DiscreteNode::binary("G2", &["B2"], &[0.2689, 0.7311]),
        DiscreteNode::binary(
            "Y",
            &["A", "G1", "G2"],
            &[
                0.1824, 0.6225, 0.3775, 0.8176, 0.3775, 0.8176, 0.6225, 0.9241,
            ],
        ),
    ])
}

pub fn figure4_scm() -> DiscreteScm {
    build(vec![
        DiscreteNode::binary("A", &["G2"], &[0.3775, 0.7311]),
        DiscreteNode::binary("B1", &["A", "G2"], &[0.2689, 0.5, 0.6225, 0.8176]),
        DiscreteNode::binary("G1", &["B1"], &[0.2315, 0.69]),
        DiscreteNode::binary("G2", &[], &[0.5]),
        DiscreteNode::binary("Y", &["A", "G1", "G2"], &FIG14_Y),
    ])
}

/// Every discrete fixture with a display name.
pub fn discrete_fixtures() -> Vec<(&'static str, DiscreteScm)> {
    vec![
        ("figure1", figure1_scm()),
        ("figure1-adversarial", figure1_adversarial_scm()),
        ("figure1-unfaithful", figure1_unfaithful_scm()),
        ("figure3", figure3_scm()),
        ("figure4", figure4_scm()),
    ]
}

/// `C -> A -> M -> Y` with `C` a parent of all three, `A -> Y`, and an
/// `A·M` term in `Y`. Binary `A` with `P(A = 1) = 1/2`, `E[M] = 1`, so the
/// weighted direct effect of `A` on `Y` is `1.5 + 0.5·1 = 2`.
pub fn linear_interaction_scm() -> LinearScm {
    linear_with_gamma(0.5)
}

pub(crate) fn linear_with_gamma(gamma: f64) -> LinearScm {
    LinearScm::new(
        vec![
            LinearNode::new("C", &[], 0.0, 1.0),
            LinearNode::new("A", &[("C", 0.8)], 0.0, 1.0).binary(),
            LinearNode::new("M", &[("A", 1.0), ("C", 0.6)], 0.5, 1.0),
            LinearNode::new("Y", &[("A", 1.5), ("M", 0.8), ("C", 0.7)], 1.0, 1.0),
        ],
        Some("Y"),
        &[("A", "M", gamma)],
    )
    .expect("fixture")
}
