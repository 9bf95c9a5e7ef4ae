//! Weighted controlled direct effects on causal DAGs: valid adjustment sets,
//! the optimal adjustment set, exact population functionals, influence
//! function estimators and a Monte Carlo harness for comparing their
//! variances.

pub mod adjustment;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod io;
pub mod scm;
pub mod separation;
pub mod taxonomy;

pub use adjustment::{
    check_vas, enumerate_vas, split_adjustment, AdjustmentSet, QuerySpec, VasReport, Witness,
};
pub use error::{Error, Result};
pub use graph::{Dag, NodeId, VertexSet};
pub use scm::{Dataset, DiscreteScm, LinearScm, Scm};
pub use separation::is_d_separated;
pub use taxonomy::{mediator_sets, oset, OSet};
