//! Structural causal models: discrete CPT models with exact inference and
//! linear-Gaussian models with closed-form interventional means.

mod dataset;
mod discrete;
mod linear;

pub use dataset::Dataset;
pub use discrete::{DiscreteNode, DiscreteScm, JointTable, MAX_STATES};
pub use linear::{Interaction, LinearNode, LinearScm};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adjustment::QuerySpec;
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId};
use crate::taxonomy::mediator_sets;

/// Random stream `stream` of base seed `seed`. Streams of one seed never
/// overlap, so replications can be generated in any order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scm {
    Discrete(DiscreteScm),
    Linear(LinearScm),
}

impl From<DiscreteScm> for Scm {
    fn from(s: DiscreteScm) -> Self {
        Scm::Discrete(s)
    }
}

impl From<LinearScm> for Scm {
    fn from(s: LinearScm) -> Self {
        Scm::Linear(s)
    }
}

impl Scm {
    pub fn dag(&self) -> &Dag {
        match self {
            Scm::Discrete(s) => s.dag(),
            Scm::Linear(s) => s.dag(),
        }
    }

    /// One draw with the nodes in `fixed` held at their values. Values are
    /// written at node indices.
    pub fn sample_row(
        &self,
        rng: &mut ChaCha8Rng,
        fixed: &[Option<f64>],
        out: &mut [f64],
    ) -> Result<()> {
        match self {
            Scm::Discrete(s) => s.sample_row(rng, fixed, out),
            Scm::Linear(s) => {
                s.sample_row(rng, fixed, out);
                Ok(())
            }
        }
    }

    /// `n` i.i.d. rows on stream 0 of `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut ds = self.sample_stream(n, seed, 0)?;
        ds.seed = Some(seed);
        Ok(ds)
    }

    /// `n` i.i.d. rows from stream `stream` of `seed`; columns in topological
    /// order.
    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidSampleSize(0));
        }
        let g = self.dag();
        let order = g.topological_order();
        let mut rng = stream_rng(seed, stream);
        let fixed = vec![None; g.len()];
        let mut row = vec![0.0; g.len()];
        let mut cols = vec![Vec::with_capacity(n); g.len()];
        for _ in 0..n {
            self.sample_row(&mut rng, &fixed, &mut row)?;
            for (c, v) in cols.iter_mut().zip(order) {
                c.push(row[v.0]);
            }
        }
        let names = order.iter().map(|&v| g.name(v).to_string()).collect();
        let mut ds = Dataset::new(names, cols)?;
        ds.seed = Some(seed);
        Ok(ds)
    }

    pub fn do_expectation(&self, assign: &[(NodeId, f64)], target: NodeId) -> Result<f64> {
        match self {
            Scm::Discrete(s) => s.do_expectation(assign, target),
            Scm::Linear(s) => s.do_expectation(assign, target),
        }
    }

    pub fn true_wcde(&self, q: &QuerySpec) -> Result<f64> {
        match self {
            Scm::Discrete(s) => s.true_wcde(q),
            Scm::Linear(s) => s.true_wcde(q),
        }
    }

    /// Monte Carlo WCDE by simulating the interventions directly: draw `M′`
    /// observationally, then the outcome under `do(a, m′)` and `do(a*, m′)`
    /// with common random numbers. Returns `(estimate, standard error)`.
    pub fn monte_carlo_wcde(&self, q: &QuerySpec, n: usize, seed: u64) -> Result<(f64, f64)> {
        if n < 2 {
            return Err(Error::InvalidSampleSize(n));
        }
        let g = self.dag();
        q.check_in(g)?;
        let m_prime = mediator_sets(g, q)?.m_prime.to_vec();
        let mut rng = stream_rng(seed, 0);
        let none = vec![None; g.len()];
        let mut row = vec![0.0; g.len()];
        let mut fixed = vec![None; g.len()];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            self.sample_row(&mut rng, &none, &mut row)?;
            for &m in &m_prime {
                fixed[m.0] = Some(row[m.0]);
            }
            let mut twin = rng.clone();
            fixed[q.exposure.0] = Some(q.a);
            self.sample_row(&mut rng, &fixed, &mut row)?;
            let y_a = row[q.outcome.0];
            fixed[q.exposure.0] = Some(q.a_star);
            self.sample_row(&mut twin, &fixed, &mut row)?;
            let d = y_a - row[q.outcome.0];
            sum += d;
            sum_sq += d * d;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = (sum_sq - nf * mean * mean) / (nf - 1.0);
        Ok((mean, (var.max(0.0) / nf).sqrt()))
    }
}
