use rand::Rng;
use rand_distr::StandardNormal;

use crate::adjustment::QuerySpec;
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, VertexSet};
use crate::taxonomy::mediator_sets;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearNode {
    pub name: String,
    pub parents: Vec<String>,
    pub coeffs: Vec<f64>,
    pub intercept: f64,
    pub noise_sd: f64,
    /// Node is the indicator that its linear latent is positive.
    pub binary: bool,
}

impl LinearNode {
    pub fn new(name: &str, parents: &[(&str, f64)], intercept: f64, noise_sd: f64) -> Self {
        Self {
            name: name.to_string(),
            parents: parents.iter().map(|(p, _)| p.to_string()).collect(),
            coeffs: parents.iter().map(|(_, c)| *c).collect(),
            intercept,
            noise_sd,
            binary: false,
        }
    }

    pub fn binary(mut self) -> Self {
        self.binary = true;
        self
    }
}

/// Exposure × mediator product term in the outcome equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction {
    pub exposure: NodeId,
    pub mediator: NodeId,
    pub gamma: f64,
}

/// Linear structural equations with Gaussian noise, optional thresholded
/// binary nodes, and exposure × mediator interactions in the outcome
/// equation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScm {
    dag: Dag,
    parent_order: Vec<Vec<NodeId>>,
    coeffs: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
    noise_sd: Vec<f64>,
    binary: Vec<bool>,
    /// Node whose equation carries the interaction terms.
    outcome: Option<NodeId>,
    interactions: Vec<Interaction>,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

impl LinearScm {
    /// `interactions` are `(exposure, mediator, gamma)` by name; they enter the
    /// equation of `outcome`, which is required when any are given.
    pub fn new(
        nodes: Vec<LinearNode>,
        outcome: Option<&str>,
        interactions: &[(&str, &str, f64)],
    ) -> Result<Self> {
        let names: Vec<&str> = nodes.iter().map(|n| n.name.as_str()).collect();
        let edges: Vec<(&str, &str)> = nodes
            .iter()
            .flat_map(|n| n.parents.iter().map(move |p| (p.as_str(), n.name.as_str())))
            .collect();
        let dag = Dag::build(&names, &edges)?;
        let mut parent_order = Vec::new();
        for n in &nodes {
            if n.coeffs.len() != n.parents.len() {
                return Err(Error::InvalidModel(format!(
                    "{}: {} coefficients for {} parents",
                    n.name,
                    n.coeffs.len(),
                    n.parents.len()
                )));
            }
            if !n.noise_sd.is_finite() || n.noise_sd <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "{}: noise_sd must be positive",
                    n.name
                )));
            }
            if !n.intercept.is_finite() || n.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "{}: non-finite coefficient",
                    n.name
                )));
            }
            parent_order.push(
                n.parents
                    .iter()
                    .map(|p| dag.id(p))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let outcome = outcome.map(|o| dag.id(o)).transpose()?;
        let mut inter = Vec::new();
        for &(e, m, gamma) in interactions {
            let y = outcome.ok_or_else(|| {
                Error::InvalidModel("interactions require an outcome node".into())
            })?;
            let (e, m) = (dag.id(e)?, dag.id(m)?);
            let pa = dag.parent_ids(y);
            if !pa.contains(&e) || !pa.contains(&m) || e == m {
                return Err(Error::InvalidModel(format!(
                    "interaction {}×{} must use two distinct parents of {}",
                    dag.name(e),
                    dag.name(m),
                    dag.name(y)
                )));
            }
            if !gamma.is_finite() {
                return Err(Error::InvalidModel(
                    "non-finite interaction coefficient".into(),
                ));
            }
            inter.push(Interaction {
                exposure: e,
                mediator: m,
                gamma,
            });
        }
        Ok(Self {
            dag,
            parent_order,
            coeffs: nodes.iter().map(|n| n.coeffs.clone()).collect(),
            intercepts: nodes.iter().map(|n| n.intercept).collect(),
            noise_sd: nodes.iter().map(|n| n.noise_sd).collect(),
            binary: nodes.iter().map(|n| n.binary).collect(),
            outcome,
            interactions: inter,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn interaction_outcome(&self) -> Option<NodeId> {
        self.outcome
    }

    pub fn is_binary(&self, v: NodeId) -> bool {
        self.binary[v.0]
    }

    pub fn intercept(&self, v: NodeId) -> f64 {
        self.intercepts[v.0]
    }

    pub fn noise_sd(&self, v: NodeId) -> f64 {
        self.noise_sd[v.0]
    }

    /// Coefficient on edge `from -> to`, zero if there is no such edge.
    pub fn coeff(&self, from: NodeId, to: NodeId) -> f64 {
        self.parent_order[to.0]
            .iter()
            .position(|&p| p == from)
            .map_or(0.0, |i| self.coeffs[to.0][i])
    }

    pub fn to_nodes(&self) -> Vec<LinearNode> {
        self.dag
            .nodes()
            .map(|v| LinearNode {
                name: self.dag.name(v).to_string(),
                parents: self.parent_order[v.0]
                    .iter()
                    .map(|&p| self.dag.name(p).to_string())
                    .collect(),
                coeffs: self.coeffs[v.0].clone(),
                intercept: self.intercepts[v.0],
                noise_sd: self.noise_sd[v.0],
                binary: self.binary[v.0],
            })
            .collect()
    }

    fn interactions_on(&self, v: NodeId) -> impl Iterator<Item = &Interaction> {
        let on = self.outcome == Some(v);
        self.interactions.iter().filter(move |_| on)
    }

    fn structural_value(&self, v: NodeId, values: &[f64], noise: f64) -> f64 {
        let mut x = self.intercepts[v.0]
            + dot(
                &self.coeffs[v.0],
                &self.parent_order[v.0]
                    .iter()
                    .map(|p| values[p.0])
                    .collect::<Vec<_>>(),
            )
            + self.noise_sd[v.0] * noise;
        for t in self.interactions_on(v) {
            x += t.gamma * values[t.exposure.0] * values[t.mediator.0];
        }
        if self.binary[v.0] {
            f64::from(u8::from(x > 0.0))
        } else {
            x
        }
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R, fixed: &[Option<f64>], out: &mut [f64]) {
        for &v in self.dag.topological_order() {
            // one draw per node even when fixed keeps streams aligned across
            // interventions
            let e: f64 = rng.sample(StandardNormal);
            out[v.0] = match fixed[v.0] {
                Some(x) => x,
                None => self.structural_value(v, out, e),
            };
        }
    }

    /// Means of `targets` and their ancestors under the intervention `fixed`.
    /// Alongside each mean we track, where the node is an affine function of
    /// the Gaussian noises, its loadings on them.
    fn moments(&self, fixed: &[Option<f64>], targets: &VertexSet) -> Result<Vec<f64>> {
        let n = self.dag.len();
        let needed = self.dag.ancestral_closure(targets);
        let mut mean = vec![0.0; n];
        let mut load: Vec<Option<Vec<f64>>> = vec![None; n];
        let unsupported = |v: NodeId| {
            Error::UnsupportedClosedForm(format!(
                "{} depends on a product or threshold of non-Gaussian terms",
                self.dag.name(v)
            ))
        };
        for &v in self.dag.topological_order() {
            if !needed.contains(v) {
                continue;
            }
            if let Some(x) = fixed[v.0] {
                mean[v.0] = x;
                load[v.0] = Some(vec![0.0; n]);
                continue;
            }
            let mut m = self.intercepts[v.0];
            let mut l = Some({
                let mut e = vec![0.0; n];
                e[v.0] = self.noise_sd[v.0];
                e
            });
            for (&p, &c) in self.parent_order[v.0].iter().zip(&self.coeffs[v.0]) {
                m += c * mean[p.0];
                l = match (l, &load[p.0]) {
                    (Some(mut acc), Some(lp)) => {
                        acc.iter_mut().zip(lp).for_each(|(a, b)| *a += c * b);
                        Some(acc)
                    }
                    _ => None,
                };
            }
            for t in self.interactions_on(v) {
                let (le, lm) = (&load[t.exposure.0], &load[t.mediator.0]);
                let is_const =
                    |x: &Option<Vec<f64>>| x.as_ref().is_some_and(|x| x.iter().all(|&b| b == 0.0));
                let (k, other) = if is_const(le) {
                    (mean[t.exposure.0], t.mediator)
                } else if is_const(lm) {
                    (mean[t.mediator.0], t.exposure)
                } else {
                    // E[XY] for jointly Gaussian X, Y
                    match (le, lm) {
                        (Some(a), Some(b)) => {
                            m += t.gamma * (mean[t.exposure.0] * mean[t.mediator.0] + dot(a, b));
                            l = None;
                            continue;
                        }
                        _ => return Err(unsupported(v)),
                    }
                };
                m += t.gamma * k * mean[other.0];
                l = match (l, &load[other.0]) {
                    (Some(mut acc), Some(lo)) => {
                        acc.iter_mut()
                            .zip(lo)
                            .for_each(|(a, b)| *a += t.gamma * k * b);
                        Some(acc)
                    }
                    _ => None,
                };
            }
            if self.binary[v.0] {
                let l = l.ok_or_else(|| unsupported(v))?;
                let sd = dot(&l, &l).sqrt();
                mean[v.0] = std_normal_cdf(m / sd);
                load[v.0] = None;
            } else {
                mean[v.0] = m;
                load[v.0] = l;
            }
        }
        Ok(mean)
    }

    /// Observational mean of `v`.
    pub fn mean(&self, v: NodeId) -> Result<f64> {
        self.dag.parents(v)?;
        Ok(self.moments(&vec![None; self.dag.len()], &VertexSet::singleton(v))?[v.0])
    }

    pub fn do_expectation(&self, assign: &[(NodeId, f64)], target: NodeId) -> Result<f64> {
        self.dag.parents(target)?;
        let mut fixed = vec![None; self.dag.len()];
        for &(v, x) in assign {
            self.dag.parents(v)?;
            if v == target {
                return Err(Error::TargetIntervened(self.dag.name(v).to_string()));
            }
            fixed[v.0] = Some(x);
        }
        Ok(self.moments(&fixed, &VertexSet::singleton(target))?[target.0])
    }

    /// Closed form `(β_A + Σ_j γ_j E[M′_j])·(a − a*)`.
    pub fn true_wcde(&self, q: &QuerySpec) -> Result<f64> {
        q.check_in(&self.dag)?;
        let m_prime = mediator_sets(&self.dag, q)?.m_prime;
        if !self.interactions.is_empty() {
            if self.outcome != Some(q.outcome) {
                return Err(Error::InvalidModel(
                    "interactions must enter the outcome equation".into(),
                ));
            }
            for t in &self.interactions {
                if t.exposure != q.exposure || !m_prime.contains(t.mediator) {
                    return Err(Error::InvalidModel(format!(
                        "interaction {}×{} is not exposure × mediating parent",
                        self.dag.name(t.exposure),
                        self.dag.name(t.mediator)
                    )));
                }
            }
        }
        let mut slope = self.coeff(q.exposure, q.outcome);
        for t in &self.interactions {
            slope += t.gamma * self.mean(t.mediator)?;
        }
        Ok(slope * (q.a - q.a_star))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple(gamma: f64) -> LinearScm {
        LinearScm::new(
            vec![
                LinearNode::new("A", &[], 0.2, 1.0).binary(),
                LinearNode::new("M", &[("A", 1.5)], 0.5, 1.0),
                LinearNode::new("Y", &[("A", 2.0), ("M", 0.7)], -1.0, 1.0),
            ],
            Some("Y"),
            &[("A", "M", gamma)],
        )
        .unwrap()
    }

    #[test]
    fn truncation_is_linear() {
        let scm = simple(0.0);
        let g = scm.dag();
        let (a, m, y) = (g.id("A").unwrap(), g.id("M").unwrap(), g.id("Y").unwrap());
        let e = scm.do_expectation(&[(a, 1.0), (m, 3.0)], y).unwrap();
        assert!((e - (2.0 + 0.7 * 3.0 - 1.0)).abs() < 1e-12);
        let scm = simple(0.4);
        let e = scm.do_expectation(&[(a, 1.0), (m, 3.0)], y).unwrap();
        assert!((e - (2.0 + 0.7 * 3.0 + 0.4 * 3.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn binary_mean_is_probit() {
        let scm = simple(0.0);
        let mean_a = scm.mean(scm.dag().id("A").unwrap()).unwrap();
        assert!((mean_a - std_normal_cdf(0.2)).abs() < 1e-15);
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((std_normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn wcde_closed_form() {
        let q = |s: &LinearScm| QuerySpec::by_name(s.dag(), "A", "Y").unwrap();
        let scm = simple(0.0);
        assert!((scm.true_wcde(&q(&scm)).unwrap() - 2.0).abs() < 1e-12);
        let scm = simple(0.4);
        let em = 0.5 + 1.5 * std_normal_cdf(0.2);
        assert!((scm.true_wcde(&q(&scm)).unwrap() - (2.0 + 0.4 * em)).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let err =
            |nodes, out, inter: &[(&str, &str, f64)]| LinearScm::new(nodes, out, inter).is_err();
        assert!(err(vec![LinearNode::new("A", &[], 0.0, 0.0)], None, &[]));
        assert!(err(
            vec![
                LinearNode::new("A", &[], 0.0, 1.0),
                LinearNode::new("Y", &[("A", 1.0)], 0.0, 1.0)
            ],
            None,
            &[("A", "Y", 1.0)]
        ));
        let mut bad = LinearNode::new("Y", &[("A", 1.0)], 0.0, 1.0);
        bad.coeffs.push(2.0);
        assert!(err(
            vec![LinearNode::new("A", &[], 0.0, 1.0), bad],
            None,
            &[]
        ));
    }

    #[test]
    fn interaction_not_on_mediator_is_rejected() {
        let scm = LinearScm::new(
            vec![
                LinearNode::new("C", &[], 0.0, 1.0),
                LinearNode::new("A", &[("C", 1.0)], 0.0, 1.0).binary(),
                LinearNode::new("Y", &[("A", 1.0), ("C", 1.0)], 0.0, 1.0),
            ],
            Some("Y"),
            &[("A", "C", 0.5)],
        )
        .unwrap();
        let q = QuerySpec::by_name(scm.dag(), "A", "Y").unwrap();
        assert!(matches!(scm.true_wcde(&q), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn product_of_gaussians_mean() {
        // Y = X·M with X, M correlated Gaussians through C
        let scm = LinearScm::new(
            vec![
                LinearNode::new("C", &[], 0.0, 1.0),
                LinearNode::new("X", &[("C", 1.0)], 1.0, 1.0),
                LinearNode::new("M", &[("C", 2.0)], 0.0, 1.0),
                LinearNode::new("Y", &[("X", 0.0), ("M", 0.0)], 0.0, 1.0),
            ],
            Some("Y"),
            &[("X", "M", 1.0)],
        )
        .unwrap();
        // E[XM] = E[X]E[M] + Cov(X, M) = 1·0 + 2
        assert!((scm.mean(scm.dag().id("Y").unwrap()).unwrap() - 2.0).abs() < 1e-12);
    }
}
