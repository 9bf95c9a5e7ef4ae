use std::collections::BTreeMap;

use rand::Rng;

use crate::adjustment::{AdjustmentSet, QuerySpec};
use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, VertexSet};
use crate::taxonomy::mediator_sets;

use super::Dataset;

/// Largest number of joint configurations enumerated exactly.
pub const MAX_STATES: u128 = 1 << 20;

/// `(z1 states, z2 states, arm)`
type CellKey = (Vec<usize>, Vec<usize>, usize);

const ROW_TOL: f64 = 1e-12;

/// Node specification used to assemble a [`DiscreteScm`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteNode {
    pub name: String,
    pub parents: Vec<String>,
    pub cardinality: usize,
    /// One row per parent configuration; the last parent varies fastest.
    pub cpt: Vec<Vec<f64>>,
}

impl DiscreteNode {
    /// Binary node given `P(v = 1 | parents)` per parent configuration.
    pub fn binary(name: &str, parents: &[&str], p_one: &[f64]) -> Self {
        Self {
            name: name.to_string(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            cardinality: 2,
            // rounding keeps complements of short decimals short (0.2689, not
            // 0.26890000000000003) without moving the row sum off 1
            cpt: p_one
                .iter()
                .map(|&p| vec![((1.0 - p) * 1e12).round() / 1e12, p])
                .collect(),
        }
    }
}

/// Discrete structural causal model given by conditional probability tables.
/// States are `0..cardinality` and a state's numeric value is its index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteScm {
    dag: Dag,
    cards: Vec<usize>,
    parent_order: Vec<Vec<NodeId>>,
    cpts: Vec<Vec<Vec<f64>>>,
}

impl DiscreteScm {
    pub fn from_nodes(nodes: Vec<DiscreteNode>) -> Result<Self> {
        let names: Vec<&str> = nodes.iter().map(|n| n.name.as_str()).collect();
        let edges: Vec<(&str, &str)> = nodes
            .iter()
            .flat_map(|n| n.parents.iter().map(move |p| (p.as_str(), n.name.as_str())))
            .collect();
        let dag = Dag::build(&names, &edges)?;
        let mut cards = Vec::new();
        let mut cpts = Vec::new();
        for n in &nodes {
            if n.cardinality < 2 {
                return Err(Error::InvalidModel(format!(
                    "{}: cardinality must be at least 2",
                    n.name
                )));
            }
            cards.push(n.cardinality);
            cpts.push(n.cpt.clone());
        }
        let parent_order: Vec<Vec<NodeId>> = nodes
            .iter()
            .map(|n| n.parents.iter().map(|p| dag.id(p)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let scm = Self {
            dag,
            cards,
            parent_order,
            cpts,
        };
        scm.validate()?;
        Ok(scm)
    }

    fn validate(&self) -> Result<()> {
        for v in self.dag.nodes() {
            let name = self.dag.name(v);
            let rows: usize = self.parent_order[v.0]
                .iter()
                .map(|p| self.cards[p.0])
                .product();
            let cpt = &self.cpts[v.0];
            if cpt.len() != rows {
                return Err(Error::InvalidModel(format!(
                    "{name}: expected {rows} CPT rows, found {}",
                    cpt.len()
                )));
            }
            for (r, row) in cpt.iter().enumerate() {
                if row.len() != self.cards[v.0] {
                    return Err(Error::InvalidModel(format!(
                        "{name}: row {r} has {} entries, expected {}",
                        row.len(),
                        self.cards[v.0]
                    )));
                }
                if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "{name}: row {r} has a negative entry"
                    )));
                }
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > ROW_TOL {
                    return Err(Error::InvalidModel(format!("{name}: row {r} sums to {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cardinality(&self, v: NodeId) -> usize {
        self.cards[v.0]
    }

    pub fn parent_order(&self, v: NodeId) -> &[NodeId] {
        &self.parent_order[v.0]
    }

    pub fn cpt(&self, v: NodeId) -> &[Vec<f64>] {
        &self.cpts[v.0]
    }

    /// Returns the node specifications this model was built from.
    pub fn to_nodes(&self) -> Vec<DiscreteNode> {
        self.dag
            .nodes()
            .map(|v| DiscreteNode {
                name: self.dag.name(v).to_string(),
                parents: self.parent_order[v.0]
                    .iter()
                    .map(|&p| self.dag.name(p).to_string())
                    .collect(),
                cardinality: self.cards[v.0],
                cpt: self.cpts[v.0].clone(),
            })
            .collect()
    }

    fn row_index(&self, v: NodeId, states: &[usize]) -> usize {
        self.parent_order[v.0]
            .iter()
            .fold(0, |acc, &p| acc * self.cards[p.0] + states[p.0])
    }

    /// `P(v = states[v] | parents)` read from the full state vector.
    pub fn factor(&self, v: NodeId, states: &[usize]) -> f64 {
        self.cpts[v.0][self.row_index(v, states)][states[v.0]]
    }

    fn state_of(&self, v: NodeId, value: f64) -> Result<usize> {
        let k = self.cards[v.0];
        if value.fract() == 0.0 && value >= 0.0 && (value as usize) < k {
            Ok(value as usize)
        } else {
            Err(Error::InvalidModel(format!(
                "{} has no state {value}",
                self.dag.name(v)
            )))
        }
    }

    /// Draws one row by ancestral sampling; entries of `fixed` that are `Some`
    /// are held at the given value.
    pub fn sample_row<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        fixed: &[Option<f64>],
        out: &mut [f64],
    ) -> Result<()> {
        let mut states = vec![0usize; self.dag.len()];
        for &v in self.dag.topological_order() {
            let s = match fixed[v.0] {
                Some(x) => self.state_of(v, x)?,
                None => {
                    let row = &self.cpts[v.0][self.row_index(v, &states)];
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut pick = row.len() - 1;
                    for (i, p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    pick
                }
            };
            states[v.0] = s;
            out[v.0] = s as f64;
        }
        Ok(())
    }

    /// Exact joint distribution over all nodes.
    pub fn joint_distribution(&self) -> Result<JointTable> {
        let all: Vec<NodeId> = self.dag.nodes().collect();
        let total = state_count(&all.iter().map(|v| self.cards[v.0]).collect::<Vec<_>>());
        if total > MAX_STATES {
            return Err(Error::StateSpaceTooLarge(total));
        }
        let cards = self.cards.clone();
        let mut probs = Vec::with_capacity(total as usize);
        for_each_config(&cards, |states| {
            probs.push(self.dag.nodes().map(|v| self.factor(v, states)).product());
        });
        Ok(JointTable { cards, probs })
    }

    /// Every configuration with positive probability as a dataset row,
    /// paired with its probability. Columns follow node order.
    pub fn joint_dataset(&self) -> Result<(Dataset, Vec<f64>)> {
        let joint = self.joint_distribution()?;
        let mut cols = vec![Vec::new(); self.dag.len()];
        let mut weights = Vec::new();
        for (states, p) in joint.iter().filter(|(_, p)| *p > 0.0) {
            for (c, s) in cols.iter_mut().zip(&states) {
                c.push(*s as f64);
            }
            weights.push(p);
        }
        let ds = Dataset::new(self.dag.names().to_vec(), cols)?;
        Ok((ds, weights))
    }

    /// Sums `f(states) · Π factors` over the free nodes of `closure`, with
    /// intervened nodes held fixed and their factors removed.
    fn sum_truncated(
        &self,
        closure: &VertexSet,
        fixed: &[Option<usize>],
        mut f: impl FnMut(&[usize], f64),
    ) -> Result<()> {
        let free: Vec<NodeId> = closure.iter().filter(|v| fixed[v.0].is_none()).collect();
        let free_cards: Vec<usize> = free.iter().map(|v| self.cards[v.0]).collect();
        let total = state_count(&free_cards);
        if total > MAX_STATES {
            return Err(Error::StateSpaceTooLarge(total));
        }
        let mut states = vec![0usize; self.dag.len()];
        for v in self.dag.nodes() {
            if let Some(s) = fixed[v.0] {
                states[v.0] = s;
            }
        }
        for_each_config(&free_cards, |cfg| {
            for (v, &s) in free.iter().zip(cfg) {
                states[v.0] = s;
            }
            let w: f64 = free.iter().map(|&v| self.factor(v, &states)).product();
            f(&states, w);
        });
        Ok(())
    }

    /// `E[target | do(assignments)]` by truncated factorization over the
    /// ancestors of `target`.
    pub fn do_expectation(&self, assign: &[(NodeId, f64)], target: NodeId) -> Result<f64> {
        self.dag.parents(target)?;
        let mut fixed = vec![None; self.dag.len()];
        for &(v, x) in assign {
            self.dag.parents(v)?;
            if v == target {
                return Err(Error::TargetIntervened(self.dag.name(v).to_string()));
            }
            fixed[v.0] = Some(self.state_of(v, x)?);
        }
        let closure = self.dag.ancestral_closure(&VertexSet::singleton(target));
        // intervened nodes outside the ancestral set cannot matter
        let closure = self.cut_at_interventions(&closure, &fixed, target);
        let mut e = 0.0;
        self.sum_truncated(&closure, &fixed, |states, w| {
            e += w * states[target.0] as f64
        })?;
        Ok(e)
    }

    /// Ancestors of `target` reachable without passing through an intervened
    /// node (those have no incoming influence under the intervention).
    fn cut_at_interventions(
        &self,
        closure: &VertexSet,
        fixed: &[Option<usize>],
        target: NodeId,
    ) -> VertexSet {
        let mut keep = VertexSet::singleton(target);
        let mut stack = vec![target];
        while let Some(v) = stack.pop() {
            if fixed[v.0].is_some() {
                continue;
            }
            for &p in self.dag.parent_ids(v) {
                if closure.contains(p) && keep.insert(p) {
                    stack.push(p);
                }
            }
        }
        keep
    }

    /// Observational marginal over `vars`, keyed by their states in the
    /// order given.
    pub fn marginal(&self, vars: &[NodeId]) -> Result<BTreeMap<Vec<usize>, f64>> {
        let closure = self.dag.ancestral_closure(&vars.iter().copied().collect());
        let fixed = vec![None; self.dag.len()];
        let mut out = BTreeMap::new();
        self.sum_truncated(&closure, &fixed, |states, w| {
            let key: Vec<usize> = vars.iter().map(|v| states[v.0]).collect();
            *out.entry(key).or_insert(0.0) += w;
        })?;
        Ok(out)
    }

    /// Weighted controlled direct effect from its interventional definition:
    /// CDE(m′) averaged over the observational marginal of `M′`.
    pub fn true_wcde(&self, q: &QuerySpec) -> Result<f64> {
        let m_prime = mediator_sets(&self.dag, q)?.m_prime.to_vec();
        let mut total = 0.0;
        for (states, p) in self.marginal(&m_prime)? {
            if p == 0.0 {
                continue;
            }
            let mut treat: Vec<(NodeId, f64)> = m_prime
                .iter()
                .zip(&states)
                .map(|(&v, &s)| (v, s as f64))
                .collect();
            treat.push((q.exposure, q.a));
            let e_a = self.do_expectation(&treat, q.outcome)?;
            treat.last_mut().unwrap().1 = q.a_star;
            let e_star = self.do_expectation(&treat, q.outcome)?;
            total += p * (e_a - e_star);
        }
        Ok(total)
    }

    /// Exact identification functional for an adjustment set:
    /// `Σ_{z1,z2} E[Y | a, z1, z2] p(z1) p(z2)` minus the same at `a*`,
    /// with the product of marginals (not the joint) over `(z1, z2)`.
    pub fn population_wcde_z(&self, q: &QuerySpec, adj: &AdjustmentSet) -> Result<f64> {
        let (t_a, t_star) = self.population_t(q, adj)?;
        Ok(t_a - t_star)
    }

    /// `(T_a(Z), T_{a*}(Z))` at the population distribution.
    pub fn population_t(&self, q: &QuerySpec, adj: &AdjustmentSet) -> Result<(f64, f64)> {
        let joint = self.joint_distribution()?;
        let z1 = adj.z1.to_vec();
        let z2 = adj.z2.to_vec();
        let levels = [
            self.state_of(q.exposure, q.a)?,
            self.state_of(q.exposure, q.a_star)?,
        ];
        let mut p1: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut p2: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        // (z1, z2, arm) -> (mass, y-mass)
        let mut cells: BTreeMap<CellKey, (f64, f64)> = BTreeMap::new();
        for (states, p) in joint.iter() {
            let k1: Vec<usize> = z1.iter().map(|v| states[v.0]).collect();
            let k2: Vec<usize> = z2.iter().map(|v| states[v.0]).collect();
            *p1.entry(k1.clone()).or_insert(0.0) += p;
            *p2.entry(k2.clone()).or_insert(0.0) += p;
            for (arm, &lvl) in levels.iter().enumerate() {
                if states[q.exposure.0] == lvl {
                    let c = cells
                        .entry((k1.clone(), k2.clone(), arm))
                        .or_insert((0.0, 0.0));
                    c.0 += p;
                    c.1 += p * states[q.outcome.0] as f64;
                }
            }
        }
        let mut t = [0.0; 2];
        for (arm, t_arm) in t.iter_mut().enumerate() {
            for (k1, &q1) in p1.iter().filter(|(_, &p)| p > 0.0) {
                for (k2, &q2) in p2.iter().filter(|(_, &p)| p > 0.0) {
                    let (mass, ymass) = cells
                        .get(&(k1.clone(), k2.clone(), arm))
                        .copied()
                        .unwrap_or((0.0, 0.0));
                    if mass <= 0.0 {
                        return Err(Error::PositivityViolation(self.describe_cell(
                            q,
                            levels[arm],
                            &z1,
                            k1,
                            &z2,
                            k2,
                        )));
                    }
                    *t_arm += ymass / mass * q1 * q2;
                }
            }
        }
        Ok((t[0], t[1]))
    }

    fn describe_cell(
        &self,
        q: &QuerySpec,
        a: usize,
        z1: &[NodeId],
        k1: &[usize],
        z2: &[NodeId],
        k2: &[usize],
    ) -> String {
        let mut parts = vec![format!("{}={a}", self.dag.name(q.exposure))];
        for (v, s) in z1.iter().zip(k1).chain(z2.iter().zip(k2)) {
            parts.push(format!("{}={s}", self.dag.name(*v)));
        }
        parts.join(", ")
    }
}

/// Exact probability table over all nodes of a discrete model, in mixed
/// radix with node 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub cards: Vec<usize>,
    pub probs: Vec<f64>,
}

impl JointTable {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Iterates `(states, probability)` over every configuration.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let mut states = vec![0usize; self.cards.len()];
        let mut first = true;
        self.probs.iter().map(move |&p| {
            if !first {
                advance(&mut states, &self.cards);
            }
            first = false;
            (states.clone(), p)
        })
    }
}

fn state_count(cards: &[usize]) -> u128 {
    cards.iter().map(|&c| c as u128).product()
}

fn advance(states: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..states.len()).rev() {
        states[i] += 1;
        if states[i] < cards[i] {
            return true;
        }
        states[i] = 0;
    }
    false
}

/// Calls `f` on every configuration of the mixed-radix counter `cards`,
/// last position fastest. An empty `cards` yields one empty configuration.
fn for_each_config(cards: &[usize], mut f: impl FnMut(&[usize])) {
    let mut states = vec![0usize; cards.len()];
    loop {
        f(&states);
        if !advance(&mut states, cards) {
            break;
        }
    }
}
