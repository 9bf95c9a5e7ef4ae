//! Monte Carlo replications comparing estimator variances across adjustment
//! sets, and the population bias of an invalid set.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::adjustment::{check_vas, split_adjustment, QuerySpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate, Family, Method};
use crate::graph::VertexSet;
use crate::scm::{DiscreteScm, Scm};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scm: Scm,
    pub q: QuerySpec,
    pub adjust_sets: Vec<VertexSet>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub method: Method,
    pub family: Family,
    /// Skip the validity check on the adjustment sets.
    pub allow_invalid: bool,
}

impl ExperimentConfig {
    /// One-step estimation with cell nuisances for discrete models and the
    /// linear basis otherwise.
    pub fn new(
        scm: Scm,
        q: QuerySpec,
        adjust_sets: Vec<VertexSet>,
        n: usize,
        reps: usize,
        seed: u64,
    ) -> Self {
        let family = match scm {
            Scm::Discrete(_) => Family::DiscreteCells,
            Scm::Linear(_) => Family::linear(),
        };
        Self {
            scm,
            q,
            adjust_sets,
            n,
            reps,
            seed,
            method: Method::OneStep,
            family,
            allow_invalid: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::InvalidExperiment("reps must be at least 2".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidExperiment("n must be at least 2".into()));
        }
        if self.adjust_sets.is_empty() {
            return Err(Error::InvalidExperiment("no adjustment sets".into()));
        }
        let g = self.scm.dag();
        for (i, z) in self.adjust_sets.iter().enumerate() {
            if self.adjust_sets[..i].contains(z) {
                return Err(Error::InvalidExperiment(format!(
                    "{} listed twice",
                    g.fmt_set(z)
                )));
            }
            if !self.allow_invalid && !check_vas(g, &self.q, z)?.valid {
                return Err(Error::InvalidExperiment(format!(
                    "{} is not a valid adjustment set",
                    g.fmt_set(z)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub set: String,
    #[serde(skip)]
    pub z: VertexSet,
    pub mean_estimate: f64,
    /// `n` times the variance of the estimates across replications.
    pub emp_variance: f64,
    /// Mean over replications of the estimated `Var[ψ_diff]`.
    pub mean_asym_var: f64,
    /// Jackknife standard error of `emp_variance`.
    pub mcse: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTable {
    pub rows: Vec<VarianceRow>,
    /// Estimates per set (outer) and replication (inner).
    #[serde(skip)]
    pub estimates: Vec<Vec<f64>>,
}

/// Sample variance and its jackknife standard error over replications.
/// Needs at least two values; with exactly two the normal-theory error
/// `V·√(2/(R−1))` is used.
pub fn variance_with_mcse(x: &[f64]) -> (f64, f64) {
    let r = x.len();
    let rf = r as f64;
    let mean = x.iter().sum::<f64>() / rf;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let var = ss / (rf - 1.0);
    if r < 3 {
        return (var, var * (2.0 / (rf - 1.0)).sqrt());
    }
    // leave-one-out variances in O(R)
    let loo: Vec<f64> = x
        .iter()
        .map(|v| (ss - (v - mean).powi(2) * rf / (rf - 1.0)) / (rf - 2.0))
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / rf;
    let jk = ((rf - 1.0) / rf * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();
    (var, jk)
}

/// Runs `reps` replications; replication `r` samples stream `r` (from 1) of
/// the base seed and estimates every set on the same data.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<VarianceTable> {
    cfg.validate()?;
    let g = cfg.scm.dag();
    let adjs = cfg
        .adjust_sets
        .iter()
        .map(|z| split_adjustment(g, &cfg.q, z))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = adjs.iter().map(|a| a.label(g)).collect();
    let per_rep: Vec<Vec<(f64, f64)>> = (1..=cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let data = cfg.scm.sample_stream(cfg.n, cfg.seed, rep as u64)?;
            adjs.iter()
                .zip(&labels)
                .map(|(adj, label)| {
                    estimate(&data, g, &cfg.q, adj, cfg.family, cfg.method)
                        .map(|r| (r.wcde, r.var_hat))
                        .map_err(|e| Error::Replication {
                            rep,
                            set: label.clone(),
                            source: Box::new(e),
                        })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let nf = cfg.n as f64;
    let mut rows = Vec::new();
    let mut estimates = Vec::new();
    for (j, label) in labels.into_iter().enumerate() {
        let est: Vec<f64> = per_rep.iter().map(|r| r[j].0).collect();
        let asym: Vec<f64> = per_rep.iter().map(|r| r[j].1).collect();
        let (var, mcse) = variance_with_mcse(&est);
        rows.push(VarianceRow {
            set: label,
            z: cfg.adjust_sets[j].clone(),
            mean_estimate: est.iter().sum::<f64>() / est.len() as f64,
            emp_variance: nf * var,
            mean_asym_var: asym.iter().sum::<f64>() / asym.len() as f64,
            mcse: nf * mcse,
            n: cfg.n,
            reps: cfg.reps,
            seed: cfg.seed,
        });
        estimates.push(est);
    }
    Ok(VarianceTable { rows, estimates })
}

impl VarianceTable {
    pub fn row(&self, z: &VertexSet) -> Result<&VarianceRow> {
        self.rows
            .iter()
            .find(|r| &r.z == z)
            .ok_or_else(|| Error::MissingRow(format!("{:?}", z.to_vec())))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "rows": self.rows })
    }
}

/// One predicted inequality `Var(lower) ≤ Var(other)` checked with a
/// tolerance of two combined Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub lower: String,
    pub other: String,
    pub lower_var: f64,
    pub other_var: f64,
    pub combined_mcse: f64,
    pub holds: bool,
}

pub fn compare(table: &VarianceTable, lower: &VertexSet, other: &VertexSet) -> Result<Comparison> {
    let (l, o) = (table.row(lower)?, table.row(other)?);
    let combined = (l.mcse.powi(2) + o.mcse.powi(2)).sqrt();
    Ok(Comparison {
        lower: l.set.clone(),
        other: o.set.clone(),
        lower_var: l.emp_variance,
        other_var: o.emp_variance,
        combined_mcse: combined,
        holds: l.emp_variance <= o.emp_variance + 2.0 * combined,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub oset: String,
    pub comparisons: Vec<Comparison>,
    /// Sets whose variance is below the O-set's by more than the tolerance.
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Compares the O-set row against every other row.
pub fn ordering_check(table: &VarianceTable, oset: &VertexSet) -> Result<OrderingReport> {
    let o = table.row(oset)?;
    let comparisons = table
        .rows
        .iter()
        .filter(|r| &r.z != oset)
        .map(|r| compare(table, oset, &r.z))
        .collect::<Result<Vec<_>>>()?;
    let violations: Vec<String> = comparisons
        .iter()
        .filter(|c| !c.holds)
        .map(|c| c.other.clone())
        .collect();
    Ok(OrderingReport {
        oset: o.set.clone(),
        pass: violations.is_empty(),
        comparisons,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub invalid_set: String,
    pub valid_set: String,
    pub truth: f64,
    pub population_invalid: f64,
    pub population_valid: f64,
    /// `|population(invalid) − truth|`
    pub population_gap: f64,
    pub n: usize,
    pub estimate_invalid: f64,
    pub estimate_valid: f64,
    pub se_invalid: f64,
    pub se_valid: f64,
    /// `|estimate(invalid) − truth|`
    pub estimator_gap: f64,
}

impl BiasReport {
    /// Errors unless the population gap exceeds `threshold`.
    pub fn require_gap(&self, threshold: f64) -> Result<()> {
        if self.population_gap > threshold {
            Ok(())
        } else {
            Err(Error::FixtureNotAdversarial(self.population_gap))
        }
    }
}

/// Population and estimator-level bias of `invalid` (which must satisfy the
/// first three criteria and fail the fourth) against the valid set `valid`.
pub fn bias_experiment(
    scm: &DiscreteScm,
    q: &QuerySpec,
    invalid: &VertexSet,
    valid: &VertexSet,
    n: usize,
    seed: u64,
) -> Result<BiasReport> {
    let g = scm.dag();
    let bad = check_vas(g, q, invalid)?;
    if bad.valid || !bad.criteria[..3].iter().all(|c| c.pass) {
        return Err(Error::Precondition(format!(
            "{} must pass criteria 1-3 and fail criterion 4",
            g.fmt_set(invalid)
        )));
    }
    if !check_vas(g, q, valid)?.valid {
        return Err(Error::Precondition(format!(
            "{} is not valid",
            g.fmt_set(valid)
        )));
    }
    let (za, zb) = (
        split_adjustment(g, q, invalid)?,
        split_adjustment(g, q, valid)?,
    );
    let truth = scm.true_wcde(q)?;
    let population_invalid = scm.population_wcde_z(q, &za)?;
    let population_valid = scm.population_wcde_z(q, &zb)?;
    let data = Scm::Discrete(scm.clone()).sample(n, seed)?;
    let ea = estimate(&data, g, q, &za, Family::DiscreteCells, Method::OneStep)?;
    let eb = estimate(&data, g, q, &zb, Family::DiscreteCells, Method::OneStep)?;
    Ok(BiasReport {
        invalid_set: za.label(g),
        valid_set: zb.label(g),
        truth,
        population_invalid,
        population_valid,
        population_gap: (population_invalid - truth).abs(),
        n,
        estimate_invalid: ea.wcde,
        estimate_valid: eb.wcde,
        se_invalid: ea.se,
        se_valid: eb.se,
        estimator_gap: (ea.wcde - truth).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scm::{DiscreteNode, DiscreteScm};

    fn trivial() -> ExperimentConfig {
        let scm = DiscreteScm::from_nodes(vec![
            DiscreteNode::binary("A", &[], &[0.5]),
            DiscreteNode::binary("Y", &["A"], &[0.3, 0.6]),
        ])
        .unwrap();
        let q = QuerySpec::by_name(scm.dag(), "A", "Y").unwrap();
        ExperimentConfig::new(scm.into(), q, vec![VertexSet::new()], 10, 2, 1)
    }

    #[test]
    fn smoke_is_reproducible() {
        let cfg = trivial();
        let a = run_replications(&cfg).unwrap();
        assert_eq!(a.rows.len(), 1);
        let r = &a.rows[0];
        assert!(r.mean_estimate.is_finite() && r.emp_variance.is_finite() && r.mcse.is_finite());
        assert_eq!(a, run_replications(&cfg).unwrap());
    }

    #[test]
    fn config_checks() {
        let mut cfg = trivial();
        cfg.reps = 1;
        assert!(matches!(
            run_replications(&cfg),
            Err(Error::InvalidExperiment(_))
        ));
        let g = fixtures::figure1_dag();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let mut cfg = ExperimentConfig::new(
            fixtures::figure1_scm().into(),
            q,
            vec![g.set(&["B1", "G2"]).unwrap()],
            50,
            2,
            1,
        );
        assert!(matches!(
            run_replications(&cfg),
            Err(Error::InvalidExperiment(_))
        ));
        cfg.allow_invalid = true;
        assert!(run_replications(&cfg).is_ok());
    }

    #[test]
    fn errors_name_replication_and_set() {
        let mut cfg = trivial();
        cfg.n = 2;
        cfg.reps = 40;
        match run_replications(&cfg) {
            Err(Error::Replication { set, .. }) => assert_eq!(set, "{}"),
            r => panic!("expected an empty-cell failure, got {r:?}"),
        }
    }

    #[test]
    fn adding_sets_keeps_columns() {
        let g = fixtures::figure3_dag();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let s1 = g.set(&["G1", "G2"]).unwrap();
        let s2 = g.set(&["B2", "G1"]).unwrap();
        let one = ExperimentConfig::new(
            fixtures::figure3_scm().into(),
            q,
            vec![s1.clone()],
            200,
            5,
            3,
        );
        let mut two = one.clone();
        two.adjust_sets.push(s2);
        let (a, b) = (
            run_replications(&one).unwrap(),
            run_replications(&two).unwrap(),
        );
        assert_eq!(a.rows[0], b.rows[0]);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let x = [0.3, -1.2, 2.5, 0.7, 0.0, 1.1, -0.4];
        let (v, se) = variance_with_mcse(&x);
        let var = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64
        };
        assert!((v - var(&x)).abs() < 1e-12);
        let loo: Vec<f64> = (0..x.len())
            .map(|i| {
                let s: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, a)| *a)
                    .collect();
                var(&s)
            })
            .collect();
        let r = x.len() as f64;
        let m = loo.iter().sum::<f64>() / r;
        let brute = ((r - 1.0) / r * loo.iter().map(|a| (a - m).powi(2)).sum::<f64>()).sqrt();
        assert!((se - brute).abs() < 1e-12);
    }

    fn table(rows: &[(&VertexSet, f64, f64)]) -> VarianceTable {
        VarianceTable {
            rows: rows
                .iter()
                .map(|(z, v, m)| VarianceRow {
                    set: format!("{:?}", z.to_vec()),
                    z: (*z).clone(),
                    mean_estimate: 0.0,
                    emp_variance: *v,
                    mean_asym_var: *v,
                    mcse: *m,
                    n: 1,
                    reps: 2,
                    seed: 0,
                })
                .collect(),
            estimates: vec![],
        }
    }

    #[test]
    fn ordering_negative_control() {
        let g = fixtures::figure1_dag();
        let (o, b) = (
            g.set(&["G1", "G2"]).unwrap(),
            g.set(&["B1", "G1", "G2"]).unwrap(),
        );
        let t = table(&[(&o, 0.9, 0.04), (&b, 1.0, 0.04)]);
        assert!(ordering_check(&t, &o).unwrap().pass);
        let t = table(&[(&o, 9.0, 0.4), (&b, 1.0, 0.04)]);
        let r = ordering_check(&t, &o).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 1);
        let t = table(&[(&o, 0.9, 0.04)]);
        assert!(ordering_check(&t, &o).unwrap().pass);
        assert!(matches!(ordering_check(&t, &b), Err(Error::MissingRow(_))));
    }

    #[test]
    fn csv_columns() {
        let g = fixtures::figure1_dag();
        let o = g.set(&["G1", "G2"]).unwrap();
        let mut buf = Vec::new();
        table(&[(&o, 0.9, 0.04)]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "set,mean_estimate,emp_variance,mean_asym_var,mcse,n,reps,seed"
        );
    }

    #[test]
    fn bias_preconditions() {
        let scm = fixtures::figure1_adversarial_scm();
        let g = scm.dag();
        let q = QuerySpec::by_name(g, "A", "Y").unwrap();
        let valid = g.set(&["G1", "G2"]).unwrap();
        assert!(matches!(
            bias_experiment(&scm, &q, &valid, &valid, 100, 1),
            Err(Error::Precondition(_))
        ));
        let r = bias_experiment(&scm, &q, &g.set(&["B1", "G2"]).unwrap(), &valid, 2000, 1).unwrap();
        assert!(r.require_gap(0.01).is_ok());
        let scm = fixtures::figure1_unfaithful_scm();
        let r = bias_experiment(&scm, &q, &g.set(&["B1", "G2"]).unwrap(), &valid, 2000, 1).unwrap();
        assert!(r.population_gap <= 1e-9);
        assert!(matches!(
            r.require_gap(0.01),
            Err(Error::FixtureNotAdversarial(_))
        ));
    }
}
