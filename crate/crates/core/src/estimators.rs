//! Plug-in and one-step estimators of the identification functional
//! `T_a(Z) = Σ_{z1,z2} E[Y | a, z1, z2] p(z1) p(z2)` and their influence
//! function values.
//!
//! Nuisances are fitted from weighted observations. Data use weights `1/n`;
//! passing exact joint probabilities instead evaluates everything at the
//! population distribution.

use std::collections::HashMap;

use serde::Serialize;

use crate::adjustment::{AdjustmentSet, QuerySpec};
use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::scm::Dataset;

/// Smallest admissible `p̂(z1, z2, a)` for an observation in arm `a`.
pub const PROPENSITY_FLOOR: f64 = 1e-8;
pub const DEFAULT_BINS: usize = 5;
/// Integer-valued columns with at most this many distinct values are used as
/// categories rather than binned.
pub const MAX_EXACT_LEVELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Saturated cell means and empirical frequencies.
    DiscreteCells,
    /// Least squares on `[1, A, z1, z2, A·z1]`, with frequencies of
    /// discretized `z` for the weight term.
    LinearBasis(LinearOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearOptions {
    /// Quantile bins per continuous adjustment column; 0 refuses continuous
    /// columns.
    pub bins: usize,
    /// Include the `A·z1` columns.
    pub exposure_interactions: bool,
}

impl Default for LinearOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            exposure_interactions: true,
        }
    }
}

impl Family {
    pub fn linear() -> Self {
        Family::LinearBasis(LinearOptions::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "plugin")]
    PlugIn,
    #[serde(rename = "onestep")]
    OneStep,
}

#[derive(Debug, Clone, PartialEq)]
enum ColumnCoder {
    Exact,
    Bins(Vec<f64>),
}

impl ColumnCoder {
    fn fit(name: &str, values: &[f64], family: Family) -> Result<Self> {
        let integral = values.iter().all(|x| x.fract() == 0.0 && x.abs() < 1e15);
        match family {
            Family::DiscreteCells if integral => Ok(ColumnCoder::Exact),
            Family::DiscreteCells => Err(Error::UnsupportedContinuousWeights(name.to_string())),
            Family::LinearBasis(opts) => {
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                sorted.dedup();
                if integral && sorted.len() <= MAX_EXACT_LEVELS {
                    return Ok(ColumnCoder::Exact);
                }
                if opts.bins == 0 {
                    return Err(Error::UnsupportedContinuousWeights(name.to_string()));
                }
                let mut all = values.to_vec();
                all.sort_by(f64::total_cmp);
                let mut cuts: Vec<f64> = (1..opts.bins)
                    .map(|k| all[k * all.len() / opts.bins])
                    .collect();
                cuts.dedup();
                Ok(ColumnCoder::Bins(cuts))
            }
        }
    }

    fn code(&self, name: &str, x: f64) -> Result<i64> {
        match self {
            ColumnCoder::Exact if x.fract() == 0.0 => Ok(x as i64),
            ColumnCoder::Exact => Err(Error::UnsupportedContinuousWeights(name.to_string())),
            ColumnCoder::Bins(cuts) => Ok(cuts.partition_point(|&c| c <= x) as i64),
        }
    }
}

/// Maps the values of a group of columns to dense cell indices.
#[derive(Debug, Clone, PartialEq)]
struct GroupCoder {
    names: Vec<String>,
    cols: Vec<ColumnCoder>,
    index: HashMap<Vec<i64>, usize>,
    keys: Vec<Vec<i64>>,
}

impl GroupCoder {
    fn fit(names: &[String], columns: &[&[f64]], family: Family) -> Result<Self> {
        let cols = names
            .iter()
            .zip(columns)
            .map(|(n, c)| ColumnCoder::fit(n, c, family))
            .collect::<Result<Vec<_>>>()?;
        let mut coder = Self {
            names: names.to_vec(),
            cols,
            index: HashMap::new(),
            keys: Vec::new(),
        };
        let n = columns.first().map_or(0, |c| c.len());
        if columns.is_empty() {
            coder.index.insert(Vec::new(), 0);
            coder.keys.push(Vec::new());
        }
        for i in 0..n {
            let key = coder.key(columns.iter().map(|c| c[i]))?;
            if !coder.index.contains_key(&key) {
                coder.index.insert(key.clone(), coder.keys.len());
                coder.keys.push(key);
            }
        }
        Ok(coder)
    }

    fn key(&self, values: impl Iterator<Item = f64>) -> Result<Vec<i64>> {
        self.cols
            .iter()
            .zip(&self.names)
            .zip(values)
            .map(|((c, n), x)| c.code(n, x))
            .collect()
    }

    fn len(&self) -> usize {
        self.keys.len()
    }

    fn describe(&self, cell: usize) -> String {
        self.names
            .iter()
            .zip(&self.keys[cell])
            .zip(&self.cols)
            .map(|((n, k), c)| match c {
                ColumnCoder::Exact => format!("{n}={k}"),
                ColumnCoder::Bins(_) => format!("{n} in bin {k}"),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Observations arranged for fitting: arm membership, outcome, adjustment
/// values and their cells, and observation weights summing to one.
struct Prepared {
    arm: Vec<Option<usize>>,
    y: Vec<f64>,
    z1: Vec<Vec<f64>>,
    z2: Vec<Vec<f64>>,
    c1: Vec<usize>,
    c2: Vec<usize>,
    w: Vec<f64>,
}

struct Columns<'a> {
    a: &'a [f64],
    y: &'a [f64],
    z1_names: Vec<String>,
    z2_names: Vec<String>,
    z1: Vec<&'a [f64]>,
    z2: Vec<&'a [f64]>,
}

fn columns<'a>(
    data: &'a Dataset,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
) -> Result<Columns<'a>> {
    let z1_names = g.set_names(&adj.z1);
    let z2_names = g.set_names(&adj.z2);
    Ok(Columns {
        a: data.column(g.name(q.exposure))?,
        y: data.column(g.name(q.outcome))?,
        z1: z1_names
            .iter()
            .map(|n| data.column(n))
            .collect::<Result<_>>()?,
        z2: z2_names
            .iter()
            .map(|n| data.column(n))
            .collect::<Result<_>>()?,
        z1_names,
        z2_names,
    })
}

fn prepare(
    cols: &Columns,
    q: &QuerySpec,
    coder1: &GroupCoder,
    coder2: &GroupCoder,
    weights: Option<&[f64]>,
) -> Result<Prepared> {
    let n = cols.a.len();
    let row = |zs: &[&[f64]], i: usize| zs.iter().map(|c| c[i]).collect::<Vec<f64>>();
    let cell = |coder: &GroupCoder, z: &[f64]| -> Result<usize> {
        let key = coder.key(z.iter().copied())?;
        coder.index.get(&key).copied().ok_or_else(|| {
            Error::EmptyCell(
                coder
                    .names
                    .iter()
                    .zip(z)
                    .map(|(n, x)| format!("{n}={x}"))
                    .collect::<Vec<_>>()
                    .join(", "),
            )
        })
    };
    let mut p = Prepared {
        arm: Vec::with_capacity(n),
        y: cols.y.to_vec(),
        z1: Vec::with_capacity(n),
        z2: Vec::with_capacity(n),
        c1: Vec::with_capacity(n),
        c2: Vec::with_capacity(n),
        w: match weights {
            Some(w) => {
                let s: f64 = w.iter().sum();
                w.iter().map(|x| x / s).collect()
            }
            None => vec![1.0 / n as f64; n],
        },
    };
    for i in 0..n {
        p.arm.push(if cols.a[i] == q.a {
            Some(0)
        } else if cols.a[i] == q.a_star {
            Some(1)
        } else {
            None
        });
        let (z1, z2) = (row(&cols.z1, i), row(&cols.z2, i));
        p.c1.push(cell(coder1, &z1)?);
        p.c2.push(cell(coder2, &z2)?);
        p.z1.push(z1);
        p.z2.push(z2);
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
enum OutcomeModel {
    /// Cell means `μ[arm][c1 * n2 + c2]`.
    Cells([Vec<f64>; 2]),
    /// Coefficients on `[1, A, z1, z2, A·z1]` and the weighted means of
    /// `z1` and `z2`.
    Linear {
        beta: Vec<f64>,
        interactions: bool,
        z1_mean: Vec<f64>,
        z2_mean: Vec<f64>,
    },
}

/// Fitted nuisance functions for one adjustment set.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceModels {
    pub family: Family,
    levels: [f64; 2],
    coder1: GroupCoder,
    coder2: GroupCoder,
    /// `p̂(z1)` per cell of `Z1`.
    pub marg_z1: Vec<f64>,
    /// `p̂(z2)` per cell of `Z2`.
    pub marg_z2: Vec<f64>,
    joint_az: HashMap<(usize, usize), [f64; 2]>,
    outcome: OutcomeModel,
    /// Plug-in `T̂_a` and `T̂_{a*}`.
    pub t: [f64; 2],
}

fn design_row(level: f64, z1: &[f64], z2: &[f64], interactions: bool, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    out.push(level);
    out.extend_from_slice(z1);
    out.extend_from_slice(z2);
    if interactions {
        out.extend(z1.iter().map(|z| level * z));
    }
}

/// Solves the symmetric system `m x = b` by Gaussian elimination with
/// partial pivoting.
fn solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let k = b.len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, x| s.max(x.abs()))
        .max(1.0);
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col].abs() <= 1e-10 * scale {
            return Err(Error::SingularDesign);
        }
        m.swap(col, piv);
        b.swap(col, piv);
        let (top, below) = m.split_at_mut(col + 1);
        let pivot = &top[col];
        for (r, row) in (col + 1..).zip(below.iter_mut()) {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Ok(x)
}

impl NuisanceModels {
    fn fit(
        p: &Prepared,
        q: &QuerySpec,
        family: Family,
        coder1: GroupCoder,
        coder2: GroupCoder,
    ) -> Result<Self> {
        let (n1, n2) = (coder1.len(), coder2.len());
        let mut marg_z1 = vec![0.0; n1];
        let mut marg_z2 = vec![0.0; n2];
        let mut joint_az: HashMap<(usize, usize), [f64; 2]> = HashMap::new();
        for i in 0..p.y.len() {
            marg_z1[p.c1[i]] += p.w[i];
            marg_z2[p.c2[i]] += p.w[i];
            if let Some(k) = p.arm[i] {
                joint_az.entry((p.c1[i], p.c2[i])).or_insert([0.0; 2])[k] += p.w[i];
            }
        }
        let levels = [q.a, q.a_star];
        let outcome = match family {
            Family::DiscreteCells => {
                let mut ymass: HashMap<(usize, usize), [f64; 2]> = HashMap::new();
                for i in 0..p.y.len() {
                    if let Some(k) = p.arm[i] {
                        ymass.entry((p.c1[i], p.c2[i])).or_insert([0.0; 2])[k] += p.w[i] * p.y[i];
                    }
                }
                let mut mu = [vec![0.0; n1 * n2], vec![0.0; n1 * n2]];
                for c1 in (0..n1).filter(|&c| marg_z1[c] > 0.0) {
                    for c2 in (0..n2).filter(|&c| marg_z2[c] > 0.0) {
                        let mass = joint_az.get(&(c1, c2)).copied().unwrap_or([0.0; 2]);
                        let ym = ymass.get(&(c1, c2)).copied().unwrap_or([0.0; 2]);
                        for k in 0..2 {
                            if mass[k] <= 0.0 {
                                let mut cell = vec![format!("A={}", levels[k])];
                                cell.extend(
                                    [coder1.describe(c1), coder2.describe(c2)]
                                        .into_iter()
                                        .filter(|s| !s.is_empty()),
                                );
                                return Err(Error::EmptyCell(cell.join(", ")));
                            }
                            mu[k][c1 * n2 + c2] = ym[k] / mass[k];
                        }
                    }
                }
                OutcomeModel::Cells(mu)
            }
            Family::LinearBasis(opts) => {
                let d1 = p.z1.first().map_or(0, Vec::len);
                let d2 = p.z2.first().map_or(0, Vec::len);
                let inter = opts.exposure_interactions;
                let k = 2 + d1 + d2 + if inter { d1 } else { 0 };
                let mut xtx = vec![vec![0.0; k]; k];
                let mut xty = vec![0.0; k];
                let mut x = Vec::with_capacity(k);
                let mut z1_mean = vec![0.0; d1];
                let mut z2_mean = vec![0.0; d2];
                for i in 0..p.y.len() {
                    let w = p.w[i];
                    z1_mean
                        .iter_mut()
                        .zip(&p.z1[i])
                        .for_each(|(m, z)| *m += w * z);
                    z2_mean
                        .iter_mut()
                        .zip(&p.z2[i])
                        .for_each(|(m, z)| *m += w * z);
                    let level = match p.arm[i] {
                        Some(arm) => levels[arm],
                        None => continue,
                    };
                    design_row(level, &p.z1[i], &p.z2[i], inter, &mut x);
                    for ((row, t), xr) in xtx.iter_mut().zip(xty.iter_mut()).zip(&x) {
                        let wr = w * xr;
                        *t += wr * p.y[i];
                        for (cell, xc) in row.iter_mut().zip(&x) {
                            *cell += wr * xc;
                        }
                    }
                }
                OutcomeModel::Linear {
                    beta: solve(xtx, xty)?,
                    interactions: inter,
                    z1_mean,
                    z2_mean,
                }
            }
        };
        let mut nm = Self {
            family,
            levels,
            coder1,
            coder2,
            marg_z1,
            marg_z2,
            joint_az,
            outcome,
            t: [0.0; 2],
        };
        nm.t = [nm.plug_in(0), nm.plug_in(1)];
        Ok(nm)
    }

    fn plug_in(&self, arm: usize) -> f64 {
        match &self.outcome {
            OutcomeModel::Cells(mu) => {
                let n2 = self.marg_z2.len();
                let mut t = 0.0;
                for (c1, p1) in self.marg_z1.iter().enumerate().filter(|(_, &p)| p > 0.0) {
                    for (c2, p2) in self.marg_z2.iter().enumerate().filter(|(_, &p)| p > 0.0) {
                        t += mu[arm][c1 * n2 + c2] * p1 * p2;
                    }
                }
                t
            }
            OutcomeModel::Linear {
                z1_mean, z2_mean, ..
            } => self.linear_mean(arm, z1_mean, z2_mean),
        }
    }

    fn linear_mean(&self, arm: usize, z1: &[f64], z2: &[f64]) -> f64 {
        let OutcomeModel::Linear {
            beta, interactions, ..
        } = &self.outcome
        else {
            unreachable!()
        };
        let mut x = Vec::with_capacity(beta.len());
        design_row(self.levels[arm], z1, z2, *interactions, &mut x);
        x.iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    /// `μ̂(z1, z2)` for arm `arm`, given both raw values and cells.
    fn mu(&self, arm: usize, z1: &[f64], z2: &[f64], c1: usize, c2: usize) -> f64 {
        match &self.outcome {
            OutcomeModel::Cells(mu) => mu[arm][c1 * self.marg_z2.len() + c2],
            OutcomeModel::Linear { .. } => self.linear_mean(arm, z1, z2),
        }
    }

    /// `η̂₁(z1) = Σ_{z2} μ̂(z1, z2) p̂(z2)`.
    fn profile1(&self, arm: usize, z1: &[f64], c1: usize) -> f64 {
        match &self.outcome {
            OutcomeModel::Cells(mu) => {
                let n2 = self.marg_z2.len();
                self.marg_z2
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(c2, p)| mu[arm][c1 * n2 + c2] * p)
                    .sum()
            }
            OutcomeModel::Linear { z2_mean, .. } => self.linear_mean(arm, z1, z2_mean),
        }
    }

    /// `η̂₂(z2) = Σ_{z1} μ̂(z1, z2) p̂(z1)`.
    fn profile2(&self, arm: usize, z2: &[f64], c2: usize) -> f64 {
        match &self.outcome {
            OutcomeModel::Cells(mu) => {
                let n2 = self.marg_z2.len();
                self.marg_z1
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(c1, p)| mu[arm][c1 * n2 + c2] * p)
                    .sum()
            }
            OutcomeModel::Linear { z1_mean, .. } => self.linear_mean(arm, z1_mean, z2),
        }
    }

    /// Fitted `Ê[Y | A = level, Z1 = z1, Z2 = z2]`, with `level` one of the
    /// two query levels.
    pub fn outcome_mean(&self, level: f64, z1: &[f64], z2: &[f64]) -> Result<f64> {
        let arm = self
            .levels
            .iter()
            .position(|&l| l == level)
            .ok_or_else(|| Error::Precondition(format!("{level} is not a query level")))?;
        let cell = |coder: &GroupCoder, z: &[f64]| -> Result<usize> {
            let key = coder.key(z.iter().copied())?;
            coder
                .index
                .get(&key)
                .copied()
                .ok_or_else(|| Error::EmptyCell(format!("{z:?}")))
        };
        let (c1, c2) = (cell(&self.coder1, z1)?, cell(&self.coder2, z2)?);
        Ok(self.mu(arm, z1, z2, c1, c2))
    }

    /// `p̂(z1, z2, A = level)` for the cells of the given values, 0 when unseen.
    pub fn joint_prob(&self, arm: usize, c1: usize, c2: usize) -> f64 {
        self.joint_az.get(&(c1, c2)).map_or(0.0, |m| m[arm])
    }
}

fn check_query(g: &Dag, q: &QuerySpec, adj: &AdjustmentSet) -> Result<()> {
    q.check_in(g)?;
    if adj.z.contains(q.exposure) || adj.z.contains(q.outcome) {
        return Err(Error::ContainsEndpoint(g.name(q.exposure).to_string()));
    }
    Ok(())
}

pub fn fit_nuisances(
    data: &Dataset,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    family: Family,
) -> Result<NuisanceModels> {
    fit_nuisances_weighted(data, None, g, q, adj, family)
}

/// As [`fit_nuisances`] with per-row weights (normalized internally).
pub fn fit_nuisances_weighted(
    data: &Dataset,
    weights: Option<&[f64]>,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    family: Family,
) -> Result<NuisanceModels> {
    check_query(g, q, adj)?;
    if data.n() < 2 {
        return Err(Error::TooFewObservations(2));
    }
    if let Some(w) = weights {
        if w.len() != data.n()
            || w.iter().any(|x| !x.is_finite() || *x < 0.0)
            || w.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::Precondition(
                "weights must be nonnegative, one per row".into(),
            ));
        }
    }
    let cols = columns(data, g, q, adj)?;
    let coder1 = GroupCoder::fit(&cols.z1_names, &cols.z1, family)?;
    let coder2 = GroupCoder::fit(&cols.z2_names, &cols.z2, family)?;
    let p = prepare(&cols, q, &coder1, &coder2, weights)?;
    NuisanceModels::fit(&p, q, family, coder1, coder2)
}

/// Influence function values per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct IfSample {
    pub psi_a: Vec<f64>,
    pub psi_a_star: Vec<f64>,
    pub psi_diff: Vec<f64>,
}

/// Per-observation terms shared by the influence function and the one-step
/// estimator: `weight·residual` and the two profiles, per arm.
struct IfTerms {
    wr: [Vec<f64>; 2],
    eta1: [Vec<f64>; 2],
    eta2: [Vec<f64>; 2],
}

fn if_terms(p: &Prepared, nuis: &NuisanceModels) -> Result<IfTerms> {
    let n = p.y.len();
    let mut t = IfTerms {
        wr: [vec![0.0; n], vec![0.0; n]],
        eta1: [vec![0.0; n], vec![0.0; n]],
        eta2: [vec![0.0; n], vec![0.0; n]],
    };
    for i in 0..n {
        let (c1, c2) = (p.c1[i], p.c2[i]);
        for k in 0..2 {
            t.eta1[k][i] = nuis.profile1(k, &p.z1[i], c1);
            t.eta2[k][i] = nuis.profile2(k, &p.z2[i], c2);
        }
        if let Some(k) = p.arm[i] {
            let pa = nuis.joint_prob(k, c1, c2);
            if pa <= PROPENSITY_FLOOR {
                return Err(Error::PropensityUnderflow(pa));
            }
            let w = nuis.marg_z1[c1] * nuis.marg_z2[c2] / pa;
            t.wr[k][i] = w * (p.y[i] - nuis.mu(k, &p.z1[i], &p.z2[i], c1, c2));
        }
    }
    Ok(t)
}

fn prepared_for(
    data: &Dataset,
    weights: Option<&[f64]>,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    nuis: &NuisanceModels,
) -> Result<Prepared> {
    check_query(g, q, adj)?;
    let cols = columns(data, g, q, adj)?;
    if cols.z1_names != nuis.coder1.names || cols.z2_names != nuis.coder2.names {
        return Err(Error::Precondition(
            "nuisances were fitted for another adjustment set".into(),
        ));
    }
    prepare(&cols, q, &nuis.coder1, &nuis.coder2, weights)
}

pub fn if_values(
    data: &Dataset,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    nuis: &NuisanceModels,
) -> Result<IfSample> {
    let p = prepared_for(data, None, g, q, adj, nuis)?;
    if_sample(&p, nuis)
}

fn if_sample(p: &Prepared, nuis: &NuisanceModels) -> Result<IfSample> {
    let t = if_terms(p, nuis)?;
    let psi = |k: usize| -> Vec<f64> {
        (0..p.y.len())
            .map(|i| t.wr[k][i] + t.eta1[k][i] + t.eta2[k][i] - 2.0 * nuis.t[k])
            .collect()
    };
    let (psi_a, psi_a_star) = (psi(0), psi(1));
    let psi_diff = psi_a.iter().zip(&psi_a_star).map(|(x, y)| x - y).collect();
    Ok(IfSample {
        psi_a,
        psi_a_star,
        psi_diff,
    })
}

/// Weighted sums `Σ_i w_i ψ_a(O_i)` and `Σ_i w_i ψ_{a*}(O_i)`; with joint
/// probabilities as weights this is the population mean of the influence
/// function.
pub fn weighted_if_means(
    data: &Dataset,
    weights: &[f64],
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    nuis: &NuisanceModels,
) -> Result<[f64; 2]> {
    let p = prepared_for(data, Some(weights), g, q, adj, nuis)?;
    let s = if_sample(&p, nuis)?;
    let mean = |v: &[f64]| v.iter().zip(&p.w).map(|(x, w)| x * w).sum::<f64>();
    Ok([mean(&s.psi_a), mean(&s.psi_a_star)])
}

/// Unbiased sample variance of `ψ_diff`; NaN for fewer than two values.
pub fn asymptotic_variance(ifs: &IfSample) -> f64 {
    sample_variance(&ifs.psi_diff)
}

pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub method: Method,
    pub adjustment: Vec<String>,
    pub z1: Vec<String>,
    pub z2: Vec<String>,
    pub t_a: f64,
    pub t_a_star: f64,
    pub wcde: f64,
    pub var_hat: f64,
    pub se: f64,
    pub n: usize,
    pub seed: Option<u64>,
}

fn report(
    method: Method,
    data: &Dataset,
    g: &Dag,
    adj: &AdjustmentSet,
    t: [f64; 2],
    ifs: &IfSample,
) -> EstimateReport {
    let n = data.n();
    let var_hat = asymptotic_variance(ifs);
    EstimateReport {
        method,
        adjustment: g.set_names(&adj.z),
        z1: g.set_names(&adj.z1),
        z2: g.set_names(&adj.z2),
        t_a: t[0],
        t_a_star: t[1],
        wcde: t[0] - t[1],
        var_hat,
        se: (var_hat / n as f64).sqrt(),
        n,
        seed: data.seed,
    }
}

pub fn plugin_estimate(
    data: &Dataset,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    nuis: &NuisanceModels,
) -> Result<EstimateReport> {
    let ifs = if_values(data, g, q, adj, nuis)?;
    Ok(report(Method::PlugIn, data, g, adj, nuis.t, &ifs))
}

/// `T̂^OS_a = mean(weight·residual + η̂₁ + η̂₂) − T̂_a`, which is the plug-in
/// value plus the sample mean of the estimated influence function.
pub fn one_step_estimate(
    data: &Dataset,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    nuis: &NuisanceModels,
) -> Result<EstimateReport> {
    let p = prepared_for(data, None, g, q, adj, nuis)?;
    let terms = if_terms(&p, nuis)?;
    let n = p.y.len() as f64;
    let t: [f64; 2] = std::array::from_fn(|k| {
        let s: f64 = (0..p.y.len())
            .map(|i| terms.wr[k][i] + terms.eta1[k][i] + terms.eta2[k][i])
            .sum();
        s / n - nuis.t[k]
    });
    let ifs = if_sample(&p, nuis)?;
    Ok(report(Method::OneStep, data, g, adj, t, &ifs))
}

/// Fits nuisances and runs `method` in one call.
pub fn estimate(
    data: &Dataset,
    g: &Dag,
    q: &QuerySpec,
    adj: &AdjustmentSet,
    family: Family,
    method: Method,
) -> Result<EstimateReport> {
    let nuis = fit_nuisances(data, g, q, adj, family)?;
    match method {
        Method::PlugIn => plugin_estimate(data, g, q, adj, &nuis),
        Method::OneStep => one_step_estimate(data, g, q, adj, &nuis),
    }
}
