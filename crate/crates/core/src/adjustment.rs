//! Valid adjustment sets for the weighted controlled direct effect.
//!
//! A set `Z` is valid when four criteria hold:
//!
//! 1. `Z ∖ M` has no descendants of the exposure, and every backdoor path
//!    from the exposure to the outcome is blocked by `Z`;
//! 2. for every mediator `m`, every backdoor path from `m` to the outcome is
//!    blocked by `(Z ∪ {A}) ∖ {m}`;
//! 3. every mediator path from exposure to outcome has an interior vertex in `Z`;
//! 4. `M′ ∖ Z1` is d-separated from `Pa(Y) ∖ M′` given `Z1`.
//!
//! Here `M` are the mediators, `M′` the mediating parents of the outcome and
//! `Z1 = Z ∩ M`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, VertexSet};
use crate::separation::{self, Path};
use crate::taxonomy::{mediator_sets, MediatorSets};

/// Upper bound on candidate vertices for the power-set scan.
pub const MAX_ENUMERATION_VERTICES: usize = 20;

/// Exposure/outcome pair with the two treatment levels being contrasted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuerySpec {
    pub exposure: NodeId,
    pub outcome: NodeId,
    pub a: f64,
    pub a_star: f64,
}

impl QuerySpec {
    pub fn new(exposure: NodeId, outcome: NodeId, a: f64, a_star: f64) -> Result<Self> {
        if exposure == outcome {
            return Err(Error::SameEndpoints);
        }
        if a == a_star {
            return Err(Error::SameLevels);
        }
        Ok(Self {
            exposure,
            outcome,
            a,
            a_star,
        })
    }

    /// Query with the default levels `a = 1`, `a* = 0`.
    pub fn by_name(g: &Dag, exposure: &str, outcome: &str) -> Result<Self> {
        Self::new(g.id(exposure)?, g.id(outcome)?, 1.0, 0.0)
    }

    /// The same query with the two treatment levels swapped.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.a_star,
            a_star: self.a,
            ..*self
        }
    }

    pub(crate) fn check_in(&self, g: &Dag) -> Result<()> {
        g.parents(self.exposure)?;
        g.parents(self.outcome)?;
        Ok(())
    }
}

/// An adjustment set split into its mediator part `z1` and the rest `z2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjustmentSet {
    pub z: VertexSet,
    pub z1: VertexSet,
    pub z2: VertexSet,
}

impl AdjustmentSet {
    pub fn names(&self, g: &Dag) -> Vec<String> {
        g.set_names(&self.z)
    }

    /// Comma-joined names, `{}` for the empty set.
    pub fn label(&self, g: &Dag) -> String {
        if self.z.is_empty() {
            "{}".to_string()
        } else {
            self.names(g).join(",")
        }
    }
}

pub fn split_adjustment(g: &Dag, q: &QuerySpec, z: &VertexSet) -> Result<AdjustmentSet> {
    q.check_in(g)?;
    for v in [q.exposure, q.outcome] {
        if z.contains(v) {
            return Err(Error::ContainsEndpoint(g.name(v).to_string()));
        }
    }
    let m = mediator_sets(g, q)?.m;
    Ok(AdjustmentSet {
        z: z.clone(),
        z1: z.intersection(&m),
        z2: z.difference(&m),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A path the criterion needs blocked but which is open.
    OpenPath(Path),
    /// A non-mediator adjustment variable that descends from the exposure.
    Descendant { node: NodeId, of: NodeId },
    /// The two sets of criterion 4 are d-connected.
    DConnected {
        from: VertexSet,
        to: VertexSet,
        given: VertexSet,
        path: Option<Path>,
    },
    /// Criterion 4 holds trivially because one side is empty.
    Vacuous,
}

impl Witness {
    pub fn describe(&self, g: &Dag) -> String {
        match self {
            Witness::OpenPath(p) => format!("open path {}", p.render(g)),
            Witness::Descendant { node, of } => {
                format!(
                    "{} is a non-mediator descendant of {}",
                    g.name(*node),
                    g.name(*of)
                )
            }
            Witness::DConnected {
                from, to, given, ..
            } => format!(
                "{} is not d-separated from {} given {}",
                g.fmt_set(from),
                g.fmt_set(to),
                g.fmt_set(given)
            ),
            Witness::Vacuous => "vacuous".to_string(),
        }
    }

    pub fn to_json(&self, g: &Dag) -> Value {
        let path_json = |p: &Path| {
            json!({
                "rendered": p.render(g),
                "vertices": p.vertices.iter().map(|&v| g.name(v)).collect::<Vec<_>>(),
            })
        };
        match self {
            Witness::OpenPath(p) => json!({
                "kind": "open_path",
                "statement": self.describe(g),
                "path": path_json(p),
            }),
            Witness::Descendant { node, of } => json!({
                "kind": "descendant",
                "statement": self.describe(g),
                "node": g.name(*node),
                "of": g.name(*of),
            }),
            Witness::DConnected {
                from,
                to,
                given,
                path,
            } => json!({
                "kind": "d_connection",
                "statement": self.describe(g),
                "from": g.set_names(from),
                "to": g.set_names(to),
                "given": g.set_names(given),
                "path": path.as_ref().map(path_json),
            }),
            Witness::Vacuous => json!({"kind": "vacuous", "statement": "vacuous"}),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub pass: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VasReport {
    pub valid: bool,
    pub adjustment: AdjustmentSet,
    pub criteria: [CriterionResult; 4],
}

impl VasReport {
    pub fn to_json(&self, g: &Dag) -> Value {
        json!({
            "valid": self.valid,
            "adjustment": self.adjustment.names(g),
            "z1": g.set_names(&self.adjustment.z1),
            "z2": g.set_names(&self.adjustment.z2),
            "criteria": self.criteria.iter().map(|c| json!({
                "id": c.id,
                "pass": c.pass,
                "witness": c.witness.as_ref().map(|w| w.to_json(g)),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Evaluate criterion 2 given `Z ∖ {m}` instead of `(Z ∪ {A}) ∖ {m}`.
    pub literal_criterion2: bool,
}

/// Precomputed path lists for one `(g, q)`, reused across candidate sets.
pub struct VasChecker<'g> {
    g: &'g Dag,
    q: QuerySpec,
    opts: CheckOptions,
    meds: MediatorSets,
    desc_a: VertexSet,
    backdoor_ay: Vec<Path>,
    backdoor_my: Vec<(NodeId, Vec<Path>)>,
    mediator_ay: Vec<Path>,
    rest_of_pa_y: VertexSet,
}

impl<'g> VasChecker<'g> {
    pub fn new(g: &'g Dag, q: &QuerySpec, opts: CheckOptions) -> Result<Self> {
        q.check_in(g)?;
        let meds = mediator_sets(g, q)?;
        let backdoor_my = meds
            .m
            .iter()
            .map(|m| Ok((m, separation::backdoor_paths(g, m, q.outcome)?)))
            .collect::<Result<Vec<_>>>()?;
        let rest_of_pa_y = g.parents(q.outcome)?.difference(&meds.m_prime);
        Ok(Self {
            g,
            q: *q,
            opts,
            desc_a: g.descendants(q.exposure)?.union(&g.descendants(q.outcome)?),
            backdoor_ay: separation::backdoor_paths(g, q.exposure, q.outcome)?,
            mediator_ay: separation::mediator_paths(g, q.exposure, q.outcome)?,
            backdoor_my,
            meds,
            rest_of_pa_y,
        })
    }

    pub fn mediators(&self) -> &MediatorSets {
        &self.meds
    }

    pub fn check(&self, z: &VertexSet) -> Result<VasReport> {
        let g = self.g;
        for v in [self.q.exposure, self.q.outcome] {
            if z.contains(v) {
                return Err(Error::ContainsEndpoint(g.name(v).to_string()));
            }
        }
        let adj = AdjustmentSet {
            z: z.clone(),
            z1: z.intersection(&self.meds.m),
            z2: z.difference(&self.meds.m),
        };
        let blocked = |p: &Path, cond: &VertexSet| separation::is_path_blocked(g, p, cond);

        let mut c1 = None;
        if let Some(d) = adj.z2.first_common(&self.desc_a) {
            c1 = Some(Witness::Descendant {
                node: d,
                of: self.q.exposure,
            });
        } else {
            for p in &self.backdoor_ay {
                if !blocked(p, z)? {
                    c1 = Some(Witness::OpenPath(p.clone()));
                    break;
                }
            }
        }

        let mut c2 = None;
        'outer: for (m, paths) in &self.backdoor_my {
            let cond = if self.opts.literal_criterion2 {
                z.without(*m)
            } else {
                z.with(self.q.exposure).without(*m)
            };
            for p in paths {
                if !blocked(p, &cond)? {
                    c2 = Some(Witness::OpenPath(p.clone()));
                    break 'outer;
                }
            }
        }

        let c3 = self
            .mediator_ay
            .iter()
            .find(|p| !separation::is_mediator_path_blocked(p, z))
            .map(|p| Witness::OpenPath(p.clone()));

        let w = self.meds.m_prime.difference(&adj.z1);
        let c4 = if w.is_empty() || self.rest_of_pa_y.is_empty() {
            CriterionResult {
                id: 4,
                pass: true,
                witness: Some(Witness::Vacuous),
            }
        } else if separation::is_d_separated(g, &w, &self.rest_of_pa_y, &adj.z1)? {
            CriterionResult {
                id: 4,
                pass: true,
                witness: None,
            }
        } else {
            let path = separation::first_open_path(g, &w, &self.rest_of_pa_y, &adj.z1)?;
            CriterionResult {
                id: 4,
                pass: false,
                witness: Some(Witness::DConnected {
                    from: w,
                    to: self.rest_of_pa_y.clone(),
                    given: adj.z1.clone(),
                    path,
                }),
            }
        };

        let fail = |id, w: Option<Witness>| CriterionResult {
            id,
            pass: w.is_none(),
            witness: w,
        };
        let criteria = [fail(1, c1), fail(2, c2), fail(3, c3), c4];
        Ok(VasReport {
            valid: criteria.iter().all(|c| c.pass),
            adjustment: adj,
            criteria,
        })
    }
}

pub fn check_vas(g: &Dag, q: &QuerySpec, z: &VertexSet) -> Result<VasReport> {
    check_vas_with(g, q, z, CheckOptions::default())
}

pub fn check_vas_with(
    g: &Dag,
    q: &QuerySpec,
    z: &VertexSet,
    opts: CheckOptions,
) -> Result<VasReport> {
    VasChecker::new(g, q, opts)?.check(z)
}

/// All valid adjustment sets, ordered by size and then lexicographically by
/// vertex index.
pub fn enumerate_vas(
    g: &Dag,
    q: &QuerySpec,
    max_size: Option<usize>,
) -> Result<Vec<AdjustmentSet>> {
    enumerate_vas_with(g, q, max_size, CheckOptions::default())
}

pub fn enumerate_vas_with(
    g: &Dag,
    q: &QuerySpec,
    max_size: Option<usize>,
    opts: CheckOptions,
) -> Result<Vec<AdjustmentSet>> {
    let checker = VasChecker::new(g, q, opts)?;
    let cand: Vec<NodeId> = g
        .nodes()
        .filter(|&v| v != q.exposure && v != q.outcome)
        .collect();
    if cand.len() > MAX_ENUMERATION_VERTICES {
        return Err(Error::TooManyVertices(cand.len(), MAX_ENUMERATION_VERTICES));
    }
    let top = max_size.unwrap_or(cand.len()).min(cand.len());
    let mut out = Vec::new();
    for k in 0..=top {
        for combo in Combinations::new(cand.len(), k) {
            let z: VertexSet = combo.iter().map(|&i| cand[i]).collect();
            let report = checker.check(&z)?;
            if report.valid {
                out.push(report.adjustment);
            }
        }
    }
    Ok(out)
}

/// k-subsets of `0..n` in lexicographic order.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn fig1() -> (Dag, QuerySpec) {
        let g = fixtures::figure1_dag();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        (g, q)
    }

    #[test]
    fn combinations_are_lexicographic() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn split_examples() {
        let (g, q) = fig1();
        let adj = split_adjustment(&g, &q, &g.set(&["B1", "G2"]).unwrap()).unwrap();
        assert_eq!(adj.z1, g.set(&["B1"]).unwrap());
        assert_eq!(adj.z2, g.set(&["G2"]).unwrap());
        let adj = split_adjustment(&g, &q, &g.set(&["G1", "G2"]).unwrap()).unwrap();
        assert_eq!(adj.z1, g.set(&["G1"]).unwrap());
        assert_eq!(adj.z2, g.set(&["G2"]).unwrap());
        let adj = split_adjustment(&g, &q, &VertexSet::new()).unwrap();
        assert!(adj.z1.is_empty() && adj.z2.is_empty());
        assert!(matches!(
            split_adjustment(&g, &q, &g.set(&["A"]).unwrap()),
            Err(Error::ContainsEndpoint(_))
        ));
    }

    #[test]
    fn figure1_reports() {
        let (g, q) = fig1();
        for z in [&["G1", "G2"][..], &["B1", "G1", "G2"]] {
            let r = check_vas(&g, &q, &g.set(z).unwrap()).unwrap();
            assert!(r.valid, "{z:?}");
        }
        let r = check_vas(&g, &q, &g.set(&["B1", "G2"]).unwrap()).unwrap();
        assert!(!r.valid);
        assert!(r.criteria[..3].iter().all(|c| c.pass));
        match &r.criteria[3].witness {
            Some(Witness::DConnected {
                from,
                to,
                given,
                path,
            }) => {
                assert_eq!(*from, g.set(&["G1"]).unwrap());
                assert_eq!(*to, g.set(&["A", "G2"]).unwrap());
                assert_eq!(*given, g.set(&["B1"]).unwrap());
                let p = path.as_ref().unwrap();
                assert!(!separation::is_path_blocked(&g, p, given).unwrap());
            }
            w => panic!("unexpected witness {w:?}"),
        }

        let r = check_vas(&g, &q, &g.set(&["G2"]).unwrap()).unwrap();
        assert!(!r.criteria[2].pass);
        match &r.criteria[2].witness {
            Some(Witness::OpenPath(p)) => assert_eq!(p.render(&g), "A -> B1 -> G1 -> Y"),
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn literal_criterion2_rejects_example_set() {
        let (g, q) = fig1();
        let opts = CheckOptions {
            literal_criterion2: true,
        };
        let r = check_vas_with(&g, &q, &g.set(&["G1", "G2"]).unwrap(), opts).unwrap();
        assert!(!r.criteria[1].pass);
        match &r.criteria[1].witness {
            Some(Witness::OpenPath(p)) => assert_eq!(p.render(&g), "B1 <- A -> Y"),
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn descendant_of_exposure_is_rejected() {
        // A -> D with D outside every A-Y route; D <- U -> Y makes it matter
        let g = Dag::build(
            &["A", "Y", "D", "U"],
            &[("A", "Y"), ("A", "D"), ("U", "D"), ("U", "Y")],
        )
        .unwrap();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let r = check_vas(&g, &q, &g.set(&["D"]).unwrap()).unwrap();
        assert!(!r.valid);
        assert_eq!(
            r.criteria[0].witness,
            Some(Witness::Descendant {
                node: g.id("D").unwrap(),
                of: g.id("A").unwrap()
            })
        );
    }

    #[test]
    fn enumerate_examples() {
        let (g, q) = fig1();
        let sets: Vec<Vec<String>> = enumerate_vas(&g, &q, None)
            .unwrap()
            .iter()
            .map(|a| a.names(&g))
            .collect();
        assert!(sets.contains(&vec!["G1".into(), "G2".into()]));
        assert!(sets.contains(&vec!["B1".into(), "G1".into(), "G2".into()]));
        assert!(!sets.contains(&vec!["B1".into(), "G2".into()]));

        let g = Dag::build(&["A", "Y"], &[("A", "Y")]).unwrap();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let sets = enumerate_vas(&g, &q, None).unwrap();
        assert_eq!(sets.len(), 1);
        assert!(sets[0].z.is_empty());

        let g = fixtures::figure4_dag();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let sets: Vec<Vec<String>> = enumerate_vas(&g, &q, None)
            .unwrap()
            .iter()
            .map(|a| a.names(&g))
            .collect();
        assert!(sets.contains(&vec!["B1".into(), "G2".into()]));
        assert!(sets.contains(&vec!["B1".into(), "G1".into(), "G2".into()]));
    }

    #[test]
    fn enumeration_order_and_cap() {
        let (g, q) = fig1();
        let sets = enumerate_vas(&g, &q, None).unwrap();
        for w in sets.windows(2) {
            assert!(
                w[0].z.len() < w[1].z.len() || (w[0].z.len() == w[1].z.len() && w[0].z < w[1].z)
            );
        }
        let capped = enumerate_vas(&g, &q, Some(2)).unwrap();
        assert!(capped.iter().all(|a| a.z.len() <= 2));

        let names: Vec<String> = (0..23).map(|i| format!("V{i}")).collect();
        let big = Dag::build(&names, &[]).unwrap();
        let q = QuerySpec::new(NodeId(0), NodeId(1), 1.0, 0.0).unwrap();
        assert_eq!(
            enumerate_vas(&big, &q, None).unwrap_err(),
            Error::TooManyVertices(21, MAX_ENUMERATION_VERTICES)
        );
    }

    #[test]
    fn query_validation() {
        let g = fixtures::figure1_dag();
        let a = g.id("A").unwrap();
        assert_eq!(QuerySpec::new(a, a, 1.0, 0.0), Err(Error::SameEndpoints));
        assert_eq!(
            QuerySpec::new(a, g.id("Y").unwrap(), 1.0, 1.0),
            Err(Error::SameLevels)
        );
    }

    #[test]
    fn json_shape() {
        let (g, q) = fig1();
        let r = check_vas(&g, &q, &g.set(&["B1", "G2"]).unwrap()).unwrap();
        let v = r.to_json(&g);
        assert_eq!(v["valid"], false);
        let crit = v["criteria"].as_array().unwrap();
        assert_eq!(crit.len(), 4);
        for (i, c) in crit.iter().enumerate() {
            assert_eq!(c["id"], i as u64 + 1);
            assert!(c.get("pass").is_some() && c.get("witness").is_some());
        }
        assert_eq!(crit[3]["witness"]["kind"], "d_connection");
    }
}
