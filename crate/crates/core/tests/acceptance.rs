//! Acceptance checks: one line per criterion, nonzero exit if any fails.
//! Raw Monte Carlo tables are written under the cargo target tmpdir.

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wcde::adjustment::{check_vas, enumerate_vas, split_adjustment, QuerySpec, Witness};
use wcde::estimators::{
    fit_nuisances, fit_nuisances_weighted, one_step_estimate, weighted_if_means, Family,
};
use wcde::experiment::{
    compare, ordering_check, run_replications, ExperimentConfig, VarianceTable,
};
use wcde::fixtures;
use wcde::gen::{random_binary_scm, random_dag, random_query};
use wcde::graph::{Dag, NodeId, VertexSet};
use wcde::scm::{DiscreteScm, Scm};
use wcde::separation::{is_d_separated, is_d_separated_by_paths};
use wcde::taxonomy::oset;

type Outcome = Result<String, String>;

fn out_dir() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn query(g: &Dag) -> QuerySpec {
    QuerySpec::by_name(g, "A", "Y").unwrap()
}

fn figure1_criteria() -> Outcome {
    let g = fixtures::figure1_dag();
    let q = query(&g);
    let set = |names: &[&str]| g.set(names).unwrap();
    let good = check_vas(&g, &q, &set(&["G1", "G2"])).map_err(|e| e.to_string())?;
    let also = check_vas(&g, &q, &set(&["B1", "G1", "G2"])).map_err(|e| e.to_string())?;
    let bad = check_vas(&g, &q, &set(&["B1", "G2"])).map_err(|e| e.to_string())?;
    let c4 = &bad.criteria[3];
    let witness = match &c4.witness {
        Some(w @ Witness::DConnected { .. }) => w.describe(&g),
        other => return Err(format!("criterion 4 witness {other:?}")),
    };
    let first_three = bad.criteria[..3].iter().all(|c| c.pass);
    ensure(
        good.valid && also.valid && !bad.valid && first_three && !c4.pass,
        format!("{{B1,G2}} fails criterion 4: {witness}"),
    )
}

fn random_model(rng: &mut ChaCha8Rng) -> (DiscreteScm, QuerySpec) {
    loop {
        let n = rng.gen_range(5..=8);
        let p = rng.gen_range(0.25..0.6);
        let g = random_dag(rng, n, p);
        if let Some(q) = random_query(rng, &g) {
            return (random_binary_scm(rng, &g, 0.1, 0.9), q);
        }
    }
}

fn identification_uniqueness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let models: Vec<_> = (0..100).map(|_| random_model(&mut rng)).collect();
    let results: Vec<(usize, f64)> = models
        .par_iter()
        .map(|(scm, q)| {
            let truth = scm.true_wcde(q).unwrap();
            let sets = enumerate_vas(scm.dag(), q, None).unwrap();
            let worst = sets
                .iter()
                .map(|adj| (scm.population_wcde_z(q, adj).unwrap() - truth).abs())
                .fold(0.0, f64::max);
            (sets.len(), worst)
        })
        .collect();
    let sets: usize = results.iter().map(|r| r.0).sum();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    ensure(
        worst <= 1e-9 && sets > 0,
        format!("100 models, {sets} sets, max |diff| {worst:.2e}"),
    )
}

fn necessity_fixture() -> Outcome {
    let scm = fixtures::figure1_adversarial_scm();
    let g = scm.dag();
    let q = query(g);
    let truth = scm.true_wcde(&q).map_err(|e| e.to_string())?;
    let bad = split_adjustment(g, &q, &g.set(&["B1", "G2"]).unwrap()).unwrap();
    let gap = (scm.population_wcde_z(&q, &bad).unwrap() - truth).abs();
    let spread = enumerate_vas(g, &q, None)
        .unwrap()
        .iter()
        .map(|adj| (scm.population_wcde_z(&q, adj).unwrap() - truth).abs())
        .fold(0.0, f64::max);
    ensure(
        gap > 0.01 && spread <= 1e-9,
        format!("gap {gap:.4}, valid sets within {spread:.1e}"),
    )
}

fn if_mean_zero() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, scm) in fixtures::discrete_fixtures() {
        let g = scm.dag();
        let q = query(g);
        let (data, w) = scm.joint_dataset().unwrap();
        for adj in enumerate_vas(g, &q, None).unwrap() {
            let nuis = fit_nuisances_weighted(&data, Some(&w), g, &q, &adj, Family::DiscreteCells)
                .unwrap();
            let m = weighted_if_means(&data, &w, g, &q, &adj, &nuis).unwrap();
            worst = worst.max(m[0].abs()).max(m[1].abs());
            count += 1;
        }
    }
    ensure(
        worst <= 1e-9,
        format!("{count} fixture/set pairs, max |E ψ| {worst:.2e}"),
    )
}

fn simulate(
    name: &str,
    scm: DiscreteScm,
    sets: Vec<VertexSet>,
    n: usize,
    reps: usize,
    seed: u64,
) -> VarianceTable {
    let q = query(scm.dag());
    let cfg = ExperimentConfig::new(Scm::from(scm), q, sets, n, reps, seed);
    let table = run_replications(&cfg).unwrap();
    let path = out_dir().join(format!("{name}.csv"));
    table.write_csv(File::create(&path).unwrap()).unwrap();
    table
}

fn variance_calibration() -> Outcome {
    let scm = fixtures::figure3_scm();
    let o = oset(scm.dag(), &query(scm.dag())).unwrap().set;
    let table = simulate("calibration-figure3", scm, vec![o.clone()], 4000, 1000, 5);
    let row = table.row(&o).unwrap();
    let rel = (row.emp_variance - row.mean_asym_var).abs() / row.mean_asym_var;
    ensure(
        rel <= 0.15,
        format!(
            "n·Var {:.4} vs mean var_hat {:.4} ({:.1}%)",
            row.emp_variance,
            row.mean_asym_var,
            100.0 * rel
        ),
    )
}

/// All enumerated sets for one figure, simulated once and shared by the
/// ordering and optimality checks.
fn figure_table(name: &str, scm: DiscreteScm, seed: u64) -> VarianceTable {
    let g = scm.dag().clone();
    let sets = enumerate_vas(&g, &query(&g), None)
        .unwrap()
        .into_iter()
        .map(|a| a.z)
        .collect();
    simulate(name, scm, sets, 2000, 1000, seed)
}

fn add_delete_orderings(f3: &VarianceTable, f3g: &Dag, f4: &VarianceTable, f4g: &Dag) -> Outcome {
    let s = |g: &Dag, names: &[&str]| g.set(names).unwrap();
    let checks = [
        (
            "add G2",
            f3,
            s(f3g, &["B2", "G1", "G2"]),
            s(f3g, &["B2", "G1"]),
        ),
        (
            "delete B2",
            f3,
            s(f3g, &["G1", "G2"]),
            s(f3g, &["B2", "G1", "G2"]),
        ),
        (
            "add G1",
            f4,
            s(f4g, &["B1", "G1", "G2"]),
            s(f4g, &["B1", "G2"]),
        ),
        (
            "delete B1",
            f4,
            s(f4g, &["G1", "G2"]),
            s(f4g, &["B1", "G1", "G2"]),
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, table, lower, other) in checks {
        let c = compare(table, &lower, &other).map_err(|e| e.to_string())?;
        ok &= c.holds;
        parts.push(format!(
            "{label} {:.3}≤{:.3}±{:.3}",
            c.lower_var,
            c.other_var,
            2.0 * c.combined_mcse
        ));
    }
    ensure(ok, parts.join("; "))
}

fn oset_optimality(tables: &[(&str, &VarianceTable, &Dag)]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, table, g) in tables {
        let o = oset(g, &query(g)).unwrap().set;
        let r = ordering_check(table, &o).map_err(|e| e.to_string())?;
        ok &= r.pass && !r.comparisons.is_empty();
        let bad = if r.violations.is_empty() {
            String::new()
        } else {
            format!(" violations {:?}", r.violations)
        };
        parts.push(format!(
            "{name}: O-set vs {} sets{bad}",
            r.comparisons.len()
        ));
    }
    ensure(ok, parts.join("; "))
}

fn linear_consistency() -> Outcome {
    let scm = Scm::from(fixtures::linear_interaction_scm());
    let g = scm.dag().clone();
    let q = query(&g);
    let truth = scm.true_wcde(&q).unwrap();
    let adj = split_adjustment(&g, &q, &oset(&g, &q).unwrap().set).unwrap();
    let hits = (0..20u64)
        .into_par_iter()
        .filter(|&s| {
            let data = scm.sample(20_000, 1000 + s).unwrap();
            let nuis = fit_nuisances(&data, &g, &q, &adj, Family::linear()).unwrap();
            let r = one_step_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            (r.wcde - truth).abs() <= 3.0 * r.se
        })
        .count();
    ensure(hits >= 18, format!("{hits}/20 runs within 3 SE of {truth}"))
}

fn dsep_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dags: Vec<(Dag, u64)> = (0..500)
        .map(|_| {
            let n = rng.gen_range(3..=10);
            let p = rng.gen_range(0.1..0.6);
            (random_dag(&mut rng, n, p), rng.gen())
        })
        .collect();
    let (queries, mismatches) = dags
        .par_iter()
        .map(|(g, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut mismatches = 0;
            for _ in 0..25 {
                let mut ids: Vec<NodeId> = g.nodes().collect();
                ids.shuffle(&mut rng);
                let nx = rng.gen_range(1..=ids.len() - 2);
                let ny = rng.gen_range(1..=ids.len() - nx - 1);
                let x: VertexSet = ids[..nx].iter().copied().collect();
                let y: VertexSet = ids[nx..nx + ny].iter().copied().collect();
                let z: VertexSet = ids[nx + ny..]
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.5))
                    .collect();
                if is_d_separated(g, &x, &y, &z).unwrap()
                    != is_d_separated_by_paths(g, &x, &y, &z).unwrap()
                {
                    mismatches += 1;
                }
            }
            (25usize, mismatches)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    ensure(
        mismatches == 0 && queries >= 10_000,
        format!("{queries} queries over 500 DAGs, {mismatches} disagreements"),
    )
}

fn oset_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checked = 0;
    let mut failures = 0;
    while checked < 500 {
        let n = rng.gen_range(3..=10);
        let p = rng.gen_range(0.15..0.6);
        let g = random_dag(&mut rng, n, p);
        let Some(q) = random_query(&mut rng, &g) else {
            continue;
        };
        let o = oset(&g, &q).unwrap();
        let expected = g.parents(q.outcome).unwrap().without(q.exposure);
        if o.set != expected || !check_vas(&g, &q, &o.set).unwrap().valid {
            failures += 1;
        }
        checked += 1;
    }
    ensure(
        failures == 0,
        format!("{checked} DAGs, {failures} failures"),
    )
}

struct Line {
    id: u8,
    name: &'static str,
    outcome: Outcome,
    elapsed: Duration,
    budget: Duration,
}

fn timed(id: u8, name: &'static str, budget_secs: u64, f: impl FnOnce() -> Outcome) -> Line {
    let start = Instant::now();
    let outcome = f();
    Line {
        id,
        name,
        outcome,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_secs),
    }
}

fn main() -> ExitCode {
    let mut lines = vec![
        timed(1, "four-criterion check on figure 1", 1, figure1_criteria),
        timed(
            2,
            "identification uniqueness",
            300,
            identification_uniqueness,
        ),
        timed(3, "necessity fixture", 1, necessity_fixture),
        timed(4, "influence function mean zero", 10, if_mean_zero),
        timed(5, "variance calibration", 120, variance_calibration),
    ];

    // criteria 6 and 7 share one simulation per figure
    let start = Instant::now();
    let (f1, f3, f4) = (
        fixtures::figure1_scm(),
        fixtures::figure3_scm(),
        fixtures::figure4_scm(),
    );
    let (g1, g3, g4) = (f1.dag().clone(), f3.dag().clone(), f4.dag().clone());
    let t1 = figure_table("figure1", f1, 61);
    let t3 = figure_table("figure3", f3, 63);
    let t4 = figure_table("figure4", f4, 64);
    let shared = start.elapsed();
    let mut six = timed(6, "add/delete variance orderings", 600, || {
        add_delete_orderings(&t3, &g3, &t4, &g4)
    });
    six.elapsed += shared;
    lines.push(six);
    let mut seven = timed(7, "O-set optimality", 600, || {
        oset_optimality(&[
            ("figure1", &t1, &g1),
            ("figure3", &t3, &g3),
            ("figure4", &t4, &g4),
        ])
    });
    seven.elapsed += shared;
    lines.push(seven);

    lines.push(timed(
        8,
        "linear estimator consistency",
        120,
        linear_consistency,
    ));
    lines.push(timed(
        9,
        "d-separation oracle equivalence",
        60,
        dsep_equivalence,
    ));
    lines.push(timed(10, "O-set identity", 60, oset_identity));

    let mut failed = 0;
    for l in &lines {
        let in_time = l.elapsed <= l.budget;
        let (ok, detail) = match &l.outcome {
            Ok(d) => (in_time, d.clone()),
            Err(d) => (false, d.clone()),
        };
        let late = if in_time {
            String::new()
        } else {
            format!(", over {}s budget", l.budget.as_secs())
        };
        println!(
            "{} {:>2} {:<32} {} [{:.2}s{}]",
            if ok { "PASS" } else { "FAIL" },
            l.id,
            l.name,
            detail,
            l.elapsed.as_secs_f64(),
            late
        );
        failed += usize::from(!ok);
    }
    println!("raw tables: {}", out_dir().display());
    println!(
        "{} of {} criteria passed",
        lines.len() - failed,
        lines.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
