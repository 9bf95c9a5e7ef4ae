use std::collections::HashMap;

use rayon::prelude::*;
use wcde::adjustment::{enumerate_vas, split_adjustment, QuerySpec};
use wcde::estimators::{
    fit_nuisances, fit_nuisances_weighted, one_step_estimate, plugin_estimate, weighted_if_means,
    Family, LinearOptions, Method,
};
use wcde::fixtures;
use wcde::graph::VertexSet;
use wcde::scm::{LinearNode, LinearScm, Scm};
use wcde::taxonomy::oset;

#[test]
fn influence_function_is_mean_zero_on_every_fixture() {
    for (name, scm) in fixtures::discrete_fixtures() {
        let g = scm.dag();
        let q = QuerySpec::by_name(g, "A", "Y").unwrap();
        let (data, w) = scm.joint_dataset().unwrap();
        for adj in enumerate_vas(g, &q, None).unwrap() {
            let nuis = fit_nuisances_weighted(&data, Some(&w), g, &q, &adj, Family::DiscreteCells)
                .unwrap();
            let means = weighted_if_means(&data, &w, g, &q, &adj, &nuis).unwrap();
            for m in means {
                assert!(m.abs() <= 1e-9, "{name} {}: {m:e}", adj.label(g));
            }
        }
    }
}

#[test]
fn population_plugin_matches_exact_functional() {
    for (name, scm) in fixtures::discrete_fixtures() {
        let g = scm.dag();
        let q = QuerySpec::by_name(g, "A", "Y").unwrap();
        let (data, w) = scm.joint_dataset().unwrap();
        for adj in enumerate_vas(g, &q, None).unwrap() {
            let nuis = fit_nuisances_weighted(&data, Some(&w), g, &q, &adj, Family::DiscreteCells)
                .unwrap();
            let exact = scm.population_wcde_z(&q, &adj).unwrap();
            assert!(
                (nuis.t[0] - nuis.t[1] - exact).abs() <= 1e-9,
                "{name} {}",
                adj.label(g)
            );
        }
    }
}

#[test]
fn fitted_outcome_means_approach_exact_conditionals() {
    let scm = fixtures::figure1_scm();
    let g = scm.dag();
    let q = QuerySpec::by_name(g, "A", "Y").unwrap();
    let z = g.set(&["G1", "G2"]).unwrap();
    let adj = split_adjustment(g, &q, &z).unwrap();
    let data = Scm::from(scm.clone()).sample(50_000, 1).unwrap();
    let nuis = fit_nuisances(&data, g, &q, &adj, Family::DiscreteCells).unwrap();

    // E[Y | A, G1, G2] straight from the joint table
    let (a, g1, g2, y) = (
        g.id("A").unwrap().0,
        g.id("G1").unwrap().0,
        g.id("G2").unwrap().0,
        g.id("Y").unwrap().0,
    );
    let mut acc: HashMap<[usize; 3], (f64, f64)> = HashMap::new();
    for (s, p) in scm.joint_distribution().unwrap().iter() {
        let e = acc.entry([s[a], s[g1], s[g2]]).or_default();
        e.0 += p * s[y] as f64;
        e.1 += p;
    }
    assert_eq!(acc.len(), 8);
    for ([av, z1, z2], (num, den)) in acc {
        let fitted = nuis
            .outcome_mean(av as f64, &[z1 as f64], &[z2 as f64])
            .unwrap();
        let exact = num / den;
        assert!(
            (fitted - exact).abs() < 0.02,
            "A={av} G1={z1} G2={z2}: {fitted} vs {exact}"
        );
    }
}

#[test]
fn discrete_estimates_cover_truth() {
    for (name, scm) in [
        ("figure1", fixtures::figure1_scm()),
        ("figure3", fixtures::figure3_scm()),
    ] {
        let g = scm.dag().clone();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let truth = scm.true_wcde(&q).unwrap();
        let adj = split_adjustment(&g, &q, &oset(&g, &q).unwrap().set).unwrap();
        let model = Scm::from(scm);
        let hits = (0..20u64)
            .into_par_iter()
            .filter(|&s| {
                let data = model.sample(20_000, 100 + s).unwrap();
                let nuis = fit_nuisances(&data, &g, &q, &adj, Family::DiscreteCells).unwrap();
                let r = one_step_estimate(&data, &g, &q, &adj, &nuis).unwrap();
                (r.wcde - truth).abs() <= 3.0 * r.se
            })
            .count();
        assert!(hits >= 18, "{name}: {hits}/20");
    }
}

#[test]
fn saturated_plugin_and_one_step_coincide() {
    for (name, scm) in fixtures::discrete_fixtures() {
        let g = scm.dag().clone();
        let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
        let data = Scm::from(scm).sample(3_000, 5).unwrap();
        for adj in enumerate_vas(&g, &q, None).unwrap() {
            let nuis = fit_nuisances(&data, &g, &q, &adj, Family::DiscreteCells).unwrap();
            let p = plugin_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            let o = one_step_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            assert!((p.wcde - o.wcde).abs() <= 1e-12, "{name} {}", adj.label(&g));
            assert_eq!(p.var_hat, o.var_hat);
        }
    }
}

#[test]
fn swapping_levels_negates_estimates() {
    let scm = fixtures::figure4_scm();
    let g = scm.dag().clone();
    let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
    let data = Scm::from(scm.clone()).sample(4_000, 9).unwrap();
    for adj in enumerate_vas(&g, &q, None).unwrap() {
        for method in [Method::PlugIn, Method::OneStep] {
            let fwd =
                wcde::estimators::estimate(&data, &g, &q, &adj, Family::DiscreteCells, method)
                    .unwrap();
            let back = wcde::estimators::estimate(
                &data,
                &g,
                &q.swapped(),
                &adj,
                Family::DiscreteCells,
                method,
            )
            .unwrap();
            assert_eq!(fwd.wcde, -back.wcde);
            assert_eq!(fwd.var_hat, back.var_hat);
        }
        let pop = scm.population_wcde_z(&q, &adj).unwrap();
        assert_eq!(pop, -scm.population_wcde_z(&q.swapped(), &adj).unwrap());
    }
}

#[test]
fn linear_truth_matches_simulated_intervention() {
    let scm = Scm::from(fixtures::linear_interaction_scm());
    let q = QuerySpec::by_name(scm.dag(), "A", "Y").unwrap();
    let truth = scm.true_wcde(&q).unwrap();
    let (est, se) = scm.monte_carlo_wcde(&q, 1_000_000, 3).unwrap();
    assert!((est - truth).abs() <= 3.0 * se, "{est} ± {se} vs {truth}");
}

#[test]
fn linear_estimates_cover_truth() {
    let scm = Scm::from(fixtures::linear_interaction_scm());
    let g = scm.dag().clone();
    let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
    let truth = scm.true_wcde(&q).unwrap();
    let adj = split_adjustment(&g, &q, &oset(&g, &q).unwrap().set).unwrap();
    let covered: Vec<[bool; 2]> = (0..20u64)
        .into_par_iter()
        .map(|s| {
            let data = scm.sample(20_000, 300 + s).unwrap();
            let nuis = fit_nuisances(&data, &g, &q, &adj, Family::linear()).unwrap();
            let p = plugin_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            let o = one_step_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            [
                (p.wcde - truth).abs() <= 3.0 * p.se,
                (o.wcde - truth).abs() <= 3.0 * o.se,
            ]
        })
        .collect();
    for k in 0..2 {
        let hits = covered.iter().filter(|c| c[k]).count();
        assert!(hits >= 18, "method {k}: {hits}/20");
    }
}

#[test]
fn one_step_corrects_misspecified_outcome_model() {
    // With P(A=1) = 1/2 the additive fit happens to recover the weighted
    // effect, so the exposure is made unbalanced here.
    let nodes = vec![
        LinearNode::new("C", &[], 0.0, 1.0),
        LinearNode::new("A", &[("C", 0.8)], 0.8, 1.0).binary(),
        LinearNode::new("M", &[("A", 1.0), ("C", 0.6)], 0.5, 1.0),
        LinearNode::new("Y", &[("A", 1.5), ("M", 0.8), ("C", 0.7)], 1.0, 1.0),
    ];
    let scm = Scm::from(LinearScm::new(nodes, Some("Y"), &[("A", "M", 0.5)]).unwrap());
    let g = scm.dag().clone();
    let q = QuerySpec::by_name(&g, "A", "Y").unwrap();
    let truth = scm.true_wcde(&q).unwrap();
    let adj = split_adjustment(&g, &q, &oset(&g, &q).unwrap().set).unwrap();
    let family = Family::LinearBasis(LinearOptions {
        exposure_interactions: false,
        ..LinearOptions::default()
    });
    let reps = 200;
    let est: Vec<(f64, f64)> = (1..=reps as u64)
        .into_par_iter()
        .map(|r| {
            let data = scm.sample_stream(50_000, 77, r).unwrap();
            let nuis = fit_nuisances(&data, &g, &q, &adj, family).unwrap();
            let p = plugin_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            let o = one_step_estimate(&data, &g, &q, &adj, &nuis).unwrap();
            (p.wcde, o.wcde)
        })
        .collect();
    let plugin_bias = (est.iter().map(|e| e.0).sum::<f64>() / reps as f64 - truth).abs();
    let one_step_bias = (est.iter().map(|e| e.1).sum::<f64>() / reps as f64 - truth).abs();
    assert!(
        one_step_bias < plugin_bias,
        "one-step {one_step_bias} vs plug-in {plugin_bias}"
    );
}

#[test]
fn population_functional_is_shared_by_all_valid_sets() {
    for (name, scm) in fixtures::discrete_fixtures() {
        let g = scm.dag();
        let q = QuerySpec::by_name(g, "A", "Y").unwrap();
        let truth = scm.true_wcde(&q).unwrap();
        let sets = enumerate_vas(g, &q, None).unwrap();
        assert!(!sets.is_empty());
        for adj in sets {
            let v = scm.population_wcde_z(&q, &adj).unwrap();
            assert!(
                (v - truth).abs() <= 1e-9,
                "{name} {}: {v} vs {truth}",
                adj.label(g)
            );
        }
    }
}

#[test]
fn invalid_set_is_biased_on_adversarial_fixture() {
    let scm = fixtures::figure1_adversarial_scm();
    let g = scm.dag();
    let q = QuerySpec::by_name(g, "A", "Y").unwrap();
    let bad = g.set(&["B1", "G2"]).unwrap();
    let good: VertexSet = g.set(&["G1", "G2"]).unwrap();
    let report = wcde::experiment::bias_experiment(&scm, &q, &bad, &good, 200_000, 4).unwrap();
    report.require_gap(0.01).unwrap();
    assert!((report.population_valid - report.truth).abs() <= 1e-9);
    // the sampled invalid estimate lands near the biased population value
    assert!((report.estimate_invalid - report.population_invalid).abs() <= 4.0 * report.se_invalid);
    assert!(report.estimator_gap > 4.0 * report.se_invalid);

    let unfaithful = fixtures::figure1_unfaithful_scm();
    let adj = split_adjustment(g, &q, &bad).unwrap();
    let gap = unfaithful.population_wcde_z(&q, &adj).unwrap() - unfaithful.true_wcde(&q).unwrap();
    assert!(gap.abs() <= 1e-9, "{gap:e}");
}
