//! Random search for a Figure 1 model in which adjusting for {B1, G2}
//! gives a large bias. Prints the best CPT vector found; the result is
//! frozen in `fixtures::figure1_adversarial_scm`.
//!
//! cargo run --release -p wcde --example find_adversarial -- [draws] [seed]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wcde::adjustment::{split_adjustment, QuerySpec};
use wcde::scm::{DiscreteNode, DiscreteScm};

fn model(p: &[f64]) -> DiscreteScm {
    DiscreteScm::from_nodes(vec![
        DiscreteNode::binary("A", &["G2"], &p[0..2]),
        DiscreteNode::binary("B1", &["A", "G2"], &p[2..6]),
        DiscreteNode::binary("G1", &["B1", "G2"], &p[6..10]),
        DiscreteNode::binary("G2", &[], &p[10..11]),
        DiscreteNode::binary("Y", &["A", "G1", "G2"], &p[11..19]),
    ])
    .unwrap()
}

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().unwrap())
        .collect();
    let draws = args.first().copied().unwrap_or(20_000);
    let seed = args.get(1).copied().unwrap_or(2024);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (0.0, Vec::new());
    for _ in 0..draws {
        // two decimals keep the frozen table readable
        let p: Vec<f64> = (0..19)
            .map(|_| (rng.gen_range(0.1..0.9f64) * 100.0).round() / 100.0)
            .collect();
        let scm = model(&p);
        let g = scm.dag();
        let q = QuerySpec::by_name(g, "A", "Y").unwrap();
        let adj = split_adjustment(g, &q, &g.set(&["B1", "G2"]).unwrap()).unwrap();
        let gap = (scm.population_wcde_z(&q, &adj).unwrap() - scm.true_wcde(&q).unwrap()).abs();
        if gap > best.0 {
            best = (gap, p);
        }
    }
    println!("gap = {:.6}", best.0);
    println!("{:?}", best.1);
}
