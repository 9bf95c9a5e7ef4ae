//! Writes the fixture graphs and models to `crates/core/data/`.
//!
//! cargo run -p wcde --example export_fixtures

use std::fs;
use std::path::Path;

use wcde::adjustment::QuerySpec;
use wcde::fixtures;
use wcde::io::scm_to_json;
use wcde::scm::Scm;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    fs::create_dir_all(&dir)?;
    for (name, g) in [
        ("figure1", fixtures::figure1_dag()),
        ("figure3", fixtures::figure3_dag()),
        ("figure4", fixtures::figure4_dag()),
    ] {
        fs::write(dir.join(format!("{name}.dag")), g.to_string())?;
    }
    let models: Vec<(&str, Scm)> = vec![
        ("figure1", fixtures::figure1_scm().into()),
        (
            "figure1-adversarial",
            fixtures::figure1_adversarial_scm().into(),
        ),
        (
            "figure1-unfaithful",
            fixtures::figure1_unfaithful_scm().into(),
        ),
        ("figure3", fixtures::figure3_scm().into()),
        ("figure4", fixtures::figure4_scm().into()),
        ("linear", fixtures::linear_interaction_scm().into()),
    ];
    for (name, scm) in models {
        let q = QuerySpec::by_name(scm.dag(), "A", "Y").expect("fixture query");
        fs::write(
            dir.join(format!("{name}.json")),
            scm_to_json(&scm, Some(&q)) + "\n",
        )?;
    }
    Ok(())
}
