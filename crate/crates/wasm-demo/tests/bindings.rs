use serde_json::Value;
use wcde_wasm::{analyze_json, check_json, dsep_json, presets_json};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn figure1() -> String {
    wcde::fixtures::figure1_dag().to_string()
}

#[test]
fn analyze_lists_sets_and_marks_the_oset() {
    let v = parse(&analyze_json(&figure1(), "A", "Y").unwrap());
    assert_eq!(v["oset"], serde_json::json!(["G1", "G2"]));
    assert_eq!(v["mediators"], serde_json::json!(["B1", "G1"]));
    assert_eq!(v["mediator_parents"], serde_json::json!(["G1"]));
    assert_eq!(v["partition"]["G2"], "X1");
    let sets = v["valid_sets"].as_array().unwrap();
    assert_eq!(sets.len(), 2);
    assert_eq!(sets.iter().filter(|s| s["optimal"] == true).count(), 1);
}

#[test]
fn check_matches_library_report() {
    let v = parse(&check_json(&figure1(), "A", "Y", "B1, G2").unwrap());
    assert_eq!(v["valid"], false);
    assert_eq!(v["criteria"][3]["pass"], false);
    let v = parse(&check_json(&figure1(), "A", "Y", "G1,G2").unwrap());
    assert_eq!(v["valid"], true);
}

#[test]
fn dsep_reports_open_path() {
    let v = parse(&dsep_json("A -> C\nB -> C\n", "A", "B", "").unwrap());
    assert_eq!(v["separated"], true);
    assert!(v["path"].is_null());
    let v = parse(&dsep_json("A -> C\nB -> C\n", "A", "B", "C").unwrap());
    assert_eq!(v["separated"], false);
    assert_eq!(v["path"], "A -> C <- B");
}

#[test]
fn bad_input_is_an_error() {
    assert!(check_json(&figure1(), "A", "Y", "Q").is_err());
    assert!(analyze_json("A -> B\nB -> A\n", "A", "B").is_err());
    assert!(dsep_json("A -> B", "A", "Z", "").is_err());
}

#[test]
fn presets_parse_back_to_fixtures() {
    let v = parse(&presets_json());
    for (name, dag) in [
        ("figure1", wcde::fixtures::figure1_dag()),
        ("figure3", wcde::fixtures::figure3_dag()),
        ("figure4", wcde::fixtures::figure4_dag()),
    ] {
        assert_eq!(wcde::io::parse_dag(v[name].as_str().unwrap()).unwrap(), dag);
    }
}
