#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use tripcsp::plan::{parse_plan, plan_from_json};
use tripcsp::{load_dataset, Assignment, Sandbox, StructuredQuery};

pub fn fixture_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn sandbox(name: &str) -> Sandbox {
    load_dataset(fixture_dir(name)).expect("fixture dataset loads")
}

pub fn query(name: &str) -> StructuredQuery {
    let text = std::fs::read_to_string(fixture_dir(name).join("query.json")).unwrap();
    let q: StructuredQuery = serde_json::from_str(&text).unwrap();
    q.validate().unwrap();
    q
}

pub fn plan(name: &str, file: &str) -> Assignment {
    let text = std::fs::read_to_string(fixture_dir(name).join(file)).unwrap();
    parse_plan(&plan_from_json(&text).unwrap()).unwrap()
}
