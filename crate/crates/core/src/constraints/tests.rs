use std::path::PathBuf;

use super::*;
use crate::csp::{Place, Value};
use crate::plan::{parse_plan, plan_from_json};
use crate::sandbox::load_dataset;

fn fixture(name: &str) -> (DomainSet, StructuredQuery, Assignment) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    let d = DomainSet::from_sandbox(&load_dataset(&dir).unwrap());
    let q = serde_json::from_str(&std::fs::read_to_string(dir.join("query.json")).unwrap()).unwrap();
    let a = parse_plan(&plan_from_json(&std::fs::read_to_string(dir.join("plan.json")).unwrap()).unwrap()).unwrap();
    (d, q, a)
}

#[test]
fn catalogue_has_seven_commonsense_rules() {
    let (_, q, _) = fixture("trip-myrtle-beach");
    let cat = implicit_catalogue(&q);
    assert_eq!(cat.len(), 7);
    assert!(cat.iter().all(|c| c.kind == ConstraintKind::Implicit && c.category == Category::Commonsense));
    assert!(cat.iter().all(|c| !c.scope.is_empty()));
}

#[test]
fn explicit_constraints_are_hard_and_come_first() {
    let (d, q, _) = fixture("trip-hilton-head");
    let set = build_constraints(&q, &d);
    let ids = set.ids();
    assert_eq!(
        ids[..4],
        ["budget", "cuisine:french", "cuisine:italian", "min-nights:hilton head"]
    );
    for c in set.iter() {
        assert_eq!(c.category == Category::Hard, c.kind == ConstraintKind::Explicit, "{}", c.id);
    }
}

#[test]
fn budget_description_uses_plain_amount() {
    let (d, q, _) = fixture("trip-myrtle-beach");
    let set = build_constraints(&q, &d);
    assert_eq!(set.get("budget").unwrap().description, "budget ≤ 1400");
    assert!(set.dump().lines().next().unwrap().starts_with("budget | explicit | hard | budget ≤ 1400"));
}

#[test]
fn empty_prefs_and_domains_give_budget_plus_catalogue() {
    let (_, q, _) = fixture("trip-myrtle-beach");
    let set = build_constraints(&q, &DomainSet::default());
    assert_eq!(set.len(), 8);
    assert_eq!(set.ids()[0], "budget");
}

#[test]
fn build_is_deterministic() {
    let (d, q, _) = fixture("trip-hilton-head");
    assert_eq!(build_constraints(&q, &d).dump(), build_constraints(&q, &d).dump());
}

#[test]
fn query_constraints_survive_domain_growth() {
    let (d, q, _) = fixture("trip-hilton-head");
    let small = build_constraints(&q, &DomainSet::default());
    let big = build_constraints(&q, &d);
    for id in small.ids() {
        assert!(big.get(id).is_some(), "{id} dropped");
    }
}

#[test]
fn repeated_restaurant_is_a_single_commonsense_failure() {
    let (d, q, mut a) = fixture("trip-myrtle-beach");
    a.set(SlotId::new(2, SlotKind::Dinner), Value::Restaurant(Place::new("First Eat", "Myrtle Beach")));
    let set = build_constraints(&q, &d);
    let ids: Vec<_> = evaluate_all(&set, &a, &d, &q).into_iter().map(|v| v.constraint_id).collect();
    assert_eq!(ids, vec!["no-repeated-restaurants"]);
}

#[test]
fn hallucinated_stay_is_flagged() {
    let (d, q, mut a) = fixture("trip-myrtle-beach");
    for day in 1..=2 {
        a.set(SlotId::new(day, SlotKind::Accommodation), Value::Stay(Place::new("Modern Homestay 2", "Myrtle Beach")));
    }
    let set = build_constraints(&q, &d);
    let ids: Vec<_> = evaluate_all(&set, &a, &d, &q).into_iter().map(|v| v.constraint_id).collect();
    assert!(ids.contains(&"no-hallucinated-details".to_string()), "{ids:?}");
}

#[test]
fn cuisine_constraint_tracks_each_cuisine() {
    let (d, mut q, a) = fixture("trip-myrtle-beach");
    q.prefs.cuisines = ["Italian".to_string(), "Thai".to_string()].into_iter().collect();
    let set = build_constraints(&q, &d);
    let ids: Vec<_> = evaluate_all(&set, &a, &d, &q).into_iter().map(|v| v.constraint_id).collect();
    assert_eq!(ids, vec!["cuisine:thai"]);
}

#[test]
fn min_nights_gate_rejects_long_minimum_stay() {
    let (d, q, mut a) = fixture("trip-myrtle-beach");
    for day in 1..=2 {
        a.set(SlotId::new(day, SlotKind::Accommodation), Value::Stay(Place::new("Sunny Dunes Condo", "Myrtle Beach")));
    }
    let set = build_constraints(&q, &d);
    let ids: Vec<_> = evaluate_all(&set, &a, &d, &q).into_iter().map(|v| v.constraint_id).collect();
    assert!(ids.contains(&"min-nights:myrtle beach".to_string()), "{ids:?}");
    assert!(ids.contains(&"min-nights-respected".to_string()), "{ids:?}");
}
