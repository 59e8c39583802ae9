use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::{rng, Records, CUISINES};
use crate::orchestrator::TurnInput;
use crate::query::{Patch, PatchOp, StructuredQuery};
use crate::sandbox::{Allowance, GroundMode, RoomType, Sandbox};

/// A scripted multi-turn session: a full query followed by patch sets.
#[derive(Debug, Clone)]
pub struct ScriptedSession {
    pub sandbox: Sandbox,
    pub inputs: Vec<TurnInput>,
    /// "local", "global", "local-then-global" or "global-then-local".
    pub shape: &'static str,
}

fn local_patch(r: &mut impl Rng) -> Vec<Patch> {
    match r.gen_range(0..3) {
        0 => vec![Patch::new(PatchOp::Add, "cuisines", json!(CUISINES[..4].choose(r).unwrap()))],
        1 => vec![Patch::new(
            PatchOp::Add,
            "room_type",
            json!([RoomType::EntireRoom, RoomType::NotSharedRoom, RoomType::PrivateRoom].choose(r).unwrap()),
        )],
        _ => vec![Patch::new(PatchOp::Add, "room_rules", json!(Allowance::ALL.choose(r).unwrap()))],
    }
}

fn global_patch(r: &mut impl Rng, q: &StructuredQuery) -> Vec<Patch> {
    if r.gen_bool(0.5) {
        let cut = r.gen_range(55..95) as f64 / 100.0;
        vec![Patch::new(PatchOp::Modify, "budget", json!((q.budget * cut).round()))]
    } else {
        vec![Patch::new(PatchOp::Modify, "people", json!(q.people + 1))]
    }
}

/// A 2- or 3-turn session over a small single-city dataset.
pub fn scripted_session(seed: u64, turns: usize) -> ScriptedSession {
    let mut r = rng(seed ^ 0x5e55_1015);
    let start: NaiveDate = "2024-08-01".parse().expect("constant date");
    let (home, city) = ("Home", "Turnbury");
    let mut rec = Records::default();
    rec.city("Homeland", home);
    rec.city("Turnshire", city);
    for _ in 0..r.gen_range(1..3) {
        let p = r.gen_range(60..250) as f64;
        rec.flight(&mut r, home, city, start, p);
        let p = r.gen_range(60..250) as f64;
        rec.flight(&mut r, city, home, start + chrono::Days::new(2), p);
    }
    if r.gen_bool(0.6) {
        let km = r.gen_range(100..500) as f64;
        rec.drive_one(home, city, km, &GroundMode::ALL);
        rec.drive_one(city, home, km, &GroundMode::ALL);
    }
    for _ in 0..r.gen_range(2..4) {
        rec.random_stay(&mut r, city);
    }
    for _ in 0..r.gen_range(3..5) {
        let n = r.gen_range(1..3);
        let cs: Vec<&str> = CUISINES[..4].choose_multiple(&mut r, n).copied().collect();
        let cost = r.gen_range(10..40) as f64;
        rec.restaurant(city, cost, &cs);
    }
    rec.attraction(city);

    let people = r.gen_range(1..3);
    let q = StructuredQuery::new(home, city, 1, start, 3, people, (r.gen_range(8..16) * 100 * people) as f64);
    let shape = match (turns, r.gen_range(0..2)) {
        (2, 0) => "local",
        (2, _) => "global",
        (_, 0) => "local-then-global",
        _ => "global-then-local",
    };
    let mut inputs = vec![TurnInput::Query(q.clone())];
    let mut cur = q;
    let order: &[bool] = match shape {
        "local" => &[true],
        "global" => &[false],
        "local-then-global" => &[true, false],
        _ => &[false, true],
    };
    for &local in order {
        let ps = if local { local_patch(&mut r) } else { global_patch(&mut r, &cur) };
        cur = cur.apply(&ps).expect("generated patches are well-formed");
        inputs.push(TurnInput::Patches(ps));
    }
    ScriptedSession {
        sandbox: rec.build().expect("generated records are consistent"),
        inputs,
        shape,
    }
}
