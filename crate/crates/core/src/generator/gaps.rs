use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{city_names, rng, Records, CUISINES};
use crate::query::StructuredQuery;
use crate::sandbox::{Allowance, RoomType, Sandbox};

/// What the initial script cannot see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapType {
    /// Every stay in a reached city forbids what the traveller needs; a
    /// further city of the state has acceptable stays.
    StayRule,
    /// No transport between the two reached cities in script order; the
    /// reverse order is fully connected.
    MissingLeg,
    /// No reached city serves the requested cuisine; a further city does.
    Cuisine,
}

impl GapType {
    pub const ALL: [GapType; 3] = [GapType::StayRule, GapType::MissingLeg, GapType::Cuisine];
}

#[derive(Debug, Clone)]
pub struct GapScenario {
    pub kind: GapType,
    pub sandbox: Sandbox,
    pub query: StructuredQuery,
    /// The state's cities in pool order.
    pub pool: Vec<String>,
    /// The city the script reaches but cannot use, or the leg origin for
    /// missing legs.
    pub blocked: String,
}

pub fn gap_scenario(seed: u64, kind: GapType) -> GapScenario {
    let mut r = rng(seed ^ 0x9e37_79b9);
    let k: u32 = match kind {
        GapType::MissingLeg => 2,
        _ => *[2, 2, 3].choose(&mut r).unwrap(),
    };
    let days = 2 * k + 1;
    let pool_len = match kind {
        GapType::MissingLeg => k as usize,
        _ => k as usize + 1,
    };
    let mut names = city_names(&mut r, pool_len + 1);
    let origin = names.remove(0);
    let pool = names;
    let state = "Gapland";
    let start: NaiveDate = "2024-07-01".parse().expect("constant date");

    let mut rec = Records::default();
    rec.city("Homeland", &origin);
    for c in &pool {
        rec.city(state, c);
    }

    let blocked_at = r.gen_range(0..k as usize);
    let blocked = pool[blocked_at].clone();
    let (cut_from, cut_to) = (pool[0].clone(), pool[1].clone());
    let mut everyone = vec![origin.clone()];
    everyone.extend(pool.iter().cloned());
    for a in &everyone {
        for b in &everyone {
            if a == b || (kind == GapType::MissingLeg && *a == cut_from && *b == cut_to) {
                continue;
            }
            for day in 0..days {
                let p = r.gen_range(60..200) as f64;
                rec.flight(&mut r, a, b, start + chrono::Days::new(day as u64), p);
            }
        }
    }

    let need = *Allowance::ALL.choose(&mut r).unwrap();
    let cuisine = CUISINES[r.gen_range(0..CUISINES.len())];
    let others: Vec<&str> = CUISINES.iter().copied().filter(|c| *c != cuisine).collect();
    for (i, c) in pool.iter().enumerate() {
        for _ in 0..2 {
            let rules: BTreeSet<_> = if kind == GapType::StayRule && *c == blocked {
                [need.prohibited_by()].into()
            } else {
                BTreeSet::new()
            };
            let price = r.gen_range(60..150) as f64;
            rec.stay(c, price, RoomType::EntireRoom, rules, 1, 4);
        }
        let reached = i < k as usize;
        for j in 0..5 {
            let serves_it = kind == GapType::Cuisine && !reached && j == 0;
            let mut cs = vec![*others.choose(&mut r).unwrap()];
            if serves_it || (kind != GapType::Cuisine && j == 0) {
                cs.push(cuisine);
            }
            let cost = r.gen_range(10..40) as f64;
            rec.restaurant(c, cost, &cs);
        }
        for _ in 0..2 {
            rec.attraction(c);
        }
    }

    let people = r.gen_range(1..3);
    let mut q = StructuredQuery::new(&origin, state, k, start, days, people, 20_000.0);
    match kind {
        GapType::StayRule => {
            q.prefs.room_rules.insert(need);
        }
        GapType::Cuisine => {
            q.prefs.cuisines.insert(cuisine.to_string());
        }
        GapType::MissingLeg => {}
    }
    GapScenario {
        kind,
        sandbox: rec.build().expect("generated records are consistent"),
        query: q,
        blocked: if kind == GapType::MissingLeg { cut_from } else { blocked },
        pool,
    }
}
