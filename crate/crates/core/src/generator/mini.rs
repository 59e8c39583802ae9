use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{rng, Records, CUISINES};
use crate::query::{StructuredQuery, TransportPref};
use crate::sandbox::{Allowance, GroundMode, RoomType, Sandbox};

/// Largest full assignment space a mini instance may have.
pub const MINI_SPACE_CAP: u128 = 1_000_000;

/// A 3-day single-city instance small enough to enumerate exhaustively.
#[derive(Debug, Clone)]
pub struct MiniInstance {
    pub sandbox: Sandbox,
    pub query: StructuredQuery,
    /// Product of per-slot domain sizes under the full search.
    pub space: u128,
}

/// Per-slot domain sizes multiplied out: optional meals and attractions on
/// the two travel days also allow "-".
fn space(restaurants: u128, attractions: u128, stays: u128, out: u128, back: u128) -> u128 {
    (restaurants + 1).pow(6) * restaurants.pow(3) * (attractions + 1).pow(2) * attractions * stays.pow(2) * out * back
}

pub fn mini_instance(seed: u64) -> MiniInstance {
    let mut r = rng(seed);
    loop {
        // the only pool shape under the cap that can hold a complete plan
        let core = r.gen_bool(0.6);
        let (rests, atts, stays, out_f, back_f) = if core {
            (3u128, 1u128, 1u128, r.gen_range(0..=1u128), r.gen_range(0..=2u128))
        } else {
            (
                *[2u128, 3, 3, 3, 3, 4].choose(&mut r).unwrap(),
                *[0u128, 1, 1, 1, 2].choose(&mut r).unwrap(),
                r.gen_range(0..=3u128),
                r.gen_range(0..=2u128),
                r.gen_range(0..=2u128),
            )
        };
        let mut out_g: Vec<GroundMode> = GroundMode::ALL.into_iter().filter(|_| r.gen_bool(0.4)).collect();
        let mut back_g: Vec<GroundMode> = GroundMode::ALL.into_iter().filter(|_| r.gen_bool(0.4)).collect();
        if core {
            out_g.truncate(1 - out_f as usize);
            if out_g.is_empty() && out_f == 0 {
                out_g.push(*GroundMode::ALL.choose(&mut r).unwrap());
            }
            back_g.truncate(2 - back_f as usize);
        }
        let size = space(rests, atts, stays, out_f + out_g.len() as u128, back_f + back_g.len() as u128);
        if size > MINI_SPACE_CAP {
            continue;
        }

        let start: NaiveDate = "2024-06-01".parse().expect("constant date");
        let (home, city) = ("Home", "Minorca");
        let mut rec = Records::default();
        rec.city("Homeland", home);
        rec.city("Minor", city);
        for _ in 0..out_f {
            let p = r.gen_range(60..300) as f64;
            rec.flight(&mut r, home, city, start, p);
        }
        for _ in 0..back_f {
            let p = r.gen_range(60..300) as f64;
            rec.flight(&mut r, city, home, start + chrono::Days::new(2), p);
        }
        let km = r.gen_range(80..600) as f64;
        rec.drive_one(home, city, km, &out_g);
        rec.drive_one(city, home, km, &back_g);
        for _ in 0..stays {
            let room = *[RoomType::EntireRoom, RoomType::PrivateRoom, RoomType::SharedRoom]
                .choose(&mut r)
                .unwrap();
            let rules = Allowance::ALL
                .into_iter()
                .filter(|_| r.gen_bool(0.25))
                .map(Allowance::prohibited_by)
                .collect();
            let price = r.gen_range(40..200) as f64;
            let min = *[1, 1, 2, 3].choose(&mut r).unwrap();
            let occ = r.gen_range(1..4);
            rec.stay(city, price, room, rules, min, occ);
        }
        let pool: Vec<&str> = CUISINES[..4].to_vec();
        for _ in 0..rests {
            let n = r.gen_range(1..3);
            let cs: Vec<&str> = pool.choose_multiple(&mut r, n).copied().collect();
            let cost = r.gen_range(10..40) as f64;
            rec.restaurant(city, cost, &cs);
        }
        for _ in 0..atts {
            rec.attraction(city);
        }

        let people = r.gen_range(1..4);
        let budget = (r.gen_range(3..16) * 100 * people) as f64;
        let mut q = StructuredQuery::new(home, city, 1, start, 3, people, budget);
        if r.gen_bool(0.35) {
            q.prefs.cuisines.insert(pool.choose(&mut r).unwrap().to_string());
        }
        if r.gen_bool(0.3) {
            q.prefs.room_rules.insert(*Allowance::ALL.choose(&mut r).unwrap());
        }
        if r.gen_bool(0.2) {
            q.prefs.room_type = Some(*[RoomType::EntireRoom, RoomType::NotSharedRoom, RoomType::PrivateRoom].choose(&mut r).unwrap());
        }
        if r.gen_bool(0.2) {
            q.prefs.transport = Some(
                *[TransportPref::NoFlights, TransportPref::NoSelfDriving, TransportPref::MustSelfDrive]
                    .choose(&mut r)
                    .unwrap(),
            );
        }
        return MiniInstance {
            sandbox: rec.build().expect("generated records are consistent"),
            query: q,
            space: size,
        };
    }
}
