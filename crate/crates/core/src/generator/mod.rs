//! Seeded synthetic datasets: a format-conforming sandbox with manifest,
//! feasible-looking queries, brute-forceable mini instances, gap scenarios
//! and scripted multi-turn sessions.

mod gaps;
mod mini;
mod sessions;

use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::query::{StructuredQuery, TransportPref};
use crate::sandbox::{
    AttractionRec, DatasetCounts, FlightRec, GroundMode, GroundRouteRec, HouseRule, LoadError, RestaurantRec,
    RoomType, Sandbox, StayRec,
};

pub use gaps::{gap_scenario, GapScenario, GapType};
pub use mini::{mini_instance, MiniInstance, MINI_SPACE_CAP};
pub use sessions::{scripted_session, ScriptedSession};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("need at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error(transparent)]
    Load(#[from] LoadError),
}

pub const CUISINES: [&str; 8] = [
    "American", "Chinese", "French", "Indian", "Italian", "Mediterranean", "Mexican", "Thai",
];

const HEADS: [&str; 12] = [
    "Ash", "Bel", "Cor", "Dun", "Eld", "Fal", "Gran", "Hol", "Ivy", "Jun", "Kel", "Lor",
];
const TAILS: [&str; 8] = ["ford", "ton", "mere", "field", "haven", "port", "wick", "dale"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct invented city names, in a seed-dependent order.
pub fn city_names(r: &mut impl Rng, n: usize) -> Vec<String> {
    let mut all: Vec<String> = HEADS
        .iter()
        .flat_map(|h| TAILS.iter().map(move |t| format!("{h}{t}")))
        .collect();
    all.shuffle(r);
    all.truncate(n);
    all
}

/// Record accumulator shared by every generator.
#[derive(Debug, Default, Clone)]
pub struct Records {
    pub flights: Vec<FlightRec>,
    pub stays: Vec<StayRec>,
    pub restaurants: Vec<RestaurantRec>,
    pub attractions: Vec<AttractionRec>,
    pub ground: Vec<GroundRouteRec>,
    pub cities: Vec<(String, String)>,
    serial: usize,
}

impl Records {
    pub fn counts(&self) -> DatasetCounts {
        DatasetCounts {
            flights: self.flights.len(),
            accommodations: self.stays.len(),
            restaurants: self.restaurants.len(),
            attractions: self.attractions.len(),
            ground_routes: self.ground.len(),
            cities: self.cities.len(),
        }
    }

    pub fn build(self) -> Result<Sandbox, LoadError> {
        Sandbox::from_parts(
            self.flights,
            self.stays,
            self.restaurants,
            self.attractions,
            self.ground,
            self.cities,
        )
    }

    fn next(&mut self) -> usize {
        self.serial += 1;
        self.serial
    }

    pub fn city(&mut self, state: &str, city: &str) {
        self.cities.push((state.to_string(), city.to_string()));
    }

    pub fn flight(&mut self, r: &mut impl Rng, from: &str, to: &str, date: NaiveDate, price: f64) {
        let n = self.next();
        let dep = r.gen_range(6..20);
        let len = r.gen_range(1..4);
        self.flights.push(FlightRec {
            number: format!("F{:05}", n),
            price,
            dep_time: format!("{dep:02}:{:02}", r.gen_range(0..4) * 15),
            arr_time: format!("{:02}:{:02}", dep + len, r.gen_range(0..4) * 15),
            date,
            origin: from.to_string(),
            dest: to.to_string(),
        });
    }

    /// Both modes in both directions for one city pair.
    pub fn drive(&mut self, a: &str, b: &str, km: f64) {
        for (from, to) in [(a, b), (b, a)] {
            self.drive_one(from, to, km, &GroundMode::ALL);
        }
    }

    pub fn drive_one(&mut self, from: &str, to: &str, km: f64, modes: &[GroundMode]) {
        for &mode in modes {
            let cost = match mode {
                GroundMode::SelfDriving => (km * 0.05).round(),
                GroundMode::Taxi => km.round(),
            };
            self.ground.push(GroundRouteRec {
                origin: from.to_string(),
                dest: to.to_string(),
                mode,
                duration_min: (km * 0.75) as u32,
                distance_km: km,
                cost,
            });
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn stay(
        &mut self,
        city: &str,
        price: f64,
        room_type: RoomType,
        rules: BTreeSet<HouseRule>,
        min_nights: u32,
        occupancy: u32,
    ) -> String {
        let n = self.next();
        let name = format!("{city} Stay {n}");
        self.stays.push(StayRec {
            name: name.clone(),
            price,
            room_type,
            house_rules: rules,
            min_nights,
            max_occupancy: occupancy,
            rating: 4.0,
            city: city.to_string(),
        });
        name
    }

    pub fn restaurant(&mut self, city: &str, cost: f64, cuisines: &[&str]) -> String {
        let n = self.next();
        let name = format!("{city} Table {n}");
        self.restaurants.push(RestaurantRec {
            name: name.clone(),
            avg_cost: cost,
            cuisines: cuisines.iter().map(|c| c.to_string()).collect(),
            rating: 4.0,
            city: city.to_string(),
        });
        name
    }

    pub fn attraction(&mut self, city: &str) -> String {
        let n = self.next();
        let name = format!("{city} Sight {n}");
        self.attractions.push(AttractionRec {
            name: name.clone(),
            address: format!("{n} Main St, {city}"),
            phone: String::new(),
            website: String::new(),
            city: city.to_string(),
        });
        name
    }

    /// A stay with random type, rules and limits.
    pub fn random_stay(&mut self, r: &mut impl Rng, city: &str) -> String {
        let room = *[RoomType::EntireRoom, RoomType::PrivateRoom, RoomType::SharedRoom]
            .choose(r)
            .unwrap();
        let rules: BTreeSet<HouseRule> = [
            HouseRule::NoParties,
            HouseRule::NoSmoking,
            HouseRule::NoChildrenUnder10,
            HouseRule::NoPets,
            HouseRule::NoVisitors,
        ]
        .into_iter()
        .filter(|_| r.gen_bool(0.25))
        .collect();
        let price = r.gen_range(40..260) as f64;
        let min = *[1, 1, 1, 2, 3].choose(r).unwrap();
        let occ = r.gen_range(1..5);
        self.stay(city, price, room, rules, min, occ)
    }

    pub fn random_restaurant(&mut self, r: &mut impl Rng, city: &str) -> String {
        let n = r.gen_range(1..3);
        let cuisines: Vec<&str> = CUISINES.choose_multiple(r, n).copied().collect();
        let cost = r.gen_range(10..70) as f64;
        self.restaurant(city, cost, &cuisines)
    }
}

/// A generated dataset and the counts the generator emitted.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub sandbox: Sandbox,
    pub manifest: DatasetCounts,
    pub states: Vec<(String, Vec<String>)>,
    pub start: NaiveDate,
    pub window: u32,
}

pub const GEN_START: &str = "2024-06-01";
pub const GEN_WINDOW: u32 = 10;

/// Builds a dataset over `cities` invented cities split across two states.
pub fn generate_dataset(seed: u64, cities: usize) -> Result<GeneratedDataset, GenError> {
    if cities < 2 {
        return Err(GenError::TooFewCities(cities));
    }
    let mut r = rng(seed);
    let start: NaiveDate = GEN_START.parse().expect("constant date");
    let names = city_names(&mut r, cities);
    let half = cities.div_ceil(2);
    let states = vec![
        ("Eastmark".to_string(), names[..half].to_vec()),
        ("Westmark".to_string(), names[half..].to_vec()),
    ];
    let mut rec = Records::default();
    for (state, cs) in &states {
        for c in cs {
            rec.city(state, c);
        }
    }
    for a in &names {
        for b in &names {
            if a == b {
                continue;
            }
            for day in 0..GEN_WINDOW {
                if r.gen_bool(0.7) {
                    for _ in 0..r.gen_range(1..3) {
                        let price = r.gen_range(60..400) as f64;
                        rec.flight(&mut r, a, b, start + chrono::Days::new(day as u64), price);
                    }
                }
            }
        }
    }
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            if r.gen_bool(0.7) {
                let km = r.gen_range(80..900) as f64;
                rec.drive(a, b, km);
            }
        }
    }
    for c in &names {
        for _ in 0..4 {
            rec.random_stay(&mut r, c);
        }
        for _ in 0..6 {
            rec.random_restaurant(&mut r, c);
        }
        for _ in 0..3 {
            rec.attraction(c);
        }
    }
    let manifest = rec.counts();
    Ok(GeneratedDataset {
        sandbox: rec.build()?,
        manifest,
        states,
        start,
        window: GEN_WINDOW,
    })
}

/// Samples queries over a generated dataset: single-city 3-day trips and,
/// when the other state has enough cities, 5-day state trips.
pub fn sample_queries(g: &GeneratedDataset, n: usize, seed: u64) -> Vec<StructuredQuery> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let from_state = r.gen_range(0..g.states.len());
        let Some(origin) = g.states[from_state].1.choose(&mut r).cloned() else {
            continue;
        };
        let other = &g.states[1 - from_state];
        let state_trip = other.1.len() >= 2 && r.gen_bool(0.4);
        let (dest, days, k) = if state_trip {
            (other.0.clone(), 5, 2)
        } else {
            let pool: Vec<&String> = g.states.iter().flat_map(|s| &s.1).filter(|c| **c != origin).collect();
            ((*pool.choose(&mut r).unwrap()).clone(), 3, 1)
        };
        let offset = r.gen_range(0..=(g.window - days));
        let people = r.gen_range(1..4);
        let budget = (r.gen_range(8..30) * 100 * people) as f64;
        let mut q = StructuredQuery::new(&origin, &dest, k, g.start + chrono::Days::new(offset as u64), days, people, budget);
        if r.gen_bool(0.3) {
            q.prefs.cuisines.insert(CUISINES.choose(&mut r).unwrap().to_string());
        }
        if r.gen_bool(0.2) {
            q.prefs.room_rules.insert(*crate::sandbox::Allowance::ALL.choose(&mut r).unwrap());
        }
        if r.gen_bool(0.15) {
            q.prefs.room_type = Some(*[RoomType::EntireRoom, RoomType::NotSharedRoom].choose(&mut r).unwrap());
        }
        if r.gen_bool(0.1) {
            q.prefs.transport = Some(*[TransportPref::NoFlights, TransportPref::NoSelfDriving].choose(&mut r).unwrap());
        }
        out.push(q);
    }
    out
}
