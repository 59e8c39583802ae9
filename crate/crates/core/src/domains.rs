//! Candidate pools extracted from the notebook.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::csp::{Assignment, Place, SlotId, SlotKind, Value};
use crate::query::StructuredQuery;
use crate::sandbox::{
    fold, AttractionRec, FlightRec, GroundMode, GroundRouteRec, Notebook, Payload, RestaurantRec, Sandbox,
    StayRec, Tool,
};

/// A candidate value with the notebook entry it came from. `provenance` is
/// `None` only for sets built directly from a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate<T> {
    pub record: T,
    pub provenance: Option<usize>,
}

type Pool<T> = Vec<Candidate<T>>;
type LegKey = (String, String, NaiveDate);
type RouteKey = (String, String, GroundMode);

/// Per-category candidate pools. A key that is present with an empty pool
/// was searched and came back empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainSet {
    flights: BTreeMap<LegKey, Pool<FlightRec>>,
    ground: BTreeMap<RouteKey, Pool<GroundRouteRec>>,
    stays: BTreeMap<String, Pool<StayRec>>,
    restaurants: BTreeMap<String, Pool<RestaurantRec>>,
    attractions: BTreeMap<String, Pool<AttractionRec>>,
    cities: BTreeMap<String, Pool<String>>,
}

fn push_unique<T: PartialEq>(pool: &mut Pool<T>, record: T, provenance: Option<usize>) {
    if !pool.iter().any(|c| c.record == record) {
        pool.push(Candidate { record, provenance });
    }
}

fn is_subset<K: Ord, T: PartialEq>(a: &BTreeMap<K, Pool<T>>, b: &BTreeMap<K, Pool<T>>) -> bool {
    a.iter().all(|(k, pool)| match b.get(k) {
        Some(other) => pool.iter().all(|c| other.contains(c)),
        None => false,
    })
}

/// Builds domains from every observation in the notebook. Identical records
/// seen more than once keep the earliest entry as provenance.
pub fn extract_domains(nb: &Notebook) -> DomainSet {
    let mut d = DomainSet::default();
    for entry in nb.entries() {
        let obs = &entry.observation;
        let args = &obs.directive.args;
        let p = Some(entry.index);
        match &obs.payload {
            Payload::Flights(rows) => {
                let Ok(date) = args[2].trim().parse::<NaiveDate>() else { continue };
                let pool = d.flights.entry((fold(&args[0]), fold(&args[1]), date)).or_default();
                for r in rows {
                    push_unique(pool, r.clone(), p);
                }
            }
            Payload::GroundRoutes(rows) => {
                let Ok(mode) = args[2].parse::<GroundMode>() else { continue };
                let pool = d.ground.entry((fold(&args[0]), fold(&args[1]), mode)).or_default();
                for r in rows {
                    push_unique(pool, r.clone(), p);
                }
            }
            Payload::Stays(rows) => {
                let pool = d.stays.entry(fold(&args[0])).or_default();
                for r in rows {
                    push_unique(pool, r.clone(), p);
                }
            }
            Payload::Restaurants(rows) => {
                let pool = d.restaurants.entry(fold(&args[0])).or_default();
                for r in rows {
                    push_unique(pool, r.clone(), p);
                }
            }
            Payload::Attractions(rows) => {
                let pool = d.attractions.entry(fold(&args[0])).or_default();
                for r in rows {
                    push_unique(pool, r.clone(), p);
                }
            }
            Payload::Cities(rows) => {
                let pool = d.cities.entry(fold(&args[0])).or_default();
                for c in rows {
                    if !pool.iter().any(|x| fold(&x.record) == fold(c)) {
                        pool.push(Candidate {
                            record: c.clone(),
                            provenance: p,
                        });
                    }
                }
            }
        }
    }
    d
}

impl DomainSet {
    /// The whole dataset as one domain set, as if every search had been run.
    pub fn from_sandbox(sb: &Sandbox) -> Self {
        let mut d = DomainSet::default();
        for r in sb.flights() {
            let pool = d.flights.entry((fold(&r.origin), fold(&r.dest), r.date)).or_default();
            push_unique(pool, r.clone(), None);
        }
        for r in sb.ground() {
            let pool = d.ground.entry((fold(&r.origin), fold(&r.dest), r.mode)).or_default();
            push_unique(pool, r.clone(), None);
        }
        for r in sb.stays() {
            push_unique(d.stays.entry(fold(&r.city)).or_default(), r.clone(), None);
        }
        for r in sb.restaurants() {
            push_unique(d.restaurants.entry(fold(&r.city)).or_default(), r.clone(), None);
        }
        for r in sb.attractions() {
            push_unique(d.attractions.entry(fold(&r.city)).or_default(), r.clone(), None);
        }
        for (state, cities) in sb.cities_by_state() {
            let pool = d.cities.entry(fold(state)).or_default();
            for c in cities {
                push_unique(pool, c.clone(), None);
            }
        }
        d
    }

    pub fn is_empty(&self) -> bool {
        self.candidate_count() == 0
    }

    pub fn candidate_count(&self) -> usize {
        self.flights.values().map(Vec::len).sum::<usize>()
            + self.ground.values().map(Vec::len).sum::<usize>()
            + self.stays.values().map(Vec::len).sum::<usize>()
            + self.restaurants.values().map(Vec::len).sum::<usize>()
            + self.attractions.values().map(Vec::len).sum::<usize>()
            + self.cities.values().map(Vec::len).sum::<usize>()
    }

    /// True when every pool and candidate of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &DomainSet) -> bool {
        is_subset(&self.flights, &other.flights)
            && is_subset(&self.ground, &other.ground)
            && is_subset(&self.stays, &other.stays)
            && is_subset(&self.restaurants, &other.restaurants)
            && is_subset(&self.attractions, &other.attractions)
            && is_subset(&self.cities, &other.cities)
    }

    pub fn flights(&self, origin: &str, dest: &str, date: NaiveDate) -> &[Candidate<FlightRec>] {
        self.flights
            .get(&(fold(origin), fold(dest), date))
            .map_or(&[], Vec::as_slice)
    }

    pub fn ground(&self, origin: &str, dest: &str, mode: GroundMode) -> &[Candidate<GroundRouteRec>] {
        self.ground
            .get(&(fold(origin), fold(dest), mode))
            .map_or(&[], Vec::as_slice)
    }

    pub fn stays(&self, city: &str) -> &[Candidate<StayRec>] {
        self.stays.get(&fold(city)).map_or(&[], Vec::as_slice)
    }

    pub fn restaurants(&self, city: &str) -> &[Candidate<RestaurantRec>] {
        self.restaurants.get(&fold(city)).map_or(&[], Vec::as_slice)
    }

    pub fn attractions(&self, city: &str) -> &[Candidate<AttractionRec>] {
        self.attractions.get(&fold(city)).map_or(&[], Vec::as_slice)
    }

    /// Cities of a state, or `None` if the state was never searched.
    pub fn cities(&self, state: &str) -> Option<Vec<&str>> {
        self.cities
            .get(&fold(state))
            .map(|pool| pool.iter().map(|c| c.record.as_str()).collect())
    }

    /// Whether a search of the given kind was recorded for `key`. Flight and
    /// ground keys are `origin|dest|date` and `origin|dest|mode`.
    pub fn searched(&self, tool: Tool, args: &[&str]) -> bool {
        match (tool, args) {
            (Tool::FlightSearch, [o, d, date]) => date
                .trim()
                .parse::<NaiveDate>()
                .is_ok_and(|date| self.flights.contains_key(&(fold(o), fold(d), date))),
            (Tool::DistanceMatrix, [o, d, m]) => m
                .parse::<GroundMode>()
                .is_ok_and(|m| self.ground.contains_key(&(fold(o), fold(d), m))),
            (Tool::AccommodationSearch, [c]) => self.stays.contains_key(&fold(c)),
            (Tool::RestaurantSearch, [c]) => self.restaurants.contains_key(&fold(c)),
            (Tool::AttractionSearch, [c]) => self.attractions.contains_key(&fold(c)),
            (Tool::CitySearch, [s]) => self.cities.contains_key(&fold(s)),
            _ => false,
        }
    }

    pub fn find_flight(&self, number: &str, origin: &str, dest: &str, date: NaiveDate) -> Option<&FlightRec> {
        self.flights(origin, dest, date)
            .iter()
            .map(|c| &c.record)
            .find(|r| r.number.eq_ignore_ascii_case(number.trim()))
    }

    /// Cheapest listed ground route for a leg and mode.
    pub fn find_ground(&self, origin: &str, dest: &str, mode: GroundMode) -> Option<&GroundRouteRec> {
        self.ground(origin, dest, mode)
            .iter()
            .map(|c| &c.record)
            .min_by(|a, b| a.cost.total_cmp(&b.cost))
    }

    pub fn find_stay(&self, p: &Place) -> Option<&StayRec> {
        let name = fold(&p.name);
        self.stays(&p.city).iter().map(|c| &c.record).find(|r| fold(&r.name) == name)
    }

    pub fn find_restaurant(&self, p: &Place) -> Option<&RestaurantRec> {
        let name = fold(&p.name);
        self.restaurants(&p.city)
            .iter()
            .map(|c| &c.record)
            .find(|r| fold(&r.name) == name)
    }

    pub fn find_attraction(&self, p: &Place) -> Option<&AttractionRec> {
        let name = fold(&p.name);
        self.attractions(&p.city)
            .iter()
            .map(|c| &c.record)
            .find(|r| fold(&r.name) == name)
    }

    /// Whether `city` appears anywhere in the pools (as a pool key, a route
    /// endpoint or a state's city).
    pub fn knows_city(&self, city: &str) -> bool {
        let c = fold(city);
        self.stays.contains_key(&c)
            || self.restaurants.contains_key(&c)
            || self.attractions.contains_key(&c)
            || self.flights.keys().any(|(o, d, _)| *o == c || *d == c)
            || self.ground.keys().any(|(o, d, _)| *o == c || *d == c)
            || self.cities.values().flatten().any(|x| fold(&x.record) == c)
    }

    /// Whether a single slot value is backed by a candidate.
    pub fn resolves(&self, q: &StructuredQuery, slot: SlotId, v: &Value) -> bool {
        let date = || q.dates.get(slot.day as usize - 1).copied();
        match v {
            Value::Empty => true,
            Value::City { city } => fold(city) == fold(&q.origin) || self.knows_city(city),
            Value::Travel { from, to } => {
                [from, to].iter().all(|c| fold(c) == fold(&q.origin) || self.knows_city(c))
            }
            Value::Flight {
                number,
                from,
                to,
                dep,
                arr,
            } => date()
                .and_then(|d| self.find_flight(number, from, to, d))
                .is_some_and(|r| r.dep_time == *dep && r.arr_time == *arr),
            Value::Ground { mode, from, to } => self.find_ground(from, to, *mode).is_some(),
            Value::Restaurant(p) => slot.kind.is_meal() && self.find_restaurant(p).is_some(),
            Value::Stay(p) => slot.kind == SlotKind::Accommodation && self.find_stay(p).is_some(),
            Value::Attractions { places } => places.iter().all(|p| self.find_attraction(p).is_some()),
        }
    }

    /// Slots whose values have no candidate behind them.
    pub fn unprovenanced(&self, q: &StructuredQuery, a: &Assignment) -> Vec<SlotId> {
        a.iter()
            .filter(|(s, v)| !self.resolves(q, **s, v))
            .map(|(s, _)| *s)
            .collect()
    }

    /// Cities with at least one stay candidate, in key order.
    pub fn stay_cities(&self) -> Vec<&str> {
        self.stays
            .values()
            .filter_map(|pool| pool.first().map(|c| c.record.city.as_str()))
            .collect()
    }
}
