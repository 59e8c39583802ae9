//! Route skeletons and per-slot candidate domains.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{flight_cost, ground_cost, meal_cost, stay_night_cost};
use crate::csp::{variable_set, Place, SlotId, SlotKind, Value};
use crate::domains::DomainSet;
use crate::query::StructuredQuery;
use crate::sandbox::{fold, GroundMode, RestaurantRec, StayRec};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum RouteError {
    #[error("no city pool for {0}")]
    NoRoute(String),
}

/// One transport leg of a route.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub day: u32,
    pub from: String,
    pub to: String,
    pub date: NaiveDate,
}

/// A closed-loop city sequence with its per-day current-city labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub cities: Vec<String>,
    pub labels: Vec<Value>,
    pub legs: Vec<Leg>,
    /// Sum over legs of the cheapest transport; infinite when a leg has none.
    pub lower_bound: f64,
}

impl Route {
    pub fn label(&self, day: u32) -> &Value {
        &self.labels[day as usize - 1]
    }

    pub fn leg_on(&self, day: u32) -> Option<&Leg> {
        self.legs.iter().find(|l| l.day == day)
    }
}

/// Builds the labels and legs for one ordered choice of destination cities.
pub fn route_for(q: &StructuredQuery, d: &DomainSet, cities: &[String]) -> Route {
    let mut labels = Vec::with_capacity(q.days as usize);
    let mut legs = Vec::new();
    let mut here = q.origin.clone();
    let mut stops = cities.iter();
    for day in 1..=q.days {
        if day % 2 == 1 {
            let next = if day == q.days {
                q.origin.clone()
            } else {
                stops.next().cloned().unwrap_or_else(|| q.origin.clone())
            };
            labels.push(Value::Travel {
                from: here.clone(),
                to: next.clone(),
            });
            legs.push(Leg {
                day,
                from: here.clone(),
                to: next.clone(),
                date: q.date_of(day),
            });
            here = next;
        } else {
            labels.push(Value::City { city: here.clone() });
        }
    }
    let lower_bound = legs
        .iter()
        .map(|l| {
            transport_candidates(q, d, l)
                .first()
                .map_or(f64::INFINITY, |(_, c)| *c)
        })
        .sum();
    Route {
        cities: cities.to_vec(),
        labels,
        legs,
        lower_bound,
    }
}

/// Cities a route may visit: the state's city pool, or the destination
/// itself for a single-city trip.
pub fn destination_pool(q: &StructuredQuery, d: &DomainSet) -> Result<Vec<String>, RouteError> {
    let origin = fold(&q.origin);
    let pool: Vec<String> = match d.cities(&q.destination) {
        Some(p) => p.into_iter().filter(|c| fold(c) != origin).map(str::to_string).collect(),
        None if q.visiting_city_count == 1 => vec![q.destination.clone()],
        None => return Err(RouteError::NoRoute(q.destination.clone())),
    };
    if pool.len() < q.visiting_city_count as usize || pool.is_empty() {
        return Err(RouteError::NoRoute(q.destination.clone()));
    }
    Ok(pool)
}

/// Candidate closed-loop routes, cheapest transport lower bound first.
pub fn route_skeleton(q: &StructuredQuery, d: &DomainSet) -> Result<Vec<Route>, RouteError> {
    let pool = destination_pool(q, d)?;
    let k = q.visiting_city_count as usize;
    let mut routes = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    permutations(pool.len(), k, &mut chosen, &mut |idx| {
        let cities: Vec<String> = idx.iter().map(|&i| pool[i].clone()).collect();
        routes.push(route_for(q, d, &cities));
    });
    routes.sort_by(|a, b| a.lower_bound.total_cmp(&b.lower_bound));
    Ok(routes)
}

fn permutations(n: usize, k: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chosen.len() == k {
        f(chosen);
        return;
    }
    for i in 0..n {
        if !chosen.contains(&i) {
            chosen.push(i);
            permutations(n, k, chosen, f);
            chosen.pop();
        }
    }
}

/// Transport values for a leg with their cost, cheapest first. Flights are
/// deduplicated by number (first listing wins).
pub fn transport_candidates(q: &StructuredQuery, d: &DomainSet, leg: &Leg) -> Vec<(Value, f64)> {
    let mut out: Vec<(Value, f64)> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    for c in d.flights(&leg.from, &leg.to, leg.date) {
        let r = &c.record;
        if seen.contains(&fold(&r.number)) {
            continue;
        }
        seen.push(fold(&r.number));
        out.push((
            Value::Flight {
                number: r.number.clone(),
                from: leg.from.clone(),
                to: leg.to.clone(),
                dep: r.dep_time.clone(),
                arr: r.arr_time.clone(),
            },
            flight_cost(r, q.people),
        ));
    }
    for mode in GroundMode::ALL {
        if let Some(r) = d.find_ground(&leg.from, &leg.to, mode) {
            out.push((
                Value::Ground {
                    mode,
                    from: leg.from.clone(),
                    to: leg.to.clone(),
                },
                ground_cost(r, q.people),
            ));
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

/// Stays in a city, one per name (first listing wins), in pool order.
pub fn stay_candidates<'a>(d: &'a DomainSet, city: &str) -> Vec<&'a StayRec> {
    let mut out: Vec<&StayRec> = Vec::new();
    for c in d.stays(city) {
        if !out.iter().any(|r| fold(&r.name) == fold(&c.record.name)) {
            out.push(&c.record);
        }
    }
    out
}

/// Restaurants in a city, one per name (first listing wins), in pool order.
pub fn restaurant_candidates<'a>(d: &'a DomainSet, city: &str) -> Vec<&'a RestaurantRec> {
    let mut out: Vec<&RestaurantRec> = Vec::new();
    for c in d.restaurants(city) {
        if !out.iter().any(|r| fold(&r.name) == fold(&c.record.name)) {
            out.push(&c.record);
        }
    }
    out
}

pub fn attraction_candidates(d: &DomainSet, city: &str) -> Vec<Place> {
    let mut out: Vec<Place> = Vec::new();
    for c in d.attractions(city) {
        let p = Place::new(&c.record.name, &c.record.city);
        if !out.iter().any(|x| x.key() == p.key()) {
            out.push(p);
        }
    }
    out
}

/// Whether a slot must hold a non-empty value under the trip layout.
pub fn is_required(q: &StructuredQuery, slot: SlotId) -> bool {
    let travel = q.travel_days().contains(&slot.day);
    match slot.kind {
        SlotKind::CurrentCity => true,
        SlotKind::Transportation => travel,
        SlotKind::Accommodation => slot.day < q.days,
        _ => !travel,
    }
}

fn push_value(out: &mut Vec<(Value, f64)>, v: Value, cost: f64) {
    if !out.iter().any(|(x, _)| *x == v) {
        out.push((v, cost));
    }
}

/// Candidate values of every slot, taken over all routes, each paired with
/// its cost (per night for stays). Required slots never include the empty
/// marker; optional slots list it first.
#[derive(Debug, Clone, Default)]
pub struct SlotDomains {
    pub routes: Vec<Route>,
    pub values: BTreeMap<SlotId, Vec<(Value, f64)>>,
}

impl SlotDomains {
    pub fn build(q: &StructuredQuery, d: &DomainSet) -> Self {
        let routes = route_skeleton(q, d).unwrap_or_default();
        let mut values: BTreeMap<SlotId, Vec<(Value, f64)>> = BTreeMap::new();
        for slot in variable_set(q) {
            let mut vals: Vec<(Value, f64)> = Vec::new();
            if !is_required(q, slot) {
                vals.push((Value::Empty, 0.0));
            }
            for r in &routes {
                let label = r.label(slot.day);
                match slot.kind {
                    SlotKind::CurrentCity => push_value(&mut vals, label.clone(), 0.0),
                    SlotKind::Transportation => {
                        if let Some(leg) = r.leg_on(slot.day) {
                            for (v, c) in transport_candidates(q, d, leg) {
                                push_value(&mut vals, v, c);
                            }
                        }
                    }
                    SlotKind::Accommodation => {
                        if slot.day < q.days {
                            let city = label.end_city().unwrap_or_default();
                            for s in stay_candidates(d, city) {
                                let v = Value::Stay(Place::new(&s.name, &s.city));
                                push_value(&mut vals, v, stay_night_cost(s, q.people));
                            }
                        }
                    }
                    SlotKind::Attraction => {
                        for city in label.cities() {
                            for p in attraction_candidates(d, city) {
                                push_value(&mut vals, Value::Attractions { places: vec![p] }, 0.0);
                            }
                        }
                    }
                    _ => {
                        for city in label.cities() {
                            for s in restaurant_candidates(d, city) {
                                let v = Value::Restaurant(Place::new(&s.name, &s.city));
                                push_value(&mut vals, v, meal_cost(s, q.people));
                            }
                        }
                    }
                }
            }
            values.insert(slot, vals);
        }
        Self { routes, values }
    }

    pub fn get(&self, slot: SlotId) -> &[(Value, f64)] {
        self.values.get(&slot).map_or(&[], Vec::as_slice)
    }

    /// Non-empty candidates of a slot.
    pub fn filled(&self, slot: SlotId) -> impl Iterator<Item = &(Value, f64)> {
        self.get(slot).iter().filter(|(v, _)| !v.is_empty())
    }

    /// Product of domain sizes over `slots`, saturating.
    pub fn space_size(&self, slots: &[SlotId]) -> u128 {
        slots
            .iter()
            .fold(1u128, |acc, s| acc.saturating_mul(self.get(*s).len() as u128))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sandbox::{Notebook, Observation, Payload, ToolDirective};

    fn q3() -> StructuredQuery {
        StructuredQuery::new("Washington", "Myrtle Beach", 1, "2022-03-13".parse().unwrap(), 3, 1, 1400.0)
    }

    #[test]
    fn single_city_route_shape() {
        let routes = route_skeleton(&q3(), &DomainSet::default()).unwrap();
        assert_eq!(routes.len(), 1);
        let labels: Vec<String> = routes[0].labels.iter().map(|v| format!("{:?}", v.cities())).collect();
        assert_eq!(
            labels,
            vec![
                r#"["Washington", "Myrtle Beach"]"#,
                r#"["Myrtle Beach"]"#,
                r#"["Myrtle Beach", "Washington"]"#
            ]
        );
        assert_eq!(routes[0].lower_bound, f64::INFINITY);
    }

    #[test]
    fn state_routes_come_from_the_city_pool() {
        let mut nb = Notebook::new();
        nb.record(
            "Cities in California",
            Observation {
                directive: ToolDirective::cities("California"),
                payload: Payload::Cities(vec!["Los Angeles".into(), "San Francisco".into()]),
            },
        );
        let d = crate::domains::extract_domains(&nb);
        let mut q = StructuredQuery::new("Kona", "California", 2, "2025-09-07".parse().unwrap(), 5, 1, 5000.0);
        assert_eq!(route_skeleton(&q, &d).unwrap().len(), 2);
        q.visiting_city_count = 3;
        q.days = 7;
        q.dates = StructuredQuery::new("Kona", "California", 3, "2025-09-07".parse().unwrap(), 7, 1, 0.0).dates;
        assert_eq!(route_skeleton(&q, &d), Err(RouteError::NoRoute("California".into())));
    }

    #[test]
    fn required_slots_exclude_the_empty_marker() {
        let sd = SlotDomains::build(&q3(), &DomainSet::default());
        assert!(sd.get(SlotId::new(1, SlotKind::Transportation)).is_empty());
        assert_eq!(sd.get(SlotId::new(1, SlotKind::Lunch)).len(), 1);
        assert_eq!(sd.get(SlotId::new(3, SlotKind::Accommodation)), &[(Value::Empty, 0.0)]);
        assert!(sd.get(SlotId::new(2, SlotKind::Lunch)).is_empty());
    }
}
