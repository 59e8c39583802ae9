//! Trip cost model.
//!
//! Flights are charged per person, ground routes per vehicle, stays per room
//! per night and meals per person. Attractions are free.

use crate::csp::{Assignment, SlotId, SlotKind, Value};
use crate::domains::DomainSet;
use crate::query::StructuredQuery;
use crate::sandbox::{FlightRec, GroundRouteRec, RestaurantRec, StayRec};

fn per(people: u32, capacity: u32) -> f64 {
    people.div_ceil(capacity.max(1)) as f64
}

pub fn flight_cost(r: &FlightRec, people: u32) -> f64 {
    r.price * people as f64
}

pub fn ground_cost(r: &GroundRouteRec, people: u32) -> f64 {
    r.cost * per(people, r.mode.vehicle_capacity())
}

/// Cost of one night.
pub fn stay_night_cost(r: &StayRec, people: u32) -> f64 {
    r.price * per(people, r.max_occupancy)
}

pub fn meal_cost(r: &RestaurantRec, people: u32) -> f64 {
    r.avg_cost * people as f64
}

/// Whether a slot kind can carry a cost.
pub fn is_cost_bearing(kind: SlotKind) -> bool {
    matches!(kind, SlotKind::Transportation | SlotKind::Accommodation) || kind.is_meal()
}

/// Cost of one slot value, or `None` when the value cannot be resolved.
/// Each accommodation slot is one night.
pub fn slot_cost(d: &DomainSet, q: &StructuredQuery, slot: SlotId, v: &Value) -> Option<f64> {
    let people = q.people;
    match v {
        Value::Empty | Value::City { .. } | Value::Travel { .. } | Value::Attractions { .. } => Some(0.0),
        Value::Flight { number, from, to, .. } => {
            let date = *q.dates.get(slot.day as usize - 1)?;
            d.find_flight(number, from, to, date).map(|r| flight_cost(r, people))
        }
        Value::Ground { mode, from, to } => d.find_ground(from, to, *mode).map(|r| ground_cost(r, people)),
        Value::Restaurant(p) => d.find_restaurant(p).map(|r| meal_cost(r, people)),
        Value::Stay(p) => d.find_stay(p).map(|r| stay_night_cost(r, people)),
    }
}

/// Total trip cost, or the slots whose values cannot be priced.
pub fn plan_cost(d: &DomainSet, q: &StructuredQuery, a: &Assignment) -> Result<f64, Vec<SlotId>> {
    let mut total = 0.0;
    let mut unresolved = Vec::new();
    for (slot, v) in a.iter() {
        if !is_cost_bearing(slot.kind) {
            continue;
        }
        match slot_cost(d, q, *slot, v) {
            Some(c) => total += c,
            None => unresolved.push(*slot),
        }
    }
    if unresolved.is_empty() {
        Ok(total)
    } else {
        Err(unresolved)
    }
}

/// Renders an amount without trailing zeros for whole numbers.
pub fn money(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sandbox::{GroundMode, RoomType};
    use std::collections::BTreeSet;

    #[test]
    fn vehicles_and_rooms_round_up() {
        let g = GroundRouteRec {
            origin: "A".into(),
            dest: "B".into(),
            mode: GroundMode::SelfDriving,
            duration_min: 10,
            distance_km: 10.0,
            cost: 19.0,
        };
        assert_eq!(ground_cost(&g, 5), 19.0);
        assert_eq!(ground_cost(&g, 6), 38.0);
        let taxi = GroundRouteRec { mode: GroundMode::Taxi, ..g };
        assert_eq!(ground_cost(&taxi, 5), 38.0);
        let s = StayRec {
            name: "S".into(),
            price: 100.0,
            room_type: RoomType::EntireRoom,
            house_rules: BTreeSet::new(),
            min_nights: 1,
            max_occupancy: 2,
            rating: 4.0,
            city: "B".into(),
        };
        assert_eq!(stay_night_cost(&s, 5), 300.0);
        assert_eq!(stay_night_cost(&s, 2), 100.0);
    }

    #[test]
    fn money_formatting() {
        assert_eq!(money(1400.0), "1400");
        assert_eq!(money(12.5), "12.50");
    }
}
