use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Rule;
use crate::cost::{money, plan_cost};
use crate::csp::{Assignment, SlotId, SlotKind, Value};
use crate::domains::DomainSet;
use crate::query::{StructuredQuery, TransportPref};
use crate::sandbox::{fold, GroundMode};

/// A violated constraint with the slots whose values jointly cause it.
///
/// Any assignment that agrees with the violating one on `slots` violates the
/// same constraint, which is what makes these usable as nogoods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint_id: String,
    pub slots: Vec<SlotId>,
    pub message: String,
}

const EMPTY: Value = Value::Empty;

fn val(a: &Assignment, day: u32, kind: SlotKind) -> &Value {
    a.at(day, kind).unwrap_or(&EMPTY)
}

fn day_word(kind: SlotKind) -> &'static str {
    match kind {
        SlotKind::CurrentCity => "current city",
        SlotKind::Transportation => "transportation",
        SlotKind::Breakfast => "breakfast",
        SlotKind::Lunch => "lunch",
        SlotKind::Dinner => "dinner",
        SlotKind::Attraction => "attraction",
        SlotKind::Accommodation => "accommodation",
    }
}

#[derive(Default)]
struct Acc {
    slots: BTreeSet<SlotId>,
    messages: Vec<String>,
}

impl Acc {
    fn flag(&mut self, slots: impl IntoIterator<Item = SlotId>, msg: String) {
        self.slots.extend(slots);
        self.messages.push(msg);
    }

    fn finish(self) -> (Vec<SlotId>, Vec<String>) {
        (self.slots.into_iter().collect(), self.messages)
    }
}

pub(super) fn evaluate_rule(
    rule: &Rule,
    a: &Assignment,
    d: &DomainSet,
    q: &StructuredQuery,
) -> (Vec<SlotId>, Vec<String>) {
    let mut acc = Acc::default();
    match rule {
        Rule::NoConflictingTransport => conflicting_transport(a, &mut acc),
        Rule::CompleteInformation => complete_information(a, q, &mut acc),
        Rule::ReasonableCityRoute => city_route(a, d, q, &mut acc),
        Rule::MinNightsRespected => min_nights(a, d, &mut acc),
        Rule::NoRepeatedRestaurants => repeated_restaurants(a, &mut acc),
        Rule::NoHallucinatedDetails => {
            for s in d.unprovenanced(q, a) {
                acc.flag(
                    [s],
                    format!("The {} information on Day {} is not in the collected data.", day_word(s.kind), s.day),
                );
            }
        }
        Rule::WithinCurrentCity => within_city(a, &mut acc),
        Rule::Budget { limit } => match plan_cost(d, q, a) {
            Ok(total) if total <= limit + 1e-9 => {}
            Ok(total) => acc.flag(
                a.iter().filter(|(s, _)| crate::cost::is_cost_bearing(s.kind)).map(|(s, _)| *s),
                format!("The total cost {} exceeds the budget of {}.", money(total), money(*limit)),
            ),
            Err(unresolved) => acc.flag(
                unresolved,
                "The total cost cannot be computed because some choices are not in the collected data.".into(),
            ),
        },
        Rule::Cuisine { cuisine } => {
            let served = a
                .meals()
                .any(|(_, p)| d.find_restaurant(p).is_some_and(|r| r.serves(cuisine)));
            if !served {
                acc.flag(
                    a.iter().filter(|(s, _)| s.kind.is_meal()).map(|(s, _)| *s),
                    format!("No chosen restaurant serves {cuisine} cuisine."),
                );
            }
        }
        Rule::RoomRule { allowance } => each_stay(a, |s, p| match d.find_stay(p) {
            Some(r) if !r.prohibits(*allowance) => {}
            Some(r) => acc.flag([s], format!("{} on Day {} does not allow {}.", r.name, s.day, allowance)),
            None => acc.flag([s], format!("The house rules of the stay on Day {} are unknown.", s.day)),
        }),
        Rule::RoomType { wanted } => each_stay(a, |s, p| match d.find_stay(p) {
            Some(r) if r.room_type.satisfies(*wanted) => {}
            Some(r) => acc.flag(
                [s],
                format!("{} on Day {} is a {}, not a {}.", r.name, s.day, r.room_type, wanted),
            ),
            None => acc.flag([s], format!("The room type of the stay on Day {} is unknown.", s.day)),
        }),
        Rule::MinNightsGate { city, nights } => each_stay(a, |s, p| {
            if fold(&p.city) != fold(city) {
                return;
            }
            match d.find_stay(p) {
                Some(r) if r.min_nights <= *nights => {}
                Some(r) => acc.flag(
                    [s],
                    format!("{} requires {} nights but only {} are spent in {}.", r.name, r.min_nights, nights, city),
                ),
                None => acc.flag([s], format!("The minimum stay on Day {} is unknown.", s.day)),
            }
        }),
        Rule::Transport { pref } => {
            for (s, v) in a.transports() {
                let bad = match pref {
                    TransportPref::NoFlights => matches!(v, Value::Flight { .. }),
                    TransportPref::NoSelfDriving => {
                        matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. })
                    }
                    TransportPref::MustSelfDrive => {
                        !matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. })
                    }
                };
                if bad {
                    acc.flag(
                        [s],
                        format!("The transportation on Day {} does not respect {}.", s.day, pref.as_str()),
                    );
                }
            }
        }
    }
    acc.finish()
}

fn each_stay(a: &Assignment, mut f: impl FnMut(SlotId, &crate::csp::Place)) {
    for (s, v) in a.iter() {
        if let (SlotKind::Accommodation, Value::Stay(p)) = (s.kind, v) {
            f(*s, p);
        }
    }
}

fn conflicting_transport(a: &Assignment, acc: &mut Acc) {
    let modes: Vec<(SlotId, &'static str)> = a
        .transports()
        .filter_map(|(s, v)| v.transport_mode().map(|m| (s, m)))
        .collect();
    let drives = modes.iter().any(|(_, m)| *m == "self-driving");
    let others = modes.iter().any(|(_, m)| *m != "self-driving");
    if drives && others {
        acc.flag(
            modes.iter().map(|(s, _)| *s),
            "The transportation plan is not logical: self-driving cannot be combined with flights or taxis."
                .into(),
        );
    }
}

fn complete_information(a: &Assignment, q: &StructuredQuery, acc: &mut Acc) {
    let travel: BTreeSet<u32> = q.travel_days().into_iter().collect();
    let n = a.days.max(q.days);
    for day in 1..=n {
        let is_travel = travel.contains(&day);
        let slot = |k| SlotId::new(day, k);
        if val(a, day, SlotKind::CurrentCity).is_empty() {
            acc.flag([slot(SlotKind::CurrentCity)], format!("The current city is missing for Day {day}."));
        }
        if is_travel && val(a, day, SlotKind::Transportation).is_empty() {
            acc.flag(
                [slot(SlotKind::Transportation)],
                format!("The transportation is missing for Day {day}."),
            );
        }
        let stay = val(a, day, SlotKind::Accommodation);
        if day < n && stay.is_empty() {
            acc.flag(
                [slot(SlotKind::Accommodation)],
                format!("The accommodation choice is missing for Day {day}."),
            );
        }
        if day == n && !stay.is_empty() {
            acc.flag(
                [slot(SlotKind::Accommodation)],
                format!("No accommodation should be booked on the last day (Day {day})."),
            );
        }
        if !is_travel {
            for m in SlotKind::MEALS {
                if val(a, day, m).is_empty() {
                    acc.flag([slot(m)], format!("The {} is missing for Day {day}.", day_word(m)));
                }
            }
            if val(a, day, SlotKind::Attraction).is_empty() {
                acc.flag([slot(SlotKind::Attraction)], format!("No attraction is planned for Day {day}."));
            }
        }
    }
}

fn city_route(a: &Assignment, d: &DomainSet, q: &StructuredQuery, acc: &mut Acc) {
    let n = a.days.max(q.days);
    let travel: BTreeSet<u32> = q.travel_days().into_iter().collect();
    let mut issues: Vec<String> = Vec::new();
    let origin = fold(&q.origin);

    let mut prev_end: Option<String> = Some(origin.clone());
    let mut destinations: Vec<&str> = Vec::new();
    for day in 1..=n {
        let label = val(a, day, SlotKind::CurrentCity);
        let want_travel = travel.contains(&day);
        match (label, want_travel) {
            (Value::Travel { to, .. }, true) => {
                if day != n {
                    destinations.push(to);
                }
            }
            (Value::City { .. }, false) => {}
            (Value::Travel { .. }, false) => issues.push(format!("Day {day} should be spent in one city.")),
            (Value::City { .. }, true) => issues.push(format!("Day {day} should be a travel day.")),
            _ => issues.push(format!("Day {day} has no city.")),
        }
        let cities = label.cities();
        if let (Some(prev), Some(start)) = (&prev_end, cities.first()) {
            if fold(start) != *prev {
                issues.push(format!("Day {day} starts in {start}, not where Day {} ended.", day - 1));
            }
        }
        prev_end = label.end_city().map(fold);
        if day == n && prev_end.as_deref() != Some(origin.as_str()) {
            issues.push(format!("The trip does not return to {}.", q.origin));
        }

        let t = val(a, day, SlotKind::Transportation);
        if let Some((from, to)) = t.transport_leg() {
            let matches = matches!(label, Value::Travel { from: f, to: tt } if fold(f) == fold(from) && fold(tt) == fold(to));
            if !matches {
                issues.push(format!("The transportation on Day {day} does not follow the route."));
            }
        }
    }

    let distinct: BTreeSet<String> = destinations.iter().map(|c| fold(c)).collect();
    if distinct.len() != destinations.len() {
        issues.push("A city is visited more than once.".into());
    }
    if destinations.len() != q.visiting_city_count as usize {
        issues.push(format!(
            "The route visits {} cities instead of {}.",
            destinations.len(),
            q.visiting_city_count
        ));
    }
    let pool = d.cities(&q.destination);
    for c in &destinations {
        let fc = fold(c);
        if fc == origin {
            issues.push(format!("{c} is the origin, not a destination."));
            continue;
        }
        let ok = fc == fold(&q.destination)
            || pool.as_ref().is_some_and(|p| p.iter().any(|x| fold(x) == fc));
        if !ok {
            issues.push(format!("{c} is not a city of {}.", q.destination));
        }
    }

    if !issues.is_empty() {
        let slots = (1..=n).flat_map(|day| {
            [
                SlotId::new(day, SlotKind::CurrentCity),
                SlotId::new(day, SlotKind::Transportation),
            ]
        });
        acc.slots.extend(slots);
        acc.messages.extend(issues);
    }
}

fn min_nights(a: &Assignment, d: &DomainSet, acc: &mut Acc) {
    let n = a.days;
    let mut day = 1;
    while day <= n {
        let Value::Stay(p) = val(a, day, SlotKind::Accommodation) else {
            day += 1;
            continue;
        };
        let key = p.key();
        let mut end = day;
        while end < n && matches!(val(a, end + 1, SlotKind::Accommodation), Value::Stay(x) if x.key() == key) {
            end += 1;
        }
        let run = end - day + 1;
        if let Some(r) = d.find_stay(p) {
            if r.min_nights > run {
                let mut slots: Vec<SlotId> = (day..=end).map(|x| SlotId::new(x, SlotKind::Accommodation)).collect();
                if day > 1 {
                    slots.push(SlotId::new(day - 1, SlotKind::Accommodation));
                }
                if end < n {
                    slots.push(SlotId::new(end + 1, SlotKind::Accommodation));
                }
                acc.flag(
                    slots,
                    format!("{} requires at least {} nights but is booked for {}.", r.name, r.min_nights, run),
                );
            }
        }
        day = end + 1;
    }
}

fn repeated_restaurants(a: &Assignment, acc: &mut Acc) {
    let mut first: BTreeMap<(String, String), SlotId> = BTreeMap::new();
    for (s, p) in a.meals() {
        match first.get(&p.key()) {
            Some(prev) => acc.flag([*prev, s], format!("{} is visited more than once.", p.name)),
            None => {
                first.insert(p.key(), s);
            }
        }
    }
}

fn within_city(a: &Assignment, acc: &mut Acc) {
    for day in 1..=a.days {
        let label = val(a, day, SlotKind::CurrentCity);
        let label_slot = SlotId::new(day, SlotKind::CurrentCity);
        let cities: Vec<String> = label.cities().into_iter().map(fold).collect();
        for kind in SlotKind::MEALS {
            if let Value::Restaurant(p) = val(a, day, kind) {
                if !cities.contains(&fold(&p.city)) {
                    acc.flag(
                        [label_slot, SlotId::new(day, kind)],
                        format!("The {} on Day {day} is in {}, outside that day's cities.", day_word(kind), p.city),
                    );
                }
            }
        }
        if let Value::Attractions { places } = val(a, day, SlotKind::Attraction) {
            for p in places {
                if !cities.contains(&fold(&p.city)) {
                    acc.flag(
                        [label_slot, SlotId::new(day, SlotKind::Attraction)],
                        format!("{} on Day {day} is outside that day's cities.", p.name),
                    );
                }
            }
        }
        if let Value::Stay(p) = val(a, day, SlotKind::Accommodation) {
            if label.end_city().map(fold) != Some(fold(&p.city)) {
                acc.flag(
                    [label_slot, SlotId::new(day, SlotKind::Accommodation)],
                    format!("The accommodation on Day {day} is not in the city where the day ends."),
                );
            }
        }
    }
}
