//! Reference predicates and an exhaustive enumerator, written against raw
//! sandbox records only. Used to cross-check the checker and the planner.

use std::collections::BTreeSet;

use tripcsp::sandbox::{GroundMode, RoomType, StayRec};
use tripcsp::{Assignment, Place, Sandbox, SlotId, SlotKind, StructuredQuery, TransportPref, Value};

fn low(s: &str) -> String {
    s.trim().to_lowercase()
}

fn get(a: &Assignment, day: u32, kind: SlotKind) -> Value {
    a.at(day, kind).cloned().unwrap_or(Value::Empty)
}

fn is_blank(v: &Value) -> bool {
    match v {
        Value::Empty => true,
        Value::Attractions { places } => places.is_empty(),
        _ => false,
    }
}

fn travel_days(q: &StructuredQuery) -> Vec<u32> {
    (1..=q.days).filter(|d| d % 2 == 1).collect()
}

fn label_cities(v: &Value) -> Vec<String> {
    match v {
        Value::City { city } => vec![low(city)],
        Value::Travel { from, to } => vec![low(from), low(to)],
        _ => vec![],
    }
}

fn label_end(v: &Value) -> Option<String> {
    match v {
        Value::City { city } => Some(low(city)),
        Value::Travel { to, .. } => Some(low(to)),
        _ => None,
    }
}

pub struct Oracle<'a> {
    pub sb: &'a Sandbox,
    pub q: &'a StructuredQuery,
}

impl<'a> Oracle<'a> {
    pub fn new(sb: &'a Sandbox, q: &'a StructuredQuery) -> Self {
        Self { sb, q }
    }

    fn stay(&self, p: &Place) -> Option<&StayRec> {
        self.sb
            .stays()
            .iter()
            .find(|r| low(&r.name) == low(&p.name) && low(&r.city) == low(&p.city))
    }

    fn restaurant(&self, p: &Place) -> Option<&tripcsp::sandbox::RestaurantRec> {
        self.sb
            .restaurants()
            .iter()
            .find(|r| low(&r.name) == low(&p.name) && low(&r.city) == low(&p.city))
    }

    fn attraction_exists(&self, p: &Place) -> bool {
        self.sb
            .attractions()
            .iter()
            .any(|r| low(&r.name) == low(&p.name) && low(&r.city) == low(&p.city))
    }

    fn flight(&self, day: u32, number: &str, from: &str, to: &str) -> Option<&tripcsp::sandbox::FlightRec> {
        let date = *self.q.dates.get(day as usize - 1)?;
        self.sb.flights().iter().find(|r| {
            r.date == date && low(&r.origin) == low(from) && low(&r.dest) == low(to) && low(&r.number) == low(number)
        })
    }

    fn ground_cost(&self, from: &str, to: &str, mode: GroundMode) -> Option<f64> {
        self.sb
            .ground()
            .iter()
            .filter(|r| low(&r.origin) == low(from) && low(&r.dest) == low(to) && r.mode == mode)
            .map(|r| r.cost)
            .min_by(f64::total_cmp)
    }

    fn known_cities(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for r in self.sb.flights() {
            out.insert(low(&r.origin));
            out.insert(low(&r.dest));
        }
        for r in self.sb.ground() {
            out.insert(low(&r.origin));
            out.insert(low(&r.dest));
        }
        out.extend(self.sb.stays().iter().map(|r| low(&r.city)));
        out.extend(self.sb.restaurants().iter().map(|r| low(&r.city)));
        out.extend(self.sb.attractions().iter().map(|r| low(&r.city)));
        for (_, cs) in self.sb.cities_by_state() {
            out.extend(cs.iter().map(|c| low(c)));
        }
        out
    }

    fn nights(&self) -> u32 {
        2
    }

    /// Constraint ids the instance should carry, in no particular order.
    pub fn ids(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = [
            "budget",
            "no-conflicting-transport",
            "complete-information",
            "reasonable-city-route",
            "min-nights-respected",
            "no-repeated-restaurants",
            "no-hallucinated-details",
            "within-current-city",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        let p = &self.q.prefs;
        out.extend(p.cuisines.iter().map(|c| format!("cuisine:{}", low(c))));
        out.extend(p.room_rules.iter().map(|a| format!("room-rule:{}", a.as_str())));
        if p.room_type.is_some() {
            out.insert("room-type".into());
        }
        if let Some(t) = p.transport {
            out.insert(format!("transport:{}", t.as_str()));
        }
        out.extend(self.sb.stays().iter().map(|r| format!("min-nights:{}", low(&r.city))));
        out
    }

    /// Ids of every violated constraint.
    pub fn violated(&self, a: &Assignment) -> BTreeSet<String> {
        let mut bad = BTreeSet::new();
        for id in self.ids() {
            if !self.holds(&id, a) {
                bad.insert(id);
            }
        }
        bad
    }

    pub fn feasible(&self, a: &Assignment) -> bool {
        self.violated(a).is_empty()
    }

    fn stays_in(&self, a: &Assignment) -> Vec<Place> {
        a.iter()
            .filter_map(|(s, v)| match (s.kind, v) {
                (SlotKind::Accommodation, Value::Stay(p)) => Some(p.clone()),
                _ => None,
            })
            .collect()
    }

    fn holds(&self, id: &str, a: &Assignment) -> bool {
        let (family, arg) = id.split_once(':').unwrap_or((id, ""));
        match family {
            "budget" => self.cost(a).is_some_and(|c| c <= self.q.budget + 1e-9),
            "cuisine" => a
                .meals()
                .any(|(_, p)| self.restaurant(p).is_some_and(|r| r.cuisines.iter().any(|c| low(c) == arg))),
            "room-rule" => self.stays_in(a).iter().all(|p| {
                self.stay(p).is_some_and(|r| {
                    !r.house_rules
                        .iter()
                        .any(|h| h.as_str().strip_prefix("no-") == Some(arg))
                })
            }),
            "room-type" => {
                let want = self.q.prefs.room_type.unwrap();
                self.stays_in(a).iter().all(|p| {
                    self.stay(p).is_some_and(|r| match want {
                        RoomType::NotSharedRoom => r.room_type != RoomType::SharedRoom,
                        w => r.room_type == w,
                    })
                })
            }
            "transport" => {
                let pref = self.q.prefs.transport.unwrap();
                (1..=a.days).all(|d| {
                    let v = get(a, d, SlotKind::Transportation);
                    let drive = matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. });
                    match (pref, &v) {
                        (_, v) if is_blank(v) => true,
                        (TransportPref::NoFlights, v) => !matches!(v, Value::Flight { .. }),
                        (TransportPref::NoSelfDriving, _) => !drive,
                        (TransportPref::MustSelfDrive, _) => drive,
                    }
                })
            }
            "min-nights" => self.stays_in(a).iter().filter(|p| low(&p.city) == arg).all(|p| {
                self.stay(p).is_some_and(|r| r.min_nights <= self.nights())
            }),
            "no-conflicting-transport" => {
                let mut drive = false;
                let mut other = false;
                for d in 1..=a.days {
                    match get(a, d, SlotKind::Transportation) {
                        Value::Ground { mode: GroundMode::SelfDriving, .. } => drive = true,
                        Value::Ground { .. } | Value::Flight { .. } => other = true,
                        _ => {}
                    }
                }
                !(drive && other)
            }
            "complete-information" => self.complete(a),
            "reasonable-city-route" => self.route_ok(a),
            "min-nights-respected" => self.runs_ok(a),
            "no-repeated-restaurants" => {
                let keys: Vec<(String, String)> = a.meals().map(|(_, p)| (low(&p.name), low(&p.city))).collect();
                let set: BTreeSet<_> = keys.iter().collect();
                set.len() == keys.len()
            }
            "no-hallucinated-details" => a.iter().all(|(s, v)| self.backed(*s, v)),
            "within-current-city" => self.within(a),
            other => panic!("oracle has no predicate for {other}"),
        }
    }

    fn cost(&self, a: &Assignment) -> Option<f64> {
        let n = self.q.people;
        let mut total = 0.0;
        for (s, v) in a.iter() {
            let bearing = matches!(s.kind, SlotKind::Transportation | SlotKind::Accommodation)
                || matches!(s.kind, SlotKind::Breakfast | SlotKind::Lunch | SlotKind::Dinner);
            if !bearing {
                continue;
            }
            total += match v {
                Value::Flight { number, from, to, .. } => self.flight(s.day, number, from, to)?.price * n as f64,
                Value::Ground { mode, from, to } => {
                    let cap = if *mode == GroundMode::SelfDriving { 5 } else { 4 };
                    self.ground_cost(from, to, *mode)? * n.div_ceil(cap) as f64
                }
                Value::Restaurant(p) => self.restaurant(p)?.avg_cost * n as f64,
                Value::Stay(p) => {
                    let r = self.stay(p)?;
                    r.price * n.div_ceil(r.max_occupancy.max(1)) as f64
                }
                _ => 0.0,
            };
        }
        Some(total)
    }

    fn complete(&self, a: &Assignment) -> bool {
        let n = a.days.max(self.q.days);
        let travel = travel_days(self.q);
        (1..=n).all(|d| {
            let t = travel.contains(&d);
            let stay = get(a, d, SlotKind::Accommodation);
            !is_blank(&get(a, d, SlotKind::CurrentCity))
                && (!t || !is_blank(&get(a, d, SlotKind::Transportation)))
                && (if d < n { !is_blank(&stay) } else { is_blank(&stay) })
                && (t
                    || [SlotKind::Breakfast, SlotKind::Lunch, SlotKind::Dinner, SlotKind::Attraction]
                        .iter()
                        .all(|k| !is_blank(&get(a, d, *k))))
        })
    }

    fn route_ok(&self, a: &Assignment) -> bool {
        let n = a.days.max(self.q.days);
        let travel = travel_days(self.q);
        let origin = low(&self.q.origin);
        let mut prev = Some(origin.clone());
        let mut dests = Vec::new();
        for d in 1..=n {
            let label = get(a, d, SlotKind::CurrentCity);
            let t = travel.contains(&d);
            match (&label, t) {
                (Value::Travel { to, .. }, true) => {
                    if d != n {
                        dests.push(low(to));
                    }
                }
                (Value::City { .. }, false) => {}
                _ => return false,
            }
            let cs = label_cities(&label);
            if let (Some(p), Some(first)) = (&prev, cs.first()) {
                if p != first {
                    return false;
                }
            }
            prev = label_end(&label);
            if d == n && prev.as_deref() != Some(origin.as_str()) {
                return false;
            }
            let tr = get(a, d, SlotKind::Transportation);
            let leg = match &tr {
                Value::Flight { from, to, .. } | Value::Ground { from, to, .. } => Some((low(from), low(to))),
                _ => None,
            };
            if let Some((f, to)) = leg {
                if cs != vec![f, to] || !label.is_travel() {
                    return false;
                }
            }
        }
        let distinct: BTreeSet<&String> = dests.iter().collect();
        if distinct.len() != dests.len() || dests.len() != self.q.visiting_city_count as usize {
            return false;
        }
        let pool: Vec<String> = self.sb.cities_in(&self.q.destination).iter().map(|c| low(c)).collect();
        dests
            .iter()
            .all(|c| *c != origin && (*c == low(&self.q.destination) || pool.contains(c)))
    }

    fn runs_ok(&self, a: &Assignment) -> bool {
        let mut d = 1;
        while d <= a.days {
            let Value::Stay(p) = get(a, d, SlotKind::Accommodation) else {
                d += 1;
                continue;
            };
            let mut end = d;
            while end < a.days && matches!(get(a, end + 1, SlotKind::Accommodation), Value::Stay(x) if low(&x.name) == low(&p.name) && low(&x.city) == low(&p.city))
            {
                end += 1;
            }
            if self.stay(&p).is_some_and(|r| r.min_nights > end - d + 1) {
                return false;
            }
            d = end + 1;
        }
        true
    }

    fn backed(&self, s: SlotId, v: &Value) -> bool {
        let known = || self.known_cities();
        let city_ok = |c: &str| low(c) == low(&self.q.origin) || known().contains(&low(c));
        match v {
            Value::Empty => true,
            Value::City { city } => city_ok(city),
            Value::Travel { from, to } => city_ok(from) && city_ok(to),
            Value::Flight { number, from, to, dep, arr } => self
                .flight(s.day, number, from, to)
                .is_some_and(|r| r.dep_time == *dep && r.arr_time == *arr),
            Value::Ground { mode, from, to } => self.ground_cost(from, to, *mode).is_some(),
            Value::Restaurant(p) => {
                matches!(s.kind, SlotKind::Breakfast | SlotKind::Lunch | SlotKind::Dinner) && self.restaurant(p).is_some()
            }
            Value::Stay(p) => s.kind == SlotKind::Accommodation && self.stay(p).is_some(),
            Value::Attractions { places } => places.iter().all(|p| self.attraction_exists(p)),
        }
    }

    fn within(&self, a: &Assignment) -> bool {
        (1..=a.days).all(|d| {
            let label = get(a, d, SlotKind::CurrentCity);
            let cs = label_cities(&label);
            let meals_ok = [SlotKind::Breakfast, SlotKind::Lunch, SlotKind::Dinner].iter().all(|k| {
                match get(a, d, *k) {
                    Value::Restaurant(p) => cs.contains(&low(&p.city)),
                    _ => true,
                }
            });
            let sights_ok = match get(a, d, SlotKind::Attraction) {
                Value::Attractions { places } => places.iter().all(|p| cs.contains(&low(&p.city))),
                _ => true,
            };
            let stay_ok = match get(a, d, SlotKind::Accommodation) {
                Value::Stay(p) => label_end(&label) == Some(low(&p.city)),
                _ => true,
            };
            meals_ok && sights_ok && stay_ok
        })
    }

    /// Exhaustively searches every 3-day single-city itinerary drawn from
    /// the raw records. Only monotone prunes are used (running cost over
    /// budget, a restaurant repeated), so the answer is exact.
    pub fn solve_single_city(&self) -> Option<Assignment> {
        assert_eq!(self.q.days, 3);
        let (home, city) = (self.q.origin.clone(), self.q.destination.clone());
        let n = self.q.people;
        let leg = |from: &str, to: &str, day: u32| -> Vec<(Value, f64)> {
            let date = self.q.dates[day as usize - 1];
            let mut out: Vec<(Value, f64)> = Vec::new();
            for r in self.sb.flights() {
                if r.date == date && low(&r.origin) == low(from) && low(&r.dest) == low(to) {
                    let v = Value::Flight {
                        number: r.number.clone(),
                        from: from.to_string(),
                        to: to.to_string(),
                        dep: r.dep_time.clone(),
                        arr: r.arr_time.clone(),
                    };
                    if !out.iter().any(|(x, _)| *x == v) {
                        out.push((v, r.price * n as f64));
                    }
                }
            }
            for mode in [GroundMode::SelfDriving, GroundMode::Taxi] {
                if let Some(c) = self.ground_cost(from, to, mode) {
                    let cap = if mode == GroundMode::SelfDriving { 5 } else { 4 };
                    out.push((
                        Value::Ground {
                            mode,
                            from: from.to_string(),
                            to: to.to_string(),
                        },
                        c * n.div_ceil(cap) as f64,
                    ));
                }
            }
            out
        };
        let out_legs = leg(&home, &city, 1);
        let back_legs = leg(&city, &home, 3);
        let in_city = |c: &str| low(c) == low(&city);
        let stays: Vec<(Value, f64)> = self
            .sb
            .stays()
            .iter()
            .filter(|r| in_city(&r.city))
            .map(|r| (Value::Stay(Place::new(&r.name, &r.city)), r.price * n.div_ceil(r.max_occupancy.max(1)) as f64))
            .collect();
        let rests: Vec<(Place, f64)> = self
            .sb
            .restaurants()
            .iter()
            .filter(|r| in_city(&r.city))
            .map(|r| (Place::new(&r.name, &r.city), r.avg_cost * n as f64))
            .collect();
        let sights: Vec<Value> = self
            .sb
            .attractions()
            .iter()
            .filter(|r| in_city(&r.city))
            .map(|r| Value::Attractions { places: vec![Place::new(&r.name, &r.city)] })
            .collect();

        let mut base = Assignment::new(3);
        base.set(SlotId::new(1, SlotKind::CurrentCity), Value::Travel { from: home.clone(), to: city.clone() });
        base.set(SlotId::new(2, SlotKind::CurrentCity), Value::City { city: city.clone() });
        base.set(SlotId::new(3, SlotKind::CurrentCity), Value::Travel { from: city.clone(), to: home.clone() });
        base.set(SlotId::new(2, SlotKind::Transportation), Value::Empty);
        base.set(SlotId::new(3, SlotKind::Accommodation), Value::Empty);

        let optional_sights: Vec<Value> = std::iter::once(Value::Empty).chain(sights.iter().cloned()).collect();
        let meal_slots: Vec<(SlotId, bool)> = [1u32, 2, 3]
            .into_iter()
            .flat_map(|d| {
                [SlotKind::Breakfast, SlotKind::Lunch, SlotKind::Dinner]
                    .into_iter()
                    .map(move |k| (SlotId::new(d, k), d != 2))
            })
            .collect();
        let budget = self.q.budget + 1e-9;

        for (t1, c1) in &out_legs {
            for (t3, c3) in &back_legs {
                for (s1, k1) in &stays {
                    for (s2, k2) in &stays {
                        let fixed = c1 + c3 + k1 + k2;
                        if fixed > budget {
                            continue;
                        }
                        for a1 in &optional_sights {
                            for a2 in &sights {
                                for a3 in &optional_sights {
                                    let mut a = base.clone();
                                    a.set(SlotId::new(1, SlotKind::Transportation), t1.clone());
                                    a.set(SlotId::new(3, SlotKind::Transportation), t3.clone());
                                    a.set(SlotId::new(1, SlotKind::Accommodation), s1.clone());
                                    a.set(SlotId::new(2, SlotKind::Accommodation), s2.clone());
                                    a.set(SlotId::new(1, SlotKind::Attraction), a1.clone());
                                    a.set(SlotId::new(2, SlotKind::Attraction), a2.clone());
                                    a.set(SlotId::new(3, SlotKind::Attraction), a3.clone());
                                    let mut used = vec![false; rests.len()];
                                    if let Some(found) =
                                        self.meals(&mut a, &meal_slots, 0, &rests, &mut used, fixed, budget)
                                    {
                                        return Some(found);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn meals(
        &self,
        a: &mut Assignment,
        slots: &[(SlotId, bool)],
        i: usize,
        rests: &[(Place, f64)],
        used: &mut [bool],
        spent: f64,
        budget: f64,
    ) -> Option<Assignment> {
        if i == slots.len() {
            return self.feasible(a).then(|| a.clone());
        }
        let (slot, optional) = slots[i];
        if optional {
            a.set(slot, Value::Empty);
            if let Some(x) = self.meals(a, slots, i + 1, rests, used, spent, budget) {
                return Some(x);
            }
        }
        for (j, (p, c)) in rests.iter().enumerate() {
            if used[j] || spent + c > budget {
                continue;
            }
            used[j] = true;
            a.set(slot, Value::Restaurant(p.clone()));
            let r = self.meals(a, slots, i + 1, rests, used, spent + c, budget);
            used[j] = false;
            if r.is_some() {
                return r;
            }
        }
        None
    }
}
