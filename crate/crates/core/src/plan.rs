//! Day-by-day plan records, the interchange format for delivered plans.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csp::{Assignment, Place, SlotId, SlotKind, Value};
use crate::sandbox::{clock_minutes, GroundMode};

/// One day of a delivered plan. Field order is the on-wire key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    pub current_city: String,
    pub transportation: String,
    pub breakfast: String,
    pub attraction: String,
    pub lunch: String,
    pub dinner: String,
    pub accommodation: String,
}

pub type PlanRecord = Vec<DayRecord>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("assignment is missing {} slot(s), first {}", .0.len(), .0[0])]
    IncompleteAssignment(Vec<SlotId>),
    #[error("day {day}: malformed {field}: `{text}`")]
    FormatError { day: u32, field: String, text: String },
    #[error("plan is not valid JSON: {0}")]
    Json(String),
}

const EMPTY: &str = "-";
const ROOM_TYPE_TAGS: [&str; 6] = [
    "entire house",
    "entire home/apt",
    "entire room",
    "private room",
    "shared room",
    "not shared room",
];

pub fn serialize_plan(a: &Assignment) -> Result<PlanRecord, PlanError> {
    let missing = a.missing_slots();
    if !missing.is_empty() {
        return Err(PlanError::IncompleteAssignment(missing));
    }
    let get = |day, kind| a.at(day, kind).expect("complete");
    Ok((1..=a.days)
        .map(|day| DayRecord {
            day,
            current_city: render_city(get(day, SlotKind::CurrentCity)),
            transportation: render_transport(get(day, SlotKind::Transportation)),
            breakfast: render_place(get(day, SlotKind::Breakfast)),
            attraction: render_attractions(get(day, SlotKind::Attraction)),
            lunch: render_place(get(day, SlotKind::Lunch)),
            dinner: render_place(get(day, SlotKind::Dinner)),
            accommodation: render_place(get(day, SlotKind::Accommodation)),
        })
        .collect())
}

/// Pretty JSON with four-space indentation.
pub fn plan_to_json(plan: &PlanRecord) -> String {
    let mut buf = Vec::new();
    let fmt = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    plan.serialize(&mut ser).expect("plan records always serialize");
    String::from_utf8(buf).expect("utf-8")
}

pub fn plan_from_json(text: &str) -> Result<PlanRecord, PlanError> {
    serde_json::from_str(text).map_err(|e| PlanError::Json(e.to_string()))
}

fn render_city(v: &Value) -> String {
    match v {
        Value::City { city } => city.clone(),
        Value::Travel { from, to } => format!("from {from} to {to}"),
        _ => EMPTY.to_string(),
    }
}

fn render_transport(v: &Value) -> String {
    match v {
        Value::Flight {
            number,
            from,
            to,
            dep,
            arr,
        } => format!("Flight Number: {number}, from {from} to {to}, Departure Time: {dep}, Arrival Time: {arr}"),
        Value::Ground { mode, from, to } => format!("{mode}, from {from} to {to}"),
        _ => EMPTY.to_string(),
    }
}

fn render_place(v: &Value) -> String {
    match v.place() {
        Some(p) => format!("{}, {}", p.name, p.city),
        None => EMPTY.to_string(),
    }
}

fn render_attractions(v: &Value) -> String {
    match v {
        Value::Attractions { places } if !places.is_empty() => {
            places.iter().map(|p| format!("{}, {};", p.name, p.city)).collect()
        }
        _ => EMPTY.to_string(),
    }
}

/// A parsed plan together with the slots whose values have no provenance
/// in `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPlan {
    pub assignment: Assignment,
    pub unprovenanced: Vec<SlotId>,
}

pub fn parse_plan_with(
    plan: &PlanRecord,
    d: &crate::domains::DomainSet,
    q: &crate::query::StructuredQuery,
) -> Result<ParsedPlan, PlanError> {
    let assignment = parse_plan(plan)?;
    let unprovenanced = d.unprovenanced(q, &assignment);
    Ok(ParsedPlan {
        assignment,
        unprovenanced,
    })
}

/// Parses a plan record back into an assignment. Names are not resolved
/// here; see [`crate::domains::DomainSet::unprovenanced`].
pub fn parse_plan(plan: &PlanRecord) -> Result<Assignment, PlanError> {
    let mut a = Assignment::new(plan.len() as u32);
    for (i, rec) in plan.iter().enumerate() {
        let day = i as u32 + 1;
        if rec.day != day {
            return Err(fmt_err(day, "day", &rec.day.to_string()));
        }
        a.set(SlotId::new(day, SlotKind::CurrentCity), parse_city(day, &rec.current_city)?);
        a.set(
            SlotId::new(day, SlotKind::Transportation),
            parse_transport(day, &rec.transportation)?,
        );
        a.set(
            SlotId::new(day, SlotKind::Breakfast),
            parse_place(day, "breakfast", &rec.breakfast, false)?.map_or(Value::Empty, Value::Restaurant),
        );
        a.set(SlotId::new(day, SlotKind::Attraction), parse_attractions(day, &rec.attraction)?);
        a.set(
            SlotId::new(day, SlotKind::Lunch),
            parse_place(day, "lunch", &rec.lunch, false)?.map_or(Value::Empty, Value::Restaurant),
        );
        a.set(
            SlotId::new(day, SlotKind::Dinner),
            parse_place(day, "dinner", &rec.dinner, false)?.map_or(Value::Empty, Value::Restaurant),
        );
        a.set(
            SlotId::new(day, SlotKind::Accommodation),
            parse_place(day, "accommodation", &rec.accommodation, true)?.map_or(Value::Empty, Value::Stay),
        );
    }
    Ok(a)
}

fn fmt_err(day: u32, field: &str, text: &str) -> PlanError {
    PlanError::FormatError {
        day,
        field: field.to_string(),
        text: text.to_string(),
    }
}

fn is_empty_text(s: &str) -> bool {
    let s = s.trim();
    s.is_empty() || s == EMPTY
}

fn split_from_to(s: &str) -> Option<(String, String)> {
    let rest = s.strip_prefix("from ")?;
    let (from, to) = rest.split_once(" to ")?;
    let (from, to) = (from.trim(), to.trim());
    (!from.is_empty() && !to.is_empty()).then(|| (from.to_string(), to.to_string()))
}

fn parse_city(day: u32, s: &str) -> Result<Value, PlanError> {
    let s = s.trim();
    if is_empty_text(s) {
        return Ok(Value::Empty);
    }
    if s.starts_with("from ") {
        let (from, to) = split_from_to(s).ok_or_else(|| fmt_err(day, "current_city", s))?;
        return Ok(Value::Travel { from, to });
    }
    Ok(Value::City { city: s.to_string() })
}

fn parse_transport(day: u32, s: &str) -> Result<Value, PlanError> {
    let s = s.trim();
    if is_empty_text(s) {
        return Ok(Value::Empty);
    }
    let bad = || fmt_err(day, "transportation", s);
    if let Some(rest) = s.strip_prefix("Flight Number: ") {
        let (number, rest) = rest.split_once(", ").ok_or_else(bad)?;
        let (route, times) = rest.split_once(", Departure Time: ").ok_or_else(bad)?;
        let (dep, arr) = times.split_once(", Arrival Time: ").ok_or_else(bad)?;
        let (from, to) = split_from_to(route).ok_or_else(bad)?;
        let (dep, arr) = (dep.trim(), arr.trim());
        if clock_minutes(dep).is_none() || clock_minutes(arr).is_none() || number.trim().is_empty() {
            return Err(bad());
        }
        return Ok(Value::Flight {
            number: number.trim().to_string(),
            from,
            to,
            dep: dep.to_string(),
            arr: arr.to_string(),
        });
    }
    let (mode, route) = s.split_once(", ").ok_or_else(bad)?;
    let mode: GroundMode = mode.parse().map_err(|_| bad())?;
    let (from, to) = split_from_to(route.trim()).ok_or_else(bad)?;
    Ok(Value::Ground { mode, from, to })
}

fn parse_place(day: u32, field: &str, s: &str, strip_room_type: bool) -> Result<Option<Place>, PlanError> {
    let s = s.trim();
    if is_empty_text(s) {
        return Ok(None);
    }
    let (mut name, city) = s.rsplit_once(", ").ok_or_else(|| fmt_err(day, field, s))?;
    if strip_room_type {
        if let Some((head, tag)) = name.rsplit_once(", ") {
            if ROOM_TYPE_TAGS.contains(&tag.trim().to_ascii_lowercase().as_str()) {
                name = head;
            }
        }
    }
    let (name, city) = (name.trim(), city.trim());
    if name.is_empty() || city.is_empty() {
        return Err(fmt_err(day, field, s));
    }
    Ok(Some(Place::new(name, city)))
}

fn parse_attractions(day: u32, s: &str) -> Result<Value, PlanError> {
    let s = s.trim();
    if is_empty_text(s) {
        return Ok(Value::Empty);
    }
    let mut places = Vec::new();
    for part in s.split(';') {
        let part = part.trim();
        let part = part.strip_suffix('.').unwrap_or(part).trim();
        if part.is_empty() {
            continue;
        }
        let place = parse_place(day, "attraction", part, false)?.ok_or_else(|| fmt_err(day, "attraction", s))?;
        places.push(place);
    }
    if places.is_empty() {
        return Ok(Value::Empty);
    }
    Ok(Value::Attractions { places })
}
