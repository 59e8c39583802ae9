//! SearchAdvise: turns an unsat outcome into new tool directives through a
//! fixed diagnosis-to-remedy table.

use std::collections::BTreeSet;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{AttemptHistory, CertificateKind, UnsatCertificate};
use crate::csp::{Assignment, CspInstance, SlotId, SlotKind, Value};
use crate::planner::PlanError;
use crate::sandbox::{fold, GroundMode, Tool, ToolDirective};
use crate::search::{destination_is_state, leg_directives, SearchFeedback};
use crate::space::{is_required, route_skeleton, stay_candidates, Route, SlotDomains};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapKind {
    MissingLeg,
    NoStayUnderConstraints,
    InsufficientRestaurants,
    InsufficientAttractions,
    BudgetInfeasible,
    NoRouteCity,
}

impl GapKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GapKind::MissingLeg => "missing-leg",
            GapKind::NoStayUnderConstraints => "no-stay-under-constraints",
            GapKind::InsufficientRestaurants => "insufficient-restaurants",
            GapKind::InsufficientAttractions => "insufficient-attractions",
            GapKind::BudgetInfeasible => "budget-infeasible",
            GapKind::NoRouteCity => "no-route-city",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GapContext {
    Leg { from: String, to: String, date: NaiveDate },
    Cities { cities: Vec<String>, need: String },
    Destination { name: String },
}

impl fmt::Display for GapContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapContext::Leg { from, to, date } => write!(f, "{from}→{to}, {date}"),
            GapContext::Cities { cities, need } if need.is_empty() => write!(f, "{}", cities.join(", ")),
            GapContext::Cities { cities, need } => write!(f, "{}; {need}", cities.join(", ")),
            GapContext::Destination { name } => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Evidence {
    Certificate(UnsatCertificate),
    EmptyDomain { slot: SlotId },
    NoRoute { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapDiagnosis {
    pub kind: GapKind,
    pub context: GapContext,
    pub evidence: Evidence,
}

impl fmt::Display for GapDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.as_str(), self.context)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdviseError {
    #[error("no information gap found")]
    NoGapFound,
    #[error("every suggested directive was already executed")]
    Exhausted,
}

/// Diagnoses the certificates of the last attempt in `hist`.
pub fn diagnose(inst: &CspInstance, hist: &AttemptHistory) -> Result<Vec<GapDiagnosis>, AdviseError> {
    let last = hist.last().ok_or(AdviseError::NoGapFound)?;
    let sd = SlotDomains::build(&inst.query, &inst.domains);
    let mut out = Vec::new();
    for c in &last.feedback.unsat_certificates {
        out.extend(from_certificate(inst, &sd, &last.assignment, c));
    }
    finish(out)
}

/// Diagnoses a planner failure.
pub fn diagnose_error(inst: &CspInstance, err: &PlanError) -> Result<Vec<GapDiagnosis>, AdviseError> {
    let q = &inst.query;
    let out = match err {
        PlanError::NoRoute(detail) => vec![GapDiagnosis {
            kind: GapKind::NoRouteCity,
            context: GapContext::Destination {
                name: q.destination.clone(),
            },
            evidence: Evidence::NoRoute { detail: detail.clone() },
        }],
        PlanError::EmptyDomain(slot) => {
            let a = Assignment::new(q.days);
            let sd = SlotDomains::build(q, &inst.domains);
            let mut v = slot_gaps(inst, &sd, &a, &[*slot], &Evidence::EmptyDomain { slot: *slot });
            if v.is_empty() || sd.routes.is_empty() {
                v.push(GapDiagnosis {
                    kind: GapKind::NoRouteCity,
                    context: GapContext::Destination {
                        name: q.destination.clone(),
                    },
                    evidence: Evidence::EmptyDomain { slot: *slot },
                });
            }
            v
        }
    };
    finish(out)
}

fn finish(mut out: Vec<GapDiagnosis>) -> Result<Vec<GapDiagnosis>, AdviseError> {
    out.sort_by(|a, b| (a.kind, &a.context).cmp(&(b.kind, &b.context)));
    out.dedup_by(|a, b| a.kind == b.kind && a.context == b.context);
    if out.is_empty() {
        Err(AdviseError::NoGapFound)
    } else {
        Ok(out)
    }
}

fn from_certificate(inst: &CspInstance, sd: &SlotDomains, a: &Assignment, c: &UnsatCertificate) -> Vec<GapDiagnosis> {
    let q = &inst.query;
    let evidence = Evidence::Certificate(c.clone());
    if c.kind == CertificateKind::RepeatedFailure {
        let empty: Vec<SlotId> = c
            .slots
            .iter()
            .copied()
            .filter(|s| is_required(q, *s) && sd.filled(*s).next().is_none())
            .collect();
        return slot_gaps(inst, sd, a, &empty, &evidence);
    }
    if c.kind == CertificateKind::EmptyDomain {
        return slot_gaps(inst, sd, a, &c.slots, &evidence);
    }
    let id = c.constraint_id.as_str();
    let route = route_cities(inst, sd, a);
    let cities_of = |slots: &[SlotId]| -> Vec<String> {
        let mut cs: Vec<String> = Vec::new();
        for s in slots {
            for city in day_cities(inst, sd, a, s.day) {
                if !cs.contains(&city) {
                    cs.push(city);
                }
            }
        }
        cs
    };
    let gap = |kind: GapKind, cities: Vec<String>, need: String| GapDiagnosis {
        kind,
        context: GapContext::Cities { cities, need },
        evidence: evidence.clone(),
    };
    if id == "budget" {
        vec![gap(GapKind::BudgetInfeasible, route, String::new())]
    } else if let Some(cuisine) = id.strip_prefix("cuisine:") {
        vec![gap(GapKind::InsufficientRestaurants, route, cuisine.to_string())]
    } else if id == "no-repeated-restaurants" {
        vec![gap(GapKind::InsufficientRestaurants, cities_of(&c.slots), String::new())]
    } else if id.starts_with("room-rule:") || id == "room-type" || id.starts_with("min-nights") {
        vec![gap(GapKind::NoStayUnderConstraints, cities_of(&c.slots), id.to_string())]
    } else if id.starts_with("transport:") || id == "no-conflicting-transport" {
        c.slots
            .iter()
            .filter(|s| s.kind == SlotKind::Transportation)
            .filter_map(|s| leg_on(inst, sd, a, s.day))
            .map(|(from, to, date)| GapDiagnosis {
                kind: GapKind::MissingLeg,
                context: GapContext::Leg { from, to, date },
                evidence: evidence.clone(),
            })
            .collect()
    } else {
        slot_gaps(inst, sd, a, &c.slots, &evidence)
    }
}

/// Gaps implied by required slots without candidates.
fn slot_gaps(inst: &CspInstance, sd: &SlotDomains, a: &Assignment, slots: &[SlotId], evidence: &Evidence) -> Vec<GapDiagnosis> {
    let q = &inst.query;
    let mut out = Vec::new();
    for s in slots {
        let cities = day_cities(inst, sd, a, s.day);
        let kind = match s.kind {
            SlotKind::Transportation => {
                if let Some((from, to, date)) = leg_on(inst, sd, a, s.day) {
                    out.push(GapDiagnosis {
                        kind: GapKind::MissingLeg,
                        context: GapContext::Leg { from, to, date },
                        evidence: evidence.clone(),
                    });
                }
                continue;
            }
            SlotKind::CurrentCity => {
                out.push(GapDiagnosis {
                    kind: GapKind::NoRouteCity,
                    context: GapContext::Destination {
                        name: q.destination.clone(),
                    },
                    evidence: evidence.clone(),
                });
                continue;
            }
            SlotKind::Accommodation => GapKind::NoStayUnderConstraints,
            SlotKind::Attraction => GapKind::InsufficientAttractions,
            _ => GapKind::InsufficientRestaurants,
        };
        let cities = if kind == GapKind::NoStayUnderConstraints {
            cities.into_iter().take(1).collect()
        } else {
            cities
        };
        out.push(GapDiagnosis {
            kind,
            context: GapContext::Cities {
                cities,
                need: String::new(),
            },
            evidence: evidence.clone(),
        });
    }
    out
}

fn fallback_route<'a>(sd: &'a SlotDomains) -> Option<&'a Route> {
    sd.routes.first()
}

fn label_of(sd: &SlotDomains, a: &Assignment, day: u32) -> Option<Value> {
    match a.current_city(day) {
        Some(v) if !v.is_empty() => Some(v.clone()),
        _ => fallback_route(sd).map(|r| r.label(day).clone()),
    }
}

fn day_cities(inst: &CspInstance, sd: &SlotDomains, a: &Assignment, day: u32) -> Vec<String> {
    match label_of(sd, a, day) {
        Some(Value::Travel { to, .. }) if day < inst.query.days => vec![to],
        Some(Value::Travel { from, .. }) => vec![from],
        Some(v) => v.cities().into_iter().map(str::to_string).collect(),
        None => Vec::new(),
    }
}

fn leg_on(inst: &CspInstance, sd: &SlotDomains, a: &Assignment, day: u32) -> Option<(String, String, NaiveDate)> {
    match label_of(sd, a, day)? {
        Value::Travel { from, to } => Some((from, to, inst.query.date_of(day))),
        _ => None,
    }
}

/// The visited cities of the attempt (or of the cheapest route).
fn route_cities(inst: &CspInstance, sd: &SlotDomains, a: &Assignment) -> Vec<String> {
    let q = &inst.query;
    (0..q.visiting_city_count)
        .filter_map(|i| match label_of(sd, a, 2 * i + 2)? {
            Value::City { city } => Some(city),
            _ => None,
        })
        .collect()
}

/// Legs of the closed loop through `cities`, with their dates.
fn loop_legs(inst: &CspInstance, cities: &[String]) -> Vec<(String, String, NaiveDate)> {
    let q = &inst.query;
    let mut stops = vec![q.origin.clone()];
    stops.extend(cities.iter().cloned());
    stops.push(q.origin.clone());
    stops
        .windows(2)
        .zip(q.travel_days())
        .map(|(w, day)| (w[0].clone(), w[1].clone(), q.date_of(day)))
        .collect()
}

/// Maps diagnoses to new directives, dropping any already executed.
pub fn advise(
    inst: &CspInstance,
    hist: &AttemptHistory,
    executed: &BTreeSet<ToolDirective>,
) -> Result<SearchFeedback, AdviseError> {
    let diags = diagnose(inst, hist)?;
    let a = hist.last().map(|x| x.assignment.clone()).unwrap_or_else(|| Assignment::new(inst.query.days));
    remedy(inst, &a, &diags, executed)
}

/// Like [`advise`], for a planner error instead of an unsat verdict.
pub fn advise_error(
    inst: &CspInstance,
    err: &PlanError,
    executed: &BTreeSet<ToolDirective>,
) -> Result<SearchFeedback, AdviseError> {
    let diags = diagnose_error(inst, err)?;
    remedy(inst, &Assignment::new(inst.query.days), &diags, executed)
}

pub fn remedy(
    inst: &CspInstance,
    a: &Assignment,
    diags: &[GapDiagnosis],
    executed: &BTreeSet<ToolDirective>,
) -> Result<SearchFeedback, AdviseError> {
    let sd = SlotDomains::build(&inst.query, &inst.domains);
    let mut out: Vec<ToolDirective> = Vec::new();
    let push = |d: ToolDirective, out: &mut Vec<ToolDirective>| {
        let n = d.normalized();
        let args: Vec<&str> = d.args.iter().map(String::as_str).collect();
        if !executed.contains(&n)
            && !inst.domains.searched(d.tool, &args)
            && !out.iter().any(|x| x.normalized() == n)
        {
            out.push(d);
        }
    };
    let mut rationale = Vec::new();
    for g in diags {
        rationale.push(g.to_string());
        for d in table(inst, &sd, a, g) {
            push(d, &mut out);
        }
    }
    if out.is_empty() {
        return Err(AdviseError::Exhausted);
    }
    Ok(SearchFeedback {
        directives: out,
        rationale: rationale.join("; "),
    })
}

/// The diagnosis-to-directive table.
fn table(inst: &CspInstance, sd: &SlotDomains, a: &Assignment, g: &GapDiagnosis) -> Vec<ToolDirective> {
    let q = &inst.query;
    let d = &inst.domains;
    let route = route_cities(inst, sd, a);
    match (&g.kind, &g.context) {
        (GapKind::MissingLeg, GapContext::Leg { from, to, date }) => {
            let mut legs: Vec<(String, String, NaiveDate)> = Vec::new();
            for r in known_routes(inst) {
                for leg in loop_legs(inst, &r.cities) {
                    if !legs.contains(&leg) {
                        legs.push(leg);
                    }
                }
            }
            let missing = (from.clone(), to.clone(), *date);
            if !legs.contains(&missing) {
                legs.push(missing);
            }
            let mut flights = Vec::new();
            let mut ground = Vec::new();
            for (f, t, day) in &legs {
                let [fl, sd_, tx] = leg_directives(f, t, *day);
                if d.searched(Tool::FlightSearch, &[f.as_str(), t.as_str(), &day.to_string()]) {
                    ground.push(sd_);
                    ground.push(tx);
                } else {
                    flights.push(fl);
                }
            }
            flights.extend(ground);
            flights
        }
        (GapKind::NoStayUnderConstraints, GapContext::Cities { cities, .. }) => {
            let unsearched: Vec<ToolDirective> = cities
                .iter()
                .filter(|c| !d.searched(Tool::AccommodationSearch, &[c.as_str()]))
                .map(|c| ToolDirective::stays(c))
                .collect();
            if !unsearched.is_empty() {
                return unsearched;
            }
            let failing = cities.first().cloned().or_else(|| route.last().cloned());
            alternate_package(inst, &route, failing.as_deref(), |c| {
                stay_candidates(d, c).len()
            })
        }
        (GapKind::InsufficientRestaurants, GapContext::Cities { cities, need }) => {
            let mut out: Vec<ToolDirective> = route
                .iter()
                .chain(cities.iter())
                .filter(|c| !d.searched(Tool::RestaurantSearch, &[c.as_str()]))
                .map(|c| ToolDirective::restaurants(c))
                .collect();
            if out.is_empty() {
                let failing = route.last().cloned();
                let need = need.clone();
                out = alternate_package(inst, &route, failing.as_deref(), |c| {
                    d.restaurants(c).iter().filter(|r| need.is_empty() || r.record.serves(&need)).count()
                });
            }
            out
        }
        (GapKind::InsufficientAttractions, GapContext::Cities { cities, .. }) => {
            let mut out: Vec<ToolDirective> = route
                .iter()
                .chain(cities.iter())
                .filter(|c| !d.searched(Tool::AttractionSearch, &[c.as_str()]))
                .map(|c| ToolDirective::attractions(c))
                .collect();
            if out.is_empty() {
                out = alternate_package(inst, &route, route.last().map(String::as_str), |c| d.attractions(c).len());
            }
            out
        }
        (GapKind::BudgetInfeasible, _) => {
            let mut out = Vec::new();
            for (f, t, date) in loop_legs(inst, &route) {
                if !d.flights(&f, &t, date).is_empty() {
                    out.push(ToolDirective::ground(&f, &t, GroundMode::SelfDriving));
                }
            }
            out
        }
        (GapKind::NoRouteCity, _) => {
            if destination_is_state(q) {
                vec![ToolDirective::cities(&q.destination)]
            } else {
                vec![
                    ToolDirective::stays(&q.destination),
                    ToolDirective::restaurants(&q.destination),
                    ToolDirective::attractions(&q.destination),
                ]
            }
        }
        _ => Vec::new(),
    }
}

/// Routes whose every city already has a stay search on record.
fn known_routes(inst: &CspInstance) -> Vec<Route> {
    let d = &inst.domains;
    route_skeleton(&inst.query, d)
        .unwrap_or_default()
        .into_iter()
        .filter(|r| r.cities.iter().all(|c| d.searched(Tool::AccommodationSearch, &[c.as_str()])))
        .collect()
}

/// Everything needed to swap `failing` for the best alternate city of the
/// state pool: its stays, restaurants, attractions, and the legs that join
/// it to the rest of the route. Alternates are ordered by `score`
/// descending, then by name.
fn alternate_package(
    inst: &CspInstance,
    route: &[String],
    failing: Option<&str>,
    score: impl Fn(&str) -> usize,
) -> Vec<ToolDirective> {
    let q = &inst.query;
    let d = &inst.domains;
    if !destination_is_state(q) {
        return Vec::new();
    }
    let Some(pool) = d.cities(&q.destination) else {
        return vec![ToolDirective::cities(&q.destination)];
    };
    let mut alternates: Vec<&str> = pool
        .into_iter()
        .filter(|c| fold(c) != fold(&q.origin) && !route.iter().any(|r| fold(r) == fold(c)))
        .filter(|c| !d.searched(Tool::AccommodationSearch, &[c]))
        .collect();
    alternates.sort_by(|a, b| score(b).cmp(&score(a)).then_with(|| a.cmp(b)));
    let Some(alt) = alternates.first() else {
        return Vec::new();
    };
    let mut cities: Vec<String> = route.to_vec();
    match failing.and_then(|f| cities.iter().position(|c| fold(c) == fold(f))) {
        Some(i) => cities[i] = alt.to_string(),
        None => match cities.last_mut() {
            Some(last) => *last = alt.to_string(),
            None => cities.push(alt.to_string()),
        },
    }
    let mut out = vec![
        ToolDirective::stays(alt),
        ToolDirective::restaurants(alt),
        ToolDirective::attractions(alt),
    ];
    for (f, t, date) in loop_legs(inst, &cities) {
        if fold(&f) == fold(alt) || fold(&t) == fold(alt) {
            out.extend(leg_directives(&f, &t, date));
        }
    }
    out
}
