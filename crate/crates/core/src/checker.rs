//! Verdicts, feedback and unsat certificates for candidate plans.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constraints::{evaluate_all, Constraint, Rule, Violation};
use crate::csp::{Assignment, CspInstance, SlotId, SlotKind, Value};
use crate::query::TransportPref;
use crate::sandbox::{fold, GroundMode};
use crate::space::{is_required, stay_candidates, SlotDomains};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    Invalid,
    Unsat,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Valid => "valid",
            Verdict::Invalid => "invalid",
            Verdict::Unsat => "unsat",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    EmptyDomain,
    FilteredEmpty,
    RepeatedFailure,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::EmptyDomain => "empty-domain",
            CertificateKind::FilteredEmpty => "filtered-empty",
            CertificateKind::RepeatedFailure => "repeated-failure",
        }
    }
}

/// Evidence that a violated constraint cannot be satisfied with the current
/// candidates. `exhausted` lists the candidates that were ruled out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsatCertificate {
    pub constraint_id: String,
    pub kind: CertificateKind,
    pub slots: Vec<SlotId>,
    pub exhausted: Vec<String>,
    pub detail: String,
}

impl UnsatCertificate {
    /// Re-runs the probe behind this certificate from scratch.
    pub fn revalidate(&self, inst: &CspInstance, hist: &AttemptHistory) -> bool {
        match self.kind {
            CertificateKind::RepeatedFailure => hist.repeated(&self.constraint_id),
            kind => {
                let sd = SlotDomains::build(&inst.query, &inst.domains);
                let Some(c) = inst.constraints.get(&self.constraint_id) else {
                    return false;
                };
                probe(inst, &sd, c, &self.slots).is_some_and(|cert| cert.kind == kind)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFeedback {
    pub violations: Vec<Violation>,
    pub unsat_certificates: Vec<UnsatCertificate>,
}

impl PlanFeedback {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty() && self.unsat_certificates.is_empty()
    }

    pub fn violated_ids(&self) -> BTreeSet<&str> {
        self.violations.iter().map(|v| v.constraint_id.as_str()).collect()
    }

    /// Numbered feedback lines, violations first, then certificates.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut n = 0;
        for v in &self.violations {
            n += 1;
            out.push_str(&format!("{n}. {}\n", v.message));
        }
        for c in &self.unsat_certificates {
            n += 1;
            out.push_str(&format!("{n}. Unsatisfiable ({}): {}\n", c.kind.as_str(), c.detail));
        }
        out
    }
}

/// One plan attempt and what the checker said about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub assignment: Assignment,
    pub verdict: Verdict,
    pub feedback: PlanFeedback,
}

/// Attempts made within one search step, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AttemptHistory {
    pub attempts: Vec<Attempt>,
}

/// Consecutive earlier attempts that must share a violation before it is
/// treated as unsatisfiable.
pub const REPEAT_THRESHOLD: usize = 2;

impl AttemptHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, a: Attempt) {
        self.attempts.push(a);
    }

    pub fn len(&self) -> usize {
        self.attempts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attempts.is_empty()
    }

    pub fn last(&self) -> Option<&Attempt> {
        self.attempts.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Attempt> {
        self.attempts.iter()
    }

    /// Whether `id` was violated by each of the last two attempts.
    pub fn repeated(&self, id: &str) -> bool {
        self.attempts.len() >= REPEAT_THRESHOLD
            && self.attempts[self.attempts.len() - REPEAT_THRESHOLD..]
                .iter()
                .all(|a| a.feedback.violations.iter().any(|v| v.constraint_id == id))
    }
}

/// Runs every constraint once against `a`.
pub fn evaluate(inst: &CspInstance, a: &Assignment) -> Vec<Violation> {
    evaluate_all(&inst.constraints, a, &inst.domains, &inst.query)
}

/// Verdict and feedback for `a` given the earlier attempts of this step.
pub fn check(inst: &CspInstance, a: &Assignment, hist: &AttemptHistory) -> (Verdict, PlanFeedback) {
    let violations = evaluate(inst, a);
    if violations.is_empty() {
        return (Verdict::Valid, PlanFeedback::default());
    }
    let sd = SlotDomains::build(&inst.query, &inst.domains);
    let mut certs = Vec::new();
    for v in &violations {
        if let Some(c) = certify_with(inst, &sd, v) {
            certs.push(c);
        } else if hist.repeated(&v.constraint_id) {
            certs.push(UnsatCertificate {
                constraint_id: v.constraint_id.clone(),
                kind: CertificateKind::RepeatedFailure,
                slots: v.slots.clone(),
                exhausted: Vec::new(),
                detail: format!(
                    "{} was violated again after {} earlier attempts.",
                    v.constraint_id, REPEAT_THRESHOLD
                ),
            });
        }
    }
    let verdict = if certs.is_empty() { Verdict::Invalid } else { Verdict::Unsat };
    (
        verdict,
        PlanFeedback {
            violations,
            unsat_certificates: certs,
        },
    )
}

/// Certificate for a violation, if a probe over the constraint's candidate
/// pools shows it cannot be satisfied.
pub fn certify_unsat(inst: &CspInstance, v: &Violation) -> Option<UnsatCertificate> {
    let sd = SlotDomains::build(&inst.query, &inst.domains);
    certify_with(inst, &sd, v)
}

pub fn certify_with(inst: &CspInstance, sd: &SlotDomains, v: &Violation) -> Option<UnsatCertificate> {
    let c = inst.constraints.get(&v.constraint_id)?;
    probe(inst, sd, c, &v.slots)
}

fn cert(c: &Constraint, kind: CertificateKind, slots: Vec<SlotId>, exhausted: Vec<String>, detail: String) -> UnsatCertificate {
    UnsatCertificate {
        constraint_id: c.id.clone(),
        kind,
        slots,
        exhausted,
        detail,
    }
}

fn names(vals: &[&(Value, f64)]) -> Vec<String> {
    vals.iter().map(|(v, _)| short(v)).collect()
}

fn short(v: &Value) -> String {
    match v {
        Value::Flight { number, .. } => number.clone(),
        Value::Ground { mode, from, to } => format!("{mode} {from}-{to}"),
        Value::Restaurant(p) | Value::Stay(p) => p.name.clone(),
        Value::Attractions { places } => places.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(";"),
        Value::City { city } => city.clone(),
        Value::Travel { from, to } => format!("from {from} to {to}"),
        Value::Empty => "-".into(),
    }
}

/// Scope-local feasibility probe. Returns a certificate when no choice of
/// candidates for the relevant slots can satisfy `c`.
fn probe(inst: &CspInstance, sd: &SlotDomains, c: &Constraint, slots: &[SlotId]) -> Option<UnsatCertificate> {
    let q = &inst.query;
    let d = &inst.domains;

    let empty: Vec<SlotId> = slots
        .iter()
        .copied()
        .filter(|s| is_required(q, *s) && sd.filled(*s).next().is_none())
        .collect();
    if !empty.is_empty() {
        let detail = empty
            .iter()
            .map(|s| format!("no candidates for Day {} {}", s.day, s.kind.label()))
            .collect::<Vec<_>>()
            .join(", ");
        return Some(cert(c, CertificateKind::EmptyDomain, empty, vec![], format!("{detail}.")));
    }

    // Filters a slot's non-empty candidates by `keep`; certifies when
    // some slot in `slots` has candidates but none survive.
    let gate = |kind: SlotKind, keep: &dyn Fn(&Value) -> bool, what: &str| {
        if kind == SlotKind::Accommodation && !sd.routes.is_empty() {
            return stay_gate(inst, sd, c, keep, what);
        }
        for s in slots.iter().filter(|s| s.kind == kind && is_required(q, **s)) {
            let all: Vec<&(Value, f64)> = sd.filled(*s).collect();
            if !all.iter().any(|(v, _)| keep(v)) {
                return Some(cert(
                    c,
                    CertificateKind::FilteredEmpty,
                    vec![*s],
                    names(&all),
                    format!("no {} for Day {} {}.", what, s.day, s.kind.label()),
                ));
            }
        }
        None
    };

    match &c.rule {
        Rule::Budget { limit } => {
            let cost_slots: Vec<SlotId> = sd
                .values
                .keys()
                .copied()
                .filter(|s| crate::cost::is_cost_bearing(s.kind))
                .collect();
            let mut min_total = 0.0;
            for s in &cost_slots {
                let cheapest = sd.get(*s).iter().map(|(_, x)| *x).fold(f64::INFINITY, f64::min);
                if cheapest.is_finite() {
                    min_total += cheapest;
                }
            }
            (min_total > limit + 1e-9).then(|| {
                cert(
                    c,
                    CertificateKind::FilteredEmpty,
                    cost_slots,
                    vec![],
                    format!(
                        "the cheapest possible trip costs {}, above the budget of {}.",
                        crate::cost::money(min_total),
                        crate::cost::money(*limit)
                    ),
                )
            })
        }
        Rule::Cuisine { cuisine } => {
            let meal_slots: Vec<SlotId> = sd.values.keys().copied().filter(|s| s.kind.is_meal()).collect();
            let mut seen: Vec<String> = Vec::new();
            let mut served = false;
            for s in &meal_slots {
                for (v, _) in sd.filled(*s) {
                    if let Value::Restaurant(p) = v {
                        if d.find_restaurant(p).is_some_and(|r| r.serves(cuisine)) {
                            served = true;
                        }
                        if !seen.contains(&p.name) {
                            seen.push(p.name.clone());
                        }
                    }
                }
            }
            (!served).then(|| {
                cert(
                    c,
                    CertificateKind::FilteredEmpty,
                    meal_slots,
                    seen,
                    format!("no known restaurant on the route serves {cuisine} cuisine."),
                )
            })
        }
        Rule::RoomRule { allowance } => gate(
            SlotKind::Accommodation,
            &|v| matches!(v, Value::Stay(p) if d.find_stay(p).is_some_and(|r| !r.prohibits(*allowance))),
            &format!("stay that allows {allowance}"),
        ),
        Rule::RoomType { wanted } => gate(
            SlotKind::Accommodation,
            &|v| matches!(v, Value::Stay(p) if d.find_stay(p).is_some_and(|r| r.room_type.satisfies(*wanted))),
            &format!("{wanted} stay"),
        ),
        Rule::MinNightsGate { city, nights } => gate(
            SlotKind::Accommodation,
            &|v| match v {
                Value::Stay(p) if fold(&p.city) != fold(city) => true,
                Value::Stay(p) => d.find_stay(p).is_some_and(|r| r.min_nights <= *nights),
                _ => false,
            },
            &format!("stay with a minimum of {nights} nights or less"),
        ),
        Rule::Transport { pref } => gate(
            SlotKind::Transportation,
            &|v| match pref {
                TransportPref::NoFlights => !matches!(v, Value::Flight { .. }),
                TransportPref::NoSelfDriving => !matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. }),
                TransportPref::MustSelfDrive => matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. }),
            },
            &format!("transportation respecting {}", pref.as_str()),
        ),
        Rule::NoConflictingTransport => {
            let travel: Vec<SlotId> = sd
                .values
                .keys()
                .copied()
                .filter(|s| {
                    s.kind == SlotKind::Transportation && is_required(q, *s) && sd.filled(*s).next().is_some()
                })
                .collect();
            let drive = |v: &Value| matches!(v, Value::Ground { mode: GroundMode::SelfDriving, .. });
            let all_drive = travel.iter().all(|s| sd.filled(*s).any(|(v, _)| drive(v)));
            let no_drive = travel.iter().all(|s| sd.filled(*s).any(|(v, _)| !drive(v)));
            (!all_drive && !no_drive).then(|| {
                cert(
                    c,
                    CertificateKind::FilteredEmpty,
                    travel.clone(),
                    vec![],
                    "no leg combination uses either self-driving throughout or no self-driving at all.".into(),
                )
            })
        }
        Rule::MinNightsRespected => {
            let last = q.days;
            for s in slots.iter().filter(|s| s.kind == SlotKind::Accommodation && s.day < last) {
                let all: Vec<&(Value, f64)> = sd.filled(*s).collect();
                let ok = all.iter().any(|(v, _)| {
                    let Value::Stay(p) = v else { return false };
                    let Some(r) = d.find_stay(p) else { return false };
                    let holds = |day: u32| {
                        day >= 1 && day < last && sd.get(SlotId::new(day, SlotKind::Accommodation)).iter().any(|(x, _)| x == v)
                    };
                    let mut lo = s.day;
                    while holds(lo - 1) {
                        lo -= 1;
                    }
                    let mut hi = s.day;
                    while holds(hi + 1) {
                        hi += 1;
                    }
                    hi - lo + 1 >= r.min_nights
                });
                if !ok {
                    return Some(cert(
                        c,
                        CertificateKind::FilteredEmpty,
                        vec![*s],
                        names(&all),
                        format!("no stay for Day {} can be booked for its minimum number of nights.", s.day),
                    ));
                }
            }
            None
        }
        Rule::NoRepeatedRestaurants => {
            let required: Vec<SlotId> = sd
                .values
                .keys()
                .copied()
                .filter(|s| s.kind.is_meal() && is_required(q, *s))
                .collect();
            let mut groups: Vec<Vec<SlotId>> = vec![required.clone()];
            for day in 1..=q.days {
                groups.push(required.iter().copied().filter(|s| s.day == day).collect());
            }
            for g in groups.into_iter().filter(|g| !g.is_empty()) {
                let distinct: BTreeSet<(String, String)> = g
                    .iter()
                    .flat_map(|s| sd.filled(*s))
                    .filter_map(|(v, _)| v.place().map(|p| p.key()))
                    .collect();
                if distinct.len() < g.len() {
                    return Some(cert(
                        c,
                        CertificateKind::FilteredEmpty,
                        g.clone(),
                        distinct.into_iter().map(|(n, _)| n).collect(),
                        format!("{} meals need distinct restaurants but only {} are known.", g.len(), distinct_len(&g, sd)),
                    ));
                }
            }
            None
        }
        _ => None,
    }
}

/// Stay gates are judged per route: the stay of a night must be in that
/// night's city, so a passing stay elsewhere does not help.
fn stay_gate(
    inst: &CspInstance,
    sd: &SlotDomains,
    c: &Constraint,
    keep: &dyn Fn(&Value) -> bool,
    what: &str,
) -> Option<UnsatCertificate> {
    let q = &inst.query;
    let mut first: Option<(Vec<SlotId>, Vec<String>, Vec<String>)> = None;
    for r in &sd.routes {
        let mut failing = Vec::new();
        let mut seen = Vec::new();
        let mut cities = Vec::new();
        for day in 1..q.days {
            let city = r.label(day).end_city().unwrap_or_default();
            let stays: Vec<Value> = stay_candidates(&inst.domains, city)
                .into_iter()
                .map(|s| Value::Stay(crate::csp::Place::new(&s.name, &s.city)))
                .collect();
            if !stays.iter().any(keep) {
                failing.push(SlotId::new(day, SlotKind::Accommodation));
                seen.extend(stays.iter().map(short));
                if !cities.iter().any(|x: &String| x == city) {
                    cities.push(city.to_string());
                }
            }
        }
        if failing.is_empty() {
            return None;
        }
        first.get_or_insert((failing, seen, cities));
    }
    let (slots, exhausted, cities) = first?;
    if exhausted.is_empty() {
        let detail = slots
            .iter()
            .map(|s| format!("no candidates for Day {} {}", s.day, s.kind.label()))
            .collect::<Vec<_>>()
            .join(", ");
        return Some(cert(c, CertificateKind::EmptyDomain, slots, exhausted, format!("{detail}.")));
    }
    Some(cert(
        c,
        CertificateKind::FilteredEmpty,
        slots,
        exhausted,
        format!("no {} in {} on any route.", what, cities.join(", ")),
    ))
}

fn distinct_len(g: &[SlotId], sd: &SlotDomains) -> usize {
    g.iter()
        .flat_map(|s| sd.filled(*s))
        .filter_map(|(v, _)| v.place().map(|p| p.key()))
        .collect::<BTreeSet<_>>()
        .len()
}
