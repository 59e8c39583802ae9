//! Constraint construction: hard constraints from the query and the
//! candidate pools, plus the fixed commonsense catalogue.

mod rules;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cost::money;
use crate::csp::{variable_set, Assignment, SlotId, SlotKind};
use crate::domains::DomainSet;
use crate::query::{StructuredQuery, TransportPref};
use crate::sandbox::{Allowance, RoomType};

pub use rules::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Commonsense,
    Hard,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Explicit => "explicit",
            ConstraintKind::Implicit => "implicit",
        }
    }
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Commonsense => "commonsense",
            Category::Hard => "hard",
        }
    }
}

/// The decision procedure behind a constraint, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    NoConflictingTransport,
    CompleteInformation,
    ReasonableCityRoute,
    MinNightsRespected,
    NoRepeatedRestaurants,
    NoHallucinatedDetails,
    WithinCurrentCity,
    Budget { limit: f64 },
    Cuisine { cuisine: String },
    RoomRule { allowance: Allowance },
    RoomType { wanted: RoomType },
    Transport { pref: TransportPref },
    MinNightsGate { city: String, nights: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub id: String,
    pub kind: ConstraintKind,
    pub category: Category,
    pub scope: Vec<SlotId>,
    pub rule: Rule,
    pub description: String,
}

impl Constraint {
    /// Evaluates the predicate. `None` means satisfied.
    pub fn check(&self, a: &Assignment, d: &DomainSet, q: &StructuredQuery) -> Option<Violation> {
        let (slots, messages) = rules::evaluate_rule(&self.rule, a, d, q);
        if messages.is_empty() {
            return None;
        }
        Some(Violation {
            constraint_id: self.id.clone(),
            slots,
            message: messages.join(" "),
        })
    }

    pub fn holds(&self, a: &Assignment, d: &DomainSet, q: &StructuredQuery) -> bool {
        self.check(a, d, q).is_none()
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {} | {}",
            self.id,
            self.kind.as_str(),
            self.category.as_str(),
            self.description
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    items: Vec<Constraint>,
}

impl ConstraintSet {
    /// Builds a set, keeping the first constraint for any repeated id.
    pub fn new(items: Vec<Constraint>) -> Self {
        let mut out: Vec<Constraint> = Vec::with_capacity(items.len());
        for c in items {
            if !out.iter().any(|x| x.id == c.id) {
                out.push(c);
            }
        }
        Self { items: out }
    }

    pub fn get(&self, id: &str) -> Option<&Constraint> {
        self.items.iter().find(|c| c.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Constraint> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|c| c.id.as_str()).collect()
    }

    /// One line per constraint: "id | kind | category | description".
    pub fn dump(&self) -> String {
        self.items.iter().map(|c| format!("{c}\n")).collect()
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = &'a Constraint;
    type IntoIter = std::slice::Iter<'a, Constraint>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

fn slots_of(q: &StructuredQuery, pred: impl Fn(SlotKind) -> bool) -> Vec<SlotId> {
    variable_set(q).into_iter().filter(|s| pred(s.kind)).collect()
}

fn implicit(id: &str, rule: Rule, scope: Vec<SlotId>, description: &str) -> Constraint {
    Constraint {
        id: id.to_string(),
        kind: ConstraintKind::Implicit,
        category: Category::Commonsense,
        scope,
        rule,
        description: description.to_string(),
    }
}

fn explicit(id: String, rule: Rule, scope: Vec<SlotId>, description: String) -> Constraint {
    Constraint {
        id,
        kind: ConstraintKind::Explicit,
        category: Category::Hard,
        scope,
        rule,
        description,
    }
}

/// The seven commonsense rules, scoped to the query's trip length.
pub fn implicit_catalogue(q: &StructuredQuery) -> Vec<Constraint> {
    use SlotKind::*;
    let transport = || slots_of(q, |k| k == Transportation);
    vec![
        implicit(
            "no-conflicting-transport",
            Rule::NoConflictingTransport,
            transport(),
            "self-driving is not combined with flights or taxis",
        ),
        implicit(
            "complete-information",
            Rule::CompleteInformation,
            slots_of(q, |_| true),
            "every required field of every day is filled",
        ),
        implicit(
            "reasonable-city-route",
            Rule::ReasonableCityRoute,
            slots_of(q, |k| matches!(k, CurrentCity | Transportation)),
            "the route is a closed loop through the requested cities",
        ),
        implicit(
            "min-nights-respected",
            Rule::MinNightsRespected,
            slots_of(q, |k| k == Accommodation),
            "consecutive nights at a stay meet its minimum",
        ),
        implicit(
            "no-repeated-restaurants",
            Rule::NoRepeatedRestaurants,
            slots_of(q, SlotKind::is_meal),
            "no restaurant is visited twice",
        ),
        implicit(
            "no-hallucinated-details",
            Rule::NoHallucinatedDetails,
            slots_of(q, |_| true),
            "every value comes from collected data",
        ),
        implicit(
            "within-current-city",
            Rule::WithinCurrentCity,
            slots_of(q, |k| k != Transportation),
            "meals, attractions and stays are in the day's cities",
        ),
    ]
}

/// Hard constraints requested by the query, plus minimum-stay gates for
/// every city with stay candidates.
pub fn extract_explicit(q: &StructuredQuery, d: &DomainSet) -> Vec<Constraint> {
    use SlotKind::*;
    let mut out = vec![explicit(
        "budget".into(),
        Rule::Budget { limit: q.budget },
        slots_of(q, crate::cost::is_cost_bearing),
        format!("budget ≤ {}", money(q.budget)),
    )];
    for c in &q.prefs.cuisines {
        out.push(explicit(
            format!("cuisine:{}", c.trim().to_lowercase()),
            Rule::Cuisine { cuisine: c.clone() },
            slots_of(q, SlotKind::is_meal),
            format!("at least one restaurant serves {c} cuisine"),
        ));
    }
    for a in &q.prefs.room_rules {
        out.push(explicit(
            format!("room-rule:{}", a.as_str()),
            Rule::RoomRule { allowance: *a },
            slots_of(q, |k| k == Accommodation),
            format!("every stay permits {a}"),
        ));
    }
    if let Some(t) = q.prefs.room_type {
        out.push(explicit(
            "room-type".into(),
            Rule::RoomType { wanted: t },
            slots_of(q, |k| k == Accommodation),
            format!("every stay is a {t}"),
        ));
    }
    if let Some(p) = q.prefs.transport {
        out.push(explicit(
            format!("transport:{}", p.as_str()),
            Rule::Transport { pref: p },
            slots_of(q, |k| k == Transportation),
            format!("transportation respects {}", p.as_str()),
        ));
    }
    let nights = q.nights_per_city();
    for city in d.stay_cities() {
        out.push(explicit(
            format!("min-nights:{}", city.to_lowercase()),
            Rule::MinNightsGate {
                city: city.to_string(),
                nights,
            },
            slots_of(q, |k| k == Accommodation),
            format!("stays in {city} need a minimum of {nights} nights or less"),
        ));
    }
    out
}

/// The full constraint set, explicit constraints first.
pub fn build_constraints(q: &StructuredQuery, d: &DomainSet) -> ConstraintSet {
    let mut all = extract_explicit(q, d);
    all.extend(implicit_catalogue(q));
    ConstraintSet::new(all)
}

/// All violations of `a`, one per violated constraint, in set order.
pub fn evaluate_all(set: &ConstraintSet, a: &Assignment, d: &DomainSet, q: &StructuredQuery) -> Vec<Violation> {
    set.iter().filter_map(|c| c.check(a, d, q)).collect()
}

#[cfg(test)]
mod tests;
