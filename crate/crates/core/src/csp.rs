//! Variables, values and assignments of a planning instance.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::domains::DomainSet;
use crate::query::StructuredQuery;
use crate::sandbox::{fold, GroundMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlotKind {
    CurrentCity,
    Transportation,
    Breakfast,
    Lunch,
    Dinner,
    Attraction,
    Accommodation,
}

impl SlotKind {
    pub const ALL: [SlotKind; 7] = [
        SlotKind::CurrentCity,
        SlotKind::Transportation,
        SlotKind::Breakfast,
        SlotKind::Lunch,
        SlotKind::Dinner,
        SlotKind::Attraction,
        SlotKind::Accommodation,
    ];

    pub const MEALS: [SlotKind; 3] = [SlotKind::Breakfast, SlotKind::Lunch, SlotKind::Dinner];

    pub fn is_meal(self) -> bool {
        matches!(self, SlotKind::Breakfast | SlotKind::Lunch | SlotKind::Dinner)
    }

    pub fn label(self) -> &'static str {
        match self {
            SlotKind::CurrentCity => "current city",
            SlotKind::Transportation => "transportation",
            SlotKind::Breakfast => "breakfast",
            SlotKind::Lunch => "lunch",
            SlotKind::Dinner => "dinner",
            SlotKind::Attraction => "attraction",
            SlotKind::Accommodation => "accommodation",
        }
    }
}

/// A plan variable: one field of one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotId {
    pub day: u32,
    pub kind: SlotKind,
}

impl SlotId {
    pub fn new(day: u32, kind: SlotKind) -> Self {
        Self { day, kind }
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "day {} {}", self.day, self.kind.label())
    }
}

/// All slots of a trip in canonical (day-major) order.
pub fn variable_set(q: &StructuredQuery) -> Vec<SlotId> {
    (1..=q.days)
        .flat_map(|day| SlotKind::ALL.into_iter().map(move |kind| SlotId::new(day, kind)))
        .collect()
}

/// A named place in a city (restaurant, stay or attraction).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Place {
    pub name: String,
    pub city: String,
}

impl Place {
    pub fn new(name: impl Into<String>, city: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            city: city.into(),
        }
    }

    /// Case-insensitive identity.
    pub fn key(&self) -> (String, String) {
        (fold(&self.name), fold(&self.city))
    }
}

/// The value of a slot. `Empty` renders as "-".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Value {
    Empty,
    City {
        city: String,
    },
    Travel {
        from: String,
        to: String,
    },
    Flight {
        number: String,
        from: String,
        to: String,
        dep: String,
        arr: String,
    },
    Ground {
        mode: GroundMode,
        from: String,
        to: String,
    },
    Restaurant(Place),
    Stay(Place),
    Attractions {
        places: Vec<Place>,
    },
}

impl Value {
    pub fn is_empty(&self) -> bool {
        match self {
            Value::Empty => true,
            Value::Attractions { places } => places.is_empty(),
            _ => false,
        }
    }

    /// Cities a current-city label covers: departure then arrival on travel
    /// days, the single city otherwise.
    pub fn cities(&self) -> Vec<&str> {
        match self {
            Value::City { city } => vec![city],
            Value::Travel { from, to } => vec![from, to],
            _ => vec![],
        }
    }

    /// City the traveller sleeps in for a current-city label.
    pub fn end_city(&self) -> Option<&str> {
        match self {
            Value::City { city } => Some(city),
            Value::Travel { to, .. } => Some(to),
            _ => None,
        }
    }

    pub fn is_travel(&self) -> bool {
        matches!(self, Value::Travel { .. })
    }

    pub fn transport_leg(&self) -> Option<(&str, &str)> {
        match self {
            Value::Flight { from, to, .. } | Value::Ground { from, to, .. } => Some((from, to)),
            _ => None,
        }
    }

    /// Transport mode name used by the conflicting-transport rule.
    pub fn transport_mode(&self) -> Option<&'static str> {
        match self {
            Value::Flight { .. } => Some("flight"),
            Value::Ground { mode, .. } => Some(mode.as_str()),
            _ => None,
        }
    }

    pub fn place(&self) -> Option<&Place> {
        match self {
            Value::Restaurant(p) | Value::Stay(p) => Some(p),
            _ => None,
        }
    }
}

/// A mapping from slots to values. Complete when every slot of the trip
/// is present.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub days: u32,
    #[serde(with = "pairs")]
    values: BTreeMap<SlotId, Value>,
}

/// Struct-keyed maps go over the wire as `[key, value]` pairs.
mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K: Serialize, V: Serialize, S: Serializer>(m: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        Ok(Vec::<(K, V)>::deserialize(d)?.into_iter().collect())
    }
}

impl Assignment {
    pub fn new(days: u32) -> Self {
        Self {
            days,
            values: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, slot: SlotId, value: Value) {
        self.values.insert(slot, value);
    }

    pub fn unset(&mut self, slot: SlotId) -> Option<Value> {
        self.values.remove(&slot)
    }

    pub fn get(&self, slot: SlotId) -> Option<&Value> {
        self.values.get(&slot)
    }

    pub fn at(&self, day: u32, kind: SlotKind) -> Option<&Value> {
        self.values.get(&SlotId::new(day, kind))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SlotId, &Value)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn missing_slots(&self) -> Vec<SlotId> {
        (1..=self.days)
            .flat_map(|d| SlotKind::ALL.into_iter().map(move |k| SlotId::new(d, k)))
            .filter(|s| !self.values.contains_key(s))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.len() == self.days as usize * SlotKind::ALL.len() && self.missing_slots().is_empty()
    }

    /// Restaurants in slot order, with their slots.
    pub fn meals(&self) -> impl Iterator<Item = (SlotId, &Place)> {
        self.values.iter().filter_map(|(s, v)| match v {
            Value::Restaurant(p) if s.kind.is_meal() => Some((*s, p)),
            _ => None,
        })
    }

    pub fn transports(&self) -> impl Iterator<Item = (SlotId, &Value)> {
        self.values
            .iter()
            .filter(|(s, v)| s.kind == SlotKind::Transportation && !v.is_empty())
            .map(|(s, v)| (*s, v))
    }

    pub fn current_city(&self, day: u32) -> Option<&Value> {
        self.at(day, SlotKind::CurrentCity)
    }
}

/// One planning problem: slots, candidate pools, constraints and the query
/// they were built from.
#[derive(Debug, Clone)]
pub struct CspInstance {
    pub slots: Vec<SlotId>,
    pub domains: DomainSet,
    pub constraints: ConstraintSet,
    pub query: StructuredQuery,
}

impl CspInstance {
    pub fn new(query: StructuredQuery, domains: DomainSet, constraints: ConstraintSet) -> Self {
        Self {
            slots: variable_set(&query),
            domains,
            constraints,
            query,
        }
    }

    /// Builds the instance with the constraint set derived from `query`
    /// and `domains`.
    pub fn build(query: StructuredQuery, domains: DomainSet) -> Self {
        let constraints = crate::constraints::build_constraints(&query, &domains);
        Self::new(query, domains, constraints)
    }
}
