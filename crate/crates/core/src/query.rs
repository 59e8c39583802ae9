use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sandbox::{Allowance, RoomType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportPref {
    NoFlights,
    NoSelfDriving,
    MustSelfDrive,
}

impl TransportPref {
    pub fn as_str(self) -> &'static str {
        match self {
            TransportPref::NoFlights => "no-flights",
            TransportPref::NoSelfDriving => "no-self-driving",
            TransportPref::MustSelfDrive => "must-self-drive",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Preferences {
    pub cuisines: BTreeSet<String>,
    pub room_rules: BTreeSet<Allowance>,
    pub room_type: Option<RoomType>,
    pub transport: Option<TransportPref>,
}

/// The structured form of a traveller's request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredQuery {
    pub origin: String,
    /// A city, or a state when `visiting_city_count` cities are to be chosen.
    pub destination: String,
    pub visiting_city_count: u32,
    pub dates: Vec<NaiveDate>,
    pub days: u32,
    pub people: u32,
    pub budget: f64,
    #[serde(default)]
    pub prefs: Preferences,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid query: {0}")]
pub struct InvalidQuery(pub String);

impl StructuredQuery {
    /// Convenience constructor for a trip over consecutive dates.
    pub fn new(
        origin: &str,
        destination: &str,
        visiting_city_count: u32,
        start: NaiveDate,
        days: u32,
        people: u32,
        budget: f64,
    ) -> Self {
        Self {
            origin: origin.to_string(),
            destination: destination.to_string(),
            visiting_city_count,
            dates: (0..days).map(|i| start + chrono::Days::new(i as u64)).collect(),
            days,
            people,
            budget,
            prefs: Preferences::default(),
        }
    }

    pub fn validate(&self) -> Result<(), InvalidQuery> {
        if !matches!(self.days, 3 | 5 | 7) {
            return Err(InvalidQuery(format!("days must be 3, 5 or 7 (got {})", self.days)));
        }
        if self.dates.len() != self.days as usize {
            return Err(InvalidQuery(format!(
                "{} dates given for a {}-day trip",
                self.dates.len(),
                self.days
            )));
        }
        if self.dates.windows(2).any(|w| w[1] != w[0] + chrono::Days::new(1)) {
            return Err(InvalidQuery("dates must be consecutive".into()));
        }
        if self.visiting_city_count != (self.days - 1) / 2 {
            return Err(InvalidQuery(format!(
                "a {}-day trip visits {} cities (got {})",
                self.days,
                (self.days - 1) / 2,
                self.visiting_city_count
            )));
        }
        if self.people == 0 {
            return Err(InvalidQuery("people must be at least 1".into()));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(InvalidQuery("budget must be a non-negative amount".into()));
        }
        if self.origin.trim().is_empty() || self.destination.trim().is_empty() {
            return Err(InvalidQuery("origin and destination are required".into()));
        }
        Ok(())
    }

    /// Nights spent in each visited city under the fixed day layout.
    pub fn nights_per_city(&self) -> u32 {
        2
    }

    /// Days (1-based) on which the traveller moves between cities: day 1,
    /// every second day while touring, and the final day.
    pub fn travel_days(&self) -> Vec<u32> {
        let mut days: Vec<u32> = (0..self.visiting_city_count).map(|i| 1 + 2 * i).collect();
        days.push(self.days);
        days
    }

    pub fn date_of(&self, day: u32) -> NaiveDate {
        self.dates[(day - 1) as usize]
    }

    /// Applies patches in order; the query is left untouched on error.
    pub fn apply(&self, patches: &[Patch]) -> Result<StructuredQuery, PatchError> {
        let mut q = self.clone();
        for p in patches {
            p.apply_to(&mut q)?;
        }
        q.validate().map_err(|e| PatchError {
            field: patches.last().map(|p| p.field.clone()).unwrap_or_default(),
            reason: e.0,
        })?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchOp {
    Add,
    Remove,
    Modify,
}

/// One structured edit to a query field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub op: PatchOp,
    pub field: String,
    #[serde(default)]
    pub value: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad patch on `{field}`: {reason}")]
pub struct PatchError {
    pub field: String,
    pub reason: String,
}

impl Patch {
    pub fn new(op: PatchOp, field: &str, value: impl Into<Option<serde_json::Value>>) -> Self {
        Self {
            op,
            field: field.to_string(),
            value: value.into(),
        }
    }

    fn err(&self, reason: impl Into<String>) -> PatchError {
        PatchError {
            field: self.field.clone(),
            reason: reason.into(),
        }
    }

    fn value<T: serde::de::DeserializeOwned>(&self) -> Result<T, PatchError> {
        let v = self.value.clone().ok_or_else(|| self.err("missing value"))?;
        serde_json::from_value(v).map_err(|e| self.err(e.to_string()))
    }

    fn apply_to(&self, q: &mut StructuredQuery) -> Result<(), PatchError> {
        use PatchOp::*;
        match (self.field.as_str(), self.op) {
            ("budget", Modify) | ("budget", Add) => q.budget = self.value()?,
            ("people", Modify) | ("people", Add) => q.people = self.value()?,
            ("cuisines", Add) => {
                q.prefs.cuisines.insert(self.value()?);
            }
            ("cuisines", Remove) => match &self.value {
                Some(_) => {
                    let c: String = self.value()?;
                    q.prefs.cuisines.retain(|x| !x.eq_ignore_ascii_case(&c));
                }
                None => q.prefs.cuisines.clear(),
            },
            ("cuisines", Modify) => q.prefs.cuisines = self.value()?,
            ("room_rules", Add) => {
                q.prefs.room_rules.insert(self.value()?);
            }
            ("room_rules", Remove) => match &self.value {
                Some(_) => {
                    let a: Allowance = self.value()?;
                    q.prefs.room_rules.remove(&a);
                }
                None => q.prefs.room_rules.clear(),
            },
            ("room_rules", Modify) => q.prefs.room_rules = self.value()?,
            ("room_type", Add) | ("room_type", Modify) => q.prefs.room_type = Some(self.value()?),
            ("room_type", Remove) => q.prefs.room_type = None,
            ("transport", Add) | ("transport", Modify) => q.prefs.transport = Some(self.value()?),
            ("transport", Remove) => q.prefs.transport = None,
            ("budget" | "people", Remove) => return Err(self.err("field cannot be removed")),
            (other, _) => return Err(self.err(format!("unknown field `{other}`"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn q() -> StructuredQuery {
        StructuredQuery::new("Washington", "Myrtle Beach", 1, "2022-03-13".parse().unwrap(), 3, 1, 1400.0)
    }

    #[test]
    fn validation_rules() {
        assert!(q().validate().is_ok());
        let mut bad = q();
        bad.days = 4;
        assert!(bad.validate().is_err());
        let mut bad = q();
        bad.visiting_city_count = 2;
        assert!(bad.validate().is_err());
        let mut bad = q();
        bad.dates.pop();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn travel_days_follow_layout() {
        assert_eq!(q().travel_days(), vec![1, 3]);
        let seven = StructuredQuery::new("Kona", "California", 3, "2025-09-07".parse().unwrap(), 7, 1, 5800.0);
        assert_eq!(seven.travel_days(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn patches_apply_in_order() {
        let patched = q()
            .apply(&[
                Patch::new(PatchOp::Modify, "budget", json!(900)),
                Patch::new(PatchOp::Add, "cuisines", json!("French")),
                Patch::new(PatchOp::Add, "room_rules", json!("pets")),
            ])
            .unwrap();
        assert_eq!(patched.budget, 900.0);
        assert!(patched.prefs.cuisines.contains("French"));
        assert!(patched.prefs.room_rules.contains(&Allowance::Pets));

        let removed = patched.apply(&[Patch::new(PatchOp::Remove, "cuisines", json!("french"))]).unwrap();
        assert!(removed.prefs.cuisines.is_empty());
    }

    #[test]
    fn malformed_patches_are_rejected() {
        let err = q().apply(&[Patch::new(PatchOp::Modify, "budget", json!("lots"))]).unwrap_err();
        assert_eq!(err.field, "budget");
        assert!(q().apply(&[Patch::new(PatchOp::Add, "weather", json!("sunny"))]).is_err());
        assert!(q().apply(&[Patch::new(PatchOp::Modify, "people", json!(0))]).is_err());
    }
}
