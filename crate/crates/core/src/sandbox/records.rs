use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// One scheduled flight leg. `price` is per person.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRec {
    pub number: String,
    pub price: f64,
    pub dep_time: String,
    pub arr_time: String,
    pub date: NaiveDate,
    pub origin: String,
    pub dest: String,
}

/// Accommodation listing. `price` is per room per night.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StayRec {
    pub name: String,
    pub price: f64,
    pub room_type: RoomType,
    pub house_rules: BTreeSet<HouseRule>,
    pub min_nights: u32,
    pub max_occupancy: u32,
    pub rating: f64,
    pub city: String,
}

impl StayRec {
    pub fn prohibits(&self, allowance: Allowance) -> bool {
        self.house_rules.contains(&allowance.prohibited_by())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestaurantRec {
    pub name: String,
    pub avg_cost: f64,
    pub cuisines: BTreeSet<String>,
    pub rating: f64,
    pub city: String,
}

impl RestaurantRec {
    pub fn serves(&self, cuisine: &str) -> bool {
        self.cuisines.iter().any(|c| c.eq_ignore_ascii_case(cuisine))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionRec {
    pub name: String,
    pub address: String,
    pub phone: String,
    pub website: String,
    pub city: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundRouteRec {
    pub origin: String,
    pub dest: String,
    pub mode: GroundMode,
    pub duration_min: u32,
    pub distance_km: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundMode {
    SelfDriving,
    Taxi,
}

impl GroundMode {
    pub const ALL: [GroundMode; 2] = [GroundMode::SelfDriving, GroundMode::Taxi];

    pub fn as_str(self) -> &'static str {
        match self {
            GroundMode::SelfDriving => "self-driving",
            GroundMode::Taxi => "taxi",
        }
    }

    /// Travellers that share one vehicle; cost is charged per vehicle.
    pub fn vehicle_capacity(self) -> u32 {
        match self {
            GroundMode::SelfDriving => 5,
            GroundMode::Taxi => 4,
        }
    }
}

impl fmt::Display for GroundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroundMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "self-driving" => Ok(GroundMode::SelfDriving),
            "taxi" => Ok(GroundMode::Taxi),
            other => Err(format!("unknown ground mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoomType {
    EntireRoom,
    PrivateRoom,
    SharedRoom,
    NotSharedRoom,
}

impl RoomType {
    pub fn as_str(self) -> &'static str {
        match self {
            RoomType::EntireRoom => "entire-room",
            RoomType::PrivateRoom => "private-room",
            RoomType::SharedRoom => "shared-room",
            RoomType::NotSharedRoom => "not-shared-room",
        }
    }

    /// Whether a listing of type `self` satisfies a requested room type.
    pub fn satisfies(self, wanted: RoomType) -> bool {
        match wanted {
            RoomType::NotSharedRoom => self != RoomType::SharedRoom,
            other => self == other,
        }
    }
}

impl FromStr for RoomType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entire-room" => Ok(RoomType::EntireRoom),
            "private-room" => Ok(RoomType::PrivateRoom),
            "shared-room" => Ok(RoomType::SharedRoom),
            "not-shared-room" => Ok(RoomType::NotSharedRoom),
            other => Err(format!("unknown room type `{other}`")),
        }
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A prohibition listed in a stay's house rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HouseRule {
    NoParties,
    NoSmoking,
    NoChildrenUnder10,
    NoPets,
    NoVisitors,
}

impl HouseRule {
    pub fn as_str(self) -> &'static str {
        match self {
            HouseRule::NoParties => "no-parties",
            HouseRule::NoSmoking => "no-smoking",
            HouseRule::NoChildrenUnder10 => "no-children-under-10",
            HouseRule::NoPets => "no-pets",
            HouseRule::NoVisitors => "no-visitors",
        }
    }
}

impl FromStr for HouseRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "no-parties" => Ok(HouseRule::NoParties),
            "no-smoking" => Ok(HouseRule::NoSmoking),
            "no-children-under-10" => Ok(HouseRule::NoChildrenUnder10),
            "no-pets" => Ok(HouseRule::NoPets),
            "no-visitors" => Ok(HouseRule::NoVisitors),
            other => Err(format!("unknown house rule `{other}`")),
        }
    }
}

/// Something the traveller needs a stay to permit. Absence of the matching
/// prohibition means it is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Allowance {
    Parties,
    Smoking,
    ChildrenUnder10,
    Pets,
    Visitors,
}

impl Allowance {
    pub const ALL: [Allowance; 5] = [
        Allowance::Parties,
        Allowance::Smoking,
        Allowance::ChildrenUnder10,
        Allowance::Pets,
        Allowance::Visitors,
    ];

    pub fn prohibited_by(self) -> HouseRule {
        match self {
            Allowance::Parties => HouseRule::NoParties,
            Allowance::Smoking => HouseRule::NoSmoking,
            Allowance::ChildrenUnder10 => HouseRule::NoChildrenUnder10,
            Allowance::Pets => HouseRule::NoPets,
            Allowance::Visitors => HouseRule::NoVisitors,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Allowance::Parties => "parties",
            Allowance::Smoking => "smoking",
            Allowance::ChildrenUnder10 => "children-under-10",
            Allowance::Pets => "pets",
            Allowance::Visitors => "visitors",
        }
    }
}

impl fmt::Display for Allowance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validates a 24h "HH:MM" clock string and returns minutes since midnight.
pub fn clock_minutes(s: &str) -> Option<u32> {
    let (h, m) = s.split_once(':')?;
    if h.len() != 2 || m.len() != 2 {
        return None;
    }
    let h: u32 = h.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    (h < 24 && m < 60).then_some(h * 60 + m)
}
