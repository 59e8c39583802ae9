use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::records::{AttractionRec, FlightRec, GroundMode, GroundRouteRec, RestaurantRec, StayRec};
use super::Sandbox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tool {
    FlightSearch,
    AccommodationSearch,
    RestaurantSearch,
    AttractionSearch,
    DistanceMatrix,
    CitySearch,
}

impl Tool {
    pub fn arity(self) -> usize {
        match self {
            Tool::FlightSearch | Tool::DistanceMatrix => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tool::FlightSearch => "FlightSearch",
            Tool::AccommodationSearch => "AccommodationSearch",
            Tool::RestaurantSearch => "RestaurantSearch",
            Tool::AttractionSearch => "AttractionSearch",
            Tool::DistanceMatrix => "DistanceMatrix",
            Tool::CitySearch => "CitySearch",
        }
    }
}

impl FromStr for Tool {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "FlightSearch" => Tool::FlightSearch,
            "AccommodationSearch" => Tool::AccommodationSearch,
            "RestaurantSearch" => Tool::RestaurantSearch,
            "AttractionSearch" => Tool::AttractionSearch,
            "DistanceMatrix" => Tool::DistanceMatrix,
            "CitySearch" => Tool::CitySearch,
            other => return Err(ToolError::UnknownTool(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToolError {
    #[error("unknown tool `{0}`")]
    UnknownTool(String),
    #[error("{tool} expects {expected} argument(s), got {got}")]
    ArityError {
        tool: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("bad argument `{value}` for {tool}: {reason}")]
    BadArgument {
        tool: &'static str,
        value: String,
        reason: String,
    },
    #[error("malformed directive `{0}`")]
    Malformed(String),
}

/// A single tool call, rendered as `Tool[arg, arg, ...]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ToolDirective {
    pub tool: Tool,
    pub args: Vec<String>,
}

impl ToolDirective {
    pub fn new<I, S>(tool: Tool, args: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            tool,
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn flights(origin: &str, dest: &str, date: NaiveDate) -> Self {
        Self::new(Tool::FlightSearch, [origin.to_string(), dest.to_string(), date.to_string()])
    }

    pub fn ground(origin: &str, dest: &str, mode: GroundMode) -> Self {
        Self::new(Tool::DistanceMatrix, [origin, dest, mode.as_str()])
    }

    pub fn stays(city: &str) -> Self {
        Self::new(Tool::AccommodationSearch, [city])
    }

    pub fn restaurants(city: &str) -> Self {
        Self::new(Tool::RestaurantSearch, [city])
    }

    pub fn attractions(city: &str) -> Self {
        Self::new(Tool::AttractionSearch, [city])
    }

    pub fn cities(state: &str) -> Self {
        Self::new(Tool::CitySearch, [state])
    }

    pub fn validate(&self) -> Result<(), ToolError> {
        if self.args.len() != self.tool.arity() {
            return Err(ToolError::ArityError {
                tool: self.tool.name(),
                expected: self.tool.arity(),
                got: self.args.len(),
            });
        }
        match self.tool {
            Tool::FlightSearch => {
                NaiveDate::parse_from_str(self.args[2].trim(), "%Y-%m-%d").map_err(|e| {
                    ToolError::BadArgument {
                        tool: self.tool.name(),
                        value: self.args[2].clone(),
                        reason: e.to_string(),
                    }
                })?;
            }
            Tool::DistanceMatrix => {
                self.args[2].parse::<GroundMode>().map_err(|reason| ToolError::BadArgument {
                    tool: self.tool.name(),
                    value: self.args[2].clone(),
                    reason,
                })?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Short notebook description for this call's observation.
    pub fn description(&self) -> String {
        let a = &self.args;
        match self.tool {
            Tool::FlightSearch => format!("Flights from {} to {} on {}", a[0], a[1], a[2]),
            Tool::AccommodationSearch => format!("Accommodation in {}", a[0]),
            Tool::RestaurantSearch => format!("Restaurants in {}", a[0]),
            Tool::AttractionSearch => format!("Attractions in {}", a[0]),
            Tool::DistanceMatrix => match a[2].parse::<GroundMode>() {
                Ok(GroundMode::SelfDriving) => format!("Driving from {} to {}", a[0], a[1]),
                _ => format!("Taxi from {} to {}", a[0], a[1]),
            },
            Tool::CitySearch => format!("Cities in {}", a[0]),
        }
    }

    /// Case-folded form used for deduplication.
    pub fn normalized(&self) -> ToolDirective {
        ToolDirective {
            tool: self.tool,
            args: self.args.iter().map(|a| fold(a)).collect(),
        }
    }
}

impl fmt::Display for ToolDirective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.tool.name(), self.args.join(", "))
    }
}

impl FromStr for ToolDirective {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let open = s.find('[').ok_or_else(|| ToolError::Malformed(s.to_string()))?;
        let inner = s[open + 1..]
            .strip_suffix(']')
            .ok_or_else(|| ToolError::Malformed(s.to_string()))?;
        let tool: Tool = s[..open].trim().parse()?;
        let args = inner.split(',').map(|a| a.trim().to_string()).collect();
        let d = ToolDirective { tool, args };
        d.validate()?;
        Ok(d)
    }
}

/// Records returned by one tool call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "kebab-case")]
pub enum Payload {
    Flights(Vec<FlightRec>),
    Stays(Vec<StayRec>),
    Restaurants(Vec<RestaurantRec>),
    Attractions(Vec<AttractionRec>),
    GroundRoutes(Vec<GroundRouteRec>),
    Cities(Vec<String>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Flights(v) => v.len(),
            Payload::Stays(v) => v.len(),
            Payload::Restaurants(v) => v.len(),
            Payload::Attractions(v) => v.len(),
            Payload::GroundRoutes(v) => v.len(),
            Payload::Cities(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The result of executing a directive. An empty payload is a valid answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub directive: ToolDirective,
    pub payload: Payload,
}

pub(crate) fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Runs a directive against the sandbox.
pub fn execute_tool(sb: &Sandbox, d: &ToolDirective) -> Result<Observation, ToolError> {
    d.validate()?;
    let a = &d.args;
    let payload = match d.tool {
        Tool::FlightSearch => {
            let date = NaiveDate::parse_from_str(a[2].trim(), "%Y-%m-%d").expect("validated");
            Payload::Flights(sb.flights_on(&a[0], &a[1], date).cloned().collect())
        }
        Tool::AccommodationSearch => Payload::Stays(sb.stays_in(&a[0]).cloned().collect()),
        Tool::RestaurantSearch => Payload::Restaurants(sb.restaurants_in(&a[0]).cloned().collect()),
        Tool::AttractionSearch => Payload::Attractions(sb.attractions_in(&a[0]).cloned().collect()),
        Tool::DistanceMatrix => {
            let mode: GroundMode = a[2].parse().expect("validated");
            Payload::GroundRoutes(sb.ground_routes(&a[0], &a[1], mode).cloned().collect())
        }
        Tool::CitySearch => Payload::Cities(sb.cities_in(&a[0]).to_vec()),
    };
    Ok(Observation {
        directive: d.clone(),
        payload,
    })
}
