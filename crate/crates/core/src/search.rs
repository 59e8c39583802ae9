//! Search: decides which tool calls to make, records their observations in
//! the notebook and extracts candidate domains from it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{extract_domains, DomainSet};
use crate::query::{InvalidQuery, StructuredQuery};
use crate::sandbox::{execute_tool, GroundMode, Notebook, Sandbox, ToolDirective, ToolError};

/// Directives proposed by the advisor for the next search step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchFeedback {
    pub directives: Vec<ToolDirective>,
    pub rationale: String,
}

impl SearchFeedback {
    /// The "Suggested actions:" block shown in traces.
    pub fn render(&self) -> String {
        let mut out = String::from("Suggested actions:");
        for d in &self.directives {
            out.push('\n');
            out.push_str(&d.to_string());
            out.push_str(&format!("\nNotebookWrite[{}]", d.description()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("tool budget of {budget} calls exhausted")]
    ToolBudgetExceeded { budget: usize },
    #[error(transparent)]
    InvalidQuery(#[from] InvalidQuery),
    #[error(transparent)]
    Tool(#[from] ToolError),
}

/// Everything the search side of a session owns: the notebook, the set of
/// directives already executed (case-folded) and the tool-call counter.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SearchState {
    pub notebook: Notebook,
    pub executed: BTreeSet<ToolDirective>,
    pub calls: usize,
    pub trace: Vec<String>,
}

impl SearchState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn was_executed(&self, d: &ToolDirective) -> bool {
        self.executed.contains(&d.normalized())
    }

    pub fn domains(&self) -> DomainSet {
        extract_domains(&self.notebook)
    }

    /// Executes one directive, charging it against `budget`.
    pub fn execute(&mut self, sb: &Sandbox, d: &ToolDirective, budget: usize) -> Result<usize, SearchError> {
        if self.calls >= budget {
            return Err(SearchError::ToolBudgetExceeded { budget });
        }
        let obs = execute_tool(sb, d)?;
        self.calls += 1;
        let rows = obs.payload.len();
        self.trace.push(format!("TOOL {d} -> {rows} rows"));
        tracing::debug!(directive = %d, rows, "tool call");
        self.notebook.record(d.description(), obs);
        self.executed.insert(d.normalized());
        Ok(rows)
    }
}

/// Whether the query's destination names a state whose cities must be
/// looked up first.
pub fn destination_is_state(q: &StructuredQuery) -> bool {
    q.visiting_city_count > 1
}

/// The scripted initial search for `q` given what is already known. For a
/// state destination whose cities are not yet known this is just the
/// CitySearch; once they are, the script covers the first
/// `visiting_city_count` cities of the pool.
pub fn initial_directives(q: &StructuredQuery, known: &DomainSet) -> Result<Vec<ToolDirective>, SearchError> {
    q.validate()?;
    let mut out = Vec::new();
    let cities: Vec<String> = if destination_is_state(q) {
        out.push(ToolDirective::cities(&q.destination));
        match known.cities(&q.destination) {
            None => return Ok(out),
            Some(pool) => pool
                .into_iter()
                .filter(|c| !c.eq_ignore_ascii_case(&q.origin))
                .take(q.visiting_city_count as usize)
                .map(str::to_string)
                .collect(),
        }
    } else {
        vec![q.destination.clone()]
    };
    out.extend(route_directives(q, &cities));
    Ok(out)
}

/// Transport for every leg of the closed loop through `cities`, then stays,
/// restaurants and attractions per city.
pub fn route_directives(q: &StructuredQuery, cities: &[String]) -> Vec<ToolDirective> {
    let mut out = Vec::new();
    let mut stops = vec![q.origin.clone()];
    stops.extend(cities.iter().cloned());
    stops.push(q.origin.clone());
    let travel = q.travel_days();
    for (i, pair) in stops.windows(2).enumerate() {
        let Some(&day) = travel.get(i) else { break };
        out.extend(leg_directives(&pair[0], &pair[1], q.date_of(day)));
    }
    out.extend(cities.iter().map(|c| ToolDirective::stays(c)));
    out.extend(cities.iter().map(|c| ToolDirective::restaurants(c)));
    out.extend(cities.iter().map(|c| ToolDirective::attractions(c)));
    out
}

pub fn leg_directives(from: &str, to: &str, date: chrono::NaiveDate) -> [ToolDirective; 3] {
    [
        ToolDirective::flights(from, to, date),
        ToolDirective::ground(from, to, GroundMode::SelfDriving),
        ToolDirective::ground(from, to, GroundMode::Taxi),
    ]
}

/// The pluggable search-agent boundary: what to call when there is no
/// advisor feedback.
pub trait SearchAgent: Send {
    fn initial(&mut self, q: &StructuredQuery, known: &DomainSet) -> Result<Vec<ToolDirective>, SearchError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedSearch;

impl SearchAgent for ScriptedSearch {
    fn initial(&mut self, q: &StructuredQuery, known: &DomainSet) -> Result<Vec<ToolDirective>, SearchError> {
        initial_directives(q, known)
    }
}

/// Replays a recorded list of initial directives, e.g. a partial search.
#[derive(Debug, Clone, Default)]
pub struct ReplaySearch {
    pub directives: Vec<ToolDirective>,
}

impl ReplaySearch {
    pub fn new(directives: Vec<ToolDirective>) -> Self {
        Self { directives }
    }
}

impl SearchAgent for ReplaySearch {
    fn initial(&mut self, q: &StructuredQuery, _known: &DomainSet) -> Result<Vec<ToolDirective>, SearchError> {
        q.validate()?;
        Ok(self.directives.clone())
    }
}

/// Executes the feedback directives if given, otherwise the agent's initial
/// script (repeated until it asks for nothing new), and returns the domains
/// of the whole notebook. Already-executed directives are skipped.
pub fn run_search(
    sb: &Sandbox,
    st: &mut SearchState,
    agent: &mut dyn SearchAgent,
    q: &StructuredQuery,
    fb: Option<&SearchFeedback>,
    budget: usize,
) -> Result<DomainSet, SearchError> {
    match fb {
        Some(fb) => {
            for d in &fb.directives {
                if !st.was_executed(d) {
                    st.execute(sb, d, budget)?;
                }
            }
        }
        None => loop {
            let known = st.domains();
            let fresh: Vec<ToolDirective> = agent
                .initial(q, &known)?
                .into_iter()
                .filter(|d| !st.was_executed(d))
                .collect();
            if fresh.is_empty() {
                break;
            }
            for d in &fresh {
                if !st.was_executed(d) {
                    st.execute(sb, d, budget)?;
                }
            }
        },
    }
    Ok(st.domains())
}

#[cfg(test)]
mod tests {
    use std::path::PathBuf;

    use super::*;
    use crate::sandbox::{load_dataset, Tool};

    fn fixture(name: &str) -> (Sandbox, StructuredQuery) {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
        let q = serde_json::from_str(&std::fs::read_to_string(dir.join("query.json")).unwrap()).unwrap();
        (load_dataset(&dir).unwrap(), q)
    }

    #[test]
    fn script_covers_both_legs_and_each_category() {
        let (_, q) = fixture("trip-myrtle-beach");
        let ds = initial_directives(&q, &DomainSet::default()).unwrap();
        let shown: Vec<String> = ds.iter().map(ToString::to_string).collect();
        assert!(shown.contains(&"FlightSearch[Washington, Myrtle Beach, 2022-03-13]".to_string()));
        assert!(shown.contains(&"FlightSearch[Myrtle Beach, Washington, 2022-03-15]".to_string()));
        assert_eq!(ds.iter().filter(|d| d.tool == Tool::AccommodationSearch).count(), 1);
        assert_eq!(ds.iter().filter(|d| d.tool == Tool::DistanceMatrix).count(), 4);
        assert_eq!(ds.len(), 9);
    }

    #[test]
    fn state_destination_starts_with_city_search() {
        let q = StructuredQuery::new("Kona", "California", 3, "2025-09-07".parse().unwrap(), 7, 1, 5800.0);
        let ds = initial_directives(&q, &DomainSet::default()).unwrap();
        assert_eq!(ds[0].to_string(), "CitySearch[California]");
    }

    #[test]
    fn rerun_without_feedback_is_idempotent() {
        let (sb, q) = fixture("trip-baltimore");
        let mut st = SearchState::new();
        let first = run_search(&sb, &mut st, &mut ScriptedSearch, &q, None, 120).unwrap();
        let calls = st.calls;
        let second = run_search(&sb, &mut st, &mut ScriptedSearch, &q, None, 120).unwrap();
        assert_eq!(first, second);
        assert_eq!(st.calls, calls);
        assert_eq!(st.trace[0], "TOOL FlightSearch[Pittsburgh, Baltimore, 2022-03-04] -> 1 rows");
    }

    #[test]
    fn feedback_adds_flight_pools() {
        let (sb, q) = fixture("trip-baltimore");
        let mut st = SearchState::new();
        let mut replay = ReplaySearch::new(vec![
            ToolDirective::ground("Pittsburgh", "Baltimore", GroundMode::SelfDriving),
            ToolDirective::stays("Baltimore"),
        ]);
        let before = run_search(&sb, &mut st, &mut replay, &q, None, 120).unwrap();
        let fb = SearchFeedback {
            directives: vec![
                "FlightSearch[Pittsburgh, Baltimore, 2022-03-04]".parse().unwrap(),
                "FlightSearch[Baltimore, Pittsburgh, 2022-03-06]".parse().unwrap(),
            ],
            rationale: String::new(),
        };
        let after = run_search(&sb, &mut st, &mut replay, &q, Some(&fb), 120).unwrap();
        assert!(before.is_subset_of(&after));
        let back = after.flights("Baltimore", "Pittsburgh", "2022-03-06".parse().unwrap());
        assert_eq!(back[0].record.number, "F3994096");
        assert_eq!(back[0].provenance, Some(3));
    }

    #[test]
    fn budget_stops_mid_feedback_and_keeps_executed_calls() {
        let (sb, q) = fixture("trip-hilton-head");
        let mut st = SearchState {
            calls: 118,
            ..SearchState::new()
        };
        let fb = SearchFeedback {
            directives: initial_directives(&q, &DomainSet::default()).unwrap()[..5].to_vec(),
            rationale: String::new(),
        };
        let err = run_search(&sb, &mut st, &mut ScriptedSearch, &q, Some(&fb), 120).unwrap_err();
        assert_eq!(err, SearchError::ToolBudgetExceeded { budget: 120 });
        assert_eq!(st.notebook.len(), 2);
        assert_eq!(st.calls, 120);
    }

    #[test]
    fn render_lists_directives_with_notebook_writes() {
        let fb = SearchFeedback {
            directives: vec!["FlightSearch[Pittsburgh, Baltimore, 2022-03-04]".parse().unwrap()],
            rationale: String::new(),
        };
        assert_eq!(
            fb.render(),
            "Suggested actions:\nFlightSearch[Pittsburgh, Baltimore, 2022-03-04]\nNotebookWrite[Flights from Pittsburgh to Baltimore on 2022-03-04]"
        );
    }
}
