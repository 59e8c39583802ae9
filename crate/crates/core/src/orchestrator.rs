//! Orchestration of one session: the search / plan / check / advise loops
//! per turn, the domain cache across turns and the agent trace.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::advisor::{advise, advise_error, AdviseError};
use crate::checker::{check, Attempt, AttemptHistory, PlanFeedback, Verdict};
use crate::csp::{variable_set, Assignment, CspInstance, SlotId, SlotKind, Value};
use crate::domains::DomainSet;
use crate::planner::{BacktrackingPlanner, PlanError, Planner};
use crate::query::{Patch, PatchError, StructuredQuery};
use crate::sandbox::Sandbox;
use crate::search::{run_search, ScriptedSearch, SearchAgent, SearchError, SearchFeedback, SearchState};
use crate::space::{destination_pool, route_for};

/// Loop caps. `k` bounds plan attempts per search step, `l` bounds search
/// steps per turn; both are treated as at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrchestratorConfig {
    pub k: u32,
    pub l: u32,
    pub tool_budget: usize,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            k: 3,
            l: 10,
            tool_budget: 120,
        }
    }
}

impl OrchestratorConfig {
    pub fn max_attempts(&self) -> u32 {
        self.k.max(1)
    }

    pub fn max_steps(&self) -> u32 {
        self.l.max(1)
    }
}

/// Why a turn stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Valid,
    StepCap,
    AdvisorExhausted,
    NoGapFound,
    ToolBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: u32,
    pub query: StructuredQuery,
    pub assignment: Assignment,
    pub verdict: Verdict,
}

/// The state a session carries between turns.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SessionState {
    pub turn: u32,
    pub query: Option<StructuredQuery>,
    /// Domains behind the last valid plan.
    pub cache: Option<DomainSet>,
    pub search: SearchState,
    pub trajectory: Vec<TurnRecord>,
    pub trace: Vec<String>,
}

impl SessionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_plan(&self) -> Option<&TurnRecord> {
        self.trajectory.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResult {
    pub turn: u32,
    pub assignment: Assignment,
    pub verdict: Verdict,
    pub feedback: PlanFeedback,
    pub best_effort: bool,
    /// Search steps used (1-based).
    pub steps: u32,
    /// Attempts in the last search step.
    pub attempts: u32,
    pub total_attempts: u32,
    pub tool_calls: usize,
    pub stop: StopReason,
    pub trace: Vec<String>,
    pub last_advice: Option<SearchFeedback>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TurnError {
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error("no query to patch on the first turn")]
    NoBaseQuery,
    #[error(transparent)]
    Search(SearchError),
}

/// A turn's input: a full query or patches against the previous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TurnInput {
    Query(StructuredQuery),
    Patches(Vec<Patch>),
}

pub struct Orchestrator {
    pub sandbox: Arc<Sandbox>,
    pub config: OrchestratorConfig,
    pub search: Box<dyn SearchAgent>,
    pub planner: Box<dyn Planner>,
}

struct Best {
    violations: usize,
    attempt: Attempt,
}

impl Orchestrator {
    pub fn new(sandbox: Arc<Sandbox>, config: OrchestratorConfig) -> Self {
        Self {
            sandbox,
            config,
            search: Box::new(ScriptedSearch),
            planner: Box::new(BacktrackingPlanner::default()),
        }
    }

    pub fn with_agents(mut self, search: Box<dyn SearchAgent>, planner: Box<dyn Planner>) -> Self {
        self.search = search;
        self.planner = planner;
        self
    }

    /// Resolves the turn input against the session's last query.
    pub fn resolve(&self, s: &SessionState, input: &TurnInput) -> Result<StructuredQuery, TurnError> {
        match input {
            TurnInput::Query(q) => {
                q.validate().map_err(|e| TurnError::Search(SearchError::InvalidQuery(e)))?;
                Ok(q.clone())
            }
            TurnInput::Patches(ps) => {
                let base = s.query.as_ref().ok_or(TurnError::NoBaseQuery)?;
                Ok(base.apply(ps)?)
            }
        }
    }

    pub fn step(&mut self, s: &mut SessionState, input: &TurnInput) -> Result<TurnResult, TurnError> {
        let q = self.resolve(s, input)?;
        Ok(self.run_turn(s, q))
    }

    /// Runs one turn to completion. Always yields an assignment; when no
    /// valid plan is reached the least-violating attempt is delivered.
    pub fn run_turn(&mut self, s: &mut SessionState, q: StructuredQuery) -> TurnResult {
        let t = s.turn + 1;
        let calls_before = s.search.calls;
        let trace_from = s.trace.len();
        let budget = self.config.tool_budget;
        let max_k = self.config.max_attempts();
        let max_l = self.config.max_steps();
        let _span = tracing::info_span!("turn", t).entered();

        let mut stop = StopReason::StepCap;
        let mut domains = match &s.cache {
            Some(d) => d.clone(),
            None => {
                let r = run_search(&self.sandbox, &mut s.search, self.search.as_mut(), &q, None, budget);
                let rows = drain_tools(s);
                match r {
                    Ok(d) => {
                        s.trace.push(format!("t={t} l=0 k=0 search -> {rows} rows"));
                        d
                    }
                    Err(e) => {
                        s.trace.push(format!("t={t} l=0 k=0 search -> {e}"));
                        if matches!(e, SearchError::ToolBudgetExceeded { .. }) {
                            stop = StopReason::ToolBudget;
                        }
                        s.search.domains()
                    }
                }
            }
        };

        let mut best: Option<Best> = None;
        let mut winner: Option<(Attempt, DomainSet)> = None;
        let mut steps = 0;
        let mut attempts = 0;
        let mut total = 0;
        let mut last_advice = None;

        for l in 1..=max_l {
            steps = l;
            attempts = 0;
            let inst = CspInstance::build(q.clone(), domains.clone());
            let mut hist = AttemptHistory::new();
            let mut plan_err: Option<PlanError> = None;
            for k in 1..=max_k {
                attempts = k;
                let out = match self.planner.plan(&inst, &hist) {
                    Ok(o) => o,
                    Err(e) => {
                        s.trace.push(format!("t={t} l={l} k={k} planner -> {e}"));
                        plan_err = Some(e);
                        break;
                    }
                };
                total += 1;
                let tag = if out.best_effort { "best-effort" } else { "plan" };
                s.trace.push(format!("t={t} l={l} k={k} planner -> {tag}"));
                let (verdict, feedback) = check(&inst, &out.assignment, &hist);
                s.trace.push(format!("t={t} l={l} k={k} checker -> {verdict}"));
                tracing::debug!(l, k, %verdict, "attempt checked");
                let attempt = Attempt {
                    assignment: out.assignment,
                    verdict,
                    feedback,
                };
                let n = attempt.feedback.violations.len();
                if best.as_ref().is_none_or(|b| n < b.violations) {
                    best = Some(Best {
                        violations: n,
                        attempt: attempt.clone(),
                    });
                }
                if verdict == Verdict::Valid {
                    winner = Some((attempt, domains.clone()));
                    break;
                }
                hist.push(attempt);
                if verdict == Verdict::Unsat {
                    break;
                }
            }
            if winner.is_some() {
                stop = StopReason::Valid;
                break;
            }
            if stop == StopReason::ToolBudget || l == max_l {
                break;
            }
            let advice = match &plan_err {
                Some(e) => advise_error(&inst, e, &s.search.executed),
                None => advise(&inst, &hist, &s.search.executed),
            };
            let fb = match advice {
                Ok(fb) => fb,
                Err(e) => {
                    s.trace.push(format!("t={t} l={l} k={attempts} advisor -> {e}"));
                    stop = match e {
                        AdviseError::Exhausted => StopReason::AdvisorExhausted,
                        AdviseError::NoGapFound => StopReason::NoGapFound,
                    };
                    break;
                }
            };
            s.trace.push(format!("t={t} l={l} k={attempts} advisor -> {} directives", fb.directives.len()));
            let r = run_search(&self.sandbox, &mut s.search, self.search.as_mut(), &q, Some(&fb), budget);
            let rows = drain_tools(s);
            last_advice = Some(fb);
            let next = l + 1;
            match r {
                Ok(d) => {
                    s.trace.push(format!("t={t} l={next} k=0 search -> {rows} rows"));
                    domains = d;
                }
                Err(e) => {
                    s.trace.push(format!("t={t} l={next} k=0 search -> {e}"));
                    stop = StopReason::ToolBudget;
                    domains = s.search.domains();
                }
            }
        }

        let attempt = match winner {
            Some((a, d)) => {
                s.cache = Some(d);
                a
            }
            None => match best {
                Some(b) => b.attempt,
                None => {
                    let inst = CspInstance::build(q.clone(), domains.clone());
                    let a = fallback_assignment(&q, &domains);
                    let (verdict, feedback) = check(&inst, &a, &AttemptHistory::new());
                    Attempt {
                        assignment: a,
                        verdict,
                        feedback,
                    }
                }
            },
        };
        tracing::info!(verdict = %attempt.verdict, steps, ?stop, "turn finished");

        s.turn = t;
        s.query = Some(q.clone());
        s.trajectory.push(TurnRecord {
            turn: t,
            query: q,
            assignment: attempt.assignment.clone(),
            verdict: attempt.verdict,
        });
        TurnResult {
            turn: t,
            best_effort: attempt.verdict != Verdict::Valid,
            assignment: attempt.assignment,
            verdict: attempt.verdict,
            feedback: attempt.feedback,
            steps,
            attempts,
            total_attempts: total,
            tool_calls: s.search.calls - calls_before,
            stop,
            trace: s.trace[trace_from..].to_vec(),
            last_advice,
        }
    }

    /// Runs every turn in order on a fresh session.
    pub fn run_session(&mut self, inputs: &[TurnInput]) -> Result<(SessionState, Vec<TurnResult>), TurnError> {
        let mut s = SessionState::new();
        let mut out = Vec::with_capacity(inputs.len());
        for input in inputs {
            out.push(self.step(&mut s, input)?);
        }
        Ok((s, out))
    }
}

/// Moves tool lines into the session trace; returns rows fetched.
fn drain_tools(s: &mut SessionState) -> usize {
    let mut rows = 0;
    for line in s.search.trace.drain(..) {
        rows += line
            .rsplit("-> ")
            .next()
            .and_then(|r| r.strip_suffix(" rows"))
            .and_then(|n| n.parse::<usize>().ok())
            .unwrap_or(0);
        s.trace.push(line);
    }
    rows
}

/// City labels only; everything else "-".
pub fn fallback_assignment(q: &StructuredQuery, d: &DomainSet) -> Assignment {
    let cities: Vec<String> = match destination_pool(q, d) {
        Ok(p) => p.into_iter().take(q.visiting_city_count as usize).collect(),
        Err(_) => vec![q.destination.clone(); q.visiting_city_count as usize],
    };
    let route = route_for(q, d, &cities);
    let mut a = Assignment::new(q.days);
    for slot in variable_set(q) {
        a.set(slot, Value::Empty);
    }
    for day in 1..=q.days {
        a.set(SlotId::new(day, SlotKind::CurrentCity), route.label(day).clone());
    }
    a
}
