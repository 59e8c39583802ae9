//! Wire shapes shared by the CLI and the service, and the on-disk record a
//! session can be replayed from.

use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tripcsp::checker::{UnsatCertificate, Verdict};
use tripcsp::orchestrator::{StopReason, TurnRecord};
use tripcsp::plan::{plan_to_json, serialize_plan, PlanRecord};
use tripcsp::{
    build_constraints, Notebook, Orchestrator, OrchestratorConfig, Sandbox, SessionState, TurnInput, TurnResult,
    Violation,
};

/// What a turn returns over the wire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResponse {
    pub turn: u32,
    pub plan: PlanRecord,
    pub verdict: Verdict,
    pub best_effort: bool,
    pub violations: Vec<Violation>,
    pub certificates: Vec<UnsatCertificate>,
    pub feedback: String,
    pub steps: u32,
    pub attempts: u32,
    pub total_attempts: u32,
    pub tool_calls: usize,
    pub stop: StopReason,
    pub constraints: String,
}

/// Constraint dump for the session's current query and domains.
pub fn constraint_dump(s: &SessionState) -> String {
    let Some(q) = &s.query else { return String::new() };
    let d = s.cache.clone().unwrap_or_else(|| s.search.domains());
    build_constraints(q, &d).dump()
}

pub fn render_turn(r: &TurnResult, s: &SessionState) -> anyhow::Result<TurnResponse> {
    Ok(TurnResponse {
        turn: r.turn,
        plan: serialize_plan(&r.assignment)?,
        verdict: r.verdict,
        best_effort: r.best_effort,
        violations: r.feedback.violations.clone(),
        certificates: r.feedback.unsat_certificates.clone(),
        feedback: r.feedback.render(),
        steps: r.steps,
        attempts: r.attempts,
        total_attempts: r.total_attempts,
        tool_calls: r.tool_calls,
        stop: r.stop,
        constraints: constraint_dump(s),
    })
}

/// Everything needed to replay a session: its config, the turn inputs in
/// order, and what it observed and delivered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub config: Option<OrchestratorConfig>,
    pub inputs: Vec<TurnInput>,
    pub notebook: Notebook,
    pub trajectory: Vec<TurnRecord>,
}

impl SessionRecord {
    pub fn capture(config: OrchestratorConfig, inputs: &[TurnInput], s: &SessionState) -> Self {
        Self {
            config: Some(config),
            inputs: inputs.to_vec(),
            notebook: s.search.notebook.clone(),
            trajectory: s.trajectory.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Re-runs a recorded input sequence and returns each turn's plan JSON.
pub fn replay(sb: Arc<Sandbox>, rec: &SessionRecord) -> anyhow::Result<Vec<String>> {
    let mut o = Orchestrator::new(sb, rec.config.unwrap_or_default());
    let (_, results) = o.run_session(&rec.inputs)?;
    results
        .iter()
        .map(|r| Ok(plan_to_json(&serialize_plan(&r.assignment)?)))
        .collect()
}
