//! Subcommands. Each returns the text it would print so tests can call
//! them directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use tripcsp::evaluator::{aggregate, failure_breakdown, score_assignment};
use tripcsp::generator::{generate_dataset, sample_queries};
use tripcsp::plan::{plan_to_json, serialize_plan};
use tripcsp::sandbox::write_dataset;
use tripcsp::{
    load_dataset, CspInstance, DomainSet, Orchestrator, OrchestratorConfig, Sandbox, SessionState, StructuredQuery,
    TurnInput,
};

use crate::session::{replay, SessionRecord};

#[derive(Debug, Parser)]
#[command(name = "tripcsp", version, about = "Constraint-aware trip planning over a closed-world dataset")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one query (and optional follow-up turns) and print the plan and trace.
    Plan(PlanArgs),
    /// Run every query in a directory and print the metrics table.
    Bench(BenchArgs),
    /// Write a synthetic dataset and print its manifest.
    Gen(GenArgs),
    /// Re-run a recorded session and print each turn's plan.
    Replay(ReplayArgs),
    /// Start the session service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct LoopArgs {
    /// Plan attempts per search step.
    #[arg(long, default_value_t = 3)]
    pub k: u32,
    /// Search steps per turn.
    #[arg(long, default_value_t = 10)]
    pub l: u32,
    /// Tool calls per session.
    #[arg(long, default_value_t = 120)]
    pub tool_budget: usize,
}

impl From<LoopArgs> for OrchestratorConfig {
    fn from(a: LoopArgs) -> Self {
        Self {
            k: a.k,
            l: a.l,
            tool_budget: a.tool_budget,
        }
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// JSON array of later turns, each a full query or a list of patches.
    #[arg(long)]
    pub turns: Option<PathBuf>,
    #[command(flatten)]
    pub caps: LoopArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub caps: LoopArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub cities: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write this many sampled queries under `<out>/queries`.
    #[arg(long, default_value_t = 0)]
    pub queries: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub session: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Directory to mirror each session into after every turn.
    #[arg(long)]
    pub persist: Option<PathBuf>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_sandbox(dir: &Path) -> anyhow::Result<Arc<Sandbox>> {
    let sb = load_dataset(dir).with_context(|| format!("loading dataset from {}", dir.display()))?;
    Ok(Arc::new(sb))
}

pub fn plan(a: &PlanArgs) -> anyhow::Result<String> {
    let q: StructuredQuery = read_json(&a.query)?;
    let mut inputs = vec![TurnInput::Query(q)];
    if let Some(t) = &a.turns {
        inputs.extend(read_json::<Vec<TurnInput>>(t)?);
    }
    let mut o = Orchestrator::new(load_sandbox(&a.data)?, a.caps.into());
    let mut s = SessionState::new();
    let mut out = String::new();
    for input in &inputs {
        let r = o.step(&mut s, input)?;
        writeln!(out, "== turn {} ==", r.turn)?;
        writeln!(out, "{}", plan_to_json(&serialize_plan(&r.assignment)?))?;
        writeln!(
            out,
            "verdict: {}{} (steps {}, attempts {}, tool calls {})",
            r.verdict,
            if r.best_effort { ", best effort" } else { "" },
            r.steps,
            r.total_attempts,
            r.tool_calls
        )?;
        out.push_str(&r.feedback.render());
        for line in &r.trace {
            writeln!(out, "{line}")?;
        }
    }
    Ok(out)
}

pub fn bench(a: &BenchArgs) -> anyhow::Result<String> {
    let sb = load_sandbox(&a.data)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&a.queries)
        .with_context(|| format!("listing {}", a.queries.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no query files in {}", a.queries.display());
    }
    let full = DomainSet::from_sandbox(&sb);
    let mut outcomes = Vec::with_capacity(files.len());
    for f in &files {
        let q: StructuredQuery = read_json(f)?;
        let ground = CspInstance::build(q.clone(), full.clone());
        let mut o = Orchestrator::new(sb.clone(), a.caps.into());
        let r = o.run_turn(&mut SessionState::new(), q);
        tracing::info!(query = %f.display(), verdict = %r.verdict, "benchmarked");
        outcomes.push(score_assignment(Some(&r.assignment), &ground));
    }
    let report = aggregate(&outcomes)?;
    let mut out = format!("{report}\n\nfailures by constraint family ({} queries):\n", report.total);
    for (family, n) in failure_breakdown(&outcomes) {
        writeln!(out, "  {family}: {n}")?;
    }
    Ok(out)
}

pub fn gen(a: &GenArgs) -> anyhow::Result<String> {
    let g = generate_dataset(a.seed, a.cities)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_dataset(&g.sandbox, &a.out)?;
    if a.queries > 0 {
        let dir = a.out.join("queries");
        std::fs::create_dir_all(&dir)?;
        for (i, q) in sample_queries(&g, a.queries, a.seed).iter().enumerate() {
            std::fs::write(dir.join(format!("q{i:03}.json")), serde_json::to_string_pretty(q)?)?;
        }
    }
    Ok(serde_json::to_string_pretty(&g.manifest)? + "\n")
}

pub fn replay_cmd(a: &ReplayArgs) -> anyhow::Result<String> {
    let rec = SessionRecord::load(&a.session)?;
    let plans = replay(load_sandbox(&a.data)?, &rec)?;
    Ok(plans.into_iter().map(|p| p + "\n").collect())
}
