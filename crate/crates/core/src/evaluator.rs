//! Benchmark scoring: per-plan constraint outcomes, batch metrics and the
//! failure breakdown.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::Category;
use crate::csp::{Assignment, CspInstance};
use crate::plan::{parse_plan, plan_from_json, PlanRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintResult {
    pub id: String,
    pub category: Category,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintOutcome {
    pub delivered: bool,
    pub results: Vec<ConstraintResult>,
}

impl ConstraintOutcome {
    /// (passed, total) for one category.
    pub fn counts(&self, cat: Category) -> (usize, usize) {
        let of = self.results.iter().filter(|r| r.category == cat);
        (of.clone().filter(|r| r.passed).count(), of.count())
    }

    pub fn passes_all(&self, cat: Category) -> bool {
        self.delivered && self.results.iter().filter(|r| r.category == cat).all(|r| r.passed)
    }

    pub fn passes_everything(&self) -> bool {
        self.delivered && self.results.iter().all(|r| r.passed)
    }

    pub fn failed_ids(&self) -> impl Iterator<Item = &str> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.id.as_str())
    }
}

fn undelivered(ground: &CspInstance) -> ConstraintOutcome {
    ConstraintOutcome {
        delivered: false,
        results: ground
            .constraints
            .iter()
            .map(|c| ConstraintResult {
                id: c.id.clone(),
                category: c.category,
                passed: false,
            })
            .collect(),
    }
}

/// Scores an assignment against the authoritative instance. `None`, or a
/// plan of the wrong length, counts as not delivered.
pub fn score_assignment(a: Option<&Assignment>, ground: &CspInstance) -> ConstraintOutcome {
    let Some(a) = a.filter(|a| a.days == ground.query.days) else {
        return undelivered(ground);
    };
    let q = &ground.query;
    let d = &ground.domains;
    ConstraintOutcome {
        delivered: true,
        results: ground
            .constraints
            .iter()
            .map(|c| ConstraintResult {
                id: c.id.clone(),
                category: c.category,
                passed: c.holds(a, d, q),
            })
            .collect(),
    }
}

pub fn score_plan(plan: &PlanRecord, ground: &CspInstance) -> ConstraintOutcome {
    score_assignment(parse_plan(plan).ok().as_ref(), ground)
}

/// Scores raw plan JSON; anything unparseable is not delivered.
pub fn score_text(text: &str, ground: &CspInstance) -> ConstraintOutcome {
    match plan_from_json(text) {
        Ok(p) => score_plan(&p, ground),
        Err(_) => undelivered(ground),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot aggregate an empty batch")]
    EmptyBatch,
}

/// Batch metrics in percent. Every denominator is the number of queries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: usize,
    pub delivery: f64,
    pub commonsense_micro: f64,
    pub commonsense_macro: f64,
    pub hard_micro: f64,
    pub hard_macro: f64,
    pub final_pass: f64,
}

pub fn aggregate(outcomes: &[ConstraintOutcome]) -> Result<MetricsReport, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::EmptyBatch);
    }
    let n = outcomes.len() as f64;
    let pct = |x: usize| 100.0 * x as f64 / n;
    let macro_of = |cat| pct(outcomes.iter().filter(|o| o.passes_all(cat)).count());
    let micro_of = |cat| {
        let (p, t) = outcomes.iter().fold((0, 0), |(p, t), o| {
            let (a, b) = o.counts(cat);
            (p + a, t + b)
        });
        // no constraints of this category anywhere: fall back to the macro rate
        if t == 0 {
            macro_of(cat)
        } else {
            100.0 * p as f64 / t as f64
        }
    };
    Ok(MetricsReport {
        total: outcomes.len(),
        delivery: pct(outcomes.iter().filter(|o| o.delivered).count()),
        commonsense_micro: micro_of(Category::Commonsense),
        commonsense_macro: macro_of(Category::Commonsense),
        hard_micro: micro_of(Category::Hard),
        hard_macro: macro_of(Category::Hard),
        final_pass: pct(outcomes.iter().filter(|o| o.passes_everything()).count()),
    })
}

pub const TABLE_HEADER: &str = "Delivery | Commonsense Micro | Commonsense Macro | Hard Micro | Hard Macro | Final";

impl MetricsReport {
    pub fn row(&self) -> String {
        format!(
            "{:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2}",
            self.delivery,
            self.commonsense_micro,
            self.commonsense_macro,
            self.hard_micro,
            self.hard_macro,
            self.final_pass
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{TABLE_HEADER}")?;
        write!(f, "{}", self.row())
    }
}

/// Constraint family of an id: the part before any `:` argument.
pub fn family(id: &str) -> &str {
    id.split(':').next().unwrap_or(id)
}

/// Per family, how many delivered plans violate at least one constraint of
/// it. Every family present in the batch appears, zeros included.
pub fn failure_breakdown(outcomes: &[ConstraintOutcome]) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    for o in outcomes {
        for r in &o.results {
            out.entry(family(&r.id).to_string()).or_default();
        }
        if !o.delivered {
            continue;
        }
        let mut hit: Vec<&str> = o.failed_ids().map(family).collect();
        hit.sort_unstable();
        hit.dedup();
        for f in hit {
            *out.entry(f.to_string()).or_default() += 1;
        }
    }
    out
}
