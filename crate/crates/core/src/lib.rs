//! Constraint-aware multi-agent trip planning over a closed-world travel
//! dataset.

pub mod advisor;
pub mod checker;
pub mod constraints;
pub mod cost;
pub mod csp;
pub mod domains;
pub mod evaluator;
pub mod generator;
pub mod orchestrator;
pub mod plan;
pub mod planner;
pub mod query;
pub mod search;
pub mod sandbox;
pub mod space;

pub use constraints::{build_constraints, Constraint, ConstraintSet, Violation};
pub use csp::{Assignment, CspInstance, Place, SlotId, SlotKind, Value};
pub use domains::{extract_domains, DomainSet};
pub use query::{Patch, PatchOp, Preferences, StructuredQuery, TransportPref};
pub use sandbox::{execute_tool, load_dataset, Notebook, Sandbox, Tool, ToolDirective};
pub use orchestrator::{Orchestrator, OrchestratorConfig, SessionState, TurnInput, TurnResult};
