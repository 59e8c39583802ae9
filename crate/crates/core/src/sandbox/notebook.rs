use serde::{Deserialize, Serialize};

use super::tools::Observation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotebookEntry {
    pub index: usize,
    pub description: String,
    pub observation: Observation,
}

/// Append-only store of tool observations for one session.
///
/// Entries are never mutated or removed, so an index handed out once keeps
/// pointing at the same observation for the lifetime of the notebook.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Notebook {
    entries: Vec<NotebookEntry>,
}

impl Notebook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an observation and returns its index. Duplicates are kept.
    pub fn record(&mut self, description: impl Into<String>, observation: Observation) -> usize {
        let index = self.entries.len();
        self.entries.push(NotebookEntry {
            index,
            description: description.into(),
            observation,
        });
        index
    }

    pub fn entries(&self) -> &[NotebookEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&NotebookEntry> {
        self.entries.get(index)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
