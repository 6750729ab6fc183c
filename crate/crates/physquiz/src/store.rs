//! Concept lookup by label or QID.

use physquiz_core::concept::is_qid;
use physquiz_core::{ConceptRecord, Symbol};
use serde::{Deserialize, Serialize};

use crate::engine::translate;
use crate::live::WikidataClient;
use crate::snapshot::Snapshot;

/// User-facing text for an unknown concept.
pub const CONCEPT_NOT_FOUND: &str = "No Wikidata item with formula found.";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub qid: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("the concept query is empty")]
    EmptyQuery,
    #[error("No Wikidata item with formula found.")]
    ConceptNotFound,
    #[error("`{query}` matches {} items with a formula", candidates.len())]
    AmbiguousLabel { query: String, candidates: Vec<Candidate> },
    /// Live mode only; worth retrying.
    #[error("Wikidata request failed: {0}")]
    NetworkError(String),
}

/// Read-mostly source of concept records. Lookups may run concurrently.
pub trait ConceptStore: Send + Sync {
    fn lookup(&self, query: &str) -> Result<ConceptRecord, LookupError>;

    /// `fixture`, `live` or `fixture+live`.
    fn mode(&self) -> &'static str;

    /// Number of records held locally, when that is known.
    fn len_hint(&self) -> Option<usize> {
        None
    }
}

/// Lookups against an in-memory snapshot.
#[derive(Clone, Debug)]
pub struct SnapshotStore {
    snapshot: Snapshot,
}

impl SnapshotStore {
    pub fn new(snapshot: Snapshot) -> Self {
        SnapshotStore { snapshot }
    }

    pub fn bundled() -> Self {
        SnapshotStore::new(Snapshot::bundled())
    }

    pub fn records(&self) -> &[ConceptRecord] {
        &self.snapshot.records
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snapshot
    }
}

impl ConceptStore for SnapshotStore {
    fn lookup(&self, query: &str) -> Result<ConceptRecord, LookupError> {
        let query = query.trim();
        if query.is_empty() {
            return Err(LookupError::EmptyQuery);
        }
        if is_qid(query) {
            return self.records().iter().find(|r| r.qid == query).cloned().ok_or(LookupError::ConceptNotFound);
        }
        let wanted = query.to_lowercase();
        let matches: Vec<&ConceptRecord> =
            self.records().iter().filter(|r| r.label.trim().to_lowercase() == wanted).collect();
        match matches.as_slice() {
            [] => Err(LookupError::ConceptNotFound),
            [one] => Ok((*one).clone()),
            many => Err(LookupError::AmbiguousLabel {
                query: query.to_string(),
                candidates: many.iter().map(|r| Candidate { qid: r.qid.clone(), label: r.label.clone() }).collect(),
            }),
        }
    }

    fn mode(&self) -> &'static str {
        "fixture"
    }

    fn len_hint(&self) -> Option<usize> {
        Some(self.records().len())
    }
}

impl ConceptStore for WikidataClient {
    fn lookup(&self, query: &str) -> Result<ConceptRecord, LookupError> {
        WikidataClient::lookup(self, query)
    }

    fn mode(&self) -> &'static str {
        "live"
    }
}

/// Consults the snapshot first and falls back to live Wikidata for
/// concepts the snapshot does not know.
pub struct LayeredStore {
    pub fixture: SnapshotStore,
    pub live: WikidataClient,
}

impl ConceptStore for LayeredStore {
    fn lookup(&self, query: &str) -> Result<ConceptRecord, LookupError> {
        match self.fixture.lookup(query) {
            Err(LookupError::ConceptNotFound) => self.live.lookup(query),
            other => other,
        }
    }

    fn mode(&self) -> &'static str {
        "fixture+live"
    }

    fn len_hint(&self) -> Option<usize> {
        self.fixture.len_hint()
    }
}

/// Whether a record describes every identifier of its formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    /// Free identifiers of the parsed formula without an identifier entry.
    Incomplete {
        missing: Vec<Symbol>,
    },
    /// The formula does not parse, so its identifiers are unknown.
    Untranslatable,
}

impl Completeness {
    pub fn is_incomplete(&self) -> bool {
        !matches!(self, Completeness::Complete)
    }
}

pub fn completeness(record: &ConceptRecord) -> Completeness {
    match translate(&record.defining_formula_latex, false).equation {
        Err(_) => Completeness::Untranslatable,
        Ok(eq) => {
            let missing = record.missing_identifiers(&eq.identifiers());
            if missing.is_empty() {
                Completeness::Complete
            } else {
                Completeness::Incomplete { missing }
            }
        }
    }
}
