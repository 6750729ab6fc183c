//! Snapshot files: a versioned JSON document holding concept records, so
//! evaluation does not depend on the current state of Wikidata.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "description": "optional free text",
//!   "records": [ { "qid": "Q3711325", "label": "speed", ... } ]
//! }
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use physquiz_core::ConceptRecord;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// The 20-concept physics corpus shipped with the crate.
pub const BUNDLED_SNAPSHOT: &str = include_str!("../fixtures/physics.json");

/// Stage flags expected from the evaluation harness on the bundled corpus.
pub const BUNDLED_EXPECTED_FLAGS: &str = include_str!("../fixtures/physics.expected.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub records: Vec<ConceptRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot schema violation: {0}")]
    SchemaViolation(String),
    #[error("cannot access snapshot {path}: {source}")]
    IoError { path: PathBuf, source: io::Error },
}

impl Snapshot {
    pub fn new(records: Vec<ConceptRecord>) -> Result<Self, SnapshotError> {
        let snapshot = Snapshot { schema_version: SCHEMA_VERSION, description: String::new(), records };
        snapshot.check()?;
        Ok(snapshot)
    }

    pub fn bundled() -> Self {
        Snapshot::from_json(BUNDLED_SNAPSHOT).expect("bundled snapshot is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        // check the version before the shape so old files get a useful message
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SnapshotError::SchemaViolation(e.to_string()))?;
        match raw.get("schema_version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(SnapshotError::SchemaViolation(format!(
                    "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(SnapshotError::SchemaViolation("missing integer `schema_version`".into())),
        }
        let snapshot: Snapshot =
            serde_json::from_value(raw).map_err(|e| SnapshotError::SchemaViolation(e.to_string()))?;
        snapshot.check()?;
        Ok(snapshot)
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        let text = fs::read_to_string(path).map_err(|source| SnapshotError::IoError { path: path.into(), source })?;
        Snapshot::from_json(&text)
    }

    /// Pretty JSON with a trailing newline; the same snapshot always gives
    /// the same bytes.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("snapshot serializes");
        text.push('\n');
        text
    }

    fn check(&self) -> Result<(), SnapshotError> {
        for (i, record) in self.records.iter().enumerate() {
            record.validate().map_err(|e| SnapshotError::SchemaViolation(e.to_string()))?;
            if self.records[..i].iter().any(|other| other.qid == record.qid) {
                return Err(SnapshotError::SchemaViolation(format!("record {} appears twice", record.qid)));
            }
        }
        Ok(())
    }
}

/// Validates `records` and writes them to `path` as a snapshot.
///
/// The file is written next to its destination and renamed into place, so
/// readers never observe a partial snapshot.
pub fn snapshot_fixture(records: &[ConceptRecord], path: &Path) -> Result<Snapshot, SnapshotError> {
    let snapshot = Snapshot::new(records.to_vec())?;
    write_atomically(path, &snapshot.to_json())?;
    Ok(snapshot)
}

fn write_atomically(path: &Path, contents: &str) -> Result<(), SnapshotError> {
    let io_error = |source| SnapshotError::IoError { path: path.into(), source };
    let mut staging = path.as_os_str().to_owned();
    staging.push(".partial");
    let staging = PathBuf::from(staging);
    fs::write(&staging, contents).map_err(io_error)?;
    fs::rename(&staging, path).map_err(io_error)
}
