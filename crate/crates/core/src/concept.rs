//! Concept records: a defining formula plus what is known about its
//! identifiers.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionVector;
use crate::expr::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordSource {
    Live,
    Fixture,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierInfo {
    pub symbol: Symbol,
    /// Label of the linked item, such as `velocity`.
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptRecord {
    pub qid: String,
    pub label: String,
    pub defining_formula_latex: String,
    /// ISQ dimension stated on the concept item itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula_dimension: Option<DimensionVector>,
    pub identifiers: Vec<IdentifierInfo>,
    pub source: RecordSource,
    /// Unix seconds.
    pub retrieved_at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("`{0}` is not a QID")]
    InvalidQid(String),
    #[error("record {0} has an empty defining formula")]
    EmptyFormula(String),
    #[error("record {qid} lists identifier `{symbol}` twice")]
    DuplicateIdentifier { qid: String, symbol: Symbol },
}

pub fn is_qid(text: &str) -> bool {
    text.strip_prefix('Q').is_some_and(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
}

impl ConceptRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if !is_qid(&self.qid) {
            return Err(RecordError::InvalidQid(self.qid.clone()));
        }
        if self.defining_formula_latex.trim().is_empty() {
            return Err(RecordError::EmptyFormula(self.qid.clone()));
        }
        for (i, info) in self.identifiers.iter().enumerate() {
            if self.identifiers[..i].iter().any(|other| other.symbol == info.symbol) {
                return Err(RecordError::DuplicateIdentifier { qid: self.qid.clone(), symbol: info.symbol.clone() });
            }
        }
        Ok(())
    }

    pub fn identifier(&self, symbol: &Symbol) -> Option<&IdentifierInfo> {
        self.identifiers.iter().find(|info| &info.symbol == symbol)
    }

    /// Symbols from `symbols` that have no identifier entry.
    pub fn missing_identifiers<'a>(&self, symbols: impl IntoIterator<Item = &'a Symbol>) -> Vec<Symbol> {
        symbols.into_iter().filter(|s| self.identifier(s).is_none()).cloned().collect()
    }
}
