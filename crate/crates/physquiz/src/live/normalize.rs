//! Turns Wikidata entity JSON (as returned by `wbgetentities`) into concept
//! records.
//!
//! Identifiers of a defining formula are linked in two ways on Wikidata:
//!
//! * a `has part` statement whose value is the linked item, qualified with
//!   `in defining formula` holding the symbol;
//! * an `in defining formula` statement holding the symbol, qualified with
//!   `symbol represents` pointing at the linked item.
//!
//! Both are read into the same [`IdentifierLink`] form. New formats go in
//! [`identifier_links`].

use std::collections::BTreeMap;

use physquiz_core::dimension::{parse_isq, DimensionVector};
use physquiz_core::latex::parse_latex_expression;
use physquiz_core::{clean_latex, ConceptRecord, Expression, IdentifierInfo, RecordSource, Symbol};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Wikidata property IDs used during retrieval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropertyIds {
    pub defining_formula: String,
    pub isq_dimension: String,
    pub has_part: String,
    pub in_defining_formula: String,
    pub symbol_represents: String,
}

impl Default for PropertyIds {
    fn default() -> Self {
        PropertyIds {
            defining_formula: "P2534".into(),
            isq_dimension: "P4020".into(),
            has_part: "P527".into(),
            in_defining_formula: "P7235".into(),
            symbol_represents: "P9758".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentifierLink {
    pub symbol_latex: String,
    pub item: Option<String>,
}

/// The parts of one entity that retrieval cares about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntitySummary {
    pub qid: String,
    pub label: Option<String>,
    /// Preferred statements first, deprecated ones dropped.
    pub defining_formulas: Vec<String>,
    pub isq_dimension: Option<String>,
    pub identifier_links: Vec<IdentifierLink>,
}

pub fn summarize_entity(entity: &Value, props: &PropertyIds, language: &str) -> Option<EntitySummary> {
    let qid = entity.get("id")?.as_str()?.to_string();
    if entity.get("missing").is_some() {
        return None;
    }
    let label = entity.pointer(&format!("/labels/{language}/value")).and_then(Value::as_str).map(str::to_string);
    let defining_formulas = statements(entity, &props.defining_formula)
        .filter_map(|s| string_value(&s["mainsnak"]))
        .map(String::from)
        .collect();
    let isq_dimension =
        statements(entity, &props.isq_dimension).find_map(|s| string_value(&s["mainsnak"])).map(String::from);
    Some(EntitySummary {
        qid,
        label,
        defining_formulas,
        isq_dimension,
        identifier_links: identifier_links(entity, props),
    })
}

pub fn identifier_links(entity: &Value, props: &PropertyIds) -> Vec<IdentifierLink> {
    let mut links: Vec<IdentifierLink> = Vec::new();
    let mut push = |link: IdentifierLink| {
        if !links.iter().any(|l| l.symbol_latex == link.symbol_latex) {
            links.push(link);
        }
    };
    for statement in statements(entity, &props.has_part) {
        let symbol = qualifiers(statement, &props.in_defining_formula).find_map(string_value);
        if let Some(symbol) = symbol {
            push(IdentifierLink { symbol_latex: symbol.into(), item: item_value(&statement["mainsnak"]) });
        }
    }
    for statement in statements(entity, &props.in_defining_formula) {
        if let Some(symbol) = string_value(&statement["mainsnak"]) {
            let item = qualifiers(statement, &props.symbol_represents).find_map(item_value);
            push(IdentifierLink { symbol_latex: symbol.into(), item });
        }
    }
    links
}

/// Non-deprecated statements of `property`, preferred rank first.
fn statements<'a>(entity: &'a Value, property: &str) -> impl Iterator<Item = &'a Value> {
    let mut found: Vec<&Value> = entity
        .pointer(&format!("/claims/{property}"))
        .and_then(Value::as_array)
        .map(|a| a.iter().filter(|s| s["rank"] != "deprecated").collect())
        .unwrap_or_default();
    found.sort_by_key(|s| s["rank"] != "preferred");
    found.into_iter()
}

fn qualifiers<'a>(statement: &'a Value, property: &str) -> impl Iterator<Item = &'a Value> {
    statement.pointer(&format!("/qualifiers/{property}")).and_then(Value::as_array).into_iter().flatten()
}

fn string_value(snak: &Value) -> Option<&str> {
    if snak["snaktype"] != "value" {
        return None;
    }
    snak.pointer("/datavalue/value")?.as_str()
}

fn item_value(snak: &Value) -> Option<String> {
    if snak["snaktype"] != "value" {
        return None;
    }
    let value = snak.pointer("/datavalue/value")?;
    if let Some(id) = value.get("id").and_then(Value::as_str) {
        return Some(id.to_string());
    }
    value.get("numeric-id").and_then(Value::as_u64).map(|n| format!("Q{n}"))
}

/// Symbol named by a LaTeX fragment such as `v`, `\omega` or `E_k`.
pub fn symbol_from_latex(latex: &str) -> Option<Symbol> {
    let cleaned = clean_latex(latex, false).cleaned;
    match parse_latex_expression(&cleaned) {
        Ok(Expression::Identifier(symbol)) => Some(symbol),
        _ => None,
    }
}

/// Reads an ISQ dimension as stored on Wikidata, where it is written in
/// LaTeX such as `\mathsf{L} \mathsf{T}^{-1}`; plain `L T^-1` works too.
pub fn isq_from_wikidata(text: &str) -> Option<DimensionVector> {
    let mut plain = text.to_string();
    for wrapper in ["\\mathsf", "\\mathrm", "\\text"] {
        plain = plain.replace(&format!("{wrapper}{{"), " {");
    }
    // braces around base letters go; exponent braces stay
    let mut out = String::with_capacity(plain.len());
    let mut after_caret = false;
    let mut depth_kept = 0usize;
    for c in plain.chars() {
        match c {
            '^' => {
                after_caret = true;
                out.push(c);
                continue;
            }
            '{' if after_caret => {
                depth_kept += 1;
                out.push(c);
            }
            '}' if depth_kept > 0 => {
                depth_kept -= 1;
                out.push(c);
            }
            '{' => out.push(' '),
            '}' => {}
            _ => out.push(c),
        }
        after_caret = false;
    }
    let out = out.replace("\\cdot", " ").replace("\\,", " ");
    parse_isq(&out).ok()
}

/// Builds a record from a concept and the items its identifiers link to.
///
/// Returns `None` when the concept has no defining formula. Links whose
/// symbol cannot be read are dropped; the record then shows up as
/// incomplete.
pub fn build_record(
    concept: &EntitySummary,
    linked: &BTreeMap<String, EntitySummary>,
    retrieved_at: u64,
) -> Option<ConceptRecord> {
    let formula = concept.defining_formulas.first()?.clone();
    let mut identifiers: Vec<IdentifierInfo> = Vec::new();
    for link in &concept.identifier_links {
        let Some(symbol) = symbol_from_latex(&link.symbol_latex) else { continue };
        if identifiers.iter().any(|i| i.symbol == symbol) {
            continue;
        }
        let item = link.item.as_ref().and_then(|q| linked.get(q));
        identifiers.push(IdentifierInfo {
            symbol,
            name: item.and_then(|i| i.label.clone()).unwrap_or_default(),
            qid: link.item.clone(),
            dimension: item.and_then(|i| i.isq_dimension.as_deref()).and_then(isq_from_wikidata),
        });
    }
    Some(ConceptRecord {
        qid: concept.qid.clone(),
        label: concept.label.clone().unwrap_or_else(|| concept.qid.clone()),
        defining_formula_latex: formula,
        formula_dimension: concept.isq_dimension.as_deref().and_then(isq_from_wikidata),
        identifiers,
        source: RecordSource::Live,
        retrieved_at,
    })
}
