//! The live client against a local stand-in for the Wikidata API serving
//! canned responses.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::routing::get;
use axum::{Json, Router};
use physquiz::live::{summarize_entity, LiveConfig, PropertyIds, WikidataClient};
use physquiz::store::{completeness, Completeness, LookupError};
use physquiz_core::dimension::parse_isq;
use physquiz_core::{IdentifierInfo, RecordSource, Symbol};
use serde_json::{json, Value};

struct Mock {
    entities: Value,
    search: Value,
    hits: AtomicUsize,
}

async fn api(
    State(mock): State<Arc<Mock>>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Json<Value>, StatusCode> {
    mock.hits.fetch_add(1, Ordering::SeqCst);
    assert_eq!(q.get("format").map(String::as_str), Some("json"));
    match q.get("action").map(String::as_str) {
        Some("wbsearchentities") => {
            let term = q["search"].to_lowercase();
            if term == "boom" {
                return Err(StatusCode::INTERNAL_SERVER_ERROR);
            }
            if term == "api error" {
                return Ok(Json(json!({"error": {"code": "badvalue", "info": "nope"}})));
            }
            Ok(Json(mock.search.get(&term).cloned().unwrap_or_else(|| json!({"search": [], "success": 1}))))
        }
        Some("wbgetentities") => {
            let mut out = serde_json::Map::new();
            for id in q["ids"].split('|') {
                let entity = mock.entities.get(id).cloned().unwrap_or_else(|| json!({"id": id, "missing": ""}));
                out.insert(id.to_string(), entity);
            }
            Ok(Json(json!({"entities": out, "success": 1})))
        }
        _ => Err(StatusCode::BAD_REQUEST),
    }
}

/// Starts the stand-in on its own runtime thread and returns it with its
/// endpoint URL.
fn start_mock() -> (Arc<Mock>, String) {
    let mock = Arc::new(Mock {
        entities: serde_json::from_str(include_str!("data/entities.json")).unwrap(),
        search: serde_json::from_str(include_str!("data/search.json")).unwrap(),
        hits: AtomicUsize::new(0),
    });
    let (tx, rx) = std::sync::mpsc::channel();
    let state = mock.clone();
    std::thread::spawn(move || {
        let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, Router::new().route("/w/api.php", get(api)).with_state(state)).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    (mock, format!("http://{addr}/w/api.php"))
}

fn client(endpoint: &str) -> WikidataClient {
    WikidataClient::new(LiveConfig {
        endpoint: endpoint.into(),
        timeout: Duration::from_secs(10),
        ..LiveConfig::default()
    })
}

fn info(symbol: &str, name: &str, qid: &str, dim: &str) -> IdentifierInfo {
    IdentifierInfo {
        symbol: Symbol::new(symbol),
        name: name.into(),
        qid: Some(qid.into()),
        dimension: Some(parse_isq(dim).unwrap()),
    }
}

#[test]
fn speed_by_label_and_qid() {
    let (_mock, endpoint) = start_mock();
    let client = client(&endpoint);
    let record = client.lookup("speed").unwrap();
    assert_eq!(record.qid, "Q3711325");
    assert_eq!(record.label, "speed");
    // the deprecated statement is ignored
    assert_eq!(record.defining_formula_latex, "v = \\frac{s}{t}");
    assert_eq!(record.formula_dimension, Some(parse_isq("L T^-1").unwrap()));
    assert_eq!(record.source, RecordSource::Live);
    // both identifier formats, first link per symbol wins
    assert_eq!(
        record.identifiers,
        [
            info("v", "velocity", "Q11465", "L T^-1"),
            info("s", "distance", "Q126017", "L"),
            info("t", "duration", "Q2199864", "T"),
        ]
    );
    assert_eq!(completeness(&record), Completeness::Complete);
    let mut by_qid = client.lookup("Q3711325").unwrap();
    by_qid.retrieved_at = record.retrieved_at;
    assert_eq!(by_qid, record);
}

#[test]
fn lookup_failures() {
    let (_mock, endpoint) = start_mock();
    let client = client(&endpoint);
    assert_eq!(client.lookup("nonexistent concept xyzzy"), Err(LookupError::ConceptNotFound));
    // exists, but has no defining formula
    assert_eq!(client.lookup("Q7575"), Err(LookupError::ConceptNotFound));
    assert_eq!(client.lookup("Q123456789"), Err(LookupError::ConceptNotFound));
    assert_eq!(client.lookup(""), Err(LookupError::EmptyQuery));
    match client.lookup("mass") {
        Err(LookupError::AmbiguousLabel { candidates, .. }) => {
            let qids: Vec<&str> = candidates.iter().map(|c| c.qid.as_str()).collect();
            assert_eq!(qids, ["Q11423", "Q5000"]);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(client.lookup("boom"), Err(LookupError::NetworkError(_))));
    assert!(matches!(client.lookup("api error"), Err(LookupError::NetworkError(_))));
    assert!(matches!(self::client("http://127.0.0.1:1/w/api.php").lookup("speed"), Err(LookupError::NetworkError(_))));
}

#[test]
fn aliases_and_unlinked_symbols() {
    let (_mock, endpoint) = start_mock();
    let client = client(&endpoint);
    let record = client.lookup("rapidity").unwrap();
    assert_eq!(record.qid, "Q11652");
    // `T` is listed without a linked item: present, but nameless
    let t = record.identifier(&Symbol::new("T")).unwrap();
    assert_eq!((t.name.as_str(), t.qid.as_deref(), t.dimension), ("", None, None));
    assert_eq!(record.identifier(&Symbol::new("f")).unwrap().dimension, Some(parse_isq("T^-1").unwrap()));
}

#[test]
fn property_ids_come_from_configuration() {
    let (_mock, endpoint) = start_mock();
    let properties = PropertyIds { defining_formula: "P9999".into(), ..PropertyIds::default() };
    let client = WikidataClient::new(LiveConfig { endpoint, properties, ..LiveConfig::default() });
    assert_eq!(client.lookup("speed"), Err(LookupError::ConceptNotFound));
}

#[test]
fn responses_are_cached_on_disk() {
    let (mock, endpoint) = start_mock();
    let dir = tempfile::tempdir().unwrap();
    let cached = |ttl: u64| {
        WikidataClient::new(LiveConfig {
            endpoint: endpoint.clone(),
            cache_dir: Some(dir.path().to_path_buf()),
            cache_ttl: Duration::from_secs(ttl),
            ..LiveConfig::default()
        })
    };
    let first = cached(3600).lookup("speed").unwrap();
    let after_first = mock.hits.load(Ordering::SeqCst);
    assert!(after_first >= 3);
    // a second client on the same directory needs no requests
    let second = cached(3600).lookup("speed").unwrap();
    assert_eq!(mock.hits.load(Ordering::SeqCst), after_first);
    assert_eq!(second.identifiers, first.identifiers);
    // with a zero TTL every entry is stale
    cached(0).lookup("speed").unwrap();
    assert_eq!(mock.hits.load(Ordering::SeqCst), 2 * after_first);
}

#[test]
fn normalizer_on_canned_entities() {
    let entities: Value = serde_json::from_str(include_str!("data/entities.json")).unwrap();
    let props = PropertyIds::default();
    let speed = summarize_entity(&entities["Q3711325"], &props, "en").unwrap();
    assert_eq!(speed.defining_formulas, ["v = \\frac{s}{t}"]);
    let links: Vec<(&str, Option<&str>)> =
        speed.identifier_links.iter().map(|l| (l.symbol_latex.as_str(), l.item.as_deref())).collect();
    assert_eq!(links, [("v", Some("Q11465")), ("s", Some("Q126017")), ("t", Some("Q2199864"))]);
    assert_eq!(summarize_entity(&entities["Q3711325"], &props, "de").unwrap().label, None);
    assert_eq!(summarize_entity(&json!({"id": "Q1", "missing": ""}), &props, "en"), None);
    let adams = summarize_entity(&entities["Q42"], &props, "en").unwrap();
    assert!(adams.defining_formulas.is_empty() && adams.identifier_links.is_empty());
}
