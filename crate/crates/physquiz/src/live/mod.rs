//! Live retrieval from the Wikidata API with an on-disk response cache.

mod normalize;

pub use normalize::{
    build_record, identifier_links, isq_from_wikidata, summarize_entity, symbol_from_latex, EntitySummary,
    IdentifierLink, PropertyIds,
};

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Condvar, Mutex, OnceLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use physquiz_core::concept::is_qid;
use physquiz_core::ConceptRecord;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::store::{Candidate, LookupError};

/// `wbgetentities` accepts at most this many IDs per request.
const ENTITY_BATCH: usize = 50;

#[derive(Clone, Debug)]
pub struct LiveConfig {
    /// MediaWiki action API, e.g. `https://www.wikidata.org/w/api.php`.
    pub endpoint: String,
    pub language: String,
    pub properties: PropertyIds,
    /// `None` disables the response cache.
    pub cache_dir: Option<PathBuf>,
    pub cache_ttl: Duration,
    pub max_in_flight: usize,
    pub timeout: Duration,
    pub user_agent: String,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            endpoint: "https://www.wikidata.org/w/api.php".into(),
            language: "en".into(),
            properties: PropertyIds::default(),
            cache_dir: None,
            cache_ttl: Duration::from_secs(24 * 60 * 60),
            max_in_flight: 4,
            timeout: Duration::from_secs(30),
            user_agent: concat!("physquiz/", env!("CARGO_PKG_VERSION"), " (physics quiz generator)").into(),
        }
    }
}

pub struct WikidataClient {
    config: LiveConfig,
    // built on first use: the blocking client must not be created on an
    // async runtime thread
    http: OnceLock<Result<reqwest::blocking::Client, String>>,
    gate: Gate,
}

impl WikidataClient {
    pub fn new(config: LiveConfig) -> Self {
        let gate = Gate::new(config.max_in_flight.max(1));
        WikidataClient { config, http: OnceLock::new(), gate }
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    /// Resolves a label or QID and fetches the formula, its dimension and the
    /// linked identifier items.
    pub fn lookup(&self, query: &str) -> Result<ConceptRecord, LookupError> {
        let query = query.trim();
        if query.is_empty() {
            return Err(LookupError::EmptyQuery);
        }
        let props = &self.config.properties;
        let lang = &self.config.language;
        let concept = if is_qid(query) {
            let entities = self.entities(&[query.to_string()])?;
            entities
                .get(query)
                .and_then(|e| summarize_entity(e, props, lang))
                .filter(|s| !s.defining_formulas.is_empty())
                .ok_or(LookupError::ConceptNotFound)?
        } else {
            let ids = self.search(query)?;
            let entities = self.entities(&ids)?;
            let mut with_formula: Vec<EntitySummary> = ids
                .iter()
                .filter_map(|id| entities.get(id).and_then(|e| summarize_entity(e, props, lang)))
                .filter(|s| !s.defining_formulas.is_empty())
                .collect();
            match with_formula.len() {
                0 => return Err(LookupError::ConceptNotFound),
                1 => with_formula.remove(0),
                _ => {
                    return Err(LookupError::AmbiguousLabel {
                        query: query.to_string(),
                        candidates: with_formula
                            .iter()
                            .map(|s| Candidate { qid: s.qid.clone(), label: s.label.clone().unwrap_or_default() })
                            .collect(),
                    })
                }
            }
        };
        let linked_ids: Vec<String> = concept.identifier_links.iter().filter_map(|l| l.item.clone()).collect();
        let linked: BTreeMap<String, EntitySummary> = self
            .entities(&linked_ids)?
            .values()
            .filter_map(|e| summarize_entity(e, props, lang))
            .map(|s| (s.qid.clone(), s))
            .collect();
        build_record(&concept, &linked, unix_now()).ok_or(LookupError::ConceptNotFound)
    }

    /// Items whose label or alias equals `label`, ignoring case.
    fn search(&self, label: &str) -> Result<Vec<String>, LookupError> {
        let body = self.get_json(&[
            ("action", "wbsearchentities"),
            ("search", label),
            ("language", &self.config.language),
            ("type", "item"),
            ("limit", "20"),
        ])?;
        let wanted = label.to_lowercase();
        let hits = body.get("search").and_then(Value::as_array).cloned().unwrap_or_default();
        Ok(hits
            .iter()
            .filter(|hit| {
                ["/label", "/match/text"]
                    .iter()
                    .any(|p| hit.pointer(p).and_then(Value::as_str).is_some_and(|t| t.to_lowercase() == wanted))
            })
            .filter_map(|hit| hit.get("id").and_then(Value::as_str).map(String::from))
            .collect())
    }

    fn entities(&self, ids: &[String]) -> Result<BTreeMap<String, Value>, LookupError> {
        let mut ids: Vec<&String> = ids.iter().collect();
        ids.sort();
        ids.dedup();
        let mut out = BTreeMap::new();
        for batch in ids.chunks(ENTITY_BATCH) {
            let joined = batch.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("|");
            let body = self.get_json(&[
                ("action", "wbgetentities"),
                ("ids", &joined),
                ("props", "labels|claims"),
                ("languages", &self.config.language),
            ])?;
            if let Some(entities) = body.get("entities").and_then(Value::as_object) {
                out.extend(entities.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
        }
        Ok(out)
    }

    fn get_json(&self, params: &[(&str, &str)]) -> Result<Value, LookupError> {
        let mut params = params.to_vec();
        params.push(("format", "json"));
        let url = reqwest::Url::parse_with_params(&self.config.endpoint, &params)
            .map_err(|e| LookupError::NetworkError(format!("bad endpoint: {e}")))?;
        let cache =
            self.config.cache_dir.as_ref().map(|dir| DiskCache { dir: dir.clone(), ttl: self.config.cache_ttl });

        let text = match cache.as_ref().and_then(|c| c.get(url.as_str(), SystemTime::now())) {
            Some(text) => text,
            None => {
                let text = self.fetch(url.clone())?;
                if let Some(cache) = &cache {
                    if let Err(e) = cache.put(url.as_str(), &text, SystemTime::now()) {
                        tracing::warn!("cannot write response cache: {e}");
                    }
                }
                text
            }
        };
        let body: Value =
            serde_json::from_str(&text).map_err(|e| LookupError::NetworkError(format!("malformed response: {e}")))?;
        if let Some(error) = body.get("error") {
            return Err(LookupError::NetworkError(format!("API error: {error}")));
        }
        Ok(body)
    }

    fn fetch(&self, url: reqwest::Url) -> Result<String, LookupError> {
        let http = self
            .http
            .get_or_init(|| {
                reqwest::blocking::Client::builder()
                    .timeout(self.config.timeout)
                    .user_agent(self.config.user_agent.clone())
                    .build()
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| LookupError::NetworkError(e.clone()))?;
        let _permit = self.gate.acquire();
        tracing::debug!(%url, "wikidata request");
        let response = http.get(url).send().map_err(|e| LookupError::NetworkError(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(LookupError::NetworkError(format!("HTTP {status}")));
        }
        response.text().map_err(|e| LookupError::NetworkError(e.to_string()))
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    released: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(permits: usize) -> Self {
        Gate { free: Mutex::new(permits), released: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.released.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.released.notify_one();
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    url: String,
    fetched_at: u64,
    body: String,
}

/// One file per request URL, named by its SHA-256.
struct DiskCache {
    dir: PathBuf,
    ttl: Duration,
}

impl DiskCache {
    fn path(&self, url: &str) -> PathBuf {
        self.dir.join(format!("{}.json", hex::encode(Sha256::digest(url.as_bytes()))))
    }

    fn get(&self, url: &str, now: SystemTime) -> Option<String> {
        let entry: CacheEntry = serde_json::from_str(&fs::read_to_string(self.path(url)).ok()?).ok()?;
        let now = now.duration_since(UNIX_EPOCH).ok()?.as_secs();
        let fresh = now.saturating_sub(entry.fetched_at) < self.ttl.as_secs();
        (entry.url == url && fresh).then_some(entry.body)
    }

    fn put(&self, url: &str, body: &str, now: SystemTime) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let fetched_at = now.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let entry = CacheEntry { url: url.into(), fetched_at, body: body.into() };
        fs::write(self.path(url), serde_json::to_string(&entry)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn cache_respects_ttl() {
        let dir = std::env::temp_dir().join(format!("physquiz-cache-test-{}", std::process::id()));
        let cache = DiskCache { dir: dir.clone(), ttl: Duration::from_secs(60) };
        let t0 = UNIX_EPOCH + Duration::from_secs(1_000_000);
        assert_eq!(cache.get("u", t0), None);
        cache.put("u", "body", t0).unwrap();
        assert_eq!(cache.get("u", t0 + Duration::from_secs(59)).as_deref(), Some("body"));
        assert_eq!(cache.get("u", t0 + Duration::from_secs(60)), None);
        assert_eq!(cache.get("other", t0), None);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn gate_caps_concurrency() {
        let gate = Arc::new(Gate::new(2));
        let active = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (gate, active, peak) = (gate.clone(), active.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _permit = gate.acquire();
                    let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    active.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
