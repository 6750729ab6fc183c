//! Configuration. Each source produces a [`Layer`] of optional values;
//! layers are applied over the defaults in the order config file,
//! `PHYSQUIZ_*` environment variables, command line flags, so later
//! sources win.
//!
//! ```toml
//! fixture = "bundled"          # or a path to a snapshot file
//! live = false                 # fall back to Wikidata for unknown concepts
//! range = "1..10"
//! tolerance = "1/100"
//! bind = "127.0.0.1:8080"
//! session_ttl_secs = 3600
//! heuristic_derivatives = false
//! template = "question_template.txt"
//!
//! [wikidata]
//! endpoint = "https://www.wikidata.org/w/api.php"
//! language = "en"
//! cache_dir = "/var/cache/physquiz"
//! cache_ttl_secs = 86400
//! max_in_flight = 4
//! timeout_secs = 30
//!
//! [wikidata.properties]
//! defining_formula = "P2534"
//! isq_dimension = "P4020"
//! has_part = "P527"
//! in_defining_formula = "P7235"
//! symbol_represents = "P9758"
//! ```

use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use num_rational::BigRational;
use physquiz_core::grader::parse_value;
use physquiz_core::quiz::DEFAULT_RANGE;
use serde::{Deserialize, Serialize};

use crate::live::{LiveConfig, PropertyIds};

pub const ENV_PREFIX: &str = "PHYSQUIZ_";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config file {path}: {message}")]
    File { path: PathBuf, message: String },
    #[error("invalid value for {key}: {message}")]
    Value { key: String, message: String },
}

/// Where concept records come from when no live lookup is made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixtureSource {
    Bundled,
    Path(PathBuf),
}

impl FromStr for FixtureSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" => Err("empty fixture".into()),
            "bundled" => Ok(FixtureSource::Bundled),
            path => Ok(FixtureSource::Path(path.into())),
        }
    }
}

impl fmt::Display for FixtureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixtureSource::Bundled => f.write_str("bundled"),
            FixtureSource::Path(p) => write!(f, "{}", p.display()),
        }
    }
}

/// An inclusive integer range written `lo..hi`, `lo..=hi` or `lo,hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValueRange {
    pub low: i64,
    pub high: i64,
}

impl ValueRange {
    pub fn inclusive(&self) -> RangeInclusive<i64> {
        self.low..=self.high
    }
}

impl FromStr for ValueRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (low, high) = s
            .split_once("..=")
            .or_else(|| s.split_once(".."))
            .or_else(|| s.split_once(','))
            .ok_or_else(|| format!("`{s}` is not a range like 1..10"))?;
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("`{}`: {e}", t.trim()));
        let (low, high) = (parse(low)?, parse(high)?);
        if low > high {
            return Err(format!("range {low}..{high} is empty"));
        }
        Ok(ValueRange { low, high })
    }
}

impl fmt::Display for ValueRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.low, self.high)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// `None` means live lookups only.
    pub fixture: Option<FixtureSource>,
    pub live: bool,
    pub range: ValueRange,
    /// Kept as text so it prints the way it was written.
    pub tolerance: String,
    pub bind: String,
    pub session_ttl: Duration,
    pub heuristic_derivatives: bool,
    pub template: Option<PathBuf>,
    pub wikidata: WikidataConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WikidataConfig {
    pub endpoint: String,
    pub language: String,
    pub cache_dir: Option<PathBuf>,
    pub cache_ttl: Duration,
    pub max_in_flight: usize,
    pub timeout: Duration,
    pub properties: PropertyIds,
}

impl Default for Config {
    fn default() -> Self {
        let live = LiveConfig::default();
        Config {
            fixture: Some(FixtureSource::Bundled),
            live: false,
            range: ValueRange { low: *DEFAULT_RANGE.start(), high: *DEFAULT_RANGE.end() },
            tolerance: "1/100".into(),
            bind: "127.0.0.1:8080".into(),
            session_ttl: Duration::from_secs(60 * 60),
            heuristic_derivatives: false,
            template: None,
            wikidata: WikidataConfig {
                endpoint: live.endpoint,
                language: live.language,
                cache_dir: None,
                cache_ttl: live.cache_ttl,
                max_in_flight: live.max_in_flight,
                timeout: live.timeout,
                properties: live.properties,
            },
        }
    }
}

impl Config {
    pub fn tolerance(&self) -> Result<BigRational, ConfigError> {
        parse_value(&self.tolerance)
            .map_err(|e| ConfigError::Value { key: "tolerance".into(), message: e.to_string() })
            .and_then(|t| {
                if t < BigRational::from_integer(0.into()) {
                    Err(ConfigError::Value { key: "tolerance".into(), message: "must not be negative".into() })
                } else {
                    Ok(t)
                }
            })
    }

    pub fn live_config(&self) -> LiveConfig {
        let w = &self.wikidata;
        LiveConfig {
            endpoint: w.endpoint.clone(),
            language: w.language.clone(),
            properties: w.properties.clone(),
            cache_dir: w.cache_dir.clone(),
            cache_ttl: w.cache_ttl,
            max_in_flight: w.max_in_flight,
            timeout: w.timeout,
            ..LiveConfig::default()
        }
    }

    pub fn apply(&mut self, layer: &Layer) -> Result<(), ConfigError> {
        let value_error = |key: &str, message: String| ConfigError::Value { key: key.into(), message };
        if let Some(f) = &layer.fixture {
            self.fixture = match f.trim() {
                "none" => None,
                other => Some(other.parse().map_err(|m| value_error("fixture", m))?),
            };
        }
        if let Some(live) = layer.live {
            self.live = live;
        }
        if let Some(r) = &layer.range {
            self.range = r.parse().map_err(|m| value_error("range", m))?;
        }
        if let Some(t) = &layer.tolerance {
            self.tolerance = t.clone();
        }
        if let Some(b) = &layer.bind {
            self.bind = b.clone();
        }
        if let Some(s) = layer.session_ttl_secs {
            self.session_ttl = Duration::from_secs(s);
        }
        if let Some(h) = layer.heuristic_derivatives {
            self.heuristic_derivatives = h;
        }
        if let Some(t) = &layer.template {
            self.template = Some(t.clone());
        }
        if let Some(w) = &layer.wikidata {
            let target = &mut self.wikidata;
            if let Some(e) = &w.endpoint {
                target.endpoint = e.clone();
            }
            if let Some(l) = &w.language {
                target.language = l.clone();
            }
            if let Some(c) = &w.cache_dir {
                target.cache_dir = Some(c.clone());
            }
            if let Some(s) = w.cache_ttl_secs {
                target.cache_ttl = Duration::from_secs(s);
            }
            if let Some(m) = w.max_in_flight {
                if m == 0 {
                    return Err(value_error("max_in_flight", "must be at least 1".into()));
                }
                target.max_in_flight = m;
            }
            if let Some(s) = w.timeout_secs {
                target.timeout = Duration::from_secs(s);
            }
            if let Some(p) = &w.properties {
                let props = &mut target.properties;
                for (slot, value) in [
                    (&mut props.defining_formula, &p.defining_formula),
                    (&mut props.isq_dimension, &p.isq_dimension),
                    (&mut props.has_part, &p.has_part),
                    (&mut props.in_defining_formula, &p.in_defining_formula),
                    (&mut props.symbol_represents, &p.symbol_represents),
                ] {
                    if let Some(v) = value {
                        *slot = v.clone();
                    }
                }
            }
        }
        Ok(())
    }

    /// Defaults, then `file`, then the environment, then `flags`.
    pub fn resolve(file: Option<&Path>, env: &Layer, flags: &Layer) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        if let Some(path) = file {
            config.apply(&Layer::from_file(path)?)?;
        }
        config.apply(env)?;
        config.apply(flags)?;
        config.tolerance()?;
        Ok(config)
    }
}

/// Optional settings from one source.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub fixture: Option<String>,
    pub live: Option<bool>,
    pub range: Option<String>,
    pub tolerance: Option<String>,
    pub bind: Option<String>,
    pub session_ttl_secs: Option<u64>,
    pub heuristic_derivatives: Option<bool>,
    pub template: Option<PathBuf>,
    pub wikidata: Option<WikidataLayer>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WikidataLayer {
    pub endpoint: Option<String>,
    pub language: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub cache_ttl_secs: Option<u64>,
    pub max_in_flight: Option<usize>,
    pub timeout_secs: Option<u64>,
    pub properties: Option<PropertiesLayer>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertiesLayer {
    pub defining_formula: Option<String>,
    pub isq_dimension: Option<String>,
    pub has_part: Option<String>,
    pub in_defining_formula: Option<String>,
    pub symbol_represents: Option<String>,
}

impl Layer {
    pub fn from_toml(text: &str) -> Result<Layer, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_file(path: &Path) -> Result<Layer, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Layer::from_toml(&text).map_err(|message| ConfigError::File { path: path.into(), message })
    }

    /// Reads `PHYSQUIZ_*` variables through `var`, so tests need not touch
    /// the process environment.
    pub fn from_env(var: impl Fn(&str) -> Option<String>) -> Result<Layer, ConfigError> {
        let get = |key: &str| var(&format!("{ENV_PREFIX}{key}")).filter(|v| !v.is_empty());
        let parsed = |key: &str| -> Result<Option<u64>, ConfigError> {
            get(key)
                .map(|v| v.trim().parse::<u64>())
                .transpose()
                .map_err(|e| ConfigError::Value { key: format!("{ENV_PREFIX}{key}"), message: e.to_string() })
        };
        let flag = |key: &str| -> Result<Option<bool>, ConfigError> {
            get(key)
                .map(|v| match v.trim().to_ascii_lowercase().as_str() {
                    "1" | "true" | "yes" | "on" => Ok(true),
                    "0" | "false" | "no" | "off" => Ok(false),
                    other => Err(ConfigError::Value {
                        key: format!("{ENV_PREFIX}{key}"),
                        message: format!("`{other}` is not a boolean"),
                    }),
                })
                .transpose()
        };
        let properties = PropertiesLayer {
            defining_formula: get("PROP_DEFINING_FORMULA"),
            isq_dimension: get("PROP_ISQ_DIMENSION"),
            has_part: get("PROP_HAS_PART"),
            in_defining_formula: get("PROP_IN_DEFINING_FORMULA"),
            symbol_represents: get("PROP_SYMBOL_REPRESENTS"),
        };
        let wikidata = WikidataLayer {
            endpoint: get("WIKIDATA_ENDPOINT"),
            language: get("WIKIDATA_LANGUAGE"),
            cache_dir: get("CACHE_DIR").map(PathBuf::from),
            cache_ttl_secs: parsed("CACHE_TTL_SECS")?,
            max_in_flight: parsed("MAX_IN_FLIGHT")?.map(|n| n as usize),
            timeout_secs: parsed("TIMEOUT_SECS")?,
            properties: (properties != PropertiesLayer::default()).then_some(properties),
        };
        Ok(Layer {
            fixture: get("FIXTURE"),
            live: flag("LIVE")?,
            range: get("RANGE"),
            tolerance: get("TOLERANCE"),
            bind: get("BIND"),
            session_ttl_secs: parsed("SESSION_TTL_SECS")?,
            heuristic_derivatives: flag("HEURISTIC_DERIVATIVES")?,
            template: get("TEMPLATE").map(PathBuf::from),
            wikidata: (wikidata != WikidataLayer::default()).then_some(wikidata),
        })
    }
}
