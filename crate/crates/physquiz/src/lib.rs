//! Standard-library side of physquiz: concept stores (snapshot files and the
//! live Wikidata client), configuration, the HTTP API with its session
//! store, the evaluation harness and the command line front end.
//!
//! The formula engine itself lives in [`physquiz_core`].

#![forbid(unsafe_code)]

pub mod api;
pub mod cli;
pub mod config;
pub mod engine;
pub mod eval;
pub mod live;
pub mod session;
pub mod snapshot;
pub mod store;

pub use physquiz_core as core;
