pub mod config;
pub mod engine;
pub mod evalkit;
pub mod fixtures;
pub mod query;
pub mod relations;
pub mod runtime;
pub mod snapshot;
