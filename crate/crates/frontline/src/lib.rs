//! Command line and HTTP front end for `merodyn`.
//!
//! Every job is described by string key/value pairs, whether they come from
//! flags, a `key=value` config file or a query string, and goes through
//! [`config`] to become a typed, validated job.

pub mod cli;
pub mod config;
pub mod report;
pub mod service;
