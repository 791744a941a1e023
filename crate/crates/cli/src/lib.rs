//! Driver layer for `nodal`: argument resolution, CSV tables, run manifests.
//!
//! Every table-producing command resolves its flags (command line over config file over
//! defaults) into a plain parameter struct. That struct is what the manifest records and
//! what `replay` feeds back in, so a manifest fully determines the CSV bytes.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod exit;
pub mod grid;
pub mod manifest;
pub mod table;

pub use exit::{CliError, Outcome};
