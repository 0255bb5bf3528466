//! Command-line front end for the transmutation-operator toolkit.

pub mod bench;
pub mod config;
pub mod expr;
pub mod tasks;
