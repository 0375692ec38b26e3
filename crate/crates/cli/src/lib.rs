//! Command-line front end and file formats.

pub mod commands;
pub mod error;
pub mod format;
pub mod sexpr;
