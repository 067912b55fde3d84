//! Command-line tools and the local HTTP session service.

pub mod api;
pub mod commands;
