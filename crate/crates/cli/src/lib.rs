//! Command-line front end: the theory language reader and the `lawvere`
//! subcommands.

pub mod app;
pub mod dsl;
