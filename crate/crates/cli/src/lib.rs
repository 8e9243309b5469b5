//! Library surface of the `hiso` command-line tool: the expression grammar,
//! report shapes, and the subcommand drivers.

pub mod commands;
pub mod expr;
pub mod report;
