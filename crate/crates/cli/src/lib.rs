//! Query language and commands of the `ajar` executable.

pub mod commands;
pub mod query;
pub mod semirings;
