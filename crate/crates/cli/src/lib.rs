//! Library side of the `loopsoup` binary: configuration parsing, subcommand
//! dispatch and artifact writing.

pub mod commands;
pub mod config;
pub mod output;

/// Exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const RUNTIME: i32 = 3;
    pub const THRESHOLD: i32 = 4;
}
