//! Library surface of the driver: config parsing, suite execution, and
//! report rendering. The binary in `main.rs` is a thin wrapper over this.

pub mod config;
pub mod emit;
pub mod run;
