//! Command-line driver for `glassorder-core`: TOML configuration, JSON and
//! CSV outputs, Monte Carlo checkpoint files and a rayon executor.

pub mod commands;
pub mod config;
pub mod output;
pub mod pool;

pub use config::{Config, ConfigError};
pub use pool::Rayon;
