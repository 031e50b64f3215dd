//! Command line orchestration of the redesign workflow and the local rating
//! API.

pub mod artifacts;
pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod server;
pub mod synth;

pub use config::Config;
pub use pipeline::{Stage, Workspace};
