//! Declarative scenario files, the reproduction suite, reports and
//! chart emission.
//!
//! A scenario file encodes one computation: the ring and module
//! presentations, resolutions, actions or differential data it needs,
//! a window, and an `expect` block pinning the result. The runner
//! dispatches to the engines and diffs computed output against the
//! expectation; the suite runner executes every bundled scenario.

pub mod build;
pub mod chart;
pub(crate) mod expr;
mod model;
mod parse;
mod print;
pub mod run;
pub mod suite;

pub use model::*;
pub use parse::parse_scenario;
pub use print::print_scenario;
pub use run::{run_scenario, Report};
pub use suite::{bundled_scenario, reproduce_all, SuiteReport, BUNDLED};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("engine error: {0}")]
    Engine(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ScenarioError {
    fn from(e: std::io::Error) -> Self {
        ScenarioError::Io(e.to_string())
    }
}
