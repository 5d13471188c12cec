//! Convergence studies for complex-length finite elements: configuration,
//! sweep execution, CSV output and baseline comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigOverrides, ExperimentConfig, ExperimentId, Ordering, SubdomainConfig};
pub use experiments::{run_experiment, ConvergenceRecord};
pub use report::{compare_baseline, emit_csv, threshold_checks, Check, TargetRow};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),
    #[error("{point}: {source}")]
    Solver {
        point: String,
        #[source]
        source: cfem_core::CfemError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
