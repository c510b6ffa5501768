//! Experiment runner for the `rmtlab` library: figure data, entanglement
//! tables, δ-fits and the acceptance checks, written as CSV and JSON.

pub mod analysis;
pub mod checks;
pub mod config;
pub mod experiments;
pub mod output;
pub mod source;

pub use config::{Experiment, ExperimentConfig, OperatorFormat};
pub use experiments::{run, AcceptanceFailure};

/// Process exit code for a failed run.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<AcceptanceFailure>().is_some() {
        return 3;
    }
    let numerical = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<rmtlab::Error>(),
            Some(rmtlab::Error::NotUnitary { .. } | rmtlab::Error::ConvergenceFailure(_))
        )
    });
    if numerical {
        2
    } else {
        1
    }
}
