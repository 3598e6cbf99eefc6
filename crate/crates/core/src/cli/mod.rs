//! Configuration, orchestration and report rendering behind the binary.

mod config;
mod report;
mod validate;

pub use config::{ModelSection, OutputFormat, OutputSection, RunConfig};
pub use report::{
    decomposition_table, format_cell, format_contribution, format_estimate, format_percent, marginal_effects_table, run,
    summary_table, OutcomeEffects, Report, TextTable,
};
pub use validate::{validate, Diagnostic};

use crate::error::{Error, ErrorKind};

/// Process exit status for an error: 2 configuration, 3 data, 4 estimation.
pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Estimation => 4,
    }
}

/// One-line structured error message naming the failing module.
pub fn error_message(err: &Error) -> String {
    let kind = match err.kind() {
        ErrorKind::Config => "config",
        ErrorKind::Data => "data",
        ErrorKind::Estimation => "estimation",
    };
    format!("error[{kind}] in {}: {err}", err.module())
}
