use thiserror::Error;

/// Error type shared by every stage of the pipeline.
///
/// Variants are grouped by the stage that raised them so the CLI can map
/// them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("non-binary outcome value `{value}` in column `{column}` at row {row}")]
    NonBinaryOutcome {
        column: String,
        row: usize,
        value: String,
    },

    #[error("non-positive or non-finite weight `{value}` at row {row}")]
    InvalidWeight { row: usize, value: String },

    #[error("empty data file")]
    EmptyFile,

    #[error("constant column `{0}` in design matrix")]
    ConstantColumn(String),

    #[error("level `{level}` of `{variable}` not in the level registry")]
    UnseenLevel { variable: String, level: String },

    #[error("degenerate inference: {0}")]
    DegenerateInference(String),

    #[error("quasi-separation detected: max |xb| = {max_index:.1} after {iterations} iterations")]
    QuasiSeparation { max_index: f64, iterations: usize },

    #[error("collinear design: columns {}", .0.join(", "))]
    CollinearDesign(Vec<String>),

    #[error("singular hessian")]
    SingularHessian,

    #[error("model did not converge (gradient norm {0:e})")]
    NotConverged(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("decomposition error: {0}")]
    Decomposition(String),

    #[error("bootstrap failed: {failed} of {reps} replicates could not be fitted")]
    BootstrapFailure { failed: usize, reps: usize },

    #[error("instance too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Which stage an error belongs to. Used for exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Estimation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            Config(_) => ErrorKind::Config,
            Data(_) | MissingColumn(_) | NonBinaryOutcome { .. } | InvalidWeight { .. }
            | EmptyFile | ConstantColumn(_) | UnseenLevel { .. } | Io(_) | Csv(_) => {
                ErrorKind::Data
            }
            DegenerateInference(_) | QuasiSeparation { .. } | CollinearDesign(_)
            | SingularHessian | NotConverged(_) | DimensionMismatch(_) | Decomposition(_)
            | BootstrapFailure { .. } | TooLarge(_) => ErrorKind::Estimation,
        }
    }

    /// Name of the module that raised the error, for structured CLI messages.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            Config(_) => "cli",
            Data(_) | MissingColumn(_) | NonBinaryOutcome { .. } | InvalidWeight { .. }
            | EmptyFile | ConstantColumn(_) | UnseenLevel { .. } | Io(_) | Csv(_) => "dataio",
            DegenerateInference(_) => "dataio",
            QuasiSeparation { .. } | CollinearDesign(_) | SingularHessian | NotConverged(_) => {
                "probit"
            }
            DimensionMismatch(_) | Decomposition(_) | BootstrapFailure { .. } => "decomp",
            TooLarge(_) => "synth",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
