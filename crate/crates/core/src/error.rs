use thiserror::Error;

/// Errors raised anywhere in the construction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands carry different variable counts, base points, truncation degrees or series kinds.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    /// Division by a series whose constant term vanishes.
    #[error("singular division: constant term is zero")]
    SingularDivision,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input error: {0}")]
    Input(String),

    /// The principal coefficient 1 - |grad psi|^2 vanishes at the base point.
    #[error("characteristic surface: principal coefficient at base point is {value}")]
    Characteristic { value: f64 },

    /// A compatibility condition between the surface, the nonlinearity and `a` fails.
    #[error("{condition} condition fails: residual coefficient {value} at exponent {exponent:?}")]
    Condition {
        condition: &'static str,
        exponent: Vec<u32>,
        value: String,
    },

    #[error("time-reversal condition fails: f2 contains the odd-in-tau monomial {monomial}")]
    TimeReversal { monomial: String },

    #[error("branch selection failed: {0}")]
    Branch(String),

    #[error("no real root: {0}")]
    NoRealRoot(String),

    /// A slice evaluator asked for a coefficient at or above the order it is computing.
    #[error("triangularity violation: order {order} requested coefficient {requested}")]
    Triangularity { order: usize, requested: usize },

    /// The constructed solution does not pass substitution.
    #[error("residual check failed: {0}")]
    Residual(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 schema, 3 condition failure, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Json(_) | Error::Input(_) | Error::Io(_) | Error::Csv(_) => 2,
            Error::Characteristic { .. }
            | Error::Condition { .. }
            | Error::TimeReversal { .. }
            | Error::Branch(_)
            | Error::NoRealRoot(_) => 3,
            _ => 4,
        }
    }

    /// Short machine-readable tag for failure reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::SingularDivision => "singular_division",
            Error::Domain(_) => "domain",
            Error::Input(_) => "input",
            Error::Characteristic { .. } => "characteristic_surface",
            Error::Condition { .. } => "condition",
            Error::TimeReversal { .. } => "time_reversal",
            Error::Branch(_) => "branch_selection",
            Error::NoRealRoot(_) => "no_real_root",
            Error::Triangularity { .. } => "triangularity",
            Error::Residual(_) => "residual",
            Error::Internal(_) => "internal",
            Error::Schema(_) => "schema",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
