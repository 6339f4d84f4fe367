use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    #[error("vertex {vertex} out of range for a graph with {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has {num_vertices} vertices, above the dense cap of {cap} (set CTQW_MAX_N to raise it)")]
    TooLarge { num_vertices: usize, cap: usize },

    #[error("symmetric eigensolver did not converge on a {0}x{0} matrix")]
    EigenFailure(usize),

    #[error("λ = {lambda} lies within the pole guard of -γφ = {pole}")]
    Pole { lambda: f64, pole: f64 },

    #[error("root isolation failed on ({lo}, {hi}): {reason}")]
    Bracketing { lo: f64, hi: f64, reason: String },

    #[error("framework inapplicable: {0}")]
    FrameworkInapplicable(String),

    #[error("kernel vector residual {residual:e} exceeds tolerance")]
    NotInKernel { residual: f64 },

    #[error("trace has no local maximum in (0, {t_max}]")]
    MonotoneTrace { t_max: f64 },

    #[error("marked set does not match the canonical Johnson pair")]
    MarkedSetMismatch,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input
    /// or of the framework's applicability.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure(_)
                | Error::Pole { .. }
                | Error::Bracketing { .. }
                | Error::NotInKernel { .. }
                | Error::MonotoneTrace { .. }
        )
    }
}
