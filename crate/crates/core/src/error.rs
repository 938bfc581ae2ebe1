use thiserror::Error;

/// Errors produced by the solver stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("integration did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Convergence { achieved: f64, requested: f64 },

    #[error("located only {found} of {requested} eigenvalues in the scan window")]
    IncompleteSpectrum {
        found: usize,
        requested: usize,
        partial: Vec<f64>,
    },

    #[error("underdetermined system: {unknowns} unknowns but only {rows} equations")]
    Underdetermined { unknowns: usize, rows: usize },

    #[error("rank-deficient least-squares system (condition number {cond:.3e})")]
    SingularSystem { cond: f64 },

    #[error("condition number {cond:.3e} already exceeds 1e6 at the minimal system size")]
    IllConditionedInput { cond: f64 },

    #[error("reconstruction quality: {0}")]
    ReconstructionQuality(String),

    #[error("denominator 2*beta0 + 1 vanishes near x = {x:.6}")]
    DivisionGuard { x: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Tag an error with the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
