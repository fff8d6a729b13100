use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("fractional derivative of order {alpha} is singular on a field with nonzero mean")]
    SingularMeanMode { alpha: f64 },

    #[error("regrid would alias: relative tail mass {tail:.3e} above the target Nyquist frequency")]
    Aliasing { tail: f64 },

    #[error("rescaled profile overflows the target box: relative mass {outside:.3e} outside")]
    BoxOverflow { outside: f64 },

    #[error("zero field")]
    ZeroField,

    #[error("tuple {idx:?} is not on the hyperplane (sum = {sum})")]
    OffHyperplane { idx: Vec<i64>, sum: i64 },

    #[error("unsupported arity {0}")]
    Arity(usize),

    #[error("separation violated: |eta|, |lambda| must be at most {rho} |xi|")]
    Separation { rho: f64 },

    #[error("mode budget exceeded: {modes} active modes, limit {limit} for k = {k}")]
    ModeBudget { k: usize, modes: usize, limit: usize },

    #[error("spectrum is not Hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },

    #[error("multilinear form has imaginary residue {residue:.3e}")]
    ImaginaryResidue { residue: f64 },

    #[error("blow-up: sup norm {sup:.3e} exceeded cap {cap:.3e} at t = {t:.6}")]
    BlowUp { t: f64, sup: f64, cap: f64 },

    #[error("box too small: profile value {edge:.3e} at the boundary")]
    BoxTooSmall { edge: f64 },

    #[error("empty sampling plan")]
    EmptyPlan,

    #[error("sampler produced a tuple outside its configuration: {0}")]
    SamplerConfiguration(String),

    #[error("at least {required} time samples are required, got {got}")]
    TooFewSamples { required: usize, got: usize },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
