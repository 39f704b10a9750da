use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}` = {value}: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not converge after {subdivisions} subdivisions (best estimate {best}, error estimate {abs_error})")]
    QuadratureNonConvergence {
        best: f64,
        abs_error: f64,
        subdivisions: usize,
    },

    #[error("degenerate constraint system: {what} = {denominator:e} at parameter {parameter}")]
    DegenerateConstraint {
        what: &'static str,
        denominator: f64,
        parameter: f64,
    },

    #[error("pointer is biased: moment `{moment}` has residual {residual:e} (tolerance {tolerance:e})")]
    BiasedPointer {
        moment: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("no minimax bracket found on ({lo}, {hi}); grid trace: {trace:?}")]
    NoBracket {
        lo: f64,
        hi: f64,
        trace: Vec<(f64, f64)>,
    },

    #[error("joint measurement bound violated: sigma*sigma_tilde = {product} < {bound}")]
    HeisenbergViolation { product: f64, bound: f64 },

    #[error("invalid Bloch vector ({px}, {py}, {pz}): norm {norm} exceeds 1")]
    InvalidBlochVector { px: f64, py: f64, pz: f64, norm: f64 },

    #[error("filter step failed to preserve positivity after {retries} halvings at t = {time}")]
    PositivityLoss { time: f64, retries: u32 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name,
            value,
            reason: "must be >= 0",
        })
    }
}
