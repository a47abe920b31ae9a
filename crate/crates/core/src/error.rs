use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("tolerance not met for {what}: estimate {estimate:e}, target {target:e}")]
    ToleranceNotMet {
        what: String,
        estimate: f64,
        target: f64,
    },

    #[error("(a, b, lambda) does not give positive coefficients, so the law is not in the fGIG family")]
    NotInFgigFamily,

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("probe {probe} lies within {distance:e} of the image curve")]
    ProbeTooClose { probe: String, distance: f64 },

    #[error("image curve under-resolved: argument jump {jump:.3} rad at sample {index}")]
    UnderResolved { index: usize, jump: f64 },

    #[error("decay assumption not certified: {0}")]
    DecayNotCertified(String),

    #[error("exact path unavailable: {0}")]
    ExactUnavailable(String),

    #[error("outside proven regime: {0}")]
    OutsideRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
