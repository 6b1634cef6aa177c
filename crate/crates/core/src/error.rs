use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("quadrature did not converge within {max_depth} subdivisions on [{a}, {b}]")]
    Convergence { a: f64, b: f64, max_depth: u32 },

    #[error("leading coefficient is zero; use the lower-degree solver")]
    DegenerateDegree,

    #[error("aperture too small for a first null: 1.22*lambda/D = {ratio}")]
    NoNull { ratio: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(
        "beam footprint is unbounded: incidence {theta_i} rad + half beamwidth {half_beamwidth} rad reaches grazing"
    )]
    FootprintUnbounded { theta_i: f64, half_beamwidth: f64 },

    #[error("no reflection unit is illuminated")]
    EmptyIllumination,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
