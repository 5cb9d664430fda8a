use core::fmt;

use crate::scenario::SpreadingFactor;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Spreading factor index outside 7..=12.
    InvalidSpreadingFactor(u8),
    /// Coding-rate denominator offset outside 1..=4.
    InvalidCodingRate(u8),
    /// A scenario field violates its domain.
    InvalidParameter { name: &'static str, value: f64 },
    /// The link budget puts an SF boundary outside the cell.
    CellTooLarge { sf: SpreadingFactor, threshold_m: f64, radius_m: f64 },
    /// Closed-form primitive requested for a path-loss exponent other than 4.
    UnsupportedExponent(f64),
    /// Adaptive quadrature ran out of subdivisions.
    QuadratureNonConvergence { estimate: f64, residual: f64, subdivisions: usize },
    /// A distance outside `[0, R]` reached SF assignment.
    DistanceOutOfCell { r: f64, radius_m: f64 },
    /// Conditioning on device counts that cannot occur.
    InvalidCount { j: usize, nodes: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpreadingFactor(m) => write!(f, "spreading factor {m} is outside 7..=12"),
            Error::InvalidCodingRate(n) => {
                write!(f, "coding rate 4/(4+{n}) is invalid, n must be in 1..=4")
            }
            Error::InvalidParameter { name, value } => {
                write!(f, "parameter `{name}` has invalid value {value}")
            }
            Error::CellTooLarge { sf, threshold_m, radius_m } => write!(
                f,
                "distance threshold of {sf} is {threshold_m:.3} m, beyond the cell radius {radius_m} m"
            ),
            Error::UnsupportedExponent(alpha) => {
                write!(f, "closed-form primitive needs alpha = 4, got {alpha}")
            }
            Error::QuadratureNonConvergence { estimate, residual, subdivisions } => write!(
                f,
                "quadrature did not converge after {subdivisions} subdivisions \
                 (estimate {estimate:e}, residual {residual:e})"
            ),
            Error::DistanceOutOfCell { r, radius_m } => {
                write!(f, "distance {r} m lies outside the cell of radius {radius_m} m")
            }
            Error::InvalidCount { j, nodes } => {
                write!(f, "cannot condition on {j} devices out of {nodes}")
            }
        }
    }
}

impl core::error::Error for Error {}
