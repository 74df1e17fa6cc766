//! Special functions and numerical primitives: Whittaker's parabolic
//! cylinder function, the standard normal distribution, adaptive quadrature,
//! and bracketed root finding.

mod normal;
mod pcf;
mod quad;
mod root;

pub use normal::{normal_cdf, normal_inv, normal_pdf};
pub use pcf::{pcf_d, pcf_d_deriv, PCF_MAX_ABS_Z, PCF_ORDER_MAX, PCF_ORDER_MIN};
pub use quad::integrate;
pub use root::find_root;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    /// Argument lies outside the range over which the implementation is
    /// accuracy-validated.
    #[error("{func}: argument {value} outside supported range {range}")]
    Range {
        func: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("{func}: {what}")]
    Domain { func: &'static str, what: String },
    /// Quadrature failed to hit the requested tolerance within the
    /// subdivision budget.
    #[error("integration did not converge: error estimate {estimate:.3e} > tolerance {tolerance:.3e} after {subdivisions} subdivisions")]
    NoConvergence {
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },
    #[error("find_root: f({lo}) = {flo:.6e} and f({hi}) = {fhi:.6e} do not bracket a root")]
    NoBracket { lo: f64, hi: f64, flo: f64, fhi: f64 },
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// Tolerance budget for one-dimensional adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions == 0 {
            return Err(SpecFunError::Domain {
                func: "QuadratureSpec::new",
                what: format!(
                    "tolerances must be positive and max_subdivisions >= 1, got ({abs_tol}, {rel_tol}, {max_subdivisions})"
                ),
            });
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

impl Default for QuadratureSpec {
    /// Tight default used for density normalization and CDF work.
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_subdivisions: 400,
        }
    }
}
