//! Special functions, root solving and quadrature used by the channel model
//! and the detectors.
//!
//! Everything in here is a pure function of its arguments.

mod cubic;
mod erfcx;
mod poisson;
mod quadrature;

pub use cubic::{solve_cubic_from_symmetric, CubicRoots};
pub use erfcx::{erfcx_complex, w_stable, w_stable_scaled};
pub use poisson::{ln_poisson_pmf, poisson_cdf, poisson_pmf, poisson_tail, poisson_tail_increment};
pub use quadrature::{
    integrate_adaptive, integrate_transient, transient_breakpoints, QuadratureEstimate,
    MAX_INTERVALS,
};

use num_complex::Complex64;
use thiserror::Error;

/// Complex numbers used throughout (roots of the reaction cubic, `W` terms).
pub type ComplexValue = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("erfcx argument {0} outside the supported domain |z| <= 1e6")]
    ArgumentOutOfRange(ComplexValue),
    #[error("erfcx({0}) overflows f64")]
    Overflow(ComplexValue),
    #[error("cubic input is not finite: ({0}, {1}, {2})")]
    NonFiniteInput(f64, f64, f64),
    #[error("degenerate cubic roots (min separation {min_separation:.3e}): {roots:?}")]
    DegenerateRoots {
        roots: [ComplexValue; 3],
        min_separation: f64,
    },
    #[error("quadrature did not converge after {intervals} subintervals (estimate {estimate:.6e}, error {error:.3e})")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
}
