//! Local system identification inside sparsely interconnected LTI networks.
//!
//! A node observes its own inputs `u`, outputs `y` and (possibly partial)
//! measurements `z` of the signals entering from its neighbors. From those local
//! records this crate recovers the node's impulse response, either by exact least
//! squares when every interconnection signal is measured, or by nuclear-norm
//! programs that split the response into a low-order local part and a low-rank
//! hidden part when some interconnection directions are unobserved. A Ho-Kalman
//! realization then turns the impulse response into a state-space model.
//!
//! Module map:
//! - [`netsim`]: network construction, simulation and ground truth.
//! - [`datamat`]: Hankel, DFT and block-Toeplitz constructions.
//! - [`ident`]: least-squares and robust identification.
//! - [`solver`]: proximal splitting engine for the nuclear-norm programs.
//! - [`realization`]: order selection and Ho-Kalman realization.
//! - [`harness`]: experiment configs, reports and the reproduction suite.

pub mod datamat;
pub mod error;
pub mod harness;
pub mod ident;
pub mod linalg;
pub mod netsim;
pub mod realization;
pub mod solver;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
