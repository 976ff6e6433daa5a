//! Structured matrices built from block sequences and measured trajectories:
//! block-Hankel liftings, frequency slices, block-Toeplitz regressors and
//! persistence-of-excitation diagnostics.

mod blocks;
mod dft;
mod hankel;
mod regressors;

pub use blocks::BlockSequence;
pub use dft::{dft_adjoint, dft_slices, FrequencyGrid, FrequencySlices};
pub use hankel::{hankel, hankel_adjoint, hankel_adjoint_with, hankel_weights, hankel_with, HankelShape};
pub use regressors::{block_toeplitz, build_regressors, pe_check, PeDiagnostics, RegressorSet};
