use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::BlockSequence;
use crate::error::{Error, Result};

/// Evaluation frequencies on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    /// `omega_k = 2 pi k / K`, `k = 0 .. K-1`.
    pub fn uniform(points: usize) -> Self {
        Self {
            omegas: (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect(),
        }
    }

    pub fn custom(omegas: Vec<f64>) -> Self {
        Self { omegas }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// Complex matrices `G(omega_k) = sum_t X_t exp(-j omega_k t)`.
#[derive(Clone, Debug)]
pub struct FrequencySlices {
    pub omegas: Vec<f64>,
    pub slices: Vec<DMatrix<Complex64>>,
}

impl FrequencySlices {
    /// Largest `|G(2 pi - w) - conj(G(w))|_F` over pairs of a uniform full-circle grid.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let k = self.slices.len();
        (1..k)
            .map(|i| (&self.slices[k - i] - self.slices[i].conjugate()).norm())
            .fold((self.slices[0].map(|z| z.im)).norm(), f64::max)
    }
}

pub fn dft_slices(x: &BlockSequence, grid: &FrequencyGrid) -> Result<FrequencySlices> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty frequency grid".into()));
    }
    let (q, c) = x.block_shape();
    let slices = grid
        .omegas()
        .iter()
        .map(|&w| {
            let mut g = DMatrix::<Complex64>::zeros(q, c);
            for (t, block) in x.blocks().iter().enumerate() {
                let phase = Complex64::from_polar(1.0, -w * t as f64);
                g.zip_apply(block, |acc, v| *acc += phase * v);
            }
            g
        })
        .collect();
    Ok(FrequencySlices {
        omegas: grid.omegas().to_vec(),
        slices,
    })
}

/// Adjoint of [`dft_slices`] for the inner product `sum_k Re tr(A_k^H B_k)`:
/// `X_t = Re sum_k exp(j omega_k t) G_k`.
pub fn dft_adjoint(
    slices: &FrequencySlices,
    (q, c): (usize, usize),
    last_index: usize,
) -> Result<BlockSequence> {
    if slices.slices.iter().any(|g| g.shape() != (q, c)) {
        return Err(Error::Dimension("frequency slice shape mismatch".into()));
    }
    let mut out = BlockSequence::zeros(q, c, last_index + 1);
    for (g, &w) in slices.slices.iter().zip(&slices.omegas) {
        for t in 0..=last_index {
            let phase = Complex64::from_polar(1.0, w * t as f64);
            out.block_mut(t).zip_apply(g, |acc, z| *acc += (phase * z).re);
        }
    }
    Ok(out)
}
