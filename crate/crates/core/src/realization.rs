//! Order selection and Ho-Kalman realization of identified impulse responses.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::datamat::{hankel_with, BlockSequence, HankelShape};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{eigenvalues, pinv, spectral_radius, svd, PINV_TOL, RANK_TOL};
use crate::netsim::{matrix_from_rows, matrix_to_rows};

/// Default singular-value gap that counts as an order boundary.
pub const DEFAULT_GAP_RATIO: f64 = 10.0;

#[derive(Clone, Debug, Serialize)]
pub struct OrderEstimate {
    pub order: usize,
    pub singular_values: Vec<f64>,
    /// False when no consecutive ratio exceeded the gap threshold; `order` is then
    /// the numerical rank.
    pub confident: bool,
}

/// Picks the largest `n` with `sigma_n / sigma_{n+1} > gap_ratio` among the Hankel
/// singular values of `s`.
///
/// Values below `RANK_TOL * sigma_1` are treated as zero, so round-off tails of
/// exact data cannot produce spurious gaps.
pub fn estimate_order(s: &BlockSequence, gap_ratio: f64) -> Result<OrderEstimate> {
    if !(gap_ratio > 1.0) {
        return Err(Error::InvalidArgument(format!("gap ratio must exceed 1, got {gap_ratio}")));
    }
    if s.last_index() == 0 {
        return Ok(OrderEstimate { order: 0, singular_values: Vec::new(), confident: true });
    }
    let sv = crate::linalg::singular_values(&hankel_with(s, HankelShape::near_square(s.last_index())?)?);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(OrderEstimate { order: 0, singular_values: sv, confident: true });
    }
    let cutoff = RANK_TOL * top;
    let rank = sv.iter().take_while(|&&v| v > cutoff).count();
    let mut order = None;
    // a full-rank lifting has no sigma_{n+1} and therefore no boundary at its end
    for n in 1..=rank.min(sv.len() - 1) {
        let next = sv[n];
        if next <= cutoff || sv[n - 1] / next > gap_ratio {
            order = Some(n);
        }
    }
    Ok(OrderEstimate {
        order: order.unwrap_or(rank),
        confident: order.is_some(),
        singular_values: sv,
    })
}

/// State-space model `x+ = A x + B_ext v`, `y = C x + D_ext v`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizedModel {
    pub a: DMatrix<f64>,
    pub b_ext: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d_ext: DMatrix<f64>,
    /// Markov-parameter fit against the sequence it was realized from.
    pub fit_error: f64,
}

impl RealizedModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.order() == 0 {
            Vec::new()
        } else {
            eigenvalues(&self.a)
        }
    }

    pub fn is_stable(&self) -> bool {
        self.order() == 0 || spectral_radius(&self.a) < 1.0
    }

    /// `[D_ext, C B_ext, C A B_ext, ...]` up to lag `taps`.
    pub fn markov(&self, taps: usize) -> BlockSequence {
        let mut blocks = Vec::with_capacity(taps + 1);
        blocks.push(self.d_ext.clone());
        let mut ab = self.b_ext.clone();
        for _ in 1..=taps {
            blocks.push(&self.c * &ab);
            ab = &self.a * ab;
        }
        BlockSequence::new(blocks).expect("consistent block shapes")
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            n: self.order(),
            q: self.c.nrows(),
            c: self.b_ext.ncols(),
            a: matrix_to_rows(&self.a),
            b_ext: matrix_to_rows(&self.b_ext),
            c_out: matrix_to_rows(&self.c),
            d_ext: matrix_to_rows(&self.d_ext),
            fit_error: self.fit_error,
        }
    }

    pub fn from_file(f: &ModelFile) -> Result<Self> {
        Ok(Self {
            a: matrix_from_rows(&f.a, (f.n, f.n), "a")?,
            b_ext: matrix_from_rows(&f.b_ext, (f.n, f.c), "b_ext")?,
            c: matrix_from_rows(&f.c_out, (f.q, f.n), "c")?,
            d_ext: matrix_from_rows(&f.d_ext, (f.q, f.c), "d_ext")?,
            fit_error: f.fit_error,
        })
    }
}

/// JSON form of a [`RealizedModel`], row-major like network spec files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    pub q: usize,
    pub c: usize,
    pub a: Vec<Vec<f64>>,
    pub b_ext: Vec<Vec<f64>>,
    #[serde(rename = "c_matrix")]
    pub c_out: Vec<Vec<f64>>,
    pub d_ext: Vec<Vec<f64>>,
    pub fit_error: f64,
}

/// Order-`n` realization from the balanced factorization of the near-square Hankel
/// lifting of `s_1 .. s_r`.
pub fn ho_kalman(s: &BlockSequence, n: usize) -> Result<RealizedModel> {
    let (q, c) = s.block_shape();
    let d_ext = s.block(0).clone();
    if n == 0 {
        let model = RealizedModel {
            a: DMatrix::zeros(0, 0),
            b_ext: DMatrix::zeros(0, c),
            c: DMatrix::zeros(q, 0),
            d_ext,
            fit_error: 0.0,
        };
        let fit_error = markov_check(&model, s)?;
        return Ok(RealizedModel { fit_error, ..model });
    }
    let shape = HankelShape::near_square(s.last_index())?;
    // the shift drops one block row, so the order is bounded by what remains
    let budget = ((shape.block_rows - 1) * q).min(shape.block_cols * c);
    if n > budget {
        return dim_err(format!(
            "order {n} exceeds the {budget} dimensions available from a {}x{} block Hankel",
            shape.block_rows, shape.block_cols
        ));
    }
    let h = hankel_with(s, shape)?;
    let dec = svd(&h);
    let root: Vec<f64> = dec.singular_values[..n].iter().map(|v| v.sqrt()).collect();
    let mut obs = dec.u.columns(0, n).into_owned();
    let mut ctr = dec.v_t.rows(0, n).into_owned();
    for k in 0..n {
        obs.column_mut(k).scale_mut(root[k]);
        ctr.row_mut(k).scale_mut(root[k]);
    }
    let rows = obs.nrows() - q;
    let up = obs.rows(0, rows).into_owned();
    let down = obs.rows(q, rows).into_owned();
    let a = pinv(&up, PINV_TOL) * down;
    let model = RealizedModel {
        a,
        b_ext: ctr.columns(0, c).into_owned(),
        c: obs.rows(0, q).into_owned(),
        d_ext,
        fit_error: 0.0,
    };
    let fit_error = markov_check(&model, s)?;
    Ok(RealizedModel { fit_error, ..model })
}

/// `max_k |s_k - C A^{k-1} B_ext|_F + |s_0 - D_ext|_F`.
pub fn markov_check(model: &RealizedModel, s: &BlockSequence) -> Result<f64> {
    if model.d_ext.shape() != s.block_shape() {
        return dim_err(format!(
            "model maps {:?}, sequence blocks are {:?}",
            model.d_ext.shape(),
            s.block_shape()
        ));
    }
    let fitted = model.markov(s.last_index());
    let worst = (1..s.len())
        .map(|k| (s.block(k) - fitted.block(k)).norm())
        .fold(0.0, f64::max);
    Ok(worst + (s.block(0) - &model.d_ext).norm())
}
