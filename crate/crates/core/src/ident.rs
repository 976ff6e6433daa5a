//! Impulse-response identification when every interconnection signal is measured.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::datamat::{hankel, BlockSequence};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{condition_number, pinv, rank_of_values, singular_values, PINV_TOL, RANK_TOL};
use crate::solver::{solve_robust, DecompositionResult, SolverConfig};

/// Conditioning of the regressor `V`.
#[derive(Clone, Debug, Serialize)]
pub struct Conditioning {
    pub rows: usize,
    pub rank: usize,
    pub condition: f64,
    pub full_row_rank: bool,
}

impl Conditioning {
    pub fn of(v: &DMatrix<f64>) -> Self {
        let sv = singular_values(v);
        let rank = rank_of_values(&sv, RANK_TOL);
        Self {
            rows: v.nrows(),
            rank,
            condition: condition_number(&sv[..sv.len().min(v.nrows())]),
            full_row_rank: rank == v.nrows(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ImpulseEstimate {
    /// `[s_0 .. s_r]`, each block `q x (p + m)`.
    pub s: BlockSequence,
    /// `|Y - S V|_F`.
    pub residual: f64,
    pub conditioning: Conditioning,
    /// False when `V` lacks full row rank and the estimate is one of many.
    pub identifiable: bool,
    pub hankel_singular_values: Vec<f64>,
    /// Solver output for nuclear-norm estimates.
    pub solve: Option<DecompositionResult>,
}

impl ImpulseEstimate {
    pub fn taps(&self) -> usize {
        self.s.last_index()
    }

    pub fn residual_on(&self, y: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        (y - self.s.to_wide() * v).norm()
    }

    /// `|S - truth|_F`, optionally restricted to the first `cols` columns of each block.
    pub fn error_against(&self, truth: &BlockSequence, cols: Option<usize>) -> Result<f64> {
        block_error(&self.s, truth, cols)
    }

    pub fn report(&self) -> ImpulseReport {
        ImpulseReport {
            blocks: self.s.blocks().iter().map(crate::netsim::matrix_to_rows).collect(),
            residual: self.residual,
            hankel_singular_values: self.hankel_singular_values.clone(),
            conditioning: self.conditioning.clone(),
            identifiable: self.identifiable,
        }
    }
}

/// Serializable view of an estimate.
#[derive(Clone, Debug, Serialize)]
pub struct ImpulseReport {
    pub blocks: Vec<Vec<Vec<f64>>>,
    pub residual: f64,
    pub hankel_singular_values: Vec<f64>,
    pub conditioning: Conditioning,
    pub identifiable: bool,
}

/// Frobenius distance between two block sequences, over all columns or the first `cols`.
pub fn block_error(a: &BlockSequence, b: &BlockSequence, cols: Option<usize>) -> Result<f64> {
    if a.len() != b.len() || a.block_shape() != b.block_shape() {
        return dim_err(format!(
            "cannot compare {} blocks of {:?} with {} blocks of {:?}",
            a.len(),
            a.block_shape(),
            b.len(),
            b.block_shape()
        ));
    }
    let width = cols.unwrap_or(a.block_shape().1).min(a.block_shape().1);
    Ok(a.blocks()
        .iter()
        .zip(b.blocks())
        .map(|(x, y)| (x.columns(0, width) - y.columns(0, width)).norm_squared())
        .sum::<f64>()
        .sqrt())
}

fn check(y: &DMatrix<f64>, v: &DMatrix<f64>, taps: usize) -> Result<usize> {
    if y.ncols() != v.ncols() {
        return dim_err(format!("Y has {} columns, V has {}", y.ncols(), v.ncols()));
    }
    if v.nrows() == 0 || v.nrows() % (taps + 1) != 0 {
        return dim_err(format!("V rows {} are not a multiple of r + 1 = {}", v.nrows(), taps + 1));
    }
    Ok(v.nrows() / (taps + 1))
}

fn hankel_values(s: &BlockSequence) -> Vec<f64> {
    if s.last_index() == 0 {
        return Vec::new();
    }
    singular_values(&hankel(s).expect("nonempty lifting"))
}

/// `S = Y V^+` with an SVD pseudo-inverse (relative cutoff `1e-10`).
pub fn identify_exact(y: &DMatrix<f64>, v: &DMatrix<f64>, taps: usize) -> Result<ImpulseEstimate> {
    let c = check(y, v, taps)?;
    let s_wide = y * pinv(v, PINV_TOL);
    let residual = (y - &s_wide * v).norm();
    let s = BlockSequence::from_wide(&s_wide, c)?;
    let conditioning = Conditioning::of(v);
    Ok(ImpulseEstimate {
        hankel_singular_values: hankel_values(&s),
        s,
        residual,
        identifiable: conditioning.full_row_rank,
        conditioning,
        solve: None,
    })
}

/// `min |hankel(S)|_*` subject to `|Y - S V|_F <= delta`.
pub fn identify_robust(
    y: &DMatrix<f64>,
    v: &DMatrix<f64>,
    taps: usize,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<ImpulseEstimate> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    }
    check(y, v, taps)?;
    let res = solve_robust(y, v, taps, delta, cfg)?;
    let conditioning = Conditioning::of(v);
    Ok(ImpulseEstimate {
        s: res.s.clone(),
        residual: res.residual,
        identifiable: conditioning.full_row_rank,
        conditioning,
        hankel_singular_values: res.hankel_singular_values.clone(),
        solve: Some(res),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
    }

    #[test]
    fn zero_output_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = gaussian(&mut rng, 6, 20);
        let est = identify_exact(&DMatrix::zeros(2, 20), &v, 2).unwrap();
        assert_eq!(est.s.frobenius_norm(), 0.0);
        assert!(est.identifiable);
    }

    #[test]
    fn square_invertible_regressor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = gaussian(&mut rng, 6, 6);
        let s0 = gaussian(&mut rng, 2, 6);
        let est = identify_exact(&(&s0 * &v), &v, 2).unwrap();
        assert!((est.s.to_wide() - s0).norm() < 1e-10);
        assert!(est.residual < 1e-10);
    }

    #[test]
    fn rank_deficient_regressor_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = gaussian(&mut rng, 6, 20);
        let dup = v.row(0).into_owned();
        v.row_mut(3).copy_from(&dup);
        let y = gaussian(&mut rng, 1, 20);
        let est = identify_exact(&y, &v, 2).unwrap();
        assert!(!est.identifiable);
        assert_eq!(est.conditioning.rank, 5);
        assert!((est.residual_on(&y, &v) - est.residual).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let v = DMatrix::zeros(7, 10);
        assert!(identify_exact(&DMatrix::zeros(1, 10), &v, 2).is_err());
        assert!(identify_exact(&DMatrix::zeros(1, 9), &DMatrix::zeros(6, 10), 2).is_err());
        assert!(identify_robust(&DMatrix::zeros(1, 10), &DMatrix::zeros(6, 10), 2, -1.0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn block_error_restricts_columns() {
        let a = BlockSequence::from_wide(&DMatrix::from_row_slice(1, 4, &[1.0, 5.0, 2.0, 7.0]), 2).unwrap();
        let b = BlockSequence::zeros(1, 2, 2);
        assert!((block_error(&a, &b, Some(1)).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!((block_error(&a, &b, None).unwrap() - 79f64.sqrt()).abs() < 1e-15);
    }
}
