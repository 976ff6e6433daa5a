use nalgebra::DMatrix;

use super::BlockSequence;
use crate::error::{dim_err, Result};

/// Block layout of a Hankel lifting of `X_1 .. X_L`.
///
/// Block entry `(a, b)` (zero-based) holds `X_{a+b+1}`; `block_rows + block_cols - 1 = L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HankelShape {
    pub block_rows: usize,
    pub block_cols: usize,
}

impl HankelShape {
    /// Near-square layout with `ceil(L / 2)` block rows.
    pub fn near_square(last_index: usize) -> Result<Self> {
        Self::with_rows(last_index, last_index.div_ceil(2))
    }

    pub fn with_rows(last_index: usize, block_rows: usize) -> Result<Self> {
        if last_index == 0 {
            return dim_err("Hankel lifting needs at least one block past X_0");
        }
        if block_rows == 0 || block_rows > last_index {
            return dim_err(format!(
                "Hankel block rows {block_rows} outside 1..={last_index}"
            ));
        }
        Ok(Self {
            block_rows,
            block_cols: last_index - block_rows + 1,
        })
    }

    pub fn last_index(&self) -> usize {
        self.block_rows + self.block_cols - 1
    }
}

/// Near-square block-Hankel matrix of `X_1 .. X_L`; `X_0` is not part of the lifting.
pub fn hankel(x: &BlockSequence) -> Result<DMatrix<f64>> {
    let shape = HankelShape::near_square(x.last_index())?;
    hankel_with(x, shape)
}

pub fn hankel_with(x: &BlockSequence, shape: HankelShape) -> Result<DMatrix<f64>> {
    if shape.last_index() != x.last_index() {
        return dim_err(format!(
            "Hankel shape covers L = {}, sequence has L = {}",
            shape.last_index(),
            x.last_index()
        ));
    }
    let (q, c) = x.block_shape();
    let mut out = DMatrix::zeros(shape.block_rows * q, shape.block_cols * c);
    for a in 0..shape.block_rows {
        for b in 0..shape.block_cols {
            out.view_mut((a * q, b * c), (q, c)).copy_from(x.block(a + b + 1));
        }
    }
    Ok(out)
}

/// Adjoint of [`hankel`]: block `k >= 1` collects every block entry on anti-diagonal `k`.
pub fn hankel_adjoint(z: &DMatrix<f64>, block_shape: (usize, usize), last_index: usize) -> Result<BlockSequence> {
    let shape = HankelShape::near_square(last_index)?;
    hankel_adjoint_with(z, block_shape, shape)
}

pub fn hankel_adjoint_with(
    z: &DMatrix<f64>,
    (q, c): (usize, usize),
    shape: HankelShape,
) -> Result<BlockSequence> {
    if z.shape() != (shape.block_rows * q, shape.block_cols * c) {
        return dim_err(format!(
            "matrix of shape {:?} is not a {}x{} grid of {q}x{c} blocks",
            z.shape(),
            shape.block_rows,
            shape.block_cols
        ));
    }
    let mut out = BlockSequence::zeros(q, c, shape.last_index() + 1);
    for a in 0..shape.block_rows {
        for b in 0..shape.block_cols {
            *out.block_mut(a + b + 1) += z.view((a * q, b * c), (q, c));
        }
    }
    Ok(out)
}

/// Multiplicity of each block `X_0 .. X_L` inside the lifting (`X_0` has weight 0).
pub fn hankel_weights(shape: HankelShape) -> Vec<usize> {
    let mut w = vec![0; shape.last_index() + 1];
    for a in 0..shape.block_rows {
        for b in 0..shape.block_cols {
            w[a + b + 1] += 1;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frob_inner, numerical_rank};
    use proptest::prelude::*;

    fn scalar_seq(v: &[f64]) -> BlockSequence {
        BlockSequence::new(v.iter().map(|&x| DMatrix::from_element(1, 1, x)).collect()).unwrap()
    }

    #[test]
    fn scalar_entry_rule() {
        let h = hankel(&scalar_seq(&[7.0, 1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn zero_blocks_give_zero_matrix() {
        let h = hankel(&BlockSequence::zeros(2, 3, 6)).unwrap();
        assert_eq!(h.shape(), (6, 9));
        assert_eq!(h.norm(), 0.0);
    }

    #[test]
    fn single_block_is_rejected() {
        assert!(hankel(&scalar_seq(&[1.0])).is_err());
    }

    #[test]
    fn adjoint_antidiagonal_sum() {
        let z = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let x = hankel_adjoint(&z, (1, 1), 4).unwrap();
        let vals: Vec<f64> = x.blocks().iter().map(|b| b[(0, 0)]).collect();
        assert_eq!(vals, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn adjoint_of_zero() {
        let x = hankel_adjoint(&DMatrix::zeros(4, 6), (2, 2), 4).unwrap();
        assert_eq!(x.frobenius_norm(), 0.0);
    }

    #[test]
    fn adjoint_shape_mismatch() {
        assert!(hankel_adjoint(&DMatrix::zeros(3, 3), (2, 2), 4).is_err());
    }

    #[test]
    fn markov_hankel_rank_equals_order() {
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.0, -0.3, 0.2, 0.1, 0.0, 0.4]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let mut blocks = vec![DMatrix::zeros(2, 2)];
        let mut p = DMatrix::identity(3, 3);
        for _ in 1..=21 {
            blocks.push(&c * &p * &b);
            p = &p * &a;
        }
        let h = hankel(&BlockSequence::new(blocks).unwrap()).unwrap();
        assert_eq!(numerical_rank(&h), 3);
    }

    #[test]
    fn weights_match_lifting() {
        let shape = HankelShape::near_square(5).unwrap();
        assert_eq!(hankel_weights(shape), vec![0, 1, 2, 3, 2, 1]);
    }

    proptest! {
        #[test]
        fn adjoint_identity(
            q in 1usize..4, c in 1usize..4, l in 1usize..9, seed in any::<u64>()
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let blocks = (0..=l).map(|_| DMatrix::from_fn(q, c, |_, _| rng.random_range(-1.0..1.0))).collect();
            let x = BlockSequence::new(blocks).unwrap();
            let h = hankel(&x).unwrap();
            let z = DMatrix::from_fn(h.nrows(), h.ncols(), |_, _| rng.random_range(-1.0..1.0));
            let lhs = frob_inner(&h, &z);
            let rhs = x.inner(&hankel_adjoint(&z, (q, c), l).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }
    }
}
