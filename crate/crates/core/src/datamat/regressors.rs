use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{condition_number, pinv, rank_of_values, singular_values, PINV_TOL, RANK_TOL};
use crate::netsim::Trajectory;

/// Block-Toeplitz data matrix of a series `m_0 .. m_N` (columns of `series`).
///
/// Block `(a, b)` (zero-based, `a = 0..=r`, `b = 0..=window`) is `m_{N - window - a + b}`,
/// with samples before time zero taken as zero.
pub fn block_toeplitz(series: &DMatrix<f64>, n: usize, window: usize, taps: usize) -> Result<DMatrix<f64>> {
    if series.ncols() < n + 1 {
        return dim_err(format!(
            "series has {} samples, needs {} to cover t = 0..={n}",
            series.ncols(),
            n + 1
        ));
    }
    if window > n {
        return dim_err(format!("window {window} exceeds last sample index {n}"));
    }
    let ch = series.nrows();
    let mut out = DMatrix::zeros(ch * (taps + 1), window + 1);
    for a in 0..=taps {
        for b in 0..=window {
            let t = (n - window + b) as isize - a as isize;
            if t >= 0 {
                out.view_mut((a * ch, b), (ch, 1))
                    .copy_from(&series.column(t as usize));
            }
        }
    }
    Ok(out)
}

/// Output and regressor matrices for one node.
#[derive(Clone, Debug)]
pub struct RegressorSet {
    pub node: usize,
    pub n: usize,
    pub window: usize,
    pub taps: usize,
    /// Local input, interconnection and remote-input channel counts.
    pub p: usize,
    pub m: usize,
    pub p_remote: usize,
    /// `q x (window+1)`, column `b` is `y_{N - window + b}`.
    pub y: DMatrix<f64>,
    /// Toeplitz of `v = [u; z]`, `(taps+1)(p+m) x (window+1)`.
    pub v: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub z: DMatrix<f64>,
    /// Toeplitz of `[u; z; u_remote]` when remote inputs are included.
    pub w: Option<DMatrix<f64>>,
    pub u_remote: Option<DMatrix<f64>>,
    pub warnings: Vec<String>,
}

impl RegressorSet {
    pub fn c_local(&self) -> usize {
        self.p + self.m
    }
}

/// Builds `Y`, `V` (and optionally `W`) for `node` from a simulated trajectory.
pub fn build_regressors(
    traj: &Trajectory,
    node: usize,
    n: usize,
    window: usize,
    taps: usize,
    include_remote: bool,
) -> Result<RegressorSet> {
    let Some(local) = traj.nodes.get(node) else {
        return Err(Error::InvalidArgument(format!("node {node} out of range")));
    };
    if n > traj.horizon {
        return dim_err(format!("N = {n} exceeds trajectory horizon {}", traj.horizon));
    }
    if window >= n {
        return dim_err(format!("window M = {window} must be smaller than N = {n}"));
    }
    let p = local.u.nrows();
    let m = local.z.nrows();
    let mut warnings = Vec::new();
    if window + 1 < (taps + 1) * (p + m) {
        warnings.push(format!(
            "M + 1 = {} < (r + 1)(p + m) = {}: V cannot have full row rank",
            window + 1,
            (taps + 1) * (p + m)
        ));
    }

    let y = local.y.columns(n - window, window + 1).into_owned();
    let v_series = stack_rows(&[&local.u, &local.z]).expect("nonempty");
    let v = block_toeplitz(&v_series, n, window, taps)?;
    let u = block_toeplitz(&local.u, n, window, taps)?;
    let z = block_toeplitz(&local.z, n, window, taps)?;

    let (w, u_remote, p_remote) = if include_remote {
        let remote: Vec<&DMatrix<f64>> = traj
            .nodes
            .iter()
            .enumerate()
            .filter(|(j, s)| *j != node && s.u.nrows() > 0 && s.u.iter().any(|&x| x != 0.0))
            .map(|(_, s)| &s.u)
            .collect();
        let remote_series = stack_rows(&remote).unwrap_or_else(|| DMatrix::zeros(0, traj.horizon + 1));
        let p_remote = remote_series.nrows();
        let w_series = stack_rows(&[&v_series, &remote_series]).expect("nonempty");
        (
            Some(block_toeplitz(&w_series, n, window, taps)?),
            Some(block_toeplitz(&remote_series, n, window, taps)?),
            p_remote,
        )
    } else {
        (None, None, 0)
    };

    Ok(RegressorSet {
        node,
        n,
        window,
        taps,
        p,
        m,
        p_remote,
        y,
        v,
        u,
        z,
        w,
        u_remote,
        warnings,
    })
}

fn stack_rows(parts: &[&DMatrix<f64>]) -> Option<DMatrix<f64>> {
    let cols = parts.first()?.ncols();
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for p in parts {
        out.rows_mut(r0, p.nrows()).copy_from(p);
        r0 += p.nrows();
    }
    Some(out)
}

/// Rank report for one regressor block.
#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub rows: usize,
    pub rank: usize,
    pub condition: f64,
    pub full_row_rank: bool,
}

impl RankReport {
    fn of(m: &DMatrix<f64>) -> Self {
        let sv = singular_values(m);
        let rank = rank_of_values(&sv, RANK_TOL);
        let leading = &sv[..sv.len().min(m.nrows())];
        Self {
            rows: m.nrows(),
            rank,
            condition: condition_number(leading),
            full_row_rank: rank == m.nrows(),
        }
    }
}

/// Persistence-of-excitation diagnostics for `U`, the projection of `Z` onto the
/// orthogonal complement of the row space of `U`, and the stacked `V`.
#[derive(Clone, Debug, Serialize)]
pub struct PeDiagnostics {
    pub u: RankReport,
    pub projected_z: RankReport,
    pub v: RankReport,
    pub passed: bool,
}

pub fn pe_check(reg: &RegressorSet) -> PeDiagnostics {
    let u = RankReport::of(&reg.u);
    let projected = if reg.z.nrows() == 0 {
        reg.z.clone()
    } else if reg.u.nrows() == 0 {
        reg.z.clone()
    } else {
        let coeff = &reg.z * pinv(&reg.u, PINV_TOL);
        &reg.z - coeff * &reg.u
    };
    let projected_z = RankReport::of(&projected);
    let v = RankReport::of(&reg.v);
    let passed = u.full_row_rank && projected_z.full_row_rank && v.full_row_rank;
    PeDiagnostics {
        u,
        projected_z,
        v,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_toeplitz() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let t = block_toeplitz(&m, 2, 2, 1).unwrap();
        assert_eq!(t, DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 0.0, 1.0, 2.0]));
    }

    #[test]
    fn zero_taps_is_single_block_row() {
        let m = DMatrix::from_row_slice(2, 6, &[0., 1., 2., 3., 4., 5., 10., 11., 12., 13., 14., 15.]);
        let t = block_toeplitz(&m, 4, 2, 0).unwrap();
        assert_eq!(t, DMatrix::from_row_slice(2, 3, &[2., 3., 4., 12., 13., 14.]));
    }

    #[test]
    fn zero_series() {
        let t = block_toeplitz(&DMatrix::zeros(3, 11), 10, 4, 3).unwrap();
        assert_eq!(t.shape(), (12, 5));
        assert_eq!(t.norm(), 0.0);
    }

    #[test]
    fn short_series_rejected() {
        assert!(block_toeplitz(&DMatrix::zeros(1, 5), 6, 2, 1).is_err());
    }

    #[test]
    fn linear_and_shift_equivariant() {
        let a = DMatrix::from_fn(2, 12, |i, t| (i as f64 + 1.0) * (t as f64).sin());
        let b = DMatrix::from_fn(2, 12, |i, t| (t as f64 * 0.3 + i as f64).cos());
        let ta = block_toeplitz(&a, 10, 5, 3).unwrap();
        let tb = block_toeplitz(&b, 10, 5, 3).unwrap();
        let tab = block_toeplitz(&(&a * 2.0 - &b * 0.5), 10, 5, 3).unwrap();
        assert!((tab - (ta * 2.0 - tb * 0.5)).norm() < 1e-12);

        // delaying the series by one sample shifts every block one step back in time
        let mut delayed = DMatrix::zeros(2, 12);
        delayed.columns_mut(1, 11).copy_from(&a.columns(0, 11));
        let td = block_toeplitz(&delayed, 10, 5, 3).unwrap();
        let ta_prev = block_toeplitz(&a, 9, 5, 3).unwrap();
        assert!((td - ta_prev).norm() < 1e-12);
    }
}
