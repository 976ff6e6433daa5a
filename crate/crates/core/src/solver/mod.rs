//! Proximal splitting for the nuclear-norm identification programs.
//!
//! - [`solve_robust`]: `min |hankel(S)|_*  s.t.  |Y - S V|_F <= delta`
//! - [`solve_hidden`]: adds a hidden component `H` on the remote regressor `W`, with
//!   `|F(H)(w_k)|_* <= delta_h` on a uniform frequency grid
//! - [`solve_hidden_local`]: the same with `H` acting on the local regressor `V`
//!
//! The result is always the best feasible iterate seen; infeasible `delta` and iteration
//! caps are reported through [`SolveStatus`].

mod admm;
pub mod prox;

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use prox::{project_frobenius_ball, project_l1_ball, project_nuclear_ball, svt};

use crate::datamat::{hankel_with, BlockSequence, HankelShape};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{pinv, singular_values, PINV_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    pub max_iters: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub adaptive_rho: bool,
    /// Frequency grid size `K`; defaults to the window length `M`.
    pub grid_points: Option<usize>,
    pub feas_tol: f64,
    /// Hankel block rows; defaults to the near-square layout.
    pub hankel_rows: Option<usize>,
    /// Iterations between feasibility checkpoints.
    pub check_every: usize,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 5000,
            eps_abs: 1e-6,
            eps_rel: 1e-4,
            adaptive_rho: true,
            grid_points: None,
            feas_tol: 1e-6,
            hankel_rows: None,
            check_every: 25,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("solver {name} must be positive, got {v}")))
            }
        };
        positive(self.rho, "rho")?;
        positive(self.eps_abs, "eps_abs")?;
        positive(self.eps_rel, "eps_rel")?;
        positive(self.feas_tol, "feas_tol")?;
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("solver max_iters must be positive".into()));
        }
        if self.grid_points == Some(0) {
            return Err(Error::InvalidArgument("frequency grid needs at least one point".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Iteration cap reached; the result is the best feasible iterate if one was found.
    NotConverged,
    /// `delta` lies below the least-squares residual floor.
    Infeasible { residual_floor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Nuclear norm of the Hankel split variable.
    pub objective: f64,
    pub primal: f64,
    pub dual: f64,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct DecompositionResult {
    /// Local component `[s_0 .. s_r]`.
    pub s: BlockSequence,
    /// Hidden component `[h_0 .. h_r]` with `h_0 = 0`.
    pub h: Option<BlockSequence>,
    /// `|hankel(S)|_*`.
    pub objective: f64,
    pub residual: f64,
    pub delta: f64,
    pub delta_h: Option<f64>,
    pub hankel_singular_values: Vec<f64>,
    /// Singular values of `F(H)(w_k)` for every point of the full `K`-grid.
    pub frequency_singular_values: Vec<Vec<f64>>,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Every constraint holds within the feasibility tolerance.
    pub feasible: bool,
    pub trace: Vec<TraceRow>,
}

impl DecompositionResult {
    /// Largest `sigma_2 / sigma_1` of `F(H)` over the grid; 0 for a zero or absent `H`.
    pub fn max_frequency_ratio(&self) -> f64 {
        self.frequency_singular_values
            .iter()
            .map(|sv| match sv.as_slice() {
                [s1, s2, ..] if *s1 > 0.0 => s2 / s1,
                _ => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// Largest `sigma_2(F(H)(w_k))` over the grid.
    pub fn max_frequency_sigma2(&self) -> f64 {
        self.frequency_singular_values
            .iter()
            .map(|sv| sv.get(1).copied().unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    pub fn max_frequency_nuclear_norm(&self) -> f64 {
        self.frequency_singular_values
            .iter()
            .map(|sv| sv.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,objective,primal,dual,rho")?;
        for row in &self.trace {
            writeln!(
                out,
                "{},{},{},{},{}",
                row.iteration,
                crate::fmt_f64(row.objective),
                crate::fmt_f64(row.primal),
                crate::fmt_f64(row.dual),
                crate::fmt_f64(row.rho)
            )?;
        }
        Ok(())
    }
}

/// `min |hankel(S)|_*` subject to `|Y - S V|_F <= delta`.
pub fn solve_robust(
    y: &DMatrix<f64>,
    v: &DMatrix<f64>,
    taps: usize,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<DecompositionResult> {
    solve(y, v, None, taps, delta, None, cfg)
}

/// Hidden-interconnection program with remote regressor `W`:
/// `|Y - S V - H W|_F <= delta`, `|F(H)(w_k)|_* <= delta_h`.
pub fn solve_hidden(
    y: &DMatrix<f64>,
    v: &DMatrix<f64>,
    w: &DMatrix<f64>,
    taps: usize,
    delta: f64,
    delta_h: f64,
    cfg: &SolverConfig,
) -> Result<DecompositionResult> {
    solve(y, v, Some(w), taps, delta, Some(delta_h), cfg)
}

/// Local hidden program: `|Y - (S + H) V|_F <= delta`, `|F(H)(w_k)|_* <= delta_h`.
pub fn solve_hidden_local(
    y: &DMatrix<f64>,
    v: &DMatrix<f64>,
    taps: usize,
    delta: f64,
    delta_h: f64,
    cfg: &SolverConfig,
) -> Result<DecompositionResult> {
    solve(y, v, Some(v), taps, delta, Some(delta_h), cfg)
}

fn check_shapes(y: &DMatrix<f64>, v: &DMatrix<f64>, taps: usize, name: &str) -> Result<usize> {
    if taps == 0 {
        return dim_err("at least one tap past s_0 is needed for the Hankel lifting");
    }
    if v.ncols() != y.ncols() {
        return dim_err(format!("{name} has {} columns, Y has {}", v.ncols(), y.ncols()));
    }
    if v.nrows() == 0 || v.nrows() % (taps + 1) != 0 {
        return dim_err(format!("{name} has {} rows, not a positive multiple of r + 1 = {}", v.nrows(), taps + 1));
    }
    Ok(v.nrows() / (taps + 1))
}

fn solve(
    y: &DMatrix<f64>,
    v: &DMatrix<f64>,
    w: Option<&DMatrix<f64>>,
    taps: usize,
    delta: f64,
    delta_h: Option<f64>,
    cfg: &SolverConfig,
) -> Result<DecompositionResult> {
    cfg.validate()?;
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    }
    if let Some(dh) = delta_h {
        if !(dh >= 0.0) {
            return Err(Error::InvalidArgument(format!("delta_h must be nonnegative, got {dh}")));
        }
    }
    if y.ncols() < 2 {
        return dim_err("at least two data columns are needed");
    }
    let q = y.nrows();
    let cs = check_shapes(y, v, taps, "V")?;
    let ch = match w {
        Some(w) => check_shapes(y, w, taps, "W")?,
        None => 0,
    };
    let shape = match cfg.hankel_rows {
        Some(rows) => HankelShape::with_rows(taps, rows)?,
        None => HankelShape::near_square(taps)?,
    };
    let grid_points = cfg.grid_points.unwrap_or(y.ncols() - 1);
    let active_h = w.is_some() && delta_h.is_some_and(|d| d > 0.0);

    let finish = |s: DMatrix<f64>, h: Option<DMatrix<f64>>, objective: f64, residual: f64, iterations, status, feasible, trace| {
        let s = BlockSequence::from_wide(&s, cs)?;
        let hankel_singular_values = singular_values(&hankel_with(&s, shape)?);
        let h = match (w, h) {
            (Some(_), Some(h)) => {
                let mut full = DMatrix::zeros(q, (taps + 1) * ch);
                full.columns_mut(ch, taps * ch).copy_from(&h);
                Some(BlockSequence::from_wide(&full, ch)?)
            }
            (Some(_), None) => Some(BlockSequence::zeros(q, ch, taps + 1)),
            _ => None,
        };
        let frequency_singular_values = match &h {
            Some(h) => frequency_values(h, grid_points, taps, ch),
            None => Vec::new(),
        };
        Ok(DecompositionResult {
            s,
            h,
            objective,
            residual,
            delta,
            delta_h,
            hankel_singular_values,
            frequency_singular_values,
            iterations,
            status,
            feasible,
            trace,
        })
    };

    if y.norm() <= delta {
        let norm = y.norm();
        return finish(DMatrix::zeros(q, v.nrows()), None, 0.0, norm, 0, SolveStatus::Converged, true, Vec::new());
    }

    // least-squares floor over every free regressor
    let phi = match (w, active_h) {
        (Some(w), true) => {
            let mut m = DMatrix::zeros(v.nrows() + taps * ch, y.ncols());
            m.rows_mut(0, v.nrows()).copy_from(v);
            m.rows_mut(v.nrows(), taps * ch).copy_from(&w.rows(ch, taps * ch));
            m
        }
        _ => v.clone(),
    };
    let floor = (y - (y * pinv(&phi, PINV_TOL)) * &phi).norm();
    if floor > delta * (1.0 + cfg.feas_tol) + 1e-9 * y.norm() {
        let s = y * pinv(v, PINV_TOL);
        let residual = (y - &s * v).norm();
        let objective = crate::linalg::nuclear_norm(&hankel_with(&BlockSequence::from_wide(&s, cs)?, shape)?);
        return finish(
            s,
            None,
            objective,
            residual,
            0,
            SolveStatus::Infeasible { residual_floor: floor },
            false,
            Vec::new(),
        );
    }

    let prog = admm::Program {
        y,
        v,
        hidden: match (w, active_h) {
            (Some(w), true) => Some((w.rows(ch, taps * ch).into_owned(), ch)),
            _ => None,
        },
        taps,
        delta,
        delta_h: delta_h.unwrap_or(0.0),
    };
    let raw = admm::run(&prog, cfg, shape, grid_points)?;
    let status = if raw.converged && raw.feasible {
        SolveStatus::Converged
    } else {
        SolveStatus::NotConverged
    };
    debug_assert_eq!(raw.grid_points, grid_points);
    finish(raw.s, raw.h, raw.objective, raw.residual, raw.iterations, status, raw.feasible, raw.trace)
}

/// Singular values of `sum_t h_t exp(-j w_k t)` on the uniform `K`-grid, using
/// conjugate symmetry for the upper half.
fn frequency_values(h: &BlockSequence, points: usize, taps: usize, ch: usize) -> Vec<Vec<f64>> {
    let wide = h.to_wide();
    let lags = wide.columns(ch, taps * ch).into_owned();
    let spec = admm::HalfSpectrum::new(points, taps);
    let scale = (points as f64).sqrt();
    let half: Vec<Vec<f64>> = spec
        .forward(&lags, ch)
        .iter()
        .map(|f| singular_values(f).into_iter().map(|s| s * scale).collect())
        .collect();
    (0..points).map(|k| half[k.min(points - k)].clone()).collect()
}
