//! Scaled-form ADMM shared by the three nuclear-norm programs.
//!
//! Variables are the rows of `X = [S | H]`, where `H` holds lags `1..=r` of the hidden
//! component (lag 0 is pinned to zero). Three splittings are dualized:
//!
//! - `hankel(S) = G`, handled by singular value thresholding,
//! - `gamma X Phi = P` with `P` in the Frobenius ball around `gamma Y`,
//! - `DFT(H) / sqrt(K) = F_k` with each `F_k` in a nuclear ball,
//!
//! where `Phi = [V; Psi]` stacks the local and hidden regressors and `gamma` rescales
//! the data term to the scale of the Hankel lifting. Only the half spectrum `k = 0..=K/2` is kept;
//! conjugate pairs enter every inner product with weight 2.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;

use super::prox::{project_frobenius_ball, project_nuclear_ball_with_values, svt_with_values};
use super::{SolverConfig, TraceRow};
use crate::datamat::{hankel_adjoint_with, hankel_weights, hankel_with, BlockSequence, HankelShape};
use crate::error::{Error, Result};
use crate::linalg::{nuclear_norm, pinv, singular_values, PINV_TOL};

pub(crate) struct Program<'a> {
    pub y: &'a DMatrix<f64>,
    pub v: &'a DMatrix<f64>,
    /// Hidden-channel regressor with its lag-0 block rows removed, and its block width.
    pub hidden: Option<(DMatrix<f64>, usize)>,
    pub taps: usize,
    pub delta: f64,
    pub delta_h: f64,
}

pub(crate) struct Raw {
    pub s: DMatrix<f64>,
    /// `q x r*c_h`, lags `1..=r`.
    pub h: Option<DMatrix<f64>>,
    pub objective: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feasible: bool,
    pub trace: Vec<TraceRow>,
    pub grid_points: usize,
}

/// Half-spectrum DFT restricted to lags `1..=r`, scaled by `1/sqrt(K)`.
pub(crate) struct HalfSpectrum {
    pub points: usize,
    /// `phase[k][t - 1] = exp(-j w_k t) / sqrt(K)`.
    phase: Vec<Vec<Complex64>>,
    pub weights: Vec<f64>,
}

impl HalfSpectrum {
    pub fn new(points: usize, taps: usize) -> Self {
        let half = points / 2;
        let scale = 1.0 / (points as f64).sqrt();
        let phase = (0..=half)
            .map(|k| {
                let w = 2.0 * PI * k as f64 / points as f64;
                (1..=taps).map(|t| Complex64::from_polar(scale, -w * t as f64)).collect()
            })
            .collect();
        let weights = (0..=half)
            .map(|k| if k == 0 || (points % 2 == 0 && k == half) { 1.0 } else { 2.0 })
            .collect();
        Self { points, phase, weights }
    }

    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn forward(&self, h: &DMatrix<f64>, ch: usize) -> Vec<DMatrix<Complex64>> {
        let q = h.nrows();
        self.phase
            .iter()
            .map(|ph| {
                let mut f = DMatrix::<Complex64>::zeros(q, ch);
                for (t, &e) in ph.iter().enumerate() {
                    let block = h.columns(t * ch, ch);
                    f.zip_apply(&block, |acc, v| *acc += e * v);
                }
                f
            })
            .collect()
    }

    /// Adjoint of [`Self::forward`] under the weighted inner product.
    pub fn adjoint(&self, f: &[DMatrix<Complex64>], out: &mut DMatrix<f64>, ch: usize) {
        for ((ph, fk), &wk) in self.phase.iter().zip(f).zip(&self.weights) {
            for (t, &e) in ph.iter().enumerate() {
                let c = e.conj() * wk;
                let mut block = out.columns_mut(t * ch, ch);
                block.zip_apply(fk, |acc, z| *acc += (c * z).re);
            }
        }
    }

    /// `Gram[t][t'] = Re sum_k w_k conj(e_kt) e_kt'`.
    pub fn gram(&self) -> DMatrix<f64> {
        let r = self.phase.first().map_or(0, |p| p.len());
        DMatrix::from_fn(r, r, |a, b| {
            self.phase
                .iter()
                .zip(&self.weights)
                .map(|(ph, &w)| w * (ph[a].conj() * ph[b]).re)
                .sum()
        })
    }

    pub fn weighted_norm_sq(&self, f: &[DMatrix<Complex64>]) -> f64 {
        f.iter().zip(&self.weights).map(|(m, w)| w * m.norm_squared()).sum()
    }
}

fn hankel_of(s: &DMatrix<f64>, cs: usize, shape: HankelShape) -> DMatrix<f64> {
    let seq = BlockSequence::from_wide(s, cs).expect("S width is a multiple of its block width");
    hankel_with(&seq, shape).expect("shape matches S")
}

fn hankel_adj(g: &DMatrix<f64>, q: usize, cs: usize, shape: HankelShape) -> DMatrix<f64> {
    hankel_adjoint_with(g, (q, cs), shape).expect("shape matches G").to_wide()
}

struct Candidate {
    s: DMatrix<f64>,
    h: Option<DMatrix<f64>>,
    objective: f64,
    residual: f64,
}

struct Engine<'a> {
    prog: &'a Program<'a>,
    cfg: &'a SolverConfig,
    q: usize,
    cs: usize,
    ch: usize,
    ns: usize,
    nh: usize,
    shape: HankelShape,
    phi: DMatrix<f64>,
    gamma: f64,
    spec: HalfSpectrum,
    v_pinv: DMatrix<f64>,
    slack: f64,
}

impl<'a> Engine<'a> {
    fn new(prog: &'a Program<'a>, cfg: &'a SolverConfig, shape: HankelShape, grid_points: usize) -> Self {
        let q = prog.y.nrows();
        let ns = prog.v.nrows();
        let cs = ns / (prog.taps + 1);
        let (ch, nh) = match &prog.hidden {
            Some((psi, ch)) => (*ch, psi.nrows()),
            None => (0, 0),
        };
        let phi = match &prog.hidden {
            Some((psi, _)) => {
                let mut m = DMatrix::zeros(ns + nh, prog.y.ncols());
                m.rows_mut(0, ns).copy_from(prog.v);
                m.rows_mut(ns, nh).copy_from(psi);
                m
            }
            None => prog.v.clone(),
        };
        let top = singular_values(&phi).first().copied().unwrap_or(0.0);
        // balance the data block against the heaviest Hankel anti-diagonal
        let heaviest = hankel_weights(shape).into_iter().max().unwrap_or(1).max(1) as f64;
        let gamma = if top > 0.0 { heaviest.sqrt() / top } else { 1.0 };
        Self {
            prog,
            cfg,
            q,
            cs,
            ch,
            ns,
            nh,
            shape,
            gamma,
            spec: HalfSpectrum::new(grid_points, prog.taps),
            v_pinv: pinv(prog.v, PINV_TOL),
            slack: 1e-9 * prog.y.norm(),
            phi,
        }
    }

    fn feasibility_bound(&self) -> f64 {
        self.prog.delta * (1.0 + self.cfg.feas_tol) + self.slack
    }

    fn system_factor(&self) -> Result<Cholesky<f64, Dyn>> {
        let nx = self.ns + self.nh;
        let mut sys = (&self.phi * self.phi.transpose()) * (self.gamma * self.gamma);
        let w = hankel_weights(self.shape);
        for (t, &wt) in w.iter().enumerate() {
            for c in 0..self.cs {
                sys[(t * self.cs + c, t * self.cs + c)] += wt as f64;
            }
        }
        if self.nh > 0 {
            let gram = self.spec.gram();
            for a in 0..self.prog.taps {
                for b in 0..self.prog.taps {
                    for c in 0..self.ch {
                        sys[(self.ns + a * self.ch + c, self.ns + b * self.ch + c)] += gram[(a, b)];
                    }
                }
            }
        }
        let jitter = 1e-12 * sys.trace() / nx as f64;
        for scale in [1.0, 1e2, 1e4, 1e6] {
            let mut m = sys.clone();
            for d in 0..nx {
                m[(d, d)] += jitter * scale;
            }
            if let Some(ch) = Cholesky::new(m) {
                return Ok(ch);
            }
        }
        Err(Error::Dimension("solver system matrix is not positive definite".into()))
    }

    /// `A^T (dG, dP, dF)` as a `q x (ns + nh)` matrix.
    fn adjoint_all(&self, g: &DMatrix<f64>, p: &DMatrix<f64>, f: &[DMatrix<Complex64>]) -> DMatrix<f64> {
        let mut out = &(p * self.phi.transpose()) * self.gamma;
        let mut spart = out.columns_mut(0, self.ns);
        spart += hankel_adj(g, self.q, self.cs, self.shape);
        if self.nh > 0 {
            let mut hpart = DMatrix::zeros(self.q, self.nh);
            self.spec.adjoint(f, &mut hpart, self.ch);
            let mut hview = out.columns_mut(self.ns, self.nh);
            hview += hpart;
        }
        out
    }

    /// Turns an iterate into a feasible point: shrink `H` into its nuclear balls, then
    /// move `S` toward the least-squares fit just far enough to meet the data bound.
    fn restore(&self, x: &DMatrix<f64>) -> Option<Candidate> {
        let y = self.prog.y;
        let mut s = x.columns(0, self.ns).into_owned();
        let mut target = y.clone();
        let h = if self.nh > 0 {
            let mut h = x.columns(self.ns, self.nh).into_owned();
            let radius = self.prog.delta_h / (self.spec.points as f64).sqrt();
            let worst = self
                .spec
                .forward(&h, self.ch)
                .iter()
                .map(nuclear_norm)
                .fold(0.0, f64::max);
            if worst > radius {
                h *= radius / worst;
            }
            let psi = self.phi.rows(self.ns, self.nh);
            target -= &h * psi;
            Some(h)
        } else {
            None
        };

        let bound = self.feasibility_bound();
        let r0 = &target - &s * self.prog.v;
        let n0 = r0.norm();
        if n0 > bound {
            let s_ls = &target * &self.v_pinv;
            let r1 = &target - &s_ls * self.prog.v;
            let n1 = r1.norm();
            if n1 > bound {
                return None;
            }
            let goal = self.prog.delta;
            if n1 >= goal {
                s = s_ls;
            } else {
                let d = &r1 - &r0;
                let a = d.norm_squared();
                let b = 2.0 * r0.dot(&d);
                let c = n0 * n0 - goal * goal;
                let disc = (b * b - 4.0 * a * c).max(0.0);
                let t = (2.0 * c / (-b + disc.sqrt())).clamp(0.0, 1.0);
                s += (s_ls - &s) * t;
            }
        }
        let residual = (&target - &s * self.prog.v).norm();
        if residual > bound {
            return None;
        }
        let objective = nuclear_norm(&hankel_of(&s, self.cs, self.shape));
        Some(Candidate { s, h, objective, residual })
    }

    fn run(&self) -> Result<Raw> {
        let (q, ns, nh, ch, cs) = (self.q, self.ns, self.nh, self.ch, self.cs);
        let chol = self.system_factor()?;
        let gamma = self.gamma;
        let yg = self.prog.y * gamma;
        let radius_p = gamma * self.prog.delta;
        let radius_f = self.prog.delta_h / (self.spec.points as f64).sqrt();
        let nk = if nh > 0 { self.spec.len() } else { 0 };
        let hrows = self.shape.block_rows * q;
        let hcols = self.shape.block_cols * cs;
        let m_dim = (hrows * hcols + yg.len() + nk.min(1) * q * ch * self.spec.points) as f64;
        let n_dim = (q * (ns + nh)) as f64;

        let mut x = DMatrix::zeros(q, ns + nh);
        let mut g = DMatrix::zeros(hrows, hcols);
        let mut p = DMatrix::zeros(q, yg.ncols());
        let mut f = vec![DMatrix::<Complex64>::zeros(q, ch); nk];
        let mut u1 = g.clone();
        let mut u2 = p.clone();
        let mut u3 = f.clone();
        let mut rho = self.cfg.rho;

        let mut best: Option<Candidate> = None;
        let mut trace = Vec::new();
        let mut converged = false;
        let mut iterations = 0;

        for it in 1..=self.cfg.max_iters {
            iterations = it;
            let fd: Vec<_> = f.iter().zip(&u3).map(|(a, b)| a - b).collect();
            let rhs = self.adjoint_all(&(&g - &u1), &(&p - &u2), &fd);
            x = chol.solve(&rhs.transpose()).transpose();

            let s = x.columns(0, ns).into_owned();
            let hs = hankel_of(&s, cs, self.shape);
            let xp = (&x * &self.phi) * gamma;
            let dh = if nh > 0 {
                self.spec.forward(&x.columns(ns, nh).into_owned(), ch)
            } else {
                Vec::new()
            };

            let (g_new, g_sv) = svt_with_values(&(&hs + &u1), 1.0 / rho);
            let p_new = project_frobenius_ball(&(&xp + &u2), &yg, radius_p);
            let f_new: Vec<DMatrix<Complex64>> = dh
                .par_iter()
                .zip(u3.par_iter())
                .map(|(d, u)| project_nuclear_ball_with_values(&(d + u), radius_f).0)
                .collect();

            let r1 = &hs - &g_new;
            let r2 = &xp - &p_new;
            let r3: Vec<_> = dh.iter().zip(&f_new).map(|(a, b)| a - b).collect();
            u1 += &r1;
            u2 += &r2;
            for (u, r) in u3.iter_mut().zip(&r3) {
                *u += r;
            }

            let primal = (r1.norm_squared() + r2.norm_squared() + self.spec.weighted_norm_sq(&r3)).sqrt();
            let df: Vec<_> = f_new.iter().zip(&f).map(|(a, b)| a - b).collect();
            let dual = rho * self.adjoint_all(&(&g_new - &g), &(&p_new - &p), &df).norm();

            let ax = (hs.norm_squared() + xp.norm_squared() + self.spec.weighted_norm_sq(&dh)).sqrt();
            let z = (g_new.norm_squared() + p_new.norm_squared() + self.spec.weighted_norm_sq(&f_new)).sqrt();
            let aty = rho * self.adjoint_all(&u1, &u2, &u3).norm();
            let eps_pri = m_dim.sqrt() * self.cfg.eps_abs + self.cfg.eps_rel * ax.max(z);
            let eps_dual = n_dim.sqrt() * self.cfg.eps_abs + self.cfg.eps_rel * aty;

            g = g_new;
            p = p_new;
            f = f_new;

            if self.cfg.record_trace {
                trace.push(TraceRow {
                    iteration: it,
                    objective: g_sv.iter().sum(),
                    primal,
                    dual,
                    rho,
                });
            }

            converged = primal <= eps_pri && dual <= eps_dual;
            if converged || it % self.cfg.check_every.max(1) == 0 || it == self.cfg.max_iters {
                if let Some(c) = self.restore(&x) {
                    if best.as_ref().is_none_or(|b| c.objective < b.objective) {
                        best = Some(c);
                    }
                }
            }
            if converged {
                break;
            }

            if self.cfg.adaptive_rho && it % 10 == 0 {
                let factor = if primal > 10.0 * dual {
                    2.0
                } else if dual > 10.0 * primal {
                    0.5
                } else {
                    1.0
                };
                if factor != 1.0 {
                    rho *= factor;
                    u1 /= factor;
                    u2 /= factor;
                    for u in &mut u3 {
                        *u /= Complex64::from(factor);
                    }
                }
            }
        }

        let grid_points = self.spec.points;
        Ok(match best {
            Some(c) => Raw {
                s: c.s,
                h: c.h,
                objective: c.objective,
                residual: c.residual,
                iterations,
                converged,
                feasible: true,
                trace,
                grid_points,
            },
            None => {
                let s = x.columns(0, ns).into_owned();
                let h = (nh > 0).then(|| x.columns(ns, nh).into_owned());
                let mut fit = s.clone() * self.prog.v;
                if let Some(h) = &h {
                    fit += h * self.phi.rows(ns, nh);
                }
                Raw {
                    objective: nuclear_norm(&hankel_of(&s, cs, self.shape)),
                    residual: (self.prog.y - fit).norm(),
                    s,
                    h,
                    iterations,
                    converged: false,
                    feasible: false,
                    trace,
                    grid_points,
                }
            }
        })
    }
}

pub(crate) fn run(prog: &Program, cfg: &SolverConfig, shape: HankelShape, grid_points: usize) -> Result<Raw> {
    Engine::new(prog, cfg, shape, grid_points).run()
}
