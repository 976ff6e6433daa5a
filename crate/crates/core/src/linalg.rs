//! Dense linear-algebra helpers shared by every module.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular-value cutoff used for numerical rank and subspace dimensions.
pub const RANK_TOL: f64 = 1e-8;

/// Relative cutoff applied when forming pseudo-inverses.
pub const PINV_TOL: f64 = 1e-10;

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd<T: ComplexField> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<T>,
}

pub fn svd<T>(m: &DMatrix<T>) -> SortedSvd<T>
where
    T: ComplexField<RealField = f64>,
{
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return SortedSvd {
            u: DMatrix::zeros(m.nrows(), 0),
            singular_values: Vec::new(),
            v_t: DMatrix::zeros(0, m.ncols()),
        };
    }
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let sv = dec.singular_values;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let u_sorted = DMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])].clone());
    let v_sorted = DMatrix::from_fn(k, v_t.ncols(), |r, c| v_t[(order[r], c)].clone());
    SortedSvd {
        u: u_sorted,
        singular_values: order.iter().map(|&i| sv[i]).collect(),
        v_t: v_sorted,
    }
}

pub fn singular_values<T>(m: &DMatrix<T>) -> Vec<f64>
where
    T: ComplexField<RealField = f64>,
{
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

pub fn nuclear_norm<T>(m: &DMatrix<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    singular_values(m).iter().sum()
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn rank_of_values(sv: &[f64], rel_tol: f64) -> usize {
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

pub fn numerical_rank<T>(m: &DMatrix<T>) -> usize
where
    T: ComplexField<RealField = f64>,
{
    rank_of_values(&singular_values(m), RANK_TOL)
}

/// Ratio sigma_max / sigma_min over the leading `min(rows, cols)` values.
pub fn condition_number(sv: &[f64]) -> f64 {
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Moore-Penrose pseudo-inverse, dropping singular values below `rel_tol * sigma_max`.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let dec = svd(m);
    let top = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut out = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if top > 0.0 && s > rel_tol * top {
            let vk = dec.v_t.row(k).transpose();
            let uk = dec.u.column(k);
            out += (vk * uk.transpose()) / s;
        }
    }
    out
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.clone().complex_eigenvalues().iter().copied().collect()
}

/// Greedy nearest matching distance between two eigenvalue multisets of equal size.
///
/// Returns the largest distance in an optimal assignment, found by brute force for
/// small sets and greedily otherwise.
pub fn eigenvalue_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    if a.len() <= 7 {
        let mut idx: Vec<usize> = (0..b.len()).collect();
        let mut best = f64::INFINITY;
        permute(&mut idx, 0, &mut |perm| {
            let worst = a
                .iter()
                .zip(perm)
                .map(|(x, &j)| (x - b[j]).norm())
                .fold(0.0, f64::max);
            if worst < best {
                best = worst;
            }
        });
        best
    } else {
        let mut used = vec![false; b.len()];
        let mut worst = 0.0f64;
        for x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, y)| (j, (x - y).norm()))
                .fold((usize::MAX, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }
}

fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Real part of `tr(A^H B)`, the Frobenius inner product for real and complex matrices.
pub fn frob_inner_c(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

pub fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn column(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}
