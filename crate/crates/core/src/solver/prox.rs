//! Closed-form proximal operators and projections.

use nalgebra::{ComplexField, DMatrix};

use crate::linalg::svd;

/// Singular value thresholding: `U max(S - tau, 0) V^T`, the prox of `tau |.|_*`.
pub fn svt(x: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    svt_with_values(x, tau).0
}

/// [`svt`] that also returns the thresholded singular values.
pub fn svt_with_values(x: &DMatrix<f64>, tau: f64) -> (DMatrix<f64>, Vec<f64>) {
    let dec = svd(x);
    let shrunk: Vec<f64> = dec.singular_values.iter().map(|s| (s - tau).max(0.0)).collect();
    (reassemble(dec.u, &shrunk, &dec.v_t, x.shape()), shrunk)
}

fn reassemble<T>(mut u: DMatrix<T>, values: &[f64], v_t: &DMatrix<T>, shape: (usize, usize)) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    let keep = values.iter().take_while(|&&s| s > 0.0).count();
    if keep == 0 {
        return DMatrix::zeros(shape.0, shape.1);
    }
    for (k, &s) in values.iter().enumerate().take(keep) {
        u.column_mut(k).scale_mut(s);
    }
    u.columns(0, keep) * v_t.rows(0, keep)
}

/// Euclidean projection of a nonnegative, descending vector onto
/// `{x >= 0 : sum x <= radius}`.
pub fn project_l1_ball(values: &[f64], radius: f64) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    if total <= radius {
        return values.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; values.len()];
    }
    // water-filling threshold over the descending prefix
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cum += s;
        let candidate = (cum - radius) / (k + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    values.iter().map(|s| (s - theta).max(0.0)).collect()
}

/// Nearest matrix (Frobenius) with nuclear norm at most `radius`.
pub fn project_nuclear_ball<T>(x: &DMatrix<T>, radius: f64) -> DMatrix<T>
where
    T: ComplexField<RealField = f64>,
{
    project_nuclear_ball_with_values(x, radius).0
}

/// [`project_nuclear_ball`] that also returns the singular values of the input.
pub fn project_nuclear_ball_with_values<T>(x: &DMatrix<T>, radius: f64) -> (DMatrix<T>, Vec<f64>)
where
    T: ComplexField<RealField = f64>,
{
    if radius <= 0.0 {
        return (DMatrix::zeros(x.nrows(), x.ncols()), crate::linalg::singular_values(x));
    }
    let dec = svd(x);
    let total: f64 = dec.singular_values.iter().sum();
    if total <= radius {
        return (x.clone(), dec.singular_values);
    }
    let projected = project_l1_ball(&dec.singular_values, radius);
    (reassemble(dec.u, &projected, &dec.v_t, x.shape()), dec.singular_values)
}

/// `x` if it lies within `radius` of `center`, else its radial projection onto that sphere.
pub fn project_frobenius_ball(x: &DMatrix<f64>, center: &DMatrix<f64>, radius: f64) -> DMatrix<f64> {
    let offset = x - center;
    let dist = offset.norm();
    if dist <= radius {
        x.clone()
    } else {
        center + offset * (radius.max(0.0) / dist)
    }
}
