//! One-sided (Hestenes) Jacobi SVD and numerical null spaces.
//!
//! Singular values come out with high relative accuracy, which is what
//! the kernel threshold `σ ≤ tol·σ_max` needs; squaring into `A†A` would
//! lose everything below `sqrt(ε)·σ_max`.

use crate::error::LinalgError;
use crate::matrix::{ComplexMatrix, C64};

const MAX_SWEEPS: usize = 80;

#[derive(Clone, Debug)]
pub struct Svd {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Column `k` is the right singular vector for `singular_values[k]`.
    pub right_vectors: ComplexMatrix,
}

impl Svd {
    pub fn largest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Singular values and right singular vectors of a square or tall matrix.
pub fn svd(a: &ComplexMatrix) -> Result<Svd, LinalgError> {
    if !a.all_finite() {
        return Err(LinalgError::NonFinite);
    }
    let m = a.rows();
    let n = a.cols();
    if m < n {
        return Err(LinalgError::ShapeMismatch {
            op: "svd (needs rows >= cols)",
            left: (m, n),
            right: (m, n),
        });
    }
    // Work column-major: cols[j] is column j of the evolving U·Σ.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n).map(|j| crate::matrix::basis_vector(n, j)).collect();
    let eps = f64::EPSILON;
    // Pairs of columns that are both at roundoff level relative to `A` are
    // already orthogonal for every purpose; rotating them never settles.
    let floor = eps * eps * a.frobenius_norm().powi(2);

    let mut sweep = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let mag = gamma.norm();
                if mag <= floor || mag <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / mag).conj();
                let theta = (beta - alpha) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_pair(&mut cols, p, q, c, s, phase_conj);
                rotate_pair(&mut v, p, q, c, s, phase_conj);
            }
        }
        if !rotated {
            break;
        }
        sweep += 1;
        if sweep > MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                iterations: sweep,
                converged: Vec::new(),
            });
        }
    }

    let sigma: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let singular_values = order.iter().map(|&k| sigma[k]).collect();
    let right_vectors = ComplexMatrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok(Svd {
        singular_values,
        right_vectors,
    })
}

fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase_conj: C64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = xp * c - yq * phase_conj * s;
        *y = xp * s + yq * phase_conj * c;
    }
}

/// Orthonormal basis of `{v : ‖A·v‖ ≤ tol·‖A‖₂}` from singular-value
/// thresholding.
pub fn null_space(a: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<C64>>, LinalgError> {
    a.require_square()?;
    let dec = svd(a)?;
    let cutoff = tol * dec.largest();
    Ok(dec
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, _)| dec.right_vectors.col(k))
        .collect())
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64, LinalgError> {
    if a.rows() >= a.cols() {
        Ok(svd(a)?.largest())
    } else {
        Ok(svd(&a.adjoint())?.largest())
    }
}
