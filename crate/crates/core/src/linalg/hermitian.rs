//! Cyclic Jacobi eigensolver for Hermitian matrices.

use crate::error::LinalgError;
use crate::matrix::{ComplexMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.col(k)
    }
}

/// Eigendecomposition of the Hermitian part `(A + A†)/2` of `a`.
pub fn eigh(a: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = a.require_square()?;
    if !a.all_finite() {
        return Err(LinalgError::NonFinite);
    }
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let total = m.frobenius_norm();
    let target = f64::EPSILON * total;

    let mut sweep = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| m[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target || off == 0.0 {
            break;
        }
        sweep += 1;
        if sweep > MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                iterations: sweep,
                converged: Vec::new(),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s, phase);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Applies `J = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]]` on indices `(p, q)`:
/// `M ← J†·M·J`, `V ← V·J`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let n = m.rows();
    let ph_conj = phase.conj();
    for k in 0..n {
        let x = m[(k, p)];
        let y = m[(k, q)];
        m[(k, p)] = x * c - y * ph_conj * s;
        m[(k, q)] = x * s + y * ph_conj * c;
    }
    for k in 0..n {
        let x = m[(p, k)];
        let y = m[(q, k)];
        m[(p, k)] = x * c - y * phase * s;
        m[(q, k)] = x * s + y * phase * c;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    for k in 0..n {
        let x = v[(k, p)];
        let y = v[(k, q)];
        v[(k, p)] = x * c - y * ph_conj * s;
        v[(k, q)] = x * s + y * ph_conj * c;
    }
}
