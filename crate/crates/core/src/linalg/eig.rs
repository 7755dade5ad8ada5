//! General (non-Hermitian) complex eigendecomposition.
//!
//! Householder reduction to upper Hessenberg form, then single-shift
//! complex QR iteration (Wilkinson shift, Givens rotations) to the complex
//! Schur form `A = Z·T·Z†`. Right eigenvectors come from back-substitution
//! on `T`; left eigenvectors are the conjugated rows of the inverse of the
//! right-eigenvector matrix, which makes the pairs biorthonormal by
//! construction whenever that matrix is invertible.
//!
//! Defective or ill-conditioned eigenpairs are flagged, not repaired.

use crate::error::LinalgError;
use crate::linalg::lu::LuFactorization;
use crate::matrix::{inner, vec_norm, ComplexMatrix, C64, ONE, ZERO};

/// Pairs whose biorthogonality residual exceeds this are flagged.
pub const BIORTHOGONALITY_TOL: f64 = 1e-6;
/// Relative eigen-residual tolerance.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Eigenvalue condition numbers above this are flagged.
pub const CONDITION_LIMIT: f64 = 1e8;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenFlag {
    /// The right-eigenvector matrix could not be inverted.
    SingularEigenbasis,
    BiorthogonalityResidual,
    EigenResidual,
    IllConditioned,
}

/// Numerical-quality record for one eigenpair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDiagnostics {
    /// `‖A·r − λ·r‖ / ‖A‖` with `‖r‖ = 1`.
    pub right_residual: f64,
    /// `‖l†·A − λ·l†‖ / (‖A‖·‖l‖)`.
    pub left_residual: f64,
    /// `max_j |l_i†·r_j − δ_ij|`.
    pub biorthogonality_residual: f64,
    /// Eigenvalue condition number `‖l‖·‖r‖ / |l†·r|`.
    pub condition: f64,
    pub flag: Option<EigenFlag>,
}

impl PairDiagnostics {
    pub fn is_flagged(&self) -> bool {
        self.flag.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors, `A·r_i = λ_i·r_i`.
    pub right_vectors: Vec<Vec<C64>>,
    /// Left eigenvectors normalized so that `l_i†·r_j = δ_ij`.
    pub left_vectors: Vec<Vec<C64>>,
    pub condition_flags: Vec<PairDiagnostics>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// True when no eigenpair carries a flag.
    pub fn is_diagonalizable(&self) -> bool {
        self.condition_flags.iter().all(|d| !d.is_flagged())
    }

    pub fn flagged_pairs(&self) -> Vec<usize> {
        self.condition_flags
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_flagged())
            .map(|(i, _)| i)
            .collect()
    }

    /// `Σ_i λ_i·r_i·l_i†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.right_vectors.first().map_or(0, Vec::len);
        let mut out = ComplexMatrix::zeros(n, n);
        for ((lambda, r), l) in self
            .eigenvalues
            .iter()
            .zip(&self.right_vectors)
            .zip(&self.left_vectors)
        {
            out += &ComplexMatrix::outer(r, l).scale(*lambda);
        }
        out
    }

    /// Reorders all eigenpairs by a key on the eigenvalue.
    pub fn sort_by(&mut self, mut cmp: impl FnMut(&C64, &C64) -> std::cmp::Ordering) {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| cmp(&self.eigenvalues[a], &self.eigenvalues[b]));
        self.eigenvalues = idx.iter().map(|&i| self.eigenvalues[i]).collect();
        self.right_vectors = idx.iter().map(|&i| self.right_vectors[i].clone()).collect();
        self.left_vectors = idx.iter().map(|&i| self.left_vectors[i].clone()).collect();
        self.condition_flags = idx.iter().map(|&i| self.condition_flags[i].clone()).collect();
    }
}

/// Full eigendecomposition of a square complex matrix.
pub fn eig_general(a: &ComplexMatrix) -> Result<SpectralDecomposition, LinalgError> {
    let n = a.require_square()?;
    if !a.all_finite() {
        return Err(LinalgError::NonFinite);
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: Vec::new(),
            right_vectors: Vec::new(),
            left_vectors: Vec::new(),
            condition_flags: Vec::new(),
        });
    }

    let (mut t, mut z) = hessenberg(a);
    schur_qr(&mut t, &mut z)?;
    let eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();

    let right_vectors: Vec<Vec<C64>> = (0..n)
        .map(|k| {
            let x = triangular_right_vector(&t, k);
            let mut r = z.mul_vec(&x);
            normalize_with_phase(&mut r);
            r
        })
        .collect();

    let rmat = ComplexMatrix::from_fn(n, n, |i, j| right_vectors[j][i]);
    let (left_vectors, singular) = match LuFactorization::new(&rmat) {
        Ok(lu) => {
            let w = lu.inverse();
            let left = (0..n)
                .map(|i| w.row(i).iter().map(|z| z.conj()).collect())
                .collect();
            (left, false)
        }
        Err(LinalgError::Singular { .. }) => (schur_left_vectors(&t, &z, &right_vectors), true),
        Err(e) => return Err(e),
    };

    let norm_a = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let condition_flags = (0..n)
        .map(|i| {
            diagnose(
                a,
                norm_a,
                eigenvalues[i],
                i,
                &right_vectors,
                &left_vectors[i],
                singular,
            )
        })
        .collect();

    Ok(SpectralDecomposition {
        eigenvalues,
        right_vectors,
        left_vectors,
        condition_flags,
    })
}

/// Eigenvalues only, via the same Schur iteration.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>, LinalgError> {
    let n = a.require_square()?;
    if !a.all_finite() {
        return Err(LinalgError::NonFinite);
    }
    let (mut t, mut z) = hessenberg(a);
    schur_qr(&mut t, &mut z)?;
    Ok((0..n).map(|k| t[(k, k)]).collect())
}

fn diagnose(
    a: &ComplexMatrix,
    norm_a: f64,
    lambda: C64,
    i: usize,
    rights: &[Vec<C64>],
    l: &[C64],
    singular: bool,
) -> PairDiagnostics {
    let r = &rights[i];
    let ar = a.mul_vec(r);
    let right_residual = ar
        .iter()
        .zip(r)
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / norm_a;

    let l_norm = vec_norm(l);
    let la = a.vec_mul(l);
    let left_residual = if l_norm > 0.0 {
        la.iter()
            .zip(l)
            .map(|(x, y)| (x - lambda * y.conj()).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / (norm_a * l_norm)
    } else {
        f64::INFINITY
    };

    let biorthogonality_residual = rights
        .iter()
        .enumerate()
        .map(|(j, rj)| {
            let target = if i == j { ONE } else { ZERO };
            (inner(l, rj) - target).norm()
        })
        .fold(0.0, f64::max);

    let overlap = inner(l, r).norm();
    let condition = if overlap > 0.0 {
        l_norm * vec_norm(r) / overlap
    } else {
        f64::INFINITY
    };

    let flag = if singular {
        Some(EigenFlag::SingularEigenbasis)
    } else if exceeds(biorthogonality_residual, BIORTHOGONALITY_TOL) {
        Some(EigenFlag::BiorthogonalityResidual)
    } else if exceeds(right_residual, RESIDUAL_TOL) || exceeds(left_residual, RESIDUAL_TOL) {
        Some(EigenFlag::EigenResidual)
    } else if exceeds(condition, CONDITION_LIMIT) {
        Some(EigenFlag::IllConditioned)
    } else {
        None
    };

    PairDiagnostics {
        right_residual,
        left_residual,
        biorthogonality_residual,
        condition,
        flag,
    }
}

/// Householder reduction `A = Z·H·Z†` with `H` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = ComplexMatrix::identity(n);
    if n < 3 {
        return (h, z);
    }
    for k in 0..n - 2 {
        let tail_sq: f64 = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = (x0.norm_sqr() + tail_sq).sqrt();
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] += phase * alpha;
        let beta: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let scale = 2.0 / beta;

        // H <- P·H with P = I - 2vv†/β acting on rows k+1..n.
        for j in 0..n {
            let s: C64 = v
                .iter()
                .enumerate()
                .map(|(m, vm)| vm.conj() * h[(k + 1 + m, j)])
                .sum();
            let s = s * scale;
            for (m, vm) in v.iter().enumerate() {
                h[(k + 1 + m, j)] -= vm * s;
            }
        }
        // H <- H·P and Z <- Z·P on columns k+1..n.
        for target in [&mut h, &mut z] {
            for i in 0..n {
                let s: C64 = v
                    .iter()
                    .enumerate()
                    .map(|(m, vm)| target[(i, k + 1 + m)] * vm)
                    .sum();
                let s = s * scale;
                for (m, vm) in v.iter().enumerate() {
                    target[(i, k + 1 + m)] -= s * vm.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, z)
}

/// Givens rotation `G` with `G†·(a, b)ᵀ = (r, 0)ᵀ`, stored as `(c, s)`.
fn givens(a: C64, b: C64) -> (C64, C64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (ONE, ZERO)
    } else {
        (a / r, b / r)
    }
}

/// Single-shift complex QR iteration to Schur form, in place.
fn schur_qr(h: &mut ComplexMatrix, z: &mut ComplexMatrix) -> Result<(), LinalgError> {
    let n = h.rows();
    let norm = h.frobenius_norm();
    if n < 2 || norm == 0.0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rotations: Vec<(C64, C64)> = Vec::with_capacity(n);

    while hi > 0 {
        // Locate the top of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let mut tst = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if tst == 0.0 {
                tst = norm;
            }
            if h[(lo, lo - 1)].norm() <= eps * tst {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE * (hi - lo + 1) {
            let converged = (hi + 1..n).map(|k| h[(k, k)]).collect();
            return Err(LinalgError::NoConvergence {
                iterations: total,
                converged,
            });
        }

        let shift = if iter.is_multiple_of(10) {
            h[(hi, hi)] + 1.5 * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c.conj() * x + s.conj() * y;
                h[(k + 1, j)] = -s * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            for i in 0..=(k + 1) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s;
                h[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s;
                z[(i, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

// Complex division squares the denominator, so keep the floor well above
// the underflow threshold.
fn small_pivot(t: &ComplexMatrix) -> f64 {
    (f64::EPSILON * t.frobenius_norm()).max(1e-150)
}

/// Solves `(T − λ_k)·x = 0` with `x_k = 1` and `x_j = 0` for `j > k`.
fn triangular_right_vector(t: &ComplexMatrix, k: usize) -> Vec<C64> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let smin = small_pivot(t);
    let mut x = vec![ZERO; n];
    x[k] = ONE;
    for j in (0..k).rev() {
        let s: C64 = (j + 1..=k).map(|m| t[(j, m)] * x[m]).sum();
        let mut denom = t[(j, j)] - lambda;
        if denom.norm() < smin {
            denom = C64::new(smin, 0.0);
        }
        x[j] = -s / denom;
        let big = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 1e150 {
            x.iter_mut().for_each(|z| *z /= big);
        }
    }
    x
}

/// Left eigenvectors from `T†·y = conj(λ)·y`, used when the
/// right-eigenvector matrix is singular.
fn schur_left_vectors(t: &ComplexMatrix, z: &ComplexMatrix, rights: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = t.rows();
    let smin = small_pivot(t);
    (0..n)
        .map(|k| {
            let lambda = t[(k, k)];
            let mut y = vec![ZERO; n];
            y[k] = ONE;
            for j in k + 1..n {
                // Row j of T†y: Σ_m conj(T[m, j]) y_m over m in k..j.
                let s: C64 = (k..j).map(|m| t[(m, j)].conj() * y[m]).sum();
                let mut denom = (t[(j, j)] - lambda).conj();
                if denom.norm() < smin {
                    denom = C64::new(smin, 0.0);
                }
                y[j] = -s / denom;
                let big = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if big > 1e150 {
                    y.iter_mut().for_each(|z| *z /= big);
                }
            }
            let mut l = z.mul_vec(&y);
            let overlap = inner(&l, &rights[k]);
            if overlap.norm() > 0.0 {
                let s = overlap.conj().inv();
                l.iter_mut().for_each(|z| *z *= s);
            }
            l
        })
        .collect()
}

/// Unit norm, largest-modulus component real and positive.
fn normalize_with_phase(v: &mut [C64]) {
    let norm = vec_norm(v);
    if norm == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .copied()
        .fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
    let phase = pivot.conj() / pivot.norm();
    v.iter_mut().for_each(|z| *z = *z * phase / norm);
}

/// NaN counts as exceeding.
fn exceeds(x: f64, tol: f64) -> bool {
    x.is_nan() || x > tol
}
