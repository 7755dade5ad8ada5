//! Density matrices, observables and measurement statistics.

use crate::error::StateError;
use crate::linalg::eigh;
use crate::matrix::{vec_norm, ComplexMatrix, C64};

/// Default absolute tolerance for state validation.
pub const STATE_TOL: f64 = 1e-10;

/// Input vectors within this distance of unit norm are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-8;

/// A validated quantum state: unit trace, Hermitian, positive semidefinite.
///
/// `factor_dims` declares the tensor-product structure used by
/// [`partial_trace`] and [`crate::channels::partial_transpose`]; it defaults
/// to the trivial factorization `[d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    factor_dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates with the default tolerance and trivial factorization.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        let d = matrix.rows();
        validate(matrix, &[d], STATE_TOL)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &[C64]) -> Result<Self, StateError> {
        from_pure(psi)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
            factor_dims: vec![d],
        }
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(d: usize, k: usize) -> Self {
        Self {
            matrix: ComplexMatrix::unit(d, k, k),
            factor_dims: vec![d],
        }
    }

    /// Re-declares the tensor factorization.
    pub fn with_factors(mut self, factor_dims: &[usize]) -> Result<Self, StateError> {
        check_factors(factor_dims, self.dim())?;
        self.factor_dims = factor_dims.to_vec();
        Ok(self)
    }

    /// `self ⊗ other`, with the factor lists concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let matrix = crate::matrix::tensor_product(&self.matrix, &other.matrix)
            .expect("state dimensions are small");
        let mut factor_dims = self.factor_dims.clone();
        factor_dims.extend_from_slice(&other.factor_dims);
        Self {
            matrix,
            factor_dims,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.matrix).map(|e| e.min()).unwrap_or(f64::NAN)
    }
}

/// A Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        matrix.require_square()?;
        let residual = matrix.hermiticity_residual();
        if residual > STATE_TOL {
            return Err(StateError::Hermiticity { residual });
        }
        Ok(Self { matrix })
    }

    /// The population observable `|k⟩⟨k|`.
    pub fn population(d: usize, k: usize) -> Self {
        Self {
            matrix: ComplexMatrix::unit(d, k, k),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

fn check_factors(factor_dims: &[usize], d: usize) -> Result<(), StateError> {
    let product = factor_dims
        .iter()
        .try_fold(1usize, |acc, &f| acc.checked_mul(f));
    if factor_dims.is_empty() || product != Some(d) {
        return Err(StateError::FactorMismatch {
            factors: factor_dims.to_vec(),
            dim: d,
        });
    }
    Ok(())
}

/// `|ψ⟩⟨ψ|` for a (nearly) unit vector.
pub fn from_pure(psi: &[C64]) -> Result<DensityMatrix, StateError> {
    let norm = vec_norm(psi);
    if norm == 0.0 || psi.is_empty() {
        return Err(StateError::ZeroVector);
    }
    if (norm - 1.0).abs() > RENORMALIZE_TOL {
        return Err(StateError::NotNormalized { norm });
    }
    let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    Ok(DensityMatrix {
        matrix: ComplexMatrix::outer(&unit, &unit),
        factor_dims: vec![psi.len()],
    })
}

/// Checks every state invariant and reports the first violation.
///
/// Order: trace, Hermiticity, positivity, purity bounds.
pub fn validate(m: ComplexMatrix, factor_dims: &[usize], tol: f64) -> Result<DensityMatrix, StateError> {
    let d = m.require_square()?;
    check_factors(factor_dims, d)?;
    if !m.all_finite() {
        return Err(crate::error::LinalgError::NonFinite.into());
    }

    let tr = m.trace();
    let residual = (tr - 1.0).norm();
    if residual > tol {
        return Err(StateError::Trace { trace: tr.re, residual });
    }

    let herm = m.hermiticity_residual();
    if herm > tol {
        return Err(StateError::Hermiticity { residual: herm });
    }

    let lowest = eigh(&m)?.min();
    if lowest < -tol {
        return Err(StateError::Positivity { eigenvalue: lowest });
    }

    let p = trace_of_product(&m, &m).re;
    if p < 1.0 / d as f64 - tol || p > 1.0 + tol {
        return Err(StateError::Purity { purity: p, dim: d });
    }

    Ok(DensityMatrix {
        matrix: m,
        factor_dims: factor_dims.to_vec(),
    })
}

/// `Tr[A·B]` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.cols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `Tr[ρ²]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    trace_of_product(&rho.matrix, &rho.matrix).re
}

/// Reduced state on factor `keep`, tracing out every other factor.
/// Subsystems are indexed from 0.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix, StateError> {
    let dims = rho.factor_dims();
    if dims.len() < 2 {
        return Err(StateError::Unfactorized {
            factors: dims.to_vec(),
        });
    }
    if keep >= dims.len() {
        return Err(StateError::SubsystemOutOfRange {
            index: keep,
            count: dims.len(),
        });
    }
    // View the index as (left, kept, right) with row-major strides.
    let left: usize = dims[..keep].iter().product();
    let dk = dims[keep];
    let right: usize = dims[keep + 1..].iter().product();
    let m = rho.matrix();
    let reduced = ComplexMatrix::from_fn(dk, dk, |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..left {
            for r in 0..right {
                let i = (l * dk + a) * right + r;
                let j = (l * dk + b) * right + r;
                acc += m[(i, j)];
            }
        }
        acc
    });
    Ok(DensityMatrix {
        matrix: reduced,
        factor_dims: vec![dk],
    })
}

/// `Tr[O·ρ]`, with the imaginary residue checked.
pub fn expectation(obs: &Observable, rho: &DensityMatrix) -> Result<f64, StateError> {
    if obs.dim() != rho.dim() {
        return Err(StateError::DimensionMismatch {
            expected: rho.dim(),
            got: obs.dim(),
        });
    }
    let value = trace_of_product(obs.matrix(), rho.matrix());
    if value.im.abs() > STATE_TOL {
        return Err(StateError::Hermiticity {
            residual: value.im.abs(),
        });
    }
    Ok(value.re)
}

/// `⟨a|ρ|a⟩` for a unit vector `|a⟩`.
pub fn measurement_probability(projector_state: &[C64], rho: &DensityMatrix) -> Result<f64, StateError> {
    if projector_state.len() != rho.dim() {
        return Err(StateError::DimensionMismatch {
            expected: rho.dim(),
            got: projector_state.len(),
        });
    }
    let norm = vec_norm(projector_state);
    if (norm - 1.0).abs() > RENORMALIZE_TOL {
        return Err(StateError::NotNormalized { norm });
    }
    let rho_a = rho.matrix().mul_vec(projector_state);
    Ok(crate::matrix::inner(projector_state, &rho_a).re)
}
