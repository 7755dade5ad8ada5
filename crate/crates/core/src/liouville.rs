//! Lindblad models and their Liouville-space representation.
//!
//! Vectorization is row-major: component `i·d + j` of `|ρ⟩⟩` holds `ρ_ij`,
//! so a qubit maps to `(ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁)`. With this ordering
//! `vec(A·ρ·B) = (A ⊗ Bᵀ)·vec(ρ)`, and the generator
//!
//! ```text
//! ρ̇ = −i[H, ρ] + Σ_k Γ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})
//! ```
//!
//! becomes the matrix
//!
//! ```text
//! L̃ = −i(H⊗I − I⊗Hᵀ) + Σ_k Γ_k [L_k⊗conj(L_k) − ½ L_k†L_k⊗I − ½ I⊗(L_k†L_k)ᵀ].
//! ```

use crate::error::{LinalgError, ModelError};
use crate::matrix::{inner, tensor_product, ComplexMatrix, C64, I};
use crate::states::{trace_of_product, DensityMatrix};

/// Hermiticity tolerance for Hamiltonians.
pub const HAMILTONIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperator {
    pub rate: f64,
    pub operator: ComplexMatrix,
}

impl JumpOperator {
    pub fn new(rate: f64, operator: ComplexMatrix) -> Self {
        Self { rate, operator }
    }
}

/// A Hamiltonian plus rate-weighted jump operators (ħ = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    hamiltonian: ComplexMatrix,
    jumps: Vec<JumpOperator>,
    label: Option<String>,
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<JumpOperator>) -> Result<Self, ModelError> {
        let d = hamiltonian.require_square()?;
        if !hamiltonian.all_finite() {
            return Err(ModelError::NonFinite);
        }
        let residual = hamiltonian.hermiticity_residual();
        if residual > HAMILTONIAN_TOL {
            return Err(ModelError::NonHermitianHamiltonian { residual });
        }
        for (index, jump) in jumps.iter().enumerate() {
            if !(jump.rate.is_finite() && jump.rate >= 0.0) {
                return Err(ModelError::InvalidRate {
                    index,
                    rate: jump.rate,
                });
            }
            let op = &jump.operator;
            if op.rows() != d || op.cols() != d {
                return Err(ModelError::JumpDimension {
                    index,
                    shape: (op.rows(), op.cols()),
                    dim: d,
                });
            }
            if !op.all_finite() {
                return Err(ModelError::NonFinite);
            }
        }
        Ok(Self {
            hamiltonian,
            jumps,
            label: None,
        })
    }

    /// Closed dynamics, no jump operators.
    pub fn hamiltonian_only(hamiltonian: ComplexMatrix) -> Result<Self, ModelError> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.rows()
    }

    pub fn has_jumps(&self) -> bool {
        self.jumps.iter().any(|j| j.rate > 0.0)
    }
}

/// A density matrix flattened into Liouville space.
#[derive(Clone, Debug, PartialEq)]
pub struct FLVector {
    data: Vec<C64>,
    dim: usize,
}

impl FLVector {
    pub fn from_vec(data: Vec<C64>, dim: usize) -> Result<Self, LinalgError> {
        if data.len() != dim * dim {
            return Err(LinalgError::VectorLength {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { data, dim })
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `⟨⟨A|B⟩⟩ = Tr[A†B]`.
    pub fn inner(&self, other: &Self) -> C64 {
        inner(&self.data, &other.data)
    }

    /// `⟨⟨I|v⟩⟩`, i.e. the trace of the devectorized matrix.
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }
}

pub fn vectorize(rho: &ComplexMatrix) -> Result<FLVector, LinalgError> {
    let d = rho.require_square()?;
    Ok(FLVector {
        data: rho.data().to_vec(),
        dim: d,
    })
}

pub fn devectorize(v: &FLVector) -> ComplexMatrix {
    ComplexMatrix::from_vec(v.dim, v.dim, v.data.clone()).expect("length checked on construction")
}

/// Matrix of the Lindblad generator acting on row-major `|ρ⟩⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvillianMatrix {
    matrix: ComplexMatrix,
    dim: usize,
    model_label: Option<String>,
}

impl LiouvillianMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Hilbert-space dimension `d`; the matrix is `d²×d²`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model_label(&self) -> Option<&str> {
        self.model_label.as_deref()
    }

    pub fn apply(&self, v: &FLVector) -> FLVector {
        FLVector {
            data: self.matrix.mul_vec(v.data()),
            dim: self.dim,
        }
    }

    /// Largest `|Σ_i L̃[(i·d+i), c]|` over columns `c`; zero for a
    /// trace-preserving generator.
    pub fn trace_residual(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|c| (0..d).map(|i| self.matrix[(i * d + i, c)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

pub fn build_liouvillian(model: &LindbladModel) -> LiouvillianMatrix {
    let d = model.dim();
    let id = ComplexMatrix::identity(d);
    let kron = |a: &ComplexMatrix, b: &ComplexMatrix| {
        tensor_product(a, b).expect("Liouville space dimension fits in memory")
    };
    let h = model.hamiltonian();
    let mut l = (&kron(h, &id) - &kron(&id, &h.transpose())).scale(-I);
    for jump in model.jumps() {
        if jump.rate == 0.0 {
            continue;
        }
        let op = &jump.operator;
        let ldl = &op.adjoint() * op;
        let mut term = kron(op, &op.conj());
        term = &term - &kron(&ldl, &id).scale_real(0.5);
        term = &term - &kron(&id, &ldl.transpose()).scale_real(0.5);
        l += &term.scale_real(jump.rate);
    }
    LiouvillianMatrix {
        matrix: l,
        dim: d,
        model_label: model.label().map(str::to_owned),
    }
}

/// The Lindblad right-hand side evaluated directly on a matrix.
pub fn apply_rhs(model: &LindbladModel, rho: &ComplexMatrix) -> Result<ComplexMatrix, ModelError> {
    let d = model.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(ModelError::StateDimension {
            expected: d,
            got: rho.rows(),
        });
    }
    Ok(rhs_unchecked(model, rho))
}

pub(crate) fn rhs_unchecked(model: &LindbladModel, rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = model.hamiltonian().commutator(rho).scale(-I);
    for jump in model.jumps() {
        if jump.rate == 0.0 {
            continue;
        }
        let op = &jump.operator;
        let op_dag = op.adjoint();
        let ldl = &op_dag * op;
        let sandwich = &(op * rho) * &op_dag;
        let damping = ldl.anticommutator(rho).scale_real(0.5);
        out += &(&sandwich - &damping).scale_real(jump.rate);
    }
    out
}

/// `d/dt Tr[ρ²] = 2·Tr[ρ·ρ̇]`.
pub fn purity_rate(model: &LindbladModel, rho: &DensityMatrix) -> Result<f64, ModelError> {
    let rhs = apply_rhs(model, rho.matrix())?;
    let rate = trace_of_product(rho.matrix(), &rhs) * 2.0;
    debug_assert!(
        rate.im.abs() <= 1e-10 * (1.0 + rhs.max_abs()),
        "purity rate has imaginary part {}",
        rate.im
    );
    Ok(rate.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ONE, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn driven_hamiltonian(e: f64, omega: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, omega], [omega, e]])
    }

    fn sigma_minus() -> ComplexMatrix {
        ComplexMatrix::unit(2, 0, 1)
    }

    #[test]
    fn vectorize_is_row_major() {
        let rho = ComplexMatrix::from_rows(&[[c(0.1, 0.0), c(0.2, 0.3)], [c(0.2, -0.3), c(0.9, 0.0)]]);
        let v = vectorize(&rho).unwrap();
        assert_eq!(v.data(), &[c(0.1, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(0.9, 0.0)]);
        assert_eq!(devectorize(&v), rho);
        let ground = vectorize(&ComplexMatrix::diag_real(&[1.0, 0.0])).unwrap();
        assert_eq!(ground.data(), &[ONE, ZERO, ZERO, ZERO]);
    }

    #[test]
    fn vectorize_errors() {
        assert!(vectorize(&ComplexMatrix::zeros(2, 3)).is_err());
        assert!(FLVector::from_vec(vec![ZERO; 3], 2).is_err());
    }

    #[test]
    fn pure_state_self_overlap() {
        let rho = DensityMatrix::from_pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let v = vectorize(rho.matrix()).unwrap();
        assert!((v.inner(&v) - ONE).norm() < 1e-15);
    }

    #[test]
    fn von_neumann_generator_matches_closed_form() {
        let (e, omega) = (1.0, 1.0);
        let model = LindbladModel::hamiltonian_only(driven_hamiltonian(e, omega)).unwrap();
        let l = build_liouvillian(&model);
        let io = c(0.0, omega);
        let ie = c(0.0, e);
        let expected = ComplexMatrix::from_rows(&[
            [ZERO, io, -io, ZERO],
            [io, ie, ZERO, -io],
            [-io, ZERO, -ie, io],
            [ZERO, -io, io, ZERO],
        ]);
        assert!(l.matrix().max_abs_diff(&expected) <= 1e-14);
    }

    #[test]
    fn decay_contributes_expected_entries() {
        let (e, omega, gamma) = (1.0, 1.0, 0.2);
        let closed = build_liouvillian(&LindbladModel::hamiltonian_only(driven_hamiltonian(e, omega)).unwrap());
        let open = build_liouvillian(
            &LindbladModel::new(
                driven_hamiltonian(e, omega),
                vec![JumpOperator::new(gamma, sigma_minus())],
            )
            .unwrap(),
        );
        let diff = open.matrix() - closed.matrix();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 3)] = c(gamma, 0.0);
        expected[(3, 3)] = c(-gamma, 0.0);
        expected[(1, 1)] = c(-gamma / 2.0, 0.0);
        expected[(2, 2)] = c(-gamma / 2.0, 0.0);
        assert!(diff.max_abs_diff(&expected) <= 1e-14);
        assert!(open.trace_residual() <= 1e-15);
    }

    #[test]
    fn empty_model_gives_zero_generator() {
        let model = LindbladModel::hamiltonian_only(ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(build_liouvillian(&model).matrix(), &ComplexMatrix::zeros(9, 9));
    }

    #[test]
    fn eigenprojector_is_stationary_without_jumps() {
        let h = ComplexMatrix::diag_real(&[0.3, -1.0, 2.0]);
        let model = LindbladModel::hamiltonian_only(h).unwrap();
        let rho = ComplexMatrix::unit(3, 1, 1);
        assert_eq!(apply_rhs(&model, &rho).unwrap(), ComplexMatrix::zeros(3, 3));
    }

    #[test]
    fn explicit_two_level_equations() {
        let (e, omega, gamma) = (0.8, 0.6, 0.3);
        let model = LindbladModel::new(
            driven_hamiltonian(e, omega),
            vec![JumpOperator::new(gamma, sigma_minus())],
        )
        .unwrap();
        let rho = ComplexMatrix::from_rows(&[[c(0.35, 0.0), c(0.1, 0.25)], [c(0.1, -0.25), c(0.65, 0.0)]]);
        let rhs = apply_rhs(&model, &rho).unwrap();
        let (r00, r01, r10, r11) = (rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]);
        let io = c(0.0, omega);
        let ie = c(0.0, e);
        let g = c(gamma, 0.0);
        let d00 = io * r01 - io * r10 + g * r11;
        let d01 = io * r00 + (ie - g / 2.0) * r01 - io * r11;
        let d10 = -io * r00 + (-ie - g / 2.0) * r10 + io * r11;
        let d11 = -io * r01 + io * r10 - g * r11;
        let expected = ComplexMatrix::from_rows(&[[d00, d01], [d10, d11]]);
        assert!(rhs.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn model_validation() {
        let non_herm = ComplexMatrix::unit(2, 0, 1);
        assert!(matches!(
            LindbladModel::hamiltonian_only(non_herm),
            Err(ModelError::NonHermitianHamiltonian { .. })
        ));
        let h = ComplexMatrix::identity(2);
        assert!(matches!(
            LindbladModel::new(h.clone(), vec![JumpOperator::new(-0.1, sigma_minus())]),
            Err(ModelError::InvalidRate { index: 0, .. })
        ));
        assert!(matches!(
            LindbladModel::new(h.clone(), vec![JumpOperator::new(0.1, ComplexMatrix::identity(3))]),
            Err(ModelError::JumpDimension { index: 0, .. })
        ));
        let model = LindbladModel::hamiltonian_only(h).unwrap();
        assert!(matches!(
            apply_rhs(&model, &ComplexMatrix::identity(3)),
            Err(ModelError::StateDimension { .. })
        ));
    }

    #[test]
    fn purity_rate_zero_for_closed_dynamics() {
        let model = LindbladModel::hamiltonian_only(driven_hamiltonian(1.0, 0.7)).unwrap();
        let rho = DensityMatrix::from_pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!(purity_rate(&model, &rho).unwrap().abs() < 1e-15);
    }

    #[test]
    fn purity_rate_of_decay_from_maximally_mixed() {
        // Γ(2Tr[ρσ⁻ρσ⁺] − 2Tr[ρ²σ⁺σ⁻]) at ρ = I/2: 2·(1/4) − 2·(1/4) = 0.
        let model = LindbladModel::new(
            ComplexMatrix::zeros(2, 2),
            vec![JumpOperator::new(0.4, sigma_minus())],
        )
        .unwrap();
        let rate = purity_rate(&model, &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(rate.abs() < 1e-16);
        // From the excited state the decay first mixes: ρ̇₁₁ = −Γ, ρ̇₀₀ = Γ,
        // so d/dt Tr[ρ²] = 2(ρ₀₀ρ̇₀₀ + ρ₁₁ρ̇₁₁) = −2Γ.
        let rate = purity_rate(&model, &DensityMatrix::basis(2, 1)).unwrap();
        assert!((rate + 0.8).abs() < 1e-15);
    }
}
