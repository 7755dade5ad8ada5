//! Quantum channels in Kraus form and their Choi matrices.
//!
//! Convention: a channel acts as `ρ ↦ Σ_l K_l·ρ·K_l†` and is trace
//! preserving iff `Σ_l K_l†·K_l = I`. Writing the map as `Σ_l V_l†·ρ·V_l`
//! with `Σ_l V_l·V_l† = I` is the same thing under `K_l = V_l†`.
//!
//! The Choi matrix uses the unnormalized maximally entangled vector
//! `|Γ⟩ = Σ_i |i⟩⊗|i⟩`, so `C = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` has trace `d` for a
//! trace-preserving map.

use crate::error::{ChannelError, StateError};
use crate::linalg::eigh;
use crate::matrix::ComplexMatrix;
use crate::states::{validate, DensityMatrix, STATE_TOL};

/// Completeness residual at or below which a channel counts as trace preserving.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Relative cutoff below which Choi eigenvalues are dropped as numerical dust.
pub const KRAUS_RELATIVE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<ComplexMatrix>,
    completeness_residual: f64,
}

impl QuantumChannel {
    /// Accepts any non-empty list of equal-sized square operators; trace
    /// preservation is measured, not required.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let first = kraus.first().ok_or(ChannelError::Empty)?;
        let d = first.rows();
        for (index, k) in kraus.iter().enumerate() {
            if k.rows() != d || k.cols() != d {
                return Err(ChannelError::KrausShape {
                    index,
                    shape: (k.rows(), k.cols()),
                    expected: d,
                });
            }
        }
        let completeness_residual = completeness_of(&kraus);
        Ok(Self {
            kraus,
            completeness_residual,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("identity is a valid channel")
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self, ChannelError> {
        Self::new(vec![u])
    }

    /// Qubit amplitude damping with decay probability `p`:
    /// `K₀ = diag(1, √(1−p))`, `K₁ = √p·|0⟩⟨1|`.
    pub fn amplitude_damping(p: f64) -> Self {
        let k0 = ComplexMatrix::diag_real(&[1.0, (1.0 - p).sqrt()]);
        let k1 = ComplexMatrix::unit(2, 0, 1).scale_real(p.sqrt());
        Self::new(vec![k0, k1]).expect("two 2x2 operators")
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].rows()
    }

    pub fn completeness_residual(&self) -> f64 {
        self.completeness_residual
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_residual <= COMPLETENESS_TOL
    }

    /// `Σ_l K_l·X·K_l†` on an arbitrary operator.
    pub fn apply_to_matrix(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        let d = self.dim();
        if x.rows() != d || x.cols() != d {
            return Err(StateError::DimensionMismatch {
                expected: d,
                got: x.rows(),
            }
            .into());
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.kraus {
            out += &(&(k * x) * &k.adjoint());
        }
        Ok(out)
    }
}

fn completeness_of(kraus: &[ComplexMatrix]) -> f64 {
    let d = kraus[0].rows();
    let mut sum = ComplexMatrix::zeros(d, d);
    for k in kraus {
        sum += &(&k.adjoint() * k);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(d))
}

/// Max-norm residual of `Σ_l K_l†·K_l − I`.
pub fn check_completeness(ch: &QuantumChannel) -> f64 {
    ch.completeness_residual
}

/// Applies the channel and re-validates the output state.
pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    let out = ch.apply_to_matrix(rho.matrix())?;
    match validate(out, rho.factor_dims(), STATE_TOL) {
        Ok(state) => Ok(state),
        Err(_) if !ch.is_trace_preserving() => Err(ChannelError::NotTracePreserving {
            residual: ch.completeness_residual,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` of a linear map on `d×d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    matrix: ComplexMatrix,
    source_dim: usize,
}

impl ChoiMatrix {
    /// Builds the Choi matrix of an arbitrary linear map, given as a closure.
    pub fn from_map(d: usize, map: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Self {
        let n = d * d;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                let block = map(&ComplexMatrix::unit(d, i, j));
                for a in 0..d {
                    for b in 0..d {
                        matrix[(i * d + a, j * d + b)] = block[(a, b)];
                    }
                }
            }
        }
        Self {
            matrix,
            source_dim: d,
        }
    }

    /// Wraps an existing `d²×d²` matrix, checking shape and Hermiticity.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self, ChannelError> {
        let n = matrix.require_square()?;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n || d == 0 {
            return Err(ChannelError::ChoiDimension { dim: n });
        }
        let residual = matrix.hermiticity_residual();
        if residual > STATE_TOL {
            return Err(StateError::Hermiticity { residual }.into());
        }
        Ok(Self {
            matrix,
            source_dim: d,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, ChannelError> {
        Ok(eigh(&self.matrix)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64, ChannelError> {
        Ok(eigh(&self.matrix)?.min())
    }

    /// Max-norm residual of `Tr_out C − I`; zero iff the map preserves trace.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.source_dim;
        let reduced = ComplexMatrix::from_fn(d, d, |i, j| {
            (0..d).map(|a| self.matrix[(i * d + a, j * d + a)]).sum()
        });
        reduced.max_abs_diff(&ComplexMatrix::identity(d))
    }

    /// Complete positivity test: smallest eigenvalue `≥ −tol`.
    pub fn is_completely_positive(&self, tol: f64) -> Result<bool, ChannelError> {
        Ok(self.min_eigenvalue()? >= -tol)
    }
}

pub fn choi_matrix(ch: &QuantumChannel) -> ChoiMatrix {
    ChoiMatrix::from_map(ch.dim(), |x| {
        ch.apply_to_matrix(x).expect("basis element has channel dimension")
    })
}

/// Choi matrix of the transposition map `X ↦ Xᵀ` (the swap operator).
pub fn transposition_choi(d: usize) -> ChoiMatrix {
    ChoiMatrix::from_map(d, ComplexMatrix::transpose)
}

/// Kraus operators from the spectral decomposition of a Choi matrix.
///
/// Each eigenpair `(μ, v)` with `μ` above `max(tol, 1e-12·μ_max)` gives
/// `K[a, i] = √μ · v[i·d + a]`. Eigenvalues below `−tol` mean the map is not
/// completely positive.
pub fn kraus_from_choi(c: &ChoiMatrix, tol: f64) -> Result<QuantumChannel, ChannelError> {
    let d = c.source_dim;
    let dec = eigh(&c.matrix)?;
    let lowest = dec.min();
    if lowest < -tol {
        return Err(ChannelError::NegativeChoi { eigenvalue: lowest });
    }
    let cutoff = tol.max(KRAUS_RELATIVE_CUTOFF * dec.max().max(0.0));
    let mut kraus = Vec::new();
    // Largest weights first.
    for k in (0..dec.eigenvalues.len()).rev() {
        let mu = dec.eigenvalues[k];
        if mu <= cutoff {
            continue;
        }
        let v = dec.vector(k);
        let s = mu.sqrt();
        kraus.push(ComplexMatrix::from_fn(d, d, |a, i| v[i * d + a] * s));
    }
    if kraus.is_empty() {
        kraus.push(ComplexMatrix::zeros(d, d));
    }
    QuantumChannel::new(kraus)
}

/// Transposes the indices of one tensor factor of a raw matrix.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    factor_dims: &[usize],
    subsystem: usize,
) -> Result<ComplexMatrix, StateError> {
    let n = m.require_square()?;
    if factor_dims.len() < 2 {
        return Err(StateError::Unfactorized {
            factors: factor_dims.to_vec(),
        });
    }
    if factor_dims.iter().product::<usize>() != n {
        return Err(StateError::FactorMismatch {
            factors: factor_dims.to_vec(),
            dim: n,
        });
    }
    if subsystem >= factor_dims.len() {
        return Err(StateError::SubsystemOutOfRange {
            index: subsystem,
            count: factor_dims.len(),
        });
    }
    let dk = factor_dims[subsystem];
    let right: usize = factor_dims[subsystem + 1..].iter().product();
    // Digit of the chosen factor inside a flat index, and the index with
    // that digit replaced.
    let digit = |idx: usize| (idx / right) % dk;
    let replace = |idx: usize, new: usize| idx - digit(idx) * right + new * right;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let (di, dj) = (digit(i), digit(j));
        m[(replace(i, dj), replace(j, di))]
    }))
}

/// Partial transpose of a state on one declared factor. The result is
/// Hermitian but may fail positivity, so it is returned as a raw matrix.
pub fn partial_transpose(rho: &DensityMatrix, subsystem: usize) -> Result<ComplexMatrix, StateError> {
    partial_transpose_matrix(rho.matrix(), rho.factor_dims(), subsystem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{tensor_product, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn choi_trace_preservation_residual() {
        assert!(transposition_choi(3).trace_preservation_residual() < 1e-15);
        assert!(choi_matrix(&QuantumChannel::amplitude_damping(0.3)).trace_preservation_residual() < 1e-15);
        let lossy = QuantumChannel::new(vec![ComplexMatrix::unit(2, 0, 0)]).unwrap();
        assert!((choi_matrix(&lossy).trace_preservation_residual() - 1.0).abs() < 1e-15);
    }

    /// Bell projector without the 1/2 prefactor.
    fn unnormalized_bell_matrix() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 1.0, 0.0],
            [0.0, 1.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = DensityMatrix::from_pure(&[c(0.6), C64::new(0.0, 0.8)]).unwrap();
        let out = apply_channel(&QuantumChannel::identity(2), &rho).unwrap();
        assert_eq!(out, rho);
        assert_eq!(check_completeness(&QuantumChannel::identity(2)), 0.0);
    }

    #[test]
    fn unitary_channel_preserves_purity() {
        let u = ComplexMatrix::from_rows(&[
            [c(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2)],
            [C64::new(0.0, FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
        ]);
        let ch = QuantumChannel::unitary(u.clone()).unwrap();
        assert!(ch.completeness_residual() <= 1e-15);
        let rho = DensityMatrix::from_pure(&[c(0.6), c(0.8)]).unwrap();
        let out = apply_channel(&ch, &rho).unwrap();
        let expected = &(&u * rho.matrix()) * &u.adjoint();
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
        assert!((out.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn amplitude_damping_on_excited_state() {
        let p = 0.3;
        let ch = QuantumChannel::amplitude_damping(p);
        assert!(check_completeness(&ch) <= 1e-15);
        let out = apply_channel(&ch, &DensityMatrix::basis(2, 1)).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::diag_real(&[p, 1.0 - p])) < 1e-15);
    }

    #[test]
    fn lone_lowering_operator_is_not_trace_preserving() {
        let ch = QuantumChannel::new(vec![ComplexMatrix::unit(2, 0, 1)]).unwrap();
        assert_eq!(check_completeness(&ch), 1.0);
        let rho = DensityMatrix::basis(2, 0);
        assert!(matches!(
            apply_channel(&ch, &rho),
            Err(ChannelError::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn empty_and_ragged_kraus_rejected() {
        assert_eq!(QuantumChannel::new(vec![]), Err(ChannelError::Empty));
        assert!(matches!(
            QuantumChannel::new(vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)]),
            Err(ChannelError::KrausShape { index: 1, .. })
        ));
    }

    #[test]
    fn identity_choi_is_gamma_projector() {
        let choi = choi_matrix(&QuantumChannel::identity(2));
        let mut expected = ComplexMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(i, j)] = c(1.0);
        }
        assert_eq!(choi.matrix(), &expected);
        let ev = choi.eigenvalues().unwrap();
        for (a, b) in ev.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn transposition_choi_has_minus_one() {
        let choi = transposition_choi(2);
        assert!((choi.min_eigenvalue().unwrap() + 1.0).abs() < 1e-12);
        assert!(!choi.is_completely_positive(1e-10).unwrap());
    }

    #[test]
    fn depolarizing_choi_is_scaled_identity() {
        let d = 3;
        let choi = ChoiMatrix::from_map(d, |x| ComplexMatrix::identity(d).scale(x.trace() / d as f64));
        let expected = ComplexMatrix::identity(d * d).scale_real(1.0 / d as f64);
        assert!(choi.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(choi.is_completely_positive(1e-10).unwrap());
    }

    #[test]
    fn kraus_from_identity_choi() {
        let ch = kraus_from_choi(&choi_matrix(&QuantumChannel::identity(2)), 1e-10).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let k = &ch.kraus()[0];
        let phase = k[(0, 0)] / k[(0, 0)].norm();
        assert!(k.scale(phase.conj()).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn kraus_from_amplitude_damping_round_trip() {
        let original = QuantumChannel::amplitude_damping(0.37);
        let rebuilt = kraus_from_choi(&choi_matrix(&original), 1e-10).unwrap();
        assert_eq!(rebuilt.kraus().len(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let e = ComplexMatrix::unit(2, i, j);
                let a = original.apply_to_matrix(&e).unwrap();
                let b = rebuilt.apply_to_matrix(&e).unwrap();
                assert!(a.max_abs_diff(&b) <= 1e-9);
            }
        }
    }

    #[test]
    fn kraus_from_transposition_fails() {
        assert!(matches!(
            kraus_from_choi(&transposition_choi(2), 1e-10),
            Err(ChannelError::NegativeChoi { .. })
        ));
    }

    #[test]
    fn unnormalized_bell_partial_transpose() {
        let pt = partial_transpose_matrix(&unnormalized_bell_matrix(), &[2, 2], 1).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]);
        assert_eq!(pt, expected);
        assert!((eigh(&pt).unwrap().min() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_bell_partial_transpose_is_not_a_state() {
        let psi = [c(0.0), c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), c(0.0)];
        let rho = DensityMatrix::from_pure(&psi).unwrap().with_factors(&[2, 2]).unwrap();
        assert!(rho.matrix().max_abs_diff(&unnormalized_bell_matrix().scale_real(0.5)) < 1e-15);
        let pt = partial_transpose(&rho, 1).unwrap();
        assert!(pt.is_hermitian(1e-15));
        match validate(pt, &[2, 2], STATE_TOL) {
            Err(StateError::Positivity { eigenvalue }) => assert!((eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn product_state_partial_transpose() {
        let a = ComplexMatrix::from_rows(&[[c(0.7), C64::new(0.1, 0.2)], [C64::new(0.1, -0.2), c(0.3)]]);
        let b = ComplexMatrix::from_rows(&[[c(0.4), C64::new(0.0, 0.3)], [C64::new(0.0, -0.3), c(0.6)]]);
        let rho = validate(tensor_product(&a, &b).unwrap(), &[2, 2], STATE_TOL).unwrap();
        let pt = partial_transpose(&rho, 1).unwrap();
        let expected = tensor_product(&a, &b.transpose()).unwrap();
        assert!(pt.max_abs_diff(&expected) < 1e-15);
        assert!(eigh(&pt).unwrap().min() >= -1e-12);
        let first = partial_transpose(&rho, 0).unwrap();
        assert!(first.max_abs_diff(&tensor_product(&a.transpose(), &b).unwrap()) < 1e-15);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let m = ComplexMatrix::from_fn(6, 6, |i, j| C64::new(i as f64, j as f64 * 0.5));
        for sub in 0..2 {
            let once = partial_transpose_matrix(&m, &[2, 3], sub).unwrap();
            assert_ne!(once, m);
            let twice = partial_transpose_matrix(&once, &[2, 3], sub).unwrap();
            assert_eq!(twice, m);
        }
    }

    #[test]
    fn partial_transpose_needs_factorization() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            partial_transpose(&rho, 1),
            Err(StateError::Unfactorized { .. })
        ));
    }
}
