//! Stationary states and Liouvillian spectra.

use crate::error::{LinalgError, StateError};
use crate::linalg::{eig_general, null_space, svd, SpectralDecomposition};
use crate::liouville::{build_liouvillian, LindbladModel, LiouvillianMatrix};
use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::states::{validate, DensityMatrix, STATE_TOL};

/// Relative singular-value threshold defining the kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// Eigenvalues with real part above this are reported as non-contractive.
pub const CONTRACTIVITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    /// Present only for a one-dimensional kernel that validates as a state.
    pub state: Option<DensityMatrix>,
    pub kernel_dimension: usize,
    /// Raw kernel vectors, devectorized, unit Frobenius norm.
    pub kernel_vectors: Vec<ComplexMatrix>,
    /// `None` when every eigenvalue lies in the kernel.
    pub spectral_gap: Option<f64>,
    /// `‖L̃·vec(ρ_SS)‖`, or the worst kernel vector residual when degenerate.
    pub residual: f64,
    /// Largest singular value of `L̃`.
    pub liouvillian_norm: f64,
    pub all_eigenvalues: Vec<C64>,
    /// Largest real part in the spectrum.
    pub max_real_part: f64,
    /// Why the unique kernel vector was rejected as a state, if it was.
    pub validation_error: Option<StateError>,
}

impl SteadyStateReport {
    pub fn is_unique(&self) -> bool {
        self.kernel_dimension == 1
    }

    pub fn is_contractive(&self) -> bool {
        self.max_real_part <= CONTRACTIVITY_TOL
    }
}

pub fn steady_state(model: &LindbladModel) -> Result<SteadyStateReport, LinalgError> {
    let l = build_liouvillian(model);
    steady_state_of(&l)
}

pub fn steady_state_of(l: &LiouvillianMatrix) -> Result<SteadyStateReport, LinalgError> {
    let d = l.dim();
    let m = l.matrix();
    let norm = svd(m)?.largest();
    let kernel = null_space(m, KERNEL_TOL)?;
    let spectrum = spectrum_of(l)?;

    let residual_of = |v: &[C64]| vec_norm(&m.mul_vec(v));
    let kernel_vectors: Vec<ComplexMatrix> = kernel
        .iter()
        .map(|v| ComplexMatrix::from_vec(d, d, v.clone()).expect("length d²"))
        .collect();

    let mut state = None;
    let mut validation_error = None;
    let residual;
    if kernel.len() == 1 {
        let raw = &kernel_vectors[0];
        let candidate = raw.scale(raw.trace().inv()).hermitian_part();
        residual = residual_of(candidate.data());
        match validate(candidate, &[d], STATE_TOL) {
            Ok(rho) => state = Some(rho),
            Err(e) => validation_error = Some(e),
        }
    } else {
        residual = kernel.iter().map(|v| residual_of(v)).fold(0.0, f64::max);
    }

    Ok(SteadyStateReport {
        state,
        kernel_dimension: kernel.len(),
        kernel_vectors,
        spectral_gap: spectrum.gap,
        residual,
        liouvillian_norm: norm,
        max_real_part: spectrum.max_real_part(),
        all_eigenvalues: spectrum.decomposition.eigenvalues,
        validation_error,
    })
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    /// Sorted by real part, descending; ties by imaginary part, descending.
    pub decomposition: SpectralDecomposition,
    /// Eigenvalues with `|λ| ≤ KERNEL_TOL·‖L̃‖₂`.
    pub zero_count: usize,
    /// `−max{Re λ : λ outside the kernel}`.
    pub gap: Option<f64>,
    /// Largest distance between an eigenvalue's conjugate and its match.
    pub conjugation_residual: f64,
}

impl SpectrumReport {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.decomposition.eigenvalues
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn liouvillian_spectrum(model: &LindbladModel) -> Result<SpectrumReport, LinalgError> {
    spectrum_of(&build_liouvillian(model))
}

pub fn spectrum_of(l: &LiouvillianMatrix) -> Result<SpectrumReport, LinalgError> {
    let m = l.matrix();
    let mut decomposition = eig_general(m)?;
    // Snap real parts so numerically equal ones tie deterministically.
    let snap = |x: f64| (x * 1e9).round() / 1e9;
    decomposition.sort_by(|a, b| {
        snap(b.re)
            .total_cmp(&snap(a.re))
            .then(snap(b.im).total_cmp(&snap(a.im)))
    });
    let threshold = KERNEL_TOL * svd(m)?.largest().max(f64::MIN_POSITIVE);
    let zero_count = decomposition
        .eigenvalues
        .iter()
        .filter(|z| z.norm() <= threshold)
        .count();
    let gap = decomposition
        .eigenvalues
        .iter()
        .filter(|z| z.norm() > threshold)
        .map(|z| z.re)
        .reduce(f64::max)
        .map(|re| -re);
    let conjugation_residual = conjugation_residual(&decomposition.eigenvalues);
    Ok(SpectrumReport {
        decomposition,
        zero_count,
        gap,
        conjugation_residual,
    })
}

/// Greedy matching of `{λ}` against `{λ*}` as multisets.
pub fn conjugation_residual(values: &[C64]) -> f64 {
    let mut used = vec![false; values.len()];
    let mut worst: f64 = 0.0;
    for z in values {
        let target = z.conj();
        let best = values
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .min_by(|(_, a), (_, b)| (*a - target).norm().total_cmp(&(*b - target).norm()));
        if let Some((j, w)) = best {
            used[j] = true;
            worst = worst.max((w - target).norm());
        }
    }
    worst
}
