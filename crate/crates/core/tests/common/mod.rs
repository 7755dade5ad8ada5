//! Shared generators and closed-form references for integration tests.
#![allow(dead_code)]

use lindblad::linalg::spectral_norm;
use lindblad::liouville::{build_liouvillian, JumpOperator, LindbladModel};
use lindblad::matrix::{inner, ComplexMatrix, C64};
use lindblad::states::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    ginibre(rng, d, d).hermitian_part()
}

/// `G·G† / Tr`, full rank with probability one.
pub fn random_state(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let g = ginibre(rng, d, d);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part()).expect("Ginibre state is valid")
}

pub fn random_ket(rng: &mut impl Rng, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    let n = lindblad::matrix::vec_norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Orthonormal columns from Gram-Schmidt on a Gaussian `rows×cols` matrix.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let g = ginibre(rng, rows, cols);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.col(j);
        // Two passes keep orthogonality at roundoff level.
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let n = lindblad::matrix::vec_norm(&v);
        basis.push(v.into_iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| basis[j][i])
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_isometry(rng, n, n)
}

/// `k` Kraus operators cut from a random `k·d × d` isometry.
pub fn random_kraus(rng: &mut impl Rng, d: usize, k: usize) -> Vec<ComplexMatrix> {
    let v = random_isometry(rng, k * d, d);
    (0..k)
        .map(|l| ComplexMatrix::from_fn(d, d, |i, j| v[(l * d + i, j)]))
        .collect()
}

/// Random Hamiltonian plus `n_jumps` jumps with rates in `[0.05, 0.5]`.
pub fn random_model(rng: &mut impl Rng, d: usize, n_jumps: usize, hermitian_jumps: bool) -> LindbladModel {
    let h = random_hermitian(rng, d);
    let jumps = (0..n_jumps)
        .map(|_| {
            let op = if hermitian_jumps {
                random_hermitian(rng, d)
            } else {
                ginibre(rng, d, d)
            };
            JumpOperator::new(rng.gen_range(0.05..0.5), op)
        })
        .collect();
    LindbladModel::new(h, jumps).expect("random model is valid")
}

/// Same model with `H` and all rates scaled so that `‖L̃‖₂ = target`.
pub fn normalize_generator(model: &LindbladModel, target: f64) -> LindbladModel {
    let norm = spectral_norm(build_liouvillian(model).matrix()).unwrap();
    let c = target / norm;
    let jumps = model
        .jumps()
        .iter()
        .map(|j| JumpOperator::new(j.rate * c, j.operator.clone()))
        .collect();
    LindbladModel::new(model.hamiltonian().scale_real(c), jumps).unwrap()
}

/// Closed-form stationary state of the thermal two-level model.
pub fn thermal_steady_state_closed_form(e: f64, omega: f64, gamma: f64, n: f64) -> ComplexMatrix {
    let g = gamma + 2.0 * n * gamma;
    let den = (1.0 + 2.0 * n) * (4.0 * e * e + g * g + 8.0 * omega * omega);
    let r00 = ((1.0 + n) * (4.0 * e * e + g * g) + 4.0 * (1.0 + 2.0 * n) * omega * omega) / den;
    let r11 = (n * (4.0 * e * e + g * g) + 4.0 * (1.0 + 2.0 * n) * omega * omega) / den;
    let r01 = C64::new(-2.0 * e, -g) * (2.0 * omega / den);
    let r10 = C64::new(-2.0 * e, g) * (2.0 * omega / den);
    ComplexMatrix::from_rows(&[[C64::new(r00, 0.0), r01], [r10, C64::new(r11, 0.0)]])
}

pub fn max_vec_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Replaces `√Γ_i·L_i` by `Σ_j v_ij·√Γ_j·L_j` (all new rates are 1).
pub fn unitary_mixed(model: &LindbladModel, v: &ComplexMatrix) -> LindbladModel {
    let d = model.dim();
    let jumps = model.jumps();
    let mixed = (0..jumps.len())
        .map(|i| {
            let mut op = ComplexMatrix::zeros(d, d);
            for (j, jump) in jumps.iter().enumerate() {
                op += &jump.operator.scale(v[(i, j)] * jump.rate.sqrt());
            }
            JumpOperator::new(1.0, op)
        })
        .collect();
    LindbladModel::new(model.hamiltonian().clone(), mixed).unwrap()
}

/// `L_j → L_j + a_j·I`, `H → H + (1/2i)·Σ_j Γ_j(a_j*·L_j − a_j·L_j†) + b·I`.
pub fn inhomogeneous_shift(model: &LindbladModel, a: &[C64], b: f64) -> LindbladModel {
    let d = model.dim();
    let id = ComplexMatrix::identity(d);
    let mut h = model.hamiltonian() + &id.scale_real(b);
    let mut jumps = Vec::new();
    for (jump, &aj) in model.jumps().iter().zip(a) {
        let l = &jump.operator;
        let correction = &l.scale(aj.conj()) - &l.adjoint().scale(aj);
        h += &correction.scale(C64::new(0.0, -0.5 * jump.rate));
        jumps.push(JumpOperator::new(jump.rate, l + &id.scale(aj)));
    }
    LindbladModel::new(h.hermitian_part(), jumps).unwrap()
}
