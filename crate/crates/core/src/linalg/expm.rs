use crate::error::LinalgError;
use crate::matrix::{ComplexMatrix, C64};

const MAX_TERMS: usize = 60;

/// `exp(t·A)·v` by Taylor series with scaling.
///
/// `t·A` is split into `s` substeps with `‖t·A/s‖₁ ≤ 1/2`; each substep sums
/// the series until the next term drops below unit roundoff of the partial
/// sum. Used as the reference propagator for the steppers.
pub fn expm_action(a: &ComplexMatrix, v: &[C64], t: f64) -> Result<Vec<C64>, LinalgError> {
    let n = a.require_square()?;
    if v.len() != n {
        return Err(LinalgError::VectorLength {
            expected: n,
            got: v.len(),
        });
    }
    if !t.is_finite() || !a.all_finite() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let norm = a.norm_one() * t.abs();
    let substeps = ((2.0 * norm).ceil() as usize).max(1);
    let h = t / substeps as f64;

    let mut w = v.to_vec();
    for _ in 0..substeps {
        let mut term = w.clone();
        let mut sum = w.clone();
        for k in 1..=MAX_TERMS {
            let next = a.mul_vec(&term);
            let factor = h / k as f64;
            term = next.into_iter().map(|z| z * factor).collect();
            for (s, x) in sum.iter_mut().zip(&term) {
                *s += x;
            }
            let term_max = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sum_max = sum.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if term_max <= 0.5 * f64::EPSILON * sum_max || term_max == 0.0 {
                break;
            }
        }
        w = sum;
    }
    Ok(w)
}
