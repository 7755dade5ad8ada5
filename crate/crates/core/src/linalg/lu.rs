use crate::error::LinalgError;
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// LU factorization with partial pivoting, `P·A = L·U`.
///
/// Factor once, solve many times: the Crank-Nicolson stepper and the
/// left-eigenvector computation both reuse a single factorization.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(a: &ComplexMatrix) -> Result<Self, LinalgError> {
        let n = a.require_square()?;
        if !a.all_finite() {
            return Err(LinalgError::NonFinite);
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let threshold = (n.max(1) as f64) * f64::EPSILON * a.max_abs();

        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(LinalgError::Singular { pivot: k });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::VectorLength {
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            let col = self.solve(&e).expect("length checked");
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}
