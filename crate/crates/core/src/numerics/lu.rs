use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{HillError, Result};

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: ComplexMatrix,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        a.require_square("LU factorization")?;
        let n = a.rows();
        let mut f = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        for k in 0..n {
            let (piv, piv_abs) = (k..n)
                .map(|i| (i, f[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if piv_abs == 0.0 {
                continue;
            }
            if piv != k {
                for j in 0..n {
                    let tmp = f[(k, j)];
                    f[(k, j)] = f[(piv, j)];
                    f[(piv, j)] = tmp;
                }
                perm.swap(k, piv);
                swaps += 1;
            }
            let inv = 1.0 / f[(k, k)];
            for i in k + 1..n {
                let l = f[(i, k)] * inv;
                f[(i, k)] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = f[(k, j)];
                    f[(i, j)] -= l * u;
                }
            }
        }
        Ok(Self {
            factors: f,
            perm,
            swaps,
        })
    }

    pub fn det(&self) -> Complex64 {
        let prod: Complex64 = self.factors.diagonal().into_iter().product();
        if self.swaps.is_multiple_of(2) {
            prod
        } else {
            -prod
        }
    }

    /// Solves `A·X = B` for a block of right-hand sides.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.factors.rows();
        if b.rows() != n {
            return Err(HillError::Dimension(format!(
                "right-hand side has {} rows, system has {n}",
                b.rows()
            )));
        }
        if self.factors.diagonal().iter().any(|d| d.norm() == 0.0) {
            return Err(HillError::Domain("singular matrix".into()));
        }
        let m = b.cols();
        let mut x = ComplexMatrix::from_fn(n, m, |i, j| b[(self.perm[i], j)]);
        let f = &self.factors;
        for i in 0..n {
            for k in 0..i {
                let l = f[(i, k)];
                if l.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let v = x[(k, j)];
                    x[(i, j)] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = f[(i, k)];
                if u.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let v = x[(k, j)];
                    x[(i, j)] -= u * v;
                }
            }
            let inv = 1.0 / f[(i, i)];
            for j in 0..m {
                x[(i, j)] *= inv;
            }
        }
        Ok(x)
    }
}

/// Solves `A·X = B`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Lu::new(a)?.solve(b)
}

/// Determinant via LU.
pub fn det(a: &ComplexMatrix) -> Result<Complex64> {
    Ok(Lu::new(a)?.det())
}
