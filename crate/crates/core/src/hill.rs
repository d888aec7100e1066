//! Truncated Hill matrices.
//!
//! Blocks are indexed `j = −N..N` top to bottom, so block `(j, k)` of `H` is
//! `J_{j−k}` off the diagonal and `J₀ − i·j·ω·I` on it; the top-left block
//! carries `+iNω`.

use num_complex::Complex64;

use crate::error::{HillError, Result};
use crate::fourier::FourierMatrixSeries;
use crate::numerics::ComplexMatrix;

/// Hill matrix of order `N` with its companion operators.
#[derive(Debug, Clone)]
pub struct HillOperators {
    pub order: usize,
    pub dim: usize,
    pub omega: f64,
    pub h: ComplexMatrix,
    /// Block values of `D = diag(−N, …, N) ⊗ I`.
    pub d: Vec<f64>,
}

impl HillOperators {
    pub fn blocks(&self) -> usize {
        self.d.len()
    }

    /// Stack of `2N+1` identities.
    pub fn w(&self) -> ComplexMatrix {
        identity_stack(self.blocks(), self.dim)
    }

    /// Central block-row selector.
    pub fn c(&self) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(self.dim, self.dim * self.blocks());
        c.set_block(0, self.dim * self.order, &ComplexMatrix::identity(self.dim));
        c
    }

    /// `(i, j)` block of `H` for zero-based block indices.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        self.h.block(i * self.dim, j * self.dim, self.dim, self.dim)
    }
}

/// The decoupled pair of the subharmonic formulation.
#[derive(Debug, Clone)]
pub struct SubharmonicOperators {
    pub order: usize,
    pub dim: usize,
    pub omega: f64,
    /// Hill matrix of order `N` (size `n(2N+1)`).
    pub h: ComplexMatrix,
    /// Block values of `D`.
    pub d: Vec<f64>,
    /// `H` without its last block row and column, diagonal shifted by `−iω/2`
    /// (size `2nN`).
    pub h_hat: ComplexMatrix,
    /// Block values of `D̂`: the half-integers `−N+½, …, N−½`.
    pub d_hat: Vec<f64>,
}

impl SubharmonicOperators {
    pub fn w(&self) -> ComplexMatrix {
        identity_stack(self.d.len(), self.dim)
    }

    pub fn w_hat(&self) -> ComplexMatrix {
        identity_stack(self.d_hat.len(), self.dim)
    }
}

pub(crate) fn identity_stack(blocks: usize, dim: usize) -> ComplexMatrix {
    let mut w = ComplexMatrix::zeros(blocks * dim, dim);
    let eye = ComplexMatrix::identity(dim);
    for b in 0..blocks {
        w.set_block(b * dim, 0, &eye);
    }
    w
}

/// Block-Toeplitz matrix with `coeff(j − k)` off the diagonal and
/// `coeff(0) − i·diag_shift(j)·I` on it, `j` running over `indices`.
fn assemble_blocks(
    dim: usize,
    count: usize,
    coeff: impl Fn(i64) -> Option<ComplexMatrix>,
    diag_shift: impl Fn(usize) -> f64,
) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim * count, dim * count);
    for r in 0..count {
        for c in 0..count {
            if let Some(block) = coeff(r as i64 - c as i64) {
                h.set_block(r * dim, c * dim, &block);
            }
        }
        let shift = Complex64::new(0.0, -diag_shift(r));
        for i in 0..dim {
            h[(r * dim + i, r * dim + i)] += shift;
        }
    }
    h
}

/// Truncated Hill matrix of order `n_trunc`.
pub fn assemble_hill(series: &FourierMatrixSeries, n_trunc: usize) -> HillOperators {
    let dim = series.dim();
    let count = 2 * n_trunc + 1;
    let omega = series.omega();
    let n = n_trunc as i64;
    let h = assemble_blocks(
        dim,
        count,
        |k| series.coeff(k).cloned(),
        |r| (r as i64 - n) as f64 * omega,
    );
    HillOperators {
        order: n_trunc,
        dim,
        omega,
        h,
        d: (-n..=n).map(|j| j as f64).collect(),
    }
}

/// `H` together with `Ĥ`, `D̂` for the two-exponential subharmonic formula.
pub fn assemble_subharmonic_pair(
    series: &FourierMatrixSeries,
    n_trunc: usize,
) -> Result<SubharmonicOperators> {
    if n_trunc == 0 {
        return Err(HillError::Parameter(
            "subharmonic formulation needs truncation order N ≥ 1".into(),
        ));
    }
    let hill = assemble_hill(series, n_trunc);
    let dim = hill.dim;
    let size = 2 * n_trunc * dim;
    let shift = Complex64::new(0.0, -0.5 * hill.omega);
    let h_hat = hill.h.block(0, 0, size, size).shift_diagonal(shift);
    let n = n_trunc as i64;
    Ok(SubharmonicOperators {
        order: n_trunc,
        dim,
        omega: hill.omega,
        d_hat: (-n..n).map(|j| j as f64 + 0.5).collect(),
        h: hill.h,
        d: hill.d,
        h_hat,
    })
}

/// Full subharmonic Hill matrix `H̃` (order `2N` for the `ω/2` series whose
/// odd coefficients vanish) and the block values of `D̃ = diag(−N, −N+½, …, N)`.
pub fn assemble_full_subharmonic(
    series: &FourierMatrixSeries,
    n_trunc: usize,
) -> Result<(ComplexMatrix, Vec<f64>)> {
    if n_trunc == 0 {
        return Err(HillError::Parameter(
            "subharmonic formulation needs truncation order N ≥ 1".into(),
        ));
    }
    let dim = series.dim();
    let count = 4 * n_trunc + 1;
    let half_omega = 0.5 * series.omega();
    let n2 = 2 * n_trunc as i64;
    let h = assemble_blocks(
        dim,
        count,
        |k| {
            if k % 2 == 0 {
                series.coeff(k / 2).cloned()
            } else {
                None
            }
        },
        |r| (r as i64 - n2) as f64 * half_omega,
    );
    let d = (-n2..=n2).map(|j| 0.5 * j as f64).collect();
    Ok((h, d))
}

/// Block permutation collecting even block indices (relative to the centre)
/// first, then odd ones, each in ascending order.
pub fn decoupling_permutation(n_trunc: usize) -> Vec<usize> {
    let count = 4 * n_trunc + 1;
    let even = (0..count).step_by(2);
    let odd = (1..count).step_by(2);
    even.chain(odd).collect()
}

/// Applies the even/odd block permutation to `H̃` and returns the two diagonal
/// blocks `(H, Ĥ)`, failing if any coupling entry is nonzero.
pub fn permutation_decouple(
    h_tilde: &ComplexMatrix,
    dim: usize,
    n_trunc: usize,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let count = 4 * n_trunc + 1;
    if n_trunc == 0 || !h_tilde.is_square() || h_tilde.rows() != dim * count {
        return Err(HillError::Dimension(format!(
            "expected a {0}x{0} subharmonic Hill matrix",
            dim * count
        )));
    }
    let perm = decoupling_permutation(n_trunc);
    let n_even = 2 * n_trunc + 1;
    let permuted = ComplexMatrix::from_fn(h_tilde.rows(), h_tilde.cols(), |i, j| {
        let (bi, ri) = (i / dim, i % dim);
        let (bj, rj) = (j / dim, j % dim);
        h_tilde[(perm[bi] * dim + ri, perm[bj] * dim + rj)]
    });
    let split = n_even * dim;
    let size = permuted.rows();
    let upper = permuted.block(0, split, split, size - split);
    let lower = permuted.block(split, 0, size - split, split);
    if !upper.is_zero() || !lower.is_zero() {
        return Err(HillError::Structure(
            "permuted subharmonic Hill matrix has nonzero coupling blocks".into(),
        ));
    }
    Ok((
        permuted.block(0, 0, split, split),
        permuted.block(split, split, size - split, size - split),
    ))
}
