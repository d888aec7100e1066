//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! Degree selection follows the 1-norm thresholds of Higham (2005): the
//! smallest degree in {3, 5, 7, 9} whose threshold covers `‖A‖₁` is used
//! directly; otherwise the matrix is scaled by `2^-s` into the degree-13
//! range and the result squared `s` times.

use num_complex::Complex64;

use super::{lu, ComplexMatrix};
use crate::error::{HillError, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_230e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// `exp(A)` for a square complex matrix.
pub fn mat_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square("matrix exponential")?;
    if !a.is_finite() {
        return Err(HillError::Domain("matrix exponential of non-finite matrix".into()));
    }
    let n = a.rows();
    if n == 1 {
        return ComplexMatrix::new(1, 1, vec![a[(0, 0)].exp()]);
    }
    let norm = a.norm_1();
    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, coeffs);
        }
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(2f64.powi(-s));
    let mut x = pade13(&scaled)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}

fn real(c: f64) -> Complex64 {
    Complex64::new(c, 0.0)
}

fn combine(terms: &[(f64, &ComplexMatrix)], diag: f64) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(terms[0].1.rows(), terms[0].1.cols());
    for &(c, m) in terms {
        out.axpy(real(c), m);
    }
    out.shift_diagonal(real(diag))
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix> {
    let m = b.len() - 1;
    let a2 = a.matmul(a);
    // even powers A^2, A^4, ...
    let mut powers = vec![a2.clone()];
    while 2 * (powers.len() + 1) <= m {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let odd_terms: Vec<(f64, &ComplexMatrix)> = powers
        .iter()
        .enumerate()
        .filter(|(i, _)| 2 * i + 3 <= m)
        .map(|(i, p)| (b[2 * i + 3], p))
        .collect();
    let inner = if odd_terms.is_empty() {
        ComplexMatrix::identity(a.rows()).scale_real(b[1])
    } else {
        combine(&odd_terms, b[1])
    };
    let u = a.matmul(&inner);
    let even_terms: Vec<(f64, &ComplexMatrix)> = powers
        .iter()
        .enumerate()
        .filter(|(i, _)| 2 * i + 2 <= m)
        .map(|(i, p)| (b[2 * i + 2], p))
        .collect();
    let v = combine(&even_terms, b[0]);
    solve_pade(&u, &v)
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = &B13;
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);
    let w1 = combine(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
    let mut w = a6.matmul(&w1);
    w.axpy(real(b[7]), &a6);
    w.axpy(real(b[5]), &a4);
    w.axpy(real(b[3]), &a2);
    let w = w.shift_diagonal(real(b[1]));
    let u = a.matmul(&w);
    let z1 = combine(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
    let mut v = a6.matmul(&z1);
    v.axpy(real(b[6]), &a6);
    v.axpy(real(b[4]), &a4);
    v.axpy(real(b[2]), &a2);
    let v = v.shift_diagonal(real(b[0]));
    solve_pade(&u, &v)
}

/// Solves `(V − U)·X = V + U`.
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    lu::solve(&q, &p)
}
