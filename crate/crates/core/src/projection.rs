//! Fundamental solution matrices from Hill-matrix exponentials, plus an
//! adaptive Runge-Kutta reference.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::Formulation;
use crate::error::{HillError, Result};
use crate::fourier::FourierMatrixSeries;
use crate::hill::{assemble_full_subharmonic, assemble_hill, assemble_subharmonic_pair};
use crate::numerics::{mat_exp, ComplexMatrix};

/// How an approximation of `Φ(t)` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxKind {
    Direct,
    Subharmonic,
    Reference,
}

impl From<Formulation> for ApproxKind {
    fn from(f: Formulation) -> Self {
        match f {
            Formulation::Direct => ApproxKind::Direct,
            Formulation::Subharmonic => ApproxKind::Subharmonic,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FundamentalApprox {
    pub value: ComplexMatrix,
    pub t: f64,
    /// Truncation order (0 for the reference integrator).
    pub n: u32,
    pub kind: ApproxKind,
}

/// Sums the block rows of `E·W`: entry `j` is `Σ_k E_{jk}`.
fn block_row_sums(e: &ComplexMatrix, dim: usize) -> Vec<ComplexMatrix> {
    let blocks = e.rows() / dim;
    (0..blocks)
        .map(|r| {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for c in 0..blocks {
                acc.add_to_block(0, 0, &e.block(r * dim, c * dim, dim, dim));
            }
            acc
        })
        .collect()
}

/// `C·exp(Ht)·W`.
pub fn direct_fundamental(series: &FourierMatrixSeries, n: u32, t: f64) -> Result<FundamentalApprox> {
    let hill = assemble_hill(series, n as usize);
    let dim = hill.dim;
    let e = mat_exp(&hill.h.scale_real(t))?;
    let center = n as usize;
    let mut value = ComplexMatrix::zeros(dim, dim);
    for c in 0..hill.blocks() {
        value.add_to_block(0, 0, &e.block(center * dim, c * dim, dim, dim));
    }
    Ok(FundamentalApprox {
        value,
        t,
        n,
        kind: ApproxKind::Direct,
    })
}

/// Blocks `Q_j(t)`, `j = −N..N`, of `Q(t) = e^{iωDt} e^{Ht} W`.
pub fn q_blocks(series: &FourierMatrixSeries, n: u32, t: f64) -> Result<Vec<ComplexMatrix>> {
    let hill = assemble_hill(series, n as usize);
    let e = mat_exp(&hill.h.scale_real(t))?;
    Ok(phase_blocks(block_row_sums(&e, hill.dim), &hill.d, hill.omega, t))
}

fn phase_blocks(blocks: Vec<ComplexMatrix>, d: &[f64], omega: f64, t: f64) -> Vec<ComplexMatrix> {
    blocks
        .into_iter()
        .zip(d)
        .map(|(b, &dj)| b.scale(Complex64::from_polar(1.0, omega * dj * t)))
        .collect()
}

/// Blocks `Q̃_j̃(t)`, `j̃ = −2N..2N`, computed from the full subharmonic Hill
/// matrix without decoupling.
pub fn q_blocks_full_subharmonic(
    series: &FourierMatrixSeries,
    n: u32,
    t: f64,
) -> Result<Vec<ComplexMatrix>> {
    let (ht, d) = assemble_full_subharmonic(series, n as usize)?;
    let e = mat_exp(&ht.scale_real(t))?;
    Ok(phase_blocks(block_row_sums(&e, series.dim()), &d, series.omega(), t))
}

/// Subharmonic approximation from the two decoupled exponentials:
/// `Wᵀe^{iωDt}e^{Ht}W − Ŵᵀe^{iωD̂t}e^{Ĥt}Ŵ`, which equals the alternating sum
/// `Σ_j̃ (−1)^j̃ Q̃_j̃(t)` over the blocks of the full subharmonic matrix.
pub fn subharmonic_fundamental(
    series: &FourierMatrixSeries,
    n: u32,
    t: f64,
) -> Result<FundamentalApprox> {
    let pair = assemble_subharmonic_pair(series, n as usize)?;
    let dim = pair.dim;
    let even = mat_exp(&pair.h.scale_real(t))?;
    let odd = mat_exp(&pair.h_hat.scale_real(t))?;
    let mut value = ComplexMatrix::zeros(dim, dim);
    for b in phase_blocks(block_row_sums(&even, dim), &pair.d, pair.omega, t) {
        value.axpy(Complex64::new(1.0, 0.0), &b);
    }
    for b in phase_blocks(block_row_sums(&odd, dim), &pair.d_hat, pair.omega, t) {
        value.axpy(Complex64::new(-1.0, 0.0), &b);
    }
    Ok(FundamentalApprox {
        value,
        t,
        n,
        kind: ApproxKind::Subharmonic,
    })
}

/// Dispatches on the formulation.
pub fn fundamental(
    series: &FourierMatrixSeries,
    n: u32,
    t: f64,
    formulation: Formulation,
) -> Result<FundamentalApprox> {
    match formulation {
        Formulation::Direct => direct_fundamental(series, n, t),
        Formulation::Subharmonic => subharmonic_fundamental(series, n, t),
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights equal the last row of A (FSAL); these are b − b*
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_STEP: f64 = 1e-12;
const PI_BETA: f64 = 0.04;
const MAX_STEPS: usize = 5_000_000;

/// Integrates `Φ̇ = J(t)Φ`, `Φ(0) = I` from 0 to `t` with Dormand-Prince 5(4)
/// and PI step-size control.
pub fn reference_fundamental(
    series: &FourierMatrixSeries,
    t: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<FundamentalApprox> {
    for tol in [rel_tol, abs_tol] {
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(HillError::Parameter(format!("tolerance {tol} outside (0, 1e-2]")));
        }
    }
    let dim = series.dim();
    let mut y = ComplexMatrix::identity(dim);
    let t_end = t.abs();
    let dir = if t < 0.0 { -1.0 } else { 1.0 };
    if t_end == 0.0 {
        return Ok(FundamentalApprox {
            value: y,
            t,
            n: 0,
            kind: ApproxKind::Reference,
        });
    }
    let max_step = series.period() / 10.0;
    let rhs = |s: f64, y: &ComplexMatrix| series.eval(dir * s).matmul(y).scale_real(dir);
    let mut s = 0.0;
    let mut h = (0.01 * rel_tol.powf(0.2)).max(1e-4).min(max_step).min(t_end);
    let mut err_prev: f64 = 1e-4;
    let mut k = Vec::with_capacity(7);
    let mut k1 = rhs(s, &y);
    let mut steps = 0usize;
    while s < t_end {
        if s + h > t_end {
            h = t_end - s;
        }
        k.clear();
        k.push(k1.clone());
        for stage in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    ys.axpy(Complex64::new(h * a, 0.0), kj);
                }
            }
            k.push(rhs(s + C[stage] * h, &ys));
        }
        // y_new from the fifth-order weights (row 6 of A)
        let mut y_new = y.clone();
        for (j, kj) in k.iter().take(6).enumerate() {
            let a = A[6][j];
            if a != 0.0 {
                y_new.axpy(Complex64::new(h * a, 0.0), kj);
            }
        }
        let mut err_est = ComplexMatrix::zeros(dim, dim);
        for (j, kj) in k.iter().enumerate() {
            if E[j] != 0.0 {
                err_est.axpy(Complex64::new(h * E[j], 0.0), kj);
            }
        }
        let mut acc = 0.0;
        for ((e, y0), y1) in err_est
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .zip(y_new.as_slice())
        {
            let sc = abs_tol + rel_tol * y0.norm().max(y1.norm());
            acc += (e.norm() / sc).powi(2);
        }
        let err = (acc / (dim * dim) as f64).sqrt();
        steps += 1;
        if steps > MAX_STEPS {
            return Err(HillError::Stiffness { t: s, h });
        }
        if err <= 1.0 {
            s += h;
            y = y_new;
            k1 = k.pop().expect("seven stages");
            let fac = if err == 0.0 {
                5.0
            } else {
                (SAFETY * err.powf(-0.2 + 0.75 * PI_BETA) * err_prev.powf(PI_BETA)).clamp(0.2, 5.0)
            };
            err_prev = err.max(1e-4);
            h = (h * fac).min(max_step);
        } else {
            let fac = (SAFETY * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= fac;
        }
        if h < MIN_STEP && t_end - s > MIN_STEP {
            return Err(HillError::Stiffness { t: s, h });
        }
    }
    Ok(FundamentalApprox {
        value: y,
        t,
        n: 0,
        kind: ApproxKind::Reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_exact(beta: f64, gamma: f64, t: f64) -> f64 {
        (beta * t + 2.0 * gamma * t.sin()).exp()
    }

    #[test]
    fn identity_at_time_zero() {
        let s = FourierMatrixSeries::mathieu(0.4, 1.3, 2.0).unwrap();
        for n in 0..4 {
            let d = direct_fundamental(&s, n, 0.0).unwrap();
            assert_eq!(d.value, ComplexMatrix::identity(2));
            for q in q_blocks(&s, n, 0.0).unwrap() {
                assert_eq!(q, ComplexMatrix::identity(2));
            }
        }
        for n in 1..4 {
            let sub = subharmonic_fundamental(&s, n, 0.0).unwrap();
            assert!(sub.value.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        }
    }

    #[test]
    fn constant_series_collapses_to_plain_exponential() {
        let j0 = ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[-1.0, -1.0]]);
        let s = FourierMatrixSeries::constant(j0.clone(), 1.0).unwrap();
        let t = 1.7;
        let exact = mat_exp(&j0.scale_real(t)).unwrap();
        for n in [0, 1, 3] {
            assert!(direct_fundamental(&s, n, t).unwrap().value.max_abs_diff(&exact) < 1e-12);
        }
        assert!(subharmonic_fundamental(&s, 2, t).unwrap().value.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn q0_is_direct_value() {
        let s = FourierMatrixSeries::mathieu(0.4, 1.3, 2.0).unwrap();
        let q = q_blocks(&s, 3, 0.9).unwrap();
        let d = direct_fundamental(&s, 3, 0.9).unwrap();
        assert!(q[3].max_abs_diff(&d.value) < 1e-15);
    }

    #[test]
    fn scalar_system_accuracy() {
        let s = FourierMatrixSeries::scalar_cosine(0.01, 0.8);
        let t = 6.5;
        let v = direct_fundamental(&s, 15, t).unwrap().value[(0, 0)];
        assert!((v - scalar_exact(0.01, 0.8, t)).norm() < 1e-6);
    }

    #[test]
    fn reference_matches_closed_forms() {
        let tol = 1e-10;
        let s = FourierMatrixSeries::scalar_cosine(0.01, 0.8);
        let r = reference_fundamental(&s, 6.5, tol, tol).unwrap();
        let exact = scalar_exact(0.01, 0.8, 6.5);
        assert!((r.value[(0, 0)] - exact).norm() < 10.0 * tol * exact.max(1.0));
        let j0 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-2.0, -0.3]]);
        let c = FourierMatrixSeries::constant(j0.clone(), 1.0).unwrap();
        let r = reference_fundamental(&c, 3.0, tol, tol).unwrap();
        let exact = mat_exp(&j0.scale_real(3.0)).unwrap();
        assert!(r.value.max_abs_diff(&exact) < 10.0 * tol);
    }

    #[test]
    fn reference_rejects_bad_tolerance() {
        let s = FourierMatrixSeries::scalar_cosine(0.01, 0.8);
        assert!(reference_fundamental(&s, 1.0, 0.0, 1e-8).is_err());
        assert!(reference_fundamental(&s, 1.0, 1e-8, 0.1).is_err());
    }

    #[test]
    fn subharmonic_equals_alternating_sum_of_full_blocks() {
        let s = FourierMatrixSeries::mathieu(0.7, 1.4, 2.0).unwrap();
        for &t in &[0.3, 1.1, std::f64::consts::PI] {
            for n in 1..5 {
                let full = q_blocks_full_subharmonic(&s, n, t).unwrap();
                let mut alt = ComplexMatrix::zeros(2, 2);
                for (i, q) in full.iter().enumerate() {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    alt.axpy(Complex64::new(sign, 0.0), q);
                }
                let sub = subharmonic_fundamental(&s, n, t).unwrap().value;
                assert!(sub.max_abs_diff(&alt) < 1e-11, "t={t} n={n}");
            }
        }
    }

    #[test]
    fn both_projections_converge_to_reference() {
        let s = FourierMatrixSeries::mathieu(0.7, 1.4, 2.0).unwrap();
        let t = s.period();
        let r = reference_fundamental(&s, t, 1e-12, 1e-12).unwrap().value;
        let d = direct_fundamental(&s, 20, t).unwrap().value;
        let h = subharmonic_fundamental(&s, 12, t).unwrap().value;
        assert!(d.max_abs_diff(&r) < 1e-8, "{}", d.max_abs_diff(&r));
        assert!(h.max_abs_diff(&r) < 1e-8, "{}", h.max_abs_diff(&r));
    }
}
