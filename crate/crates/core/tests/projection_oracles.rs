mod common;

use common::{random_series, rng};
use hillcert_core::hill::{assemble_full_subharmonic, assemble_hill, assemble_subharmonic_pair, permutation_decouple};
use hillcert_core::numerics::{det, mat_exp};
use hillcert_core::projection::{direct_fundamental, fundamental, reference_fundamental, subharmonic_fundamental};
use hillcert_core::{Complex64, Formulation, FourierMatrixSeries};

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

#[test]
fn hill_blocks_follow_toeplitz_layout() {
    let mut r = rng(41);
    let s = random_series(&mut r, 2, 2, 1.3, 1.0);
    let n = 3usize;
    let hill = assemble_hill(&s, n);
    for bj in 0..2 * n + 1 {
        for bk in 0..2 * n + 1 {
            let (j, k) = (bj as i64 - n as i64, bk as i64 - n as i64);
            let mut want = s.coeff_or_zero(j - k);
            if j == k {
                want = want.shift_diagonal(-i() * (j as f64 * 1.3));
            }
            assert_eq!(hill.h.block(bj * 2, bk * 2, 2, 2), want, "block ({j},{k})");
        }
    }
}

#[test]
fn decoupled_blocks_equal_the_pair() {
    let mut r = rng(42);
    for n in 1..=3usize {
        let s = random_series(&mut r, 2, 2, 0.8, 1.0);
        let (ht, d) = assemble_full_subharmonic(&s, n).unwrap();
        assert_eq!(d.len(), 4 * n + 1);
        let (h, h_hat) = permutation_decouple(&ht, 2, n).unwrap();
        let pair = assemble_subharmonic_pair(&s, n).unwrap();
        assert!(h.max_abs_diff(&pair.h) == 0.0);
        assert!(h_hat.max_abs_diff(&pair.h_hat) < 1e-14);
        assert_eq!(pair.d_hat, (-(n as i64)..n as i64).map(|j| j as f64 + 0.5).collect::<Vec<_>>());
    }
}

fn log_det_integral(s: &FourierMatrixSeries, t: f64) -> Complex64 {
    s.iter()
        .map(|(k, m)| {
            if k == 0 {
                m.trace() * t
            } else {
                let kw = k as f64 * s.omega();
                m.trace() * ((i() * kw * t).exp() - 1.0) / (i() * kw)
            }
        })
        .sum()
}

#[test]
fn liouville_formula_holds() {
    let s = FourierMatrixSeries::mathieu(1.0, 0.1, 2.0).unwrap();
    let t = s.period();
    for f in [Formulation::Direct, Formulation::Subharmonic] {
        let phi = fundamental(&s, 20, t, f).unwrap().value;
        assert!((det(&phi).unwrap() - 1.0).norm() < 1e-8);
    }
    let mut r = rng(43);
    let s = random_series(&mut r, 3, 1, 1.0, 0.5);
    for t in [0.4, 1.7] {
        let phi = direct_fundamental(&s, 25, t).unwrap().value;
        let want = log_det_integral(&s, t).exp();
        assert!((det(&phi).unwrap() - want).norm() < 1e-8 * want.norm());
    }
}

#[test]
fn scalar_system_closed_form() {
    let (beta, gamma) = (0.01, 0.8);
    let s = FourierMatrixSeries::scalar_cosine(beta, gamma);
    for t in [0.5, 3.0, 6.5, -2.0] {
        let want = (beta * t + 2.0 * gamma * f64::sin(t)).exp();
        let reference = reference_fundamental(&s, t, 1e-12, 1e-14).unwrap().value[(0, 0)].re;
        assert!((reference - want).abs() < 1e-9 * want);
        let d = direct_fundamental(&s, 30, t).unwrap().value[(0, 0)];
        let h = subharmonic_fundamental(&s, 15, t).unwrap().value[(0, 0)];
        assert!((d - want).norm() < 1e-10 * want, "t={t}");
        assert!((h - want).norm() < 1e-10 * want, "t={t}");
    }
}

#[test]
fn constant_series_reduces_to_plain_exponential() {
    let mut r = rng(44);
    let s = random_series(&mut r, 3, 0, 1.0, 1.0);
    let want = mat_exp(&s.coeff_or_zero(0).scale_real(2.2)).unwrap();
    for f in [Formulation::Direct, Formulation::Subharmonic] {
        for n in [1, 4] {
            let got = fundamental(&s, n, 2.2, f).unwrap().value;
            assert!(got.max_abs_diff(&want) < 1e-12);
        }
    }
}

#[test]
fn reference_satisfies_group_property() {
    let mut r = rng(45);
    let s = random_series(&mut r, 2, 2, 2.0, 0.6);
    let period = s.period();
    let t = 0.7;
    // Φ(t + T) = Φ(t)Φ(T) for periodic J
    let lhs = reference_fundamental(&s, t + period, 1e-12, 1e-13).unwrap().value;
    let rhs = reference_fundamental(&s, t, 1e-12, 1e-13)
        .unwrap()
        .value
        .matmul(&reference_fundamental(&s, period, 1e-12, 1e-13).unwrap().value);
    assert!(lhs.max_abs_diff(&rhs) < 1e-9);
}
