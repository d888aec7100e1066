//! Fixtures shared by the benchmarks.

use hillcert_core::hbm::{linearized_series, solve_duffing_hbm, DuffingParams, DEFAULT_HARMONICS};
use hillcert_core::fourier::DEFAULT_COEFF_FLOOR;
use hillcert_core::{Complex64, ComplexMatrix, FourierMatrixSeries};

/// Mathieu system at the stable transition point used throughout the benches.
pub fn mathieu_transition() -> FourierMatrixSeries {
    FourierMatrixSeries::mathieu(-0.35490, 2.4, 2.0).expect("valid Mathieu parameters")
}

/// Linearized Duffing configuration 1.
pub fn duffing_linearization() -> FourierMatrixSeries {
    let p = DuffingParams::configuration_1();
    let sol = solve_duffing_hbm(&p, DEFAULT_HARMONICS, None).expect("HBM converges");
    linearized_series(&sol, &p).expect("linearization").pruned(DEFAULT_COEFF_FLOOR)
}

/// Deterministic dense test matrix with entries of size `scale`.
pub fn dense_matrix(n: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let x = ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5;
        let y = ((i * 7 + j * 29) % 19) as f64 / 19.0 - 0.5;
        Complex64::new(x, y) * scale
    })
}
