//! Singular values by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns are orthogonalized pairwise until every pair satisfies
//! `|u_pᴴ u_q| ≤ ε·‖u_p‖‖u_q‖`; the singular values are then the column
//! norms. The method is backward stable and resolves small singular values
//! to high relative accuracy, which the pseudospectrum tests rely on.

use num_complex::Complex64;

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 80;

/// Singular values sorted descending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    // orthogonalize the columns of the taller orientation
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let m = work.rows();
    let n = work.cols();
    // column-major copy for contiguous column access
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| work.column(j)).collect();
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (up, uq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        alpha += up[i].norm_sqr();
                        beta += uq[i].norm_sqr();
                        gamma += up[i].conj() * uq[i];
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // with v = conj(phase)·u_q, (u_p, v) has a real inner product
                let (left, right) = cols.split_at_mut(q);
                let up = &mut left[p];
                let uq = &mut right[0];
                for i in 0..m {
                    let x = up[i];
                    let v = phase.conj() * uq[i];
                    up[i] = x * c - v * s;
                    uq[i] = x * s + v * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Smallest singular value `σ_min(A)`.
pub fn min_singular_value(a: &ComplexMatrix) -> crate::error::Result<f64> {
    a.require_square("minimum singular value")?;
    if !a.is_finite() {
        return Err(crate::error::HillError::Domain(
            "singular values of non-finite matrix".into(),
        ));
    }
    if a.rows() == 2 {
        return Ok(min_singular_value_2x2(a));
    }
    Ok(singular_values(a).last().copied().unwrap_or(0.0))
}

/// Closed form for 2×2: `σ_min = |det| / σ_max` with
/// `σ_max² = (‖A‖_F² + sqrt(‖A‖_F⁴ − 4|det|²)) / 2`.
fn min_singular_value_2x2(a: &ComplexMatrix) -> f64 {
    let fro2 = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    if fro2 == 0.0 {
        return 0.0;
    }
    let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).norm();
    // (fro2² − 4det²) factored to avoid cancellation when det² ≈ fro2²/4
    let disc = ((fro2 - 2.0 * det) * (fro2 + 2.0 * det)).max(0.0).sqrt();
    let smax = ((fro2 + disc) * 0.5).sqrt();
    det / smax
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        assert!((min_singular_value(&ComplexMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-15);
        let d = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 0.5]]);
        assert!((min_singular_value(&d).unwrap() - 0.5).abs() < 1e-15);
        let sv = singular_values(&d);
        assert!((sv[0] - 3.0).abs() < 1e-15 && (sv[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_closed_form_agrees_with_jacobi() {
        let a = ComplexMatrix::new(
            2,
            2,
            vec![
                Complex64::new(1.0, 0.5),
                Complex64::new(-2.0, 0.1),
                Complex64::new(0.3, -0.7),
                Complex64::new(0.9, 2.0),
            ],
        )
        .unwrap();
        let jac = *singular_values(&a).last().unwrap();
        assert!((min_singular_value_2x2(&a) - jac).abs() < 1e-14);
    }

    #[test]
    fn rectangular_uses_short_side() {
        let a = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 4.0]]);
        let sv = singular_values(&a);
        assert_eq!(sv.len(), 1);
        assert!((sv[0] - 5.0).abs() < 1e-15);
    }
}
