mod common;

use std::collections::BTreeSet;

use common::{random_series, rng, trapezoid_cumulative};
use hillcert_core::projection::{q_blocks, q_blocks_full_subharmonic, reference_fundamental};
use hillcert_core::series::{
    coeff_product, count_multiindices, eligible_set, integer_tuple_bound, periodicity_check,
    series_fundamental, series_q_block, subharmonic_set, vandermonde_multisum, xi_factor, IndexTuple,
};
use hillcert_core::{Complex64, ComplexMatrix, FourierMatrixSeries};

fn tuple(v: &[i64]) -> IndexTuple {
    IndexTuple::new(v.to_vec()).unwrap()
}

/// Nested integral `∫₀ᵗ e^{ip₁ωs₁} ∫₀^{s₁} e^{ip₂ωs₂} ⋯ ds` by cumulative
/// trapezoid sums, Richardson-extrapolated over two grids.
fn xi_quadrature(p: &[i64], omega: f64, t_end: f64, steps: usize) -> Vec<(f64, Complex64)> {
    let level = |steps: usize| {
        let h = t_end / steps as f64;
        let mut inner: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); steps + 1];
        for &pk in p.iter().rev() {
            let f = |t: f64| {
                let i = (t / h).round() as usize;
                Complex64::from_polar(1.0, pk as f64 * omega * t) * inner[i]
            };
            let next: Vec<Complex64> = trapezoid_cumulative(f, t_end, steps).into_iter().map(|x| x.1).collect();
            inner = next;
        }
        inner
    };
    let coarse = level(steps);
    let fine = level(2 * steps);
    (0..=steps)
        .map(|i| {
            let t = t_end * i as f64 / steps as f64;
            (t, (fine[2 * i] * 4.0 - coarse[i]) / 3.0)
        })
        .collect()
}

#[test]
fn xi_matches_quadrature() {
    let omega = 1.0;
    let t_end = 3.0 * 2.0 * std::f64::consts::PI / omega;
    for p in [vec![1, -1], vec![-1, -2, 3], vec![4, -1], vec![0], vec![2]] {
        let xi = xi_factor(&tuple(&p), omega);
        for (t, want) in xi_quadrature(&p, omega, t_end, 40_000).into_iter().step_by(97) {
            let got = xi.eval(t);
            assert!((got - want).norm() < 1e-8, "p={p:?} t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn xi_closed_forms() {
    let xi = xi_factor(&tuple(&[0]), 2.0);
    assert!((xi.eval(2.5) - Complex64::new(2.5, 0.0)).norm() < 1e-15);
    let omega = 1.3;
    let xi = xi_factor(&tuple(&[3]), omega);
    for t in [0.0, 0.7, 5.0] {
        let i = Complex64::new(0.0, 1.0);
        let want = ((i * 3.0 * omega * t).exp() - 1.0) / (i * 3.0 * omega);
        assert!((xi.eval(t) - want).norm() < 1e-14);
    }
}

#[test]
fn coefficient_products() {
    let m = |v: f64| ComplexMatrix::from_real_rows(&[&[v, 1.0], &[0.0, v]]);
    let s = FourierMatrixSeries::from_coeffs(1.0, 2, [(-3, m(2.0)), (0, m(3.0)), (1, m(5.0))]).unwrap();
    let want = m(2.0).matmul(&m(3.0)).matmul(&m(5.0)).matmul(&m(5.0));
    assert!(coeff_product(&s, &tuple(&[-3, 0, 1, 1])).max_abs_diff(&want) < 1e-12);
    assert!(coeff_product(&s, &tuple(&[0, 2])).is_zero());

    let sc = FourierMatrixSeries::scalar_cosine(0.3, 0.7);
    let v = coeff_product(&sc, &tuple(&[0, 1, -1, 0, 1]))[(0, 0)].re;
    assert!((v - 0.3f64.powi(2) * 0.7f64.powi(3)).abs() < 1e-15);
}

fn all_tuples(m: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| (-r..=r).map(move |x| [v.clone(), vec![x]].concat()))
            .collect();
    }
    out
}

fn set_of(v: Vec<IndexTuple>) -> BTreeSet<Vec<i64>> {
    v.into_iter().map(|p| p.entries().to_vec()).collect()
}

#[test]
fn eligible_sets_match_brute_force() {
    for n in 0..=3u32 {
        for m in 1..=3usize {
            for j in -4..=4i64 {
                let brute: BTreeSet<Vec<i64>> = all_tuples(m, 2 * n as i64 + 8)
                    .into_iter()
                    .filter(|p| {
                        let mut s = 0;
                        p.iter().all(|&x| {
                            s += x;
                            (j - s).abs() <= n as i64
                        })
                    })
                    .collect();
                let got = eligible_set(2 * j, n, m);
                assert_eq!(got.len(), brute.len());
                assert_eq!(set_of(got), brute, "n={n} m={m} j={j}");
            }
        }
    }
    assert_eq!(set_of(eligible_set(0, 2, 1)), (-2..=2).map(|x| vec![x]).collect());
    // centred at (3, 0): the prefix sums stay in [0, 6]
    let centred = eligible_set(6, 3, 2);
    assert!(centred.iter().all(|p| (0..=6).contains(&p.entries()[0])));
    assert!(centred.iter().any(|p| p.entries() == [3, 0]));
}

#[test]
fn subharmonic_set_is_union_of_eligible_sets() {
    for n in 1..=3u32 {
        for m in 1..=3usize {
            let union: BTreeSet<Vec<i64>> =
                (-(n as i64)..=n as i64).flat_map(|j| set_of(eligible_set(2 * j, n, m))).collect();
            assert_eq!(set_of(subharmonic_set(n, m)), union, "n={n} m={m}");
        }
        let b = 2 * n as i64;
        assert_eq!(set_of(subharmonic_set(n, 1)), (-b..=b).map(|x| vec![x]).collect());
    }
    let pairs = set_of(subharmonic_set(2, 2));
    let expect: BTreeSet<Vec<i64>> = all_tuples(2, 4)
        .into_iter()
        .filter(|p| (p[0] + p[1]).abs() <= 4)
        .collect();
    assert_eq!(pairs, expect);
}

#[test]
fn stars_and_bars_matches_enumeration() {
    for m in 1..=4u32 {
        for big_m in 0..=8u64 {
            let nonneg = all_tuples(m as usize, big_m as i64)
                .into_iter()
                .filter(|p| p.iter().all(|&x| x >= 0) && p.iter().sum::<i64>() == big_m as i64)
                .count() as u128;
            assert_eq!(count_multiindices(m, big_m).unwrap(), nonneg);
            let integer = all_tuples(m as usize, big_m as i64)
                .into_iter()
                .filter(|p| p.iter().map(|x| x.abs()).sum::<i64>() == big_m as i64)
                .count() as u128;
            assert!(integer <= integer_tuple_bound(m, big_m).unwrap());
        }
    }
    assert_eq!(count_multiindices(2, 3).unwrap(), 4);
}

fn binom(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn nested(big_m: u64, n: &[u64]) -> u128 {
    match n.split_first() {
        None => 1,
        Some((&n0, rest)) => (0..=big_m).map(|a| binom(a + n0, n0) * nested(big_m - a, rest)).sum(),
    }
}

#[test]
fn vandermonde_matches_nested_loops() {
    for m in 1..=3usize {
        for big_m in 0..=5u64 {
            for n in all_tuples(m, 2).into_iter().filter(|v| v.iter().all(|&x| x >= 0)) {
                let n: Vec<u64> = n.iter().map(|&x| x as u64).collect();
                assert_eq!(vandermonde_multisum(big_m, &n).unwrap(), nested(big_m, &n), "M={big_m} n={n:?}");
            }
        }
    }
    assert_eq!(vandermonde_multisum(4, &[1, 0, 2]).unwrap(), nested(4, &[1, 0, 2]));
}

#[test]
fn periodicity_criterion_examples() {
    assert!(periodicity_check(&tuple(&[4, -1])));
    assert!(!periodicity_check(&tuple(&[1, -1, 0, 1, -1, 1])));
    for p in all_tuples(3, 2).into_iter().chain(all_tuples(2, 2)).chain(all_tuples(1, 2)) {
        let t = tuple(&p);
        let secular = xi_factor(&t, 1.0).max_power().unwrap_or(0) >= 1;
        assert_eq!(periodicity_check(&t), !secular, "p={p:?}");
    }
}

#[test]
fn scalar_series_matches_closed_form() {
    let (beta, gamma, t) = (0.01, 0.8, 1.0_f64);
    let s = FourierMatrixSeries::scalar_cosine(beta, gamma);
    let sum = series_fundamental(&s, 30, t).unwrap();
    let want = (beta * t + 2.0 * gamma * t.sin()).exp();
    assert!((sum.value[(0, 0)] - Complex64::new(want, 0.0)).norm() <= sum.tail_bound + 1e-12);
}

#[test]
fn random_series_match_reference_and_blocks() {
    let mut r = rng(77);
    for _ in 0..3 {
        let s = random_series(&mut r, 2, 1, 1.5, 0.4);
        let t = 0.8;
        let ser = series_fundamental(&s, 12, t).unwrap();
        let reference = reference_fundamental(&s, t, 1e-12, 1e-12).unwrap().value;
        let mut d = ser.value.clone();
        d.axpy(Complex64::new(-1.0, 0.0), &reference);
        assert!(d.norm_2() <= ser.tail_bound + 1e-9);

        for n in 1..=2u32 {
            let blocks = q_blocks(&s, n, t).unwrap();
            let full = q_blocks_full_subharmonic(&s, n, t).unwrap();
            for (idx, block) in blocks.iter().enumerate() {
                let j = idx as i64 - n as i64;
                let q = series_q_block(&s, n, 2 * j, 12, t).unwrap();
                let mut d = q.value.clone();
                d.axpy(Complex64::new(-1.0, 0.0), block);
                assert!(d.norm_2() <= q.tail_bound + 1e-9, "n={n} j={j}");
                assert!(full[2 * idx].max_abs_diff(block) < 1e-11);
            }
            for (idx, block) in full.iter().enumerate() {
                let jt = idx as i64 - 2 * n as i64;
                let q = series_q_block(&s, n, jt, 12, t).unwrap();
                let mut d = q.value.clone();
                d.axpy(Complex64::new(-1.0, 0.0), block);
                assert!(d.norm_2() <= q.tail_bound + 1e-9, "n={n} j̃={jt}");
            }
        }
    }
}
