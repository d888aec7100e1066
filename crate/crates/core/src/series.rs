//! Exact Taylor-Fourier series for `Φ(t)` and the blocks `Q_j(t)`.
//!
//! Scalar factors `ξ_p` are kept as exponential polynomials
//! `Σ c_{k,q} t^q e^{ikωt}` and built by exact antidifferentiation of
//! `ξ̇_p = ξ_{[p₂..p_m]} e^{ip₁ωt}`, `ξ_p(0) = 0`. The truncated sums over
//! eligible index sets are evaluated by grouping tuples that share a suffix,
//! which turns the enumeration into a recursion over prefix-sum states.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{HillError, Result};
use crate::fourier::{DecayEnvelope, FourierMatrixSeries};
use crate::numerics::ComplexMatrix;

/// Integer index tuple `[p₁, …, p_m]`, `m ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple(Vec<i64>);

impl IndexTuple {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(HillError::Parameter("index tuple needs at least one entry".into()));
        }
        Ok(IndexTuple(entries))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ|p_k|`.
    pub fn one_norm(&self) -> u64 {
        self.0.iter().map(|p| p.unsigned_abs()).sum()
    }

    /// `[p₁, p₁+p₂, …, p₁+…+p_m]`.
    pub fn partial_sums(&self) -> Vec<i64> {
        self.0
            .iter()
            .scan(0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    pub fn tail(&self) -> Option<IndexTuple> {
        (self.0.len() > 1).then(|| IndexTuple(self.0[1..].to_vec()))
    }
}

type Term = (i64, u32);

/// `Σ c_{k,q} t^q e^{ikωt}` with finitely many terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPolynomial {
    omega: f64,
    terms: BTreeMap<Term, Complex64>,
}

/// Contributions of `∫₀ᵗ s^q e^{ikωs} ds` in the same basis.
fn antiderivative_terms(k: i64, q: u32, omega: f64) -> Vec<(Term, Complex64)> {
    if k == 0 {
        return vec![((0, q + 1), Complex64::new(1.0 / (q + 1) as f64, 0.0))];
    }
    let lambda = Complex64::new(0.0, k as f64 * omega);
    let mut out = Vec::with_capacity(q as usize + 2);
    // coefficient (−1)^r q!/(q−r)! / λ^{r+1}
    let mut c = lambda.inv();
    for r in 0..=q {
        out.push(((k, q - r), c));
        if r < q {
            c = -c * (q - r) as f64 / lambda;
        }
    }
    out.push(((0, 0), -c));
    out
}

impl ExpPolynomial {
    pub fn zero(omega: f64) -> Self {
        ExpPolynomial {
            omega,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(omega: f64) -> Self {
        let mut p = Self::zero(omega);
        p.terms.insert((0, 0), Complex64::new(1.0, 0.0));
        p
    }

    pub fn from_terms(omega: f64, terms: impl IntoIterator<Item = (Term, Complex64)>) -> Self {
        let mut p = Self::zero(omega);
        for (key, c) in terms {
            p.add_term(key, c);
        }
        p
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn terms(&self) -> &BTreeMap<Term, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, k: i64, q: u32) -> Complex64 {
        self.terms.get(&(k, q)).copied().unwrap_or_default()
    }

    /// Largest power of `t` with a nonzero coefficient.
    pub fn max_power(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, q)| q).max()
    }

    fn add_term(&mut self, key: Term, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let e = self.terms.entry(key).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(k, q), &c)| c * t.powi(q as i32) * Complex64::from_polar(1.0, k as f64 * self.omega * t))
            .sum()
    }

    /// Multiplication by `e^{ipωt}`.
    pub fn shifted(&self, p: i64) -> Self {
        ExpPolynomial {
            omega: self.omega,
            terms: self.terms.iter().map(|(&(k, q), &c)| ((k + p, q), c)).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(self.omega);
        for (&(k, q), &c) in &self.terms {
            if q > 0 {
                out.add_term((k, q - 1), c * q as f64);
            }
            if k != 0 {
                out.add_term((k, q), c * Complex64::new(0.0, k as f64 * self.omega));
            }
        }
        out
    }

    /// The antiderivative that vanishes at `t = 0`.
    pub fn antiderivative(&self) -> Self {
        let mut out = Self::zero(self.omega);
        for (&(k, q), &c) in &self.terms {
            for (key, f) in antiderivative_terms(k, q, self.omega) {
                out.add_term(key, c * f);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&key, &c) in &other.terms {
            out.add_term(key, c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.omega, self.terms.iter().map(|(&key, &c)| (key, c * s)))
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<Term> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.into_iter()
            .map(|(k, q)| (self.coefficient(k, q) - other.coefficient(k, q)).norm())
            .fold(0.0, f64::max)
    }
}

/// Exact `ξ_p` for the base frequency `omega`.
pub fn xi_factor(p: &IndexTuple, omega: f64) -> ExpPolynomial {
    p.entries()
        .iter()
        .rev()
        .fold(ExpPolynomial::one(omega), |acc, &pk| acc.shifted(pk).antiderivative())
}

pub fn xi_eval(xi: &ExpPolynomial, t: f64) -> Complex64 {
    xi.eval(t)
}

/// Ordered product `J_{p₁} J_{p₂} ⋯ J_{p_m}`.
pub fn coeff_product(series: &FourierMatrixSeries, p: &IndexTuple) -> ComplexMatrix {
    let n = series.dim();
    let mut acc = ComplexMatrix::identity(n);
    for &k in p.entries() {
        match series.coeff(k) {
            Some(j) => acc = acc.matmul(j),
            None => return ComplexMatrix::zeros(n, n),
        }
    }
    acc
}

/// `P_j^(m)`: tuples whose prefix sums stay within `N` of `j`, i.e.
/// `|j − Σ_{l≤w} p_l| ≤ N` for `w = 1..m`. `j` is passed as `twice_j = 2j`
/// so that half-integer centers are exact.
pub fn eligible_set(twice_j: i64, n: u32, m: usize) -> Vec<IndexTuple> {
    let bound = 2 * n as i64;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(m);
    fn rec(c2: i64, bound: i64, m: usize, cur: &mut Vec<i64>, out: &mut Vec<IndexTuple>) {
        if cur.len() == m {
            out.push(IndexTuple(cur.clone()));
            return;
        }
        // need |c2 − 2p| ≤ bound
        let lo = (c2 - bound + 1).div_euclid(2);
        let hi = (c2 + bound).div_euclid(2);
        for p in lo..=hi {
            let next = c2 - 2 * p;
            if next.abs() <= bound {
                cur.push(p);
                rec(next, bound, m, cur, out);
                cur.pop();
            }
        }
    }
    if m > 0 {
        rec(twice_j, bound, m, &mut current, &mut out);
    }
    out
}

/// `P_subh^(m)`: every contiguous sum `Σ_{l=v}^{w} p_l` lies in `[−2N, 2N]`.
pub fn subharmonic_set(n: u32, m: usize) -> Vec<IndexTuple> {
    let bound = 2 * n as i64;
    let mut out = Vec::new();
    fn rec(bound: i64, m: usize, cur: &mut Vec<i64>, out: &mut Vec<IndexTuple>) {
        if cur.len() == m {
            out.push(IndexTuple(cur.clone()));
            return;
        }
        'next: for p in -bound..=bound {
            let mut s = p;
            for &q in cur.iter().rev() {
                s += q;
                if s.abs() > bound {
                    continue 'next;
                }
            }
            cur.push(p);
            rec(bound, m, cur, out);
            cur.pop();
        }
    }
    if m > 0 {
        rec(bound, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// True iff every contiguous partial sum of `p` is nonzero.
pub fn periodicity_check(p: &IndexTuple) -> bool {
    let e = p.entries();
    (0..e.len()).all(|v| {
        let mut s = 0;
        e[v..].iter().all(|&x| {
            s += x;
            s != 0
        })
    })
}

pub(crate) fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of `α ∈ ℕ^m` with `|α| = M`.
pub fn count_multiindices(m: u32, big_m: u64) -> Result<u128> {
    if m == 0 {
        return Err(HillError::Parameter("tuple length must be at least 1".into()));
    }
    Ok(binomial_u128(big_m + m as u64 - 1, m as u64 - 1))
}

/// Upper bound `2^m · binom(M+m−1, m−1)` on integer tuples with one-norm `M`.
pub fn integer_tuple_bound(m: u32, big_m: u64) -> Result<u128> {
    Ok(count_multiindices(m, big_m)? << m)
}

/// Closed form `binom(m + M + |n|, M)` of the nested sum
/// `Σ_{α₁=0}^{M} ⋯ Σ_{α_m=0}^{M−α₁−…} Π binom(α_k + n_k, n_k)`.
pub fn vandermonde_multisum(big_m: u64, n_vec: &[u64]) -> Result<u128> {
    if n_vec.is_empty() {
        return Err(HillError::Parameter("need at least one summation index".into()));
    }
    let total: u64 = n_vec.iter().sum();
    Ok(binomial_u128(n_vec.len() as u64 + big_m + total, big_m))
}

/// A truncated series value with a rigorous bound on the omitted terms.
#[derive(Debug, Clone)]
pub struct SeriesSum {
    pub value: ComplexMatrix,
    pub tail_bound: f64,
}

/// `Σ_{m>m_max} x^m/m!` with `x = 2a|t|/(1 − e^{−b})`.
pub fn series_tail_bound(env: &DecayEnvelope, m_max: usize, t: f64) -> f64 {
    let x = if env.b.is_infinite() {
        2.0 * env.a * t.abs()
    } else {
        2.0 * env.a * t.abs() / (-(-env.b).exp_m1())
    };
    if x == 0.0 {
        return 0.0;
    }
    let mut term = (1..=m_max + 1).fold(1.0, |acc, k| acc * x / k as f64);
    let mut sum = 0.0;
    let mut k = m_max + 1;
    while term > 0.0 && term > sum * 1e-17 {
        sum += term;
        k += 1;
        term *= x / k as f64;
        if k > m_max + 10_000 {
            return f64::INFINITY;
        }
    }
    sum
}

/// Envelope for a finite-support series minimizing `a/(1 − e^{−b})`.
pub fn tail_envelope(series: &FourierMatrixSeries) -> DecayEnvelope {
    let norms: Vec<(i64, f64)> = series
        .iter()
        .map(|(k, j)| (k, j.norm_2()))
        .filter(|&(_, v)| v > 0.0)
        .collect();
    if norms.iter().all(|&(k, _)| k == 0) {
        let a = norms.first().map_or(0.0, |&(_, v)| v);
        return DecayEnvelope::new(a, f64::INFINITY);
    }
    let a_of = |b: f64| {
        norms
            .iter()
            .map(|&(k, v)| v * (b * k.unsigned_abs() as f64).exp())
            .fold(0.0, f64::max)
    };
    let mut best = (f64::INFINITY, 1.0);
    for i in 1..=400 {
        let b = 0.025 * i as f64;
        let score = a_of(b) / (-(-b).exp_m1());
        if score < best.0 {
            best = (score, b);
        }
    }
    DecayEnvelope::new(a_of(best.1), best.1)
}

/// Matrix-valued exponential polynomial used for grouped sums.
#[derive(Clone)]
struct MatrixExpPoly {
    terms: BTreeMap<Term, ComplexMatrix>,
}

impl MatrixExpPoly {
    fn constant(m: ComplexMatrix) -> Self {
        MatrixExpPoly {
            terms: BTreeMap::from([((0, 0), m)]),
        }
    }

    fn add_scaled(&mut self, key: Term, s: Complex64, m: &ComplexMatrix) {
        match self.terms.get_mut(&key) {
            Some(acc) => acc.axpy(s, m),
            None => {
                self.terms.insert(key, m.scale(s));
            }
        }
    }

    fn eval(&self, t: f64, omega: f64, dim: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (&(k, q), m) in &self.terms {
            let f = t.powi(q as i32) * Complex64::from_polar(1.0, k as f64 * omega * t);
            out.axpy(f, m);
        }
        out
    }
}

/// Sum of `ξ_p(t) J_p` over tuples of length `1..=m_max` whose prefix sums
/// satisfy `|c − Σ_{l≤w} p_l| ≤ N` (in doubled units), or over all tuples
/// when `window` is `None`.
fn grouped_sum(
    series: &FourierMatrixSeries,
    twice_j: i64,
    window: Option<i64>,
    m_max: usize,
    t: f64,
) -> ComplexMatrix {
    let dim = series.dim();
    let omega = series.omega();
    let coeffs: Vec<(i64, &ComplexMatrix)> = series.iter().collect();
    // states are doubled offsets c2; without a window a single state suffices
    let states: Vec<i64> = match window {
        None => vec![twice_j],
        Some(w) => {
            let mut s: Vec<i64> = (-w..=w).filter(|c| (c - twice_j).rem_euclid(2) == 0).collect();
            if !s.contains(&twice_j) {
                s.push(twice_j);
            }
            s
        }
    };
    let index = |c2: i64| states.iter().position(|&s| s == c2);
    let mut level: Vec<MatrixExpPoly> = states
        .iter()
        .map(|_| MatrixExpPoly::constant(ComplexMatrix::identity(dim)))
        .collect();
    let target = index(twice_j).expect("target state present");
    let mut total = ComplexMatrix::identity(dim);
    for _ in 0..m_max {
        let mut next = Vec::with_capacity(states.len());
        for &c2 in &states {
            let mut integrand = MatrixExpPoly {
                terms: BTreeMap::new(),
            };
            for &(p, jp) in &coeffs {
                let succ = c2 - 2 * p;
                let Some(si) = (match window {
                    None => Some(0),
                    Some(w) if succ.abs() <= w => index(succ),
                    Some(_) => None,
                }) else {
                    continue;
                };
                for (&(k, q), m) in &level[si].terms {
                    integrand.add_scaled((k + p, q), Complex64::new(1.0, 0.0), &jp.matmul(m));
                }
            }
            let mut integral = MatrixExpPoly {
                terms: BTreeMap::new(),
            };
            for (&(k, q), m) in &integrand.terms {
                for (key, f) in antiderivative_terms(k, q, omega) {
                    integral.add_scaled(key, f, m);
                }
            }
            next.push(integral);
        }
        level = next;
        total = &total + &level[target].eval(t, omega, dim);
    }
    total
}

fn check_m_max(m_max: usize) -> Result<()> {
    if m_max == 0 {
        return Err(HillError::Parameter("m_max must be at least 1".into()));
    }
    Ok(())
}

/// Truncated Taylor-Fourier series `I + Σ_{m≤m_max} Σ_p ξ_p(t) J_p` for `Φ(t)`.
pub fn series_fundamental(series: &FourierMatrixSeries, m_max: usize, t: f64) -> Result<SeriesSum> {
    check_m_max(m_max)?;
    Ok(SeriesSum {
        value: grouped_sum(series, 0, None, m_max, t),
        tail_bound: series_tail_bound(&tail_envelope(series), m_max, t),
    })
}

/// Truncated series for `Q_j(t)` over `P_j^(m)`, with `j = twice_j / 2`.
pub fn series_q_block(
    series: &FourierMatrixSeries,
    n: u32,
    twice_j: i64,
    m_max: usize,
    t: f64,
) -> Result<SeriesSum> {
    check_m_max(m_max)?;
    Ok(SeriesSum {
        value: grouped_sum(series, twice_j, Some(2 * n as i64), m_max, t),
        tail_bound: series_tail_bound(&tail_envelope(series), m_max, t),
    })
}

/// Truncated series for the subharmonic approximation, summing `ξ_p J_p`
/// over `P_subh^(m)` (explicit enumeration; desk-scale only).
pub fn series_subharmonic(
    series: &FourierMatrixSeries,
    n: u32,
    m_max: usize,
    t: f64,
) -> Result<SeriesSum> {
    check_m_max(m_max)?;
    let mut value = ComplexMatrix::identity(series.dim());
    for m in 1..=m_max {
        for p in subharmonic_set(n, m) {
            let jp = coeff_product(series, &p);
            if jp.is_zero() {
                continue;
            }
            value.axpy(xi_factor(&p, series.omega()).eval(t), &jp);
        }
    }
    Ok(SeriesSum {
        value,
        tail_bound: series_tail_bound(&tail_envelope(series), m_max, t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(v: &[i64]) -> IndexTuple {
        IndexTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn base_cases() {
        let xi = xi_factor(&tuple(&[0]), 1.0);
        assert_eq!(xi.terms().len(), 1);
        assert_eq!(xi.coefficient(0, 1), Complex64::new(1.0, 0.0));
        assert!((xi_eval(&xi, 2.5) - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        let w = 1.7;
        let xi = xi_factor(&tuple(&[3]), w);
        for &t in &[0.0, 0.4, 2.2] {
            let lam = Complex64::new(0.0, 3.0 * w);
            let exact = ((lam * t).exp() - 1.0) / lam;
            assert!((xi.eval(t) - exact).norm() < 1e-15);
        }
    }

    #[test]
    fn derivative_recursion_holds_symbolically() {
        for p in [vec![1, -1], vec![2, 0, -1], vec![0, 0, 1], vec![-1, 2, -1, 1]] {
            let p = tuple(&p);
            let lhs = xi_factor(&p, 1.3).derivative();
            let tail = p
                .tail()
                .map_or(ExpPolynomial::one(1.3), |t| xi_factor(&t, 1.3));
            let rhs = tail.shifted(p.entries()[0]);
            assert!(lhs.max_coeff_diff(&rhs) < 1e-13, "{p:?}");
        }
    }

    #[test]
    fn one_norm_and_partial_sums() {
        let p = tuple(&[-3, 0, 1, 1]);
        assert_eq!(p.one_norm(), 5);
        assert_eq!(p.partial_sums(), vec![-3, -3, -2, -1]);
        assert!(IndexTuple::new(vec![]).is_err());
    }

    #[test]
    fn small_sets() {
        let s: Vec<i64> = eligible_set(0, 2, 1).iter().map(|p| p.entries()[0]).collect();
        assert_eq!(s, vec![-2, -1, 0, 1, 2]);
        let s: Vec<i64> = subharmonic_set(2, 1).iter().map(|p| p.entries()[0]).collect();
        assert_eq!(s, (-4..=4).collect::<Vec<_>>());
        // half-integer center: |1/2 − p| ≤ 1 gives p ∈ {0, 1}
        let s: Vec<i64> = eligible_set(1, 1, 1).iter().map(|p| p.entries()[0]).collect();
        assert_eq!(s, vec![0, 1]);
    }

    #[test]
    fn periodicity_examples() {
        assert!(periodicity_check(&tuple(&[4, -1])));
        assert!(!periodicity_check(&tuple(&[1, -1, 0, 1, -1, 1])));
        assert!(!periodicity_check(&tuple(&[2, -2])));
    }

    #[test]
    fn combinatorics() {
        assert_eq!(count_multiindices(2, 3).unwrap(), 4);
        assert_eq!(count_multiindices(1, 9).unwrap(), 1);
        assert_eq!(vandermonde_multisum(0, &[2, 5]).unwrap(), 1);
        assert!(count_multiindices(0, 1).is_err());
    }

    #[test]
    fn first_order_truncation() {
        let s = FourierMatrixSeries::scalar_cosine(0.3, 0.5);
        let t = 0.8;
        let v = series_fundamental(&s, 1, t).unwrap().value[(0, 0)];
        // I + β t + γ(ξ_[1] + ξ_[−1]) = 1 + βt + 2γ sin t
        let exact = 1.0 + 0.3 * t + 2.0 * 0.5 * t.sin();
        assert!((v - Complex64::new(exact, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn scalar_series_converges() {
        let (beta, gamma, t) = (0.01, 0.8, 1.0);
        let s = FourierMatrixSeries::scalar_cosine(beta, gamma);
        let r = series_fundamental(&s, 30, t).unwrap();
        let exact = (beta * t + 2.0 * gamma * f64::sin(t)).exp();
        let err = (r.value[(0, 0)] - exact).norm();
        assert!(err <= r.tail_bound + 1e-10, "err {err} tail {}", r.tail_bound);
        assert!(r.tail_bound < 1e-8, "tail {}", r.tail_bound);
    }
}
