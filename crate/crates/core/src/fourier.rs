//! Matrix Fourier series `J(t) = Σ_k J_k e^{ikωt}` of a periodic system
//! matrix, exponential decay envelopes `‖J_k‖₂ ≤ a·e^{−b|k|}`, and the
//! coefficient algebra needed by the rest of the crate.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HillError, Result};
use crate::numerics::ComplexMatrix;

/// Coefficients whose spectral norm does not exceed this are ignored by
/// [`fit_decay_envelope`] unless the caller passes another floor.
pub const DEFAULT_COEFF_FLOOR: f64 = 1e-15;

/// Truncated matrix Fourier series with base frequency `omega`.
///
/// Absent coefficients are zero. When `real` is set the series is checked for
/// conjugate symmetry `J_{−k} = conj(J_k)` on every insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrixSeries {
    omega: f64,
    dim: usize,
    real: bool,
    coeffs: BTreeMap<i64, ComplexMatrix>,
}

impl FourierMatrixSeries {
    pub fn new(omega: f64, dim: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(HillError::Parameter(format!("omega must be positive, got {omega}")));
        }
        if dim == 0 {
            return Err(HillError::Parameter("dimension must be at least 1".into()));
        }
        Ok(Self {
            omega,
            dim,
            real: false,
            coeffs: BTreeMap::new(),
        })
    }

    /// Builds a series from `(k, J_k)` pairs.
    pub fn from_coeffs(
        omega: f64,
        dim: usize,
        coeffs: impl IntoIterator<Item = (i64, ComplexMatrix)>,
    ) -> Result<Self> {
        let mut s = Self::new(omega, dim)?;
        for (k, m) in coeffs {
            s.insert(k, m)?;
        }
        Ok(s)
    }

    /// Constant system matrix `J(t) = J₀`.
    pub fn constant(j0: ComplexMatrix, omega: f64) -> Result<Self> {
        let dim = j0.rows();
        Self::from_coeffs(omega, dim, [(0, j0)])
    }

    /// Scalar system `J(t) = β + 2γ cos t` (ω = 1).
    pub fn scalar_cosine(beta: f64, gamma: f64) -> Self {
        let c = |v: f64| ComplexMatrix::from_real_rows(&[&[v]]);
        let mut s = Self::from_coeffs(1.0, 1, [(0, c(beta)), (1, c(gamma)), (-1, c(gamma))])
            .expect("valid scalar series");
        s.real = true;
        s
    }

    /// Mathieu equation `ẍ + (δ + ε cos ωt)x = 0` in first-order form.
    pub fn mathieu(delta: f64, epsilon: f64, omega: f64) -> Result<Self> {
        let j0 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-delta, 0.0]]);
        let j1 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[-0.5 * epsilon, 0.0]]);
        let mut s = Self::from_coeffs(omega, 2, [(0, j0)])?;
        if epsilon != 0.0 {
            s.insert(1, j1.clone())?;
            s.insert(-1, j1)?;
        }
        s.set_real(true)?;
        Ok(s)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Declares the represented `J(t)` real-valued, checking conjugate symmetry.
    pub fn set_real(&mut self, real: bool) -> Result<()> {
        if real {
            self.check_conjugate_symmetry(1e-12)?;
        }
        self.real = real;
        Ok(())
    }

    fn check_conjugate_symmetry(&self, tol: f64) -> Result<()> {
        let zero = ComplexMatrix::zeros(self.dim, self.dim);
        for (&k, m) in &self.coeffs {
            let partner = self.coeffs.get(&-k).unwrap_or(&zero);
            let scale = m.max_abs().max(1.0);
            if m.max_abs_diff(&partner.conj()) > tol * scale {
                return Err(HillError::Parameter(format!(
                    "coefficients J_{k} and J_{} are not conjugate",
                    -k
                )));
            }
        }
        Ok(())
    }

    /// Stores `J_k`, replacing any previous value.
    pub fn insert(&mut self, k: i64, m: ComplexMatrix) -> Result<()> {
        if m.rows() != self.dim || m.cols() != self.dim {
            return Err(HillError::Dimension(format!(
                "coefficient J_{k} is {}x{}, series dimension is {}",
                m.rows(),
                m.cols(),
                self.dim
            )));
        }
        if !m.is_finite() {
            return Err(HillError::Domain(format!("coefficient J_{k} is not finite")));
        }
        self.coeffs.insert(k, m);
        Ok(())
    }

    pub fn coeff(&self, k: i64) -> Option<&ComplexMatrix> {
        self.coeffs.get(&k)
    }

    pub fn coeff_or_zero(&self, k: i64) -> ComplexMatrix {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.dim, self.dim))
    }

    /// Stored `(k, J_k)` pairs in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &ComplexMatrix)> {
        self.coeffs.iter().map(|(&k, m)| (k, m))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|k|` with a stored, nonzero coefficient (0 for an all-zero series).
    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .iter()
            .filter(|(_, m)| !m.is_zero())
            .map(|(k, _)| k.abs())
            .max()
            .unwrap_or(0)
    }

    /// Drops coefficients with spectral norm at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, m| m.norm_2() > tol);
        out
    }

    /// `Σ_k J_k e^{ikωt}` over the stored support.
    pub fn eval(&self, t: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (&k, m) in &self.coeffs {
            let phase = Complex64::from_polar(1.0, k as f64 * self.omega * t);
            out.axpy(phase, m);
        }
        out
    }

    /// Discrete Fourier projection of uniform samples over one period.
    pub fn from_samples(
        sampler: impl Fn(f64) -> ComplexMatrix,
        omega: f64,
        n_samples: usize,
        k_max: usize,
    ) -> Result<Self> {
        if n_samples <= 2 * k_max {
            return Err(HillError::Parameter(format!(
                "{n_samples} samples alias harmonics up to {k_max}; need more than {}",
                2 * k_max
            )));
        }
        let period = 2.0 * PI / omega;
        let samples: Vec<ComplexMatrix> = (0..n_samples)
            .map(|s| sampler(period * s as f64 / n_samples as f64))
            .collect();
        let dim = samples[0].rows();
        if samples.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(HillError::Dimension("sampler returned inconsistent shapes".into()));
        }
        let mut series = Self::new(omega, dim)?;
        let k_max = k_max as i64;
        for k in -k_max..=k_max {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for (s, m) in samples.iter().enumerate() {
                let angle = -2.0 * PI * (k * s as i64) as f64 / n_samples as f64;
                acc.axpy(Complex64::from_polar(1.0 / n_samples as f64, angle), m);
            }
            series.insert(k, acc)?;
        }
        Ok(series)
    }

    /// Cauchy product: coefficients of `A(t)·B(t)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if (self.omega - other.omega).abs() > 1e-14 * self.omega.max(other.omega) {
            return Err(HillError::Parameter(format!(
                "frequency mismatch: {} vs {}",
                self.omega, other.omega
            )));
        }
        if self.dim != other.dim {
            return Err(HillError::Dimension(format!(
                "cannot multiply {}-dimensional and {}-dimensional series",
                self.dim, other.dim
            )));
        }
        let mut acc: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
        for (&ka, ma) in &self.coeffs {
            for (&kb, mb) in &other.coeffs {
                let prod = ma.matmul(mb);
                acc.entry(ka + kb)
                    .and_modify(|m| m.axpy(Complex64::new(1.0, 0.0), &prod))
                    .or_insert(prod);
            }
        }
        let mut out = Self::new(self.omega, self.dim)?;
        out.coeffs = acc;
        out.real = self.real && other.real;
        Ok(out)
    }
}

/// Constants of an exponential decay bound `‖J_k‖₂ ≤ a·e^{−b|k|}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEnvelope {
    pub a: f64,
    /// `f64::INFINITY` marks a finite-support series whose decay rate is
    /// left to the caller.
    pub b: f64,
    pub bound_valid: bool,
}

impl DecayEnvelope {
    pub fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            bound_valid: b > LN_2,
        }
    }

    /// True when the envelope can back a truncation-error certificate.
    pub fn is_certifiable(&self) -> bool {
        self.bound_valid && self.b.is_finite() && self.a.is_finite() && self.a >= 0.0
    }

    /// Checks the majorization against every stored coefficient above `floor`.
    pub fn majorizes(&self, series: &FourierMatrixSeries, floor: f64) -> bool {
        series.iter().all(|(k, m)| {
            let norm = m.norm_2();
            norm <= floor || norm <= self.a * (-self.b * k.abs() as f64).exp() * (1.0 + 1e-12)
        })
    }

    /// Smallest `a` that makes `(a, b)` majorize the series for a chosen `b`.
    pub fn with_rate(series: &FourierMatrixSeries, b: f64) -> Self {
        let a = series
            .iter()
            .map(|(k, m)| m.norm_2() * (b * k.abs() as f64).exp())
            .fold(0.0, f64::max);
        Self::new(a, b)
    }
}

/// Least-squares fit of `ln‖J_k‖₂` against `|k|` over coefficients above
/// `floor`, followed by the smallest inflation of `a` that turns the fitted
/// line into a true majorant.
///
/// A series whose retained coefficients all sit at `k = 0` yields
/// `b = +∞`; the decay rate must then be chosen by the caller.
pub fn fit_decay_envelope(series: &FourierMatrixSeries, floor: f64) -> Result<DecayEnvelope> {
    if series.is_empty() {
        return Err(HillError::Parameter("empty series".into()));
    }
    if !(floor > 0.0) {
        return Err(HillError::Parameter(format!("floor must be positive, got {floor}")));
    }
    let points: Vec<(f64, f64)> = series
        .iter()
        .map(|(k, m)| (k.abs() as f64, m.norm_2()))
        .filter(|&(_, norm)| norm > floor)
        .collect();
    if points.is_empty() {
        return Err(HillError::EmptyFit { floor });
    }
    let distinct_k = {
        let mut ks: Vec<f64> = points.iter().map(|p| p.0).collect();
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        ks
    };
    if distinct_k.len() == 1 {
        if distinct_k[0] != 0.0 {
            return Err(HillError::Parameter(
                "a single nonzero harmonic does not determine a decay rate; supply b".into(),
            ));
        }
        let a = points.iter().map(|p| p.1).fold(0.0, f64::max);
        return Ok(DecayEnvelope::new(a, f64::INFINITY));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1.ln() - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let b = -slope;
    let log_a = points
        .iter()
        .map(|&(k, norm)| norm.ln() + b * k)
        .fold(intercept, f64::max);
    Ok(DecayEnvelope::new(log_a.exp(), b))
}

/// Which branch of the closed-form optimum was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeBranch {
    /// Envelope tight on the first harmonic, `a = N/(4t)`.
    FirstHarmonic,
    /// Envelope tight on both `J₀` and `J_{±1}`, `a = β`.
    BothHarmonics,
    /// `γ = 0`: the series is constant and the bound vanishes.
    Constant,
}

/// Optimal decay envelope for a series supported on `k ∈ {−1, 0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalEnvelope {
    /// Decay parameter with `b = ln 2 − ln ε`.
    pub epsilon: f64,
    pub envelope: DecayEnvelope,
    /// Best bound `ε^N (e^{4at} − 1)` over all envelopes of this family.
    pub e_star: f64,
    pub branch: EnvelopeBranch,
}

/// Minimizes `ε^N (e^{4a(ε)t} − 1)` with `a(ε) = max{β, 2γ/ε}` for a series
/// with `‖J₀‖ = β` and `‖J_{±1}‖ = γ`.
///
/// The envelope is flagged invalid (and the bound meaningless) when the
/// optimal `ε` is not below 1.
pub fn optimal_finite_support_envelope(
    beta: f64,
    gamma: f64,
    t: f64,
    n: u32,
) -> Result<OptimalEnvelope> {
    if n == 0 {
        return Err(HillError::Parameter("truncation order must be at least 1".into()));
    }
    if !(gamma >= 0.0 && beta >= 0.0) {
        return Err(HillError::Parameter("coefficient norms must be nonnegative".into()));
    }
    let t = t.abs();
    if !(t > 0.0) {
        return Err(HillError::Parameter("time must be nonzero".into()));
    }
    let nf = n as f64;
    if gamma == 0.0 {
        return Ok(OptimalEnvelope {
            epsilon: 0.0,
            envelope: DecayEnvelope::new(beta, f64::INFINITY),
            e_star: 0.0,
            branch: EnvelopeBranch::Constant,
        });
    }
    let (epsilon, a, branch) = if beta < nf / (4.0 * t) {
        (8.0 * t * gamma / nf, nf / (4.0 * t), EnvelopeBranch::FirstHarmonic)
    } else {
        (2.0 * gamma / beta, beta, EnvelopeBranch::BothHarmonics)
    };
    let e_star = (nf * epsilon.ln() + (4.0 * a * t).exp_m1().ln()).exp();
    Ok(OptimalEnvelope {
        epsilon,
        envelope: DecayEnvelope::new(a, LN_2 - epsilon.ln()),
        e_star,
        branch,
    })
}

/// Series file layout shared with the command-line tool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesFile {
    pub omega: f64,
    pub dim: usize,
    #[serde(default)]
    pub real: bool,
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub k: i64,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl SeriesFile {
    pub fn from_series(series: &FourierMatrixSeries) -> Self {
        let n = series.dim();
        let coeffs = series
            .iter()
            .map(|(k, m)| CoeffEntry {
                k,
                re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
                im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
            })
            .collect();
        Self {
            omega: series.omega(),
            dim: n,
            real: series.is_real(),
            coeffs,
        }
    }

    pub fn to_series(&self) -> Result<FourierMatrixSeries> {
        let n = self.dim;
        let mut series = FourierMatrixSeries::new(self.omega, n)?;
        for entry in &self.coeffs {
            let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
            if !shape_ok(&entry.re) || !(entry.im.is_empty() || shape_ok(&entry.im)) {
                return Err(HillError::Format(format!(
                    "coefficient k = {} is not {n}x{n}",
                    entry.k
                )));
            }
            let m = ComplexMatrix::from_fn(n, n, |i, j| {
                let im = if entry.im.is_empty() { 0.0 } else { entry.im[i][j] };
                Complex64::new(entry.re[i][j], im)
            });
            series.insert(entry.k, m)?;
        }
        series.set_real(self.real)?;
        Ok(series)
    }

    pub fn from_json(text: &str) -> Result<FourierMatrixSeries> {
        let file: SeriesFile =
            serde_json::from_str(text).map_err(|e| HillError::Format(e.to_string()))?;
        file.to_series()
    }

    pub fn to_json(series: &FourierMatrixSeries) -> String {
        serde_json::to_string_pretty(&Self::from_series(series)).expect("serializable")
    }
}
