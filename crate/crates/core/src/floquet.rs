//! Floquet multipliers and certified stability verdicts.
//!
//! Every matrix within spectral-norm distance `E` of the approximate
//! monodromy matrix `Φ` has its eigenvalues in the pseudospectrum
//! `Λ_E = {z : σ_min(zI − Φ) ≤ E}`. Because `σ_min(zI − Φ)` is 1-Lipschitz
//! in `z`, a curve stays clear of `Λ_E` when neighbouring samples `a`, `b`
//! satisfy `(σ(a) + σ(b) − |b − a|)/2 > E` along its whole length; samples
//! are refined adaptively until that holds or a sample falls inside `Λ_E`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{error_bound, required_truncation, Formulation};
use crate::error::{HillError, Result};
use crate::fourier::{optimal_finite_support_envelope, DecayEnvelope, FourierMatrixSeries};
use crate::numerics::{eigenvalues, min_singular_value, ComplexMatrix};
use crate::projection::fundamental;

pub const DEFAULT_CIRCLE_SAMPLES: usize = 4096;
pub const DEFAULT_AXIS_SAMPLES: usize = 2048;
const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityStatus {
    GuaranteedStable,
    GuaranteedUnstable,
    NumericStable,
    NumericUnstable,
    Undetermined,
}

impl StabilityStatus {
    pub fn is_guaranteed(self) -> bool {
        matches!(self, Self::GuaranteedStable | Self::GuaranteedUnstable)
    }

    /// Stability claim carried by the status, if any.
    pub fn claims_stable(self) -> Option<bool> {
        match self {
            Self::GuaranteedStable | Self::NumericStable => Some(true),
            Self::GuaranteedUnstable | Self::NumericUnstable => Some(false),
            Self::Undetermined => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::GuaranteedStable => "guaranteed-stable",
            Self::GuaranteedUnstable => "guaranteed-unstable",
            Self::NumericStable => "numeric-stable",
            Self::NumericUnstable => "numeric-unstable",
            Self::Undetermined => "undetermined",
        }
    }
}

impl std::fmt::Display for StabilityStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub multipliers: Vec<Complex64>,
    pub exponents: Vec<Complex64>,
    /// Certified distance to the true monodromy matrix (`∞` when no valid
    /// envelope was available).
    pub bound: f64,
    pub status: StabilityStatus,
}

/// Sampling densities for the boundary tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub circle: usize,
    pub axis: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            circle: DEFAULT_CIRCLE_SAMPLES,
            axis: DEFAULT_AXIS_SAMPLES,
        }
    }
}

/// Eigenvalues of the approximate monodromy matrix.
pub fn floquet_multipliers(phi: &ComplexMatrix) -> Result<Vec<Complex64>> {
    eigenvalues(phi)
}

/// `α = ln λ / T` on the principal branch.
pub fn floquet_exponents(multipliers: &[Complex64], period: f64) -> Vec<Complex64> {
    multipliers.iter().map(|l| l.ln() / period).collect()
}

fn sigma_min_shift(phi: &ComplexMatrix, z: Complex64) -> Result<f64> {
    min_singular_value(&phi.scale_real(-1.0).shift_diagonal(z))
}

/// `σ_min(zI − Φ) ≤ E`.
pub fn pseudospectrum_membership(phi: &ComplexMatrix, z: Complex64, e: f64) -> Result<bool> {
    Ok(sigma_min_shift(phi, z)? <= e)
}

/// Budget of extra `σ_min` evaluations spent refining one curve.
const REFINE_BUDGET: usize = 1 << 20;

/// Decides whether the curve `z(s)`, `s ∈ [0, 1]`, of length `length` avoids
/// `Λ_E`. Starting from `n` uniform intervals, an interval `[a, b]` is clear
/// when `(σ(a) + σ(b) − length·(b − a))/2 > E`, which holds by the
/// 1-Lipschitz property; inconclusive intervals are bisected. Any sample with
/// `σ ≤ E` (or an exhausted budget) reports the curve as not clear.
fn curve_clear<F>(phi: &ComplexMatrix, e: f64, length: f64, n: usize, z_at: F) -> Result<bool>
where
    F: Fn(f64) -> Complex64,
{
    let sigma = |s: f64| sigma_min_shift(phi, z_at(s));
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let v = sigma(i as f64 / n as f64)?;
        if v <= e {
            return Ok(false);
        }
        values.push(v);
    }
    let mut stack: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|i| (i as f64 / n as f64, (i + 1) as f64 / n as f64, values[i], values[i + 1]))
        .collect();
    let mut budget = REFINE_BUDGET;
    while let Some((a, b, sa, sb)) = stack.pop() {
        if 0.5 * (sa + sb - length * (b - a)) > e {
            continue;
        }
        if budget == 0 || b - a < 1e-15 {
            return Ok(false);
        }
        budget -= 1;
        let mid = 0.5 * (a + b);
        let sm = sigma(mid)?;
        if sm <= e {
            return Ok(false);
        }
        stack.push((a, mid, sa, sm));
        stack.push((mid, b, sm, sb));
    }
    Ok(true)
}

/// Whether the circle `|z − c| = r` avoids `Λ_E`.
fn circle_clear(phi: &ComplexMatrix, e: f64, center: Complex64, r: f64, n: usize) -> Result<bool> {
    curve_clear(phi, e, 2.0 * PI * r, n, |s| center + Complex64::from_polar(r, 2.0 * PI * s))
}

/// Whether the real segment `[lo, hi]` avoids `Λ_E`.
fn segment_clear(phi: &ComplexMatrix, e: f64, lo: f64, hi: f64, n: usize) -> Result<bool> {
    curve_clear(phi, e, hi - lo, n, |s| Complex64::new(lo + (hi - lo) * s, 0.0))
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(HillError::Parameter(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

/// Certifies that `Λ_E` lies in the open unit disk, so every matrix within
/// `E` of `Φ` (in particular the true monodromy matrix) is stable.
pub fn certify_disk_containment(phi: &ComplexMatrix, e: f64, n_samples: usize) -> Result<bool> {
    check_samples(n_samples)?;
    if !e.is_finite() {
        return Ok(false);
    }
    if eigenvalues(phi)?.iter().any(|l| l.norm() >= 1.0) {
        return Ok(false);
    }
    circle_clear(phi, e, Complex64::new(0.0, 0.0), 1.0, n_samples)
}

const CONTOUR_FRACTIONS: [f64; 8] = [0.95, 0.8, 0.6, 0.4, 0.25, 0.15, 0.08, 0.04];

/// Radius of an isolating circle around `lambda_hat` outside the unit disk on
/// which `Λ_E` does not reach and which encloses exactly one eigenvalue.
pub fn instability_contour(
    phi: &ComplexMatrix,
    e: f64,
    lambda_hat: Complex64,
    n_samples: usize,
) -> Result<Option<f64>> {
    check_samples(n_samples)?;
    let gap = lambda_hat.norm() - 1.0;
    if !(gap > 0.0) || !e.is_finite() {
        return Ok(None);
    }
    let eigs = eigenvalues(phi)?;
    for f in CONTOUR_FRACTIONS {
        let r = f * gap;
        let inside = eigs.iter().filter(|l| (*l - lambda_hat).norm() < r).count();
        if inside != 1 {
            continue;
        }
        if circle_clear(phi, e, lambda_hat, r, n_samples)? {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Certifies that the true system has a multiplier near `lambda_hat`
/// strictly outside the unit circle.
pub fn certify_instability(
    phi: &ComplexMatrix,
    e: f64,
    lambda_hat: Complex64,
    n_samples: usize,
) -> Result<bool> {
    Ok(instability_contour(phi, e, lambda_hat, n_samples)?.is_some())
}

/// Two-set test for systems whose true multipliers lie either on the unit
/// circle or on the real axis (real, trace-free 2×2 systems such as the
/// Mathieu equation).
///
/// The real segment `[−ρ, ρ]` with `ρ = ‖Φ‖₂ + E + 0.1` covers the part of
/// the axis that `Λ_E` can reach. A clear axis forces the true multipliers
/// onto the circle (stable); a clear circle forces them onto the axis away
/// from `±1` (unstable).
pub fn mathieu_verdict(
    phi: &ComplexMatrix,
    e: f64,
    n_circle: usize,
    n_axis: usize,
    period: f64,
) -> Result<StabilityVerdict> {
    if phi.rows() != 2 || phi.cols() != 2 {
        return Err(HillError::Parameter("the two-set test needs a 2×2 monodromy matrix".into()));
    }
    check_samples(n_circle)?;
    check_samples(n_axis)?;
    let multipliers = floquet_multipliers(phi)?;
    let exponents = floquet_exponents(&multipliers, period);
    let status = if !e.is_finite() {
        StabilityStatus::Undetermined
    } else {
        let circle = circle_clear(phi, e, Complex64::new(0.0, 0.0), 1.0, n_circle)?;
        let rho = phi.norm_2() + e + 0.1;
        let axis = segment_clear(phi, e, -rho, rho, n_axis)?;
        match (axis, circle) {
            (true, false) => StabilityStatus::GuaranteedStable,
            (false, true) => StabilityStatus::GuaranteedUnstable,
            _ => StabilityStatus::Undetermined,
        }
    };
    Ok(StabilityVerdict {
        multipliers,
        exponents,
        bound: e,
        status,
    })
}

/// Where the decay envelope for a certificate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvelopeSource {
    Fixed(DecayEnvelope),
    /// Best envelope for a series supported on `k ∈ {−1, 0, 1}`, recomputed
    /// for each truncation order at `t = T`.
    OptimalFiniteSupport,
}

/// Decay rate used for series with only a `J₀` term.
const CONSTANT_SERIES_RATE: f64 = 200.0;

impl EnvelopeSource {
    /// Envelope for truncation order `n` at `t = T`, or `None` if no valid
    /// one exists.
    pub fn envelope_for(
        &self,
        series: &FourierMatrixSeries,
        n: u32,
        formulation: Formulation,
    ) -> Result<Option<DecayEnvelope>> {
        self.envelope_at(series, n, formulation, series.period())
    }

    /// Envelope for truncation order `n` tuned to the time `t`.
    pub fn envelope_at(
        &self,
        series: &FourierMatrixSeries,
        n: u32,
        formulation: Formulation,
        t: f64,
    ) -> Result<Option<DecayEnvelope>> {
        match self {
            EnvelopeSource::Fixed(env) => Ok(env.is_certifiable().then_some(*env)),
            EnvelopeSource::OptimalFiniteSupport => {
                if series.support_radius() > 1 {
                    return Err(HillError::Parameter(
                        "optimal envelope needs coefficients only at k = −1, 0, 1".into(),
                    ));
                }
                let beta = series.coeff(0).map_or(0.0, |m| m.norm_2());
                let gamma = [1, -1]
                    .iter()
                    .filter_map(|&k| series.coeff(k))
                    .map(|m| m.norm_2())
                    .fold(0.0, f64::max);
                if gamma == 0.0 {
                    return Ok(Some(DecayEnvelope::new(beta, CONSTANT_SERIES_RATE)));
                }
                if n == 0 {
                    return Ok(None);
                }
                let n_eff = match formulation {
                    Formulation::Direct => n,
                    Formulation::Subharmonic => 2 * n,
                };
                let opt = optimal_finite_support_envelope(beta, gamma, t, n_eff)?;
                Ok(opt.envelope.is_certifiable().then_some(opt.envelope))
            }
        }
    }
}

/// Smallest `N ≤ n_max` whose certified bound at time `t` is at most `e_des`.
pub fn certified_truncation(
    series: &FourierMatrixSeries,
    source: &EnvelopeSource,
    t: f64,
    e_des: f64,
    formulation: Formulation,
    n_max: u32,
) -> Result<Option<u32>> {
    if let EnvelopeSource::Fixed(env) = source {
        if !env.is_certifiable() {
            return Ok(None);
        }
        let n = required_truncation(*env, t, e_des, formulation)?;
        return Ok((n <= n_max).then_some(n));
    }
    for n in 1..=n_max {
        if let Some(env) = source.envelope_at(series, n, formulation, t)? {
            if error_bound(env, n, t, formulation)?.bound <= e_des {
                return Ok(Some(n));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub sampling: Sampling,
    /// Enables the circle/axis dichotomy test for 2×2 systems.
    pub mathieu_dichotomy: bool,
    /// Slack on `|λ| ≤ 1` for numeric verdicts.
    pub numeric_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::default(),
            mathieu_dichotomy: false,
            numeric_tol: 1e-8,
        }
    }
}

/// Result of the full pipeline at one truncation order.
#[derive(Debug, Clone)]
pub struct StabilityAnalysis {
    pub monodromy: ComplexMatrix,
    pub n: u32,
    pub formulation: Formulation,
    pub envelope: Option<DecayEnvelope>,
    pub verdict: StabilityVerdict,
}

/// Rounding allowance on the computed monodromy matrix, relative to
/// `max(1, ‖Φ‖₂)`.
pub const ROUNDING_ALLOWANCE: f64 = 1e-9;

/// Truncation bound plus the rounding allowance for `phi`.
pub fn certified_distance(phi: &ComplexMatrix, truncation_bound: f64) -> f64 {
    truncation_bound + ROUNDING_ALLOWANCE * phi.norm_2().max(1.0)
}

/// Numeric verdict from multipliers alone.
pub fn numeric_status(multipliers: &[Complex64], tol: f64) -> StabilityStatus {
    if multipliers.iter().all(|l| l.norm() <= 1.0 + tol) {
        StabilityStatus::NumericStable
    } else {
        StabilityStatus::NumericUnstable
    }
}

/// Classifies an approximate monodromy matrix given its certified error.
pub fn classify(
    phi: &ComplexMatrix,
    e: f64,
    period: f64,
    options: &AnalysisOptions,
) -> Result<StabilityVerdict> {
    let multipliers = floquet_multipliers(phi)?;
    let exponents = floquet_exponents(&multipliers, period);
    let mut status = numeric_status(&multipliers, options.numeric_tol);
    if e.is_finite() {
        if certify_disk_containment(phi, e, options.sampling.circle)? {
            status = StabilityStatus::GuaranteedStable;
        } else {
            for &l in multipliers.iter().filter(|l| l.norm() > 1.0) {
                if certify_instability(phi, e, l, options.sampling.circle)? {
                    status = StabilityStatus::GuaranteedUnstable;
                    break;
                }
            }
        }
        if !status.is_guaranteed() && options.mathieu_dichotomy && phi.rows() == 2 {
            let v = mathieu_verdict(phi, e, options.sampling.circle, options.sampling.axis, period)?;
            if v.status.is_guaranteed() {
                status = v.status;
            }
        }
    }
    Ok(StabilityVerdict {
        multipliers,
        exponents,
        bound: e,
        status,
    })
}

/// Monodromy approximation at `t = 2π/ω`, certificate, multipliers and the
/// strongest verdict the certificate supports.
pub fn analyze_stability(
    series: &FourierMatrixSeries,
    envelope: &EnvelopeSource,
    n: u32,
    formulation: Formulation,
    options: &AnalysisOptions,
) -> Result<StabilityAnalysis> {
    let period = series.period();
    let env = envelope.envelope_for(series, n, formulation)?;
    let truncation = match env {
        Some(env) => error_bound(env, n, period, formulation)?.bound,
        None => f64::INFINITY,
    };
    let phi = fundamental(series, n, period, formulation)?.value;
    let e = certified_distance(&phi, truncation);
    let verdict = classify(&phi, e, period, options)?;
    Ok(StabilityAnalysis {
        monodromy: phi,
        n,
        formulation,
        envelope: env,
        verdict,
    })
}

/// Smallest `N ≤ n_max` whose verdict is guaranteed.
pub fn minimal_n_for_guarantee(
    series: &FourierMatrixSeries,
    envelope: &EnvelopeSource,
    formulation: Formulation,
    n_max: u32,
    options: &AnalysisOptions,
) -> Result<Option<u32>> {
    let start = match formulation {
        Formulation::Direct => 0,
        Formulation::Subharmonic => 1,
    };
    for n in start..=n_max {
        let Some(env) = envelope.envelope_for(series, n, formulation)? else {
            continue;
        };
        // cheap pre-check: a bound beyond the monodromy scale cannot certify
        let e = error_bound(env, n, series.period(), formulation)?.bound;
        if !e.is_finite() || e > 1e6 {
            continue;
        }
        if analyze_stability(series, envelope, n, formulation, options)?
            .verdict
            .status
            .is_guaranteed()
        {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
