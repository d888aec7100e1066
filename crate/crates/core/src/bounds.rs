//! Closed-form truncation-error bounds for the Hill-matrix projections and
//! the truncation orders they guarantee.
//!
//! With an envelope `‖J_k‖₂ ≤ a·e^{−b|k|}`, `b > ln 2`:
//!
//! * direct projection: `‖Φ(t) − C e^{Ht} W‖₂ ≤ (2e^{−b})^N (e^{|4at|} − 1)`
//! * subharmonic projection: the same with `N` replaced by `2N`.
//!
//! `(2e^{−b})^N` is evaluated in the log domain so that large `N` underflows
//! gracefully to zero instead of producing `0·∞`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{HillError, Result};
use crate::fourier::DecayEnvelope;

/// Which projection formula a bound or approximation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Direct,
    Subharmonic,
}

impl Formulation {
    /// Exponent multiplier applied to `N` in the bound.
    fn order_factor(self) -> u64 {
        match self {
            Formulation::Direct => 1,
            Formulation::Subharmonic => 2,
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = HillError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Formulation::Direct),
            "subharmonic" | "subh" => Ok(Formulation::Subharmonic),
            other => Err(HillError::Parameter(format!("unknown formulation `{other}`"))),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Formulation::Direct => "direct",
            Formulation::Subharmonic => "subharmonic",
        })
    }
}

/// A truncation-error bound for one `(t, N, formulation, envelope)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorCertificate {
    pub bound: f64,
    pub t: f64,
    pub n: u32,
    pub formulation: Formulation,
    pub envelope: DecayEnvelope,
}

fn check_envelope(env: &DecayEnvelope) -> Result<()> {
    if !(env.b > LN_2) {
        return Err(HillError::InvalidEnvelope { b: env.b });
    }
    if !env.b.is_finite() || !env.a.is_finite() || env.a < 0.0 {
        return Err(HillError::Parameter(format!(
            "certificates need a finite envelope, got a = {}, b = {}",
            env.a, env.b
        )));
    }
    Ok(())
}

/// `(2e^{−b})^{order} (e^{|4at|} − 1)`.
fn bound_value(env: &DecayEnvelope, order: u64, t: f64) -> f64 {
    let growth = (4.0 * env.a * t).abs();
    if growth == 0.0 {
        return 0.0;
    }
    let log_decay = order as f64 * (LN_2 - env.b);
    (log_decay + growth.exp_m1().ln()).exp()
}

fn certificate(env: DecayEnvelope, n: u32, t: f64, formulation: Formulation) -> Result<ErrorCertificate> {
    check_envelope(&env)?;
    Ok(ErrorCertificate {
        bound: bound_value(&env, formulation.order_factor() * n as u64, t),
        t,
        n,
        formulation,
        envelope: env,
    })
}

/// Bound for the direct projection `C e^{Ht} W`.
pub fn direct_error_bound(env: DecayEnvelope, n: u32, t: f64) -> Result<ErrorCertificate> {
    certificate(env, n, t, Formulation::Direct)
}

/// Bound for the subharmonic projection.
pub fn subharmonic_error_bound(env: DecayEnvelope, n: u32, t: f64) -> Result<ErrorCertificate> {
    certificate(env, n, t, Formulation::Subharmonic)
}

pub fn error_bound(
    env: DecayEnvelope,
    n: u32,
    t: f64,
    formulation: Formulation,
) -> Result<ErrorCertificate> {
    certificate(env, n, t, formulation)
}

/// Smallest truncation order whose bound does not exceed `e_des`.
///
/// The real-valued threshold
/// `(|4at| + ln(1 − e^{−|4at|}) − ln E_des) / (b − ln 2)` (halved for the
/// subharmonic formulation) is rounded up and clamped at zero, then nudged by
/// one step if floating-point rounding put it on the wrong side of `e_des`.
pub fn required_truncation(
    env: DecayEnvelope,
    t: f64,
    e_des: f64,
    formulation: Formulation,
) -> Result<u32> {
    check_envelope(&env)?;
    if !(e_des > 0.0) {
        return Err(HillError::Parameter(format!("desired error must be positive, got {e_des}")));
    }
    if t == 0.0 {
        return Err(HillError::Parameter("time must be nonzero".into()));
    }
    let growth = (4.0 * env.a * t).abs();
    if growth == 0.0 {
        return Ok(0);
    }
    let numerator = growth + (-(-growth).exp_m1()).ln() - e_des.ln();
    let factor = formulation.order_factor() as f64;
    let threshold = numerator / (factor * (env.b - LN_2));
    let mut n = threshold.ceil().max(0.0) as u32;
    let bound = |n: u32| bound_value(&env, formulation.order_factor() * n as u64, t);
    while n > 0 && bound(n - 1) <= e_des {
        n -= 1;
    }
    while bound(n) > e_des {
        n += 1;
    }
    Ok(n)
}

/// Polynomial majorant `|t|^m / m!` of the scalar factors.
pub fn xi_polynomial_bound(m: u32, t: f64) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * t.abs() / k as f64)
}

/// Closed-form tail `Σ_{M>N} binom(M+k, k) x^M`, written as
/// `x^N Σ_{m=0}^{k} binom(N+k+1, N+m+1) (x/(1−x))^{m+1}`.
pub fn taylor_remainder(x: f64, k: u32, n: u32) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(HillError::Domain(format!("|x| must be below 1, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ratio = x / (1.0 - x);
    let total = (n + k + 1) as u64;
    let mut sum = 0.0;
    for m in 0..=k {
        sum += binomial_f64(total, (n + m + 1) as u64) * ratio.powi(m as i32 + 1);
    }
    Ok(x.powi(n as i32) * sum)
}

/// Binomial coefficient in floating point (exact for the ranges used here).
pub(crate) fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
