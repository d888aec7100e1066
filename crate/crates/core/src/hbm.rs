//! Harmonic balance for the forced Duffing oscillator
//! `ẍ + δẋ + αx + βx³ = F cos ωt` and its linearization along a periodic
//! solution.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HillError, Result};
use crate::fourier::FourierMatrixSeries;
use crate::numerics::{solve, ComplexMatrix};

pub const DEFAULT_HARMONICS: usize = 45;
const NEWTON_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    #[serde(rename = "F")]
    pub force: f64,
    pub omega: f64,
}

impl DuffingParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, force: f64, omega: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            delta,
            force,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn configuration_1() -> Self {
        Self {
            alpha: 5.0,
            beta: 0.1,
            delta: 0.02,
            force: 0.1,
            omega: 5.0,
        }
    }

    pub fn configuration_2() -> Self {
        Self {
            alpha: 0.5,
            beta: 3.0,
            delta: 0.05,
            force: 0.1,
            omega: 0.3,
        }
    }

    fn validate(&self) -> Result<()> {
        let all = [self.alpha, self.beta, self.delta, self.force, self.omega];
        if all.iter().any(|v| !v.is_finite()) || !(self.omega > 0.0) {
            return Err(HillError::Parameter(format!("invalid Duffing parameters {self:?}")));
        }
        Ok(())
    }

    /// Complex amplitude of the linear (`β = 0`) steady state at `e^{iωt}`.
    pub fn linear_response(&self) -> Complex64 {
        let w = self.omega;
        Complex64::new(self.force, 0.0) / Complex64::new(self.alpha - w * w, self.delta * w)
    }
}

/// Periodic solution `x₁(t) = Σ_{|k|≤N_h} c_k e^{ikωt}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSolution {
    pub harmonics: usize,
    /// `c_k` for `k = −N_h..N_h`.
    pub coeffs: Vec<Complex64>,
    pub omega: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl PeriodicSolution {
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.harmonics as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_real(&self.coeffs, self.harmonics, self.omega, t, 0)
    }

    /// Time derivative of `x₁`.
    pub fn eval_velocity(&self, t: f64) -> f64 {
        eval_real(&self.coeffs, self.harmonics, self.omega, t, 1)
    }

    /// `x₁` as a scalar Fourier series.
    pub fn as_series(&self) -> Result<FourierMatrixSeries> {
        let mut s = FourierMatrixSeries::new(self.omega, 1)?;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != Complex64::new(0.0, 0.0) {
                s.insert(i as i64 - self.harmonics as i64, ComplexMatrix::new(1, 1, vec![c])?)?;
            }
        }
        Ok(s)
    }
}

/// Solution export: harmonics plus the parameters that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub params: DuffingParams,
    pub solution: PeriodicSolution,
}

impl SolutionFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SolutionFile =
            serde_json::from_str(text).map_err(|e| HillError::Format(e.to_string()))?;
        f.params.validate()?;
        check_coeffs(&f.solution.coeffs, f.solution.harmonics)?;
        Ok(f)
    }
}

fn eval_real(coeffs: &[Complex64], n_h: usize, omega: f64, t: f64, derivative: u32) -> f64 {
    let mut v = Complex64::new(0.0, 0.0);
    for (i, &c) in coeffs.iter().enumerate() {
        let k = i as f64 - n_h as f64;
        let d = Complex64::new(0.0, k * omega).powu(derivative);
        v += c * d * Complex64::from_polar(1.0, k * omega * t);
    }
    v.re
}

fn check_coeffs(coeffs: &[Complex64], n_h: usize) -> Result<()> {
    if coeffs.len() != 2 * n_h + 1 {
        return Err(HillError::Dimension(format!(
            "expected {} coefficients for {n_h} harmonics, got {}",
            2 * n_h + 1,
            coeffs.len()
        )));
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for k in 0..=n_h {
        if (coeffs[n_h + k] - coeffs[n_h - k].conj()).norm() > 1e-12 * scale {
            return Err(HillError::Parameter(format!(
                "coefficients are not conjugate symmetric at k = {k}"
            )));
        }
    }
    Ok(())
}

/// Number of time samples for the alternating frequency/time step; large
/// enough that the cubic term aliases nothing onto harmonics `≤ N_h`.
fn aft_points(n_h: usize) -> usize {
    4 * n_h + 1
}

/// Cosine/sine coordinates `[a₀, a₁, b₁, …]` with
/// `x = a₀ + Σ a_k cos kωt + b_k sin kωt`.
fn to_real(coeffs: &[Complex64], n_h: usize) -> Vec<f64> {
    let mut u = vec![coeffs[n_h].re];
    for k in 1..=n_h {
        let c = coeffs[n_h + k];
        u.push(2.0 * c.re);
        u.push(-2.0 * c.im);
    }
    u
}

fn to_complex(u: &[f64], n_h: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * n_h + 1];
    c[n_h] = Complex64::new(u[0], 0.0);
    for k in 1..=n_h {
        let ck = Complex64::new(u[2 * k - 1], -u[2 * k]) * 0.5;
        c[n_h + k] = ck;
        c[n_h - k] = ck.conj();
    }
    c
}

/// Basis functions `1, cos ωt, sin ωt, …` sampled on `M` uniform points.
struct AftGrid {
    basis: Vec<Vec<f64>>,
    points: usize,
}

impl AftGrid {
    fn new(n_h: usize) -> Self {
        let m = aft_points(n_h);
        let mut basis = Vec::with_capacity(2 * n_h + 1);
        basis.push(vec![1.0; m]);
        for k in 1..=n_h {
            let (c, s): (Vec<f64>, Vec<f64>) = (0..m)
                .map(|i| {
                    let th = 2.0 * PI * (k * i) as f64 / m as f64;
                    (th.cos(), th.sin())
                })
                .unzip();
            basis.push(c);
            basis.push(s);
        }
        Self { basis, points: m }
    }

    fn synthesize(&self, u: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.points];
        for (ui, b) in u.iter().zip(&self.basis) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += ui * bi;
            }
        }
        x
    }

    /// Coordinates of the trigonometric projection of samples `y`.
    fn project(&self, y: &[f64]) -> Vec<f64> {
        let m = self.points as f64;
        self.basis
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let w = if i == 0 { 1.0 / m } else { 2.0 / m };
                w * b.iter().zip(y).map(|(bi, yi)| bi * yi).sum::<f64>()
            })
            .collect()
    }
}

/// Residual and Jacobian in cosine/sine coordinates.
fn real_residual(u: &[f64], p: &DuffingParams, grid: &AftGrid, with_jacobian: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let n_h = (u.len() - 1) / 2;
    let x = grid.synthesize(u);
    let cubic: Vec<f64> = x.iter().map(|v| p.beta * v * v * v).collect();
    let mut r = grid.project(&cubic);
    r[0] += p.alpha * u[0];
    for k in 1..=n_h {
        let kw = k as f64 * p.omega;
        let stiff = p.alpha - kw * kw;
        let (a, b) = (u[2 * k - 1], u[2 * k]);
        r[2 * k - 1] += stiff * a + p.delta * kw * b;
        r[2 * k] += stiff * b - p.delta * kw * a;
    }
    if n_h >= 1 {
        r[1] -= p.force;
    }
    let jac = with_jacobian.then(|| {
        let dim = u.len();
        let mut j = vec![0.0; dim * dim];
        let slope: Vec<f64> = x.iter().map(|v| 3.0 * p.beta * v * v).collect();
        for col in 0..dim {
            let y: Vec<f64> = grid.basis[col].iter().zip(&slope).map(|(b, s)| b * s).collect();
            for (row, v) in grid.project(&y).into_iter().enumerate() {
                j[row * dim + col] = v;
            }
        }
        j[0] += p.alpha;
        for k in 1..=n_h {
            let kw = k as f64 * p.omega;
            let stiff = p.alpha - kw * kw;
            let (ia, ib) = (2 * k - 1, 2 * k);
            j[ia * dim + ia] += stiff;
            j[ia * dim + ib] += p.delta * kw;
            j[ib * dim + ib] += stiff;
            j[ib * dim + ia] -= p.delta * kw;
        }
        j
    });
    (r, jac)
}

/// Complex residual of `ẍ + δẋ + αx + βx³ − F cos ωt` at harmonics
/// `k = 0..N_h`, with the cubic term evaluated on `4N_h + 1` time samples.
pub fn hbm_residual(coeffs: &[Complex64], params: &DuffingParams, n_h: usize) -> Result<Vec<Complex64>> {
    params.validate()?;
    check_coeffs(coeffs, n_h)?;
    let grid = AftGrid::new(n_h);
    let (r, _) = real_residual(&to_real(coeffs, n_h), params, &grid, false);
    Ok(to_complex(&r, n_h)[n_h..].to_vec())
}

fn residual_norm(r: &[f64]) -> f64 {
    let n_h = (r.len() - 1) / 2;
    to_complex(r, n_h)[n_h..].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Newton iteration on the harmonic balance equations. Without an initial
/// guess the linear response is used.
pub fn solve_duffing_hbm(
    params: &DuffingParams,
    n_h: usize,
    initial: Option<&PeriodicSolution>,
) -> Result<PeriodicSolution> {
    params.validate()?;
    if n_h == 0 {
        return Err(HillError::Parameter("need at least one harmonic".into()));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n_h + 1];
    match initial {
        Some(init) => {
            for k in -(n_h as i64)..=n_h as i64 {
                coeffs[(k + n_h as i64) as usize] = init.coeff(k);
            }
            check_coeffs(&coeffs, n_h)?;
        }
        None => {
            let c1 = params.linear_response() * 0.5;
            coeffs[n_h + 1] = c1;
            coeffs[n_h - 1] = c1.conj();
        }
    }
    let grid = AftGrid::new(n_h);
    let mut u = to_real(&coeffs, n_h);
    let dim = u.len();
    let tol = NEWTON_TOL * params.force.abs().max(1.0);
    let mut iterations = 0;
    loop {
        let (r, jac) = real_residual(&u, params, &grid, true);
        let norm = residual_norm(&r);
        if norm < tol {
            return Ok(PeriodicSolution {
                harmonics: n_h,
                coeffs: to_complex(&u, n_h),
                omega: params.omega,
                residual_norm: norm,
                iterations,
            });
        }
        if iterations == MAX_NEWTON || !norm.is_finite() {
            return Err(HillError::Convergence {
                iterations,
                residual: norm,
            });
        }
        let j = ComplexMatrix::new(
            dim,
            dim,
            jac.expect("jacobian requested").into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )?;
        let rhs = ComplexMatrix::new(dim, 1, r.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
        let step = solve(&j, &rhs)?;
        for (ui, s) in u.iter_mut().zip(step.as_slice()) {
            *ui -= s.re;
        }
        iterations += 1;
    }
}

/// `J(t) = [[0, 1], [−α − 3βx₁(t)², −δ]]` as a Fourier series in the
/// forcing frequency.
pub fn linearized_series(sol: &PeriodicSolution, params: &DuffingParams) -> Result<FourierMatrixSeries> {
    params.validate()?;
    let x = sol.as_series()?;
    let x2 = x.convolve(&x)?;
    let mut series = FourierMatrixSeries::new(sol.omega, 2)?;
    let n2 = 2 * sol.harmonics as i64;
    for k in -n2..=n2 {
        let sq = x2.coeff(k).map_or(Complex64::new(0.0, 0.0), |m| m[(0, 0)]);
        let mut jk = ComplexMatrix::zeros(2, 2);
        jk[(1, 0)] = -3.0 * params.beta * sq;
        if k == 0 {
            jk[(0, 1)] = Complex64::new(1.0, 0.0);
            jk[(1, 0)] -= params.alpha;
            jk[(1, 1)] = Complex64::new(-params.delta, 0.0);
        }
        if !jk.is_zero() {
            series.insert(k, jk)?;
        }
    }
    series.set_real(true)?;
    Ok(series)
}
