use std::f64::consts::PI;

use hillcert_core::bounds::{error_bound, xi_polynomial_bound};
use hillcert_core::fourier::{fit_decay_envelope, DEFAULT_COEFF_FLOOR};
use hillcert_core::floquet::{
    analyze_stability, certified_truncation, numeric_status, AnalysisOptions, EnvelopeSource, StabilityAnalysis,
};
use hillcert_core::hbm::{linearized_series, solve_duffing_hbm, SolutionFile};
use hillcert_core::projection::{fundamental, reference_fundamental};
use hillcert_core::series::{xi_factor, IndexTuple};
use hillcert_core::{ComplexMatrix, DecayEnvelope, Formulation, FourierMatrixSeries, HillError, StabilityStatus};
use rayon::prelude::*;

use crate::config::{duffing_params, Settings, SweepSpec, System};
use crate::error::{CliError, CliResult};
use crate::format::{csv_line, fmt_e, Json};

pub const DEFAULT_SWEEP_N: u32 = 45;
pub const REFERENCE_RTOL: f64 = 1e-12;
pub const REFERENCE_ATOL: f64 = 1e-14;
const DEFAULT_VALIDATE_EDES: f64 = 1e-6;

/// Primary output plus diagnostics destined for stderr.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub body: String,
    pub notes: Vec<String>,
}

fn options(settings: &Settings, system: &System) -> AnalysisOptions {
    AnalysisOptions {
        sampling: settings.sampling,
        mathieu_dichotomy: system.dichotomy,
        ..AnalysisOptions::default()
    }
}

fn envelope_json(env: Option<DecayEnvelope>) -> Json {
    match env {
        Some(e) => Json::obj([("a", Json::num(e.a)), ("b", Json::num(e.b))]),
        None => Json::Null,
    }
}

fn invalid_envelope(source: &EnvelopeSource) -> Option<CliError> {
    match source {
        EnvelopeSource::Fixed(env) if !env.is_certifiable() => {
            Some(HillError::InvalidEnvelope { b: env.b }.into())
        }
        _ => None,
    }
}

/// Truncation order and, when derived from `edes`, the target it met.
fn resolve_n(settings: &Settings, system: &System) -> CliResult<(u32, Option<f64>)> {
    match (settings.config.n, settings.config.edes) {
        (Some(n), None) => Ok((n, None)),
        (None, Some(e_des)) => {
            if let Some(err) = invalid_envelope(&system.envelope) {
                return Err(err);
            }
            let t = settings.config.t.unwrap_or(system.series.period());
            let n_max = settings.n_max();
            certified_truncation(&system.series, &system.envelope, t, e_des, settings.formulation, n_max)?
                .map(|n| (n, Some(e_des)))
                .ok_or_else(|| {
                    CliError::Certificate(format!("no truncation order up to {n_max} certifies edes = {e_des:e}"))
                })
        }
        _ => Err(CliError::Usage("analyze needs exactly one of N and edes".into())),
    }
}

pub fn analysis_json(system: &System, a: &StabilityAnalysis) -> Vec<(String, Json)> {
    let v = &a.verdict;
    vec![
        ("system".into(), Json::str(&system.label)),
        ("formulation".into(), Json::str(a.formulation.to_string())),
        ("N".into(), Json::Int(a.n as i64)),
        ("period".into(), Json::num(system.series.period())),
        ("envelope".into(), envelope_json(a.envelope)),
        ("bound".into(), Json::num(v.bound)),
        ("monodromy".into(), Json::matrix(&a.monodromy)),
        ("multipliers".into(), Json::complex_list(&v.multipliers)),
        ("exponents".into(), Json::complex_list(&v.exponents)),
        ("verdict".into(), Json::str(v.status.label())),
    ]
}

pub fn analyze(settings: &Settings) -> CliResult<Output> {
    let system = settings.system()?;
    let (n, e_des) = resolve_n(settings, &system)?;
    let f = settings.formulation;
    let result = analyze_stability(&system.series, &system.envelope, n, f, &options(settings, &system))?;
    let mut fields = analysis_json(&system, &result);
    fields.push(("edes".into(), e_des.map_or(Json::Null, Json::num)));
    if let Some(t) = settings.config.t {
        let env = system.envelope.envelope_at(&system.series, n, f, t)?;
        let bound = match env {
            Some(env) => error_bound(env, n, t, f)?.bound,
            None => f64::INFINITY,
        };
        let phi = fundamental(&system.series, n, t, f)?.value;
        fields.push(("t".into(), Json::num(t)));
        fields.push(("bound_at_t".into(), Json::num(bound)));
        fields.push(("fundamental_at_t".into(), Json::matrix(&phi)));
    }
    Ok(Output {
        body: Json::Obj(fields).render(),
        notes: vec![format!("N = {n}, verdict {}", result.verdict.status)],
    })
}

/// Inclusive uniform grid; a single point sits at the lower end.
pub fn linspace(range: [f64; 2], count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![range[0]],
        _ => (0..count)
            .map(|i| range[0] + (range[1] - range[0]) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub delta: f64,
    pub epsilon: f64,
    pub max_multiplier: f64,
    pub status: StabilityStatus,
}

fn check_sweep(spec: &SweepSpec) -> CliResult<()> {
    let finite = spec.delta.iter().chain(&spec.epsilon).all(|v| v.is_finite());
    if !finite || !(spec.omega > 0.0 && spec.omega.is_finite()) {
        return Err(CliError::Usage("sweep ranges and omega must be finite, omega positive".into()));
    }
    if spec.resolution.contains(&0) {
        return Err(CliError::Usage("sweep resolution must be positive".into()));
    }
    Ok(())
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HILLCERT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("HILLCERT_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(CliError::Usage("HILLCERT_THREADS must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

/// Mathieu grid in row-major order: ε outer, δ inner.
pub fn sweep_points(
    spec: &SweepSpec,
    n: u32,
    f: Formulation,
    envelope: &EnvelopeSource,
    options: &AnalysisOptions,
) -> CliResult<Vec<SweepPoint>> {
    check_sweep(spec)?;
    let deltas = linspace(spec.delta, spec.resolution[0]);
    let epsilons = linspace(spec.epsilon, spec.resolution[1]);
    let grid: Vec<(f64, f64)> = epsilons
        .iter()
        .flat_map(|&e| deltas.iter().map(move |&d| (d, e)))
        .collect();
    let pool = thread_pool()?;
    pool.install(|| {
        grid.par_iter()
            .map(|&(delta, epsilon)| {
                let series = FourierMatrixSeries::mathieu(delta, epsilon, spec.omega)?;
                let a = analyze_stability(&series, envelope, n, f, options)?;
                let mut status = a.verdict.status;
                if status == StabilityStatus::Undetermined {
                    status = numeric_status(&a.verdict.multipliers, options.numeric_tol);
                }
                let max_multiplier = a.verdict.multipliers.iter().map(|l| l.norm()).fold(0.0, f64::max);
                Ok(SweepPoint {
                    delta,
                    epsilon,
                    max_multiplier,
                    status,
                })
            })
            .collect::<Result<Vec<_>, HillError>>()
    })
    .map_err(CliError::from)
}

pub fn sweep(settings: &Settings) -> CliResult<Output> {
    let spec = settings.config.sweep.clone().unwrap_or_default();
    let n = settings.config.n.unwrap_or(DEFAULT_SWEEP_N);
    let envelope = match settings.config.envelope {
        Some(e) => EnvelopeSource::Fixed(DecayEnvelope::new(e.a, e.b)),
        None => EnvelopeSource::OptimalFiniteSupport,
    };
    let options = AnalysisOptions {
        sampling: settings.sampling,
        mathieu_dichotomy: true,
        ..AnalysisOptions::default()
    };
    let points = sweep_points(&spec, n, settings.formulation, &envelope, &options)?;
    let mut body = csv_line(&["delta", "epsilon", "max_abs_multiplier", "verdict"].map(String::from));
    for p in &points {
        body.push_str(&csv_line(&[
            fmt_e(p.delta),
            fmt_e(p.epsilon),
            fmt_e(p.max_multiplier),
            p.status.label().to_string(),
        ]));
    }
    let guaranteed = points.iter().filter(|p| p.status.is_guaranteed()).count();
    Ok(Output {
        body,
        notes: vec![format!("{} points, {guaranteed} guaranteed", points.len())],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRow {
    pub n: u32,
    pub actual_error: f64,
    pub bound: f64,
}

/// Reference `Φ(t)`: the closed form when known, otherwise the adaptive integrator.
pub fn reference_at(system: &System, t: f64) -> CliResult<ComplexMatrix> {
    match system.exact {
        Some(exact) => Ok(ComplexMatrix::from_real_rows(&[&[exact.eval(t)]])),
        None => Ok(reference_fundamental(&system.series, t, REFERENCE_RTOL, REFERENCE_ATOL)?.value),
    }
}

pub fn validation_rows(system: &System, f: Formulation, t: f64, n_max: u32) -> CliResult<Vec<ValidationRow>> {
    let reference = reference_at(system, t)?;
    (1..=n_max)
        .map(|n| {
            let approx = fundamental(&system.series, n, t, f)?.value;
            let bound = match system.envelope.envelope_at(&system.series, n, f, t)? {
                Some(env) => error_bound(env, n, t, f)?.bound,
                None => f64::INFINITY,
            };
            Ok(ValidationRow {
                n,
                actual_error: (&approx - &reference).norm_2(),
                bound,
            })
        })
        .collect()
}

/// First listed `N` whose actual error is below `e_des`.
pub fn numeric_truncation(rows: &[ValidationRow], e_des: f64) -> Option<u32> {
    rows.iter().find(|r| r.actual_error < e_des).map(|r| r.n)
}

pub fn validate(settings: &Settings) -> CliResult<Output> {
    let system = settings.system()?;
    let f = settings.formulation;
    let t = settings.config.t.unwrap_or(system.series.period());
    let n_max = settings.config.validate.clone().unwrap_or_default().n_max;
    let e_des = settings.config.edes.unwrap_or(DEFAULT_VALIDATE_EDES);
    let rows = validation_rows(&system, f, t, n_max)?;
    let mut body = csv_line(&["N", "actual_error", "bound"].map(String::from));
    for r in &rows {
        body.push_str(&csv_line(&[r.n.to_string(), fmt_e(r.actual_error), fmt_e(r.bound)]));
    }
    let n_num = numeric_truncation(&rows, e_des);
    let n_star = certified_truncation(&system.series, &system.envelope, t, e_des, f, settings.n_max())?;
    let show = |n: Option<u32>| n.map_or("none".to_string(), |n| n.to_string());
    Ok(Output {
        body,
        notes: vec![format!("N_num = {}", show(n_num)), format!("N* = {}", show(n_star))],
    })
}

pub fn xi(settings: &Settings) -> CliResult<Output> {
    let spec = settings
        .config
        .xi
        .clone()
        .ok_or_else(|| CliError::Usage("xi needs an [xi] table with the index tuple p".into()))?;
    if !(spec.omega > 0.0 && spec.omega.is_finite()) {
        return Err(CliError::Usage("xi omega must be positive".into()));
    }
    let p = IndexTuple::new(spec.p)?;
    let range = spec.t.unwrap_or([0.0, 3.0 * 2.0 * PI / spec.omega]);
    if range.iter().any(|v| !v.is_finite()) || spec.samples == 0 {
        return Err(CliError::Usage("xi needs a finite t range and at least one sample".into()));
    }
    let xi = xi_factor(&p, spec.omega);
    let m = p.len() as u32;
    let mut body = csv_line(&["t", "re", "im", "bound"].map(String::from));
    for t in linspace(range, spec.samples) {
        let v = xi.eval(t);
        body.push_str(&csv_line(&[fmt_e(t), fmt_e(v.re), fmt_e(v.im), fmt_e(xi_polynomial_bound(m, t))]));
    }
    Ok(Output {
        body,
        notes: Vec::new(),
    })
}

pub fn duffing(settings: &Settings) -> CliResult<Output> {
    let spec = settings
        .config
        .system
        .as_ref()
        .ok_or_else(|| CliError::Usage("duffing needs a [system] table of kind duffing".into()))?;
    let (params, n_h) = duffing_params(spec)?;
    let solution = solve_duffing_hbm(&params, n_h, None)?;
    let series = linearized_series(&solution, &params)?.pruned(DEFAULT_COEFF_FLOOR);
    let env = fit_decay_envelope(&series, DEFAULT_COEFF_FLOOR)?;
    let notes = vec![
        format!(
            "HBM converged in {} iterations, residual {}",
            solution.iterations,
            fmt_e(solution.residual_norm)
        ),
        format!("fitted envelope a = {}, b = {}", fmt_e(env.a), fmt_e(env.b)),
    ];
    Ok(Output {
        body: SolutionFile { params, solution }.to_json(),
        notes,
    })
}
