//! Run configuration: a TOML manifest plus command-line overrides.

use std::path::{Path, PathBuf};

use hillcert_core::fourier::{fit_decay_envelope, SeriesFile, DEFAULT_COEFF_FLOOR};
use hillcert_core::floquet::{EnvelopeSource, Sampling, DEFAULT_AXIS_SAMPLES, DEFAULT_CIRCLE_SAMPLES};
use hillcert_core::hbm::{linearized_series, solve_duffing_hbm, DuffingParams, SolutionFile, PeriodicSolution, DEFAULT_HARMONICS};
use hillcert_core::{DecayEnvelope, Formulation, FourierMatrixSeries};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const DEFAULT_N_MAX: u32 = 400;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemSpec>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub edes: Option<f64>,
    /// Evaluation time for `edes` and validation; defaults to one period.
    pub t: Option<f64>,
    pub formulation: Option<String>,
    pub out: Option<PathBuf>,
    pub circle_samples: Option<usize>,
    pub axis_samples: Option<usize>,
    /// Largest truncation order searched when deriving `N` from `edes`.
    pub n_max: Option<u32>,
    pub envelope: Option<EnvelopeSpec>,
    pub sweep: Option<SweepSpec>,
    pub validate: Option<ValidateSpec>,
    pub xi: Option<XiSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemSpec {
    Scalar {
        beta: f64,
        gamma: f64,
    },
    Mathieu {
        delta: f64,
        epsilon: f64,
        #[serde(default = "default_mathieu_omega")]
        omega: f64,
    },
    Duffing {
        configuration: Option<u8>,
        alpha: Option<f64>,
        beta: Option<f64>,
        delta: Option<f64>,
        #[serde(rename = "F")]
        force: Option<f64>,
        omega: Option<f64>,
        harmonics: Option<usize>,
    },
    File {
        path: PathBuf,
        /// Enables the circle/axis test for real trace-free 2×2 systems.
        #[serde(default)]
        dichotomy: bool,
    },
    /// Duffing solution exported by the `duffing` command.
    Solution {
        path: PathBuf,
    },
}

fn default_mathieu_omega() -> f64 {
    2.0
}

/// Fixed decay envelope overriding the automatic choice.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_delta_range")]
    pub delta: [f64; 2],
    #[serde(default = "default_epsilon_range")]
    pub epsilon: [f64; 2],
    /// Grid points along δ and ε.
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
    #[serde(default = "default_mathieu_omega")]
    pub omega: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            delta: default_delta_range(),
            epsilon: default_epsilon_range(),
            resolution: default_resolution(),
            omega: default_mathieu_omega(),
        }
    }
}

fn default_delta_range() -> [f64; 2] {
    [-1.0, 8.0]
}

fn default_epsilon_range() -> [f64; 2] {
    [0.0, 5.0]
}

fn default_resolution() -> [usize; 2] {
    [200, 125]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    #[serde(default = "default_validate_n_max")]
    pub n_max: u32,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        Self { n_max: default_validate_n_max() }
    }
}

fn default_validate_n_max() -> u32 {
    30
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiSpec {
    pub p: Vec<i64>,
    #[serde(default = "default_xi_omega")]
    pub omega: f64,
    /// Defaults to `[0, 3T]`.
    pub t: Option<[f64; 2]>,
    #[serde(default = "default_xi_samples")]
    pub samples: usize,
}

fn default_xi_omega() -> f64 {
    1.0
}

fn default_xi_samples() -> usize {
    200
}

/// Command-line values that win over the manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<u32>,
    pub edes: Option<f64>,
    pub formulation: Option<String>,
    pub out: Option<PathBuf>,
    pub circle_samples: Option<usize>,
    pub axis_samples: Option<usize>,
}

/// Manifest after overrides, with relative paths anchored at the manifest.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub formulation: Formulation,
    pub sampling: Sampling,
}

impl Settings {
    pub fn load(path: Option<&Path>, overrides: Overrides) -> CliResult<Self> {
        let (config, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
                let cfg = parse_config(&text)?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (cfg, dir)
            }
            None => (RunConfig::default(), PathBuf::new()),
        };
        Self::from_config(config, base_dir, overrides)
    }

    pub fn from_config(mut config: RunConfig, base_dir: PathBuf, o: Overrides) -> CliResult<Self> {
        // a flag for one of N / edes replaces whatever the manifest said about both
        if o.n.is_some() || o.edes.is_some() {
            config.n = o.n;
            config.edes = o.edes;
        }
        if o.formulation.is_some() {
            config.formulation = o.formulation;
        }
        if o.out.is_some() {
            config.out = o.out;
        }
        if o.circle_samples.is_some() {
            config.circle_samples = o.circle_samples;
        }
        if o.axis_samples.is_some() {
            config.axis_samples = o.axis_samples;
        }
        let formulation = match &config.formulation {
            Some(s) => s.parse::<Formulation>().map_err(CliError::from)?,
            None => Formulation::Subharmonic,
        };
        let sampling = Sampling {
            circle: config.circle_samples.unwrap_or(DEFAULT_CIRCLE_SAMPLES),
            axis: config.axis_samples.unwrap_or(DEFAULT_AXIS_SAMPLES),
        };
        if let Some(e) = config.edes {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::Usage(format!("edes must be positive, got {e}")));
            }
        }
        if let Some(t) = config.t {
            if !(t.is_finite() && t != 0.0) {
                return Err(CliError::Usage(format!("t must be finite and nonzero, got {t}")));
            }
        }
        Ok(Self {
            config,
            base_dir,
            formulation,
            sampling,
        })
    }

    pub fn n_max(&self) -> u32 {
        self.config.n_max.unwrap_or(DEFAULT_N_MAX)
    }

    pub fn system(&self) -> CliResult<System> {
        let spec = self
            .config
            .system
            .as_ref()
            .ok_or_else(|| CliError::Usage("a [system] table is required".into()))?;
        System::build(spec, &self.base_dir, self.config.envelope)
    }
}

pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// A periodic system ready for analysis.
#[derive(Debug, Clone)]
pub struct System {
    pub label: String,
    pub series: FourierMatrixSeries,
    pub envelope: EnvelopeSource,
    pub dichotomy: bool,
    /// Closed-form `Φ(t)` where one exists.
    pub exact: Option<ScalarExact>,
    pub duffing: Option<(DuffingParams, PeriodicSolution)>,
}

/// `Φ(t) = exp(βt + 2γ sin t)` for the scalar cosine system.
#[derive(Debug, Clone, Copy)]
pub struct ScalarExact {
    pub beta: f64,
    pub gamma: f64,
}

impl ScalarExact {
    pub fn eval(&self, t: f64) -> f64 {
        (self.beta * t + 2.0 * self.gamma * t.sin()).exp()
    }
}

pub fn duffing_params(spec: &SystemSpec) -> CliResult<(DuffingParams, usize)> {
    let SystemSpec::Duffing {
        configuration,
        alpha,
        beta,
        delta,
        force,
        omega,
        harmonics,
    } = spec
    else {
        return Err(CliError::Usage("system kind must be duffing".into()));
    };
    let base = match configuration {
        Some(1) => Some(DuffingParams::configuration_1()),
        Some(2) => Some(DuffingParams::configuration_2()),
        Some(c) => return Err(CliError::Usage(format!("unknown Duffing configuration {c}"))),
        None => None,
    };
    let pick = |v: Option<f64>, from_base: Option<f64>, name: &str| {
        v.or(from_base)
            .ok_or_else(|| CliError::Usage(format!("Duffing parameter {name} missing")))
    };
    let params = DuffingParams::new(
        pick(*alpha, base.map(|b| b.alpha), "alpha")?,
        pick(*beta, base.map(|b| b.beta), "beta")?,
        pick(*delta, base.map(|b| b.delta), "delta")?,
        pick(*force, base.map(|b| b.force), "F")?,
        pick(*omega, base.map(|b| b.omega), "omega")?,
    )?;
    Ok((params, harmonics.unwrap_or(DEFAULT_HARMONICS)))
}

impl System {
    pub fn build(spec: &SystemSpec, base_dir: &Path, envelope: Option<EnvelopeSpec>) -> CliResult<Self> {
        let mut exact = None;
        let mut duffing = None;
        let mut dichotomy = false;
        let (label, series) = match spec {
            SystemSpec::Scalar { beta, gamma } => {
                exact = Some(ScalarExact { beta: *beta, gamma: *gamma });
                ("scalar".to_string(), FourierMatrixSeries::scalar_cosine(*beta, *gamma))
            }
            SystemSpec::Mathieu { delta, epsilon, omega } => {
                dichotomy = true;
                ("mathieu".to_string(), FourierMatrixSeries::mathieu(*delta, *epsilon, *omega)?)
            }
            SystemSpec::Duffing { .. } => {
                let (params, n_h) = duffing_params(spec)?;
                let sol = solve_duffing_hbm(&params, n_h, None)?;
                let series = linearized_series(&sol, &params)?.pruned(DEFAULT_COEFF_FLOOR);
                duffing = Some((params, sol));
                ("duffing".to_string(), series)
            }
            SystemSpec::File { path, dichotomy: d } => {
                let text = read(base_dir, path)?;
                dichotomy = *d;
                ("file".to_string(), SeriesFile::from_json(&text)?)
            }
            SystemSpec::Solution { path } => {
                let text = read(base_dir, path)?;
                let file = SolutionFile::from_json(&text)?;
                let series = linearized_series(&file.solution, &file.params)?.pruned(DEFAULT_COEFF_FLOOR);
                duffing = Some((file.params, file.solution));
                ("duffing".to_string(), series)
            }
        };
        let envelope = match envelope {
            Some(EnvelopeSpec { a, b }) => EnvelopeSource::Fixed(DecayEnvelope::new(a, b)),
            None if series.support_radius() <= 1 => EnvelopeSource::OptimalFiniteSupport,
            None => EnvelopeSource::Fixed(fit_decay_envelope(&series, DEFAULT_COEFF_FLOOR)?),
        };
        Ok(Self {
            label,
            series,
            envelope,
            dichotomy,
            exact,
            duffing,
        })
    }
}

fn read(base_dir: &Path, path: &Path) -> CliResult<String> {
    let full = base_dir.join(path);
    std::fs::read_to_string(&full).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", full.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_manifest() {
        let cfg = parse_config(
            "N = 12\nformulation = \"direct\"\ncircle_samples = 512\n\
             [system]\nkind = \"mathieu\"\ndelta = 0.5\nepsilon = 1.0\n\
             [sweep]\nresolution = [4, 3]\n",
        )
        .unwrap();
        assert_eq!(cfg.n, Some(12));
        assert!(matches!(cfg.system, Some(SystemSpec::Mathieu { omega, .. }) if omega == 2.0));
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.resolution, [4, 3]);
        assert_eq!(sweep.delta, [-1.0, 8.0]);
    }

    #[test]
    fn rejects_unknown_keys_and_kinds() {
        assert!(parse_config("bogus = 1\n").is_err());
        assert!(parse_config("[system]\nkind = \"hill\"\n").is_err());
    }

    #[test]
    fn flags_replace_manifest_values() {
        let cfg = parse_config("edes = 1e-6\nformulation = \"direct\"\n").unwrap();
        let o = Overrides {
            n: Some(5),
            formulation: Some("subharmonic".into()),
            axis_samples: Some(128),
            ..Overrides::default()
        };
        let s = Settings::from_config(cfg, PathBuf::new(), o).unwrap();
        assert_eq!((s.config.n, s.config.edes), (Some(5), None));
        assert_eq!(s.formulation, Formulation::Subharmonic);
        assert_eq!(s.sampling.axis, 128);
        assert_eq!(s.sampling.circle, DEFAULT_CIRCLE_SAMPLES);
    }

    #[test]
    fn envelope_choice_follows_support() {
        let mathieu = SystemSpec::Mathieu { delta: 1.0, epsilon: 0.3, omega: 2.0 };
        let sys = System::build(&mathieu, Path::new(""), None).unwrap();
        assert_eq!(sys.envelope, EnvelopeSource::OptimalFiniteSupport);
        assert!(sys.dichotomy);
        let fixed = System::build(&mathieu, Path::new(""), Some(EnvelopeSpec { a: 2.0, b: 1.5 })).unwrap();
        assert_eq!(fixed.envelope, EnvelopeSource::Fixed(DecayEnvelope::new(2.0, 1.5)));
        let duffing = parse_config("[system]\nkind = \"duffing\"\nconfiguration = 2\n").unwrap().system.unwrap();
        let sys = System::build(&duffing, Path::new(""), None).unwrap();
        assert!(matches!(sys.envelope, EnvelopeSource::Fixed(env) if env.is_certifiable()));
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let bad = parse_config("edes = -1.0\n").unwrap();
        let err = Settings::from_config(bad, PathBuf::new(), Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let missing = parse_config("[system]\nkind = \"duffing\"\nalpha = 1.0\n").unwrap().system.unwrap();
        assert!(duffing_params(&missing).is_err());
    }
}
