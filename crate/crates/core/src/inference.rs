//! GPd fits and return levels at the selected thresholds, and the full
//! analysis report.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::distributions::{gpd_fit_pwm, GpdFit, GpdParams, RandomStream};
use crate::error::{Error, Result};
use crate::sample::ObservationSample;
use crate::selectors::{
    alcbsm_select, algfsm_select, build_grid, CandidateGrid, GridSpec, Method, SelectionOutcome,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Stream id reserved for the goodness-of-fit simulations of an analysis.
const ALGFSM_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PotConfig {
    pub grid: GridSpec,
    pub methods: Vec<Method>,
    pub alpha_cb: f64,
    pub alpha_gf: f64,
    pub nsim: usize,
    pub seed: u64,
    pub return_periods: Vec<f64>,
    pub obs_per_year: f64,
}

impl Default for PotConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::preset(10),
            methods: Self::default_methods(),
            alpha_cb: Self::default_alpha_cb(),
            alpha_gf: Self::default_alpha_gf(),
            nsim: Self::default_nsim(),
            seed: 42,
            return_periods: vec![100.0, 10_000.0],
            obs_per_year: 1.0,
        }
    }
}

impl PotConfig {
    pub fn default_methods() -> Vec<Method> {
        vec![Method::Alcbsm, Method::Algfsm]
    }

    pub fn default_alpha_cb() -> f64 {
        0.05
    }

    pub fn default_alpha_gf() -> f64 {
        0.1
    }

    pub fn default_nsim() -> usize {
        500
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no selection method requested".into()));
        }
        for (name, a) in [("alpha_cb", self.alpha_cb), ("alpha_gf", self.alpha_gf)] {
            if !(a > 0.0 && a < 0.5) {
                return Err(Error::Config(format!("{name} must be in (0, 0.5), got {a}")));
            }
        }
        if self.nsim < crate::selectors::MIN_SIMULATIONS {
            return Err(Error::Config(format!(
                "nsim must be at least {}, got {}",
                crate::selectors::MIN_SIMULATIONS,
                self.nsim
            )));
        }
        if !(self.obs_per_year > 0.0 && self.obs_per_year.is_finite()) {
            return Err(Error::Config(format!(
                "obs_per_year must be positive, got {}",
                self.obs_per_year
            )));
        }
        if let Some(t) = self.return_periods.iter().find(|t| !(**t >= 1.0 && t.is_finite())) {
            return Err(Error::Config(format!("return periods must be at least 1, got {t}")));
        }
        Ok(())
    }

    fn wants(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnLevel {
    pub period: f64,
    pub level: f64,
}

/// `T`-year level `u* + (σ/ξ)[(T·m_y·ζ)^ξ - 1]`, or `u* + σ·ln(T·m_y·ζ)` at `ξ = 0`.
pub fn return_level(u_star: f64, params: &GpdParams, zeta: f64, obs_per_year: f64, period: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta <= 1.0) {
        return Err(Error::Domain(format!("exceedance rate must be in (0, 1], got {zeta}")));
    }
    let m = period * obs_per_year * zeta;
    if !(m >= 1.0) {
        return Err(Error::Domain(format!(
            "T·m_y·ζ = {m} < 1: the {period}-year level lies below the threshold"
        )));
    }
    let lm = m.ln();
    let GpdParams { sigma, xi } = *params;
    Ok(if xi == 0.0 {
        u_star + sigma * lm
    } else {
        u_star + sigma * (xi * lm).exp_m1() / xi
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub outcome: SelectionOutcome,
    pub fit: Option<GpdFit>,
    /// `n*/n`.
    pub zeta: Option<f64>,
    pub return_levels: Vec<ReturnLevel>,
    pub warnings: Vec<String>,
}

impl MethodReport {
    pub fn method(&self) -> Method {
        self.outcome.method
    }
}

/// Configuration as used, with the derived grid levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub config: PotConfig,
    pub grid_probabilities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotReport {
    pub schema_version: u32,
    pub n: usize,
    pub config: ConfigEcho,
    pub grid: CandidateGrid,
    pub methods: Vec<MethodReport>,
    pub warnings: Vec<String>,
    /// Wall-clock time of [`analyze`]; not serialized so reports stay reproducible.
    #[serde(skip)]
    pub elapsed: Option<Duration>,
}

impl PotReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method() == m)
    }

    /// True when every requested method selected a threshold.
    pub fn all_selected(&self) -> bool {
        self.methods.iter().all(|r| r.outcome.is_selected())
    }
}

fn estimate(sample: &ObservationSample, outcome: SelectionOutcome, config: &PotConfig) -> MethodReport {
    let mut report = MethodReport {
        outcome,
        fit: None,
        zeta: None,
        return_levels: Vec::new(),
        warnings: Vec::new(),
    };
    let (Some(u), Some(n_u)) = (report.outcome.u_star, report.outcome.n_star) else {
        report
            .warnings
            .push(format!("{}: no threshold selected", report.outcome.method));
        return report;
    };
    let y = ObservationSample::from_sorted_unchecked(sample.excesses_over(u));
    let fit = match gpd_fit_pwm(&y) {
        Ok(f) => f,
        Err(e) => {
            report.warnings.push(format!("GPd fit at u = {u}: {e}"));
            return report;
        }
    };
    if !fit.asymptotics_valid {
        report.warnings.push(format!(
            "shape estimate {:.4} lies outside (-0.5, 0.5)",
            fit.params.xi
        ));
    }
    let zeta = n_u as f64 / sample.len() as f64;
    for &t in &config.return_periods {
        match return_level(u, &fit.params, zeta, config.obs_per_year, t) {
            Ok(level) => report.return_levels.push(ReturnLevel { period: t, level }),
            Err(e) => report.warnings.push(e.to_string()),
        }
    }
    report.fit = Some(fit);
    report.zeta = Some(zeta);
    report
}

/// Runs the requested selectors and estimates the GPd and return levels at
/// each selected threshold. A method selecting nothing is reported, not an error.
pub fn analyze(sample: &ObservationSample, config: &PotConfig) -> Result<PotReport> {
    let start = Instant::now();
    config.validate()?;
    if sample.min() == sample.max() {
        return Err(Error::DegenerateSample(format!(
            "all {} observations equal {}",
            sample.len(),
            sample.min()
        )));
    }
    let grid = build_grid(sample, &config.grid)?;

    let run_cb = || {
        config
            .wants(Method::Alcbsm)
            .then(|| alcbsm_select(sample, &grid, config.alpha_cb))
            .transpose()
    };
    let run_gf = || {
        config
            .wants(Method::Algfsm)
            .then(|| {
                algfsm_select(
                    sample,
                    &grid,
                    config.alpha_gf,
                    config.nsim,
                    RandomStream::new(config.seed, ALGFSM_STREAM),
                )
            })
            .transpose()
    };
    let (cb, gf) = rayon::join(run_cb, run_gf);
    let (cb, gf) = (cb?, gf?);

    let mut methods = Vec::new();
    let mut seen = Vec::new();
    for m in &config.methods {
        if seen.contains(m) {
            continue;
        }
        seen.push(*m);
        let outcome = match m {
            Method::Alcbsm => cb.clone(),
            Method::Algfsm => gf.clone(),
        };
        if let Some(o) = outcome {
            methods.push(estimate(sample, o, config));
        }
    }
    let warnings = methods
        .iter()
        .flat_map(|r| {
            r.outcome
                .diagnostics
                .iter()
                .flat_map(move |d| {
                    d.warnings
                        .iter()
                        .map(move |w| format!("{} candidate {}: {w}", r.method(), d.index))
                })
                .chain(r.warnings.iter().cloned())
        })
        .collect();

    Ok(PotReport {
        schema_version: SCHEMA_VERSION,
        n: sample.len(),
        config: ConfigEcho {
            config: config.clone(),
            grid_probabilities: grid.probabilities.clone(),
        },
        grid,
        methods,
        warnings,
        elapsed: Some(start.elapsed()),
    })
}
