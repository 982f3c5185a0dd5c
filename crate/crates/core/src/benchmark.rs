//! Seeded Monte Carlo evaluation of the selectors on parents with a known tail.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::gpd::gpd_quantile_from_log_survival;
use crate::distributions::{gpd_fit_pwm, gpd_sample, kappa_sample, std_normal_quantile, GpdParams, KappaParams, RandomStream};
use crate::error::{Error, Result};
use crate::inference::{analyze, PotConfig};
use crate::sample::ObservationSample;
use crate::selectors::{build_grid, GridSpec, Method};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Body {
    Normal { mean: f64, sd: f64 },
    LogNormal { meanlog: f64, sdlog: f64 },
    Exponential { rate: f64 },
}

impl Body {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Body::Normal { mean, sd } => mean.is_finite() && sd > 0.0,
            Body::LogNormal { meanlog, sdlog } => meanlog.is_finite() && sdlog > 0.0,
            Body::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid body distribution {self:?}")))
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        match *self {
            Body::Normal { mean, sd } => mean + sd * std_normal_quantile(p).expect("p in (0, 1)"),
            Body::LogNormal { meanlog, sdlog } => {
                (meanlog + sdlog * std_normal_quantile(p).expect("p in (0, 1)")).exp()
            }
            Body::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Parent {
    Gpd { sigma: f64, xi: f64 },
    Kappa { mu: f64, sigma: f64, xi: f64, h: f64 },
    /// `body` below its `q0`-quantile `u0`, then `u0 + GPd(sigma, xi)`.
    Spliced { body: Body, sigma: f64, xi: f64, q0: f64 },
}

impl Parent {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Parent::Gpd { sigma, xi } => GpdParams::new(sigma, xi).map(|_| ()),
            Parent::Kappa { mu, sigma, xi, h } => KappaParams::new(mu, sigma, xi, h).map(|_| ()),
            Parent::Spliced { body, sigma, xi, q0 } => {
                body.validate()?;
                GpdParams::new(sigma, xi)?;
                if !(q0 > 0.0 && q0 < 1.0) {
                    return Err(Error::InvalidParameters(format!("splice quantile must be in (0, 1), got {q0}")));
                }
                Ok(())
            }
        }
    }

    /// Shape of the tail, the target of `ξ̂`.
    pub fn tail_xi(&self) -> f64 {
        match *self {
            Parent::Gpd { xi, .. } | Parent::Kappa { xi, .. } | Parent::Spliced { xi, .. } => xi,
        }
    }

    /// Probability level above which excesses are exactly GPd, when known.
    pub fn gpd_from_probability(&self) -> Option<f64> {
        match *self {
            Parent::Gpd { .. } => Some(0.0),
            Parent::Kappa { h, .. } => (h == 1.0).then_some(0.0),
            Parent::Spliced { q0, .. } => Some(q0),
        }
    }

    /// Upper-tail quantile from `ln(1 - p)`.
    fn quantile_ln_survival(&self, ln_q: f64) -> Result<f64> {
        match *self {
            Parent::Gpd { sigma, xi } => Ok(gpd_quantile_from_log_survival(ln_q, &GpdParams::new(sigma, xi)?)),
            Parent::Kappa { mu, sigma, xi, h } => {
                KappaParams::new(mu, sigma, xi, h)?.quantile(-ln_q.exp_m1())
            }
            Parent::Spliced { body, sigma, xi, q0 } => {
                let p = -ln_q.exp_m1();
                if p < q0 {
                    Ok(body.quantile(p))
                } else {
                    let tail_ln_q = ln_q - (-q0).ln_1p();
                    Ok(body.quantile(q0) + gpd_quantile_from_log_survival(tail_ln_q, &GpdParams::new(sigma, xi)?))
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level must be in (0, 1), got {p}")));
        }
        self.quantile_ln_survival((-p).ln_1p())
    }

    /// Level exceeded on average once in `period` years at `obs_per_year` observations a year.
    pub fn return_level(&self, period: f64, obs_per_year: f64) -> Result<f64> {
        let m = period * obs_per_year;
        if !(m > 1.0) {
            return Err(Error::Domain(format!("T·m_y = {m} must exceed 1")));
        }
        self.quantile_ln_survival(-m.ln())
    }

    pub fn sample(&self, n: usize, stream: RandomStream) -> Result<ObservationSample> {
        match *self {
            Parent::Gpd { sigma, xi } => Ok(gpd_sample(&GpdParams::new(sigma, xi)?, n, stream)),
            Parent::Kappa { mu, sigma, xi, h } => Ok(kappa_sample(&KappaParams::new(mu, sigma, xi, h)?, n, stream)),
            Parent::Spliced { .. } => {
                let mut rng = stream.rng();
                let v = (0..n)
                    .map(|_| self.quantile(rng.uniform()))
                    .collect::<Result<Vec<f64>>>()?;
                ObservationSample::new(v)
            }
        }
    }
}

fn default_reps() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub parent: Parent,
    pub n: usize,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "PotConfig::default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default = "PotConfig::default_alpha_cb")]
    pub alpha_cb: f64,
    #[serde(default = "PotConfig::default_alpha_gf")]
    pub alpha_gf: f64,
    #[serde(default = "PotConfig::default_nsim")]
    pub nsim: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_period")]
    pub return_period: f64,
    #[serde(default = "default_obs_per_year")]
    pub obs_per_year: f64,
}

fn default_period() -> f64 {
    100.0
}

fn default_obs_per_year() -> f64 {
    1.0
}

impl ScenarioSpec {
    pub fn new(parent: Parent, n: usize) -> Self {
        Self {
            name: String::new(),
            parent,
            n,
            reps: default_reps(),
            methods: PotConfig::default_methods(),
            grid: GridSpec::default(),
            alpha_cb: PotConfig::default_alpha_cb(),
            alpha_gf: PotConfig::default_alpha_gf(),
            nsim: PotConfig::default_nsim(),
            seed: 0,
            return_period: default_period(),
            obs_per_year: default_obs_per_year(),
        }
    }

    /// Reads a scenario from `.toml` or JSON (any other extension).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let spec: Self = if is_toml {
            toml::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
                message: e.message().to_string(),
            })?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.parent.validate()?;
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        self.pot_config(0).validate()?;
        self.parent.return_level(self.return_period, self.obs_per_year)?;
        Ok(())
    }

    fn pot_config(&self, seed: u64) -> PotConfig {
        PotConfig {
            grid: self.grid,
            methods: self.methods.clone(),
            alpha_cb: self.alpha_cb,
            alpha_gf: self.alpha_gf,
            nsim: self.nsim,
            seed,
            return_periods: vec![self.return_period],
            obs_per_year: self.obs_per_year,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub method: Method,
    /// Share of replicates selecting each grid candidate.
    pub selection_frequencies: Vec<f64>,
    /// Share of replicates selecting nothing, including failed replicates.
    pub none_rate: f64,
    pub failures: usize,
    /// Share of replicates selecting a level below the one where the tail becomes GPd.
    pub below_true_level_rate: Option<f64>,
    pub xi_bias: Option<f64>,
    pub xi_rmse: Option<f64>,
    pub rl_relative_bias: Option<f64>,
    /// Share of replicates with `|z| > z_{1-α/2}` at the first candidate (ALGFSM).
    pub first_candidate_rejection_rate: Option<f64>,
}

/// `ξ̂` at the lowest grid level where the excesses are exactly GPd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleLevelMetrics {
    pub index: usize,
    pub xi_mean: f64,
    pub xi_sd: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkMetrics {
    pub scenario: ScenarioSpec,
    pub true_xi: f64,
    pub true_return_level: f64,
    pub methods: Vec<MethodMetrics>,
    pub oracle_level: Option<OracleLevelMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub workers: usize,
    pub total_seconds: f64,
    pub mean_seconds_per_analysis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub metrics: BenchmarkMetrics,
    pub timing: Timing,
}

impl BenchmarkResult {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Default)]
struct MethodRecord {
    selected: Option<usize>,
    xi: Option<f64>,
    rl: Option<f64>,
    z1: Option<f64>,
}

#[derive(Debug, Clone, Default)]
struct ReplicateRecord {
    failed: bool,
    per_method: Vec<MethodRecord>,
    oracle_xi: Option<f64>,
    seconds: f64,
}

/// Stream ids of the two random inputs of a replicate.
const DATA_STREAM: u64 = 0;
const SEED_STREAM: u64 = 1;

fn run_replicate(spec: &ScenarioSpec, r: u64, oracle_pos: Option<usize>) -> ReplicateRecord {
    let mut rec = ReplicateRecord {
        per_method: vec![MethodRecord::default(); spec.methods.len()],
        ..Default::default()
    };
    let Ok(sample) = spec.parent.sample(spec.n, RandomStream::new(spec.seed, DATA_STREAM).derive(r)) else {
        rec.failed = true;
        return rec;
    };
    let seed = RandomStream::new(spec.seed, SEED_STREAM).derive(r).rng().next_u64();
    let start = Instant::now();
    let report = analyze(&sample, &spec.pot_config(seed));
    rec.seconds = start.elapsed().as_secs_f64();
    let Ok(report) = report else {
        rec.failed = true;
        return rec;
    };
    for (slot, m) in rec.per_method.iter_mut().zip(&spec.methods) {
        let Some(mr) = report.method(*m) else { continue };
        slot.selected = mr.outcome.selected_index;
        slot.xi = mr.fit.map(|f| f.params.xi);
        slot.rl = mr.return_levels.first().map(|r| r.level);
        slot.z1 = mr.outcome.diagnostics.first().and_then(|d| d.z);
    }
    if let Some(pos) = oracle_pos {
        let y = ObservationSample::from_sorted_unchecked(sample.excesses_over(report.grid.thresholds[pos]));
        rec.oracle_xi = gpd_fit_pwm(&y).ok().map(|f| f.params.xi);
    }
    rec
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn aggregate(spec: &ScenarioSpec, records: &[ReplicateRecord], true_rl: f64, oracle_pos: Option<usize>) -> Result<BenchmarkMetrics> {
    let reps = records.len() as f64;
    let true_xi = spec.parent.tail_xi();
    let true_prob = spec.parent.gpd_from_probability();
    let probs = spec.grid.probabilities();
    let zcrit = std_normal_quantile(1.0 - spec.alpha_gf / 2.0)?;

    let methods = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let mut counts = vec![0usize; probs.len()];
            let mut none = 0usize;
            let mut below = 0usize;
            let (mut xi_err, mut rl_rel, mut z1) = (Vec::new(), Vec::new(), Vec::new());
            for rec in records {
                let m = &rec.per_method[k];
                match m.selected {
                    Some(i) => {
                        counts[i - 1] += 1;
                        if true_prob.is_some_and(|q| probs[i - 1] < q - 1e-12) {
                            below += 1;
                        }
                    }
                    None => none += 1,
                }
                if let Some(xi) = m.xi {
                    xi_err.push(xi - true_xi);
                }
                if let Some(rl) = m.rl {
                    rl_rel.push((rl - true_rl) / true_rl);
                }
                if let Some(z) = m.z1 {
                    z1.push(if z.abs() > zcrit { 1.0 } else { 0.0 });
                }
            }
            let sq: Vec<f64> = xi_err.iter().map(|e| e * e).collect();
            MethodMetrics {
                method,
                selection_frequencies: counts.iter().map(|&c| c as f64 / reps).collect(),
                none_rate: none as f64 / reps,
                failures: records.iter().filter(|r| r.failed).count(),
                below_true_level_rate: true_prob.map(|_| below as f64 / reps),
                xi_bias: mean(&xi_err),
                xi_rmse: mean(&sq).map(f64::sqrt),
                rl_relative_bias: mean(&rl_rel),
                first_candidate_rejection_rate: if method == Method::Algfsm { mean(&z1) } else { None },
            }
        })
        .collect();

    let oracle_level = oracle_pos.and_then(|pos| {
        let xs: Vec<f64> = records.iter().filter_map(|r| r.oracle_xi).collect();
        let m = mean(&xs)?;
        let sd = if xs.len() > 1 {
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(OracleLevelMetrics {
            index: pos + 1,
            xi_mean: m,
            xi_sd: sd,
            replicates: xs.len(),
        })
    });

    Ok(BenchmarkMetrics {
        scenario: spec.clone(),
        true_xi,
        true_return_level: true_rl,
        methods,
        oracle_level,
    })
}

/// Runs every replicate and aggregates in replicate order. Replicate `r`
/// draws its data and its simulation seed from streams keyed by `r`, so the
/// metrics do not depend on `workers` (default: all available threads).
pub fn run_benchmark(spec: &ScenarioSpec, workers: Option<usize>) -> Result<BenchmarkResult> {
    spec.validate()?;
    let true_rl = spec.parent.return_level(spec.return_period, spec.obs_per_year)?;
    // Rank-based, so any sample of size n gives the same grid positions.
    let ranks = ObservationSample::new((1..=spec.n).map(|i| i as f64).collect())?;
    build_grid(&ranks, &spec.grid)?;
    let probs = spec.grid.probabilities();
    let oracle_pos = spec
        .parent
        .gpd_from_probability()
        .and_then(|q| probs.iter().position(|&p| p >= q - 1e-12));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let start = Instant::now();
    let records: Vec<ReplicateRecord> = pool.install(|| {
        (0..spec.reps as u64)
            .into_par_iter()
            .map(|r| run_replicate(spec, r, oracle_pos))
            .collect()
    });
    let total = start.elapsed().as_secs_f64();
    let metrics = aggregate(spec, &records, true_rl, oracle_pos)?;
    Ok(BenchmarkResult {
        metrics,
        timing: Timing {
            workers: pool.current_num_threads(),
            total_seconds: total,
            mean_seconds_per_analysis: records.iter().map(|r| r.seconds).sum::<f64>() / spec.reps as f64,
        },
    })
}
