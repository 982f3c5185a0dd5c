//! Generalized Pareto distribution of excesses, `F(x) = 1 - (1 + ξx/σ)^(-1/ξ)`.

use serde::{Deserialize, Serialize};

use super::{RandomStream, LIMIT_TOL};
use crate::error::{Error, Result};
use crate::lmrd::gpd_g;
use crate::sample::ObservationSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    pub sigma: f64,
    pub xi: f64,
}

impl GpdParams {
    pub fn new(sigma: f64, xi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !xi.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "GPd needs finite sigma > 0 and finite xi, got sigma={sigma}, xi={xi}"
            )));
        }
        Ok(Self { sigma, xi })
    }

    /// Upper end of the support, finite only for `ξ < 0`.
    pub fn upper_endpoint(&self) -> f64 {
        if self.xi < 0.0 {
            -self.sigma / self.xi
        } else {
            f64::INFINITY
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gpd_cdf(x, self)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        gpd_quantile(p, self)
    }
}

/// Population L-moment summary `(λ1, λ2, τ3, τ4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationLMoments {
    pub l1: f64,
    pub l2: f64,
    pub t3: f64,
    pub t4: f64,
}

pub fn gpd_cdf(x: f64, params: &GpdParams) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let z = x / params.sigma;
    let xi = params.xi;
    let p = if xi.abs() < LIMIT_TOL {
        -(-z).exp_m1()
    } else {
        let base = xi * z;
        if base <= -1.0 {
            return 1.0;
        }
        // 1 - (1 + ξz)^(-1/ξ)
        -(-(base.ln_1p()) / xi).exp_m1()
    };
    p.clamp(0.0, 1.0)
}

pub fn gpd_quantile(p: f64, params: &GpdParams) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("GPd quantile needs 0 <= p < 1, got {p}")));
    }
    let ln_q = (-p).ln_1p();
    Ok(gpd_quantile_from_log_survival(ln_q, params))
}

/// Quantile expressed through `ln(1 - p)`, accurate deep in the tail.
pub(crate) fn gpd_quantile_from_log_survival(ln_q: f64, params: &GpdParams) -> f64 {
    if params.xi.abs() < LIMIT_TOL {
        -params.sigma * ln_q
    } else {
        params.sigma * (-params.xi * ln_q).exp_m1() / params.xi
    }
}

pub fn gpd_population_lmoments(params: &GpdParams) -> Result<PopulationLMoments> {
    let GpdParams { sigma, xi } = *params;
    if xi >= 1.0 {
        return Err(Error::NonexistentMoment(format!(
            "GPd mean is infinite for xi >= 1 (xi={xi})"
        )));
    }
    let t3 = (1.0 + xi) / (3.0 - xi);
    Ok(PopulationLMoments {
        l1: sigma / (1.0 - xi),
        l2: sigma / ((1.0 - xi) * (2.0 - xi)),
        t3,
        t4: gpd_g(t3),
    })
}

/// PWM estimates of the GPd parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub params: GpdParams,
    /// `ξ̂ ∈ (-1/2, 1/2)`, where the PWMs have finite asymptotic variance.
    pub asymptotics_valid: bool,
}

/// Fit from the first two PWMs: `ξ̂ = 2 - a0/(a0 - 2a1)`, `σ̂ = 2a0a1/(a0 - 2a1)`.
pub fn gpd_fit_from_pwm(a0: f64, a1: f64) -> Result<GpdFit> {
    let l2 = a0 - 2.0 * a1;
    if !(l2.abs() > crate::lmoments::DEGENERATE_L2_RATIO * a0.abs()) {
        return Err(Error::DegenerateSample(
            "a0 - 2a1 vanishes; the GPd fit is undefined".into(),
        ));
    }
    let xi = 2.0 - a0 / l2;
    let sigma = 2.0 * a0 * a1 / l2;
    let params = GpdParams::new(sigma, xi).map_err(|_| {
        Error::DegenerateSample(format!("PWM fit gives non-positive scale {sigma}"))
    })?;
    Ok(GpdFit {
        params,
        asymptotics_valid: xi > -0.5 && xi < 0.5,
    })
}

pub fn gpd_fit_pwm(sample: &ObservationSample) -> Result<GpdFit> {
    if sample.len() < 4 {
        return Err(Error::InsufficientSample {
            required: 3,
            got: sample.len(),
        });
    }
    let pwm = crate::lmoments::pwm_estimates(sample, 1)?;
    gpd_fit_from_pwm(pwm.a(0), pwm.a(1))
}

/// `n` sorted GPd variates by inversion.
pub fn gpd_sample(params: &GpdParams, n: usize, stream: RandomStream) -> ObservationSample {
    let mut rng = stream.rng();
    let mut v: Vec<f64> = (0..n)
        .map(|_| gpd_quantile_from_log_survival(rng.uniform().ln(), params))
        .collect();
    v.sort_unstable_by(f64::total_cmp);
    ObservationSample::from_sorted_unchecked(v)
}
