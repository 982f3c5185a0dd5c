//! Four-parameter Kappa distribution
//!
//! ```text
//! F(x) = (1 - h·[1 + ξ(x-μ)/σ]^(-1/ξ))^(1/h)
//! ```
//!
//! with GEV (`h = 0`), the `ξ = 0` exponential-type branch and Gumbel
//! (`h = ξ = 0`) as limits. `h = 1, μ = 0` is the GPd.
//!
//! Population L-moments come from Gauss–Legendre quadrature of the quantile
//! function against shifted Legendre polynomials. The integration variable is
//! first mapped through `F = 1/(1 + exp(-π sinh s))` so the algebraic endpoint
//! singularities of heavy-tailed members decay double-exponentially in `s`.

use serde::{Deserialize, Serialize};

use super::gpd::PopulationLMoments;
use super::quadrature::{cached_rule, RULE_LEVELS};
use super::{RandomStream, StreamRng, LIMIT_TOL};
use crate::error::{Error, Result};
use crate::lmrd::{glo_curve, gpd_xi_from_t3, lower_bound};
use crate::sample::ObservationSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
    pub h: f64,
}

impl KappaParams {
    pub fn new(mu: f64, sigma: f64, xi: f64, h: f64) -> Result<Self> {
        if !(sigma > 0.0) || ![mu, sigma, xi, h].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "Kappa needs finite parameters with sigma > 0, got ({mu}, {sigma}, {xi}, {h})"
            )));
        }
        Ok(Self { mu, sigma, xi, h })
    }

    /// Whether the first four L-moments exist and the member lies in the
    /// `h ≥ -1` family.
    pub fn has_lmoments(&self) -> bool {
        lmoments_exist(self.xi, self.h)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        kappa_cdf(x, self)
    }

    pub fn quantile(&self, f: f64) -> Result<f64> {
        kappa_quantile(f, self)
    }
}

fn lmoments_exist(xi: f64, h: f64) -> bool {
    // A lower tail behaving like F^(-hξ) when h < 0 needs hξ < 1.
    h >= -1.0 && xi < 1.0 && (h >= 0.0 || xi * h < 1.0)
}

pub fn kappa_cdf(x: f64, params: &KappaParams) -> f64 {
    let KappaParams { mu, sigma, xi, h } = *params;
    let z = (x - mu) / sigma;
    // t = [1 + ξz]^(-1/ξ), or exp(-z) on the ξ = 0 branch.
    let t = if xi.abs() < LIMIT_TOL {
        (-z).exp()
    } else {
        let base = xi * z;
        if base <= -1.0 {
            return if xi > 0.0 { 0.0 } else { 1.0 };
        }
        (-base.ln_1p() / xi).exp()
    };
    let f = if h.abs() < LIMIT_TOL {
        (-t).exp()
    } else {
        let inner = -h * t;
        if inner <= -1.0 {
            return 0.0;
        }
        (inner.ln_1p() / h).exp()
    };
    if f.is_nan() {
        return 0.0;
    }
    f.clamp(0.0, 1.0)
}

/// `ln t` where `t = (1 - F^h)/h` (or `-ln F` when `h = 0`), from `ln F`.
fn ln_t_from_ln_f(ln_f: f64, h: f64) -> f64 {
    if h.abs() < LIMIT_TOL {
        return (-ln_f).ln();
    }
    let e = h * ln_f;
    if e > 30.0 {
        // h < 0 and F tiny: t = (F^h - 1)/(-h)
        e + (-(-e).exp()).ln_1p() - (-h).ln()
    } else {
        (-e.exp_m1() / h).ln()
    }
}

fn z_from_ln_t(ln_t: f64, xi: f64) -> f64 {
    if xi.abs() < LIMIT_TOL {
        -ln_t
    } else {
        (-xi * ln_t).exp_m1() / xi
    }
}

/// Standardised quantile `(x - μ)/σ` as a function of `ln F`.
fn std_quantile_ln(ln_f: f64, xi: f64, h: f64) -> f64 {
    z_from_ln_t(ln_t_from_ln_f(ln_f, h), xi)
}

pub fn kappa_quantile(f: f64, params: &KappaParams) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::Domain(format!("Kappa quantile needs 0 < F < 1, got {f}")));
    }
    Ok(params.mu + params.sigma * std_quantile_ln(f.ln(), params.xi, params.h))
}

/// `∫ z(F) P*_r(F) dF` for `r = 0..3` on the standardised member `(0, 1, ξ, h)`.
fn std_lmoment_integrals(xi: f64, h: f64) -> [f64; 4] {
    const HALF_WIDTH: f64 = 6.0;
    const TOL: f64 = 1e-13;
    let mut prev: Option<[f64; 4]> = None;
    let mut last = [0.0; 4];
    for level in 0..RULE_LEVELS {
        let rule = cached_rule(level);
        let mut acc = [0.0; 4];
        for (&node, &w) in rule.nodes().iter().zip(rule.weights()) {
            let s = HALF_WIDTH * node;
            let a = std::f64::consts::PI * s.sinh();
            let (ln_f, ln_q) = if a >= 0.0 {
                let l = (-a).exp().ln_1p();
                (-l, -a - l)
            } else {
                let l = a.exp().ln_1p();
                (a - l, -l)
            };
            let ln_fq = ln_f + ln_q;
            if ln_fq < -740.0 {
                continue;
            }
            let ln_t = ln_t_from_ln_f(ln_f, h);
            // z(F)·F·(1-F), arranged so neither factor overflows on its own.
            let zfq = if xi.abs() < LIMIT_TOL {
                -ln_t * ln_fq.exp()
            } else {
                let e = -xi * ln_t;
                if e.abs() < 50.0 {
                    ln_fq.exp() * e.exp_m1() / xi
                } else {
                    ((ln_fq + e).exp() - ln_fq.exp()) / xi
                }
            };
            let jac = std::f64::consts::PI * s.cosh() * w * HALF_WIDTH;
            let val = zfq * jac;
            let f = ln_f.exp();
            acc[0] += val;
            acc[1] += val * (2.0 * f - 1.0);
            acc[2] += val * ((6.0 * f - 6.0) * f + 1.0);
            acc[3] += val * (((20.0 * f - 30.0) * f + 12.0) * f - 1.0);
        }
        last = acc;
        if let Some(p) = prev {
            let scale = acc[1].abs().max(1e-300);
            let diff = acc
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if diff <= TOL * scale.max(1.0) {
                break;
            }
        }
        prev = Some(acc);
    }
    last
}

/// `(λ1, λ2, τ3, τ4)` of a Kappa member.
pub fn kappa_lmoments(params: &KappaParams) -> Result<PopulationLMoments> {
    if !params.has_lmoments() {
        return Err(Error::NonexistentMoment(format!(
            "Kappa L-moments need h >= -1, xi < 1 and h*xi < 1 (xi={}, h={})",
            params.xi, params.h
        )));
    }
    let i = std_lmoment_integrals(params.xi, params.h);
    Ok(PopulationLMoments {
        l1: params.mu + params.sigma * i[0],
        l2: params.sigma * i[1],
        t3: i[2] / i[1],
        t4: i[3] / i[1],
    })
}

fn shape_ratios(xi: f64, h: f64) -> Option<(f64, f64)> {
    if !lmoments_exist(xi, h) {
        return None;
    }
    let i = std_lmoment_integrals(xi, h);
    (i[1] > 0.0 && i.iter().all(|v| v.is_finite())).then(|| (i[2] / i[1], i[3] / i[1]))
}

/// Controls for the method-of-L-moments Newton iteration.
#[derive(Debug, Clone, Copy)]
pub struct KappaFitOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for KappaFitOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
        }
    }
}

/// Starting values of `h` tried in turn; `ξ` starts from the GPd with the same `t3`.
const NEWTON_STARTS_H: [f64; 5] = [1.0, 0.0, -0.5, -0.9, 2.5];

fn shape_residual(xi: f64, h: f64, t3: f64, t4: f64) -> Option<[f64; 2]> {
    shape_ratios(xi, h).map(|(a, b)| [a - t3, b - t4])
}

/// Central difference, or one-sided where the other side leaves the domain.
fn partial(f: impl Fn(f64) -> Option<[f64; 2]>, x: f64, dx: f64, fx: &[f64; 2]) -> Option<[f64; 2]> {
    match (f(x + dx), f(x - dx)) {
        (Some(p), Some(m)) => Some([(p[0] - m[0]) / (2.0 * dx), (p[1] - m[1]) / (2.0 * dx)]),
        (Some(p), None) => Some([(p[0] - fx[0]) / dx, (p[1] - fx[1]) / dx]),
        (None, Some(m)) => Some([(fx[0] - m[0]) / dx, (fx[1] - m[1]) / dx]),
        (None, None) => None,
    }
}

/// Damped Newton on `(ξ, h)` matching `(τ3, τ4) = (t3, t4)`.
fn newton_shape(t3: f64, t4: f64, xi0: f64, h0: f64, opts: &KappaFitOptions) -> Result<(f64, f64)> {
    let norm = |r: &[f64; 2]| r[0].abs().max(r[1].abs());
    let (mut xi, mut h) = (xi0, h0);
    let mut r = shape_residual(xi, h, t3, t4).ok_or(Error::InfeasibleFit { t3, t4 })?;
    let mut iterations = 0;
    while norm(&r) > opts.tolerance {
        let residual = norm(&r);
        let stalled = |iterations| Error::Convergence { iterations, residual };
        if iterations == opts.max_iterations {
            return Err(stalled(iterations));
        }
        iterations += 1;

        let dxi = 1e-6 * xi.abs().max(0.1);
        let dh = 1e-6 * h.abs().max(0.1);
        let (Some(jx), Some(jh)) = (
            partial(|v| shape_residual(v, h, t3, t4), xi, dxi, &r),
            partial(|v| shape_residual(xi, v, t3, t4), h, dh, &r),
        ) else {
            return Err(stalled(iterations));
        };
        let det = jx[0] * jh[1] - jh[0] * jx[1];
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(stalled(iterations));
        }
        let step_xi = -(jh[1] * r[0] - jh[0] * r[1]) / det;
        let step_h = -(-jx[1] * r[0] + jx[0] * r[1]) / det;

        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand_xi = xi + lambda * step_xi;
            let cand_h = (h + lambda * step_h).max(-1.0);
            if let Some(rc) = shape_residual(cand_xi, cand_h, t3, t4) {
                if norm(&rc) < norm(&r) {
                    xi = cand_xi;
                    h = cand_h;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(stalled(iterations));
        }
    }
    Ok((xi, h))
}

/// Method-of-L-moments Kappa fit.
pub fn kappa_fit_lmom(l1: f64, l2: f64, t3: f64, t4: f64) -> Result<KappaParams> {
    kappa_fit_lmom_with(l1, l2, t3, t4, KappaFitOptions::default())
}

pub fn kappa_fit_lmom_with(
    l1: f64,
    l2: f64,
    t3: f64,
    t4: f64,
    opts: KappaFitOptions,
) -> Result<KappaParams> {
    if !(l2 > 0.0) || !l1.is_finite() {
        return Err(Error::Domain(format!("Kappa fit needs l2 > 0, got {l2}")));
    }
    if !(t3.abs() < 1.0) || !(t4 > lower_bound(t3)) || !(t4 < 1.0) {
        return Err(Error::InfeasibleFit { t3, t4 });
    }
    let xi0 = gpd_xi_from_t3(t3).clamp(-0.99, 0.99);
    let mut first_err = None;
    let mut solved = None;
    for h0 in NEWTON_STARTS_H {
        match newton_shape(t3, t4, xi0, h0, &opts) {
            Ok(sol) => {
                solved = Some(sol);
                break;
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((xi, h)) = solved else {
        // Above the logistic curve no start converging means no Kappa member matches.
        return Err(if t4 >= glo_curve(t3) {
            Error::InfeasibleFit { t3, t4 }
        } else {
            first_err.expect("at least one start")
        });
    };

    let i = std_lmoment_integrals(xi, h);
    let sigma = l2 / i[1];
    let mu = l1 - sigma * i[0];
    KappaParams::new(mu, sigma, xi, h)
}

/// Fills `out` with `n` sorted Kappa variates drawn from `rng`.
pub(crate) fn kappa_sample_into(params: &KappaParams, n: usize, rng: &mut StreamRng, out: &mut Vec<f64>) {
    out.clear();
    out.extend((0..n).map(|_| {
        params.mu + params.sigma * std_quantile_ln(rng.uniform().ln(), params.xi, params.h)
    }));
    out.sort_unstable_by(f64::total_cmp);
}

/// `n` sorted Kappa variates by inversion of uniform draws from `stream`.
pub fn kappa_sample(params: &KappaParams, n: usize, stream: RandomStream) -> ObservationSample {
    let mut rng = stream.rng();
    let mut v = Vec::with_capacity(n);
    kappa_sample_into(params, n, &mut rng, &mut v);
    ObservationSample::from_sorted_unchecked(v)
}
