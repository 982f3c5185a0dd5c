//! Asymptotic covariances of PWMs, L-moments and L-moment ratios under the
//! GPd, and the conditional confidence bands built on them.
//!
//! The chain is `A → Λ = M·A·Mᵀ → T`, where `A` is the limiting `n·cov` of the
//! PWMs `a_0..a_3`, `M` the PWM-to-L-moment coefficients, and `T` the limiting
//! `n·cov` of `(t3, t4)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{gpd_population_lmoments, std_normal_quantile, GpdParams};
use crate::error::{Error, Result};
use crate::lmoments::PWM_TO_LMOM;
use crate::lmrd::{gpd_g, gpd_g_inv};

pub type Matrix4 = [[f64; 4]; 4];

/// `A_{r,s} = lim n·cov(a_r, a_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwmCovMatrix {
    pub entries: Matrix4,
    /// False when `ξ ≤ -1/2`, outside the range where the result is justified.
    pub valid: bool,
}

/// `Λ = lim n·cov(ℓ1..ℓ4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmomCovMatrix {
    pub entries: Matrix4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioCov {
    pub t33: f64,
    pub t34: f64,
    pub t44: f64,
    pub rho34_sq: f64,
    /// `T33` or `T44` vanished, so the correlation is undefined (reported as 0).
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBand {
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceBand {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }
}

pub fn pwm_acov(params: &GpdParams) -> Result<PwmCovMatrix> {
    let GpdParams { sigma, xi } = *params;
    if xi >= 0.5 {
        return Err(Error::NonexistentMoment(format!(
            "PWM asymptotic variance is infinite for xi >= 1/2 (xi={xi})"
        )));
    }
    let mut entries = [[0.0; 4]; 4];
    for (r, row) in entries.iter_mut().enumerate() {
        for (s, e) in row.iter_mut().enumerate() {
            let (r, s) = (r as f64, s as f64);
            *e = sigma * sigma / ((r + 1.0 - xi) * (s + 1.0 - xi) * (r + s + 1.0 - 2.0 * xi));
        }
    }
    Ok(PwmCovMatrix {
        entries,
        valid: xi > -0.5,
    })
}

pub fn lmom_acov(a: &PwmCovMatrix) -> LmomCovMatrix {
    let m = &PWM_TO_LMOM;
    let mut ma = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            ma[i][j] = (0..4).map(|k| m[i][k] * a.entries[k][j]).sum();
        }
    }
    let mut entries = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            entries[i][j] = (0..4).map(|k| ma[i][k] * m[j][k]).sum();
        }
    }
    // Exact symmetry regardless of summation order.
    for i in 0..4 {
        for j in 0..i {
            let v = 0.5 * (entries[i][j] + entries[j][i]);
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    LmomCovMatrix { entries }
}

pub fn ratio_acov(lam: &LmomCovMatrix, l2: f64, t3: f64, t4: f64) -> Result<RatioCov> {
    if !(l2 > 0.0) {
        return Err(Error::Domain(format!("ratio covariance needs l2 > 0, got {l2}")));
    }
    let e = &lam.entries;
    // Λ_rs of ℓ_r, ℓ_s sits at [r-1][s-1].
    let (l22, l23, l24, l33, l34, l44) = (e[1][1], e[1][2], e[1][3], e[2][2], e[2][3], e[3][3]);
    let d = l2 * l2;
    let t33 = (l33 - 2.0 * t3 * l23 + t3 * t3 * l22) / d;
    let t34 = (l34 - t3 * l24 - t4 * l23 + t3 * t4 * l22) / d;
    let t44 = (l44 - 2.0 * t4 * l24 + t4 * t4 * l22) / d;
    let degenerate = !(t33 > 0.0 && t44 > 0.0);
    let rho34_sq = if degenerate {
        0.0
    } else {
        (t34 * t34 / (t33 * t44)).clamp(0.0, 1.0)
    };
    Ok(RatioCov {
        t33: t33.max(0.0),
        t34,
        t44: t44.max(0.0),
        rho34_sq,
        degenerate,
    })
}

/// Full chain at the population values of a GPd.
pub fn gpd_ratio_acov(params: &GpdParams) -> Result<RatioCov> {
    let lam = lmom_acov(&pwm_acov(params)?);
    let pop = gpd_population_lmoments(params)?;
    ratio_acov(&lam, pop.l2, pop.t3, pop.t4)
}

fn two_sided_z(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must be in (0, 1), got {alpha}")));
    }
    std_normal_quantile(1.0 - alpha / 2.0)
}

fn band(center: f64, var: f64, n_u: usize, alpha: f64) -> Result<ConfidenceBand> {
    if n_u < 4 {
        return Err(Error::InsufficientSample { required: 3, got: n_u });
    }
    let hw = two_sided_z(alpha)? * (var / n_u as f64).sqrt();
    Ok(ConfidenceBand {
        center,
        lower: center - hw,
        upper: center + hw,
        level: 1.0 - alpha,
    })
}

/// Band for τ4 given an observed `t3`, centred on the GPd curve at `g(t3)`.
///
/// `rc` should be evaluated at `τ3 = t3_obs`, `τ4 = g(t3_obs)`.
pub fn ci_tau4_given_t3(t3_obs: f64, n_u: usize, alpha: f64, rc: &RatioCov) -> Result<ConfidenceBand> {
    band(gpd_g(t3_obs), rc.t44 * (1.0 - rc.rho34_sq), n_u, alpha)
}

/// Band for τ3 given an observed `t4 > 0`, centred at `g⁻¹(t4)`.
///
/// `rc` should be evaluated at `τ4 = t4_obs`, `τ3 = g⁻¹(t4_obs)`.
pub fn ci_tau3_given_t4(t4_obs: f64, n_u: usize, alpha: f64, rc: &RatioCov) -> Result<ConfidenceBand> {
    band(gpd_g_inv(t4_obs)?, rc.t33 * (1.0 - rc.rho34_sq), n_u, alpha)
}
