use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::kappa::kappa_sample_into;
use crate::distributions::{kappa_fit_lmom, std_normal_sf, KappaParams, RandomStream};
use crate::error::{Error, Result};
use crate::lmoments::{l_statistics_sorted, PwmWeights};
use crate::lmrd::gpd_g;
use crate::sample::ObservationSample;

use super::alcbsm::validate_inputs;
use super::{CandidateDiagnostic, CandidateGrid, CandidateStatus, Method, SelectionOutcome};

/// Smallest number of Kappa replicates accepted by [`gof_z_statistic`].
pub const MIN_SIMULATIONS: usize = 100;

/// Goodness-of-fit measure of the GPd for one excess sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofStatistic {
    pub z: f64,
    pub t3: f64,
    pub t4: f64,
    /// `g(t3)`, the L-kurtosis of the GPd with L-skewness `t3`.
    pub tau4_gp: f64,
    pub kappa: KappaParams,
    pub bias4: f64,
    pub sigma4: f64,
}

/// `z = (g(t3) - t4 + B4) / σ4`, with `B4` and `σ4` the bias and spread of
/// `t4` over `nsim` samples of size `n_u` from the Kappa fitted to the
/// excesses.
///
/// Replicate `m` draws from `stream.derive(m)`, so the result does not depend
/// on the thread count.
pub fn gof_z_statistic(excesses: &ObservationSample, nsim: usize, stream: RandomStream) -> Result<GofStatistic> {
    if nsim < MIN_SIMULATIONS {
        return Err(Error::Config(format!(
            "need at least {MIN_SIMULATIONS} simulated samples, got {nsim}"
        )));
    }
    let ls = l_statistics_sorted(excesses.values())?;
    let kappa = kappa_fit_lmom(ls.l1, ls.l2, ls.t3, ls.t4)?;
    let n = ls.n;
    let weights = PwmWeights::new(n)?;

    let sims: Vec<Option<f64>> = (0..nsim as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf, m| {
                let mut rng = stream.derive(m).rng();
                kappa_sample_into(&kappa, n, &mut rng, buf);
                weights.l_moments(buf).ratios().ok().map(|(_, t4)| t4)
            },
        )
        .collect();
    let t4m: Vec<f64> = sims.into_iter().collect::<Option<_>>().ok_or_else(|| {
        Error::DegenerateSample("a simulated Kappa sample has zero L-scale".into())
    })?;

    let nf = nsim as f64;
    let bias4 = t4m.iter().map(|v| v - ls.t4).sum::<f64>() / nf;
    let ss: f64 = t4m.iter().map(|v| (v - ls.t4).powi(2)).sum();
    let var = (ss - nf * bias4 * bias4) / (nf - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateSample(
            "simulated L-kurtosis has zero spread".into(),
        ));
    }
    let sigma4 = var.sqrt();
    let tau4_gp = gpd_g(ls.t3);
    Ok(GofStatistic {
        z: (tau4_gp - ls.t4 + bias4) / sigma4,
        t3: ls.t3,
        t4: ls.t4,
        tau4_gp,
        kappa,
        bias4,
        sigma4,
    })
}

/// Two-sided normal p-value `2 - 2Φ(|z|)`.
pub fn gof_pvalue(z: f64) -> f64 {
    (2.0 * std_normal_sf(z.abs())).min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardStop {
    /// Number of leading hypotheses rejected.
    pub k_hat: usize,
    /// `fs_k = -(1/k) Σ_{i≤k} log(1 - p_i)`; `+∞` once some `p_i = 1`.
    pub values: Vec<f64>,
}

/// ForwardStop over p-values ordered by candidate: `k̂ = max{k : fs_k ≤ α}`, or 0.
pub fn forward_stop(pvalues: &[f64], alpha: f64) -> Result<ForwardStop> {
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("p-values must lie in [0, 1], got {p}")));
    }
    let mut sum = 0.0;
    let values: Vec<f64> = pvalues
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            sum += -(-p).ln_1p();
            sum / (i + 1) as f64
        })
        .collect();
    let k_hat = values.iter().rposition(|&fs| fs <= alpha).map_or(0, |i| i + 1);
    Ok(ForwardStop { k_hat, values })
}

/// Goodness-of-fit selector: ForwardStop over the candidates' p-values,
/// selecting `u_{k̂+1}`, or nothing when every candidate is rejected.
///
/// Candidates whose Kappa fit or simulation fails get `p = 0` and are marked
/// indeterminate. Candidate `i` simulates from `stream.derive(i)`.
pub fn algfsm_select(
    sample: &ObservationSample,
    grid: &CandidateGrid,
    alpha: f64,
    nsim: usize,
    stream: RandomStream,
) -> Result<SelectionOutcome> {
    validate_inputs(sample, grid, alpha)?;
    if nsim < MIN_SIMULATIONS {
        return Err(Error::Config(format!(
            "need at least {MIN_SIMULATIONS} simulated samples, got {nsim}"
        )));
    }
    let mut diagnostics: Vec<CandidateDiagnostic> = (0..grid.len())
        .into_par_iter()
        .map(|pos| {
            let mut d = CandidateDiagnostic::new(grid, pos);
            let y = ObservationSample::from_sorted_unchecked(sample.excesses_over(grid.thresholds[pos]));
            match gof_z_statistic(&y, nsim, stream.derive(pos as u64)) {
                Ok(g) => {
                    d.t3 = Some(g.t3);
                    d.t4 = Some(g.t4);
                    d.z = Some(g.z);
                    d.p = Some(gof_pvalue(g.z));
                    d.bias4 = Some(g.bias4);
                    d.sigma4 = Some(g.sigma4);
                }
                Err(e) => {
                    if let Ok(ls) = l_statistics_sorted(y.values()) {
                        d.t3 = Some(ls.t3);
                        d.t4 = Some(ls.t4);
                    }
                    d.p = Some(0.0);
                    d.warnings.push(format!("goodness-of-fit statistic unavailable ({e}); p set to 0"));
                }
            }
            d
        })
        .collect();

    let pvalues: Vec<f64> = diagnostics.iter().map(|d| d.p.unwrap_or(0.0)).collect();
    let fs = forward_stop(&pvalues, alpha)?;
    for (pos, d) in diagnostics.iter_mut().enumerate() {
        d.fs = Some(fs.values[pos]);
        if d.z.is_some() {
            d.status = if pos < fs.k_hat {
                CandidateStatus::Rejected
            } else {
                CandidateStatus::Accepted
            };
        }
    }
    let selected = (fs.k_hat < grid.len()).then_some(fs.k_hat);
    Ok(SelectionOutcome::new(
        Method::Algfsm,
        alpha,
        grid,
        selected,
        Some(fs.k_hat),
        diagnostics,
    ))
}
