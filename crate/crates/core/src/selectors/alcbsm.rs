use crate::asymptotics::{ci_tau3_given_t4, ci_tau4_given_t3, lmom_acov, pwm_acov, ratio_acov};
use crate::distributions::gpd_fit_from_pwm;
use crate::error::{Error, Result};
use crate::lmoments::l_statistics_sorted;
use crate::lmrd::{gpd_g, gpd_g_inv};
use crate::sample::ObservationSample;

use super::{CandidateDiagnostic, CandidateGrid, CandidateStatus, Method, SelectionOutcome};

fn check_grid(sample: &ObservationSample, grid: &CandidateGrid) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("empty candidate grid".into()));
    }
    if grid
        .thresholds
        .iter()
        .zip(&grid.exceedance_counts)
        .any(|(&u, &c)| sample.count_above(u) != c)
    {
        return Err(Error::Grid("grid was not built from this sample".into()));
    }
    Ok(())
}

pub(super) fn validate_inputs(sample: &ObservationSample, grid: &CandidateGrid, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Config(format!("alpha must be in (0, 0.5), got {alpha}")));
    }
    check_grid(sample, grid)
}

/// Fills the ALCBSM fields of `d` for the excesses `y`.
fn diagnose(d: &mut CandidateDiagnostic, y: &[f64], alpha: f64) {
    let ls = match l_statistics_sorted(y) {
        Ok(ls) => ls,
        Err(e) => {
            d.warnings.push(e.to_string());
            return;
        }
    };
    d.t3 = Some(ls.t3);
    d.t4 = Some(ls.t4);

    // a0 = ℓ1 and a1 = (ℓ1 - ℓ2)/2 for the PWM fit.
    let fit = match gpd_fit_from_pwm(ls.l1, 0.5 * (ls.l1 - ls.l2)) {
        Ok(f) => f,
        Err(e) => {
            d.warnings.push(e.to_string());
            return;
        }
    };
    if !fit.asymptotics_valid {
        d.warnings.push(format!(
            "PWM shape estimate {:.4} lies outside (-0.5, 0.5); asymptotic bands are not justified",
            fit.params.xi
        ));
    }
    let lam = match pwm_acov(&fit.params) {
        Ok(a) => lmom_acov(&a),
        Err(e) => {
            d.warnings.push(e.to_string());
            return;
        }
    };

    let band4 = ratio_acov(&lam, ls.l2, ls.t3, gpd_g(ls.t3))
        .and_then(|rc| ci_tau4_given_t3(ls.t3, ls.n, alpha, &rc));
    match band4 {
        Ok(b) => d.band_tau4 = Some(b),
        Err(e) => d.warnings.push(format!("τ4 band: {e}")),
    }
    let band3 = gpd_g_inv(ls.t4)
        .and_then(|c| ratio_acov(&lam, ls.l2, c, ls.t4))
        .and_then(|rc| ci_tau3_given_t4(ls.t4, ls.n, alpha, &rc));
    match band3 {
        Ok(b) => d.band_tau3 = Some(b),
        Err(e) => d.warnings.push(format!("τ3 band: {e}")),
    }

    let in4 = d.band_tau4.map(|b| b.contains(ls.t4));
    let in3 = d.band_tau3.map(|b| b.contains(ls.t3));
    d.status = match (in4, in3) {
        (Some(true), Some(true)) => CandidateStatus::Accepted,
        (Some(false), _) | (_, Some(false)) => CandidateStatus::Rejected,
        _ => CandidateStatus::Indeterminate,
    };
}

/// Confidence-band selector: the first candidate whose `t4` lies in the τ4
/// band given `t3` and whose `t3` lies in the τ3 band given `t4`.
///
/// Every candidate is diagnosed, including those above the selected one.
/// Indeterminate candidates count as failures.
pub fn alcbsm_select(sample: &ObservationSample, grid: &CandidateGrid, alpha: f64) -> Result<SelectionOutcome> {
    validate_inputs(sample, grid, alpha)?;
    let diagnostics: Vec<CandidateDiagnostic> = (0..grid.len())
        .map(|pos| {
            let mut d = CandidateDiagnostic::new(grid, pos);
            let y = sample.excesses_over(grid.thresholds[pos]);
            diagnose(&mut d, &y, alpha);
            d
        })
        .collect();
    let selected = diagnostics
        .iter()
        .position(|d| d.status == CandidateStatus::Accepted);
    Ok(SelectionOutcome::new(Method::Alcbsm, alpha, grid, selected, None, diagnostics))
}
