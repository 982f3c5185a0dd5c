//! Candidate grids and the two automatic threshold selectors.

mod alcbsm;
mod algfsm;
mod grid;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::asymptotics::ConfidenceBand;

pub use alcbsm::alcbsm_select;
pub use algfsm::{algfsm_select, forward_stop, gof_pvalue, gof_z_statistic, ForwardStop, GofStatistic, MIN_SIMULATIONS};
pub use grid::{build_grid, CandidateGrid, GridSpec, MIN_EXCESSES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Alcbsm,
    Algfsm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Alcbsm => "alcbsm",
            Method::Algfsm => "algfsm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateStatus {
    Accepted,
    Rejected,
    /// The statistics needed for the test could not be computed.
    Indeterminate,
}

impl CandidateStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CandidateStatus::Accepted => "accepted",
            CandidateStatus::Rejected => "rejected",
            CandidateStatus::Indeterminate => "indeterminate",
        }
    }
}

/// Everything computed for one candidate threshold.
///
/// Fields belonging to the other selector are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDiagnostic {
    /// 1-based position in the grid.
    pub index: usize,
    pub probability: f64,
    pub u: f64,
    pub n_u: usize,
    pub t3: Option<f64>,
    pub t4: Option<f64>,
    pub band_tau4: Option<ConfidenceBand>,
    pub band_tau3: Option<ConfidenceBand>,
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub fs: Option<f64>,
    pub bias4: Option<f64>,
    pub sigma4: Option<f64>,
    pub status: CandidateStatus,
    pub warnings: Vec<String>,
}

impl CandidateDiagnostic {
    pub(crate) fn new(grid: &CandidateGrid, pos: usize) -> Self {
        Self {
            index: pos + 1,
            probability: grid.probabilities[pos],
            u: grid.thresholds[pos],
            n_u: grid.exceedance_counts[pos],
            t3: None,
            t4: None,
            band_tau4: None,
            band_tau3: None,
            z: None,
            p: None,
            fs: None,
            bias4: None,
            sigma4: None,
            status: CandidateStatus::Indeterminate,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub method: Method,
    pub alpha: f64,
    /// 1-based grid index of the selected threshold, matching `CandidateDiagnostic::index`.
    pub selected_index: Option<usize>,
    pub u_star: Option<f64>,
    pub n_star: Option<usize>,
    /// ForwardStop's number of rejected leading candidates (ALGFSM only).
    pub k_hat: Option<usize>,
    pub diagnostics: Vec<CandidateDiagnostic>,
}

impl SelectionOutcome {
    pub(crate) fn new(
        method: Method,
        alpha: f64,
        grid: &CandidateGrid,
        selected_pos: Option<usize>,
        k_hat: Option<usize>,
        diagnostics: Vec<CandidateDiagnostic>,
    ) -> Self {
        Self {
            method,
            alpha,
            selected_index: selected_pos.map(|i| i + 1),
            u_star: selected_pos.map(|i| grid.thresholds[i]),
            n_star: selected_pos.map(|i| grid.exceedance_counts[i]),
            k_hat,
            diagnostics,
        }
    }

    pub fn is_selected(&self) -> bool {
        self.selected_index.is_some()
    }

    pub fn selected(&self) -> Option<&CandidateDiagnostic> {
        self.selected_index.map(|i| &self.diagnostics[i - 1])
    }
}
