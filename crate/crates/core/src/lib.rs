//! Automatic peaks-over-threshold level selection from L-moments.
//!
//! Two selectors are provided. [`selectors::alcbsm_select`] accepts the lowest
//! candidate whose sample `(t3, t4)` falls inside both asymptotic confidence
//! bands around the GPd curve of the L-moment ratio diagram.
//! [`selectors::algfsm_select`] scores each candidate with a Kappa-calibrated
//! goodness-of-fit statistic and stops with the ForwardStop rule.
//! [`inference::analyze`] runs either or both and reports GPd fits and return
//! levels at the chosen thresholds.

pub mod asymptotics;
pub mod benchmark;
pub mod distributions;
pub mod error;
pub mod inference;
pub mod io;
pub mod lmoments;
pub mod lmrd;
pub mod sample;
pub mod selectors;

pub use distributions::{GpdParams, KappaParams, RandomStream};
pub use error::{Error, Result};

pub use inference::{analyze, PotConfig, PotReport};
pub use lmoments::{l_statistics, LStatSet};
pub use sample::ObservationSample;
pub use selectors::{CandidateDiagnostic, CandidateGrid, GridSpec, Method, SelectionOutcome};

