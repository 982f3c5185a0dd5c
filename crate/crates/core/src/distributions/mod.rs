//! GPd, Kappa and standard normal distributions, plus the quadrature and
//! random streams they rely on.

pub mod gpd;
pub mod kappa;
pub mod normal;
pub mod quadrature;
pub mod rng;

pub use gpd::{
    gpd_cdf, gpd_fit_from_pwm, gpd_fit_pwm, gpd_population_lmoments, gpd_quantile, gpd_sample,
    GpdFit, GpdParams, PopulationLMoments,
};
pub use kappa::{
    kappa_cdf, kappa_fit_lmom, kappa_fit_lmom_with, kappa_lmoments, kappa_quantile, kappa_sample,
    KappaFitOptions, KappaParams,
};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use rng::{RandomStream, StreamRng};

/// Parameters closer than this to zero take the limiting (log/exp) branch.
pub const LIMIT_TOL: f64 = 1e-9;
