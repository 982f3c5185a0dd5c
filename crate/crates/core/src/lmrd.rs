//! Geometry of the L-moment ratio diagram (τ3, τ4).

use crate::error::{Error, Result};

/// L-kurtosis of the GPd as a function of its L-skewness.
pub fn gpd_g(t3: f64) -> f64 {
    t3 * (1.0 + 5.0 * t3) / (5.0 + t3)
}

/// Inverse of [`gpd_g`] on the first quadrant of the diagram.
pub fn gpd_g_inv(t4: f64) -> Result<f64> {
    if !(t4 > 0.0) || t4 > 1.0 {
        return Err(Error::Domain(format!(
            "g^-1 is defined for 0 < t4 <= 1, got {t4}"
        )));
    }
    Ok((t4 - 1.0) / 10.0 + (t4 * t4 + 98.0 * t4 + 1.0).sqrt() / 10.0)
}

/// Smallest attainable τ4 for a given τ3 (any distribution).
pub fn lower_bound(t3: f64) -> f64 {
    0.25 * (5.0 * t3 * t3 - 1.0)
}

/// τ4 on the generalized logistic curve, the `h = -1` edge of the Kappa region.
pub fn glo_curve(t3: f64) -> f64 {
    (1.0 + 5.0 * t3 * t3) / 6.0
}

/// GPd shape from its L-skewness, inverting `τ3 = (1+ξ)/(3-ξ)`.
pub fn gpd_xi_from_t3(t3: f64) -> f64 {
    (3.0 * t3 - 1.0) / (1.0 + t3)
}
