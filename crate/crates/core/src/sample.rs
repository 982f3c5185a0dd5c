use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite observations kept in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObservationSample {
    values: Vec<f64>,
}

impl ObservationSample {
    /// Validates and sorts `values`. Rejects empty input and non-finite entries.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientSample {
                required: 0,
                got: 0,
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// Wraps values the caller guarantees are finite and sorted ascending.
    pub(crate) fn from_sorted_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Order statistic `x_{k:n}` with 1-based `k`.
    pub fn order_stat(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    /// Excesses `x - u` over the observations strictly greater than `u`, ascending.
    pub fn excesses_over(&self, u: f64) -> Vec<f64> {
        let start = self.values.partition_point(|&x| x <= u);
        self.values[start..].iter().map(|&x| x - u).collect()
    }

    /// Number of observations strictly above `u`.
    pub fn count_above(&self, u: f64) -> usize {
        self.values.len() - self.values.partition_point(|&x| x <= u)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl TryFrom<Vec<f64>> for ObservationSample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ObservationSample> for Vec<f64> {
    fn from(sample: ObservationSample) -> Self {
        sample.values
    }
}
