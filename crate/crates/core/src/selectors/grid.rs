use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::ObservationSample;

/// Smallest number of excesses a candidate may keep.
pub const MIN_EXCESSES: usize = 4;

/// Equally spaced sample-quantile levels `p_start..=p_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub candidates: usize,
    pub p_start: f64,
    pub p_end: f64,
}

impl GridSpec {
    /// Presets start at 0.25. Ten candidates end at 0.925 (step 0.075); any
    /// other count ends at 0.95.
    pub fn preset(candidates: usize) -> Self {
        let p_end = if candidates == 10 { 0.925 } else { 0.95 };
        Self {
            candidates,
            p_start: 0.25,
            p_end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidates < 2 {
            return Err(Error::Config(format!(
                "need at least 2 candidate thresholds, got {}",
                self.candidates
            )));
        }
        if !(self.p_start > 0.0 && self.p_start < self.p_end && self.p_end < 1.0) {
            return Err(Error::Config(format!(
                "grid probabilities must satisfy 0 < start < end < 1, got {} and {}",
                self.p_start, self.p_end
            )));
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let step = (self.p_end - self.p_start) / (self.candidates - 1) as f64;
        (0..self.candidates)
            .map(|i| {
                if i + 1 == self.candidates {
                    self.p_end
                } else {
                    self.p_start + i as f64 * step
                }
            })
            .collect()
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::preset(10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    pub probabilities: Vec<f64>,
    /// 1-based rank `k` of the order statistic used as threshold.
    pub ranks: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub exceedance_counts: Vec<usize>,
}

impl CandidateGrid {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// Rank `⌈n·p⌉`, guarded against products like `0.25·100 = 25.000000000000004`.
fn quantile_rank(n: usize, p: f64) -> usize {
    let np = n as f64 * p;
    ((np - 1e-9 * np.max(1.0)).ceil() as usize).clamp(1, n)
}

/// Thresholds `u_i = x_{⌈n·p_i⌉:n}`; candidate `i` keeps the observations strictly above `u_i`.
pub fn build_grid(sample: &ObservationSample, spec: &GridSpec) -> Result<CandidateGrid> {
    spec.validate()?;
    let n = sample.len();
    let probabilities = spec.probabilities();
    let ranks: Vec<usize> = probabilities.iter().map(|&p| quantile_rank(n, p)).collect();
    let thresholds: Vec<f64> = ranks.iter().map(|&k| sample.order_stat(k)).collect();
    let exceedance_counts: Vec<usize> = thresholds.iter().map(|&u| sample.count_above(u)).collect();
    if let Some((i, &c)) = exceedance_counts
        .iter()
        .enumerate()
        .find(|(_, &c)| c < MIN_EXCESSES)
    {
        return Err(Error::Grid(format!(
            "candidate {} (p = {:.4}, u = {}) keeps {c} excesses; at least {MIN_EXCESSES} are required",
            i + 1,
            probabilities[i],
            thresholds[i]
        )));
    }
    Ok(CandidateGrid {
        probabilities,
        ranks,
        thresholds,
        exceedance_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks_sample(n: usize) -> ObservationSample {
        ObservationSample::new((1..=n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn preset_probabilities() {
        let p10 = GridSpec::preset(10).probabilities();
        assert_eq!(p10.len(), 10);
        for (i, p) in p10.iter().enumerate() {
            assert!((p - (0.25 + 0.075 * i as f64)).abs() < 1e-12);
        }
        let p20 = GridSpec::preset(20).probabilities();
        assert!((p20[7] - (0.25 + 7.0 * 0.70 / 19.0)).abs() < 1e-12);
        assert_eq!(p20[19], 0.95);
    }

    #[test]
    fn order_statistic_convention() {
        let g = build_grid(&ranks_sample(100), &GridSpec::preset(10)).unwrap();
        assert_eq!(g.thresholds[0], 25.0);
        assert_eq!(g.exceedance_counts[0], 75);
        assert_eq!(g.ranks[9], 93);
    }

    #[test]
    fn published_exceedance_counts() {
        let g = build_grid(&ranks_sample(315), &GridSpec::preset(20)).unwrap();
        assert_eq!(g.exceedance_counts[7], 155);
        assert!(g.exceedance_counts[13].abs_diff(85) <= 1);
        let g = build_grid(&ranks_sample(628), &GridSpec::preset(20)).unwrap();
        assert!(g.exceedance_counts[15].abs_diff(123) <= 1);
        let g = build_grid(&ranks_sample(628), &GridSpec::preset(10)).unwrap();
        assert!(g.exceedance_counts[0].abs_diff(470) <= 1);
        assert!(g.exceedance_counts[7].abs_diff(142) <= 1);
    }

    #[test]
    fn monotone_with_ties() {
        let v: Vec<f64> = (0..200).map(|i| (i / 7) as f64).collect();
        let g = build_grid(&ObservationSample::new(v).unwrap(), &GridSpec::preset(20)).unwrap();
        assert!(g.thresholds.windows(2).all(|w| w[0] <= w[1]));
        assert!(g.exceedance_counts.windows(2).all(|w| w[0] >= w[1]));
        assert!(g.exceedance_counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn too_little_data_is_a_grid_error() {
        let err = build_grid(&ranks_sample(30), &GridSpec::preset(10)).unwrap_err();
        assert!(matches!(err, Error::Grid(_)));
        let mut v = vec![1.0; 97];
        v.extend([2.0, 3.0, 4.0]);
        assert!(build_grid(&ObservationSample::new(v).unwrap(), &GridSpec::preset(10)).is_err());
    }

    #[test]
    fn invalid_specs() {
        let s = ranks_sample(100);
        for spec in [
            GridSpec { candidates: 1, p_start: 0.25, p_end: 0.9 },
            GridSpec { candidates: 5, p_start: 0.9, p_end: 0.25 },
            GridSpec { candidates: 5, p_start: 0.0, p_end: 0.5 },
            GridSpec { candidates: 5, p_start: 0.2, p_end: 1.0 },
        ] {
            assert!(matches!(build_grid(&s, &spec), Err(Error::Config(_))));
        }
    }
}
