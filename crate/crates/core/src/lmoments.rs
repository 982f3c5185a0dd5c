//! Sample probability weighted moments and L-statistics.
//!
//! The unbiased PWM estimator is
//!
//! ```text
//! a_r = (1/n) Σ_i C(n-i, r) / C(n-1, r) · x_{i:n}
//! ```
//!
//! and the first four L-moments are the fixed combinations
//! `ℓ1 = a0`, `ℓ2 = a0 - 2a1`, `ℓ3 = a0 - 6a1 + 6a2`, `ℓ4 = a0 - 12a1 + 30a2 - 20a3`.
//! Binomial weights are built with the multiplicative recurrence
//! `w_r(i) = w_{r-1}(i) · (n-i-r+1)/(n-r)` so no factorial is ever formed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::ObservationSample;

/// Below this multiple of `|ℓ1|`, `ℓ2` is treated as zero.
pub const DEGENERATE_L2_RATIO: f64 = 1e-14;

/// Coefficients mapping `(a0, a1, a2, a3)` to `(ℓ1, ℓ2, ℓ3, ℓ4)`.
pub const PWM_TO_LMOM: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, -2.0, 0.0, 0.0],
    [1.0, -6.0, 6.0, 0.0],
    [1.0, -12.0, 30.0, -20.0],
];

/// Sample PWMs `a_0 ..= a_rmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwmSet {
    values: Vec<f64>,
}

impl PwmSet {
    pub fn a(&self, r: usize) -> f64 {
        self.values[r]
    }

    pub fn rmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Unbiased PWM estimates `a_0 ..= a_rmax` of a sample.
pub fn pwm_estimates(sample: &ObservationSample, rmax: usize) -> Result<PwmSet> {
    let values = pwm_sorted(sample.values(), rmax)?;
    Ok(PwmSet { values })
}

fn pwm_sorted(x: &[f64], rmax: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= rmax {
        return Err(Error::InsufficientSample {
            required: rmax,
            got: n,
        });
    }
    let mut sums = vec![0.0; rmax + 1];
    for (idx, &xi) in x.iter().enumerate() {
        let i = idx + 1;
        let mut w = 1.0;
        sums[0] += xi;
        for (r, sum) in sums.iter_mut().enumerate().skip(1) {
            w *= (n as f64 - i as f64 - r as f64 + 1.0) / (n as f64 - r as f64);
            if w == 0.0 {
                break;
            }
            *sum += w * xi;
        }
    }
    Ok(sums.into_iter().map(|s| s / n as f64).collect())
}

/// Precomputed PWM weights `w_1, w_2, w_3` for a fixed sample size.
///
/// Used where many samples of the same size are summarised, e.g. the
/// goodness-of-fit simulation.
#[derive(Debug, Clone)]
pub struct PwmWeights {
    n: usize,
    w: Vec<[f64; 3]>,
}

impl PwmWeights {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InsufficientSample { required: 3, got: n });
        }
        let nf = n as f64;
        let w = (1..=n)
            .map(|i| {
                let k = (n - i) as f64;
                let w1 = k / (nf - 1.0);
                let w2 = w1 * (k - 1.0).max(0.0) / (nf - 2.0);
                let w3 = w2 * (k - 2.0).max(0.0) / (nf - 3.0);
                [w1, w2, w3]
            })
            .collect();
        Ok(Self { n, w })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// L-moments of an ascending slice of exactly `self.len()` values.
    pub fn l_moments(&self, sorted: &[f64]) -> LMoments {
        assert_eq!(sorted.len(), self.n, "sample size does not match weights");
        let mut a = [0.0; 4];
        for (&x, w) in sorted.iter().zip(&self.w) {
            a[0] += x;
            a[1] += w[0] * x;
            a[2] += w[1] * x;
            a[3] += w[2] * x;
        }
        let nf = self.n as f64;
        LMoments::from_pwm([a[0] / nf, a[1] / nf, a[2] / nf, a[3] / nf])
    }
}

/// First four sample L-moments, without ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LMoments {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
}

impl LMoments {
    pub fn from_pwm(a: [f64; 4]) -> Self {
        let l = |row: &[f64; 4]| row.iter().zip(&a).map(|(c, a)| c * a).sum::<f64>();
        Self {
            l1: l(&PWM_TO_LMOM[0]),
            l2: l(&PWM_TO_LMOM[1]),
            l3: l(&PWM_TO_LMOM[2]),
            l4: l(&PWM_TO_LMOM[3]),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.l2 > DEGENERATE_L2_RATIO * self.l1.abs()) || self.l2 <= 0.0
    }

    /// `(t3, t4)`, or an error when `ℓ2` is at the noise floor.
    pub fn ratios(&self) -> Result<(f64, f64)> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSample(format!(
                "L-scale {} is zero to working precision",
                self.l2
            )));
        }
        Ok((self.l3 / self.l2, self.l4 / self.l2))
    }
}

/// First `nmom` sample L-moments (`nmom ≤ 4`, `n ≥ nmom`).
///
/// Unlike [`l_statistics`] this accepts samples as small as the number of
/// moments requested.
pub fn sample_l_moments(sample: &ObservationSample, nmom: usize) -> Result<Vec<f64>> {
    if nmom == 0 || nmom > 4 {
        return Err(Error::Domain(format!("nmom must be in 1..=4, got {nmom}")));
    }
    let a = pwm_sorted(sample.values(), nmom - 1)?;
    Ok(PWM_TO_LMOM[..nmom]
        .iter()
        .map(|row| row.iter().zip(&a).map(|(c, a)| c * a).sum())
        .collect())
}

/// L-moments and L-moment ratios of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LStatSet {
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub t3: f64,
    pub t4: f64,
}

impl LStatSet {
    pub fn from_moments(n: usize, m: LMoments) -> Result<Self> {
        let (t3, t4) = m.ratios()?;
        Ok(Self {
            n,
            l1: m.l1,
            l2: m.l2,
            l3: m.l3,
            l4: m.l4,
            t3,
            t4,
        })
    }

    pub fn moments(&self) -> LMoments {
        LMoments {
            l1: self.l1,
            l2: self.l2,
            l3: self.l3,
            l4: self.l4,
        }
    }
}

/// First four L-moments of a sample without forming the ratios. Needs `n ≥ 4`.
pub fn l_moments(sample: &ObservationSample) -> Result<LMoments> {
    l_moments_sorted(sample.values())
}

pub(crate) fn l_moments_sorted(x: &[f64]) -> Result<LMoments> {
    if x.len() < 4 {
        return Err(Error::InsufficientSample {
            required: 3,
            got: x.len(),
        });
    }
    let a = pwm_sorted(x, 3)?;
    Ok(LMoments::from_pwm([a[0], a[1], a[2], a[3]]))
}

/// `(ℓ1..ℓ4, t3, t4)` of a sample with at least four observations.
pub fn l_statistics(sample: &ObservationSample) -> Result<LStatSet> {
    LStatSet::from_moments(sample.len(), l_moments(sample)?)
}

pub(crate) fn l_statistics_sorted(x: &[f64]) -> Result<LStatSet> {
    LStatSet::from_moments(x.len(), l_moments_sorted(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> ObservationSample {
        ObservationSample::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Direct binomial evaluation of the PWM estimator, O(n·r) with explicit
    /// coefficients; independent of the recurrence.
    fn pwm_brute(x: &[f64], r: usize) -> f64 {
        fn binom(n: i64, k: i64) -> f64 {
            if k < 0 || n < k {
                return 0.0;
            }
            (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
        }
        let n = x.len() as i64;
        let denom = binom(n - 1, r as i64);
        x.iter()
            .enumerate()
            .map(|(i, &xi)| binom(n - (i as i64 + 1), r as i64) * xi)
            .sum::<f64>()
            / (n as f64 * denom)
    }

    #[test]
    fn pwm_hand_examples() {
        let p = pwm_estimates(&sample(&[1.0, 2.0, 3.0]), 1).unwrap();
        assert!(close(p.a(0), 2.0, 1e-15));
        assert!(close(p.a(1), 2.0 / 3.0, 1e-15));

        let p = pwm_estimates(&sample(&[7.5; 4]), 1).unwrap();
        assert!(close(p.a(1), 7.5 / 2.0, 1e-15));

        let p = pwm_estimates(&sample(&[0.0, 1.0]), 1).unwrap();
        assert_eq!(p.a(0), 0.5);
        assert_eq!(p.a(1), 0.0);
    }

    #[test]
    fn pwm_needs_more_points_than_order() {
        assert!(matches!(
            pwm_estimates(&sample(&[1.0, 2.0]), 2),
            Err(Error::InsufficientSample { .. })
        ));
    }

    #[test]
    fn small_sample_l_moments() {
        let l = sample_l_moments(&sample(&[1.0, 2.0, 3.0]), 2).unwrap();
        assert!(close(l[0], 2.0, 1e-15));
        assert!(close(l[1], 2.0 / 3.0, 1e-15));
        let l = sample_l_moments(&sample(&[0.0, 1.0]), 2).unwrap();
        assert_eq!(l, vec![0.5, 0.5]);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let s = sample(&[5.0; 4]);
        let m = l_moments(&s).unwrap();
        assert!(close(m.l2, 0.0, 1e-14) && close(m.l3, 0.0, 1e-14) && close(m.l4, 0.0, 1e-14));
        assert!(matches!(l_statistics(&s), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn l_statistics_requires_four() {
        assert!(l_statistics(&sample(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn recurrence_matches_explicit_binomials() {
        let x: Vec<f64> = (0..57).map(|i| ((i * 37) % 23) as f64 + 0.1 * i as f64).collect();
        let s = sample(&x);
        let p = pwm_estimates(&s, 3).unwrap();
        for r in 0..=3 {
            assert!(close(p.a(r), pwm_brute(s.values(), r), 1e-12), "r={r}");
        }
    }

    #[test]
    fn cached_weights_agree() {
        let s = sample(&[0.3, 1.2, 1.9, 2.0, 4.4, 7.1, 9.9]);
        let w = PwmWeights::new(s.len()).unwrap();
        let a = w.l_moments(s.values());
        let b = l_moments(&s).unwrap();
        assert!(close(a.l1, b.l1, 1e-14));
        assert!(close(a.l2, b.l2, 1e-14));
        assert!(close(a.l3, b.l3, 1e-14));
        assert!(close(a.l4, b.l4, 1e-14));
    }

    #[test]
    fn two_point_sample_dips_below_bound() {
        let mut v = vec![0.0; 10];
        v.extend(vec![1.0; 40]);
        let ls = l_statistics(&sample(&v)).unwrap();
        let gap = ls.t4 - crate::lmrd::lower_bound(ls.t3);
        assert!(gap < 0.0 && gap > -2.0 / 50.0, "gap={gap}");
    }

    #[test]
    fn large_sample_weights_stay_finite() {
        let x: Vec<f64> = (1..=20_000).map(f64::from).collect();
        let ls = l_statistics(&sample(&x)).unwrap();
        // Discrete uniform on 1..n: ℓ2 = (n+1)/6, t3 = 0, t4 = 0 up to O(1/n^2).
        assert!(close(ls.l2, 20_001.0 / 6.0, 1e-6));
        assert!(ls.t3.abs() < 1e-9);
        assert!(ls.t4.abs() < 1e-6);
    }

    fn nondegenerate() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 4..80)
            .prop_filter("needs spread", |v| {
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                hi - lo > 1e-3
            })
    }

    proptest! {
        #[test]
        fn ratios_respect_global_bounds(v in nondegenerate()) {
            let ls = l_statistics(&sample(&v)).unwrap();
            prop_assert!(ls.t3.abs() < 1.0);
            prop_assert!(ls.t4 < 1.0);
        }

        // Unbiased sample ratios can dip below the population bound by O(1/n)
        // (two-point samples reach about 1.3/n), so the bound carries that slack.
        #[test]
        fn ratios_near_lower_bound(v in prop::collection::vec(-1e3f64..1e3, 20..200)) {
            let ls = l_statistics(&sample(&v)).unwrap();
            let n = v.len() as f64;
            prop_assert!(ls.t4 >= crate::lmrd::lower_bound(ls.t3) - 2.0 / n);
        }

        #[test]
        fn l1_is_the_mean(v in nondegenerate()) {
            let ls = l_statistics(&sample(&v)).unwrap();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!((ls.l1 - mean).abs() <= 1e-12 * (1.0 + mean.abs()));
        }

        #[test]
        fn affine_equivariance(v in nondegenerate(), a in 0.01f64..100.0, b in -100.0f64..100.0) {
            let x = l_statistics(&sample(&v)).unwrap();
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let y = l_statistics(&sample(&w)).unwrap();
            let tol = 1e-9 * a * (1.0 + x.l1.abs() + x.l2.abs());
            prop_assert!((y.l1 - (a * x.l1 + b)).abs() <= tol + 1e-9 * b.abs());
            prop_assert!((y.l2 - a * x.l2).abs() <= tol);
            prop_assert!((y.l3 - a * x.l3).abs() <= tol);
            prop_assert!((y.l4 - a * x.l4).abs() <= tol);
            prop_assert!((y.t3 - x.t3).abs() <= 1e-9);
            prop_assert!((y.t4 - x.t4).abs() <= 1e-9);
        }
    }
}
