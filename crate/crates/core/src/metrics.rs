//! Post-combining SINR, spectral efficiency and outage probability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot_conj, ComplexMatrix, ComplexVector};

/// Everything needed to evaluate the SINR of a hybrid combiner for one user.
#[derive(Debug, Clone, Copy)]
pub struct SinrInputs<'a> {
    /// Selected ports (rows of `H_u` seen by the analog network).
    pub selection: &'a [usize],
    /// Analog combiner `F`, `|selection| x L`.
    pub analog: &'a ComplexMatrix,
    /// Digital combiner `w`, length `L`.
    pub digital: &'a ComplexVector,
    /// Channel `H_u`, `N x M`.
    pub channel: &'a ComplexMatrix,
    /// Column of `H_u` carrying the desired stream.
    pub user: usize,
    /// Linear transmit SNR.
    pub snr: f64,
}

impl SinrInputs<'_> {
    fn validate(&self) -> Result<()> {
        let p = self.selection.len();
        if p == 0 || self.analog.nrows() != p || self.analog.ncols() != self.digital.len() {
            return Err(Error::InvalidArgument(format!(
                "combiner shapes: |S| = {p}, F is {}x{}, w has {}",
                self.analog.nrows(),
                self.analog.ncols(),
                self.digital.len()
            )));
        }
        if self.user >= self.channel.ncols() {
            return Err(Error::InvalidArgument(format!("user {} of {}", self.user, self.channel.ncols())));
        }
        if let Some(&bad) = self.selection.iter().find(|&&s| s >= self.channel.nrows()) {
            return Err(Error::InvalidIndex(bad));
        }
        if !(self.snr > 0.0) {
            return Err(Error::InvalidArgument(format!("snr {}", self.snr)));
        }
        Ok(())
    }
}

/// SINR of the detected symbol `w^H F^H S^T x_u`:
///
/// `|t^H h_u|^2 / (sum_{j != u} |t^H h_j|^2 + ||t||^2 / snr)`, `t = F w`,
/// with `h_j` the selected rows of column `j` of `H_u`.
pub fn sinr_eq12(inputs: &SinrInputs<'_>) -> Result<f64> {
    inputs.validate()?;
    let t = inputs.analog * inputs.digital;
    Ok(combiner_sinr(t.as_slice(), inputs.selection, inputs.channel, inputs.user, inputs.snr))
}

/// Same SINR for an equivalent combiner `t` acting on `selection` directly.
pub fn combiner_sinr(t: &[Complex64], selection: &[usize], channel: &ComplexMatrix, user: usize, snr: f64) -> f64 {
    let mut rows = vec![Complex64::new(0.0, 0.0); selection.len()];
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, col) in channel.column_iter().enumerate() {
        for (r, &s) in rows.iter_mut().zip(selection) {
            *r = col[s];
        }
        let g = dot_conj(t, &rows).norm_sqr();
        if j == user {
            signal = g;
        } else {
            interference += g;
        }
    }
    let t_norm: f64 = t.iter().map(|z| z.norm_sqr()).sum();
    let denom = interference + t_norm / snr;
    if denom > 0.0 {
        signal / denom
    } else {
        0.0
    }
}

/// `log2(1 + sinr)` in bits/s/Hz.
pub fn spectral_efficiency(sinr: f64) -> Result<f64> {
    if sinr.is_nan() || sinr < 0.0 {
        return Err(Error::InvalidArgument(format!("negative SINR {sinr}")));
    }
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Threshold and per-realization SE samples for an outage estimate.
#[derive(Debug, Clone, Copy)]
pub struct OutageQuery<'a> {
    pub threshold: f64,
    pub samples: &'a [f64],
}

/// Fraction of samples strictly below the threshold.
pub fn outage_probability(query: &OutageQuery<'_>) -> Result<f64> {
    if query.samples.is_empty() {
        return Err(Error::InvalidArgument("outage estimate from zero samples".into()));
    }
    let below = query.samples.iter().filter(|&&s| s < query.threshold).count();
    Ok(below as f64 / query.samples.len() as f64)
}

/// Empirical outage with its Wilson-score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub gamma: f64,
    pub probability: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub samples: usize,
}

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson-score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub fn outage_estimate(gamma: f64, samples: &[f64]) -> Result<OutageEstimate> {
    let probability = outage_probability(&OutageQuery { threshold: gamma, samples })?;
    let below = samples.iter().filter(|&&s| s < gamma).count();
    let (wilson_low, wilson_high) = wilson_interval(below, samples.len(), Z_95);
    Ok(OutageEstimate {
        gamma,
        probability,
        wilson_low,
        wilson_high,
        samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_link() {
        let h = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
        let f = ComplexMatrix::from_element(1, 1, c(1.0, 0.0));
        let w = ComplexVector::from_element(1, c(1.0, 0.0));
        let s = sinr_eq12(&SinrInputs { selection: &[0], analog: &f, digital: &w, channel: &h, user: 0, snr: 10.0 });
        assert!((s.unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let h = ComplexMatrix::from_element(2, 2, c(1.0, 0.0));
        let f = ComplexMatrix::from_element(1, 2, c(1.0, 0.0));
        let w = ComplexVector::from_element(1, c(1.0, 0.0));
        let inputs = SinrInputs { selection: &[0], analog: &f, digital: &w, channel: &h, user: 0, snr: 1.0 };
        assert!(sinr_eq12(&inputs).is_err());
        let w = ComplexVector::from_element(2, c(1.0, 0.0));
        assert!(sinr_eq12(&SinrInputs { user: 2, digital: &w, ..inputs }).is_err());
        assert!(sinr_eq12(&SinrInputs { selection: &[5], digital: &w, ..inputs }).is_err());
    }

    #[test]
    fn se_values() {
        assert_eq!(spectral_efficiency(0.0).unwrap(), 0.0);
        assert!((spectral_efficiency(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((spectral_efficiency(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(spectral_efficiency(-0.1).is_err());
    }

    #[test]
    fn outage_values() {
        let op = |g, s: &[f64]| outage_probability(&OutageQuery { threshold: g, samples: s }).unwrap();
        assert_eq!(op(1.0, &[2.0, 2.0]), 0.0);
        assert_eq!(op(2.0, &[1.0, 3.0]), 0.5);
        assert_eq!(op(3.0, &[2.0, 2.0]), 1.0);
        // boundary samples are not in outage
        assert_eq!(op(2.0, &[2.0]), 0.0);
        assert!(outage_probability(&OutageQuery { threshold: 1.0, samples: &[] }).is_err());
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 100, Z_95);
        assert!(lo < 0.3 && hi > 0.3);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 50, Z_95);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.071_347_599_133_358_74).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn sinr_scale_and_permutation_invariant(
            seed in 0u64..1000, scale_re in 0.1f64..5.0, scale_im in -5.0f64..5.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut r = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let h = ComplexMatrix::from_fn(6, 3, |_, _| r());
            let f = ComplexMatrix::from_fn(3, 2, |_, _| r());
            let w = ComplexVector::from_fn(2, |_, _| r());
            let sel = [4usize, 1, 2];
            let base = sinr_eq12(&SinrInputs { selection: &sel, analog: &f, digital: &w, channel: &h, user: 1, snr: 3.0 }).unwrap();

            let ws = &w * c(scale_re, scale_im);
            let scaled = sinr_eq12(&SinrInputs { selection: &sel, analog: &f, digital: &ws, channel: &h, user: 1, snr: 3.0 }).unwrap();
            prop_assert!((scaled - base).abs() <= 1e-9 * base.max(1e-300));

            let perm = [2usize, 0, 1];
            let sel_p: Vec<usize> = perm.iter().map(|&k| sel[k]).collect();
            let f_p = ComplexMatrix::from_fn(3, 2, |i, j| f[(perm[i], j)]);
            let permuted = sinr_eq12(&SinrInputs { selection: &sel_p, analog: &f_p, digital: &w, channel: &h, user: 1, snr: 3.0 }).unwrap();
            prop_assert!((permuted - base).abs() <= 1e-9 * base.max(1e-300));
        }

        #[test]
        fn se_increasing_and_outage_monotone(
            a in 0.0f64..1e3, b in 0.0f64..1e3,
            samples in proptest::collection::vec(0.0f64..10.0, 1..50),
            g1 in 0.0f64..10.0, g2 in 0.0f64..10.0,
        ) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            if lo < hi {
                prop_assert!(spectral_efficiency(lo).unwrap() < spectral_efficiency(hi).unwrap());
            }
            let (gl, gh) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let pl = outage_probability(&OutageQuery { threshold: gl, samples: &samples }).unwrap();
            let ph = outage_probability(&OutageQuery { threshold: gh, samples: &samples }).unwrap();
            prop_assert!(pl <= ph);
            let raised: Vec<f64> = samples.iter().map(|s| s + 0.5).collect();
            let pr = outage_probability(&OutageQuery { threshold: gl, samples: &raised }).unwrap();
            prop_assert!(pr <= pl);
        }
    }
}
