//! Synthetic corruption generators and the sparse + bounded split of
//! Gaussian noise.
//!
//! All generators are pure functions of (input, spec, seed) driven by
//! ChaCha12, so a spec plus seed pins the output across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ReldError, Result};
use crate::video::VideoMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
    GaussianPlusSaltPepper,
}

/// Corruption recipe: what to add, how strong, and the seed that makes it
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub sp_fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma < 0.0 {
            return Err(ReldError::InvalidArgument(format!(
                "sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.sp_fraction) {
            return Err(ReldError::InvalidArgument(format!(
                "sp_fraction must be in [0, 1], got {}",
                self.sp_fraction
            )));
        }
        Ok(())
    }

    /// Applies the corruption described by this spec.
    pub fn apply(&self, video: &VideoMatrix) -> Result<VideoMatrix> {
        self.validate()?;
        match self.kind {
            NoiseKind::Gaussian => add_gaussian(video, self.sigma, self.seed),
            NoiseKind::SaltPepper => add_salt_pepper(video, self.sp_fraction, self.seed),
            NoiseKind::GaussianPlusSaltPepper => {
                let g = add_gaussian(video, self.sigma, self.seed)?;
                // Distinct stream for the impulse pass.
                add_salt_pepper(&g, self.sp_fraction, self.seed ^ 0x9e37_79b9_7f4a_7c15)
            }
        }
    }
}

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `sigma`.
/// Values are not clamped; clamping happens only at store time.
pub fn add_gaussian(video: &VideoMatrix, sigma: f64, seed: u64) -> Result<VideoMatrix> {
    if sigma < 0.0 {
        return Err(ReldError::InvalidArgument(format!(
            "sigma must be nonnegative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(video.clone());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut data = video.data().clone();
    for v in data.iter_mut() {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    video.with_data(data)
}

/// Replaces each pixel independently with probability `fraction`, equal
/// odds of 0 or the peak intensity; other pixels are left untouched.
pub fn add_salt_pepper(video: &VideoMatrix, fraction: f64, seed: u64) -> Result<VideoMatrix> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(ReldError::InvalidArgument(format!(
            "fraction must be in [0, 1], got {fraction}"
        )));
    }
    if fraction == 0.0 {
        return Ok(video.clone());
    }
    let peak = video.geometry().pixel_range_max();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut data = video.data().clone();
    for v in data.iter_mut() {
        if rng.gen::<f64>() < fraction {
            *v = if rng.gen::<bool>() { peak } else { 0.0 };
        }
    }
    video.with_data(data)
}

/// Exact split of a vector into entries above a magnitude threshold (the
/// sparse part) and the bounded remainder.
#[derive(Debug, Clone)]
pub struct SparseBoundedSplit {
    pub sparse: Vec<f64>,
    pub bounded: Vec<f64>,
    pub threshold: f64,
    pub support: Vec<usize>,
}

/// Splits x into s + w where s keeps entries with |x_i| > b0 and w holds
/// the rest. No arithmetic touches any entry, so s + w reconstructs x
/// bitwise.
pub fn split_bounded_sparse(x: &[f64], b0: f64) -> Result<SparseBoundedSplit> {
    if b0 < 0.0 {
        return Err(ReldError::InvalidArgument(format!(
            "threshold must be nonnegative, got {b0}"
        )));
    }
    let mut sparse = vec![0.0; x.len()];
    let mut bounded = vec![0.0; x.len()];
    let mut support = Vec::new();
    for (i, &v) in x.iter().enumerate() {
        if v.abs() > b0 {
            sparse[i] = v;
            support.push(i);
        } else {
            bounded[i] = v;
        }
    }
    Ok(SparseBoundedSplit {
        sparse,
        bounded,
        threshold: b0,
        support,
    })
}

/// Standard normal CDF, accurate to well below 1e-10 across the real line.
pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Expected support fraction of the sparse part when N(0, sigma^2) noise is
/// split at threshold b0: 1 - beta(b0/sigma) with beta(b) = 2 Phi(b) - 1,
/// i.e. 2 (1 - Phi(b0/sigma)).
pub fn predicted_sparse_fraction(b0: f64, sigma: f64) -> Result<f64> {
    if sigma <= 0.0 {
        return Err(ReldError::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if b0 < 0.0 {
        return Err(ReldError::InvalidArgument(format!(
            "threshold must be nonnegative, got {b0}"
        )));
    }
    // 2 (1 - Phi(b)) = erfc(b / sqrt(2)), computed directly from erfc to
    // keep the deep tail accurate.
    Ok(libm::erfc((b0 / sigma) / std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video::{FrameGeometry, VideoMatrix};

    fn video(h: usize, w: usize, frames: usize, fill: f64) -> VideoMatrix {
        let cols = vec![vec![fill; h * w]; frames];
        VideoMatrix::from_frames(FrameGeometry::new(h, w).unwrap(), &cols).unwrap()
    }

    #[test]
    fn gaussian_sigma_zero_is_identity() {
        let v = video(4, 4, 3, 42.0);
        let out = add_gaussian(&v, 0.0, 99).unwrap();
        assert_eq!(out.data(), v.data());
    }

    #[test]
    fn gaussian_is_deterministic_per_seed() {
        let v = video(8, 8, 2, 100.0);
        let a = add_gaussian(&v, 25.0, 7).unwrap();
        let b = add_gaussian(&v, 25.0, 7).unwrap();
        let c = add_gaussian(&v, 25.0, 8).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn gaussian_sample_std_concentrates() {
        // n*T = 10^6 draws at sigma = 50: chi-square concentration puts the
        // sample std within 0.2 of 50.
        let v = video(1000, 100, 10, 0.0);
        let out = add_gaussian(&v, 50.0, 3).unwrap();
        let nt = (out.pixels() * out.num_frames()) as f64;
        let mean: f64 = out.data().iter().sum::<f64>() / nt;
        let var: f64 = out.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nt;
        let std = var.sqrt();
        assert!((49.8..=50.2).contains(&std), "sample std {std}");
    }

    #[test]
    fn salt_pepper_fraction_zero_is_identity() {
        let v = video(4, 4, 2, 9.0);
        let out = add_salt_pepper(&v, 0.0, 1).unwrap();
        assert_eq!(out.data(), v.data());
    }

    #[test]
    fn salt_pepper_fraction_one_saturates_everything() {
        let v = video(8, 8, 2, 100.0);
        let out = add_salt_pepper(&v, 1.0, 1).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0 || v == 255.0));
    }

    #[test]
    fn salt_pepper_corruption_rate_concentrates() {
        // Mid-gray input so every replacement is visible; binomial
        // concentration puts the rate within [0.078, 0.082] at n*T = 10^6.
        let v = video(1000, 100, 10, 128.0);
        let out = add_salt_pepper(&v, 0.08, 11).unwrap();
        let corrupted = out.data().iter().filter(|&&v| v != 128.0).count();
        let rate = corrupted as f64 / (out.pixels() * out.num_frames()) as f64;
        assert!((0.078..=0.082).contains(&rate), "rate {rate}");
    }

    #[test]
    fn split_componentwise_definition() {
        let s = split_bounded_sparse(&[0.5, -3.0, 2.0], 1.0).unwrap();
        assert_eq!(s.sparse, vec![0.0, -3.0, 2.0]);
        assert_eq!(s.bounded, vec![0.5, 0.0, 0.0]);
        assert_eq!(s.support, vec![1, 2]);
    }

    #[test]
    fn split_threshold_zero_keeps_nonzeros_sparse() {
        let s = split_bounded_sparse(&[1.0, 0.0, -2.0], 0.0).unwrap();
        assert_eq!(s.sparse, vec![1.0, 0.0, -2.0]);
        assert!(s.bounded.iter().all(|&v| v == 0.0));
        assert_eq!(s.support, vec![0, 2]);
    }

    #[test]
    fn split_support_fraction_matches_gaussian_law() {
        // At b0 = sigma the predicted fraction is 2(1 - Phi(1)); with
        // n = 1e5 the empirical fraction stays within +-0.01.
        let n = 100_000;
        let sigma = 30.0;
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let s = split_bounded_sparse(&x, sigma).unwrap();
        let fraction = s.support.len() as f64 / n as f64;
        assert!(
            (0.3073..=0.3273).contains(&fraction),
            "support fraction {fraction}"
        );
    }

    #[test]
    fn predicted_fraction_at_zero_threshold_is_one() {
        assert_eq!(predicted_sparse_fraction(0.0, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn predicted_fraction_at_unit_ratio() {
        // Independent oracle: Phi(1) by Simpson quadrature of the normal
        // density over [0, 1].
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let m = 4000;
        let h = 1.0 / m as f64;
        let mut integral = phi(0.0) + phi(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * phi(i as f64 * h);
        }
        integral *= h / 3.0;
        let phi1 = 0.5 + integral;
        let expected = 2.0 * (1.0 - phi1);

        let got = predicted_sparse_fraction(3.0, 3.0).unwrap();
        assert!((got - expected).abs() < 1e-10, "got {got}, oracle {expected}");
        assert!((got - 0.31731050786291415).abs() < 1e-9);
    }

    #[test]
    fn predicted_fraction_deep_tail() {
        let got = predicted_sparse_fraction(10.0, 1.0).unwrap();
        assert!(got > 0.0 && got < 1e-20, "tail fraction {got}");
    }

    #[test]
    fn predicted_fraction_rejects_zero_sigma() {
        assert!(predicted_sparse_fraction(1.0, 0.0).is_err());
    }

    #[test]
    fn hoeffding_bound_holds_over_100_seeds() {
        // With n = 1e5 and eps = 0.01, failures are allowed at rate
        // 2 exp(-2 eps^2 n) ~ 4e-9; expect zero across 100 seeds.
        let n = 100_000;
        let sigma = 1.0;
        let b0 = 1.0;
        let p = predicted_sparse_fraction(b0, sigma).unwrap();
        let eps = 0.01;
        for seed in 0..100 {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut support = 0usize;
            for _ in 0..n {
                let v: f64 = rng.sample(StandardNormal);
                if (sigma * v).abs() > b0 {
                    support += 1;
                }
            }
            let fraction = support as f64 / n as f64;
            assert!(
                (fraction - p).abs() <= eps,
                "seed {seed}: fraction {fraction} outside {p} +- {eps}"
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn split_reconstructs_bitwise(
                x in proptest::collection::vec(-1e6f64..1e6, 1..64),
                b0 in 0.0f64..100.0,
            ) {
                let s = split_bounded_sparse(&x, b0).unwrap();
                for i in 0..x.len() {
                    // untouched entries: one side is the original, the other 0
                    prop_assert!(s.sparse[i] + s.bounded[i] == x[i]);
                    prop_assert!(s.sparse[i] == x[i] || s.sparse[i] == 0.0);
                }
                prop_assert!(s.bounded.iter().all(|w| w.abs() <= b0));
                for (i, &v) in x.iter().enumerate() {
                    prop_assert_eq!(s.support.contains(&i), v.abs() > b0);
                }
            }
        }
    }
}
