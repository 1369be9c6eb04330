use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::{invalid, ModelError};
use crate::config::SystemConfig;

/// Channel estimate at the transmitter together with the per-user
/// conditional error variances.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// `n_tx x K`; column k is the estimated channel of user k.
    pub h_hat: DMatrix<Complex<f64>>,
    /// Conditional error variance per user.
    pub error_variances: Vec<f64>,
}

impl ChannelEstimate {
    pub fn new(h_hat: DMatrix<Complex<f64>>, error_variances: Vec<f64>) -> Result<Self, ModelError> {
        if h_hat.ncols() != error_variances.len() {
            return Err(invalid("one error variance per user required"));
        }
        if error_variances.iter().any(|&v| v < 0.0) {
            return Err(invalid("error variances must be nonnegative"));
        }
        Ok(ChannelEstimate {
            h_hat,
            error_variances,
        })
    }

    /// Validates the estimate against the channel variances it was drawn
    /// from: the estimate variance `sigma_k^2 - sigma_e_k^2` must be
    /// nonnegative.
    pub fn validated(
        h_hat: DMatrix<Complex<f64>>,
        error_variances: Vec<f64>,
        channel_variances: &[f64],
    ) -> Result<Self, ModelError> {
        for (k, (&e, &v)) in error_variances.iter().zip(channel_variances).enumerate() {
            if e > v + 1e-15 {
                return Err(invalid(format!(
                    "error variance exceeds channel variance for user {k}"
                )));
            }
        }
        Self::new(h_hat, error_variances)
    }

    pub fn n_tx(&self) -> usize {
        self.h_hat.nrows()
    }

    pub fn n_users(&self) -> usize {
        self.h_hat.ncols()
    }

    pub fn is_exact(&self) -> bool {
        self.error_variances.iter().all(|&v| v == 0.0)
    }
}

fn complex_gaussian(rng: &mut ChaCha12Rng, variance: f64) -> Complex<f64> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

/// Draws a channel estimate: entries of column k are i.i.d. circular
/// complex Gaussian with variance `sigma_k^2 - sigma_e_k^2`.
pub fn sample_channel_estimate(config: &SystemConfig, rng: &mut ChaCha12Rng) -> ChannelEstimate {
    let error_variances = config.error_variances();
    let mut h = DMatrix::zeros(config.n_tx, config.n_users);
    for k in 0..config.n_users {
        let var = (config.channel_variances[k] - error_variances[k]).max(0.0);
        for i in 0..config.n_tx {
            h[(i, k)] = complex_gaussian(rng, var);
        }
    }
    ChannelEstimate {
        h_hat: h,
        error_variances,
    }
}

/// Conditional channel samples `H^(m) = H_hat + E^(m)` for the sample
/// average approximation.
#[derive(Debug, Clone)]
pub struct SaaBatch {
    samples: Vec<DMatrix<Complex<f64>>>,
}

impl SaaBatch {
    /// Builds a batch from explicit samples; all must share one shape.
    pub fn from_samples(samples: Vec<DMatrix<Complex<f64>>>) -> Result<Self, ModelError> {
        if samples.is_empty() {
            return Err(invalid("batch must be nonempty"));
        }
        let shape = samples[0].shape();
        if samples.iter().any(|s| s.shape() != shape) {
            return Err(invalid("all batch samples must have identical shape"));
        }
        Ok(SaaBatch { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[DMatrix<Complex<f64>>] {
        &self.samples
    }

    pub fn sample(&self, m: usize) -> &DMatrix<Complex<f64>> {
        &self.samples[m]
    }
}

/// Draws `m_prime` conditional samples around the estimate; deterministic
/// for a given stream. With zero error variances every sample equals the
/// estimate exactly.
pub fn sample_saa_batch(
    estimate: &ChannelEstimate,
    m_prime: usize,
    rng: &mut ChaCha12Rng,
) -> SaaBatch {
    assert!(m_prime >= 1, "at least one sample required");
    let mut samples = Vec::with_capacity(m_prime);
    for _ in 0..m_prime {
        let mut h = estimate.h_hat.clone();
        for k in 0..estimate.n_users() {
            let var = estimate.error_variances[k];
            if var > 0.0 {
                for i in 0..estimate.n_tx() {
                    h[(i, k)] += complex_gaussian(rng, var);
                }
            }
        }
        samples.push(h);
    }
    SaaBatch { samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn zero_error_batch_equals_estimate() {
        let cfg = SystemConfig {
            csit_mode: crate::config::CsitMode::Perfect,
            ..Default::default()
        };
        let mut rng = stream(5, "channel", &[0]);
        let est = sample_channel_estimate(&cfg, &mut rng);
        assert!(est.is_exact());
        let mut rng2 = stream(5, "saa", &[0]);
        let batch = sample_saa_batch(&est, 4, &mut rng2);
        for s in batch.samples() {
            assert_eq!(s, &est.h_hat);
        }
    }

    #[test]
    fn empirical_error_variance_matches() {
        let est = ChannelEstimate::new(DMatrix::zeros(2, 1), vec![0.25]).unwrap();
        let mut rng = stream(9, "saa", &[1]);
        let batch = sample_saa_batch(&est, 10_000, &mut rng);
        let mut acc = 0.0;
        let mut count = 0usize;
        for s in batch.samples() {
            for v in s.iter() {
                acc += v.norm_sqr();
                count += 1;
            }
        }
        let var = acc / count as f64;
        assert!(
            (var - 0.25).abs() < 0.05 * 0.25,
            "empirical variance {var} too far from 0.25"
        );
    }

    #[test]
    fn same_seed_gives_bit_identical_batches() {
        let est = ChannelEstimate::new(
            DMatrix::from_element(3, 2, Complex::new(0.3, -0.1)),
            vec![0.5, 0.4],
        )
        .unwrap();
        let b1 = sample_saa_batch(&est, 8, &mut stream(17, "saa", &[3]));
        let b2 = sample_saa_batch(&est, 8, &mut stream(17, "saa", &[3]));
        for (s1, s2) in b1.samples().iter().zip(b2.samples()) {
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn estimate_variance_must_dominate_error() {
        let r = ChannelEstimate::validated(DMatrix::zeros(2, 1), vec![1.5], &[1.0]);
        assert!(r.is_err());
    }
}
