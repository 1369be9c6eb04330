use nalgebra::{Complex, DMatrix, DVectorView};

use super::precoder::{CommonRateShares, Precoder};
use super::SaaBatch;

/// Instantaneous SINRs and rates of one user for one channel realization.
/// Noise power is fixed at 1.
#[derive(Debug, Clone, Copy)]
pub struct StreamRates {
    pub common_sinr: f64,
    pub private_sinr: f64,
    pub common_rate: f64,
    pub private_rate: f64,
}

/// Common- and private-stream SINRs and rates for user `user` on channel
/// `h`. The common stream sees all private streams as interference; the
/// private stream sees the other users' private streams (the common part
/// was removed by successive interference cancellation).
pub fn sinr_and_rates(precoder: &Precoder, h: DVectorView<Complex<f64>>, user: usize) -> StreamRates {
    let k_users = precoder.n_users();
    let common_signal = precoder.matrix().column(0).dotc(&h).norm_sqr();
    let mut private_total = 0.0;
    let mut own = 0.0;
    for j in 0..k_users {
        let p = precoder.matrix().column(1 + j).dotc(&h).norm_sqr();
        private_total += p;
        if j == user {
            own = p;
        }
    }
    let common_sinr = common_signal / (private_total + 1.0);
    let private_sinr = own / (private_total - own + 1.0);
    StreamRates {
        common_sinr,
        private_sinr,
        common_rate: (1.0 + common_sinr).log2(),
        private_rate: (1.0 + private_sinr).log2(),
    }
}

/// Largest rate at which the common stream is decodable by every user:
/// the minimum of the per-user common rates.
pub fn common_rate(precoder: &Precoder, channels: &DMatrix<Complex<f64>>) -> f64 {
    (0..channels.ncols())
        .map(|k| sinr_and_rates(precoder, channels.column(k), k).common_rate)
        .fold(f64::INFINITY, f64::min)
}

/// Sample-average rates over a conditional batch.
#[derive(Debug, Clone)]
pub struct AverageRates {
    /// Average common-stream rate per user.
    pub common_per_user: Vec<f64>,
    /// Average private-stream rate per user.
    pub private_per_user: Vec<f64>,
    /// Decodable common average rate: `min_k common_per_user[k]`.
    pub common_ar: f64,
    /// Shares actually delivered: the requested shares scaled down so
    /// their sum never exceeds `common_ar`.
    pub delivered_shares: Vec<f64>,
    /// Weighted sum of delivered shares plus private average rates.
    pub awsr: f64,
}

/// Averages instantaneous rates over the batch and reports the delivered
/// weighted sum-rate. Requested common shares are clipped proportionally
/// so the delivered common rate stays decodable on this batch.
pub fn average_rates(
    precoder: &Precoder,
    shares: &CommonRateShares,
    batch: &SaaBatch,
    user_weights: &[f64],
) -> AverageRates {
    let k_users = precoder.n_users();
    assert!(!batch.is_empty(), "batch must be nonempty");
    assert_eq!(user_weights.len(), k_users);
    let mut common = vec![0.0; k_users];
    let mut private = vec![0.0; k_users];
    for sample in batch.samples() {
        for k in 0..k_users {
            let r = sinr_and_rates(precoder, sample.column(k), k);
            common[k] += r.common_rate;
            private[k] += r.private_rate;
        }
    }
    let m = batch.len() as f64;
    for k in 0..k_users {
        common[k] /= m;
        private[k] /= m;
    }
    let common_ar = common.iter().copied().fold(f64::INFINITY, f64::min);
    let requested: f64 = shares.sum();
    let scale = if requested > common_ar && requested > 0.0 {
        (common_ar / requested).max(0.0)
    } else {
        1.0
    };
    let delivered: Vec<f64> = shares.as_slice().iter().map(|&s| s * scale).collect();
    let awsr = user_weights
        .iter()
        .zip(delivered.iter().zip(&private))
        .map(|(&w, (&c, &r))| w * (c + r))
        .sum();
    AverageRates {
        common_per_user: common,
        private_per_user: private,
        common_ar,
        delivered_shares: delivered,
        awsr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use crate::model::{sample_saa_batch, ChannelEstimate};
    use crate::rng::stream;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn orthogonal_interference_leaves_unit_sinr() {
        // h = [1,0], p_c = [1,0], p_1 = [0,1]: interference orthogonal to h
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        let p = Precoder::new(m);
        let h = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let r = sinr_and_rates(&p, h.as_view(), 0);
        assert!((r.common_sinr - 1.0).abs() < 1e-15);
        assert!((r.common_rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matched_private_stream_unit_rate() {
        // h = [1,0], p_1 = [1,0], zero common
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        let p = Precoder::new(m);
        let h = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let r = sinr_and_rates(&p, h.as_view(), 0);
        assert!((r.private_sinr - 1.0).abs() < 1e-15);
        assert!((r.private_rate - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sinr_matches_term_by_term_oracle() {
        let mut rng = stream(3, "test-sinr", &[]);
        let n_tx = 3;
        let k_users = 2;
        for _ in 0..20 {
            let pm = DMatrix::from_fn(n_tx, k_users + 1, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let p = Precoder::new(pm.clone());
            let h = DVector::from_fn(n_tx, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            for user in 0..k_users {
                // oracle: re-evaluate each term independently
                let dot = |col: usize| -> f64 {
                    let mut acc = Complex::new(0.0, 0.0);
                    for i in 0..n_tx {
                        acc += h[i].conj() * pm[(i, col)];
                    }
                    acc.norm_sqr()
                };
                let all_priv: f64 = (1..=k_users).map(dot).sum();
                let gc = dot(0) / (all_priv + 1.0);
                let gk = dot(1 + user) / (all_priv - dot(1 + user) + 1.0);
                let r = sinr_and_rates(&p, h.as_view(), user);
                assert!((r.common_sinr - gc).abs() < 1e-12 * (1.0 + gc));
                assert!((r.private_sinr - gk).abs() < 1e-12 * (1.0 + gk));
                assert!((r.common_rate - (1.0 + gc).log2()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn common_rate_is_min_over_users() {
        let mut rng = stream(4, "test-common", &[]);
        for _ in 0..10 {
            let pm = DMatrix::from_fn(3, 3, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let p = Precoder::new(pm);
            let h = DMatrix::from_fn(3, 2, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let oracle = (0..2)
                .map(|k| sinr_and_rates(&p, h.column(k), k).common_rate)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(common_rate(&p, &h), oracle);
        }
    }

    #[test]
    fn identical_channels_make_min_trivial() {
        let pm = DMatrix::from_element(2, 3, c(0.4, 0.2));
        let p = Precoder::new(pm);
        let hcol = DVector::from_column_slice(&[c(1.0, -0.5), c(0.2, 0.8)]);
        let mut h = DMatrix::zeros(2, 2);
        h.column_mut(0).copy_from(&hcol);
        h.column_mut(1).copy_from(&hcol);
        let single = sinr_and_rates(&p, h.column(0), 0).common_rate;
        assert!((common_rate(&p, &h) - single).abs() < 1e-15);
    }

    #[test]
    fn zero_error_average_equals_instantaneous() {
        let mut rng = stream(6, "test-avg", &[]);
        let est = ChannelEstimate::new(
            DMatrix::from_fn(3, 2, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }),
            vec![0.0, 0.0],
        )
        .unwrap();
        let batch = sample_saa_batch(&est, 7, &mut stream(6, "saa", &[]));
        let pm = DMatrix::from_fn(3, 3, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let p = Precoder::new(pm);
        let shares = CommonRateShares::zeros(2);
        let avg = average_rates(&p, &shares, &batch, &[0.5, 0.5]);
        for k in 0..2 {
            let inst = sinr_and_rates(&p, est.h_hat.column(k), k);
            assert!((avg.common_per_user[k] - inst.common_rate).abs() < 1e-12);
            assert!((avg.private_per_user[k] - inst.private_rate).abs() < 1e-12);
        }
    }

    #[test]
    fn two_sample_average_is_arithmetic_mean() {
        let h1 = DMatrix::from_element(2, 1, c(1.0, 0.0));
        let h2 = DMatrix::from_element(2, 1, c(0.0, 2.0));
        let batch = SaaBatch::from_samples(vec![h1.clone(), h2.clone()]).unwrap();
        let pm = DMatrix::from_fn(2, 2, |i, j| c(0.3 * (i + j) as f64 + 0.1, 0.2));
        let p = Precoder::new(pm);
        let shares = CommonRateShares::zeros(1);
        let avg = average_rates(&p, &shares, &batch, &[1.0]);
        let r1 = sinr_and_rates(&p, h1.column(0), 0);
        let r2 = sinr_and_rates(&p, h2.column(0), 0);
        assert!((avg.private_per_user[0] - 0.5 * (r1.private_rate + r2.private_rate)).abs() < 1e-14);
        assert!((avg.common_per_user[0] - 0.5 * (r1.common_rate + r2.common_rate)).abs() < 1e-14);
    }

    #[test]
    fn average_matches_brute_force_loop() {
        let mut rng = stream(8, "test-avg2", &[]);
        let est = ChannelEstimate::new(
            DMatrix::from_fn(2, 2, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }),
            vec![0.3, 0.2],
        )
        .unwrap();
        let batch = sample_saa_batch(&est, 16, &mut stream(8, "saa2", &[]));
        let pm = DMatrix::from_fn(2, 3, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let p = Precoder::new(pm);
        let shares = CommonRateShares::new(vec![0.2, 0.1]).unwrap();
        let weights = [0.7, 0.3];
        let avg = average_rates(&p, &shares, &batch, &weights);

        // independent averaging loop
        let mut cbar = [0.0; 2];
        let mut rbar = [0.0; 2];
        for s in batch.samples() {
            for k in 0..2 {
                let r = sinr_and_rates(&p, s.column(k), k);
                cbar[k] += r.common_rate / 16.0;
                rbar[k] += r.private_rate / 16.0;
            }
        }
        let car = cbar[0].min(cbar[1]);
        let req = 0.3;
        let scale = if req > car { car / req } else { 1.0 };
        let awsr = 0.7 * (0.2 * scale + rbar[0]) + 0.3 * (0.1 * scale + rbar[1]);
        assert!((avg.awsr - awsr).abs() < 1e-12);
        assert!((avg.common_ar - car).abs() < 1e-12);
    }
}
