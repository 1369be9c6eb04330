use nalgebra::{Complex, DMatrix};
use radcom::config::{CsitMode, SystemConfig};
use radcom::model::{
    average_rates, sample_channel_estimate, sample_saa_batch, steering_vector, CommonRateShares,
    Precoder,
};
use radcom::rng;

fn main() {
    let mut config = SystemConfig::default();
    config.csit_mode = CsitMode::Perfect;
    config.saa_samples = 1;
    let mut channel_rng = rng::stream(1, "channel", &[0]);
    let est = sample_channel_estimate(&config, &mut channel_rng);
    let batch = sample_saa_batch(&est, 1, &mut rng::stream(9, "x", &[]));
    let a0 = steering_vector(0.0, config.n_tx, config.antenna_spacing);
    for k in 0..config.n_users {
        let z = est.h_hat.column(k).dotc(&a0).norm_sqr() / config.n_tx as f64;
        println!("user {k}: |h^H a0|^2/Nt = {z:.4}");
    }
    for f in [0.3, 0.5, 0.7, 0.9, 0.95, 0.98] {
        let fractions = [f, (1.0 - f) / 2.0, (1.0 - f) / 2.0];
        let mut m = DMatrix::zeros(config.n_tx, 3);
        for (j, &fr) in fractions.iter().enumerate() {
            let scale = (fr * config.power_total / config.n_tx as f64).sqrt();
            m.column_mut(j).copy_from(&(&a0 * Complex::new(scale, 0.0)));
        }
        let p = Precoder::new(m);
        // fill shares to the decodable common rate (split equally)
        let probe = average_rates(&p, &CommonRateShares::zeros(2), &batch, &config.user_weights);
        let shares =
            CommonRateShares::new(vec![probe.common_ar / 2.0, probe.common_ar / 2.0]).unwrap();
        let avg = average_rates(&p, &shares, &batch, &config.user_weights);
        println!(
            "f={f:.2}: awsr={:.4} common_ar={:.4} private={:?}",
            avg.awsr, avg.common_ar, avg.private_per_user
        );
    }
}
