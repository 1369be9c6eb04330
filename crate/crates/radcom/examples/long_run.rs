use radcom::admm::run_with;
use radcom::config::{AccessMode, CsitMode, SolverKnobs, SystemConfig};
use radcom::model::{sample_channel_estimate, BeampatternSpec};
use radcom::rng;

fn main() {
    let mut config = SystemConfig {
        reg_lambda: 1e-1,
        access_mode: AccessMode::Rsma,
        csit_mode: CsitMode::Perfect,
        saa_samples: 1,
        admm_tolerance: 1e-4,
        ..Default::default()
    };
    config.rng_seed = 1;
    let spec = BeampatternSpec::array_matched(0.0, config.n_tx, config.antenna_spacing);
    let knobs = SolverKnobs {
        max_admm_iters: 250,
        ..Default::default()
    };
    let mut channel_rng = rng::stream(1, "channel", &[0]);
    let estimate = sample_channel_estimate(&config, &mut channel_rng);
    match run_with(&config, &estimate, &spec, &knobs) {
        Ok(sol) => {
            for rec in sol.history.iter().step_by(10) {
                println!(
                    "it {}: r={:.3e} q={:.3e} awsr={:.4} bse={:.3e}",
                    rec.iteration, rec.primal_residual, rec.dual_residual, rec.awsr_surrogate, rec.bse
                );
            }
            let (cf, _) = sol.precoder.power_split();
            println!(
                "final: converged={} iters={} awsr={:.4} common_frac={:.3}",
                sol.converged,
                sol.iterations,
                sol.history.last().unwrap().awsr_surrogate,
                cf
            );
        }
        Err(e) => println!("FAILED: {e}"),
    }
}
