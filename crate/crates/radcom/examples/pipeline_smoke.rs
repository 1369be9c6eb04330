use radcom::admm::run_with;
use radcom::config::{AccessMode, CsitMode, SolverKnobs, SystemConfig};
use radcom::model::{sample_channel_estimate, BeampatternSpec};
use radcom::rng;
use std::time::Instant;

fn main() {
    let lambda: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-5);
    let mode = std::env::args().nth(2).unwrap_or_else(|| "rsma".into());
    let pattern = std::env::args().nth(3).unwrap_or_else(|| "matched".into());
    let csit = std::env::args().nth(4).unwrap_or_else(|| "partial".into());

    let mut config = SystemConfig {
        reg_lambda: lambda,
        access_mode: if mode == "sdma" { AccessMode::Sdma } else { AccessMode::Rsma },
        csit_mode: if csit == "perfect" { CsitMode::Perfect } else { CsitMode::Partial },
        ..Default::default()
    };
    if config.csit_mode == CsitMode::Perfect {
        config.saa_samples = 1;
    }
    let spec = if pattern == "rect" {
        BeampatternSpec::rectangular(0.0, 5.0)
    } else {
        BeampatternSpec::array_matched(0.0, config.n_tx, config.antenna_spacing)
    };
    let knobs = SolverKnobs::default();
    let mut channel_rng = rng::stream(1, "channel", &[0]);
    let estimate = sample_channel_estimate(&config, &mut channel_rng);

    let t0 = Instant::now();
    match run_with(&config, &estimate, &spec, &knobs) {
        Ok(sol) => {
            let dev = sol.precoder.max_row_power_deviation(config.power_total);
            let (cf, pf) = sol.precoder.power_split();
            println!(
                "lambda={lambda:.1e} mode={mode} pattern={pattern} csit={csit}: converged={} iters={} t={:?}",
                sol.converged, sol.iterations, t0.elapsed()
            );
            println!(
                "  row-power dev={dev:.2e} common_frac={cf:.3} private_fracs={pf:?} scale={:.2}",
                sol.pattern_scale
            );
            if let Some(last) = sol.history.last() {
                println!(
                    "  last: r={:.3e} q={:.3e} awsr_surr={:.4} bse={:.4e}",
                    last.primal_residual, last.dual_residual, last.awsr_surrogate, last.bse
                );
            }
            for rec in &sol.history {
                println!(
                    "    it {}: r={:.2e} q={:.2e} awsr={:.3} bse={:.3e}",
                    rec.iteration, rec.primal_residual, rec.dual_residual, rec.awsr_surrogate, rec.bse
                );
            }
        }
        Err(e) => println!("FAILED: {e}"),
    }
}
