use nalgebra::{Complex, DMatrix, DVector};
use radcom::awsr::{ao_solve, build_precoder_subproblem, mmse_step, VUpdateProblem};
use radcom::config::{CsitMode, SolverKnobs, SystemConfig};
use radcom::model::{
    sample_channel_estimate, sample_saa_batch, steering_vector, CommonRateShares, Precoder,
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
    let fractions = [0.9, 0.05, 0.05];
    let mut m = DMatrix::zeros(config.n_tx, 3);
    for (j, &fr) in fractions.iter().enumerate() {
        let scale = (fr * config.power_total / config.n_tx as f64).sqrt();
        m.column_mut(j).copy_from(&(&a0 * Complex::new(scale, 0.0)));
    }
    let p = Precoder::new(m);
    let prox_center: DVector<Complex<f64>> = p.to_stacked();
    let problem = VUpdateProblem {
        prox_center,
        prox_weight: config.admm_penalty,
        batch: &batch,
        config: &config,
    };
    let knobs = SolverKnobs::default();
    // single conic step diagnostics
    let state = mmse_step(&p, &batch, config.access_mode);
    for k in 0..2 {
        let c = &state.common.as_ref().unwrap()[k][0];
        println!(
            "user {k}: common mmse={:.4} weight={:.2} rate={:.4}; private mmse={:.4} rate={:.4}",
            c.mmse,
            c.weight,
            -c.mmse.log2(),
            state.private[k][0].mmse,
            -state.private[k][0].mmse.log2()
        );
    }
    let built = build_precoder_subproblem(&state, &problem).unwrap();
    let sol = conic::solve(&built.conic, 1e-8).unwrap();
    println!("conic status {:?} obj {:.4}", sol.status, sol.objective_value);
    // evaluate the surrogate objective at the init point for comparison
    let j0 = radcom::awsr::surrogate_objective(&p, &CommonRateShares::zeros(2), &problem);
    println!("J(init, shares=0) = {j0:.4}");
    let shares_full = CommonRateShares::new(vec![1.5, 1.5]).unwrap();
    let j1 = radcom::awsr::surrogate_objective(&p, &shares_full, &problem);
    println!("J(init, shares=1.5 each) = {j1:.4}");
    let outcome = ao_solve(&problem, &p, &CommonRateShares::zeros(2), &knobs).unwrap();
    println!(
        "ao: shares={:?} awsr={:.4} trace_len={}",
        outcome.shares.as_slice(),
        outcome.awsr_surrogate,
        outcome.objective_trace.len()
    );
}
