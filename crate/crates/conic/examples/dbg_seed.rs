use conic::selftest::known_optimum_instance;
use conic::solve;

fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let inst = known_optimum_instance(seed);
    println!("kind={} n={} m={}", inst.kind, inst.problem.n_vars(), inst.problem.n_rows());
    match solve(&inst.problem, 1e-8) {
        Ok(s) => println!(
            "status {:?} iters {} obj {} expect {} kkt ({:.2e},{:.2e},{:.2e})",
            s.status, s.iterations, s.objective_value, inst.optimal_value,
            s.kkt_residuals.primal, s.kkt_residuals.dual, s.kkt_residuals.gap
        ),
        Err(e) => println!("error: {e}"),
    }
}
