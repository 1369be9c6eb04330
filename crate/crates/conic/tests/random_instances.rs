use conic::selftest::known_optimum_instance;
use conic::{solve, LinExpr, ProblemBuilder, SolveStatus};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn generated_instances_recover_known_optima() {
    let mut failures = Vec::new();
    for seed in 0..120u64 {
        let inst = known_optimum_instance(seed);
        let sol = match solve(&inst.problem, 1e-7) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("seed {seed} ({}): {e}", inst.kind));
                continue;
            }
        };
        if sol.status != SolveStatus::Optimal {
            failures.push(format!("seed {seed} ({}): status {:?}", inst.kind, sol.status));
            continue;
        }
        let err = (sol.objective_value - inst.optimal_value).abs();
        if err > 1e-4 || sol.kkt_residuals.max() > 1e-6 {
            failures.push(format!(
                "seed {seed} ({}): obj err {err:.2e}, kkt {:.2e}",
                inst.kind,
                sol.kkt_residuals.max()
            ));
        }
    }
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}

/// Shrinking pattern search from the best random sample; independent of the
/// interior-point path. The ball-constrained quadratics are convex, so the
/// search converges to the global optimum.
fn pattern_search_ball_qp(
    q: &DMatrix<f64>,
    b: &DVector<f64>,
    radius: f64,
    rng: &mut StdRng,
) -> f64 {
    let n = b.len();
    let f = |x: &DVector<f64>| (x.transpose() * q * x)[(0, 0)] - 2.0 * b.dot(x);
    let project = |x: &DVector<f64>| {
        let nx = x.norm();
        if nx > radius {
            x * (radius / nx)
        } else {
            x.clone()
        }
    };
    let mut best = DVector::zeros(n);
    let mut best_val = f(&best);
    for _ in 0..400 {
        let cand = project(&DVector::from_fn(n, |_, _| rng.random_range(-radius..radius)));
        let v = f(&cand);
        if v < best_val {
            best_val = v;
            best = cand;
        }
    }
    let mut step = radius / 2.0;
    while step > 1e-9 {
        let mut improved = false;
        for i in 0..n {
            for dir in [-1.0, 1.0] {
                let mut cand = best.clone();
                cand[i] += dir * step;
                let cand = project(&cand);
                let v = f(&cand);
                if v < best_val - 1e-15 {
                    best_val = v;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best_val
}

#[test]
fn ball_constrained_qp_matches_pattern_search() {
    let mut rng = StdRng::seed_from_u64(7);
    for trial in 0..25 {
        let n = rng.random_range(2..=5);
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0_f64));
        let q = &g * g.transpose() + DMatrix::identity(n, n) * 0.1;
        let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let radius = rng.random_range(0.5..2.0);

        let quad = conic::CompressedQuadratic::from_form(&q, &b, 0.0).unwrap();
        let mut pb = ProblemBuilder::new();
        let x = pb.free_block(n);
        let ball = pb.soc_block(n + 1);
        pb.eq_row(LinExpr::var(ball.index(0)), radius);
        for i in 0..n {
            pb.eq_row(LinExpr::var(ball.index(1 + i)).term(x.index(i), -1.0), 0.0);
        }
        let vars: Vec<usize> = x.indices().collect();
        let t = pb.quad_epigraph(&quad, &vars).unwrap();
        pb.add_objective_term(t, 1.0);
        let sol = solve(&pb.build(), 1e-8).unwrap();
        assert!(
            sol.status == SolveStatus::Optimal || sol.kkt_residuals.max() <= 1e-7,
            "trial {trial}: {:?} kkt {:.2e}",
            sol.status,
            sol.kkt_residuals.max()
        );

        let oracle = pattern_search_ball_qp(&q, &b, radius, &mut rng);
        let scale = 1.0 + oracle.abs();
        assert!(
            (sol.objective_value - oracle).abs() <= 1e-4 * scale,
            "trial {trial}: conic {} vs search {}",
            sol.objective_value,
            oracle
        );
    }
}

#[test]
fn compressed_quadratic_evaluates_like_the_form() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let g = DMatrix::from_fn(n, rng.random_range(1..=n), |_, _| rng.random_range(-1.0..1.0_f64));
        let q = &g * g.transpose();
        // b in range(Q)
        let w = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let b = &q * w;
        let c = rng.random_range(-2.0..2.0);
        let quad = conic::CompressedQuadratic::from_form(&q, &b, c).unwrap();
        for _ in 0..5 {
            let x = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let direct = (x.transpose() * &q * &x)[(0, 0)] - 2.0 * b.dot(&x) + c;
            assert!((quad.eval(&x) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
        }
    }
}
