use conic::{solve, CompressedQuadratic, LinExpr, ProblemBuilder};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn main() {
    let mut rng = StdRng::seed_from_u64(3);
    // v-update-like: 24 free vars, 5 SOC constraints of rank ~24, 2 nonneg
    {
        let n = 24;
        let t0 = Instant::now();
        let mut iters = 0;
        let reps = 20;
        for _ in 0..reps {
            let mut pb = ProblemBuilder::new();
            let x = pb.free_block(n);
            let vars: Vec<usize> = x.indices().collect();
            let shares = pb.nonneg_block(2);
            let mut quads = Vec::new();
            for _ in 0..5 {
                let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0_f64));
                let q = &g * g.transpose() + DMatrix::identity(n, n) * 0.5;
                let w = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let b = &q * w;
                quads.push(CompressedQuadratic::from_form(&q, &b, 3.0).unwrap());
            }
            let t = pb.quad_epigraph(&quads[0], &vars).unwrap();
            pb.add_objective_term(t, 1.0);
            pb.add_objective_term(shares.index(0), -0.5);
            pb.add_objective_term(shares.index(1), -0.5);
            for quad in &quads[1..] {
                pb.quad_upper_bound(
                    quad,
                    &vars,
                    LinExpr::constant(40.0).term(shares.index(0), -1.0),
                )
                .unwrap();
            }
            let sol = solve(&pb.build(), 1e-8).unwrap();
            iters += sol.iterations;
        }
        println!(
            "v-like: {:?} per solve, avg iters {}",
            t0.elapsed() / reps,
            iters / reps as usize
        );
    }
    // u-update-like: PSD side 26 + small SOC
    {
        let side = 26usize;
        let t0 = Instant::now();
        let reps = 10;
        let mut iters = 0;
        for _ in 0..reps {
            let mut pb = ProblemBuilder::new();
            let xb = pb.psd_block(side);
            // linear objective = random PSD-ish direction
            let g = DMatrix::from_fn(side, side, |_, _| rng.random_range(-0.3..0.3_f64));
            let gs = (&g + g.transpose()) * 0.5 + DMatrix::identity(side, side);
            let cvec = conic::svec_from_mat(&gs);
            for (k, idx) in xb.indices().enumerate() {
                pb.add_objective_term(idx, cvec[k]);
            }
            // trace = 10 plus 4 random linear rows
            let id = conic::svec_from_mat(&DMatrix::identity(side, side));
            let mut row = LinExpr::default();
            for (k, idx) in xb.indices().enumerate() {
                if id[k] != 0.0 {
                    row = row.term(idx, id[k]);
                }
            }
            pb.eq_row(row, 10.0);
            for _ in 0..4 {
                let r = DMatrix::from_fn(side, side, |_, _| rng.random_range(-0.2..0.2_f64));
                let rs = (&r + r.transpose()) * 0.5;
                let rv = conic::svec_from_mat(&rs);
                let mut row = LinExpr::default();
                for (k, idx) in xb.indices().enumerate() {
                    row = row.term(idx, rv[k]);
                }
                pb.eq_row(row, rng.random_range(0.5..1.5));
            }
            let sol = solve(&pb.build(), 1e-8).unwrap();
            iters += sol.iterations;
        }
        println!(
            "u-like: {:?} per solve, avg iters {}",
            t0.elapsed() / reps,
            iters / reps as usize
        );
    }
}
