use conic::{
    solve, Cone, ConicProblem, LinExpr, ProblemBuilder, SolveStatus,
};
use nalgebra::{DMatrix, DVector};

fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

#[test]
fn min_x_subject_to_x_at_least_one() {
    // min x st x >= 1, via slack s = x - 1 in the nonnegative cone.
    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(1);
    let s = pb.nonneg_block(1);
    pb.add_objective_term(x.start, 1.0);
    pb.eq_row(LinExpr::var(s.start).term(x.start, -1.0), -1.0);
    let problem = pb.build();
    let sol = solve(&problem, 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_close(sol.x_star[x.start], 1.0, 1e-6);
    assert_close(sol.objective_value, 1.0, 1e-6);
}

#[test]
fn trace_constrained_min_eigenvalue_sdp() {
    // min tr(C X) st tr(X) = 1, X >= 0  has optimum lambda_min(C),
    // attained at the outer product of the minimal eigenvector.
    let c_mat = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 1.5, 0.5, 0.0, 0.5, 3.0]);
    let eig = c_mat.clone().symmetric_eigen();
    let lam_min = eig.eigenvalues.min();
    let min_idx = (0..3usize)
        .min_by(|&i, &j| f64::total_cmp(&eig.eigenvalues[i], &eig.eigenvalues[j]))
        .unwrap();
    let v = eig.eigenvectors.column(min_idx).into_owned();

    let mut pb = ProblemBuilder::new();
    let xb = pb.psd_block(3);
    let c_svec = conic::svec_from_mat(&c_mat);
    for (k, idx) in xb.indices().enumerate() {
        pb.add_objective_term(idx, c_svec[k]);
    }
    let id_svec = conic::svec_from_mat(&DMatrix::identity(3, 3));
    let mut expr = LinExpr::default();
    for (k, idx) in xb.indices().enumerate() {
        if id_svec[k] != 0.0 {
            expr = expr.term(idx, id_svec[k]);
        }
    }
    pb.eq_row(expr, 1.0);
    let problem = pb.build();
    let sol = solve(&problem, 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_close(sol.objective_value, lam_min, 1e-6);

    let x = conic::mat_from_svec(&sol.x_star.rows(xb.start, xb.dim).into_owned(), 3);
    let vv = &v * v.transpose();
    assert!((x - vv).norm() < 1e-4);
}

#[test]
fn projection_socp_has_analytic_solution() {
    // min t st ||x - x0|| <= t, A x = b: distance from the affine set.
    let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
    let b = DVector::from_column_slice(&[3.0]);
    let x0 = DVector::from_column_slice(&[2.0, -1.0, 0.5]);
    // analytic projection of x0 on {1'x = 3}
    let shift = (3.0 - x0.sum()) / 3.0;
    let proj = DVector::from_fn(3, |i, _| x0[i] + shift);
    let dist = (&proj - &x0).norm();

    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(3);
    let soc = pb.soc_block(4);
    pb.add_objective_term(soc.start, 1.0);
    for i in 0..3 {
        pb.eq_row(
            LinExpr::var(soc.index(1 + i)).term(x.index(i), -1.0),
            -x0[i],
        );
    }
    let mut row = LinExpr::default();
    for i in 0..3 {
        row = row.term(x.index(i), a[(0, i)]);
    }
    pb.eq_row(row, b[0]);
    let problem = pb.build();
    let sol = solve(&problem, 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_close(sol.objective_value, dist, 1e-6);
    for i in 0..3 {
        assert_close(sol.x_star[x.index(i)], proj[i], 1e-5);
    }
}

#[test]
fn detects_primal_infeasibility() {
    // x >= 1 and x <= 0 simultaneously.
    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(1);
    let s1 = pb.nonneg_block(1);
    let s2 = pb.nonneg_block(1);
    pb.add_objective_term(x.start, 1.0);
    pb.eq_row(LinExpr::var(s1.start).term(x.start, -1.0), -1.0); // s1 = x - 1
    pb.eq_row(LinExpr::var(s2.start).term(x.start, 1.0), 0.0); // s2 = -x
    let sol = solve(&pb.build(), 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn detects_unboundedness() {
    // min -x st x >= 0
    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(1);
    let s = pb.nonneg_block(1);
    pb.add_objective_term(x.start, -1.0);
    pb.eq_row(LinExpr::var(s.start).term(x.start, -1.0), 0.0);
    let sol = solve(&pb.build(), 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Unbounded);
}

#[test]
fn inconsistent_dependent_rows_are_infeasible() {
    let problem = ConicProblem {
        objective: DVector::from_column_slice(&[1.0, 1.0]),
        objective_offset: 0.0,
        equality_lhs: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]),
        equality_rhs: DVector::from_column_slice(&[1.0, 3.0]),
        cones: vec![Cone::Nonneg { dim: 2 }],
        };
    let sol = solve(&problem, 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
}

#[test]
fn zero_cone_variables_are_pinned() {
    // min x1 + x2 st x1 + x2 + x3 = 2, x3 in zero cone, x1, x2 >= 0
    let mut pb = ProblemBuilder::new();
    let xs = pb.nonneg_block(2);
    let z = pb.zero_block(1).start;
    pb.add_objective_term(xs.index(0), 1.0);
    pb.add_objective_term(xs.index(1), 1.0);
    pb.eq_row(
        LinExpr::var(xs.index(0))
            .term(xs.index(1), 1.0)
            .term(z, 1.0),
        2.0,
    );
    let sol = solve(&pb.build(), 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_close(sol.x_star[z], 0.0, 1e-12);
    assert_close(sol.objective_value, 2.0, 1e-6);
}

#[test]
fn row_permutation_leaves_objective_unchanged() {
    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(2);
    let s = pb.nonneg_block(2);
    pb.add_objective_term(x.index(0), 1.0);
    pb.add_objective_term(x.index(1), 2.0);
    pb.eq_row(LinExpr::var(s.index(0)).term(x.index(0), -1.0), -1.0);
    pb.eq_row(LinExpr::var(s.index(1)).term(x.index(1), -1.0), -2.0);
    let p1 = pb.build();
    let mut p2 = p1.clone();
    // swap the two rows
    p2.equality_lhs = DMatrix::from_fn(2, p1.equality_lhs.ncols(), |i, j| {
        p1.equality_lhs[(1 - i, j)]
    });
    p2.equality_rhs = DVector::from_column_slice(&[p1.equality_rhs[1], p1.equality_rhs[0]]);
    let s1 = solve(&p1, 1e-8).unwrap();
    let s2 = solve(&p2, 1e-8).unwrap();
    assert_close(s1.objective_value, s2.objective_value, 1e-7);
}

#[test]
fn weak_duality_at_solution() {
    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(2);
    let s = pb.nonneg_block(2);
    pb.add_objective_term(x.index(0), 3.0);
    pb.add_objective_term(x.index(1), 1.0);
    pb.eq_row(LinExpr::var(s.index(0)).term(x.index(0), -1.0), -0.5);
    pb.eq_row(
        LinExpr::var(s.index(1))
            .term(x.index(0), -1.0)
            .term(x.index(1), -1.0),
        -1.0,
    );
    let p = pb.build();
    let sol = solve(&p, 1e-8).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let primal = p.objective.dot(&sol.x_star);
    let dual = p.equality_rhs.dot(&sol.y_star);
    assert!(primal >= dual - 1e-8, "weak duality violated: {primal} < {dual}");
}

#[test]
fn debug_json_roundtrips() {
    let mut pb = ProblemBuilder::new();
    let x = pb.free_block(1);
    let s = pb.nonneg_block(1);
    pb.add_objective_term(x.start, 1.0);
    pb.eq_row(LinExpr::var(s.start).term(x.start, -1.0), -1.0);
    let p = pb.build();
    let json = p.to_debug_json();
    let back: ConicProblem = serde_json::from_str(&json).unwrap();
    assert_eq!(back.cones, p.cones);
    assert_eq!(back.equality_lhs, p.equality_lhs);
}
