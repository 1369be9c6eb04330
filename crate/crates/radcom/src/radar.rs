//! Radar-side update: beampattern squared-error minimization with exact
//! per-antenna power and a proximal anchor.
//!
//! The quartic beampattern term is lifted to a Hermitian matrix coupled to
//! the stacked precoder by a Schur-complement relaxation; the lifted
//! per-antenna power constraint fixes the trace, so the relaxation and
//! the original problem agree exactly on the proximal part and the
//! relaxation gap lives in the beampattern term alone. The pattern scale
//! enters the objective affinely and is re-optimized in closed form
//! between conic rounds, which converges to the joint optimum because the
//! problem is jointly convex in (lifted matrix, scale). An independent
//! projected-gradient solver over the product of row spheres serves as
//! the verification oracle.

use nalgebra::{Complex, DMatrix, DVector};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use conic::{
    embed_hermitian, hermitian_from_embedding, solve_with, CompressedQuadratic, ConicError,
    LinExpr, ProblemBuilder, SolveStatus, SolverOptions,
};
use rand::Rng;

use crate::awsr::active_columns;
use crate::config::{SolverKnobs, SystemConfig};
use crate::model::{steering_vector, BeampatternSpec, Precoder};

/// One radar subproblem instance.
#[derive(Debug, Clone)]
pub struct UUpdateProblem<'a> {
    /// Full-length stacked anchor, `n_tx * (K+1)` entries (communication
    /// precoder block plus the scaled dual).
    pub prox_center: DVector<Complex<f64>>,
    pub prox_weight: f64,
    pub spec: &'a BeampatternSpec,
    pub reg_lambda: f64,
    pub config: &'a SystemConfig,
}

#[derive(Debug, Error)]
pub enum RadarError {
    #[error("desired pattern is identically zero")]
    ZeroDesired,
    #[error("conic solve failed: {0}")]
    Conic(#[from] ConicError),
    #[error("conic solve unusable: status {status:?}, kkt residual {residual:.3e}")]
    LowAccuracy { status: SolveStatus, residual: f64 },
    #[error("lifting failed: {0}")]
    Lift(String),
}

/// Relaxation output: the lifted Hermitian matrix, the linear block coupled
/// to it by the Schur relaxation, the pattern scale and the relaxed
/// objective value (a lower bound on the original subproblem).
#[derive(Debug, Clone)]
pub struct LiftedSolution {
    pub u_mat: DMatrix<Complex<f64>>,
    pub u_lin: DVector<Complex<f64>>,
    pub alpha: f64,
    pub sdr_objective: f64,
}

/// Least-squares optimal scale of the desired pattern against measured
/// gains, clamped positive.
pub fn optimal_pattern_scale(gains: &[f64], desired: &[f64]) -> Result<f64, RadarError> {
    let denom: f64 = desired.iter().map(|&d| d * d).sum();
    if denom <= 0.0 {
        return Err(RadarError::ZeroDesired);
    }
    let num: f64 = gains.iter().zip(desired).map(|(&g, &d)| g * d).sum();
    Ok((num / denom).max(1e-9))
}

struct RadarGeometry {
    n_tx: usize,
    n_active: usize,
    /// Stacked active dimension.
    na: usize,
    /// Complex Schur side (na + 1).
    side: usize,
    spacing: f64,
    /// Active anchor (length na).
    anchor: DVector<Complex<f64>>,
    /// Columns of the full precoder that are active.
    active: Vec<usize>,
}

impl RadarGeometry {
    fn new(problem: &UUpdateProblem<'_>) -> Self {
        let config = problem.config;
        let active = active_columns(config);
        let n_tx = config.n_tx;
        let na = n_tx * active.len();
        let mut anchor = DVector::zeros(na);
        for (a, &col) in active.iter().enumerate() {
            for i in 0..n_tx {
                anchor[a * n_tx + i] = problem.prox_center[col * n_tx + i];
            }
        }
        RadarGeometry {
            n_tx,
            n_active: active.len(),
            na,
            side: na + 1,
            spacing: config.antenna_spacing,
            anchor,
            active,
        }
    }

    /// Expands the active stack into the full stacked layout with zeros in
    /// the inactive (SDMA common) block.
    fn expand(&self, u: &DVector<Complex<f64>>, n_streams: usize) -> DVector<Complex<f64>> {
        let mut full = DVector::zeros(self.n_tx * n_streams);
        for (a, &col) in self.active.iter().enumerate() {
            for i in 0..self.n_tx {
                full[col * self.n_tx + i] = u[a * self.n_tx + i];
            }
        }
        full
    }

    /// Gains of the summed diagonal blocks of a lifted matrix.
    fn gains_of_lifted(&self, u_mat: &DMatrix<Complex<f64>>, angles: &[f64]) -> Vec<f64> {
        // block-summed covariance
        let mut cov = DMatrix::<Complex<f64>>::zeros(self.n_tx, self.n_tx);
        for k in 0..self.n_active {
            for i in 0..self.n_tx {
                for j in 0..self.n_tx {
                    cov[(i, j)] += u_mat[(k * self.n_tx + i, k * self.n_tx + j)];
                }
            }
        }
        angles
            .iter()
            .map(|&th| {
                let a = steering_vector(th, self.n_tx, self.spacing);
                (a.adjoint() * &cov * &a)[(0, 0)].re
            })
            .collect()
    }

    fn gains_of_stack(&self, u: &DVector<Complex<f64>>, angles: &[f64]) -> Vec<f64> {
        angles
            .iter()
            .map(|&th| {
                let a = steering_vector(th, self.n_tx, self.spacing);
                (0..self.n_active)
                    .map(|k| {
                        let mut ip = Complex::new(0.0, 0.0);
                        for i in 0..self.n_tx {
                            ip += a[i].conj() * u[k * self.n_tx + i];
                        }
                        ip.norm_sqr()
                    })
                    .sum()
            })
            .collect()
    }

    /// Row-rescales the reshaped stack to the exact per-antenna power.
    fn project_stack(&self, u: &DVector<Complex<f64>>, power_total: f64) -> DVector<Complex<f64>> {
        let m = DMatrix::from_iterator(self.n_tx, self.n_active, u.iter().copied());
        let projected = Precoder::new(m).project_rows(power_total);
        DVector::from_iterator(self.na, projected.matrix().iter().copied())
    }

    /// Original (unlifted) objective at a feasible stack, with the scale
    /// re-optimized in closed form.
    fn original_objective(
        &self,
        u: &DVector<Complex<f64>>,
        problem: &UUpdateProblem<'_>,
    ) -> (f64, f64) {
        let gains = self.gains_of_stack(u, &problem.spec.angles);
        let alpha = optimal_pattern_scale(&gains, &problem.spec.desired)
            .expect("validated spec has a nonzero desired pattern");
        let bse: f64 = gains
            .iter()
            .zip(&problem.spec.desired)
            .map(|(&g, &d)| (alpha * d - g).powi(2))
            .sum();
        let prox = 0.5 * problem.prox_weight * (&self.anchor - u).norm_squared();
        (problem.reg_lambda * bse + prox, alpha)
    }
}

/// Hermitian matrix `G` with `trace(G S) = Re sum_t c_t S[i_t, j_t]`.
fn herm_functional(side: usize, terms: &[(usize, usize, Complex<f64>)]) -> DMatrix<Complex<f64>> {
    let mut w = DMatrix::<Complex<f64>>::zeros(side, side);
    for &(i, j, c) in terms {
        w[(j, i)] += c;
    }
    (&w + w.adjoint()) * Complex::new(0.5, 0.0)
}

/// Coefficient row over the svec of the real embedding realizing the same
/// functional on embedded matrices.
fn functional_row(g: &DMatrix<Complex<f64>>) -> DVector<f64> {
    let emb = embed_hermitian(g).expect("functional matrices are Hermitian");
    conic::svec_from_mat(&(emb * 0.5))
}

/// Toeplitz-sum functionals of the block-summed covariance: the gains over
/// the whole grid factor through these `2 n_tx - 1` real numbers.
fn phi_functionals(geom: &RadarGeometry) -> Vec<DMatrix<Complex<f64>>> {
    let mut out = Vec::with_capacity(2 * geom.n_tx - 1);
    let mut diag_terms = Vec::new();
    for k in 0..geom.n_active {
        for n in 0..geom.n_tx {
            diag_terms.push((k * geom.n_tx + n, k * geom.n_tx + n, Complex::new(1.0, 0.0)));
        }
    }
    out.push(herm_functional(geom.side, &diag_terms));
    for d in 1..geom.n_tx {
        for part in 0..2 {
            let coef = if part == 0 {
                Complex::new(1.0, 0.0)
            } else {
                // Im z = Re(-i z)
                Complex::new(0.0, -1.0)
            };
            let mut terms = Vec::new();
            for k in 0..geom.n_active {
                for n in 0..geom.n_tx - d {
                    terms.push((k * geom.n_tx + n, k * geom.n_tx + n + d, coef));
                }
            }
            out.push(herm_functional(geom.side, &terms));
        }
    }
    out
}

/// Grid row `v_m` with `gain_m = v_m . phi`.
fn phi_grid_rows(geom: &RadarGeometry, angles: &[f64]) -> Vec<DVector<f64>> {
    let d_phi = 2.0 * std::f64::consts::PI * geom.spacing;
    angles
        .iter()
        .map(|&th| {
            let base = d_phi * th.sin();
            let mut v = DVector::zeros(2 * geom.n_tx - 1);
            v[0] = 1.0;
            for d in 1..geom.n_tx {
                v[2 * d - 1] = 2.0 * (base * d as f64).cos();
                v[2 * d] = -2.0 * (base * d as f64).sin();
            }
            v
        })
        .collect()
}

/// Solves the lifted relaxation, alternating the closed-form scale update
/// with conic solves until the scale is stationary.
pub fn solve_sdr(problem: &UUpdateProblem<'_>, knobs: &SolverKnobs) -> Result<LiftedSolution, RadarError> {
    let geom = RadarGeometry::new(problem);
    let config = problem.config;
    let spec = problem.spec;
    let phi_mats = phi_functionals(&geom);
    let phi_rows: Vec<DVector<f64>> = phi_mats.iter().map(functional_row).collect();
    let grid_rows = phi_grid_rows(&geom, &spec.angles);
    let d_phi = phi_mats.len();

    // Gram of the beampattern quadratic over phi (fixed across rounds).
    // Kept at unit scale; the regularization weight lands on the epigraph
    // objective coefficient so the cone geometry stays well conditioned
    // across the whole lambda range.
    let mut gram = DMatrix::zeros(d_phi, d_phi);
    for v in &grid_rows {
        gram += v * v.transpose();
    }

    // objective linear part: (rho/2) trace(U) - rho Re<anchor, u>
    let mut obj_terms: Vec<(usize, usize, Complex<f64>)> = Vec::new();
    for i in 0..geom.na {
        obj_terms.push((i, i, Complex::new(0.5 * problem.prox_weight, 0.0)));
        let c = problem.prox_weight * geom.anchor[i].conj();
        obj_terms.push((i, geom.na, -c));
    }
    let obj_row = functional_row(&herm_functional(geom.side, &obj_terms));
    let obj_offset = 0.5 * problem.prox_weight * geom.anchor.norm_squared();

    // power rows, corner row
    let mut fixed_rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for n in 0..geom.n_tx {
        let terms: Vec<_> = (0..geom.n_active)
            .map(|k| (k * geom.n_tx + n, k * geom.n_tx + n, Complex::new(1.0, 0.0)))
            .collect();
        fixed_rows.push((
            functional_row(&herm_functional(geom.side, &terms)),
            config.per_antenna_power(),
        ));
    }
    fixed_rows.push((
        functional_row(&herm_functional(
            geom.side,
            &[(geom.na, geom.na, Complex::new(1.0, 0.0))],
        )),
        1.0,
    ));

    // scale initialization from the projected anchor
    let anchor_proj = geom.project_stack(&geom.anchor, config.power_total);
    let mut alpha = optimal_pattern_scale(
        &geom.gains_of_stack(&anchor_proj, &spec.angles),
        &spec.desired,
    )?;

    let options = SolverOptions {
        tolerance: knobs.conic_tolerance,
        max_iters: knobs.conic_max_iters,
        ..Default::default()
    };

    let mut best: Option<LiftedSolution> = None;
    for _ in 0..knobs.scale_alternation_max_rounds {
        // beampattern quadratic over phi for the current alpha, normalized
        // to order one; the epigraph objective coefficient restores
        // lambda and the normalization.
        let mut lin = DVector::zeros(d_phi);
        let mut cst = 0.0;
        for (v, &d) in grid_rows.iter().zip(&spec.desired) {
            lin += v * (alpha * d);
            cst += (alpha * d) * (alpha * d);
        }
        let scale2 = cst.max(1.0);
        let quad = CompressedQuadratic::from_form(&(&gram / scale2), &(&lin / scale2), cst / scale2)
            .map_err(|e| RadarError::Lift(e.to_string()))?;

        let mut pb = ProblemBuilder::new();
        let psd = pb.psd_block(2 * geom.side);
        let phi = pb.free_block(d_phi);
        for (k, idx) in psd.indices().enumerate() {
            if obj_row[k] != 0.0 {
                pb.add_objective_term(idx, obj_row[k]);
            }
        }
        pb.add_objective_offset(obj_offset);
        // phi linking rows
        for (fi, row) in phi_rows.iter().enumerate() {
            let mut expr = LinExpr::var(phi.index(fi));
            for (k, idx) in psd.indices().enumerate() {
                if row[k] != 0.0 {
                    expr = expr.term(idx, -row[k]);
                }
            }
            pb.eq_row(expr, 0.0);
        }
        for (row, rhs) in &fixed_rows {
            let mut expr = LinExpr::default();
            for (k, idx) in psd.indices().enumerate() {
                if row[k] != 0.0 {
                    expr = expr.term(idx, row[k]);
                }
            }
            pb.eq_row(expr, *rhs);
        }
        let phi_vars: Vec<usize> = phi.indices().collect();
        let t = pb
            .quad_epigraph(&quad, &phi_vars)
            .map_err(|e| RadarError::Lift(e.to_string()))?;
        pb.add_objective_term(t, problem.reg_lambda * scale2);

        let sol = solve_with(&pb.build(), &options)?;
        match sol.status {
            SolveStatus::Optimal => {}
            status => {
                let residual = sol.kkt_residuals.max();
                if residual > knobs.conic_accept_residual {
                    return Err(RadarError::LowAccuracy { status, residual });
                }
            }
        }

        let x = sol.x_star.rows(psd.start, psd.dim).into_owned();
        let emb = conic::mat_from_svec(&x, 2 * geom.side);
        let schur = hermitian_from_embedding(&emb);
        let u_mat = schur.view((0, 0), (geom.na, geom.na)).into_owned();
        let u_mat = (&u_mat + u_mat.adjoint()) * Complex::new(0.5, 0.0);
        let u_lin = schur.view((0, geom.na), (geom.na, 1)).column(0).into_owned();

        let gains = geom.gains_of_lifted(&u_mat, &spec.angles);
        let alpha_new = optimal_pattern_scale(&gains, &spec.desired)?;
        let trace_u: f64 = (0..geom.na).map(|i| u_mat[(i, i)].re).sum();
        let bse_lifted: f64 = gains
            .iter()
            .zip(&spec.desired)
            .map(|(&g, &d)| (alpha_new * d - g).powi(2))
            .sum();
        let prox_lifted = 0.5
            * problem.prox_weight
            * (geom.anchor.norm_squared()
                - 2.0 * geom.anchor.iter().zip(u_lin.iter()).map(|(a, u)| (a.conj() * u).re).sum::<f64>()
                + trace_u);
        let objective = problem.reg_lambda * bse_lifted + prox_lifted;

        let stale = (alpha_new - alpha).abs() <= knobs.scale_alternation_tol * alpha.abs().max(1.0);
        alpha = alpha_new;
        let sol = LiftedSolution {
            u_mat,
            u_lin,
            alpha,
            sdr_objective: objective,
        };
        let improved = best
            .as_ref()
            .map(|b| sol.sdr_objective < b.sdr_objective)
            .unwrap_or(true);
        if improved {
            best = Some(sol);
        }
        if stale {
            break;
        }
    }
    best.ok_or_else(|| RadarError::Lift("no alternation round completed".into()))
}

/// Rank-one recovery result in the full stacked layout.
#[derive(Debug, Clone)]
pub struct RecoveredPrecoder {
    pub stacked: DVector<Complex<f64>>,
    pub pattern_scale: f64,
    pub objective: f64,
}

/// Extracts a feasible stacked precoder from the lifted solution: the
/// principal eigenvector when the lifted matrix is numerically rank one,
/// otherwise the best of Gaussian randomization draws with the projected
/// linear block always among the candidates. Every candidate is projected
/// to the exact per-antenna power; ties keep the earliest candidate.
pub fn recover_rank1(
    lifted: &LiftedSolution,
    problem: &UUpdateProblem<'_>,
    rng: &mut ChaCha12Rng,
    knobs: &SolverKnobs,
) -> RecoveredPrecoder {
    let geom = RadarGeometry::new(problem);
    let config = problem.config;
    let pt = config.power_total;

    // spectrum via the real embedding (eigenvalues appear doubled)
    let emb = embed_hermitian(&lifted.u_mat).expect("lifted matrix is Hermitian");
    let eig = emb.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| f64::total_cmp(&eig.eigenvalues[b], &eig.eigenvalues[a]));
    let lam1 = eig.eigenvalues[order[0]].max(0.0);
    // skip the duplicated copy of the principal eigenvalue
    let lam2 = if geom.na == 1 {
        0.0
    } else {
        eig.eigenvalues[order[2]].max(0.0)
    };
    let principal = {
        let x = eig.eigenvectors.column(order[0]);
        let mut v = DVector::zeros(geom.na);
        for i in 0..geom.na {
            v[i] = Complex::new(x[i], x[geom.na + i]);
        }
        let n = v.norm();
        if n > 1e-300 {
            v /= Complex::new(n, 0.0);
        }
        v
    };

    let evaluate = |u: &DVector<Complex<f64>>| geom.original_objective(u, problem);

    if lam1 > 0.0 && lam2 / lam1 <= knobs.rank1_ratio_threshold {
        let mut u = &principal * Complex::new(lam1.sqrt(), 0.0);
        let inner = principal.dotc(&lifted.u_lin);
        if inner.norm() > 1e-12 {
            u *= inner / inner.norm();
        }
        let u = geom.project_stack(&u, pt);
        let (objective, pattern_scale) = evaluate(&u);
        return RecoveredPrecoder {
            stacked: geom.expand(&u, config.n_streams()),
            pattern_scale,
            objective,
        };
    }

    // Gaussian randomization around the lifted covariance
    let sqrt_emb = {
        let mut s = DMatrix::zeros(2 * geom.na, 2 * geom.na);
        for &i in &order {
            let lam = eig.eigenvalues[i].max(0.0);
            if lam > 0.0 {
                let v = eig.eigenvectors.column(i);
                s += v * v.transpose() * lam.sqrt();
            }
        }
        s
    };
    let mut best: Option<(DVector<Complex<f64>>, f64, f64)> = None;
    let consider = |u: &DVector<Complex<f64>>, best: &mut Option<(DVector<Complex<f64>>, f64, f64)>| {
        let u = geom.project_stack(u, pt);
        let (obj, alpha) = evaluate(&u);
        if best.as_ref().map(|(_, b, _)| obj < *b).unwrap_or(true) {
            *best = Some((u, obj, alpha));
        }
    };
    consider(&lifted.u_lin, &mut best);
    for _ in 0..knobs.randomization_draws {
        let mut xi = DVector::zeros(2 * geom.na);
        for i in 0..2 * geom.na {
            let g: f64 = rng.sample(StandardNormal);
            xi[i] = g / std::f64::consts::SQRT_2;
        }
        let y = &sqrt_emb * &xi;
        let mut u = DVector::zeros(geom.na);
        for i in 0..geom.na {
            u[i] = Complex::new(y[i], y[geom.na + i]);
        }
        consider(&u, &mut best);
    }
    let (u, objective, pattern_scale) = best.expect("at least one candidate");
    RecoveredPrecoder {
        stacked: geom.expand(&u, config.n_streams()),
        pattern_scale,
        objective,
    }
}

/// One projected-gradient descent from a feasible starting stack; returns
/// the final stack and objective.
fn pg_descent(
    problem: &UUpdateProblem<'_>,
    geom: &RadarGeometry,
    start: DVector<Complex<f64>>,
    knobs: &SolverKnobs,
) -> (DVector<Complex<f64>>, f64) {
    let spec = problem.spec;
    let pt = problem.config.power_total;
    let steering: Vec<DVector<Complex<f64>>> = spec
        .angles
        .iter()
        .map(|&th| steering_vector(th, geom.n_tx, geom.spacing))
        .collect();

    let objective = |u: &DVector<Complex<f64>>| geom.original_objective(u, problem).0;

    let gradient = |u: &DVector<Complex<f64>>| -> DVector<Complex<f64>> {
        let gains = geom.gains_of_stack(u, &spec.angles);
        let alpha = optimal_pattern_scale(&gains, &spec.desired)
            .expect("validated spec has a nonzero desired pattern");
        let mut grad = DVector::<Complex<f64>>::zeros(geom.na);
        for (m, a) in steering.iter().enumerate() {
            let w = 2.0 * problem.reg_lambda * (gains[m] - alpha * spec.desired[m]);
            if w == 0.0 {
                continue;
            }
            for k in 0..geom.n_active {
                let mut ip = Complex::new(0.0, 0.0);
                for i in 0..geom.n_tx {
                    ip += a[i].conj() * u[k * geom.n_tx + i];
                }
                for i in 0..geom.n_tx {
                    grad[k * geom.n_tx + i] += a[i] * (w * ip);
                }
            }
        }
        for i in 0..geom.na {
            grad[i] += (u[i] - geom.anchor[i]) * (0.5 * problem.prox_weight);
        }
        grad
    };

    // Spectral (Barzilai-Borwein) projected gradient with a nonmonotone
    // sufficient-decrease test; the beampattern curvature is orders of
    // magnitude stiffer than the within-family directions, so plain
    // fixed-step descent stalls far from stationarity.
    let mut u = geom.project_stack(&start, pt);
    let mut f = objective(&u);
    let mut g = gradient(&u);
    let mut best = (u.clone(), f);
    let mut step = {
        let gn = g.norm();
        if gn > 1e-300 {
            (0.1 * u.norm() / gn).clamp(1e-12, 1e6)
        } else {
            1.0
        }
    };
    let mut hist = std::collections::VecDeque::from(vec![f]);
    let mut failures = 0;
    for _ in 0..knobs.pg_max_iters {
        if g.norm_squared() < 1e-30 {
            break;
        }
        let trial = geom.project_stack(&(&u - &g * Complex::new(step, 0.0)), pt);
        let dir = &trial - &u;
        let dir_norm = dir.norm();
        if dir_norm < 1e-13 * (1.0 + u.norm()) {
            break;
        }
        let gd: f64 = g.iter().zip(dir.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let fmax = hist.iter().copied().fold(f64::MIN, f64::max);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = if t == 1.0 {
                trial.clone()
            } else {
                geom.project_stack(&(&u + &dir * Complex::new(t, 0.0)), pt)
            };
            let fc = objective(&cand);
            if fc <= fmax + 1e-4 * t * gd.min(0.0) {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((u_new, f_new)) = accepted else {
            step *= 0.1;
            failures += 1;
            if failures > 3 {
                break;
            }
            continue;
        };
        failures = 0;
        let g_new = gradient(&u_new);
        let s = &u_new - &u;
        let y = &g_new - &g;
        let sy: f64 = s.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        step = if sy > 1e-16 {
            (s.norm_squared() / sy).clamp(1e-12, 1e8)
        } else {
            (step * 2.0).min(1e8)
        };
        u = u_new;
        f = f_new;
        g = g_new;
        hist.push_back(f);
        if hist.len() > 8 {
            hist.pop_front();
        }
        if f < best.1 {
            best = (u.clone(), f);
        }
    }
    best
}

/// Projected gradient descent on the original nonconvex objective over the
/// product of row spheres, with the scale re-optimized in closed form each
/// iteration; independent verification route for the relaxation. Starts
/// from the projected anchor plus random restarts and keeps the best.
pub fn pg_oracle(
    problem: &UUpdateProblem<'_>,
    restarts: usize,
    rng: &mut ChaCha12Rng,
    knobs: &SolverKnobs,
) -> (DVector<Complex<f64>>, f64) {
    assert!(restarts >= 1);
    let geom = RadarGeometry::new(problem);
    let config = problem.config;
    let pt = config.power_total;
    let mut best: Option<(DVector<Complex<f64>>, f64)> = None;
    for restart in 0..restarts {
        let start = if restart == 0 {
            geom.project_stack(&geom.anchor, pt)
        } else {
            let mut g = DVector::zeros(geom.na);
            for i in 0..geom.na {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                g[i] = Complex::new(re, im);
            }
            geom.project_stack(&g, pt)
        };
        let (u, f) = pg_descent(problem, &geom, start, knobs);
        if best.as_ref().map(|(_, b)| f < *b).unwrap_or(true) {
            best = Some((u, f));
        }
    }
    let (u, f) = best.expect("at least one restart");
    (geom.expand(&u, config.n_streams()), f)
}

/// Descends the original objective from a given full-stack start (used by
/// the consensus loop to refine a recovered candidate to stationarity).
pub fn pg_polish(
    problem: &UUpdateProblem<'_>,
    start_full: &DVector<Complex<f64>>,
    knobs: &SolverKnobs,
) -> (DVector<Complex<f64>>, f64, f64) {
    let geom = RadarGeometry::new(problem);
    let mut active = DVector::zeros(geom.na);
    for (a, &col) in geom.active.iter().enumerate() {
        for i in 0..geom.n_tx {
            active[a * geom.n_tx + i] = start_full[col * geom.n_tx + i];
        }
    }
    let start = geom.project_stack(&active, problem.config.power_total);
    let (u, f) = pg_descent(problem, &geom, start, knobs);
    let (_, alpha) = geom.original_objective(&u, problem);
    (geom.expand(&u, problem.config.n_streams()), f, alpha)
}

/// Original objective of a full stacked precoder (helper for tests and the
/// consensus loop).
pub fn original_objective_full(
    problem: &UUpdateProblem<'_>,
    full_stack: &DVector<Complex<f64>>,
) -> (f64, f64) {
    let geom = RadarGeometry::new(problem);
    let mut active = DVector::zeros(geom.na);
    for (a, &col) in geom.active.iter().enumerate() {
        for i in 0..geom.n_tx {
            active[a * geom.n_tx + i] = full_stack[col * geom.n_tx + i];
        }
    }
    geom.original_objective(&active, problem)
}
