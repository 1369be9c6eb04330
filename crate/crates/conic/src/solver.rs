//! Homogeneous self-dual interior-point method with Nesterov-Todd scaling
//! and a Mehrotra predictor-corrector step.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::cones::BlockScaling;
use crate::presolve::presolve;
use crate::problem::{
    Cone, ConicProblem, ConicSolution, KktResiduals, ProblemError, SolveStatus,
};

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("invalid problem: {0}")]
    Invalid(#[from] ProblemError),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Optional starting point. Used only when strictly interior; otherwise the
/// solver falls back to the self-dual identity initialization.
#[derive(Debug, Clone)]
pub struct InitialPoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative tolerance on primal/dual feasibility and duality gap.
    pub tolerance: f64,
    pub max_iters: usize,
    pub initial: Option<InitialPoint>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-6,
            max_iters: 500,
            initial: None,
        }
    }
}

/// Solves the conic program to the given KKT tolerance.
pub fn solve(problem: &ConicProblem, tolerance: f64) -> Result<ConicSolution, ConicError> {
    solve_with(
        problem,
        &SolverOptions {
            tolerance,
            ..Default::default()
        },
    )
}

pub fn solve_with(
    problem: &ConicProblem,
    options: &SolverOptions,
) -> Result<ConicSolution, ConicError> {
    problem.validate()?;
    let pre = presolve(problem);
    if pre.inconsistent {
        return Ok(ConicSolution {
            x_star: DVector::zeros(problem.n_vars()),
            y_star: DVector::zeros(problem.n_rows()),
            status: SolveStatus::Infeasible,
            kkt_residuals: KktResiduals {
                primal: f64::INFINITY,
                dual: f64::INFINITY,
                gap: f64::INFINITY,
            },
            iterations: 0,
            objective_value: problem.objective_offset,
        });
    }

    // Restrict an initial point to the presolved variable set.
    let initial = options.initial.as_ref().and_then(|init| {
        if init.x.len() != problem.n_vars()
            || init.z.len() != problem.n_vars()
            || init.y.len() != problem.n_rows()
        {
            return None;
        }
        let x = DVector::from_iterator(pre.var_map.len(), pre.var_map.iter().map(|&j| init.x[j]));
        let z = DVector::from_iterator(pre.var_map.len(), pre.var_map.iter().map(|&j| init.z[j]));
        let y = DVector::from_iterator(
            pre.kept_rows.len(),
            pre.kept_rows.iter().map(|&i| init.y[i]),
        );
        Some(InitialPoint { x, y, z })
    });

    let inner = ipm(&pre.problem, options, initial)?;

    // Map back to the original variable/row spaces.
    let mut x_full = DVector::zeros(pre.n_original);
    for (red, &orig) in pre.var_map.iter().enumerate() {
        x_full[orig] = inner.x_star[red];
    }
    let mut y_full = DVector::zeros(problem.n_rows());
    for (red, &orig) in pre.kept_rows.iter().enumerate() {
        y_full[orig] = inner.y_star[red];
    }
    Ok(ConicSolution {
        x_star: x_full,
        y_star: y_full,
        objective_value: inner.objective_value + problem.objective_offset,
        ..inner
    })
}

struct BlockLayout {
    cone: Cone,
    /// Offset within the full variable vector.
    offset: usize,
    /// Offset within the cone-only (non-free) variable ordering, when
    /// the block is not free.
    cone_offset: Option<usize>,
}

fn fraction_to_boundary(alpha: f64) -> f64 {
    (0.99 * alpha).min(1.0)
}

fn ipm(
    p: &ConicProblem,
    options: &SolverOptions,
    initial: Option<InitialPoint>,
) -> Result<ConicSolution, ConicError> {
    let n = p.n_vars();
    let m = p.n_rows();
    let tol = options.tolerance;

    // Row equilibration; exact and transparent (y is mapped back below).
    let mut a = p.equality_lhs.clone();
    let mut b = p.equality_rhs.clone();
    let mut row_scale = DVector::from_element(m, 1.0);
    for i in 0..m {
        let s = a.row(i).amax().max(1e-12);
        row_scale[i] = s;
        let inv = 1.0 / s;
        a.row_mut(i).scale_mut(inv);
        b[i] *= inv;
    }
    let c = &p.objective;

    // Block layout and free/cone split.
    let mut layout = Vec::new();
    let mut free_idx = Vec::new();
    let mut cone_idx = Vec::new();
    let mut offset = 0;
    for cone in &p.cones {
        let dim = cone.dim();
        let cone_offset = if matches!(cone, Cone::Free { .. } | Cone::Zero { .. }) {
            free_idx.extend(offset..offset + dim);
            None
        } else {
            let co = cone_idx.len();
            cone_idx.extend(offset..offset + dim);
            Some(co)
        };
        layout.push(BlockLayout {
            cone: *cone,
            offset,
            cone_offset,
        });
        offset += dim;
    }
    let nf = free_idx.len();
    let nc = cone_idx.len();
    let degree: usize = p.cones.iter().map(Cone::degree).sum();

    let a_cone = a.select_columns(cone_idx.iter());
    let a_cone_t = a_cone.transpose();
    let a_free = a.select_columns(free_idx.iter());

    // State.
    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(n);
    for blk in &layout {
        BlockScaling::identity_point(&blk.cone, x.rows_mut(blk.offset, blk.cone.dim()));
    }
    for blk in &layout {
        if blk.cone_offset.is_some() {
            let e = {
                let mut tmp = DVector::zeros(blk.cone.dim());
                BlockScaling::identity_point(&blk.cone, tmp.rows_mut(0, blk.cone.dim()));
                tmp
            };
            z.rows_mut(blk.offset, blk.cone.dim()).copy_from(&e);
        }
    }
    let mut y = DVector::zeros(m);
    if let Some(init) = initial {
        if point_is_interior(&layout, &init.x) && point_is_interior(&layout, &init.z) {
            x = init.x;
            z = init.z;
            // y enters scaled space
            for i in 0..m {
                y[i] = init.y[i] * row_scale[i];
            }
            for &j in &free_idx {
                z[j] = 0.0;
            }
        }
    }
    let mut tau = 1.0_f64;
    let mut kappa = 1.0_f64;

    let norm_b_orig = p.equality_rhs.norm();
    let norm_c = c.norm();

    let mut best: Option<(DVector<f64>, DVector<f64>, KktResiduals, f64)> = None;
    let mut small_steps = 0usize;
    let mut iterations = 0usize;
    let mut mu_initial = None;

    for iter in 0..options.max_iters {
        iterations = iter;

        // Unscaled KKT residuals for termination (original row scaling).
        let xs = &x / tau;
        let ys_scaled = &y / tau;
        let ys = DVector::from_fn(m, |i, _| ys_scaled[i] / row_scale[i]);
        let zs = &z / tau;
        let pres_vec = &p.equality_lhs * &xs - &p.equality_rhs;
        let pres = pres_vec.norm() / (1.0 + norm_b_orig);
        let dres_vec = p.equality_lhs.tr_mul(&ys) + &zs - c;
        let dres = dres_vec.norm() / (1.0 + norm_c);
        let pobj = c.dot(&xs);
        let dobj = p.equality_rhs.dot(&ys);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let residuals = KktResiduals {
            primal: pres,
            dual: dres,
            gap,
        };
        let better = best
            .as_ref()
            .map(|(_, _, r, _)| residuals.max() < r.max())
            .unwrap_or(true);
        if better {
            best = Some((xs.clone(), ys.clone(), residuals, pobj));
        }

        if pres <= tol && dres <= tol && gap <= tol {
            return Ok(ConicSolution {
                x_star: xs,
                y_star: ys,
                status: SolveStatus::Optimal,
                kkt_residuals: residuals,
                iterations: iter,
                objective_value: pobj,
            });
        }

        // Infeasibility / unboundedness certificates.
        let by = p.equality_rhs.dot(&ys) * tau; // = b'y in original scaling
        if by > 1e-10 * (1.0 + norm_b_orig) {
            let cert_res = (p.equality_lhs.tr_mul(&DVector::from_fn(m, |i, _| {
                y[i] / row_scale[i]
            })) + &z)
                .norm();
            if cert_res <= tol * by {
                let y_cert = DVector::from_fn(m, |i, _| y[i] / row_scale[i] / by);
                return Ok(ConicSolution {
                    x_star: DVector::zeros(n),
                    y_star: y_cert,
                    status: SolveStatus::Infeasible,
                    kkt_residuals: residuals,
                    iterations: iter,
                    objective_value: f64::INFINITY,
                });
            }
        }
        let cx = c.dot(&x);
        if cx < -1e-10 * (1.0 + norm_c) {
            let ray_res = (&a * &x).norm();
            if ray_res <= tol * (-cx) {
                return Ok(ConicSolution {
                    x_star: &x / (-cx),
                    y_star: DVector::zeros(m),
                    status: SolveStatus::Unbounded,
                    kkt_residuals: residuals,
                    iterations: iter,
                    objective_value: f64::NEG_INFINITY,
                });
            }
        }

        // Internal residuals (scaled rows).
        let rz = &z + a.tr_mul(&y) - c * tau;
        let ry = &a * &x - &b * tau;
        let rk = kappa + c.dot(&x) - b.dot(&y);
        let mu = (x.dot(&z) + tau * kappa) / (degree as f64 + 1.0);
        let mu0 = *mu_initial.get_or_insert(mu);
        if mu < 1e-13 * mu0 || !mu.is_finite() {
            break;
        }

        // NT scalings; losing the interior at tiny mu is an end-of-precision
        // signal, not an error.
        let mut scalings = Vec::with_capacity(layout.len());
        let mut interior_lost = false;
        for (bi, blk) in layout.iter().enumerate() {
            let dim = blk.cone.dim();
            match BlockScaling::compute(
                &blk.cone,
                x.rows(blk.offset, dim),
                z.rows(blk.offset, dim),
                bi,
            ) {
                Ok(sc) => scalings.push(sc),
                Err(_) => {
                    interior_lost = true;
                    break;
                }
            }
        }
        if interior_lost {
            break;
        }

        // Reduced KKT matrix [[S, Af],[Af', 0]] with S = Ac Hinv Ac'.
        let mut t_mat = DMatrix::zeros(nc, m);
        for j in 0..m {
            let col = a_cone_t.column(j);
            let mut out = t_mat.column_mut(j);
            for (bi, blk) in layout.iter().enumerate() {
                if let Some(co) = blk.cone_offset {
                    let dim = blk.cone.dim();
                    scalings[bi].apply_hinv(col.rows(co, dim), out.rows_mut(co, dim));
                }
            }
        }
        let s_mat = &a_cone * &t_mat;
        let nr = m + nf;
        let mut kkt = DMatrix::zeros(nr, nr);
        kkt.view_mut((0, 0), (m, m)).copy_from(&s_mat);
        if nf > 0 {
            kkt.view_mut((0, m), (m, nf)).copy_from(&a_free);
            kkt.view_mut((m, 0), (nf, m)).copy_from(&a_free.transpose());
        }
        let reg = 1e-11 * (1.0 + s_mat.diagonal().amax());
        for i in 0..m {
            kkt[(i, i)] += reg;
        }
        for i in m..nr {
            kkt[(i, i)] -= reg;
        }
        let lu = kkt.lu();

        let solve_m2 = |rhs1: &DVector<f64>, rhs2: &DVector<f64>| -> Option<(DVector<f64>, DVector<f64>)> {
            // rhs1 over all variables, rhs2 over rows
            let rhs1_c = gather(rhs1, &cone_idx);
            let mut hinv_r1c = DVector::zeros(nc);
            for (bi, blk) in layout.iter().enumerate() {
                if let Some(co) = blk.cone_offset {
                    let dim = blk.cone.dim();
                    scalings[bi].apply_hinv(rhs1_c.rows(co, dim), hinv_r1c.rows_mut(co, dim));
                }
            }
            let mut rhs_red = DVector::zeros(nr);
            rhs_red.rows_mut(0, m).copy_from(&(rhs2 + &a_cone * &hinv_r1c));
            for (k, &j) in free_idx.iter().enumerate() {
                rhs_red[m + k] = rhs1[j];
            }
            let mut sol = lu.solve(&rhs_red)?;
            // iterative refinement against the unregularized reduced system
            for _ in 0..2 {
                let dy = sol.rows(0, m).into_owned();
                let dxf = sol.rows(m, nf).into_owned();
                let mut res = DVector::zeros(nr);
                let mut top = &s_mat * &dy;
                if nf > 0 {
                    top += &a_free * &dxf;
                }
                for i in 0..m {
                    res[i] = rhs_red[i] - top[i];
                }
                if nf > 0 {
                    let bot = a_free.tr_mul(&dy);
                    for k in 0..nf {
                        res[m + k] = rhs_red[m + k] - bot[k];
                    }
                }
                let corr = lu.solve(&res)?;
                sol += corr;
            }
            let dy = sol.rows(0, m).into_owned();
            let dxf = sol.rows(m, nf).into_owned();
            // recover the cone part of dx
            let at_dy = a_cone.tr_mul(&dy);
            let mut dx = DVector::zeros(n);
            let arg = &at_dy - &rhs1_c;
            for (bi, blk) in layout.iter().enumerate() {
                if let Some(co) = blk.cone_offset {
                    let dim = blk.cone.dim();
                    let mut out = DVector::zeros(dim);
                    scalings[bi].apply_hinv(arg.rows(co, dim), out.rows_mut(0, dim));
                    dx.rows_mut(blk.offset, dim).copy_from(&out);
                }
            }
            for (k, &j) in free_idx.iter().enumerate() {
                dx[j] = dxf[k];
            }
            Some((dx, dy))
        };

        let Some((vx, vy)) = solve_m2(c, &b) else {
            break;
        };
        let denom = -kappa / tau + c.dot(&vx) - b.dot(&vy);
        if std::env::var_os("CONIC_TRACE").is_some() {
            eprintln!(
                "iter {iter}: mu={mu:.3e} tau={tau:.3e} kappa={kappa:.3e} denom={denom:.3e} pres={pres:.3e} dres={dres:.3e} gap={gap:.3e}"
            );
        }
        if !denom.is_finite() || denom >= 0.0 {
            // The two-solve denominator is provably negative in exact
            // arithmetic; a sign flip means the working precision floor.
            break;
        }

        let lambdas: Vec<DVector<f64>> = scalings.iter().map(BlockScaling::lambda).collect();

        // One Newton solve for a given sigma and centering correction.
        let direction = |sigma: f64,
                             corr: Option<&[DVector<f64>]>,
                             dtk_corr: f64|
         -> Option<(DVector<f64>, DVector<f64>, DVector<f64>, f64, f64)> {
            let mut g_s = DVector::zeros(n);
            for (bi, blk) in layout.iter().enumerate() {
                if blk.cone_offset.is_none() {
                    continue;
                }
                let dim = blk.cone.dim();
                let lam = &lambdas[bi];
                let sc = &scalings[bi];
                let mut d_s = -sc.jordan_product(lam, lam);
                if sigma > 0.0 {
                    d_s += sc.jordan_identity() * (sigma * mu);
                }
                if let Some(corrs) = corr {
                    d_s -= &corrs[bi];
                }
                let g = sc.unscale_z(&sc.lambda_divide(&d_s));
                g_s.rows_mut(blk.offset, dim).copy_from(&g);
            }
            let rhs1 = -(&rz) * (1.0 - sigma) - &g_s;
            let rhs2 = -(&ry) * (1.0 - sigma);
            let (ux, uy) = solve_m2(&rhs1, &rhs2)?;
            let d_kappa_rhs = sigma * mu - tau * kappa - dtk_corr;
            let r3 = -(1.0 - sigma) * rk;
            let dtau =
                (r3 - d_kappa_rhs / tau - c.dot(&ux) + b.dot(&uy)) / denom;
            let dx = &ux + &vx * dtau;
            let dy = &uy + &vy * dtau;
            // dz from the dual feasibility row
            let mut dz = -(&rz) * (1.0 - sigma) - a.tr_mul(&dy) + c * dtau;
            for &j in &free_idx {
                dz[j] = 0.0;
            }
            let dkappa = (d_kappa_rhs - kappa * dtau) / tau;
            Some((dx, dy, dz, dtau, dkappa))
        };

        // Predictor (affine) direction.
        let Some((dx_a, _dy_a, dz_a, dtau_a, dkappa_a)) = direction(0.0, None, 0.0) else {
            break;
        };
        let alpha_aff = step_length(&layout, &scalings, &x, &z, &dx_a, &dz_a, tau, kappa, dtau_a, dkappa_a)
            .min(1.0);
        let mu_aff = ((&x + &dx_a * alpha_aff).dot(&(&z + &dz_a * alpha_aff))
            + (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkappa_a))
            / (degree as f64 + 1.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector terms in the scaled space.
        let mut corrs = Vec::with_capacity(layout.len());
        for (bi, blk) in layout.iter().enumerate() {
            let dim = blk.cone.dim();
            if blk.cone_offset.is_none() {
                corrs.push(DVector::zeros(dim));
                continue;
            }
            let sc = &scalings[bi];
            let dxs = sc.scale_x(&dx_a.rows(blk.offset, dim).into_owned());
            let dzs = sc.scale_z(&dz_a.rows(blk.offset, dim).into_owned());
            corrs.push(sc.jordan_product(&dxs, &dzs));
        }
        let Some((dx, dy, dz, dtau, dkappa)) = direction(sigma, Some(&corrs), dtau_a * dkappa_a)
        else {
            break;
        };

        let alpha_max = step_length(&layout, &scalings, &x, &z, &dx, &dz, tau, kappa, dtau, dkappa);
        let alpha = fraction_to_boundary(alpha_max);
        if alpha < 1e-9 {
            small_steps += 1;
            if small_steps >= 3 {
                break;
            }
        } else {
            small_steps = 0;
        }

        x += &dx * alpha;
        y += &dy * alpha;
        z += &dz * alpha;
        tau += alpha * dtau;
        kappa += alpha * dkappa;

        if tau < 1e-12 || !tau.is_finite() {
            break;
        }
    }

    let (xs, ys, residuals, pobj) = best.ok_or_else(|| {
        ConicError::Numerical("no iterate produced".into())
    })?;
    Ok(ConicSolution {
        x_star: xs,
        y_star: ys,
        status: SolveStatus::MaxIters,
        kkt_residuals: residuals,
        iterations,
        objective_value: pobj,
    })
}

fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&j| v[j]))
}

#[allow(clippy::too_many_arguments)]
fn step_length(
    layout: &[BlockLayout],
    scalings: &[BlockScaling],
    x: &DVector<f64>,
    z: &DVector<f64>,
    dx: &DVector<f64>,
    dz: &DVector<f64>,
    tau: f64,
    kappa: f64,
    dtau: f64,
    dkappa: f64,
) -> f64 {
    let mut alpha = f64::INFINITY;
    for (bi, blk) in layout.iter().enumerate() {
        if blk.cone_offset.is_none() {
            continue;
        }
        let dim = blk.cone.dim();
        let sc = &scalings[bi];
        alpha = alpha.min(sc.step_to_boundary(x.rows(blk.offset, dim), dx.rows(blk.offset, dim)));
        alpha = alpha.min(sc.step_to_boundary(z.rows(blk.offset, dim), dz.rows(blk.offset, dim)));
    }
    if dtau < 0.0 {
        alpha = alpha.min(-tau / dtau);
    }
    if dkappa < 0.0 {
        alpha = alpha.min(-kappa / dkappa);
    }
    alpha
}

fn point_is_interior(layout: &[BlockLayout], v: &DVector<f64>) -> bool {
    for blk in layout.iter() {
        let dim = blk.cone.dim();
        let part = v.rows(blk.offset, dim);
        match blk.cone {
            Cone::Free { .. } | Cone::Zero { .. } => {}
            Cone::Nonneg { .. } => {
                if part.iter().any(|&t| t <= 0.0) {
                    return false;
                }
            }
            Cone::SecondOrder { .. } => {
                let tail = part.rows(1, dim - 1).norm();
                if part[0] <= tail {
                    return false;
                }
            }
            Cone::Psd { side } => {
                let m = crate::svec::mat_from_svec(&part.into_owned(), side);
                if nalgebra::Cholesky::new(m).is_none() {
                    return false;
                }
            }
        }
    }
    true
}
