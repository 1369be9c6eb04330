//! Communication-side update: average weighted sum-rate maximization with
//! common-rate decodability, share nonnegativity, QoS floors and a
//! proximal anchor, via sample average approximation, the rate-WMMSE
//! reformulation and alternating optimization.
//!
//! With equalizers and weights frozen at their closed-form optima, every
//! sample-averaged augmented weighted MSE is a convex quadratic in the
//! stacked precoder, so the inner step is one second-order-cone program.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

use conic::{
    solve_with, BlockRef, CompressedQuadratic, ConicError, LinExpr, ProblemBuilder, SolveStatus,
    SolverOptions,
};

use crate::config::{AccessMode, SolverKnobs, SystemConfig};
use crate::model::{sinr_and_rates, ChannelEstimate, CommonRateShares, Precoder, SaaBatch};

/// Equalizer, MMSE value and weight for one user on one sample.
#[derive(Debug, Clone, Copy)]
pub struct StreamWeights {
    pub equalizer: Complex<f64>,
    pub mmse: f64,
    pub weight: f64,
}

/// Closed-form WMMSE quantities for the whole batch: `[user][sample]`.
#[derive(Debug, Clone)]
pub struct WmmseState {
    /// Common-stream entries; absent under SDMA.
    pub common: Option<Vec<Vec<StreamWeights>>>,
    pub private: Vec<Vec<StreamWeights>>,
}

/// One communication subproblem instance: the proximal anchor comes from
/// the consensus loop (radar-side precoder block minus the scaled dual).
#[derive(Debug, Clone)]
pub struct VUpdateProblem<'a> {
    /// Full-length stacked anchor, `n_tx * (K+1)` entries.
    pub prox_center: DVector<Complex<f64>>,
    pub prox_weight: f64,
    pub batch: &'a SaaBatch,
    pub config: &'a SystemConfig,
}

#[derive(Debug, Error)]
pub enum AwsrError {
    #[error("subproblem infeasible (QoS constraints cannot be met)")]
    QosInfeasible,
    #[error("conic solve failed: {0}")]
    Conic(#[from] ConicError),
    #[error("conic solve unusable: status {status:?}, kkt residual {residual:.3e}")]
    LowAccuracy { status: SolveStatus, residual: f64 },
    #[error("quadratic reformulation failed: {0}")]
    Quadratic(String),
}

fn mmse_entry(signal: Complex<f64>, total: f64) -> StreamWeights {
    // `signal` is p^H h, so the minimizing equalizer is signal / total;
    // total >= 1 always (noise power is 1)
    let mmse = (1.0 - signal.norm_sqr() / total).max(1e-300);
    StreamWeights {
        equalizer: signal / total,
        mmse,
        weight: 1.0 / mmse,
    }
}

/// Optimal equalizers, MMSE values and weights at the current precoder.
/// `-log2(mmse)` reproduces the instantaneous rate of the matching stream.
pub fn mmse_step(precoder: &Precoder, batch: &SaaBatch, mode: AccessMode) -> WmmseState {
    let k_users = precoder.n_users();
    let m = batch.len();
    let mut common = if mode == AccessMode::Rsma {
        Some(vec![Vec::with_capacity(m); k_users])
    } else {
        None
    };
    let mut private = vec![Vec::with_capacity(m); k_users];
    for sample in batch.samples() {
        for k in 0..k_users {
            let h = sample.column(k);
            let common_sig = precoder.matrix().column(0).dotc(&h);
            let mut private_power = 0.0;
            let mut own = Complex::new(0.0, 0.0);
            for j in 0..k_users {
                let s = precoder.matrix().column(1 + j).dotc(&h);
                private_power += s.norm_sqr();
                if j == k {
                    own = s;
                }
            }
            let t_private = private_power + 1.0;
            if let Some(c) = common.as_mut() {
                let t_common = t_private + common_sig.norm_sqr();
                c[k].push(mmse_entry(common_sig, t_common));
            }
            private[k].push(mmse_entry(own, t_private));
        }
    }
    WmmseState { common, private }
}

/// Precoder columns that are optimization variables: all of them under
/// RSMA, the private ones under SDMA.
pub(crate) fn active_columns(config: &SystemConfig) -> Vec<usize> {
    match config.access_mode {
        AccessMode::Rsma => (0..config.n_streams()).collect(),
        AccessMode::Sdma => (1..config.n_streams()).collect(),
    }
}

/// Quadratic `x'Qx - 2b'x + c` over the real stacking `[Re p; Im p]` of
/// the active precoder columns.
struct QuadAccum {
    q: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
    n_tx: usize,
    n_active: usize,
}

impl QuadAccum {
    fn new(n_tx: usize, n_active: usize) -> Self {
        let d = 2 * n_tx * n_active;
        QuadAccum {
            q: DMatrix::zeros(d, d),
            b: DVector::zeros(d),
            c: 0.0,
            n_tx,
            n_active,
        }
    }

    /// Adds `w * |r^H p_col - delta|^2` for the active column `col`.
    fn add_abs_sq(&mut self, col: usize, r: &DVector<Complex<f64>>, delta: f64, w: f64) {
        let nt = self.n_tx;
        let na = self.n_tx * self.n_active;
        let re0 = col * nt;
        let im0 = na + col * nt;
        for i in 0..nt {
            for j in 0..nt {
                let rij = r[i] * r[j].conj(); // (r r^H)_{ij}
                self.q[(re0 + i, re0 + j)] += w * rij.re;
                self.q[(re0 + i, im0 + j)] += -w * rij.im;
                self.q[(im0 + i, re0 + j)] += w * rij.im;
                self.q[(im0 + i, im0 + j)] += w * rij.re;
            }
            self.b[re0 + i] += w * delta * r[i].re;
            self.b[im0 + i] += w * delta * r[i].im;
        }
        self.c += w * delta * delta;
    }

    fn add_scaled_identity(&mut self, w: f64) {
        for i in 0..self.q.nrows() {
            self.q[(i, i)] += w;
        }
    }

    fn add_linear_anchor(&mut self, w: f64, anchor: &DVector<f64>) {
        // w * ||x - anchor||^2 contributes w*I, w*anchor, w*||anchor||^2
        self.add_scaled_identity(w);
        self.b.axpy(w, anchor, 1.0);
        self.c += w * anchor.norm_squared();
    }

    fn add_const(&mut self, v: f64) {
        self.c += v;
    }

    fn scaled(&self, s: f64) -> (DMatrix<f64>, DVector<f64>, f64) {
        (&self.q * s, &self.b * s, self.c * s)
    }

    fn add_from(&mut self, other: &QuadAccum, s: f64) {
        self.q += &other.q * s;
        self.b += &other.b * s;
        self.c += other.c * s;
    }
}

/// Sample-averaged augmented-WMSE quadratics per user, with equalizers and
/// weights frozen.
struct MseQuadratics {
    /// One per user; present under RSMA only.
    common: Option<Vec<QuadAccum>>,
    private: Vec<QuadAccum>,
}

fn mse_quadratics(
    state: &WmmseState,
    batch: &SaaBatch,
    config: &SystemConfig,
    active: &[usize],
) -> MseQuadratics {
    let n_tx = config.n_tx;
    let k_users = config.n_users;
    let n_active = active.len();
    let m_inv = 1.0 / batch.len() as f64;
    let active_pos: Vec<Option<usize>> = (0..config.n_streams())
        .map(|col| active.iter().position(|&a| a == col))
        .collect();

    let mut common = state
        .common
        .as_ref()
        .map(|_| (0..k_users).map(|_| QuadAccum::new(n_tx, n_active)).collect::<Vec<_>>());
    let mut private: Vec<QuadAccum> = (0..k_users)
        .map(|_| QuadAccum::new(n_tx, n_active))
        .collect();

    for (mi, sample) in batch.samples().iter().enumerate() {
        for k in 0..k_users {
            let h = sample.column(k).into_owned();
            // private stream k: sum_j |g h^H p_j - delta_jk|^2 + |g|^2
            let sw = state.private[k][mi];
            let w = sw.weight * m_inv;
            let r = &h * sw.equalizer.conj(); // r with r^H p = g h^H p
            for j in 0..k_users {
                if let Some(pos) = active_pos[1 + j] {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    private[k].add_abs_sq(pos, &r, delta, w);
                }
            }
            private[k].add_const(w * sw.equalizer.norm_sqr() - m_inv * sw.weight.log2());

            if let (Some(cq), Some(cs)) = (common.as_mut(), state.common.as_ref()) {
                let sw = cs[k][mi];
                let w = sw.weight * m_inv;
                let r = &h * sw.equalizer.conj();
                if let Some(pos) = active_pos[0] {
                    cq[k].add_abs_sq(pos, &r, 1.0, w);
                }
                for j in 0..k_users {
                    if let Some(pos) = active_pos[1 + j] {
                        cq[k].add_abs_sq(pos, &r, 0.0, w);
                    }
                }
                cq[k].add_const(w * sw.equalizer.norm_sqr() - m_inv * sw.weight.log2());
            }
        }
    }
    MseQuadratics { common, private }
}

/// Real stacking of the active columns of a full stacked complex vector.
fn real_stack(full: &DVector<Complex<f64>>, n_tx: usize, active: &[usize]) -> DVector<f64> {
    let na = n_tx * active.len();
    let mut out = DVector::zeros(2 * na);
    for (a, &col) in active.iter().enumerate() {
        for i in 0..n_tx {
            out[a * n_tx + i] = full[col * n_tx + i].re;
            out[na + a * n_tx + i] = full[col * n_tx + i].im;
        }
    }
    out
}

/// A built conic instance together with the variable layout needed to
/// extract the precoder and shares.
pub struct BuiltVProblem {
    pub conic: conic::ConicProblem,
    p_vars: Vec<usize>,
    shares_block: Option<BlockRef>,
    active: Vec<usize>,
    n_tx: usize,
    n_streams: usize,
}

impl BuiltVProblem {
    fn extract(&self, x: &DVector<f64>) -> (Precoder, CommonRateShares) {
        let na = self.n_tx * self.active.len();
        let mut full = DMatrix::zeros(self.n_tx, self.n_streams);
        for (a, &col) in self.active.iter().enumerate() {
            for i in 0..self.n_tx {
                let re = x[self.p_vars[a * self.n_tx + i]];
                let im = x[self.p_vars[na + a * self.n_tx + i]];
                full[(i, col)] = Complex::new(re, im);
            }
        }
        let shares = match &self.shares_block {
            Some(b) => CommonRateShares::new(
                b.indices().map(|i| x[i].max(0.0)).collect::<Vec<_>>(),
            )
            .expect("clamped shares are nonnegative"),
            None => CommonRateShares::zeros(self.n_streams - 1),
        };
        (Precoder::new(full), shares)
    }
}

/// Encodes the convex inner problem with the WMMSE quantities frozen:
///
/// ```text
/// min  sum_k mu_k xi_k(P) - sum_k mu_k C_k + (rho/2) ||P - anchor||^2
/// st   sum_j C_j + xi_c_k(P) <= 1       (common decodability, per user)
///      C >= 0
///      xi_k(P) <= 1 + C_k - qos         (when a QoS floor is set)
///      ||P[r, :]||^2 <= Pt / n_tx       (per antenna row)
/// ```
///
/// The row constraint is the convex relaxation of the per-antenna power
/// equality; the radar side enforces the equality exactly and the
/// proximal term aligns the two. Without the caps the sum-rate term is
/// nearly flat across row-power shifts and the consensus residual decays
/// too slowly to meet the stopping threshold.
pub fn build_precoder_subproblem(
    state: &WmmseState,
    problem: &VUpdateProblem<'_>,
) -> Result<BuiltVProblem, AwsrError> {
    let config = problem.config;
    let active = active_columns(config);
    let n_tx = config.n_tx;
    let k_users = config.n_users;
    let quads = mse_quadratics(state, problem.batch, config, &active);
    let anchor = real_stack(&problem.prox_center, n_tx, &active);

    // objective quadratic: weighted private MSEs plus the proximal term
    let mut obj = QuadAccum::new(n_tx, active.len());
    for k in 0..k_users {
        obj.add_from(&quads.private[k], config.user_weights[k]);
    }
    obj.add_linear_anchor(problem.prox_weight / 2.0, &anchor);
    // constant part of the prox over inactive columns
    let na = n_tx * active.len();
    let inactive_power: f64 = (0..config.n_streams())
        .filter(|c| !active.contains(c))
        .map(|c| {
            (0..n_tx)
                .map(|i| problem.prox_center[c * n_tx + i].norm_sqr())
                .sum::<f64>()
        })
        .sum();
    obj.add_const(problem.prox_weight / 2.0 * inactive_power);

    let mut pb = ProblemBuilder::new();
    let p_block = pb.free_block(2 * na);
    let p_vars: Vec<usize> = p_block.indices().collect();
    let shares_block = match config.access_mode {
        AccessMode::Rsma => Some(pb.nonneg_block(k_users)),
        AccessMode::Sdma => None,
    };

    let (q, b, c) = obj.scaled(1.0);
    let quad = CompressedQuadratic::from_form(&q, &b, c)
        .map_err(|e| AwsrError::Quadratic(e.to_string()))?;
    let t = pb
        .quad_epigraph(&quad, &p_vars)
        .map_err(|e| AwsrError::Quadratic(e.to_string()))?;
    pb.add_objective_term(t, 1.0);
    if let Some(sb) = &shares_block {
        for k in 0..k_users {
            pb.add_objective_term(sb.index(k), -config.user_weights[k]);
        }
    }

    if let (Some(cqs), Some(sb)) = (&quads.common, &shares_block) {
        for cq in cqs.iter() {
            let (q, b, c) = cq.scaled(1.0);
            let quad = CompressedQuadratic::from_form(&q, &b, c)
                .map_err(|e| AwsrError::Quadratic(e.to_string()))?;
            let mut head = LinExpr::constant(1.0);
            for j in 0..k_users {
                head = head.term(sb.index(j), -1.0);
            }
            pb.quad_upper_bound(&quad, &p_vars, head)
                .map_err(|e| AwsrError::Quadratic(e.to_string()))?;
        }
    }

    if config.qos_threshold > 0.0 {
        for k in 0..k_users {
            let (q, b, c) = quads.private[k].scaled(1.0);
            let quad = CompressedQuadratic::from_form(&q, &b, c)
                .map_err(|e| AwsrError::Quadratic(e.to_string()))?;
            let mut head = LinExpr::constant(1.0 - config.qos_threshold);
            if let Some(sb) = &shares_block {
                head = head.term(sb.index(k), 1.0);
            }
            pb.quad_upper_bound(&quad, &p_vars, head)
                .map_err(|e| AwsrError::Quadratic(e.to_string()))?;
        }
    }

    // per-antenna row caps
    let row_budget = config.per_antenna_power().sqrt();
    for r in 0..n_tx {
        let soc = pb.soc_block(2 * active.len() + 1);
        pb.eq_row(LinExpr::var(soc.index(0)), row_budget);
        for (a, _) in active.iter().enumerate() {
            let re = p_vars[a * n_tx + r];
            let im = p_vars[n_tx * active.len() + a * n_tx + r];
            pb.eq_row(LinExpr::var(soc.index(1 + 2 * a)).term(re, -1.0), 0.0);
            pb.eq_row(LinExpr::var(soc.index(2 + 2 * a)).term(im, -1.0), 0.0);
        }
    }

    Ok(BuiltVProblem {
        conic: pb.build(),
        p_vars,
        shares_block,
        active,
        n_tx,
        n_streams: config.n_streams(),
    })
}

/// Value of the minimization-form surrogate at `(precoder, shares)` with
/// the WMMSE quantities refreshed to their closed-form optima:
/// `sum_k mu_k (1 - avg_rate_k - C_k) + (rho/2) ||P - anchor||^2`.
pub fn surrogate_objective(
    precoder: &Precoder,
    shares: &CommonRateShares,
    problem: &VUpdateProblem<'_>,
) -> f64 {
    let config = problem.config;
    let k_users = config.n_users;
    let m = problem.batch.len() as f64;
    let mut avg_private = vec![0.0; k_users];
    for sample in problem.batch.samples() {
        for k in 0..k_users {
            avg_private[k] += sinr_and_rates(precoder, sample.column(k), k).private_rate / m;
        }
    }
    let active = active_columns(config);
    let x = real_stack(&precoder.to_stacked(), config.n_tx, &active);
    let anchor = real_stack(&problem.prox_center, config.n_tx, &active);
    let mut j = problem.prox_weight / 2.0 * (&x - &anchor).norm_squared();
    for k in 0..k_users {
        j += config.user_weights[k] * (1.0 - avg_private[k] - shares.as_slice()[k]);
    }
    j
}

#[derive(Debug, Clone)]
pub struct AoOutcome {
    pub precoder: Precoder,
    pub shares: CommonRateShares,
    /// Surrogate objective after each accepted iterate (minimization form,
    /// monotone non-increasing).
    pub objective_trace: Vec<f64>,
    pub objective: f64,
    /// Surrogate weighted sum-rate of the returned iterate on the batch.
    pub awsr_surrogate: f64,
    pub converged: bool,
}

/// Alternates the closed-form WMMSE step with the conic precoder step
/// until the surrogate stalls. A step that fails to improve the surrogate
/// (possible at the conic tolerance floor) is rejected and the best
/// iterate is returned.
pub fn ao_solve(
    problem: &VUpdateProblem<'_>,
    init: &Precoder,
    shares_init: &CommonRateShares,
    knobs: &SolverKnobs,
) -> Result<AoOutcome, AwsrError> {
    let config = problem.config;
    let mut precoder = init.clone();
    let mut shares = shares_init.clone();
    let mut best_obj = surrogate_objective(&precoder, &shares, problem);
    let mut trace = vec![best_obj];
    let mut converged = false;

    let options = SolverOptions {
        tolerance: knobs.conic_tolerance,
        max_iters: knobs.conic_max_iters,
        ..Default::default()
    };

    for _ in 0..knobs.ao_max_iters {
        let state = mmse_step(&precoder, problem.batch, config.access_mode);
        let built = build_precoder_subproblem(&state, problem)?;
        let sol = solve_with(&built.conic, &options)?;
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Err(AwsrError::QosInfeasible),
            status => {
                let residual = sol.kkt_residuals.max();
                if residual > knobs.conic_accept_residual {
                    return Err(AwsrError::LowAccuracy { status, residual });
                }
            }
        }
        let (p_new, s_new) = built.extract(&sol.x_star);
        let obj_new = surrogate_objective(&p_new, &s_new, problem);
        if obj_new > best_obj {
            // conic accuracy floor reached; keep the best iterate
            converged = true;
            break;
        }
        let improvement = (best_obj - obj_new) / best_obj.abs().max(1.0);
        precoder = p_new;
        shares = s_new;
        best_obj = obj_new;
        trace.push(obj_new);
        if improvement < knobs.ao_rel_tol {
            converged = true;
            break;
        }
    }

    let awsr_surrogate = {
        let k_users = config.n_users;
        let m = problem.batch.len() as f64;
        let mut avg_private = vec![0.0; k_users];
        for sample in problem.batch.samples() {
            for k in 0..k_users {
                avg_private[k] += sinr_and_rates(&precoder, sample.column(k), k).private_rate / m;
            }
        }
        (0..k_users)
            .map(|k| config.user_weights[k] * (shares.as_slice()[k] + avg_private[k]))
            .sum()
    };

    Ok(AoOutcome {
        precoder,
        shares,
        objective_trace: trace,
        objective: best_obj,
        awsr_surrogate,
        converged,
    })
}

/// Warm-start precoder: the common column points along the principal
/// direction of the estimated channel Gram with half the power budget
/// (zero under SDMA); private columns are regularized channel-matched
/// beams sharing the remainder. Rows are then rescaled to the exact
/// per-antenna power.
pub fn initial_precoder(config: &SystemConfig, estimate: &ChannelEstimate) -> Precoder {
    initial_precoder_with_fraction(config, estimate, 0.5)
}

/// Warm start with an explicit common-stream power fraction.
pub fn initial_precoder_with_fraction(
    config: &SystemConfig,
    estimate: &ChannelEstimate,
    common_fraction: f64,
) -> Precoder {
    let n_tx = config.n_tx;
    let k_users = config.n_users;
    let pt = config.power_total;
    let mut cols = DMatrix::zeros(n_tx, config.n_streams());

    let common_power = match config.access_mode {
        AccessMode::Rsma => common_fraction * pt,
        AccessMode::Sdma => 0.0,
    };
    if common_power > 0.0 {
        let gram = &estimate.h_hat * estimate.h_hat.adjoint();
        let dir = principal_eigenvector(&gram);
        cols.column_mut(0)
            .copy_from(&(&dir * Complex::new(common_power.sqrt(), 0.0)));
    }

    // regularized channel-matched private beams
    let reg = k_users as f64 / pt;
    let mut gram = &estimate.h_hat * estimate.h_hat.adjoint();
    for i in 0..n_tx {
        gram[(i, i)] += Complex::new(reg, 0.0);
    }
    let lu = gram.lu();
    let private_power = (pt - common_power) / k_users as f64;
    for k in 0..k_users {
        let h = estimate.h_hat.column(k).into_owned();
        let dir = lu.solve(&h).unwrap_or(h);
        let norm = dir.norm();
        if norm > 1e-12 {
            cols.column_mut(1 + k)
                .copy_from(&(&dir * Complex::new(private_power.sqrt() / norm, 0.0)));
        }
    }
    Precoder::new(cols).project_rows(pt)
}

fn principal_eigenvector(gram: &DMatrix<Complex<f64>>) -> DVector<Complex<f64>> {
    let n = gram.nrows();
    let mut v = DVector::from_fn(n, |i, _| Complex::new(1.0, 0.1 * i as f64));
    v /= Complex::new(v.norm(), 0.0);
    for _ in 0..100 {
        let w = gram * &v;
        let n_w = w.norm();
        if n_w < 1e-300 {
            break;
        }
        v = w / Complex::new(n_w, 0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CsitMode;
    use crate::model::{sample_channel_estimate, sample_saa_batch, steering_vector};
    use crate::rng;
    use nalgebra::DMatrix;

    /// Reconstructs slack variables row by row (each builder row touches
    /// exactly one not-yet-assigned slack with unit coefficient) and
    /// checks feasibility and objective of a hand-built candidate.
    #[test]
    fn built_problem_evaluates_candidate_correctly() {
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
        let problem = VUpdateProblem {
            prox_center: p.to_stacked(),
            prox_weight: config.admm_penalty,
            batch: &batch,
            config: &config,
        };
        let state = mmse_step(&p, &batch, config.access_mode);
        let active = active_columns(&config);
        let quads = mse_quadratics(&state, &batch, &config, &active);
        let x_p = real_stack(&p.to_stacked(), config.n_tx, &active);
        // raw accumulators must reproduce the augmented WMSE values
        for k in 0..config.n_users {
            let (q, b, c) = quads.private[k].scaled(1.0);
            let raw = (x_p.transpose() * &q * &x_p)[(0, 0)] - 2.0 * b.dot(&x_p) + c;
            let expect = 1.0 - (-state.private[k][0].mmse.log2());
            assert!(
                (raw - expect).abs() < 1e-9,
                "private quad {k}: raw {raw} vs {expect}"
            );
            let quad = CompressedQuadratic::from_form(&q, &b, c).unwrap();
            let compressed = quad.eval(&x_p);
            assert!(
                (compressed - expect).abs() < 1e-9,
                "private quad {k} compressed: {compressed} vs {expect}"
            );
            let (qc, bc, cc) = quads.common.as_ref().unwrap()[k].scaled(1.0);
            let raw_c = (x_p.transpose() * &qc * &x_p)[(0, 0)] - 2.0 * bc.dot(&x_p) + cc;
            let expect_c = 1.0 - (-state.common.as_ref().unwrap()[k][0].mmse.log2());
            assert!(
                (raw_c - expect_c).abs() < 1e-9,
                "common quad {k}: raw {raw_c} vs {expect_c}"
            );
            let quad_c = CompressedQuadratic::from_form(&qc, &bc, cc).unwrap();
            let compressed_c = quad_c.eval(&x_p);
            assert!(
                (compressed_c - expect_c).abs() < 1e-9,
                "common quad {k} compressed: {compressed_c} vs {expect_c}"
            );
        }
        let built = build_precoder_subproblem(&state, &problem).unwrap();
        let shares = CommonRateShares::new(vec![1.5, 1.5]).unwrap();
        let j_direct = surrogate_objective(&p, &shares, &problem);

        // candidate assembly
        let n = built.conic.n_vars();
        let mut x = nalgebra::DVector::zeros(n);
        let active = active_columns(&config);
        let stack = real_stack(&p.to_stacked(), config.n_tx, &active);
        for (i, &v) in built.p_vars.iter().enumerate() {
            x[v] = stack[i];
        }
        let sb = built.shares_block.as_ref().unwrap();
        for (k, idx) in sb.indices().enumerate() {
            x[idx] = shares.as_slice()[k];
        }
        // everything after the shares block is slack (epigraph + cones)
        let first_slack = sb.start + sb.dim;
        let mut assigned = vec![false; n];
        for i in 0..first_slack {
            assigned[i] = true;
        }
        // the epigraph variable is free: pin it to the tight quadratic value
        let weighted_shares: f64 = config
            .user_weights
            .iter()
            .zip(shares.as_slice())
            .map(|(&w, &c)| w * c)
            .sum();
        x[first_slack] = j_direct + weighted_shares;
        assigned[first_slack] = true;
        let a_mat = &built.conic.equality_lhs;
        let b = &built.conic.equality_rhs;
        // iterate until fixpoint (rows may reference later slacks)
        for _round in 0..10 {
            for r in 0..a_mat.nrows() {
                let mut unknown = None;
                let mut known_sum = 0.0;
                let mut ok = true;
                for c in 0..n {
                    let coef = a_mat[(r, c)];
                    if coef == 0.0 {
                        continue;
                    }
                    if assigned[c] {
                        known_sum += coef * x[c];
                    } else if unknown.is_none() {
                        unknown = Some((c, coef));
                    } else {
                        ok = false;
                        break;
                    }
                }
                if let (true, Some((c, coef))) = (ok, unknown) {
                    x[c] = (b[r] - known_sum) / coef;
                    assigned[c] = true;
                }
            }
        }
        assert!(assigned.iter().all(|&a| a), "slack reconstruction incomplete");
        let residual = (a_mat * &x - b).norm();
        assert!(residual < 1e-9, "candidate violates equalities: {residual}");
        // cone feasibility
        let mut off = 0;
        for cone in &built.conic.cones {
            let dim = cone.dim();
            let part = x.rows(off, dim);
            match cone {
                conic::Cone::Nonneg { .. } => {
                    assert!(part.iter().all(|&v| v >= -1e-9), "nonneg violated");
                }
                conic::Cone::SecondOrder { .. } => {
                    let tail = part.rows(1, dim - 1).norm();
                    assert!(
                        part[0] + 1e-7 >= tail,
                        "soc violated: head {} tail {}",
                        part[0],
                        tail
                    );
                }
                _ => {}
            }
            off += dim;
        }
        let obj = built.conic.objective.dot(&x) + built.conic.objective_offset;
        assert!(
            (obj - j_direct).abs() < 1e-6 * (1.0 + j_direct.abs()),
            "conic candidate objective {obj} vs direct {j_direct}"
        );
    }
}
