//! Per-cone Jordan-algebra operations and Nesterov-Todd scalings.
//!
//! Every symmetric cone block exposes the handful of primitives the
//! interior-point iteration needs: the NT scaling point computed from the
//! current primal/dual pair, application of `P(w)` (inverse scaled
//! Hessian), mappings to and from the scaled space, Jordan products and
//! divisions, and maximum step to the cone boundary.

use nalgebra::{DMatrix, DVector, DVectorView, DVectorViewMut};

use crate::problem::Cone;
use crate::svec::{mat_from_svec, svec_from_mat};

#[derive(Debug, thiserror::Error)]
pub enum ScalingError {
    #[error("iterate left the cone interior (block {block})")]
    NotInterior { block: usize },
}

/// Workspace for one cone block at the current iterate.
pub enum BlockScaling {
    Free {
        dim: usize,
    },
    Nonneg {
        /// w_i^2 = x_i / z_i
        w2: DVector<f64>,
        lambda: DVector<f64>,
    },
    Soc {
        /// NT scaling point and its Jordan square roots.
        w: DVector<f64>,
        w_half: DVector<f64>,
        w_half_inv: DVector<f64>,
        lambda: DVector<f64>,
    },
    Psd {
        side: usize,
        r: DMatrix<f64>,
        r_inv: DMatrix<f64>,
        /// W = R R', the matrix realizing P(w) S = W S W.
        w_mat: DMatrix<f64>,
        /// Scaled spectrum (diagonal of the scaled point).
        sigma: DVector<f64>,
    },
}

impl BlockScaling {
    pub fn identity_point(cone: &Cone, mut out: DVectorViewMut<f64>) {
        out.fill(0.0);
        match *cone {
            Cone::Free { .. } | Cone::Zero { .. } => {}
            Cone::Nonneg { dim } => {
                for i in 0..dim {
                    out[i] = 1.0;
                }
            }
            Cone::SecondOrder { .. } => {
                out[0] = 1.0;
            }
            Cone::Psd { side } => {
                // svec(identity): ones on diagonal positions
                let mut k = 0;
                for j in 0..side {
                    out[k] = 1.0;
                    k += side - j;
                }
            }
        }
    }

    pub fn compute(cone: &Cone, x: DVectorView<f64>, z: DVectorView<f64>, block: usize) -> Result<Self, ScalingError> {
        match *cone {
            Cone::Free { dim } | Cone::Zero { dim } => Ok(BlockScaling::Free { dim }),
            Cone::Nonneg { dim } => {
                let mut w2 = DVector::zeros(dim);
                let mut lambda = DVector::zeros(dim);
                for i in 0..dim {
                    if x[i] <= 0.0 || z[i] <= 0.0 {
                        return Err(ScalingError::NotInterior { block });
                    }
                    w2[i] = x[i] / z[i];
                    lambda[i] = (x[i] * z[i]).sqrt();
                }
                Ok(BlockScaling::Nonneg { w2, lambda })
            }
            Cone::SecondOrder { .. } => {
                let gx = soc_residual(&x);
                let gz = soc_residual(&z);
                if gx <= 0.0 || gz <= 0.0 || x[0] <= 0.0 || z[0] <= 0.0 {
                    return Err(ScalingError::NotInterior { block });
                }
                let gx = gx.sqrt();
                let gz = gz.sqrt();
                // Unit-hyperbolic midpoint of x/gx and J(z/gz).
                let dim = x.len();
                let mut wbar = DVector::zeros(dim);
                let dot_xz = x.dot(&z);
                let gamma = ((1.0 + dot_xz / (gx * gz)) / 2.0).sqrt();
                wbar[0] = (x[0] / gx + z[0] / gz) / (2.0 * gamma);
                for i in 1..dim {
                    wbar[i] = (x[i] / gx - z[i] / gz) / (2.0 * gamma);
                }
                let eta = (gx / gz).sqrt();
                let w = &wbar * eta;
                let w_half = soc_sqrt(&w);
                let w_half_inv = soc_inv(&w_half);
                // lambda = P(w^{-1/2}) x ( = P(w^{1/2}) z at the NT point)
                let lambda = soc_quad_rep(&w_half_inv, &DVector::from_column_slice(x.as_slice()));
                Ok(BlockScaling::Soc {
                    w,
                    w_half,
                    w_half_inv,
                    lambda,
                })
            }
            Cone::Psd { side } => {
                let xm = mat_from_svec(&DVector::from_column_slice(x.as_slice()), side);
                let zm = mat_from_svec(&DVector::from_column_slice(z.as_slice()), side);
                let l1 = chol_factor(&xm).ok_or(ScalingError::NotInterior { block })?;
                let l2 = chol_factor(&zm).ok_or(ScalingError::NotInterior { block })?;
                let m = l2.transpose() * &l1;
                let svd = m.svd(true, true);
                let u = svd.u.as_ref().expect("svd with u");
                let vt = svd.v_t.as_ref().expect("svd with v_t");
                let mut sig_isqrt = DVector::zeros(side);
                for i in 0..side {
                    let s = svd.singular_values[i];
                    if s <= 0.0 {
                        return Err(ScalingError::NotInterior { block });
                    }
                    sig_isqrt[i] = 1.0 / s.sqrt();
                }
                // R = L1 V Sigma^{-1/2}, R^{-1} = Sigma^{-1/2} U' L2'
                let mut v = vt.transpose();
                for j in 0..side {
                    v.column_mut(j).scale_mut(sig_isqrt[j]);
                }
                let r = &l1 * v;
                let mut ut = u.transpose() * l2.transpose();
                for i in 0..side {
                    ut.row_mut(i).scale_mut(sig_isqrt[i]);
                }
                let r_inv = ut;
                let w_mat = &r * r.transpose();
                Ok(BlockScaling::Psd {
                    side,
                    r,
                    r_inv,
                    w_mat,
                    sigma: DVector::from_iterator(side, (0..side).map(|i| svd.singular_values[i])),
                })
            }
        }
    }

    /// Applies `P(w)` (the inverse of the scaled Hessian `H`).
    pub fn apply_hinv(&self, v: DVectorView<f64>, mut out: DVectorViewMut<f64>) {
        match self {
            BlockScaling::Free { .. } => out.copy_from(&v),
            BlockScaling::Nonneg { w2, .. } => {
                for i in 0..w2.len() {
                    out[i] = w2[i] * v[i];
                }
            }
            BlockScaling::Soc { w, .. } => {
                let r = soc_quad_rep(w, &DVector::from_column_slice(v.as_slice()));
                out.copy_from(&r);
            }
            BlockScaling::Psd { side, w_mat, .. } => {
                let m = mat_from_svec(&DVector::from_column_slice(v.as_slice()), *side);
                let res = w_mat * m * w_mat;
                out.copy_from(&svec_from_mat(&res));
            }
        }
    }

    /// Maps a primal-side vector into the scaled space, `P(w^{-1/2}) v`.
    pub fn scale_x(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            BlockScaling::Free { .. } => v.clone(),
            BlockScaling::Nonneg { w2, .. } => {
                DVector::from_fn(v.len(), |i, _| v[i] / w2[i].sqrt())
            }
            BlockScaling::Soc { w_half_inv, .. } => soc_quad_rep(w_half_inv, v),
            BlockScaling::Psd { side, r_inv, .. } => {
                let m = mat_from_svec(v, *side);
                svec_from_mat(&(r_inv * m * r_inv.transpose()))
            }
        }
    }

    /// Maps a dual-side vector into the scaled space, `P(w^{1/2}) v`.
    pub fn scale_z(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            BlockScaling::Free { .. } => v.clone(),
            BlockScaling::Nonneg { w2, .. } => {
                DVector::from_fn(v.len(), |i, _| v[i] * w2[i].sqrt())
            }
            BlockScaling::Soc { w_half, .. } => soc_quad_rep(w_half, v),
            BlockScaling::Psd { side, r, .. } => {
                let m = mat_from_svec(v, *side);
                svec_from_mat(&(r.transpose() * m * r))
            }
        }
    }

    /// Maps a scaled-space vector back to the dual side, inverse of `scale_z`.
    pub fn unscale_z(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            BlockScaling::Free { .. } => v.clone(),
            BlockScaling::Nonneg { w2, .. } => {
                DVector::from_fn(v.len(), |i, _| v[i] / w2[i].sqrt())
            }
            BlockScaling::Soc { w_half_inv, .. } => soc_quad_rep(w_half_inv, v),
            BlockScaling::Psd { side, r_inv, .. } => {
                let m = mat_from_svec(v, *side);
                svec_from_mat(&(r_inv.transpose() * m * r_inv))
            }
        }
    }

    /// Scaled point lambda with `lambda o lambda = ` scaled complementarity.
    pub fn lambda(&self) -> DVector<f64> {
        match self {
            BlockScaling::Free { dim } => DVector::zeros(*dim),
            BlockScaling::Nonneg { lambda, .. } => lambda.clone(),
            BlockScaling::Soc { lambda, .. } => lambda.clone(),
            BlockScaling::Psd { side, sigma, .. } => {
                let m = DMatrix::from_diagonal(sigma);
                debug_assert_eq!(m.nrows(), *side);
                svec_from_mat(&m)
            }
        }
    }

    /// Jordan product in the scaled space.
    pub fn jordan_product(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        match self {
            BlockScaling::Free { dim } => DVector::zeros(*dim),
            BlockScaling::Nonneg { .. } => a.component_mul(b),
            BlockScaling::Soc { .. } => soc_product(a, b),
            BlockScaling::Psd { side, .. } => {
                let am = mat_from_svec(a, *side);
                let bm = mat_from_svec(b, *side);
                let p = (&am * &bm + &bm * &am) * 0.5;
                svec_from_mat(&p)
            }
        }
    }

    /// Identity element of the block's Jordan algebra.
    pub fn jordan_identity(&self) -> DVector<f64> {
        match self {
            BlockScaling::Free { dim } => DVector::zeros(*dim),
            BlockScaling::Nonneg { w2, .. } => DVector::from_element(w2.len(), 1.0),
            BlockScaling::Soc { w, .. } => {
                let mut e = DVector::zeros(w.len());
                e[0] = 1.0;
                e
            }
            BlockScaling::Psd { side, .. } => svec_from_mat(&DMatrix::identity(*side, *side)),
        }
    }

    /// Solves `lambda o q = d` for `q` in the scaled space.
    pub fn lambda_divide(&self, d: &DVector<f64>) -> DVector<f64> {
        match self {
            BlockScaling::Free { dim } => DVector::zeros(*dim),
            BlockScaling::Nonneg { lambda, .. } => d.component_div(lambda),
            BlockScaling::Soc { lambda, .. } => {
                let l0 = lambda[0];
                let lbar = lambda.rows(1, lambda.len() - 1);
                let det = l0 * l0 - lbar.norm_squared();
                let dbar = d.rows(1, d.len() - 1);
                let q0 = (l0 * d[0] - lbar.dot(&dbar)) / det;
                let mut q = DVector::zeros(d.len());
                q[0] = q0;
                for i in 1..d.len() {
                    q[i] = (d[i] - q0 * lambda[i]) / l0;
                }
                q
            }
            BlockScaling::Psd { side, sigma, .. } => {
                let dm = mat_from_svec(d, *side);
                let q = DMatrix::from_fn(*side, *side, |i, j| {
                    2.0 * dm[(i, j)] / (sigma[i] + sigma[j])
                });
                svec_from_mat(&q)
            }
        }
    }

    /// Largest step `alpha` keeping `p + alpha dp` in the (closed) cone.
    pub fn step_to_boundary(&self, p: DVectorView<f64>, dp: DVectorView<f64>) -> f64 {
        match self {
            BlockScaling::Free { .. } => f64::INFINITY,
            BlockScaling::Nonneg { .. } => {
                let mut alpha = f64::INFINITY;
                for i in 0..p.len() {
                    if dp[i] < 0.0 {
                        alpha = alpha.min(-p[i] / dp[i]);
                    }
                }
                alpha
            }
            BlockScaling::Soc { .. } => soc_step_to_boundary(&p, &dp),
            BlockScaling::Psd { side, .. } => {
                let pm = mat_from_svec(&DVector::from_column_slice(p.as_slice()), *side);
                let dm = mat_from_svec(&DVector::from_column_slice(dp.as_slice()), *side);
                psd_step_to_boundary(&pm, &dm)
            }
        }
    }
}

fn soc_residual(x: &DVectorView<f64>) -> f64 {
    let tail = x.rows(1, x.len() - 1);
    x[0] * x[0] - tail.norm_squared()
}

/// Quadratic representation `P(u) v = 2 (u'v) u - det(u) J v`.
fn soc_quad_rep(u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let dim = u.len();
    let det = u[0] * u[0] - u.rows(1, dim - 1).norm_squared();
    let uv = u.dot(v);
    let mut out = DVector::zeros(dim);
    out[0] = 2.0 * uv * u[0] - det * v[0];
    for i in 1..dim {
        out[i] = 2.0 * uv * u[i] + det * v[i];
    }
    out
}

fn soc_product(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let dim = a.len();
    let mut out = DVector::zeros(dim);
    out[0] = a.dot(b);
    for i in 1..dim {
        out[i] = a[0] * b[i] + b[0] * a[i];
    }
    out
}

/// Jordan square root via the spectral decomposition of the cone point.
fn soc_sqrt(u: &DVector<f64>) -> DVector<f64> {
    let dim = u.len();
    let nbar = u.rows(1, dim - 1).norm();
    let l1 = (u[0] + nbar).max(0.0);
    let l2 = (u[0] - nbar).max(0.0);
    let (s1, s2) = (l1.sqrt(), l2.sqrt());
    let mut out = DVector::zeros(dim);
    out[0] = (s1 + s2) / 2.0;
    if nbar > 0.0 {
        let coef = (s1 - s2) / (2.0 * nbar);
        for i in 1..dim {
            out[i] = coef * u[i];
        }
    }
    out
}

fn soc_inv(u: &DVector<f64>) -> DVector<f64> {
    let dim = u.len();
    let det = u[0] * u[0] - u.rows(1, dim - 1).norm_squared();
    let mut out = DVector::zeros(dim);
    out[0] = u[0] / det;
    for i in 1..dim {
        out[i] = -u[i] / det;
    }
    out
}

fn soc_step_to_boundary(p: &DVectorView<f64>, dp: &DVectorView<f64>) -> f64 {
    // Smallest positive root of det(p + alpha dp) = 0 with nonnegative head;
    // while det > 0 the head cannot cross zero first.
    let dim = p.len();
    let det_d = dp[0] * dp[0] - dp.rows(1, dim - 1).norm_squared();
    let cross = p[0] * dp[0] - p.rows(1, dim - 1).dot(&dp.rows(1, dim - 1));
    let det_p = p[0] * p[0] - p.rows(1, dim - 1).norm_squared();
    let mut best = f64::INFINITY;
    let mut consider = |alpha: f64| {
        if alpha.is_finite() && alpha > 0.0 && p[0] + alpha * dp[0] >= -1e-14 && alpha < best {
            best = alpha;
        }
    };
    if det_d.abs() < 1e-300 {
        if cross < 0.0 {
            consider(-det_p / (2.0 * cross));
        }
    } else {
        let disc = cross * cross - det_d * det_p;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -(cross + cross.signum() * sq);
            if q != 0.0 {
                consider(q / det_d);
                consider(det_p / q);
            }
        }
    }
    best
}

fn psd_step_to_boundary(p: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let side = p.nrows();
    if let Some(l) = chol_factor(p) {
        // alpha limited by min eig of L^{-1} D L^{-T}
        let mut s = d.clone();
        l.solve_lower_triangular_mut(&mut s);
        let mut st = s.transpose();
        l.solve_lower_triangular_mut(&mut st);
        let sym = (&st + st.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let min_eig = eig.eigenvalues.min();
        if min_eig >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / min_eig
        }
    } else {
        // factorization failed near the boundary: conservative bisection
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        let psd_at = |alpha: f64| {
            let m = p + d * alpha;
            m.symmetric_eigen().eigenvalues.min() >= -1e-12
        };
        if !psd_at(0.0) {
            return 0.0;
        }
        while psd_at(hi) && hi < 1e8 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if psd_at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let _ = side;
        lo
    }
}

fn chol_factor(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    nalgebra::Cholesky::new(m.clone()).map(|c| c.l())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Cone;

    fn check_identities(cone: Cone, x: DVector<f64>, z: DVector<f64>) {
        let sc = BlockScaling::compute(&cone, x.as_view(), z.as_view(), 0).unwrap();
        // P(w) z = x
        let mut hz = DVector::zeros(x.len());
        sc.apply_hinv(z.as_view(), hz.rows_mut(0, x.len()));
        assert!(
            (&hz - &x).norm() < 1e-8 * (1.0 + x.norm()),
            "P(w)z != x: {hz:?} vs {x:?}"
        );
        // scale_x(x) = scale_z(z) = lambda
        let lx = sc.scale_x(&x);
        let lz = sc.scale_z(&z);
        let lam = sc.lambda();
        assert!((&lx - &lz).norm() < 1e-8 * (1.0 + lam.norm()), "lx {lx:?} lz {lz:?}");
        assert!((&lx - &lam).norm() < 1e-8 * (1.0 + lam.norm()), "lx {lx:?} lam {lam:?}");
        // unscale_z inverts scale_z
        let v = DVector::from_fn(x.len(), |i, _| 0.3 + 0.1 * i as f64);
        let roundtrip = sc.unscale_z(&sc.scale_z(&v));
        assert!((&roundtrip - &v).norm() < 1e-8 * (1.0 + v.norm()));
        // lambda_divide inverts jordan product
        let d = sc.jordan_product(&lam, &v);
        let q = sc.lambda_divide(&d);
        assert!((&q - &v).norm() < 1e-7 * (1.0 + v.norm()), "divide: {q:?} vs {v:?}");
    }

    #[test]
    fn nonneg_identities() {
        check_identities(
            Cone::Nonneg { dim: 3 },
            DVector::from_column_slice(&[1.0, 2.0, 0.5]),
            DVector::from_column_slice(&[0.7, 0.3, 2.0]),
        );
    }

    #[test]
    fn soc_identities() {
        check_identities(
            Cone::SecondOrder { dim: 4 },
            DVector::from_column_slice(&[2.0, 1.0, -0.5, 0.3]),
            DVector::from_column_slice(&[1.5, -0.2, 0.8, 0.1]),
        );
    }

    #[test]
    fn psd_identities() {
        // random-ish PD matrices
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.5, 0.2, -0.1, 0.2, 1.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, -0.2, 0.0, -0.2, 2.0, 0.4, 0.0, 0.4, 0.8]);
        check_identities(
            Cone::Psd { side: 3 },
            svec_from_mat(&a),
            svec_from_mat(&b),
        );
    }

    #[test]
    fn soc_boundary_step() {
        let p = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let d = DVector::from_column_slice(&[0.0, 1.0, 0.0]);
        let sc = BlockScaling::compute(
            &Cone::SecondOrder { dim: 3 },
            p.as_view(),
            p.as_view(),
            0,
        )
        .unwrap();
        let alpha = sc.step_to_boundary(p.as_view(), d.as_view());
        assert!((alpha - 1.0).abs() < 1e-12);
    }
}
