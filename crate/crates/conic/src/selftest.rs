//! Randomized solver verification instances with exactly known optima.
//!
//! Instances are built backwards from a complementary primal-dual pair:
//! pick `x*` in `K` and `z*` in `K` with `x* o z* = 0`, a multiplier `y*`
//! and a random `A`, then set `b = A x*` and `c = A'y* + z*`. Feasibility
//! plus zero duality gap certify `c'x*` as the exact optimal value, which
//! makes these suitable as an independent oracle for the interior-point
//! path.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

use crate::problem::{Cone, ConicProblem};
use crate::svec::{svec_dim, svec_from_mat};

pub struct GeneratedInstance {
    pub problem: ConicProblem,
    pub optimal_value: f64,
    pub kind: &'static str,
}

/// Deterministic instance for a seed; cycles through LP, SOCP, SDP and
/// mixed cone layouts. Dimensions stay at or below 12.
pub fn known_optimum_instance(seed: u64) -> GeneratedInstance {
    let mut rng = StdRng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
    let kind = match seed % 4 {
        0 => "lp",
        1 => "socp",
        2 => "sdp",
        _ => "mixed",
    };
    let mut cones: Vec<Cone> = Vec::new();
    match kind {
        "lp" => {
            cones.push(Cone::Nonneg {
                dim: rng.random_range(2..=6),
            });
            if rng.random_bool(0.5) {
                cones.push(Cone::Free {
                    dim: rng.random_range(1..=2),
                });
            }
        }
        "socp" => {
            cones.push(Cone::SecondOrder {
                dim: rng.random_range(3..=5),
            });
            cones.push(Cone::Nonneg {
                dim: rng.random_range(1..=3),
            });
        }
        "sdp" => {
            cones.push(Cone::Psd {
                side: rng.random_range(2..=4),
            });
        }
        _ => {
            cones.push(Cone::SecondOrder { dim: 3 });
            cones.push(Cone::Psd { side: 2 });
            cones.push(Cone::Nonneg { dim: 2 });
        }
    }
    let n: usize = cones.iter().map(Cone::dim).sum();

    // Complementary strictly-feasible-or-boundary pair per block.
    let mut x_star = DVector::zeros(n);
    let mut z_star = DVector::zeros(n);
    let mut off = 0;
    for cone in &cones {
        let dim = cone.dim();
        match *cone {
            Cone::Free { .. } | Cone::Zero { .. } => {
                for i in 0..dim {
                    x_star[off + i] = rng.random_range(-1.0..1.0);
                }
            }
            Cone::Nonneg { .. } => {
                for i in 0..dim {
                    if rng.random_bool(0.5) {
                        x_star[off + i] = rng.random_range(0.2..2.0);
                        z_star[off + i] = 0.0;
                    } else {
                        x_star[off + i] = 0.0;
                        z_star[off + i] = rng.random_range(0.2..2.0);
                    }
                }
            }
            Cone::SecondOrder { .. } => {
                // x on the boundary, z on the opposite boundary ray
                let mut u = DVector::zeros(dim - 1);
                for i in 0..dim - 1 {
                    u[i] = rng.random_range(-1.0..1.0);
                }
                if u.norm() < 1e-3 {
                    u[0] = 0.5;
                }
                let a = u.norm();
                let s = rng.random_range(0.2..1.5);
                x_star[off] = a;
                z_star[off] = s * a;
                for i in 0..dim - 1 {
                    x_star[off + 1 + i] = u[i];
                    z_star[off + 1 + i] = -s * u[i];
                }
            }
            Cone::Psd { side } => {
                // orthogonal basis from QR of a random matrix
                let g = DMatrix::from_fn(side, side, |_, _| rng.random_range(-1.0..1.0_f64));
                let q = g.qr().q();
                let mut xm = DMatrix::zeros(side, side);
                let mut zm = DMatrix::zeros(side, side);
                for k in 0..side {
                    let v = q.column(k);
                    let outer = v * v.transpose();
                    if rng.random_bool(0.5) {
                        xm += outer * rng.random_range(0.2..2.0);
                    } else {
                        zm += outer * rng.random_range(0.2..2.0);
                    }
                }
                x_star
                    .rows_mut(off, svec_dim(side))
                    .copy_from(&svec_from_mat(&xm));
                z_star
                    .rows_mut(off, svec_dim(side))
                    .copy_from(&svec_from_mat(&zm));
            }
        }
        off += dim;
    }

    let m = rng.random_range(1..=n.min(4));
    let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0_f64));
    let y_star = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    let b = &a * &x_star;
    let c = a.tr_mul(&y_star) + &z_star;
    let optimal_value = c.dot(&x_star);

    GeneratedInstance {
        problem: ConicProblem {
            objective: c,
            objective_offset: 0.0,
            equality_lhs: a,
            equality_rhs: b,
            cones,
        },
        optimal_value,
        kind,
    }
}
