//! Incremental construction of conic problems, including the reduction of
//! convex quadratics to second-order-cone epigraphs.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::problem::{Cone, ConicProblem};
use crate::svec::svec_dim;

/// A contiguous variable block returned by the builder.
#[derive(Debug, Clone, Copy)]
pub struct BlockRef {
    pub start: usize,
    pub dim: usize,
}

impl BlockRef {
    pub fn index(&self, i: usize) -> usize {
        debug_assert!(i < self.dim);
        self.start + i
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.start..self.start + self.dim
    }
}

/// Sparse affine expression `sum coef_i x_i + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(index: usize) -> Self {
        LinExpr {
            terms: vec![(index, 1.0)],
            constant: 0.0,
        }
    }

    pub fn term(mut self, index: usize, coef: f64) -> Self {
        self.terms.push((index, coef));
        self
    }

    pub fn plus(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("quadratic form is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("linear term is not in the range of the quadratic form (residual {0:.3e})")]
    LinearNotInRange(f64),
    #[error("dimension mismatch between quadratic form and variable list")]
    DimensionMismatch,
}

/// A convex quadratic `q(x) = x'Qx - 2 b'x + c` compressed to the factored
/// form `q(x) = ||L x - shift||^2 + offset` with `L` of full row rank, so
/// downstream cone sizes do not grow with the number of terms accumulated
/// into `Q`.
#[derive(Debug, Clone)]
pub struct CompressedQuadratic {
    pub factor: DMatrix<f64>,
    pub shift: DVector<f64>,
    pub offset: f64,
}

impl CompressedQuadratic {
    pub fn from_form(q: &DMatrix<f64>, b: &DVector<f64>, c: f64) -> Result<Self, QuadError> {
        let d = q.nrows();
        if q.ncols() != d || b.len() != d {
            return Err(QuadError::DimensionMismatch);
        }
        let sym = (q + q.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let max_eig = eig.eigenvalues.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let cut = 1e-12 * max_eig.max(1.0);
        let min_eig = eig.eigenvalues.min();
        if min_eig < -cut {
            return Err(QuadError::NotPsd(min_eig));
        }
        let keep: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > cut).collect();
        let rank = keep.len();
        let mut factor = DMatrix::zeros(rank, d);
        let mut shift = DVector::zeros(rank);
        let mut b_range = DVector::zeros(d);
        for (r, &i) in keep.iter().enumerate() {
            let lam = eig.eigenvalues[i];
            let v = eig.eigenvectors.column(i);
            let s = lam.sqrt();
            for j in 0..d {
                factor[(r, j)] = s * v[j];
            }
            let vb = v.dot(b);
            shift[r] = vb / s;
            b_range += v * vb;
        }
        let resid = (b - &b_range).norm();
        if resid > 1e-8 * b.norm().max(1.0) {
            return Err(QuadError::LinearNotInRange(resid));
        }
        let offset = c - shift.norm_squared();
        Ok(CompressedQuadratic {
            factor,
            shift,
            offset,
        })
    }

    pub fn rank(&self) -> usize {
        self.factor.nrows()
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        (&self.factor * x - &self.shift).norm_squared() + self.offset
    }
}

/// Builds `min c'x st Ax = b, x in K` incrementally.
#[derive(Debug, Default)]
pub struct ProblemBuilder {
    cones: Vec<Cone>,
    n: usize,
    objective: Vec<(usize, f64)>,
    objective_offset: f64,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_block(&mut self, cone: Cone) -> BlockRef {
        let dim = cone.dim();
        let start = self.n;
        self.n += dim;
        self.cones.push(cone);
        BlockRef { start, dim }
    }

    pub fn free_block(&mut self, dim: usize) -> BlockRef {
        self.push_block(Cone::Free { dim })
    }

    pub fn zero_block(&mut self, dim: usize) -> BlockRef {
        self.push_block(Cone::Zero { dim })
    }

    pub fn nonneg_block(&mut self, dim: usize) -> BlockRef {
        self.push_block(Cone::Nonneg { dim })
    }

    pub fn soc_block(&mut self, dim: usize) -> BlockRef {
        self.push_block(Cone::SecondOrder { dim })
    }

    pub fn psd_block(&mut self, side: usize) -> BlockRef {
        let r = self.push_block(Cone::Psd { side });
        debug_assert_eq!(r.dim, svec_dim(side));
        r
    }

    pub fn add_objective_term(&mut self, index: usize, coef: f64) {
        self.objective.push((index, coef));
    }

    pub fn add_objective_offset(&mut self, value: f64) {
        self.objective_offset += value;
    }

    /// Adds the equality `expr = rhs`.
    pub fn eq_row(&mut self, expr: LinExpr, rhs: f64) {
        self.rows.push((expr.terms, rhs - expr.constant));
    }

    /// Adds the rotated-cone encoding of `quad(x_vars) <= head`, where
    /// `vars` lists the global indices the quadratic's coordinates map to.
    pub fn quad_upper_bound(
        &mut self,
        quad: &CompressedQuadratic,
        vars: &[usize],
        head: LinExpr,
    ) -> Result<(), QuadError> {
        if quad.factor.ncols() != vars.len() {
            return Err(QuadError::DimensionMismatch);
        }
        let r = quad.rank();
        let soc = self.soc_block(r + 2);
        // ||v||^2 <= s  <=>  (s+1)/2 >= || (v, (s-1)/2) ||, s = head - offset
        let half_head = |expr: &LinExpr, scale: f64| -> Vec<(usize, f64)> {
            expr.terms.iter().map(|&(i, c)| (i, c * scale)).collect()
        };
        // head row for u0
        let mut terms = vec![(soc.index(0), 1.0)];
        terms.extend(half_head(&head, -0.5));
        self.rows
            .push((terms, (head.constant - quad.offset + 1.0) / 2.0));
        // tail rows u_i = (Lx - z)_i
        for i in 0..r {
            let mut terms = vec![(soc.index(1 + i), 1.0)];
            for (j, &v) in vars.iter().enumerate() {
                let coef = quad.factor[(i, j)];
                if coef != 0.0 {
                    terms.push((v, -coef));
                }
            }
            self.rows.push((terms, -quad.shift[i]));
        }
        // last row u_{r+1} = (s-1)/2
        let mut terms = vec![(soc.index(r + 1), 1.0)];
        terms.extend(half_head(&head, -0.5));
        self.rows
            .push((terms, (head.constant - quad.offset - 1.0) / 2.0));
        Ok(())
    }

    /// Adds a free epigraph variable `t` with `quad(x_vars) <= t`, returning
    /// the index of `t` (its objective coefficient is not set here).
    pub fn quad_epigraph(
        &mut self,
        quad: &CompressedQuadratic,
        vars: &[usize],
    ) -> Result<usize, QuadError> {
        let t = self.free_block(1).start;
        self.quad_upper_bound(quad, vars, LinExpr::var(t))?;
        Ok(t)
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn build(self) -> ConicProblem {
        let mut c = DVector::zeros(self.n);
        for (i, v) in self.objective {
            c[i] += v;
        }
        let m = self.rows.len();
        let mut a = DMatrix::zeros(m, self.n);
        let mut b = DVector::zeros(m);
        for (ri, (terms, rhs)) in self.rows.into_iter().enumerate() {
            for (i, v) in terms {
                a[(ri, i)] += v;
            }
            b[ri] = rhs;
        }
        ConicProblem {
            objective: c,
            objective_offset: self.objective_offset,
            equality_lhs: a,
            equality_rhs: b,
            cones: self.cones,
        }
    }
}
