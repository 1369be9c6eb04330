use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::svec::svec_dim;

/// One block of the cone product partitioning the decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cone {
    /// Variables pinned to zero.
    Zero { dim: usize },
    /// Unconstrained variables.
    Free { dim: usize },
    /// Entrywise nonnegative block.
    Nonneg { dim: usize },
    /// Second-order cone `{ (t, u) : ||u|| <= t }`.
    SecondOrder { dim: usize },
    /// Real symmetric PSD cone, svec-packed (`side*(side+1)/2` variables).
    Psd { side: usize },
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero { dim } | Cone::Free { dim } | Cone::Nonneg { dim } => dim,
            Cone::SecondOrder { dim } => dim,
            Cone::Psd { side } => svec_dim(side),
        }
    }

    /// Barrier degree contributed to the central-path parameter.
    pub fn degree(&self) -> usize {
        match *self {
            Cone::Zero { .. } | Cone::Free { .. } => 0,
            Cone::Nonneg { dim } => dim,
            Cone::SecondOrder { .. } => 1,
            Cone::Psd { side } => side,
        }
    }
}

/// A conic program `min c'x  s.t.  A x = b, x in K`.
///
/// Serializes to a self-describing JSON document (matrices as nested row
/// arrays) so failing instances can be dumped and replayed offline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConicProblem {
    /// Linear objective coefficients over the decision vector.
    #[serde(with = "vector_serde")]
    pub objective: DVector<f64>,
    /// Constant added to `c'x` when reporting objective values.
    pub objective_offset: f64,
    /// Equality system left-hand side.
    #[serde(with = "matrix_serde")]
    pub equality_lhs: DMatrix<f64>,
    /// Equality system right-hand side.
    #[serde(with = "vector_serde")]
    pub equality_rhs: DVector<f64>,
    /// Ordered cone blocks partitioning `x`.
    pub cones: Vec<Cone>,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cone dimensions sum to {cones}, but the decision vector has length {n}")]
    ConeDimensionMismatch { cones: usize, n: usize },
    #[error("equality system is {rows}x{cols}, expected {m} rows and {n} columns")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        m: usize,
        n: usize,
    },
    #[error("problem data contains a non-finite entry")]
    NonFinite,
}

impl ConicProblem {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.equality_rhs.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let n = self.n_vars();
        let cone_dim: usize = self.cones.iter().map(Cone::dim).sum();
        if cone_dim != n {
            return Err(ProblemError::ConeDimensionMismatch { cones: cone_dim, n });
        }
        let (rows, cols) = self.equality_lhs.shape();
        if rows != self.equality_rhs.len() || cols != n {
            return Err(ProblemError::ShapeMismatch {
                rows,
                cols,
                m: self.equality_rhs.len(),
                n,
            });
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.equality_lhs.iter().all(|v| v.is_finite())
            && self.equality_rhs.iter().all(|v| v.is_finite())
            && self.objective_offset.is_finite();
        if !finite {
            return Err(ProblemError::NonFinite);
        }
        Ok(())
    }

    /// JSON debug dump for offline reproduction of solver failures.
    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("conic problem serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIters,
}

/// Primal/dual feasibility and gap residuals at the returned point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x_star: DVector<f64>,
    pub y_star: DVector<f64>,
    pub status: SolveStatus,
    pub kkt_residuals: KktResiduals,
    pub iterations: usize,
    /// `c'x + offset` at the returned primal point.
    pub objective_value: f64,
}

mod vector_serde {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let data = Vec::<f64>::deserialize(d)?;
        Ok(DVector::from_vec(data))
    }
}

mod matrix_serde {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}
