//! Presolve: zero-cone elimination and row-rank reduction of the
//! equality system.

use nalgebra::{DMatrix, DVector};

use crate::problem::{Cone, ConicProblem};

pub struct Presolved {
    pub problem: ConicProblem,
    /// Map from reduced variable index to original index.
    pub var_map: Vec<usize>,
    pub n_original: usize,
    /// Kept equality rows (indices into the original system).
    pub kept_rows: Vec<usize>,
    /// True when a removed dependent row was inconsistent with the kept ones.
    pub inconsistent: bool,
}

pub fn presolve(problem: &ConicProblem) -> Presolved {
    let n = problem.n_vars();

    // Drop zero-cone variables: they are fixed at 0.
    let mut var_map = Vec::with_capacity(n);
    let mut cones = Vec::new();
    let mut offset = 0;
    for cone in &problem.cones {
        let dim = cone.dim();
        if !matches!(cone, Cone::Zero { .. }) {
            var_map.extend(offset..offset + dim);
            cones.push(*cone);
        }
        offset += dim;
    }

    let a = problem.equality_lhs.select_columns(var_map.iter());
    let c = DVector::from_iterator(var_map.len(), var_map.iter().map(|&j| problem.objective[j]));
    let b = problem.equality_rhs.clone();

    let (kept_rows, inconsistent) = independent_rows(&a, &b);
    let a_red = a.select_rows(kept_rows.iter());
    let b_red = DVector::from_iterator(kept_rows.len(), kept_rows.iter().map(|&i| b[i]));

    Presolved {
        problem: ConicProblem {
            objective: c,
            objective_offset: problem.objective_offset,
            equality_lhs: a_red,
            equality_rhs: b_red,
            cones,
        },
        var_map,
        n_original: n,
        kept_rows,
        inconsistent,
    }
}

/// Greedy modified Gram-Schmidt selection of a maximal independent row set,
/// with a consistency check on the discarded rows.
fn independent_rows(a: &DMatrix<f64>, b: &DVector<f64>) -> (Vec<usize>, bool) {
    let m = a.nrows();
    let n = a.ncols();
    if m == 0 {
        return (Vec::new(), false);
    }
    let mut rows: Vec<DVector<f64>> = (0..m).map(|i| a.row(i).transpose()).collect();
    let mut rhs: Vec<f64> = (0..m).map(|i| b[i]).collect();
    let scale = rows
        .iter()
        .map(|r| r.norm())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let tol = 1e-12 * scale;
    let mut kept = Vec::new();
    let mut used = vec![false; m];
    while kept.len() < n.min(m) {
        // Pick the remaining row with the largest residual norm.
        let mut best = None;
        let mut best_norm = tol;
        for i in 0..m {
            if used[i] {
                continue;
            }
            let norm = rows[i].norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        used[i] = true;
        kept.push(i);
        let q = rows[i].clone() / best_norm;
        let qb = rhs[i] / best_norm;
        for j in 0..m {
            if used[j] {
                continue;
            }
            let proj = q.dot(&rows[j]);
            rows[j] -= &q * proj;
            rhs[j] -= qb * proj;
        }
    }
    kept.sort_unstable();
    // Discarded rows are (numerically) dependent; their residual rhs must
    // vanish for the system to be consistent.
    let mut inconsistent = false;
    let rhs_scale = b.norm().max(1.0);
    for i in 0..m {
        if !used[i] && rhs[i].abs() > 1e-8 * rhs_scale {
            inconsistent = true;
        }
    }
    (kept, inconsistent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_dependent_rows() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let (kept, inconsistent) = independent_rows(&a, &b);
        assert_eq!(kept.len(), 2);
        assert!(!inconsistent);

        let b_bad = DVector::from_column_slice(&[1.0, 2.0, 4.0]);
        let (kept, inconsistent) = independent_rows(&a, &b_bad);
        assert_eq!(kept.len(), 2);
        assert!(inconsistent);
    }
}
