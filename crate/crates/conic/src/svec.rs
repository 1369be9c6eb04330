//! Symmetric vectorization with the scaled (svec) convention.
//!
//! A symmetric `s x s` matrix is packed column-major over its lower
//! triangle with off-diagonal entries multiplied by sqrt(2), so that
//! `<svec(A), svec(B)> = trace(A B)` for symmetric `A`, `B`.

use nalgebra::{DMatrix, DVector};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Packed length of the lower triangle of an `s x s` symmetric matrix.
pub fn svec_dim(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Packs the lower triangle of `m` (assumed symmetric) into svec order.
pub fn svec_from_mat(m: &DMatrix<f64>) -> DVector<f64> {
    let s = m.nrows();
    debug_assert_eq!(s, m.ncols());
    let mut v = DVector::zeros(svec_dim(s));
    let mut k = 0;
    for j in 0..s {
        for i in j..s {
            v[k] = if i == j { m[(i, j)] } else { SQRT2 * m[(i, j)] };
            k += 1;
        }
    }
    v
}

/// Inverse of [`svec_from_mat`].
pub fn mat_from_svec(v: &DVector<f64>, side: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_dim(side));
    let mut m = DMatrix::zeros(side, side);
    let mut k = 0;
    for j in 0..side {
        for i in j..side {
            if i == j {
                m[(i, j)] = v[k];
            } else {
                let x = v[k] / SQRT2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Flat svec index of entry `(i, j)` with `i >= j` in an `s x s` matrix.
pub fn svec_index(side: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < side);
    // offset of column j = sum_{t<j} (side - t)
    j * side - j * j.saturating_sub(1) / 2 + (i - j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_inner_product() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 4.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 2.0, 0.0, -2.0, 1.0, 2.0, 1.0, 0.0]);
        let va = svec_from_mat(&a);
        let vb = svec_from_mat(&b);
        assert_eq!(mat_from_svec(&va, 3), a);
        let dot = va.dot(&vb);
        let tr = (&a * &b).trace();
        assert!((dot - tr).abs() < 1e-12);
    }

    #[test]
    fn index_matches_packing_order() {
        let s = 5;
        let mut k = 0;
        for j in 0..s {
            for i in j..s {
                assert_eq!(svec_index(s, i, j), k);
                k += 1;
            }
        }
    }
}
