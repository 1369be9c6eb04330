//! Real embedding of complex Hermitian matrices.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("matrix is not Hermitian: max asymmetry {max_dev:.3e} exceeds {tol:.3e}")]
    NotHermitian { max_dev: f64, tol: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

const HERMITIAN_TOL: f64 = 1e-10;

/// Embeds a complex Hermitian `n x n` matrix as the real symmetric
/// `2n x 2n` matrix `[[Re H, -Im H], [Im H, Re H]]`.
///
/// The embedding is linear and injective; `H` is PSD iff the embedding is
/// PSD, the eigenvalues of `H` appear with doubled multiplicity, and the
/// trace doubles.
pub fn embed_hermitian(h: &DMatrix<Complex<f64>>) -> Result<DMatrix<f64>, EmbedError> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(EmbedError::NotSquare {
            rows: n,
            cols: h.ncols(),
        });
    }
    let scale = h.iter().map(|c| c.norm()).fold(0.0_f64, f64::max).max(1.0);
    let mut max_dev = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let dev = (h[(i, j)] - h[(j, i)].conj()).norm();
            max_dev = max_dev.max(dev);
        }
    }
    let tol = HERMITIAN_TOL * scale;
    if max_dev > tol {
        return Err(EmbedError::NotHermitian { max_dev, tol });
    }
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            // symmetrize away round-off before embedding
            let v = (h[(i, j)] + h[(j, i)].conj()) * Complex::new(0.5, 0.0);
            out[(i, j)] = v.re;
            out[(n + i, n + j)] = v.re;
            out[(i, n + j)] = -v.im;
            out[(n + i, j)] = v.im;
        }
    }
    Ok(out)
}

/// Recovers the Hermitian matrix from a (possibly perturbed) `2n x 2n`
/// embedding by averaging the two real blocks and antisymmetrizing the
/// imaginary ones. Exact inverse of [`embed_hermitian`] on its image.
pub fn hermitian_from_embedding(x: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    let n = x.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
        let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
        // enforce Hermitian symmetry of the result
        let re_t = 0.5 * (x[(j, i)] + x[(n + j, n + i)]);
        let im_t = 0.5 * (x[(n + j, i)] - x[(j, n + i)]);
        Complex::new(0.5 * (re + re_t), 0.5 * (im - im_t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_embeds_to_identity() {
        let h = DMatrix::<Complex<f64>>::identity(3, 3);
        let e = embed_hermitian(&h).unwrap();
        assert_eq!(e, DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn pauli_y_eigenvalues_double() {
        // [[0, -i], [i, 0]] has eigenvalues +-1
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(0.0, 0.0),
                Complex::new(0.0, -1.0),
                Complex::new(0.0, 1.0),
                Complex::new(0.0, 0.0),
            ],
        );
        let e = embed_hermitian(&h).unwrap();
        let mut eigs: Vec<f64> = e.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(f64::total_cmp);
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in eigs.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
                Complex::new(2.0, 0.0),
                Complex::new(0.0, 0.0),
            ],
        );
        assert!(embed_hermitian(&h).is_err());
    }

    #[test]
    fn roundtrip_is_exact() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(2.0, 0.0),
                Complex::new(0.5, -1.5),
                Complex::new(0.5, 1.5),
                Complex::new(-1.0, 0.0),
            ],
        );
        let e = embed_hermitian(&h).unwrap();
        let back = hermitian_from_embedding(&e);
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - back[(i, j)]).norm() < 1e-15);
            }
        }
    }
}
