use nalgebra::{Complex, DMatrix, DVector};

use super::{invalid, ModelError};

/// Transmit precoder: an `n_tx x (K+1)` complex matrix whose column 0
/// precodes the common stream and columns `1..=K` the private streams.
/// Under SDMA column 0 is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    columns: DMatrix<Complex<f64>>,
}

impl Precoder {
    pub fn new(columns: DMatrix<Complex<f64>>) -> Self {
        Precoder { columns }
    }

    pub fn zeros(n_tx: usize, n_streams: usize) -> Self {
        Precoder {
            columns: DMatrix::zeros(n_tx, n_streams),
        }
    }

    pub fn n_tx(&self) -> usize {
        self.columns.nrows()
    }

    pub fn n_streams(&self) -> usize {
        self.columns.ncols()
    }

    pub fn n_users(&self) -> usize {
        self.n_streams() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex<f64>> {
        &self.columns
    }

    pub fn common(&self) -> DVector<Complex<f64>> {
        self.columns.column(0).into_owned()
    }

    pub fn private(&self, user: usize) -> DVector<Complex<f64>> {
        self.columns.column(1 + user).into_owned()
    }

    /// `P P^H`.
    pub fn covariance(&self) -> DMatrix<Complex<f64>> {
        &self.columns * self.columns.adjoint()
    }

    pub fn total_power(&self) -> f64 {
        self.columns.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn row_powers(&self) -> Vec<f64> {
        (0..self.n_tx())
            .map(|r| self.columns.row(r).iter().map(|c| c.norm_sqr()).sum())
            .collect()
    }

    /// Largest deviation of any row power from `power_total / n_tx`.
    pub fn max_row_power_deviation(&self, power_total: f64) -> f64 {
        let target = power_total / self.n_tx() as f64;
        self.row_powers()
            .iter()
            .map(|&p| (p - target).abs())
            .fold(0.0, f64::max)
    }

    /// Rescales each row to the per-antenna power target. Rows with no
    /// energy get an arbitrary fixed direction so the output is always
    /// exactly feasible.
    pub fn project_rows(&self, power_total: f64) -> Precoder {
        let n_tx = self.n_tx();
        let n_streams = self.n_streams();
        let target = power_total / n_tx as f64;
        let mut out = self.columns.clone();
        for r in 0..n_tx {
            let power: f64 = out.row(r).iter().map(|c| c.norm_sqr()).sum();
            if power > 1e-300 {
                let s = (target / power).sqrt();
                for j in 0..n_streams {
                    out[(r, j)] *= Complex::new(s, 0.0);
                }
            } else {
                // pick the last column so an SDMA zero common column stays zero
                out[(r, n_streams - 1)] = Complex::new(target.sqrt(), 0.0);
            }
        }
        Precoder::new(out)
    }

    /// Column-major complex stacking `[p_0; p_1; ...]`.
    pub fn to_stacked(&self) -> DVector<Complex<f64>> {
        let n = self.n_tx() * self.n_streams();
        DVector::from_iterator(n, self.columns.iter().copied())
    }

    pub fn from_stacked(stacked: &DVector<Complex<f64>>, n_tx: usize) -> Self {
        let n_streams = stacked.len() / n_tx;
        Precoder {
            columns: DMatrix::from_iterator(n_tx, n_streams, stacked.iter().copied()),
        }
    }

    /// Power fractions (common, per-user private) relative to total power.
    pub fn power_split(&self) -> (f64, Vec<f64>) {
        let total = self.total_power().max(1e-300);
        let common = self.columns.column(0).norm_squared() / total;
        let private = (0..self.n_users())
            .map(|k| self.columns.column(1 + k).norm_squared() / total)
            .collect();
        (common, private)
    }
}

/// Common-stream rate shares, one nonnegative entry per user; all zero
/// under SDMA.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonRateShares {
    shares: Vec<f64>,
}

impl CommonRateShares {
    pub fn new(shares: Vec<f64>) -> Result<Self, ModelError> {
        if shares.iter().any(|&s| s < 0.0) {
            return Err(invalid("common rate shares must be nonnegative"));
        }
        Ok(CommonRateShares { shares })
    }

    pub fn zeros(n_users: usize) -> Self {
        CommonRateShares {
            shares: vec![0.0; n_users],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.shares
    }

    pub fn sum(&self) -> f64 {
        self.shares.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_projection_is_exact_and_deterministic() {
        let mut m = DMatrix::zeros(3, 2);
        m[(0, 0)] = Complex::new(1.0, 2.0);
        m[(0, 1)] = Complex::new(-0.5, 0.0);
        m[(1, 1)] = Complex::new(0.0, 3.0);
        // row 2 left empty on purpose
        let p = Precoder::new(m).project_rows(12.0);
        for &rp in &p.row_powers() {
            assert!((rp - 4.0).abs() < 1e-12);
        }
        assert!((p.total_power() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn stacking_roundtrip() {
        let m = DMatrix::from_fn(2, 3, |i, j| Complex::new(i as f64, j as f64));
        let p = Precoder::new(m);
        let s = p.to_stacked();
        let back = Precoder::from_stacked(&s, 2);
        assert_eq!(p, back);
    }

    #[test]
    fn shares_must_be_nonnegative() {
        assert!(CommonRateShares::new(vec![0.1, -0.2]).is_err());
        assert!(CommonRateShares::new(vec![0.0, 0.4]).is_ok());
    }
}
