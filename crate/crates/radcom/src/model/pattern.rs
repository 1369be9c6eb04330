use nalgebra::{Complex, DMatrix, DVector};

use super::{invalid, ModelError, Precoder};

/// Uniform-linear-array response at direction `theta` (radians), with the
/// phase progression `2 pi n spacing sin(theta)` across antennas.
pub fn steering_vector(theta: f64, n_tx: usize, spacing: f64) -> DVector<Complex<f64>> {
    let phase = 2.0 * std::f64::consts::PI * spacing * theta.sin();
    DVector::from_fn(n_tx, |n, _| Complex::from_polar(1.0, phase * n as f64))
}

/// Desired-beampattern specification over an azimuth grid.
///
/// `pattern_scale` is the current value of the free scaling factor applied
/// to `desired` inside the squared-error metric; solvers update it, the
/// metric uses whatever is stored here.
#[derive(Debug, Clone)]
pub struct BeampatternSpec {
    /// Strictly increasing grid in radians within [-pi/2, pi/2].
    pub angles: Vec<f64>,
    pub desired: Vec<f64>,
    pub pattern_scale: f64,
}

impl BeampatternSpec {
    pub fn new(angles: Vec<f64>, desired: Vec<f64>, pattern_scale: f64) -> Result<Self, ModelError> {
        if angles.len() != desired.len() || angles.is_empty() {
            return Err(invalid("angle and desired grids must match and be nonempty"));
        }
        let half_pi = std::f64::consts::FRAC_PI_2 + 1e-12;
        if angles.iter().any(|a| a.abs() > half_pi) {
            return Err(invalid("grid angles must lie within [-pi/2, pi/2]"));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("grid angles must be strictly increasing"));
        }
        if !desired.iter().any(|&d| d > 0.0) || desired.iter().any(|&d| d < 0.0) {
            return Err(invalid(
                "desired pattern must be nonnegative with at least one positive entry",
            ));
        }
        if !(pattern_scale > 0.0) {
            return Err(invalid("pattern_scale must be positive"));
        }
        Ok(BeampatternSpec {
            angles,
            desired,
            pattern_scale,
        })
    }

    /// 1-degree grid over [-90, 90].
    pub fn default_grid_deg() -> Vec<f64> {
        (-90..=90).map(|d| (d as f64).to_radians()).collect()
    }

    /// Rectangular mainlobe: 1 within `halfwidth_deg` of the target, 0
    /// elsewhere.
    pub fn rectangular(target_deg: f64, halfwidth_deg: f64) -> Self {
        let angles = Self::default_grid_deg();
        let desired = angles
            .iter()
            .map(|&a| {
                if (a.to_degrees() - target_deg).abs() <= halfwidth_deg + 1e-9 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        BeampatternSpec {
            angles,
            desired,
            pattern_scale: 1.0,
        }
    }

    /// The pattern of an array focused on the target direction,
    /// `|a(theta0)^H a(theta)|^2 / n_tx^2`, normalized to unit peak. This
    /// shape is achievable exactly by a feasible covariance, so the
    /// squared-error floor is zero.
    pub fn array_matched(target_deg: f64, n_tx: usize, spacing: f64) -> Self {
        let angles = Self::default_grid_deg();
        let a0 = steering_vector(target_deg.to_radians(), n_tx, spacing);
        let desired = angles
            .iter()
            .map(|&a| {
                let v = steering_vector(a, n_tx, spacing);
                let ip = v.dotc(&a0).norm();
                (ip * ip) / (n_tx as f64 * n_tx as f64)
            })
            .collect();
        BeampatternSpec {
            angles,
            desired,
            pattern_scale: 1.0,
        }
    }

    pub fn with_scale(mut self, pattern_scale: f64) -> Self {
        self.pattern_scale = pattern_scale;
        self
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Steering vectors for the whole grid, one column per grid point.
    pub fn steering_matrix(&self, n_tx: usize, spacing: f64) -> DMatrix<Complex<f64>> {
        let mut m = DMatrix::zeros(n_tx, self.angles.len());
        for (j, &theta) in self.angles.iter().enumerate() {
            m.column_mut(j).copy_from(&steering_vector(theta, n_tx, spacing));
        }
        m
    }
}

/// Transmit beampattern gain `a(theta)^H P P^H a(theta)`.
pub fn beampattern_gain(precoder: &Precoder, theta: f64, spacing: f64) -> f64 {
    let a = steering_vector(theta, precoder.n_tx(), spacing);
    let mut total = 0.0;
    for j in 0..precoder.n_streams() {
        let ip = precoder.matrix().column(j).dotc(&a);
        total += ip.norm_sqr();
    }
    total
}

/// Gains over the grid of `spec`.
pub fn grid_gains(precoder: &Precoder, spec: &BeampatternSpec, spacing: f64) -> Vec<f64> {
    spec.angles
        .iter()
        .map(|&theta| beampattern_gain(precoder, theta, spacing))
        .collect()
}

/// Beampattern squared error against the scaled desired pattern,
/// `sum_m (scale * desired_m - gain_m)^2` using `spec.pattern_scale`.
pub fn bse(precoder: &Precoder, spec: &BeampatternSpec, spacing: f64) -> f64 {
    grid_gains(precoder, spec, spacing)
        .iter()
        .zip(&spec.desired)
        .map(|(&g, &d)| {
            let r = spec.pattern_scale * d - g;
            r * r
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn steering_at_broadside_is_all_ones() {
        let a = steering_vector(0.0, 4, 0.5);
        for n in 0..4 {
            assert!((a[n] - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_at_endfire_alternates_sign() {
        let a = steering_vector(std::f64::consts::FRAC_PI_2, 4, 0.5);
        let expect = [c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)];
        for n in 0..4 {
            assert!((a[n] - expect[n]).norm() < 1e-12, "n={n}: {}", a[n]);
        }
    }

    #[test]
    fn steering_quarter_phase() {
        // 2 pi * 0.5 * sin(pi/6) = pi/2 per antenna step
        let a = steering_vector(std::f64::consts::FRAC_PI_6, 2, 0.5);
        assert!((a[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((a[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn isotropic_covariance_gain_is_total_power() {
        // P with P P^H = (Pt/Nt) I
        let pt = 100.0;
        let n_tx = 4;
        let scale = (pt / n_tx as f64).sqrt();
        let mut m = DMatrix::zeros(n_tx, n_tx);
        for i in 0..n_tx {
            m[(i, i)] = c(scale, 0.0);
        }
        let p = Precoder::new(m);
        for theta in [-1.2, -0.3, 0.0, 0.7] {
            assert!((beampattern_gain(&p, theta, 0.5) - pt).abs() < 1e-9);
        }
    }

    #[test]
    fn focused_column_gain_at_focus() {
        let pt = 100.0;
        let n_tx = 4;
        let theta0 = 0.35;
        let a0 = steering_vector(theta0, n_tx, 0.5);
        let mut m = DMatrix::zeros(n_tx, 2);
        m.column_mut(0).copy_from(&(&a0 * c((pt / n_tx as f64).sqrt(), 0.0)));
        let p = Precoder::new(m);
        // |a^H a|^2 * Pt/Nt = Nt^2 * Pt/Nt = Nt*Pt
        assert!((beampattern_gain(&p, theta0, 0.5) - n_tx as f64 * pt).abs() < 1e-8);
    }

    #[test]
    fn gain_matches_explicit_quadratic_form() {
        use crate::rng::stream;
        use rand::Rng;
        let mut rng = stream(42, "test-gain", &[]);
        for _ in 0..10 {
            let n_tx = 3;
            let m = DMatrix::from_fn(n_tx, 4, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let p = Precoder::new(m.clone());
            let theta: f64 = rng.random_range(-1.5..1.5);
            // oracle: build R = P P^H first, evaluate a^H R a
            let r = &m * m.adjoint();
            let a = steering_vector(theta, n_tx, 0.5);
            let oracle = (a.adjoint() * &r * &a)[(0, 0)].re;
            let got = beampattern_gain(&p, theta, 0.5);
            assert!((got - oracle).abs() < 1e-10 * (1.0 + oracle.abs()));
        }
    }

    #[test]
    fn bse_zero_for_exactly_matched_flat_pattern() {
        let pt = 100.0;
        let n_tx = 4;
        let scale = (pt / n_tx as f64).sqrt();
        let mut m = DMatrix::zeros(n_tx, n_tx);
        for i in 0..n_tx {
            m[(i, i)] = c(scale, 0.0);
        }
        let p = Precoder::new(m);
        let angles = BeampatternSpec::default_grid_deg();
        let desired = vec![1.0; angles.len()];
        let spec = BeampatternSpec::new(angles, desired, pt).unwrap();
        assert!(bse(&p, &spec, 0.5) < 1e-16);
    }

    #[test]
    fn bse_accumulates_squared_gain_against_zero_target() {
        // desired = 0 except one entry to satisfy validation; compare on the
        // zero-desired part only via the direct summation oracle.
        let mut m = DMatrix::zeros(2, 1);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 0)] = c(0.5, 0.5);
        let p = Precoder::new(m);
        let spec = BeampatternSpec::rectangular(0.0, 0.0).with_scale(1e-12);
        let gains = grid_gains(&p, &spec, 0.5);
        let direct: f64 = gains
            .iter()
            .zip(&spec.desired)
            .map(|(&g, &d)| (spec.pattern_scale * d - g).powi(2))
            .sum();
        let got = bse(&p, &spec, 0.5);
        assert!((got - direct).abs() <= 1e-12 * direct.max(1.0));
        assert!(got > 0.0);
    }

    #[test]
    fn bse_matches_per_grid_point_oracle_random() {
        use crate::rng::stream;
        use rand::Rng;
        let mut rng = stream(43, "test-bse", &[]);
        let m = DMatrix::from_fn(3, 3, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let p = Precoder::new(m);
        let angles: Vec<f64> = (-30..=30).map(|d| (d as f64).to_radians()).collect();
        let desired: Vec<f64> = angles.iter().map(|_| rng.random_range(0.0..2.0)).collect();
        let spec = BeampatternSpec::new(angles, desired, 1.7).unwrap();
        let oracle: f64 = spec
            .angles
            .iter()
            .zip(&spec.desired)
            .map(|(&th, &d)| {
                let g = beampattern_gain(&p, th, 0.5);
                (1.7 * d - g).powi(2)
            })
            .sum();
        assert!((bse(&p, &spec, 0.5) - oracle).abs() < 1e-10 * (1.0 + oracle));
    }
}
