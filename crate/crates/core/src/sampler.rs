//! Eigendecomposition of the covariance matrix and offspring sampling.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Eigenvalues below this fraction of the largest one are raised to it.
pub const EIGEN_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecomposeError {
    #[error("covariance matrix contains non-finite entries")]
    NonFinite,
    #[error("covariance matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("covariance matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("covariance matrix has no positive eigenvalue")]
    NoPositiveEigenvalue,
}

/// `C = B diag(scales²) Bᵀ`, plus `C^{-1/2}` when requested.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    pub basis: DMatrix<f64>,
    pub scales: DVector<f64>,
    pub inv_sqrt: Option<DMatrix<f64>>,
    /// Set when at least one eigenvalue was raised to the floor.
    pub repaired: bool,
}

impl CovarianceFactor {
    pub fn identity(n: usize, with_inv_sqrt: bool) -> Self {
        CovarianceFactor {
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            inv_sqrt: with_inv_sqrt.then(|| DMatrix::identity(n, n)),
            repaired: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }

    /// `sqrt(λ_max / λ_min)` of the factored matrix.
    pub fn axis_ratio(&self) -> f64 {
        let max = self.scales.max();
        let min = self.scales.min();
        max / min
    }

    /// `B diag(scales) z`.
    pub fn transform(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.basis * z.component_mul(&self.scales)
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d2 = DMatrix::from_diagonal(&self.scales.map(|s| s * s));
        &self.basis * d2 * self.basis.transpose()
    }
}

/// Relative asymmetry `‖C − Cᵀ‖_F / ‖C‖_F`.
pub fn asymmetry(c: &DMatrix<f64>) -> f64 {
    let norm = c.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (c - c.transpose()).norm() / norm
}

/// Symmetric eigendecomposition with an eigenvalue floor.
///
/// `C^{-1/2}` is only formed when `with_inv_sqrt` is set.
pub fn decompose(c: &DMatrix<f64>, with_inv_sqrt: bool) -> Result<CovarianceFactor, DecomposeError> {
    if c.nrows() != c.ncols() {
        return Err(DecomposeError::NotSquare(c.nrows(), c.ncols()));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(DecomposeError::NonFinite);
    }
    let asym = asymmetry(c);
    if asym > 1e-12 {
        return Err(DecomposeError::NotSymmetric(asym));
    }
    let eig = SymmetricEigen::new(c.clone());
    let max = eig.eigenvalues.max();
    if !(max > 0.0) {
        return Err(DecomposeError::NoPositiveEigenvalue);
    }
    let floor = EIGEN_FLOOR * max;
    let mut repaired = false;
    let scales = eig.eigenvalues.map(|ev| {
        if ev < floor {
            repaired = true;
            floor.sqrt()
        } else {
            ev.sqrt()
        }
    });
    let inv_sqrt = with_inv_sqrt.then(|| {
        let inv = DMatrix::from_diagonal(&scales.map(|s| 1.0 / s));
        &eig.eigenvectors * inv * eig.eigenvectors.transpose()
    });
    Ok(CovarianceFactor {
        basis: eig.eigenvectors,
        scales,
        inv_sqrt,
        repaired,
    })
}

/// One sampled candidate: `x = m + σ y` with `y ~ N(0, C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Offspring {
    pub y: DVector<f64>,
    pub x: DVector<f64>,
}

/// Draws `lambda` offspring around `mean`.
///
/// Standard normal variates are drawn offspring by offspring, coordinate by
/// coordinate, so a given seed yields the same population everywhere.
pub fn sample_population<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    sigma: f64,
    factor: &CovarianceFactor,
    lambda: usize,
    rng: &mut R,
) -> Vec<Offspring> {
    assert!(sigma > 0.0, "step-size must be positive");
    assert_eq!(mean.len(), factor.dim(), "dimension mismatch");
    let n = mean.len();
    (0..lambda)
        .map(|_| {
            let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = factor.transform(&z);
            let x = mean + &y * sigma;
            Offspring { y, x }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_decomposition() {
        let f = decompose(&DMatrix::identity(4, 4), true).unwrap();
        assert!(f.scales.iter().all(|&s| (s - 1.0).abs() < 1e-15));
        assert!(!f.repaired);
        assert!((f.inv_sqrt.unwrap() - DMatrix::<f64>::identity(4, 4)).norm() < 1e-14);
        assert!((f.basis.abs() - DMatrix::<f64>::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_scales() {
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let f = decompose(&c, false).unwrap();
        let mut s: Vec<f64> = f.scales.iter().copied().collect();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
        assert!(f.inv_sqrt.is_none());
        assert!((f.axis_ratio() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn random_spd_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = DMatrix::from_fn(5, 5, |_, _| rng.sample::<f64, _>(StandardNormal));
            let c = &a * a.transpose() + DMatrix::identity(5, 5) * 1e-3;
            let f = decompose(&c, true).unwrap();
            let err = (f.reconstruct() - &c).norm() / c.norm();
            assert!(err < 1e-9, "{err}");
            let inv = f.inv_sqrt.unwrap();
            let should_be_identity = &inv * &c * &inv;
            assert!((should_be_identity - DMatrix::identity(5, 5)).norm() < 1e-8);
        }
    }

    #[test]
    fn indefinite_is_repaired() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-3]);
        let f = decompose(&c, false).unwrap();
        assert!(f.repaired);
        assert!(f.scales.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn bad_matrices_rejected() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert_eq!(decompose(&c, false).unwrap_err(), DecomposeError::NonFinite);
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(decompose(&c, false), Err(DecomposeError::NotSymmetric(_))));
        let c = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        assert_eq!(decompose(&c, false).unwrap_err(), DecomposeError::NoPositiveEigenvalue);
    }

    #[test]
    fn sample_mean_and_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let f = decompose(&c, false).unwrap();
        let m = DVector::zeros(2);
        let k = 100_000;
        let pop = sample_population(&m, 1.0, &f, k, &mut rng);
        let mut mean = DVector::<f64>::zeros(2);
        let mut var = DVector::<f64>::zeros(2);
        for o in &pop {
            mean += &o.x;
            var += o.x.component_mul(&o.x);
        }
        mean /= k as f64;
        var /= k as f64;
        // sd of the mean is sqrt(var / k)
        assert!(mean[0].abs() < 4.0 * 2.0 / (k as f64).sqrt());
        assert!(mean[1].abs() < 4.0 / (k as f64).sqrt());
        assert!((var[0] - 4.0).abs() < 0.05 * 4.0, "{}", var[0]);
        assert!((var[1] - 1.0).abs() < 0.05, "{}", var[1]);
    }

    #[test]
    fn tiny_sigma_stays_at_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = CovarianceFactor::identity(3, false);
        let m = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        for o in sample_population(&m, 1e-300, &f, 4, &mut rng) {
            assert!((&o.x - &m).norm() < 1e-290);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let f = CovarianceFactor::identity(3, false);
        let m = DVector::zeros(3);
        let a = sample_population(&m, 0.3, &f, 7, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_population(&m, 0.3, &f, 7, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        for o in &a {
            assert_eq!(&o.x - &m, &o.y * 0.3);
        }
    }
}
