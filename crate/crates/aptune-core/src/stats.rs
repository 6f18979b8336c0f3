//! Small numeric helpers: standard normal CDF/quantile, a symmetric
//! eigensolver, and a correlated Gaussian sampler for the monitoring noise.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest one are clipped up so
/// user-supplied correlation matrices that are slightly indefinite still
/// yield a usable sampler.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile by bisection; `p` must lie in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0, 1), got {p}");
    let (mut lo, mut hi) = (-12.0f64, 12.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Jacobi eigendecomposition of a symmetric matrix. Returns the eigenvalues
/// and the matrix of column eigenvectors. Intended for the small matrices
/// that appear here (one row per AP).
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-30 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    (values, v)
}

/// Samples zero-mean Gaussian vectors with covariance built from per-receiver
/// standard deviations and a correlation matrix.
#[derive(Debug, Clone)]
pub struct CorrelatedGaussian {
    transform: Vec<Vec<f64>>,
}

impl CorrelatedGaussian {
    pub fn new(sigma: &[f64], correlation: &[Vec<f64>]) -> Result<Self> {
        let n = sigma.len();
        if correlation.len() != n || correlation.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: correlation.len(),
            });
        }
        let mut cov = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                cov[i][j] = correlation[i][j] * sigma[i] * sigma[j];
            }
        }
        let (values, vectors) = symmetric_eigen(&cov);
        // transform = V * sqrt(clip(D)); then transform * z has covariance
        // V clip(D) V^T, the nearest usable covariance. The clip is relative
        // to the top eigenvalue, so a vanishing covariance stays vanishing.
        let floor = values.iter().fold(0.0f64, |a, v| a.max(v.abs())) * EIGENVALUE_FLOOR;
        let mut transform = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                transform[i][k] = vectors[i][k] * values[k].max(floor).sqrt();
            }
        }
        Ok(Self { transform })
    }

    pub fn dim(&self) -> usize {
        self.transform.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim();
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.transform[i][k] * z[k]).sum())
            .collect()
    }
}
