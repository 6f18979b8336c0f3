//! Imperfect monitoring: Gaussian observation noise and threshold detection.
//!
//! Each receiver observes every in-range transmitter's received power plus a
//! zero-mean Gaussian noise term; noise is correlated across receivers. A
//! transmitter is flagged when the observation strays more than the
//! receiver's tolerance from the prescribed received power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::normal_cdf;

/// Receiver-side observation noise: per-receiver standard deviations plus the
/// cross-receiver correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
}

impl NoiseModel {
    pub fn new(sigma: Vec<f64>, correlation: Vec<Vec<f64>>) -> Result<Self> {
        let n = sigma.len();
        if sigma.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidMechanism(
                "noise deviations must be positive".into(),
            ));
        }
        if correlation.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: correlation.len(),
            });
        }
        for i in 0..n {
            if correlation[i].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: correlation[i].len(),
                });
            }
            if (correlation[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMechanism(format!(
                    "correlation diagonal entry {i} is {}",
                    correlation[i][i]
                )));
            }
            for j in 0..n {
                let r = correlation[i][j];
                if !(-1.0..=1.0).contains(&r) {
                    return Err(Error::InvalidMechanism(format!(
                        "correlation [{i}][{j}] = {r} outside [-1; 1]"
                    )));
                }
                if (correlation[i][j] - correlation[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidMechanism(
                        "correlation matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(Self { sigma, correlation })
    }
}

/// Per-receiver detection tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub epsilon: Vec<f64>,
}

impl DetectionConfig {
    pub fn new(epsilon: Vec<f64>) -> Result<Self> {
        if epsilon.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(Error::InvalidMechanism(
                "detection tolerances must be positive".into(),
            ));
        }
        Ok(Self { epsilon })
    }

    /// Zero-tolerance detection, used to model a trigger mechanism applied
    /// naively to noisy observations. Not subject to the positivity check.
    pub fn zero_tolerance(n: usize) -> Self {
        Self {
            epsilon: vec![0.0; n],
        }
    }
}

/// Probabilities of (no detection, detection) at a receiver whose observation
/// of some transmitter is displaced by `shift` in received power. With zero
/// shift the detection probability is the false-alarm rate
/// `2 - 2 * cdf(eps / sigma)`; a displacement `s` moves it to
/// `2 - cdf((eps + s) / sigma) - cdf((eps - s) / sigma)`.
pub fn mim_detection_probs(
    noise: &NoiseModel,
    detection: &DetectionConfig,
    observer: usize,
    shift: f64,
) -> (f64, f64) {
    debug_assert!(shift >= 0.0);
    let sigma = noise.sigma[observer];
    let eps = detection.epsilon[observer];
    let p_no = normal_cdf((eps + shift) / sigma) + normal_cdf((eps - shift) / sigma) - 1.0;
    (p_no, 1.0 - p_no)
}

/// Whether the noise seen by receivers `i` and `j` is positively correlated
/// enough for their detections to reinforce each other:
/// `cdf((e_i - sqrt(rho) e_j) / sqrt(1 - rho^2)) +
///  cdf((e_i + sqrt(rho) e_j) / sqrt(1 - rho^2)) > 3/2`.
/// At `rho = 0` this reduces to `cdf(e_i) > 3/4`, and it is satisfied in the
/// equal-tolerance limit `rho -> 1`.
pub fn mim_correlation_ok(
    noise: &NoiseModel,
    detection: &DetectionConfig,
    i: usize,
    j: usize,
) -> Result<bool> {
    let rho = noise.correlation[i][j];
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::CorrelationOutOfRange(rho));
    }
    let e_i = detection.epsilon[i];
    let e_j = detection.epsilon[j];
    let denom = (1.0 - rho * rho).sqrt();
    let lo = normal_cdf((e_i - rho.sqrt() * e_j) / denom);
    let hi = normal_cdf((e_i + rho.sqrt() * e_j) / denom);
    Ok(lo + hi > 1.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::normal_quantile;

    fn unit_noise(n: usize, rho: f64) -> NoiseModel {
        let mut corr = vec![vec![rho; n]; n];
        for (i, row) in corr.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        NoiseModel::new(vec![1.0; n], corr).unwrap()
    }

    #[test]
    fn false_alarm_rate_at_the_familiar_threshold() {
        let noise = unit_noise(2, 0.0);
        let det = DetectionConfig::new(vec![1.96; 2]).unwrap();
        let (p_no, p_yes) = mim_detection_probs(&noise, &det, 0, 0.0);
        assert!((p_yes - 0.05).abs() < 5e-4, "got {p_yes}");
        assert!((p_no + p_yes - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_detection_probability() {
        let noise = unit_noise(2, 0.0);
        let det = DetectionConfig::new(vec![1.96; 2]).unwrap();
        let (_, p) = mim_detection_probs(&noise, &det, 0, 1.0);
        let expect = 2.0 - normal_cdf(2.96) - normal_cdf(0.96);
        assert!((p - expect).abs() < 1e-15);
        assert!((p - 0.170).abs() < 5e-4, "got {p}");
    }

    #[test]
    fn any_shift_raises_detection() {
        let noise = unit_noise(2, 0.0);
        let det = DetectionConfig::new(vec![1.5; 2]).unwrap();
        let (_, base) = mim_detection_probs(&noise, &det, 0, 0.0);
        let mut last = base;
        for k in 1..=20 {
            let (_, p) = mim_detection_probs(&noise, &det, 0, k as f64 * 0.1);
            assert!(p > last, "detection must increase with the shift");
            last = p;
        }
    }

    #[test]
    fn tighter_tolerance_amplifies_shift_sensitivity() {
        // The detection lift from a fixed shift shrinks as the tolerance
        // grows; checked by finite differences over a tolerance grid. The
        // grid stays in the regime eps - shift >= 1 where the Gaussian
        // density is convex on both sides; below it the lift is not monotone.
        let noise = unit_noise(2, 0.0);
        let shift = 0.4;
        let mut last_lift = f64::INFINITY;
        for k in 0..10 {
            let eps = 1.5 + k as f64 * 0.3;
            let det = DetectionConfig::new(vec![eps; 2]).unwrap();
            let (_, with_shift) = mim_detection_probs(&noise, &det, 0, shift);
            let (_, without) = mim_detection_probs(&noise, &det, 0, 0.0);
            let lift = with_shift - without;
            assert!(lift < last_lift, "lift must fall as the tolerance grows");
            last_lift = lift;
        }
    }

    #[test]
    fn correlation_condition_boundary_and_limits() {
        // rho -> 1 with equal tolerances satisfies the condition.
        let near_one = unit_noise(2, 1.0 - 1e-9);
        let det = DetectionConfig::new(vec![1.0; 2]).unwrap();
        assert!(mim_correlation_ok(&near_one, &det, 0, 1).unwrap());

        // rho = 0 reduces to cdf(eps) > 3/4.
        let independent = unit_noise(2, 0.0);
        let q = normal_quantile(0.75);
        let above = DetectionConfig::new(vec![q + 1e-3; 2]).unwrap();
        let below = DetectionConfig::new(vec![q - 1e-3; 2]).unwrap();
        assert!(mim_correlation_ok(&independent, &above, 0, 1).unwrap());
        assert!(!mim_correlation_ok(&independent, &below, 0, 1).unwrap());

        // Zero tolerance can never satisfy it.
        let zero = DetectionConfig::zero_tolerance(2);
        assert!(!mim_correlation_ok(&independent, &zero, 0, 1).unwrap());

        // Negative correlation is out of domain.
        let negative = unit_noise(2, -0.5);
        assert!(matches!(
            mim_correlation_ok(&negative, &det, 0, 1),
            Err(Error::CorrelationOutOfRange(_))
        ));
    }
}
