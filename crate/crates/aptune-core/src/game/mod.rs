//! Strategic layer: equilibrium checks and punishment mechanisms.
//!
//! Left to themselves, rational APs all transmit at maximum power — raising
//! own power never hurts the sender, so the all-max profile is the unique
//! equilibrium even when a coordinated profile yields more total throughput.
//! The repeated-game machinery here enforces a coordinated target profile:
//! a deviation by AP `i` sends the system into `i`'s punishment phase for a
//! fixed number of periods, during which everyone transmits at maximum power
//! and the punishers attempt aggressively enough to starve `i` of airtime.
//! With perfect action observation the trigger is exact; under Gaussian
//! observation noise a per-receiver detection threshold keeps false alarms
//! rare while still flagging real deviations.

mod enforce;
mod monitor;
mod sim;

pub use enforce::{mpm_enforceability, EnforceabilityReport, RATE_GRID};
pub use monitor::{mim_correlation_ok, mim_detection_probs, DetectionConfig, NoiseModel};
pub use sim::{
    compare_mim_mpm, simulate_repeated, ComparisonReport, Monitoring, PeriodRecord, Policy,
    SimulationOutcome,
};

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::net::{reach_thresholds, NetworkConfig, PowerProfile};
use crate::objective::{utility_total, utility_with_rates, ObjectiveKind};

/// Repeated-game configuration: the enforced target, the discounting, and the
/// punishment-phase attempt rates.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismParams {
    /// Discount factor in (0, 1).
    pub discount: f64,
    /// Punishment phase length in periods.
    pub punish_len: usize,
    /// Attempt rate of the punished AP during its own phase.
    pub punish_rate_self: Vec<f64>,
    /// `punish_rate_others[j][i]`: attempt rate of punisher `j` during AP
    /// `i`'s phase.
    pub punish_rate_others: Vec<Vec<f64>>,
    /// Power profile the mechanism enforces in the cooperative state.
    pub target_profile: PowerProfile,
    /// Common attempt rate enforced in the cooperative state.
    pub target_rate: f64,
}

impl MechanismParams {
    pub fn new(
        config: &NetworkConfig,
        discount: f64,
        punish_len: usize,
        punish_rate_self: Vec<f64>,
        punish_rate_others: Vec<Vec<f64>>,
        target_profile: PowerProfile,
        target_rate: f64,
    ) -> Result<Self> {
        let n = config.n_aps;
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::InvalidMechanism(format!(
                "discount {discount} outside (0; 1)"
            )));
        }
        if punish_len == 0 {
            return Err(Error::InvalidMechanism("punishment length is zero".into()));
        }
        if !(target_rate > 0.0 && target_rate < 1.0) {
            return Err(Error::InvalidAttemptRate(target_rate));
        }
        config.validate_profile(&target_profile)?;
        if punish_rate_self.len() != n || punish_rate_others.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: punish_rate_self.len().min(punish_rate_others.len()),
            });
        }
        let rate_ok = |r: f64| r > 0.0 && r <= 1.0;
        if punish_rate_self.iter().any(|&r| !rate_ok(r)) {
            return Err(Error::InvalidMechanism(
                "punishment rates must lie in (0; 1]".into(),
            ));
        }
        for (j, row) in punish_rate_others.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (i, &r) in row.iter().enumerate() {
                if i != j && !rate_ok(r) {
                    return Err(Error::InvalidMechanism(format!(
                        "punisher rate [{j}][{i}] = {r} outside (0; 1]"
                    )));
                }
            }
        }
        Ok(Self {
            discount,
            punish_len,
            punish_rate_self,
            punish_rate_others,
            target_profile,
            target_rate,
        })
    }

    /// Convenience constructor with the default punishment rates: the
    /// punished AP attempts at 0.9, every punisher at 0.95.
    pub fn with_default_rates(
        config: &NetworkConfig,
        discount: f64,
        punish_len: usize,
        target_profile: PowerProfile,
        target_rate: f64,
    ) -> Result<Self> {
        let n = config.n_aps;
        Self::new(
            config,
            discount,
            punish_len,
            vec![0.9; n],
            vec![vec![0.95; n]; n],
            target_profile,
            target_rate,
        )
    }

    /// Attempt rates in force during AP `target`'s punishment phase.
    pub fn punishment_rates(&self, target: usize) -> Vec<f64> {
        (0..self.punish_rate_self.len())
            .map(|j| {
                if j == target {
                    self.punish_rate_self[target]
                } else {
                    self.punish_rate_others[j][target]
                }
            })
            .collect()
    }
}

/// Mechanism state: cooperative play or some AP's punishment phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameState {
    Cooperative,
    Punishing { target: usize, stage: usize },
}

impl GameState {
    pub fn label(&self) -> String {
        match self {
            GameState::Cooperative => "S0".to_string(),
            GameState::Punishing { target, stage } => format!("S{target}({stage})"),
        }
    }
}

/// Per-AP (power, attempt rate) the mechanism prescribes in a state.
pub fn prescribed_actions(
    config: &NetworkConfig,
    params: &MechanismParams,
    state: GameState,
) -> Vec<(f64, f64)> {
    match state {
        GameState::Cooperative => params
            .target_profile
            .powers
            .iter()
            .map(|&p| (p, params.target_rate))
            .collect(),
        GameState::Punishing { target, .. } => {
            let rates = params.punishment_rates(target);
            config
                .power_max
                .iter()
                .zip(rates)
                .map(|(&p, r)| (p, r))
                .collect()
        }
    }
}

fn action_matches(actual: (f64, f64), prescribed: (f64, f64)) -> bool {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1.0);
    close(actual.0, prescribed.0) && close(actual.1, prescribed.1)
}

/// State transition given an observed set of deviating APs. Simultaneous
/// deviations punish the lowest index.
pub(crate) fn transition(
    state: GameState,
    first_deviator: Option<usize>,
    punish_len: usize,
) -> GameState {
    match (state, first_deviator) {
        (_, Some(target)) => GameState::Punishing { target, stage: 1 },
        (GameState::Cooperative, None) => GameState::Cooperative,
        (GameState::Punishing { target, stage }, None) => {
            if stage >= punish_len {
                GameState::Cooperative
            } else {
                GameState::Punishing {
                    target,
                    stage: stage + 1,
                }
            }
        }
    }
}

/// One step of the punishment state machine under perfect action observation.
pub fn mpm_step(
    config: &NetworkConfig,
    state: GameState,
    actions: &[(f64, f64)],
    params: &MechanismParams,
) -> GameState {
    let prescribed = prescribed_actions(config, params, state);
    debug_assert_eq!(actions.len(), prescribed.len());
    let first_deviator = actions
        .iter()
        .zip(&prescribed)
        .position(|(a, p)| !action_matches(*a, *p));
    transition(state, first_deviator, params.punish_len)
}

/// Per-AP best unilateral utility gain over threshold-lattice power
/// deviations. A profile is an equilibrium of the one-shot game (restricted
/// to the lattice) exactly when every gap is non-positive.
pub fn nash_gap(config: &NetworkConfig, profile: &PowerProfile, p_c: f64) -> Result<Vec<f64>> {
    config.validate_profile(profile)?;
    let space = reach_thresholds(config);
    let base = utility_total(config, profile, p_c, ObjectiveKind::Exact)?.per_ap;
    let mut gaps = Vec::with_capacity(config.n_aps);
    for i in 0..config.n_aps {
        let mut probe = profile.clone();
        let mut best = f64::NEG_INFINITY;
        for &q in &space.per_ap[i] {
            probe.powers[i] = q;
            let u = utility_total(config, &probe, p_c, ObjectiveKind::Exact)?.per_ap[i];
            best = best.max(u);
        }
        gaps.push(best - base[i]);
    }
    Ok(gaps)
}

/// On-disk mechanism description (JSON), mirroring [`MechanismParams`] plus
/// the optional monitoring noise and detection blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismFile {
    pub discount: f64,
    pub punish_len: usize,
    pub punish_rate_self: Vec<f64>,
    pub punish_rate_others: Vec<Vec<f64>>,
    pub target_profile: Vec<f64>,
    pub target_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseFileSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionFileSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseFileSection {
    pub sigma: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFileSection {
    pub epsilon: Vec<f64>,
}

impl MechanismFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Validates against a config and splits into the runtime pieces.
    pub fn unpack(
        &self,
        config: &NetworkConfig,
    ) -> Result<(MechanismParams, Option<NoiseModel>, Option<DetectionConfig>)> {
        let params = MechanismParams::new(
            config,
            self.discount,
            self.punish_len,
            self.punish_rate_self.clone(),
            self.punish_rate_others.clone(),
            PowerProfile::new(self.target_profile.clone()),
            self.target_rate,
        )?;
        let noise = self
            .noise
            .as_ref()
            .map(|n| NoiseModel::new(n.sigma.clone(), n.correlation.clone()))
            .transpose()?;
        let detection = self
            .detection
            .as_ref()
            .map(|d| DetectionConfig::new(d.epsilon.clone()))
            .transpose()?;
        Ok((params, noise, detection))
    }
}

/// Per-AP exact utilities under a power profile and heterogeneous rates; the
/// evaluation the mechanism analysis is built on.
pub(crate) fn per_ap_utilities(
    config: &NetworkConfig,
    profile: &PowerProfile,
    rates: &[f64],
) -> Vec<f64> {
    utility_with_rates(config, profile, rates, ObjectiveKind::Exact).per_ap
}
