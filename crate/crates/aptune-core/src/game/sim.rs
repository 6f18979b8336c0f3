//! Repeated-game simulation under perfect or noisy monitoring.

use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{
    per_ap_utilities, prescribed_actions, transition, DetectionConfig, GameState, MechanismParams,
    NoiseModel,
};
use crate::net::{NetworkConfig, PowerProfile};
use crate::stats::CorrelatedGaussian;

/// How deviations are observed.
#[derive(Debug, Clone)]
pub enum Monitoring {
    /// Actions are observed exactly; any deviation triggers punishment.
    Perfect,
    /// Received powers are observed through correlated Gaussian noise and
    /// compared against the prescribed values with per-receiver tolerances.
    /// Attempt rates remain directly observable as channel occupancy.
    Imperfect {
        noise: NoiseModel,
        detection: DetectionConfig,
    },
}

/// Per-AP behaviour in the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Play whatever the mechanism prescribes in the current state.
    Compliant,
    /// Transmit at a fixed power every period; attempt rate stays compliant.
    FixedPower(f64),
    /// Deviate to the given (power, rate) in one period, comply otherwise.
    OneShot { period: usize, power: f64, rate: f64 },
}

/// One period of simulated play.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period: usize,
    pub state: GameState,
    /// (observer, flagged transmitter) pairs; under perfect monitoring the
    /// observer index equals the deviator itself.
    pub flags: Vec<(usize, usize)>,
    pub utilities: Vec<f64>,
}

impl PeriodRecord {
    fn csv_row(&self) -> String {
        let flags = self
            .flags
            .iter()
            .map(|(o, t)| format!("{o}>{t}"))
            .collect::<Vec<_>>()
            .join(";");
        let utils = self
            .utilities
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        format!("{},{},{},{}", self.period, self.state.label(), flags, utils)
    }
}

/// Simulation result: discounted per-AP utility sums plus the full history.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub discounted: Vec<f64>,
    pub history: Vec<PeriodRecord>,
}

impl SimulationOutcome {
    /// Writes the history as `period,state,flags,per_ap_utility` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "period,state,flags,per_ap_utility")?;
        for rec in &self.history {
            writeln!(w, "{}", rec.csv_row())?;
        }
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn sim_core(
    config: &NetworkConfig,
    params: &MechanismParams,
    policies: &[Policy],
    horizon: usize,
    seed: u64,
    monitoring: &Monitoring,
    mut sink: impl FnMut(PeriodRecord),
) -> Result<Vec<f64>> {
    let n = config.n_aps;
    if policies.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: policies.len(),
        });
    }
    for (i, p) in policies.iter().enumerate() {
        let power = match p {
            Policy::FixedPower(pw) => Some(*pw),
            Policy::OneShot { power, .. } => Some(*power),
            Policy::Compliant => None,
        };
        if let Some(pw) = power {
            if !(pw >= config.power_min[i] && pw <= config.power_max[i]) {
                return Err(Error::PowerOutOfRange {
                    ap: i,
                    value: pw,
                    min: config.power_min[i],
                    max: config.power_max[i],
                });
            }
        }
    }

    let sampler = match monitoring {
        Monitoring::Perfect => None,
        Monitoring::Imperfect { noise, .. } => {
            Some(CorrelatedGaussian::new(&noise.sigma, &noise.correlation)?)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GameState::Cooperative;
    let mut discounted = vec![0.0; n];
    let mut weight = 1.0;

    for period in 0..horizon {
        let prescribed = prescribed_actions(config, params, state);
        let actions: Vec<(f64, f64)> = (0..n)
            .map(|i| match policies[i] {
                Policy::Compliant => prescribed[i],
                Policy::FixedPower(pw) => (pw, prescribed[i].1),
                Policy::OneShot { period: t, power, rate } => {
                    if period == t {
                        (power, rate)
                    } else {
                        prescribed[i]
                    }
                }
            })
            .collect();

        let profile = PowerProfile::new(actions.iter().map(|a| a.0).collect());
        let rates: Vec<f64> = actions.iter().map(|a| a.1).collect();
        let utilities = per_ap_utilities(config, &profile, &rates);
        for i in 0..n {
            discounted[i] += weight * utilities[i];
        }
        weight *= params.discount;

        let flags: Vec<(usize, usize)> = match monitoring {
            Monitoring::Perfect => (0..n)
                .filter(|&i| {
                    !(close(actions[i].0, prescribed[i].0) && close(actions[i].1, prescribed[i].1))
                })
                .map(|i| (i, i))
                .collect(),
            Monitoring::Imperfect { detection, .. } => {
                let noise = sampler
                    .as_ref()
                    .expect("sampler exists under imperfect monitoring")
                    .sample(&mut rng);
                let mut flags = Vec::new();
                for observer in 0..n {
                    for tx in 0..n {
                        if tx == observer {
                            continue;
                        }
                        let expected = prescribed[tx].0 * config.gains[tx][observer];
                        // Only in-range transmitters have a decodable signal
                        // to compare against.
                        if expected < config.cs_threshold[observer] {
                            continue;
                        }
                        let measured =
                            actions[tx].0 * config.gains[tx][observer] + noise[observer];
                        if (measured - expected).abs() > detection.epsilon[observer] {
                            flags.push((observer, tx));
                        }
                    }
                }
                // Occupancy deviations stay directly visible.
                for i in 0..n {
                    if !close(actions[i].1, prescribed[i].1) {
                        flags.push((i, i));
                    }
                }
                flags
            }
        };

        let first_deviator = flags.iter().map(|&(_, t)| t).min();
        sink(PeriodRecord {
            period,
            state,
            flags,
            utilities,
        });
        state = transition(state, first_deviator, params.punish_len);
    }
    Ok(discounted)
}

/// Plays the mechanism for `horizon` periods and returns discounted per-AP
/// utilities together with the per-period history.
pub fn simulate_repeated(
    config: &NetworkConfig,
    params: &MechanismParams,
    policies: &[Policy],
    horizon: usize,
    seed: u64,
    monitoring: &Monitoring,
) -> Result<SimulationOutcome> {
    let mut history = Vec::with_capacity(horizon);
    let discounted = sim_core(config, params, policies, horizon, seed, monitoring, |rec| {
        history.push(rec)
    })?;
    Ok(SimulationOutcome {
        discounted,
        history,
    })
}

/// Paired comparison of threshold detection against a zero-tolerance trigger
/// on the same noisy observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Mean discounted social utility under the zero-tolerance trigger.
    pub mean_naive: f64,
    /// Mean discounted social utility under threshold detection.
    pub mean_threshold: f64,
    /// Mean per-seed difference (threshold minus naive).
    pub mean_diff: f64,
    /// Sample standard deviation of the per-seed differences.
    pub diff_sd: f64,
    /// Per-seed (naive, threshold) social utilities, in seed order.
    pub per_seed: Vec<(f64, f64)>,
}

impl ComparisonReport {
    /// Normal-approximation 95% half-width for the mean difference.
    pub fn diff_ci95(&self) -> f64 {
        1.96 * self.diff_sd / (self.per_seed.len() as f64).sqrt()
    }
}

/// Runs compliant play under both detection rules for every seed, driving
/// each pair of arms with identical noise, and reports the paired difference
/// in discounted social utility.
pub fn compare_mim_mpm(
    config: &NetworkConfig,
    params: &MechanismParams,
    noise: &NoiseModel,
    detection: &DetectionConfig,
    horizon: usize,
    seeds: &[u64],
) -> Result<ComparisonReport> {
    let n = config.n_aps;
    let policies = vec![Policy::Compliant; n];
    let naive_detection = DetectionConfig::zero_tolerance(n);
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let naive = sim_core(
            config,
            params,
            &policies,
            horizon,
            seed,
            &Monitoring::Imperfect {
                noise: noise.clone(),
                detection: naive_detection.clone(),
            },
            |_| {},
        )?;
        let thresh = sim_core(
            config,
            params,
            &policies,
            horizon,
            seed,
            &Monitoring::Imperfect {
                noise: noise.clone(),
                detection: detection.clone(),
            },
            |_| {},
        )?;
        per_seed.push((naive.iter().sum::<f64>(), thresh.iter().sum::<f64>()));
    }
    let m = per_seed.len() as f64;
    let mean_naive = per_seed.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_threshold = per_seed.iter().map(|p| p.1).sum::<f64>() / m;
    let diffs: Vec<f64> = per_seed.iter().map(|p| p.1 - p.0).collect();
    let mean_diff = diffs.iter().sum::<f64>() / m;
    let var = if per_seed.len() > 1 {
        diffs.iter().map(|d| (d - mean_diff).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(ComparisonReport {
        mean_naive,
        mean_threshold,
        mean_diff,
        diff_sd: var.sqrt(),
        per_seed,
    })
}
