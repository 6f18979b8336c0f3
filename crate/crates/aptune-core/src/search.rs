//! Discrete optimization of the bound objectives over the threshold lattice.
//!
//! Three solvers share the same lattice: a cyclic coordinate-wise greedy
//! ascent, a randomized annealed search with logistic acceptance and a 1/n
//! cooling schedule, and an exhaustive enumeration used as the oracle at desk
//! scale.

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net::{reach_thresholds, NetworkConfig, PowerProfile, ThresholdSpace};
use crate::objective::{utility_total, ObjectiveKind};

/// Hard cap on the number of profiles the exhaustive solver will enumerate.
pub const ENUMERATION_CAP: f64 = 1e7;

/// Cooling and termination knobs for the randomized search.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    /// Stop once the absolute objective change over a full coordinate sweep
    /// falls below this.
    pub stop_threshold: f64,
    /// Hard round cap.
    pub max_rounds: usize,
    /// Rounds to run before the sweep-change stop rule may fire. Early rounds
    /// are hot and frequently propose no move at all, so an unguarded stop
    /// rule would exit long before the chain has cooled.
    pub min_rounds: usize,
}

impl AnnealSchedule {
    /// Defaults for a network of `n_aps` coordinates.
    pub fn for_n_aps(n_aps: usize) -> Self {
        Self {
            stop_threshold: 1e-4,
            max_rounds: 5000 * n_aps.max(1),
            min_rounds: 100 * n_aps.max(1),
        }
    }

    /// Cooling schedule: temperature 1/n at round n.
    pub fn temperature(&self, round: usize) -> f64 {
        1.0 / round.max(1) as f64
    }
}

/// One recorded step of a search run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub round: usize,
    pub coordinate: usize,
    pub level: f64,
    pub total: f64,
}

/// Search history plus the best profile seen.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace {
    pub steps: Vec<TraceStep>,
    pub best_profile: PowerProfile,
    pub best_total: f64,
    /// Objective evaluations spent, including rejected candidates.
    pub evaluations: usize,
}

impl SearchTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "round,coordinate,level,total")?;
        for s in &self.steps {
            writeln!(w, "{},{},{},{}", s.round, s.coordinate, s.level, s.total)?;
        }
        Ok(())
    }
}

fn require_surrogate(kind: ObjectiveKind) -> Result<()> {
    match kind {
        ObjectiveKind::Lower | ObjectiveKind::Upper => Ok(()),
        ObjectiveKind::Exact => Err(Error::UnsupportedObjective("exact")),
    }
}

/// Probability that the randomized search moves to a candidate level, given
/// the current and candidate totals, the temperature, and the number of
/// alternative levels sharing the proposal mass.
pub fn transition_prob(
    current_total: f64,
    candidate_total: f64,
    temperature: f64,
    alternatives: usize,
) -> f64 {
    debug_assert!(alternatives > 0);
    let d = (current_total - candidate_total) / temperature;
    // Logistic acceptance, computed on the stable side of the exponential.
    let accept = if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    };
    accept / alternatives as f64
}

/// Cyclic coordinate ascent over the threshold lattice, starting from maximum
/// power. Each step moves one coordinate to its best strictly-improving level
/// (ties broken toward the lowest power); the run ends after a full sweep
/// without change, at a coordinate-wise local optimum.
pub fn greedy(config: &NetworkConfig, p_c: f64, kind: ObjectiveKind) -> Result<SearchTrace> {
    require_surrogate(kind)?;
    let space = reach_thresholds(config);
    let n = config.n_aps;
    let mut profile = config.max_profile();
    let mut total = utility_total(config, &profile, p_c, kind)?.total;
    let mut evaluations = 1;
    let mut steps = vec![TraceStep {
        round: 0,
        coordinate: 0,
        level: profile.powers[0],
        total,
    }];
    let (mut best_profile, mut best_total) = (profile.clone(), total);

    let mut unchanged = 0;
    let mut round = 0;
    while unchanged < n {
        let m = round % n;
        round += 1;
        let current = profile.powers[m];
        let mut chosen = current;
        let mut chosen_total = total;
        for &q in &space.per_ap[m] {
            if q == current {
                continue;
            }
            profile.powers[m] = q;
            let t = utility_total(config, &profile, p_c, kind)?.total;
            evaluations += 1;
            // Ascending level order plus strict improvement keeps the lowest
            // power among exact ties.
            if t > chosen_total {
                chosen = q;
                chosen_total = t;
            }
        }
        profile.powers[m] = chosen;
        if chosen == current {
            unchanged += 1;
        } else {
            unchanged = 0;
            total = chosen_total;
        }
        steps.push(TraceStep {
            round,
            coordinate: m,
            level: chosen,
            total,
        });
        if total > best_total {
            best_total = total;
            best_profile = profile.clone();
        }
    }

    Ok(SearchTrace {
        steps,
        best_profile,
        best_total,
        evaluations,
    })
}

/// Randomized annealed search over the threshold lattice.
///
/// At round n the cycled coordinate proposes each alternative level with
/// probability `transition_prob` at temperature 1/n and stays otherwise. The
/// run stops when the absolute objective change over a full sweep drops below
/// the schedule threshold (after the warm-up floor) or at the round cap, and
/// returns the best profile visited rather than the final state.
pub fn rand_search(
    config: &NetworkConfig,
    p_c: f64,
    kind: ObjectiveKind,
    seed: u64,
    schedule: &AnnealSchedule,
) -> Result<SearchTrace> {
    require_surrogate(kind)?;
    let space = reach_thresholds(config);
    let n = config.n_aps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = config.max_profile();
    let mut total = utility_total(config, &profile, p_c, kind)?.total;
    let mut evaluations = 1;
    let mut steps = vec![TraceStep {
        round: 0,
        coordinate: 0,
        level: profile.powers[0],
        total,
    }];
    let (mut best_profile, mut best_total) = (profile.clone(), total);

    let mut recent = vec![f64::INFINITY; n];
    for round in 1..=schedule.max_rounds {
        let m = round % n;
        let current = profile.powers[m];
        let temperature = schedule.temperature(round);
        let mut delta = 0.0;
        let alternatives = space.per_ap[m].len() - 1;
        if alternatives > 0 {
            let draw: f64 = rng.random();
            let mut acc = 0.0;
            for &q in &space.per_ap[m] {
                if q == current {
                    continue;
                }
                profile.powers[m] = q;
                let t = utility_total(config, &profile, p_c, kind)?.total;
                evaluations += 1;
                acc += transition_prob(total, t, temperature, alternatives);
                if draw < acc {
                    delta = (t - total).abs();
                    total = t;
                    break;
                }
                profile.powers[m] = current;
            }
        }
        let slot = round % recent.len();
        recent[slot] = delta;
        steps.push(TraceStep {
            round,
            coordinate: m,
            level: profile.powers[m],
            total,
        });
        if total > best_total {
            best_total = total;
            best_profile = profile.clone();
        }
        let sweep_change: f64 = recent.iter().sum();
        if round >= schedule.min_rounds && sweep_change < schedule.stop_threshold {
            break;
        }
    }

    Ok(SearchTrace {
        steps,
        best_profile,
        best_total,
        evaluations,
    })
}

/// Exhaustive enumeration of the threshold lattice; the exact optimum of the
/// surrogate objective. Refuses spaces larger than [`ENUMERATION_CAP`].
pub fn exhaustive(config: &NetworkConfig, p_c: f64, kind: ObjectiveKind) -> Result<SearchTrace> {
    require_surrogate(kind)?;
    let space = reach_thresholds(config);
    exhaustive_over(config, &space, p_c, kind)
}

pub(crate) fn exhaustive_over(
    config: &NetworkConfig,
    space: &ThresholdSpace,
    p_c: f64,
    kind: ObjectiveKind,
) -> Result<SearchTrace> {
    let size = space.profile_count();
    if size > ENUMERATION_CAP {
        return Err(Error::SearchSpaceTooLarge {
            size,
            limit: ENUMERATION_CAP,
        });
    }
    let n = config.n_aps;
    let mut index = vec![0usize; n];
    let mut profile = PowerProfile::new(space.per_ap.iter().map(|l| l[0]).collect());
    let mut steps = Vec::new();
    let mut best_profile = profile.clone();
    let mut best_total = f64::NEG_INFINITY;
    let mut evaluations = 0;
    loop {
        let total = utility_total(config, &profile, p_c, kind)?.total;
        evaluations += 1;
        if total > best_total {
            let coordinate = best_profile
                .powers
                .iter()
                .zip(&profile.powers)
                .position(|(a, b)| a != b)
                .unwrap_or(0);
            best_total = total;
            best_profile = profile.clone();
            steps.push(TraceStep {
                round: evaluations,
                coordinate,
                level: profile.powers[coordinate],
                total,
            });
        }
        // Odometer increment, last coordinate fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(SearchTrace {
                    steps,
                    best_profile,
                    best_total,
                    evaluations,
                });
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] < space.per_ap[pos].len() {
                profile.powers[pos] = space.per_ap[pos][index[pos]];
                break;
            }
            index[pos] = 0;
            profile.powers[pos] = space.per_ap[pos][0];
        }
    }
}
