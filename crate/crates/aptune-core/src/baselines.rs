//! Single-layer comparison models.
//!
//! `solve_rpphy` maximizes a convex relaxation of the pure rate objective in
//! which every other AP is treated as an always-on interferer; it separates
//! per coordinate and has the closed form `clamp(noise / H_i)` with `H_i` the
//! row sum of gains. `solve_rpmac` minimizes the total contention order
//! subject to a floor on each AP's surrogate SNR, searched over the threshold
//! lattice.

use crate::error::{Error, Result};
use crate::net::{reach_thresholds, NetworkConfig, PowerProfile};
use crate::objective::{utility_total, ObjectiveKind};
use crate::search::ENUMERATION_CAP;

/// SNR floor for the contention-minimization baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpmacConstraint {
    pub snr_floor: f64,
}

impl RpmacConstraint {
    pub fn new(snr_floor: f64) -> Result<Self> {
        if snr_floor > 0.0 {
            Ok(Self { snr_floor })
        } else {
            Err(Error::InvalidConfig(format!(
                "SNR floor {snr_floor} must be positive"
            )))
        }
    }
}

/// Feasibility verdict with the per-AP slack (surrogate SNR minus the floor).
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub slack: Vec<f64>,
}

/// Closed-form solution of the relaxed PHY-only problem.
///
/// The relaxed objective `sum_i [ln(P_i / noise) - sum_{j != i} P_j h_ji / noise]`
/// separates per coordinate; first-order optimality puts each interior
/// component at `noise / H_i`, clamped to the power box. An isolated AP has no
/// interference penalty and transmits at maximum power.
pub fn solve_rpphy(config: &NetworkConfig) -> PowerProfile {
    let n = config.n_aps;
    let powers = (0..n)
        .map(|i| {
            let row_gain: f64 = (0..n).filter(|&j| j != i).map(|j| config.gains[i][j]).sum();
            if row_gain <= 0.0 {
                config.power_max[i]
            } else {
                (config.noise_floor / row_gain).clamp(config.power_min[i], config.power_max[i])
            }
        })
        .collect();
    PowerProfile::new(powers)
}

/// The relaxed PHY objective that `solve_rpphy` maximizes; exposed so the
/// closed form can be checked against a numeric optimizer.
pub fn rpphy_objective(config: &NetworkConfig, profile: &PowerProfile) -> f64 {
    let n = config.n_aps;
    let mut total = 0.0;
    for i in 0..n {
        let mut interference = 0.0;
        for j in 0..n {
            if j != i {
                interference += profile.powers[j] * config.gains[j][i];
            }
        }
        total += (profile.powers[i] / config.noise_floor).ln() - interference / config.noise_floor;
    }
    total
}

fn surrogate_snr(config: &NetworkConfig, profile: &PowerProfile, p_c: f64) -> Result<Vec<f64>> {
    // The lower-bound interference term is exactly the surrogate used by the
    // SNR constraint: airtime-weighted carrier-sense thresholds.
    let b = utility_total(config, profile, p_c, ObjectiveKind::Lower)?;
    Ok((0..config.n_aps)
        .map(|i| profile.powers[i] / (config.noise_floor + b.interference[i]))
        .collect())
}

/// Checks the surrogate-SNR constraint for a profile.
pub fn rpmac_feasible(
    config: &NetworkConfig,
    profile: &PowerProfile,
    p_c: f64,
    constraint: &RpmacConstraint,
) -> Result<Feasibility> {
    let snr = surrogate_snr(config, profile, p_c)?;
    let slack: Vec<f64> = snr.iter().map(|s| s - constraint.snr_floor).collect();
    Ok(Feasibility {
        feasible: slack.iter().all(|s| *s >= 0.0),
        slack,
    })
}

/// Score of a candidate profile: total constraint violation first, then total
/// contention order, then a preference for larger total power (snapping up to
/// the next just-below-reach level never changes the topology, so among equal
/// contention the highest-power representative is kept).
///
/// Holds scratch buffers; the exhaustive solver calls `score` once per
/// lattice profile, up to the enumeration cap.
struct RpmacScorer {
    p_c: f64,
    floor: f64,
    orders: Vec<usize>,
    share: Vec<f64>,
}

impl RpmacScorer {
    fn new(n: usize, p_c: f64, floor: f64) -> Self {
        Self {
            p_c,
            floor,
            orders: vec![0; n],
            share: vec![0.0; n],
        }
    }

    fn score(&mut self, config: &NetworkConfig, powers: &[f64]) -> (f64, usize, f64) {
        let n = config.n_aps;
        for i in 0..n {
            let mut order = 0;
            for j in 0..n {
                if j != i && powers[j] * config.gains[j][i] >= config.cs_threshold[i] {
                    order += 1;
                }
            }
            self.orders[i] = order;
            self.share[i] = (1.0 - self.p_c).powi(order as i32) * self.p_c;
        }
        let mut violation = 0.0;
        for i in 0..n {
            let mut interference = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let heard = powers[j] * config.gains[j][i] >= config.cs_threshold[i];
                let hears = powers[i] * config.gains[i][j] >= config.cs_threshold[j];
                if !heard && !hears {
                    interference += self.share[j] * config.cs_threshold[i];
                }
            }
            let snr = powers[i] / (config.noise_floor + interference);
            violation += (self.floor - snr).max(0.0);
        }
        let order_total: usize = self.orders.iter().sum();
        let power_total: f64 = powers.iter().sum();
        (violation, order_total, -power_total)
    }
}

fn score_less(a: (f64, usize, f64), b: (f64, usize, f64)) -> bool {
    (a.0, a.1 as f64, a.2) < (b.0, b.1 as f64, b.2)
}

/// Minimizes the total contention order over the threshold lattice subject to
/// the surrogate-SNR floor. Small lattices are enumerated exhaustively;
/// larger ones fall back to a cyclic coordinate descent with the same
/// full-sweep termination rule as the objective searches. Returns an
/// infeasibility error carrying the least-violating profile when no lattice
/// profile meets the floor.
pub fn solve_rpmac(
    config: &NetworkConfig,
    p_c: f64,
    constraint: &RpmacConstraint,
) -> Result<PowerProfile> {
    if !(p_c > 0.0 && p_c < 1.0) {
        return Err(Error::InvalidAttemptRate(p_c));
    }
    let space = reach_thresholds(config);
    let n = config.n_aps;
    let mut scorer = RpmacScorer::new(n, p_c, constraint.snr_floor);

    let best = if space.profile_count() <= ENUMERATION_CAP {
        let mut index = vec![0usize; n];
        let mut profile = PowerProfile::new(space.per_ap.iter().map(|l| l[0]).collect());
        let mut best_profile = profile.clone();
        let mut best_score = scorer.score(config, &profile.powers);
        'outer: loop {
            let mut pos = n;
            loop {
                if pos == 0 {
                    break 'outer;
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
            let score = scorer.score(config, &profile.powers);
            if score_less(score, best_score) {
                best_score = score;
                best_profile = profile.clone();
            }
        }
        best_profile
    } else {
        // Coordinate descent from maximum power; each step takes the level
        // with the best score, ties toward higher power.
        let mut profile = config.max_profile();
        let mut score = scorer.score(config, &profile.powers);
        let mut unchanged = 0;
        let mut round = 0;
        while unchanged < n {
            let m = round % n;
            round += 1;
            let current = profile.powers[m];
            let mut chosen = current;
            let mut chosen_score = score;
            for &q in space.per_ap[m].iter().rev() {
                if q == current {
                    continue;
                }
                profile.powers[m] = q;
                let s = scorer.score(config, &profile.powers);
                // Descending order plus strict comparison keeps the highest
                // power among exact ties.
                if score_less(s, chosen_score) {
                    chosen = q;
                    chosen_score = s;
                }
            }
            profile.powers[m] = chosen;
            if chosen == current {
                unchanged += 1;
            } else {
                unchanged = 0;
                score = chosen_score;
            }
        }
        profile
    };

    let feas = rpmac_feasible(config, &best, p_c, constraint)?;
    if feas.feasible {
        Ok(best)
    } else {
        let worst = feas.slack.iter().fold(0.0f64, |a, s| a.max(-s));
        Err(Error::RpmacInfeasible {
            best_profile: best.powers,
            slack: feas.slack,
            worst_violation: worst,
        })
    }
}
