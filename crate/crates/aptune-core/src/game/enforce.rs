//! One-step-deviation analysis of the punishment mechanism.
//!
//! Enforceability follows the usual recipe: cap the one-shot gain any AP can
//! extract by deviating, and check that the discounted punishment stream it
//! triggers outweighs that gain. Rate deviations range over a fixed grid
//! since utilities are smooth in the attempt rate.

use crate::error::Result;
use crate::game::{per_ap_utilities, MechanismParams};
use crate::net::{reach_thresholds, NetworkConfig};

/// Grid step count for attempt-rate deviations: 0.01, 0.02, ..., 0.99.
pub const RATE_GRID: usize = 99;

fn rate_grid() -> impl Iterator<Item = f64> {
    (1..=RATE_GRID).map(|k| k as f64 / 100.0)
}

/// Outcome of the enforceability analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct EnforceabilityReport {
    /// Per-AP utility under the enforced cooperative profile.
    pub cooperative: Vec<f64>,
    /// Per-AP utility during the AP's own punishment phase.
    pub punishment: Vec<f64>,
    /// Cap on the one-shot utility an AP can reach by deviating from the
    /// cooperative state (over lattice powers and the rate grid).
    pub one_shot_cap: Vec<f64>,
    /// Cap on the one-shot utility reachable by deviating inside the AP's own
    /// punishment phase (rate deviations up to and including 1).
    pub punish_shot_cap: Vec<f64>,
    /// Punishment hurts: every AP earns strictly less in its own phase than
    /// under cooperation.
    pub a1: bool,
    /// APs violating the punishment-hurts requirement.
    pub a1_violators: Vec<usize>,
    /// Phases are ordered: every AP prefers sitting in someone else's
    /// punishment phase over its own.
    pub a2: bool,
    /// The punished AP's prescribed rate is already aggressive enough that
    /// even jumping to an attempt rate of 1 gains less than returning to
    /// cooperative play at maximum power would.
    pub a3: bool,
    /// The deterrence inequality holds at the configured punishment length:
    /// for every AP, `(coop - punish) * (d - d^(L+1)) / (1 - d)` covers the
    /// one-shot gain `cap - coop`.
    pub holds_at_len: bool,
    /// Smallest punishment length satisfying the inequality at the configured
    /// discount, if any exists.
    pub minimal_len: Option<usize>,
    /// All of the above: the mechanism enforces the target as configured.
    pub enforceable: bool,
}

fn discount_weight(discount: f64, len: usize) -> f64 {
    // d + d^2 + ... + d^L
    (discount - discount.powi(len as i32 + 1)) / (1.0 - discount)
}

fn deterrence_holds(
    cooperative: &[f64],
    punishment: &[f64],
    one_shot_cap: &[f64],
    discount: f64,
    len: usize,
) -> bool {
    let w = discount_weight(discount, len);
    cooperative
        .iter()
        .zip(punishment)
        .zip(one_shot_cap)
        .all(|((&coop, &pun), &cap)| (coop - pun) * w >= cap - coop)
}

/// Evaluates the punishment mechanism: per-AP utilities, one-shot deviation
/// caps, the three parameter requirements, and the deterrence inequality with
/// the smallest workable punishment length.
pub fn mpm_enforceability(
    config: &NetworkConfig,
    params: &MechanismParams,
) -> Result<EnforceabilityReport> {
    let n = config.n_aps;
    let space = reach_thresholds(config);
    let max_profile = config.max_profile();
    let coop_rates = vec![params.target_rate; n];

    let cooperative = per_ap_utilities(config, &params.target_profile, &coop_rates);

    // Utility of each AP in each phase, at maximum power with that phase's
    // punishment rates. phase_utús[k][i] = U_i during AP k's phase.
    let phase_utils: Vec<Vec<f64>> = (0..n)
        .map(|k| per_ap_utilities(config, &max_profile, &params.punishment_rates(k)))
        .collect();
    let punishment: Vec<f64> = (0..n).map(|i| phase_utils[i][i]).collect();

    // One-shot cap at the cooperative state: deviate in power over the
    // lattice and in rate over the grid, everyone else compliant.
    let mut one_shot_cap = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = f64::NEG_INFINITY;
        let mut profile = params.target_profile.clone();
        let mut rates = coop_rates.clone();
        for &q in &space.per_ap[i] {
            profile.powers[i] = q;
            for r in rate_grid() {
                rates[i] = r;
                best = best.max(per_ap_utilities(config, &profile, &rates)[i]);
            }
        }
        one_shot_cap.push(best);
    }

    // One-shot cap inside the AP's own phase. Power is already maximal there
    // and utility increases with own power, so only rate deviations matter;
    // the boundary rate 1 is included.
    let mut punish_shot_cap = Vec::with_capacity(n);
    for i in 0..n {
        let mut rates = params.punishment_rates(i);
        let mut best = f64::NEG_INFINITY;
        for r in rate_grid().chain([1.0]) {
            rates[i] = r;
            best = best.max(per_ap_utilities(config, &max_profile, &rates)[i]);
        }
        punish_shot_cap.push(best);
    }

    let a1_violators: Vec<usize> = (0..n).filter(|&i| punishment[i] >= cooperative[i]).collect();
    let a1 = a1_violators.is_empty();

    let a2 = (0..n).all(|i| {
        (0..n)
            .filter(|&j| j != i)
            .all(|j| phase_utils[j][i] >= phase_utils[i][i])
    });

    let a3 = (0..n).all(|i| {
        let mut boundary_rates = params.punishment_rates(i);
        boundary_rates[i] = 1.0;
        let burst = per_ap_utilities(config, &max_profile, &boundary_rates)[i];
        let coop_at_max = per_ap_utilities(config, &max_profile, &coop_rates)[i];
        burst - punishment[i] < coop_at_max - punishment[i]
    });

    let holds_at_len = deterrence_holds(
        &cooperative,
        &punishment,
        &one_shot_cap,
        params.discount,
        params.punish_len,
    );

    // The punishment weight is increasing in L with a finite limit, so test
    // the limit before scanning.
    let limit_ok = (0..n).all(|i| {
        let w_inf = params.discount / (1.0 - params.discount);
        (cooperative[i] - punishment[i]) * w_inf >= one_shot_cap[i] - cooperative[i]
    });
    let minimal_len = if a1 && limit_ok {
        (1..=100_000).find(|&len| {
            deterrence_holds(
                &cooperative,
                &punishment,
                &one_shot_cap,
                params.discount,
                len,
            )
        })
    } else {
        None
    };

    Ok(EnforceabilityReport {
        enforceable: a1 && a2 && a3 && holds_at_len,
        cooperative,
        punishment,
        one_shot_cap,
        punish_shot_cap,
        a1,
        a1_violators,
        a2,
        a3,
        holds_at_len,
        minimal_len,
    })
}
