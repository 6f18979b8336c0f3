//! Airtime-times-capacity utility and its bound surrogates.
//!
//! Each AP's utility is its expected airtime share times the Shannon capacity
//! of its active transmissions. Interference comes only from APs outside both
//! contention domains, since in-range APs defer to each other. The exact
//! objective is evaluated alongside two surrogates: a lower bound that
//! replaces every interfering received power by the carrier-sense threshold
//! it must be below, and an upper bound that drops the logarithm. Both
//! surrogates attain their optima on the neighbor-reaching lattice, which is
//! what makes the discrete searches in [`crate::search`] exact.

use crate::error::{Error, Result};
use crate::net::{contention_view, ContentionView, NetworkConfig, PowerProfile, REACH_MARGIN};

/// Which variant of the objective to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Airtime share times `log2(1 + SINR)` with the true interference sum.
    Exact,
    /// Interfering received powers replaced by the receiver's carrier-sense
    /// threshold; a certified lower bound for every profile.
    Lower,
    /// Linear (log-free) SINR form; an upper bound wherever SINR >= 1.
    Upper,
}

impl ObjectiveKind {
    pub fn label(self) -> &'static str {
        match self {
            ObjectiveKind::Exact => "exact",
            ObjectiveKind::Lower => "lower",
            ObjectiveKind::Upper => "upper",
        }
    }
}

/// Per-AP decomposition of one objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityBreakdown {
    /// Expected airtime share of each AP.
    pub sharing: Vec<f64>,
    /// Capacity term of each AP under the selected kind.
    pub capacity: Vec<f64>,
    /// `sharing[i] * capacity[i]`.
    pub per_ap: Vec<f64>,
    /// Interference sum in each AP's SINR denominator (or its surrogate).
    pub interference: Vec<f64>,
    /// Sum of `per_ap`; the optimization objective.
    pub total: f64,
}

fn validate_rate(p_c: f64) -> Result<()> {
    if p_c > 0.0 && p_c < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAttemptRate(p_c))
    }
}

/// Airtime share of each AP: its own attempt rate times the probability that
/// every AP it backs off to stays silent.
pub fn sharing(view: &ContentionView, p_c: f64) -> Result<Vec<f64>> {
    validate_rate(p_c)?;
    Ok(view
        .orders
        .iter()
        .map(|&n_i| (1.0 - p_c).powi(n_i as i32) * p_c)
        .collect())
}

fn sharing_with_rates(view: &ContentionView, rates: &[f64]) -> Vec<f64> {
    (0..rates.len())
        .map(|i| {
            rates[i]
                * view.receive_domain[i]
                    .iter()
                    .map(|&j| 1.0 - rates[j])
                    .product::<f64>()
        })
        .collect()
}

/// Full evaluation with heterogeneous attempt rates. Rates may touch 1.0
/// (an always-transmitting punisher); validation is up to the caller.
pub fn utility_with_rates(
    config: &NetworkConfig,
    profile: &PowerProfile,
    rates: &[f64],
    kind: ObjectiveKind,
) -> UtilityBreakdown {
    let view = contention_view(config, profile);
    breakdown(config, profile, &view, rates, kind)
}

fn breakdown(
    config: &NetworkConfig,
    profile: &PowerProfile,
    view: &ContentionView,
    rates: &[f64],
    kind: ObjectiveKind,
) -> UtilityBreakdown {
    let n = config.n_aps;
    debug_assert_eq!(rates.len(), n);
    let share = sharing_with_rates(view, rates);
    let mut capacity = Vec::with_capacity(n);
    let mut interference = Vec::with_capacity(n);
    let mut per_ap = Vec::with_capacity(n);
    let mut total = 0.0;
    for i in 0..n {
        let mut interf = 0.0;
        for j in 0..n {
            if !view.is_interferer(i, j) {
                continue;
            }
            interf += match kind {
                ObjectiveKind::Lower => share[j] * config.cs_threshold[i],
                _ => share[j] * profile.powers[j] * config.gains[j][i],
            };
        }
        let ratio = profile.powers[i] / (config.noise_floor + interf);
        let cap = match kind {
            ObjectiveKind::Exact | ObjectiveKind::Lower => (1.0 + ratio).log2(),
            ObjectiveKind::Upper => ratio,
        };
        let u = share[i] * cap;
        capacity.push(cap);
        interference.push(interf);
        per_ap.push(u);
        total += u;
    }
    UtilityBreakdown {
        sharing: share,
        capacity,
        per_ap,
        interference,
        total,
    }
}

/// Capacity term of a single AP under the selected objective kind.
pub fn capacity(
    config: &NetworkConfig,
    profile: &PowerProfile,
    p_c: f64,
    kind: ObjectiveKind,
    i: usize,
) -> Result<f64> {
    let b = utility_total(config, profile, p_c, kind)?;
    Ok(b.capacity[i])
}

/// Evaluates the chosen objective and returns the full per-AP breakdown.
pub fn utility_total(
    config: &NetworkConfig,
    profile: &PowerProfile,
    p_c: f64,
    kind: ObjectiveKind,
) -> Result<UtilityBreakdown> {
    validate_rate(p_c)?;
    debug_assert!(config.validate_profile(profile).is_ok());
    let view = contention_view(config, profile);
    let rates = vec![p_c; config.n_aps];
    Ok(breakdown(config, profile, &view, &rates, kind))
}

/// Which contention regime the two-user optimum landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoUserCase {
    /// Neither AP reaches the other's carrier-sense range.
    BothBelow,
    /// AP 0 is heard by AP 1 but not vice versa.
    FirstReaches,
    /// AP 1 is heard by AP 0 but not vice versa.
    SecondReaches,
    /// Mutual contention; both APs defer to each other.
    BothReach,
}

impl TwoUserCase {
    pub fn label(self) -> &'static str {
        match self {
            TwoUserCase::BothBelow => "both-below",
            TwoUserCase::FirstReaches => "first-reaches",
            TwoUserCase::SecondReaches => "second-reaches",
            TwoUserCase::BothReach => "both-reach",
        }
    }
}

/// Closed-form two-AP optimum at attempt rate 1/2.
///
/// In each contention regime the exact objective is, coordinate-wise, either
/// monotone or convex, so its maximum over the regime sits at a corner. The
/// candidate corners are the power bounds and the just-below-reach levels;
/// every feasible candidate is evaluated exactly and the argmax returned with
/// its regime label.
pub fn two_user_optimum(config: &NetworkConfig) -> Result<(PowerProfile, TwoUserCase)> {
    if config.n_aps != 2 {
        return Err(Error::TwoApsRequired(config.n_aps));
    }
    let p_c = 0.5;
    // reach[i]: power at which AP i enters the other AP's receive domain.
    let reach = [
        config.cs_threshold[1] / config.gains[0][1],
        config.cs_threshold[0] / config.gains[1][0],
    ];
    let below_ok = [
        config.power_min[0] < reach[0],
        config.power_min[1] < reach[1],
    ];
    let reach_ok = [
        config.power_max[0] >= reach[0],
        config.power_max[1] >= reach[1],
    ];
    let below_top = [
        (reach[0] * (1.0 - REACH_MARGIN)).clamp(config.power_min[0], config.power_max[0]),
        (reach[1] * (1.0 - REACH_MARGIN)).clamp(config.power_min[1], config.power_max[1]),
    ];

    let mut candidates: Vec<([f64; 2], TwoUserCase)> = Vec::new();
    if below_ok[0] && below_ok[1] {
        for a in [config.power_min[0], below_top[0]] {
            for b in [config.power_min[1], below_top[1]] {
                candidates.push(([a, b], TwoUserCase::BothBelow));
            }
        }
    }
    if reach_ok[0] && below_ok[1] {
        candidates.push(([config.power_max[0], below_top[1]], TwoUserCase::FirstReaches));
    }
    if below_ok[0] && reach_ok[1] {
        candidates.push(([below_top[0], config.power_max[1]], TwoUserCase::SecondReaches));
    }
    if reach_ok[0] && reach_ok[1] {
        candidates.push(([config.power_max[0], config.power_max[1]], TwoUserCase::BothReach));
    }
    debug_assert!(!candidates.is_empty());

    let mut best: Option<(f64, [f64; 2], TwoUserCase)> = None;
    for (powers, case) in candidates {
        let profile = PowerProfile::new(powers.to_vec());
        let total = utility_total(config, &profile, p_c, ObjectiveKind::Exact)?.total;
        if best.is_none_or(|(t, _, _)| total > t) {
            best = Some((total, powers, case));
        }
    }
    let (_, powers, case) = best.expect("at least one regime is always feasible");
    Ok((PowerProfile::new(powers.to_vec()), case))
}
