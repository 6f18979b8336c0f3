//! Static network description and contention topology.
//!
//! A network is a set of access points with a gain matrix, per-AP carrier-sense
//! thresholds, and box-constrained power ranges. From a power profile we derive
//! the receive/transmit contention domains (who backs off to whom) and the
//! finite lattice of neighbor-reaching power levels on which the bound
//! objectives attain their optima.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};

/// Relative margin separating a "just below reach" level from the reach
/// threshold itself. The supremum of powers that fail to reach a neighbor has
/// no maximizer on a continuous range, so it is represented as
/// `reach * (1 - REACH_MARGIN)`.
pub const REACH_MARGIN: f64 = 1e-9;

/// Static description of an AP network. Immutable after construction; all
/// operations on it are pure functions.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n_aps: usize,
    /// Average noise level, linear power units.
    pub noise_floor: f64,
    /// Per-AP carrier-sense threshold, linear power units.
    pub cs_threshold: Vec<f64>,
    /// Per-AP lower power bound (strictly positive).
    pub power_min: Vec<f64>,
    /// Per-AP upper power bound.
    pub power_max: Vec<f64>,
    /// Symmetric channel gain matrix with entries in (0, 1]; `gains[i][j]` is
    /// the attenuation from AP `i` to AP `j`. Diagonal entries are unused and
    /// stored as zero.
    pub gains: Vec<Vec<f64>>,
}

impl NetworkConfig {
    /// Validates and normalizes a config. Asymmetric gain inputs are averaged
    /// into a symmetric matrix; the diagonal is zeroed.
    pub fn new(
        noise_floor: f64,
        cs_threshold: Vec<f64>,
        power_min: Vec<f64>,
        power_max: Vec<f64>,
        gains: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = cs_threshold.len();
        if n == 0 {
            return Err(Error::InvalidConfig("network has no APs".into()));
        }
        if !(noise_floor.is_finite() && noise_floor > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise floor {noise_floor} must be positive"
            )));
        }
        for (name, v) in [("power_min", &power_min), ("power_max", &power_max)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if cs_threshold.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidConfig("cs_threshold must be positive".into()));
        }
        for i in 0..n {
            if power_min[i] > power_max[i] {
                return Err(Error::InvalidConfig(format!(
                    "power_min[{i}] = {} exceeds power_max[{i}] = {}",
                    power_min[i], power_max[i]
                )));
            }
        }
        if gains.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: gains.len(),
            });
        }
        let mut sym = vec![vec![0.0; n]; n];
        for i in 0..n {
            if gains[i].len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: gains[i].len(),
                });
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let h = 0.5 * (gains[i][j] + gains[j][i]);
                if !(h.is_finite() && h > 0.0 && h <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "gain between {i} and {j} is {h}; gains must lie in (0; 1]"
                    )));
                }
                sym[i][j] = h;
            }
        }
        Ok(Self {
            n_aps: n,
            noise_floor,
            cs_threshold,
            power_min,
            power_max,
            gains: sym,
        })
    }

    /// Profile at every AP's maximum power.
    pub fn max_profile(&self) -> PowerProfile {
        PowerProfile::new(self.power_max.clone())
    }

    /// Profile at every AP's minimum power.
    pub fn min_profile(&self) -> PowerProfile {
        PowerProfile::new(self.power_min.clone())
    }

    /// Checks a profile against the box constraints.
    pub fn validate_profile(&self, profile: &PowerProfile) -> Result<()> {
        if profile.powers.len() != self.n_aps {
            return Err(Error::DimensionMismatch {
                expected: self.n_aps,
                got: profile.powers.len(),
            });
        }
        for (i, &p) in profile.powers.iter().enumerate() {
            if !(p >= self.power_min[i] && p <= self.power_max[i]) {
                return Err(Error::PowerOutOfRange {
                    ap: i,
                    value: p,
                    min: self.power_min[i],
                    max: self.power_max[i],
                });
            }
        }
        Ok(())
    }
}

/// Transmission power profile, one level per AP, linear units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub powers: Vec<f64>,
}

impl PowerProfile {
    pub fn new(powers: Vec<f64>) -> Self {
        Self { powers }
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Channel-access attempt rates, one per AP, each strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptProfile {
    pub rates: Vec<f64>,
}

impl AttemptProfile {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        for &r in &rates {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidAttemptRate(r));
            }
        }
        Ok(Self { rates })
    }

    /// Fair-network profile where every AP attempts with the same rate.
    pub fn uniform(n_aps: usize, p_c: f64) -> Result<Self> {
        Self::new(vec![p_c; n_aps])
    }
}

/// Contention topology induced by a power profile.
///
/// `receive_domain[i]` holds the APs whose carrier-sense signal AP `i`
/// decodes; `transmit_domain[i]` holds the APs that decode AP `i`'s signal.
/// `orders[i]` is the number of competitors AP `i` backs off to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentionView {
    pub receive_domain: Vec<Vec<usize>>,
    pub transmit_domain: Vec<Vec<usize>>,
    pub orders: Vec<usize>,
}

impl ContentionView {
    pub fn in_receive(&self, i: usize, j: usize) -> bool {
        self.receive_domain[i].contains(&j)
    }

    pub fn in_transmit(&self, i: usize, j: usize) -> bool {
        self.transmit_domain[i].contains(&j)
    }

    /// True when `j` sits outside both of `i`'s contention domains, i.e. `j`
    /// transmits concurrently with `i` and contributes interference.
    pub fn is_interferer(&self, i: usize, j: usize) -> bool {
        i != j && !self.in_receive(i, j) && !self.in_transmit(i, j)
    }

    /// Total contention order of the network.
    pub fn total_order(&self) -> usize {
        self.orders.iter().sum()
    }
}

/// Per-AP finite lists of neighbor-reaching power levels, sorted ascending and
/// deduplicated. The bound objectives attain their optima on this lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSpace {
    pub per_ap: Vec<Vec<f64>>,
}

impl ThresholdSpace {
    /// Number of profiles in the lattice, as a float so that huge spaces do
    /// not overflow.
    pub fn profile_count(&self) -> f64 {
        self.per_ap.iter().map(|l| l.len() as f64).product()
    }

    /// Largest level of coordinate `i` that is at least `profile.powers[i]`
    /// and leaves the contention topology unchanged. This is the upward snap
    /// used to land on the lattice without crossing a reach threshold.
    pub fn snap_up(&self, config: &NetworkConfig, profile: &PowerProfile, i: usize) -> f64 {
        let base = contention_view(config, profile);
        let mut best = profile.powers[i];
        let mut probe = profile.clone();
        for &q in &self.per_ap[i] {
            if q < profile.powers[i] {
                continue;
            }
            probe.powers[i] = q;
            if contention_view(config, &probe) == base {
                best = best.max(q);
            }
        }
        best
    }
}

/// Builds a symmetric gain matrix from planar positions under a clipped
/// power-law attenuation `h = min(1, g0 * d^-alpha)`.
pub fn build_gains(
    positions: &[[f64; 2]],
    exponent: f64,
    reference_gain: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "path-loss exponent {exponent} must be positive"
        )));
    }
    if !(reference_gain.is_finite() && reference_gain > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "reference gain {reference_gain} must be positive"
        )));
    }
    let n = positions.len();
    let mut gains = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            let d = (dx * dx + dy * dy).sqrt();
            if d == 0.0 {
                return Err(Error::CoincidentPositions(i, j));
            }
            let h = (reference_gain * d.powf(-exponent)).min(1.0);
            gains[i][j] = h;
            gains[j][i] = h;
        }
    }
    Ok(gains)
}

/// Computes both contention domains and the contention orders for a profile.
///
/// AP `j` belongs to `receive_domain[i]` when `powers[j] * h_ji` meets AP
/// `i`'s carrier-sense threshold, and to `transmit_domain[i]` when
/// `powers[i] * h_ij` meets AP `j`'s threshold.
pub fn contention_view(config: &NetworkConfig, profile: &PowerProfile) -> ContentionView {
    let n = config.n_aps;
    debug_assert_eq!(profile.powers.len(), n);
    let mut receive = vec![Vec::new(); n];
    let mut transmit = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            if profile.powers[j] * config.gains[j][i] >= config.cs_threshold[i] {
                receive[i].push(j);
            }
            if profile.powers[i] * config.gains[i][j] >= config.cs_threshold[j] {
                transmit[i].push(j);
            }
        }
    }
    let orders = receive.iter().map(Vec::len).collect();
    ContentionView {
        receive_domain: receive,
        transmit_domain: transmit,
        orders,
    }
}

/// Builds the neighbor-reaching threshold lattice.
///
/// For each ordered pair `(i, k)` the reach point is `cs_k / h_ik`; the level
/// just below it is `reach * (1 - REACH_MARGIN)`. Levels outside AP `i`'s
/// power range are discarded. The range endpoints are always included.
pub fn reach_thresholds(config: &NetworkConfig) -> ThresholdSpace {
    let n = config.n_aps;
    let mut per_ap = Vec::with_capacity(n);
    for i in 0..n {
        let mut levels = vec![config.power_min[i], config.power_max[i]];
        for k in 0..n {
            if k == i {
                continue;
            }
            let reach = config.cs_threshold[k] / config.gains[i][k];
            for v in [reach * (1.0 - REACH_MARGIN), reach] {
                if v >= config.power_min[i] && v <= config.power_max[i] {
                    levels.push(v);
                }
            }
        }
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        per_ap.push(levels);
    }
    ThresholdSpace { per_ap }
}

/// Path-loss specification stored in topology files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathlossSpec {
    pub exponent: f64,
    pub reference_gain: f64,
}

impl Default for PathlossSpec {
    fn default() -> Self {
        Self {
            exponent: 3.0,
            reference_gain: 1.0,
        }
    }
}

/// On-disk topology description (JSON). Gains may be given explicitly as a
/// matrix, in which case they override the positions/path-loss pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    pub noise_floor: f64,
    pub cs_threshold: Vec<f64>,
    pub power_min: Vec<f64>,
    pub power_max: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathloss: Option<PathlossSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<Vec<f64>>>,
}

impl TopologyFile {
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

    pub fn to_config(&self) -> Result<NetworkConfig> {
        let gains = match (&self.gains, &self.positions) {
            (Some(g), _) => g.clone(),
            (None, Some(pos)) => {
                let pl = self.pathloss.unwrap_or_default();
                build_gains(pos, pl.exponent, pl.reference_gain)?
            }
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "topology needs either a gain matrix or positions".into(),
                ))
            }
        };
        NetworkConfig::new(
            self.noise_floor,
            self.cs_threshold.clone(),
            self.power_min.clone(),
            self.power_max.clone(),
            gains,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_ap_config(gain: f64, cs: f64) -> NetworkConfig {
        NetworkConfig::new(
            1.0,
            vec![cs; 2],
            vec![1.0; 2],
            vec![15.0; 2],
            vec![vec![0.0, gain], vec![gain, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn gains_clip_at_unit_distance() {
        let g = build_gains(&[[0.0, 0.0], [1.0, 0.0]], 3.0, 1.0).unwrap();
        assert_eq!(g[0][1], 1.0);
        assert_eq!(g[1][0], 1.0);
    }

    #[test]
    fn gains_follow_power_law() {
        let g = build_gains(&[[0.0, 0.0], [10.0, 0.0]], 3.0, 1.0).unwrap();
        assert!((g[0][1] - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn gains_on_a_line_scale_with_distance_cubed() {
        // Recompute via the distance formula independently of build_gains.
        let pos = [[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]];
        let g = build_gains(&pos, 3.0, 1.0).unwrap();
        let d12 = 10.0_f64;
        let d13 = 20.0_f64;
        let expected_ratio = (d12 / d13).powi(3);
        assert!((g[0][2] / g[0][1] - expected_ratio).abs() < 1e-15);
        assert!((g[0][2] - 0.125 * g[0][1]).abs() < 1e-15);
    }

    #[test]
    fn coincident_positions_rejected() {
        let err = build_gains(&[[1.0, 2.0], [1.0, 2.0]], 3.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::CoincidentPositions(0, 1)));
    }

    #[test]
    fn asymmetric_gains_averaged() {
        let cfg = NetworkConfig::new(
            1.0,
            vec![0.05; 2],
            vec![1.0; 2],
            vec![15.0; 2],
            vec![vec![0.0, 0.02], vec![0.04, 0.0]],
        )
        .unwrap();
        assert!((cfg.gains[0][1] - 0.03).abs() < 1e-15);
        assert_eq!(cfg.gains[0][1], cfg.gains[1][0]);
    }

    #[test]
    fn contention_view_mutual() {
        let cfg = two_ap_config(0.01, 0.05);
        let view = contention_view(&cfg, &PowerProfile::new(vec![10.0, 10.0]));
        // 10 * 0.01 = 0.1 >= 0.05 in both directions.
        assert_eq!(view.receive_domain[0], vec![1]);
        assert_eq!(view.receive_domain[1], vec![0]);
        assert_eq!(view.orders, vec![1, 1]);
    }

    #[test]
    fn contention_view_empty_below_threshold() {
        let cfg = two_ap_config(0.01, 0.05);
        let view = contention_view(&cfg, &PowerProfile::new(vec![1.0, 1.0]));
        assert!(view.receive_domain[0].is_empty());
        assert!(view.transmit_domain[1].is_empty());
        assert_eq!(view.orders, vec![0, 0]);
    }

    #[test]
    fn contention_view_matches_double_loop_oracle() {
        let cfg = NetworkConfig::new(
            1.0,
            vec![0.02, 0.06, 0.11],
            vec![1.0; 3],
            vec![15.0; 3],
            vec![
                vec![0.0, 0.004, 0.012],
                vec![0.004, 0.0, 0.0007],
                vec![0.012, 0.0007, 0.0],
            ],
        )
        .unwrap();
        let profile = PowerProfile::new(vec![4.0, 11.0, 7.5]);
        let view = contention_view(&cfg, &profile);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let reaches = profile.powers[j] * cfg.gains[j][i] >= cfg.cs_threshold[i];
                assert_eq!(view.in_receive(i, j), reaches, "receive ({i}, {j})");
                let heard = profile.powers[i] * cfg.gains[i][j] >= cfg.cs_threshold[j];
                assert_eq!(view.in_transmit(i, j), heard, "transmit ({i}, {j})");
            }
        }
        assert_eq!(view.orders, vec![view.receive_domain[0].len(), view.receive_domain[1].len(), view.receive_domain[2].len()]);
    }

    #[test]
    fn thresholds_keep_reach_pair_in_range() {
        let cfg = two_ap_config(0.01, 0.05);
        let space = reach_thresholds(&cfg);
        let expect = [1.0, 5.0 * (1.0 - REACH_MARGIN), 5.0, 15.0];
        assert_eq!(space.per_ap[0].len(), 4);
        for (got, want) in space.per_ap[0].iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn thresholds_discard_out_of_range() {
        let cfg = two_ap_config(0.01, 0.5);
        // reach = 0.5 / 0.01 = 50 > 15: discarded for both APs.
        let space = reach_thresholds(&cfg);
        assert_eq!(space.per_ap[0], vec![1.0, 15.0]);
        assert_eq!(space.per_ap[1], vec![1.0, 15.0]);
    }

    #[test]
    fn thresholds_bounded_and_contain_endpoints() {
        let cfg = NetworkConfig::new(
            1.0,
            vec![0.03, 0.007, 0.3, 0.0004],
            vec![1.0; 4],
            vec![15.0; 4],
            vec![
                vec![0.0, 0.004, 0.012, 0.03],
                vec![0.004, 0.0, 0.0007, 0.011],
                vec![0.012, 0.0007, 0.0, 0.002],
                vec![0.03, 0.011, 0.002, 0.0],
            ],
        )
        .unwrap();
        let space = reach_thresholds(&cfg);
        for i in 0..4 {
            let levels = &space.per_ap[i];
            assert!(levels.len() <= 2 * 4);
            assert_eq!(levels[0], cfg.power_min[i]);
            assert_eq!(*levels.last().unwrap(), cfg.power_max[i]);
            assert!(levels.windows(2).all(|w| w[0] < w[1]), "sorted strictly");
            // Hand-check every kept level against the pair condition.
            for &q in levels {
                assert!(q >= cfg.power_min[i] && q <= cfg.power_max[i]);
            }
        }
    }

    #[test]
    fn crossing_at_reach_points() {
        let cfg = two_ap_config(0.01, 0.05);
        let reach = 5.0;
        let at_reach = contention_view(&cfg, &PowerProfile::new(vec![reach, 1.0]));
        assert!(at_reach.in_transmit(0, 1));
        let below = contention_view(
            &cfg,
            &PowerProfile::new(vec![reach * (1.0 - REACH_MARGIN), 1.0]),
        );
        assert!(!below.in_transmit(0, 1));
        assert!(!below.in_receive(1, 0));
    }

    #[test]
    fn attempt_profile_bounds() {
        assert!(AttemptProfile::uniform(3, 0.6).is_ok());
        assert!(matches!(
            AttemptProfile::uniform(3, 1.0),
            Err(Error::InvalidAttemptRate(_))
        ));
        assert!(AttemptProfile::new(vec![0.2, 0.0]).is_err());
    }

    #[test]
    fn topology_file_round_trip_and_gain_override() {
        let file = TopologyFile {
            positions: Some(vec![[0.0, 0.0], [10.0, 0.0]]),
            noise_floor: 1.0,
            cs_threshold: vec![0.05; 2],
            power_min: vec![1.0; 2],
            power_max: vec![15.0; 2],
            pathloss: Some(PathlossSpec::default()),
            gains: None,
        };
        let cfg = file.to_config().unwrap();
        assert!((cfg.gains[0][1] - 1e-3).abs() < 1e-15);

        let forced = TopologyFile {
            gains: Some(vec![vec![0.0, 0.5], vec![0.5, 0.0]]),
            ..file
        };
        let cfg = forced.to_config().unwrap();
        assert_eq!(cfg.gains[0][1], 0.5, "explicit matrix overrides positions");

        let text = serde_json::to_string(&forced).unwrap();
        let back: TopologyFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, forced);
    }
}
