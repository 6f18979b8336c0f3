//! Topology generation and experiment sweeps with CSV output.

use std::io::Write;
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{rpphy_objective, solve_rpmac, solve_rpphy, RpmacConstraint};
use crate::error::{Error, Result};
use crate::net::{contention_view, NetworkConfig, PathlossSpec, PowerProfile, TopologyFile};
use crate::objective::{utility_total, ObjectiveKind, UtilityBreakdown};
use crate::search::{exhaustive, greedy, rand_search, AnnealSchedule};

pub const DEFAULT_APS: usize = 10;
pub const DEFAULT_SIDE: f64 = 100.0;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_NOISE_FLOOR: f64 = 1.0;
pub const DEFAULT_POWER_MIN: f64 = 1.0;
pub const DEFAULT_POWER_MAX: f64 = 15.0;
/// Uniform carrier-sense threshold calibrated once so the default seeded
/// topology has a mean contention order between 2 and 5 at maximum power
/// (a carrier-sense radius of roughly 35 m under the default path loss).
pub const DEFAULT_CS_THRESHOLD: f64 = 3.5e-4;

/// Everything `gen_topology` needs; `Default` gives the experiment defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyParams {
    pub n_aps: usize,
    pub side: f64,
    pub seed: u64,
    pub noise_floor: f64,
    pub cs_threshold: f64,
    pub power_min: f64,
    pub power_max: f64,
    pub pathloss: PathlossSpec,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            n_aps: DEFAULT_APS,
            side: DEFAULT_SIDE,
            seed: DEFAULT_SEED,
            noise_floor: DEFAULT_NOISE_FLOOR,
            cs_threshold: DEFAULT_CS_THRESHOLD,
            power_min: DEFAULT_POWER_MIN,
            power_max: DEFAULT_POWER_MAX,
            pathloss: PathlossSpec {
                exponent: 3.0,
                reference_gain: 1.0,
            },
        }
    }
}

/// Draws AP positions uniformly on a square and writes out the full topology
/// description, reproducible by seed.
pub fn gen_topology_file(params: &TopologyParams) -> TopologyFile {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let positions: Vec<[f64; 2]> = (0..params.n_aps)
        .map(|_| {
            [
                rng.random_range(0.0..params.side),
                rng.random_range(0.0..params.side),
            ]
        })
        .collect();
    TopologyFile {
        positions: Some(positions),
        noise_floor: params.noise_floor,
        cs_threshold: vec![params.cs_threshold; params.n_aps],
        power_min: vec![params.power_min; params.n_aps],
        power_max: vec![params.power_max; params.n_aps],
        pathloss: Some(params.pathloss),
        gains: None,
    }
}

/// Seeded uniform topology with the experiment defaults.
pub fn gen_topology(n_aps: usize, side: f64, seed: u64) -> NetworkConfig {
    let params = TopologyParams {
        n_aps,
        side,
        seed,
        ..TopologyParams::default()
    };
    gen_topology_file(&params)
        .to_config()
        .expect("generated topologies are always valid")
}

/// APs that no other AP can reach even at maximum power. Such APs sit outside
/// everyone's carrier-sense range; a warning-level signal, not an error.
pub fn standalone_aps(config: &NetworkConfig) -> Vec<usize> {
    let view = contention_view(config, &config.max_profile());
    (0..config.n_aps)
        .filter(|&i| view.receive_domain[i].is_empty())
        .collect()
}

/// Where an experiment's topology comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TopologySource {
    File(PathBuf),
    Generate { n_aps: usize, side: f64, seed: u64 },
}

impl TopologySource {
    fn realize(&self) -> Result<(NetworkConfig, Option<u64>)> {
        match self {
            TopologySource::File(path) => Ok((TopologyFile::load(path)?.to_config()?, None)),
            TopologySource::Generate { n_aps, side, seed } => {
                Ok((gen_topology(*n_aps, *side, *seed), Some(*seed)))
            }
        }
    }
}

/// Power-selection methods a sweep can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MaxPower,
    GreedyLower,
    GreedyUpper,
    RandLower,
    RandUpper,
    /// Randomized search on both bounds, keeping whichever profile evaluates
    /// better on the exact objective.
    RandBest,
    Exhaustive,
    Rpphy,
    Rpmac,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::MaxPower => "MAX_POWER",
            Method::GreedyLower => "GREEDY_PL",
            Method::GreedyUpper => "GREEDY_PU",
            Method::RandLower => "RAND_PL",
            Method::RandUpper => "RAND_PU",
            Method::RandBest => "RAND",
            Method::Exhaustive => "EXHAUSTIVE",
            Method::Rpphy => "RPPHY",
            Method::Rpmac => "RPMAC",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        let norm = token.trim().to_ascii_uppercase().replace('-', "_");
        Some(match norm.as_str() {
            "MAX_POWER" | "MAX" => Method::MaxPower,
            "GREEDY_PL" => Method::GreedyLower,
            "GREEDY_PU" => Method::GreedyUpper,
            "RAND_PL" => Method::RandLower,
            "RAND_PU" => Method::RandUpper,
            "RAND" | "RAND_BEST" => Method::RandBest,
            "EXHAUSTIVE" => Method::Exhaustive,
            "RPPHY" => Method::Rpphy,
            "RPMAC" => Method::Rpmac,
            _ => return None,
        })
    }

    pub const ALL: [Method; 9] = [
        Method::MaxPower,
        Method::GreedyLower,
        Method::GreedyUpper,
        Method::RandLower,
        Method::RandUpper,
        Method::RandBest,
        Method::Exhaustive,
        Method::Rpphy,
        Method::Rpmac,
    ];
}

/// A sweep: one topology, a grid of attempt rates, a list of methods, and an
/// SNR grid for the contention baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub topology: TopologySource,
    pub p_c_grid: Vec<f64>,
    pub methods: Vec<Method>,
    /// SNR floors used by the RPMAC method; one row per floor.
    pub snr_grid: Vec<f64>,
    /// Base seed for the randomized searches; each cell derives its own.
    pub search_seed: u64,
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub topology_seed: Option<u64>,
    pub p_c: f64,
    pub method: String,
    pub status: String,
    pub total_exact: Option<f64>,
    pub total_surrogate: Option<f64>,
    pub per_ap_power: Vec<f64>,
    pub per_ap_utility: Vec<f64>,
}

/// Exact header (the trailing packed-vector column names mirror the
/// semicolon packing inside the fields).
pub const SWEEP_CSV_HEADER: &str =
    "topology_seed,p_c,method,status,total_exact,total_surrogate,per_ap_power;per_ap_utility";

fn pack(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// Serializes rows to the sweep CSV format; identical inputs yield identical
/// bytes.
pub fn write_csv<W: Write>(rows: &[ResultRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            row.topology_seed.map(|s| s.to_string()).unwrap_or_default(),
            row.p_c,
            row.method,
            row.status,
            row.total_exact.map(|t| t.to_string()).unwrap_or_default(),
            row.total_surrogate
                .map(|t| t.to_string())
                .unwrap_or_default(),
            pack(&row.per_ap_power),
            pack(&row.per_ap_utility),
        )?;
    }
    Ok(())
}

fn cell_seed(base: u64, pc_index: usize, method: Method) -> u64 {
    let tag = method as u64 + 1;
    base ^ (pc_index as u64 + 1)
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(tag.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Profile plus the surrogate total the method optimized, if it has one.
fn run_method(
    config: &NetworkConfig,
    method: Method,
    p_c: f64,
    seed: u64,
    snr_floor: Option<f64>,
) -> Result<(PowerProfile, Option<f64>)> {
    match method {
        Method::MaxPower => Ok((config.max_profile(), None)),
        Method::GreedyLower => {
            let t = greedy(config, p_c, ObjectiveKind::Lower)?;
            Ok((t.best_profile, Some(t.best_total)))
        }
        Method::GreedyUpper => {
            let t = greedy(config, p_c, ObjectiveKind::Upper)?;
            Ok((t.best_profile, Some(t.best_total)))
        }
        Method::RandLower => {
            let schedule = AnnealSchedule::for_n_aps(config.n_aps);
            let t = rand_search(config, p_c, ObjectiveKind::Lower, seed, &schedule)?;
            Ok((t.best_profile, Some(t.best_total)))
        }
        Method::RandUpper => {
            let schedule = AnnealSchedule::for_n_aps(config.n_aps);
            let t = rand_search(config, p_c, ObjectiveKind::Upper, seed, &schedule)?;
            Ok((t.best_profile, Some(t.best_total)))
        }
        Method::RandBest => {
            let schedule = AnnealSchedule::for_n_aps(config.n_aps);
            let lo = rand_search(config, p_c, ObjectiveKind::Lower, seed, &schedule)?;
            let up = rand_search(config, p_c, ObjectiveKind::Upper, seed ^ 0x5eed, &schedule)?;
            let lo_exact = utility_total(config, &lo.best_profile, p_c, ObjectiveKind::Exact)?;
            let up_exact = utility_total(config, &up.best_profile, p_c, ObjectiveKind::Exact)?;
            if lo_exact.total >= up_exact.total {
                Ok((lo.best_profile, Some(lo.best_total)))
            } else {
                Ok((up.best_profile, Some(up.best_total)))
            }
        }
        Method::Exhaustive => {
            let t = exhaustive(config, p_c, ObjectiveKind::Lower)?;
            Ok((t.best_profile, Some(t.best_total)))
        }
        Method::Rpphy => {
            let profile = solve_rpphy(config);
            let objective = rpphy_objective(config, &profile);
            Ok((profile, Some(objective)))
        }
        Method::Rpmac => {
            let floor = snr_floor.expect("RPMAC rows always carry an SNR floor");
            let constraint = RpmacConstraint::new(floor)?;
            let profile = solve_rpmac(config, p_c, &constraint)?;
            let order = contention_view(config, &profile).total_order();
            Ok((profile, Some(order as f64)))
        }
    }
}

fn evaluate_row(
    config: &NetworkConfig,
    topology_seed: Option<u64>,
    p_c: f64,
    label: String,
    outcome: Result<(PowerProfile, Option<f64>)>,
) -> Result<ResultRow> {
    match outcome {
        Ok((profile, surrogate)) => {
            config.validate_profile(&profile)?;
            let exact: UtilityBreakdown = utility_total(config, &profile, p_c, ObjectiveKind::Exact)?;
            Ok(ResultRow {
                topology_seed,
                p_c,
                method: label,
                status: "ok".into(),
                total_exact: Some(exact.total),
                total_surrogate: surrogate.or(Some(exact.total)),
                per_ap_power: profile.powers,
                per_ap_utility: exact.per_ap,
            })
        }
        Err(err) => Ok(ResultRow {
            topology_seed,
            p_c,
            method: label,
            status: format!("error({})", err.to_string().replace(',', ";")),
            total_exact: None,
            total_surrogate: None,
            per_ap_power: Vec::new(),
            per_ap_utility: Vec::new(),
        }),
    }
}

/// Runs every (attempt rate, method) cell of the plan. Method failures are
/// recorded as status rows; only invalid plans or topology IO fail the run.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<ResultRow>> {
    if plan.p_c_grid.is_empty() {
        return Err(Error::InvalidPlan("empty attempt-rate grid"));
    }
    if plan.methods.is_empty() {
        return Err(Error::InvalidPlan("empty method list"));
    }
    if plan.methods.contains(&Method::Rpmac) && plan.snr_grid.is_empty() {
        return Err(Error::InvalidPlan("RPMAC requires a non-empty SNR grid"));
    }
    for &p_c in &plan.p_c_grid {
        if !(p_c > 0.0 && p_c < 1.0) {
            return Err(Error::InvalidAttemptRate(p_c));
        }
    }
    let (config, topology_seed) = plan.topology.realize()?;

    let mut rows = Vec::new();
    for (pc_index, &p_c) in plan.p_c_grid.iter().enumerate() {
        for &method in &plan.methods {
            let seed = cell_seed(plan.search_seed, pc_index, method);
            if method == Method::Rpmac {
                for &floor in &plan.snr_grid {
                    let outcome = run_method(&config, method, p_c, seed, Some(floor));
                    rows.push(evaluate_row(
                        &config,
                        topology_seed,
                        p_c,
                        format!("RPMAC({floor})"),
                        outcome,
                    )?);
                }
            } else {
                let outcome = run_method(&config, method, p_c, seed, None);
                rows.push(evaluate_row(
                    &config,
                    topology_seed,
                    p_c,
                    method.label().to_string(),
                    outcome,
                )?);
            }
        }
    }
    Ok(rows)
}
