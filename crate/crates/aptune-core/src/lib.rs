//! Transmit-power optimization for CSMA/CA access-point networks.
//!
//! Raising an AP's transmit power cuts both ways: it lifts the SINR of its own
//! transmissions, but it also enlarges its carrier-sense footprint, forcing
//! more neighbors to back off and shrinking everyone's airtime share. This
//! crate models both effects in a single objective — per-AP airtime share
//! times Shannon capacity — and optimizes it over the finite lattice of
//! neighbor-reaching power levels, where its lower- and upper-bound
//! surrogates provably attain their optima.
//!
//! The crate provides:
//!
//! - [`net`]: network description, contention domains, and the threshold
//!   lattice;
//! - [`objective`]: the exact objective, its bound surrogates, and the
//!   two-AP closed form;
//! - [`search`]: greedy, randomized-annealed, and exhaustive lattice solvers;
//! - [`baselines`]: PHY-only and contention-only reference models;
//! - [`game`]: equilibrium checks and punishment mechanisms that make the
//!   coordinated profile self-enforcing, under perfect and noisy monitoring;
//! - [`harness`]: seeded topology generation and CSV experiment sweeps.

pub mod baselines;
pub mod error;
pub mod game;
pub mod harness;
pub mod net;
pub mod objective;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use net::{
    build_gains, contention_view, reach_thresholds, AttemptProfile, ContentionView, NetworkConfig,
    PowerProfile, ThresholdSpace, TopologyFile,
};
pub use objective::{
    capacity, sharing, two_user_optimum, utility_total, utility_with_rates, ObjectiveKind,
    TwoUserCase, UtilityBreakdown,
};
pub use search::{exhaustive, greedy, rand_search, AnnealSchedule, SearchTrace, TraceStep};

pub use baselines::{rpmac_feasible, solve_rpmac, solve_rpphy, Feasibility, RpmacConstraint};
pub use game::{
    compare_mim_mpm, mim_correlation_ok, mim_detection_probs, mpm_enforceability, mpm_step,
    nash_gap, simulate_repeated, DetectionConfig, EnforceabilityReport, GameState, MechanismFile,
    MechanismParams, Monitoring, NoiseModel, PeriodRecord, Policy, SimulationOutcome,
};
pub use harness::{gen_topology, run_plan, ExperimentPlan, Method, ResultRow, TopologySource};
