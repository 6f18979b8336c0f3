//! Shared fixtures for the solver benchmarks.

use aptune_core::harness::{gen_topology, DEFAULT_APS, DEFAULT_SEED, DEFAULT_SIDE};
use aptune_core::net::NetworkConfig;

/// The default seeded experiment topology.
pub fn default_topology() -> NetworkConfig {
    gen_topology(DEFAULT_APS, DEFAULT_SIDE, DEFAULT_SEED)
}

/// A smaller instance sized for the exhaustive oracle.
pub fn small_topology() -> NetworkConfig {
    gen_topology(4, 100.0, DEFAULT_SEED)
}
