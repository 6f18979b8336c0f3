//! `aptune` — transmit-power planning for CSMA/CA access-point networks.
//!
//! Subcommands cover topology generation, power-profile optimization, the
//! single-layer baselines, the repeated-game mechanisms, and CSV sweeps.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aptune_core::baselines::{rpmac_feasible, solve_rpmac, solve_rpphy, RpmacConstraint};
use aptune_core::game::{
    compare_mim_mpm, mim_correlation_ok, mpm_enforceability, simulate_repeated, Monitoring,
    Policy,
};
use aptune_core::harness::{
    gen_topology_file, run_plan, standalone_aps, write_csv, ExperimentPlan, Method,
    TopologyParams, TopologySource, DEFAULT_APS, DEFAULT_SEED, DEFAULT_SIDE,
};
use aptune_core::net::{contention_view, NetworkConfig, TopologyFile};
use aptune_core::objective::{utility_total, ObjectiveKind};
use aptune_core::search::{exhaustive, greedy, rand_search, AnnealSchedule};
use aptune_core::{Error, MechanismFile, Result};

#[derive(Parser)]
#[command(name = "aptune", version, about = "Power planning for CSMA/CA AP networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Topology selection shared by most subcommands: a JSON file wins over the
/// generator parameters.
#[derive(Args, Clone)]
struct TopologyArgs {
    /// Topology JSON file.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Number of APs for the generator.
    #[arg(long, default_value_t = DEFAULT_APS)]
    n: usize,
    /// Square side in meters for the generator.
    #[arg(long, default_value_t = DEFAULT_SIDE)]
    side: f64,
    /// Seed for the generator.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl TopologyArgs {
    fn to_source(&self) -> TopologySource {
        match &self.topology {
            Some(path) => TopologySource::File(path.clone()),
            None => TopologySource::Generate {
                n_aps: self.n,
                side: self.side,
                seed: self.seed,
            },
        }
    }

    fn load(&self) -> Result<NetworkConfig> {
        match &self.topology {
            Some(path) => TopologyFile::load(path)?.to_config(),
            None => Ok(aptune_core::gen_topology(self.n, self.side, self.seed)),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a uniform random topology and write it as JSON.
    GenTopology {
        #[arg(long, default_value_t = DEFAULT_APS)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        side: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Uniform carrier-sense threshold override.
        #[arg(long)]
        cs: Option<f64>,
        /// Noise floor override.
        #[arg(long)]
        noise: Option<f64>,
        /// Output path for the topology JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimize power profiles for the given methods and attempt rates.
    Optimize {
        #[command(flatten)]
        topology: TopologyArgs,
        /// Attempt rates, comma separated.
        #[arg(long, default_value = "0.6")]
        pc: String,
        /// Methods, comma separated (e.g. greedy-pl,rand,max-power).
        #[arg(long, default_value = "greedy-pl,greedy-pu,rand")]
        method: String,
        /// Base seed for the randomized searches.
        #[arg(long, default_value_t = 0)]
        search_seed: u64,
        /// Write the rows as sweep CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the search trace CSV of a single lattice method (requires
        /// exactly one --pc value and one of greedy-pl/greedy-pu/rand-pl/
        /// rand-pu/exhaustive).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// PHY-only convex-relaxation baseline.
    BaselinePhy {
        #[command(flatten)]
        topology: TopologyArgs,
        /// Attempt rate for the exact-objective evaluation of the solution.
        #[arg(long, default_value_t = 0.6)]
        pc: f64,
        /// Write per-AP power details as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contention-minimization baseline over an SNR-floor list.
    BaselineMac {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, default_value_t = 0.6)]
        pc: f64,
        /// SNR floors, comma separated.
        #[arg(long, default_value = "0.5,1,2,4,8")]
        snr0: String,
        /// Write one CSV row per floor.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Punishment-mechanism analysis and simulation under perfect monitoring.
    GameMpm {
        #[command(flatten)]
        topology: TopologyArgs,
        /// Mechanism JSON file.
        #[arg(long)]
        mechanism: PathBuf,
        /// Simulate this many periods (0 = analysis only).
        #[arg(long, default_value_t = 0)]
        horizon: usize,
        /// Simulation seed.
        #[arg(long, default_value_t = 1)]
        sim_seed: u64,
        /// One-shot deviation "ap:period:power:rate" applied during the
        /// simulation.
        #[arg(long)]
        deviate: Option<String>,
        /// Write the simulated history CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold-detection mechanism under noisy monitoring: calibration
    /// checks plus the paired comparison against a zero-tolerance trigger.
    GameMim {
        #[command(flatten)]
        topology: TopologyArgs,
        /// Mechanism JSON file with noise and detection sections.
        #[arg(long)]
        mechanism: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        /// Simulation seeds, comma separated.
        #[arg(long, default_value = "1,2,3,4,5")]
        seeds: String,
        /// Write the per-seed comparison CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one threshold-arm history CSV (first seed).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Full sweep over attempt rates and methods, written as CSV.
    Sweep {
        #[command(flatten)]
        topology: TopologyArgs,
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
        pc: String,
        #[arg(long, default_value = "max-power,greedy-pl,greedy-pu,rand")]
        method: String,
        /// SNR floors for RPMAC rows.
        #[arg(long, default_value = "")]
        snr0: String,
        #[arg(long, default_value_t = 0)]
        search_seed: u64,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("not a number: {s}")))
        })
        .collect()
}

fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| Error::InvalidConfig(format!("not an integer: {s}")))
        })
        .collect()
}

fn parse_methods(text: &str) -> Result<Vec<Method>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            Method::parse(s).ok_or_else(|| Error::InvalidConfig(format!("unknown method: {s}")))
        })
        .collect()
}

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    })
}

fn pack(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn warn_standalone(config: &NetworkConfig) {
    let alone = standalone_aps(config);
    if !alone.is_empty() {
        eprintln!(
            "note: APs {alone:?} are outside everyone's carrier-sense range even at maximum power"
        );
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenTopology {
            n,
            side,
            seed,
            cs,
            noise,
            out,
        } => {
            let mut params = TopologyParams {
                n_aps: n,
                side,
                seed,
                ..TopologyParams::default()
            };
            if let Some(cs) = cs {
                params.cs_threshold = cs;
            }
            if let Some(noise) = noise {
                params.noise_floor = noise;
            }
            let file = gen_topology_file(&params);
            let config = file.to_config()?;
            warn_standalone(&config);
            file.save(&out)?;
            let view = contention_view(&config, &config.max_profile());
            println!(
                "wrote {} ({} APs, mean max-power contention order {:.2})",
                out.display(),
                n,
                view.total_order() as f64 / n as f64
            );
        }
        Command::Optimize {
            topology,
            pc,
            method,
            search_seed,
            out,
            trace,
        } => {
            let rates = parse_f64_list(&pc)?;
            let methods = parse_methods(&method)?;
            if let Some(path) = &trace {
                if rates.len() != 1 || methods.len() != 1 {
                    return Err(Error::InvalidConfig(
                        "--trace needs exactly one --pc value and one method".into(),
                    ));
                }
                let config = topology.load()?;
                let p_c = rates[0];
                let schedule = AnnealSchedule::for_n_aps(config.n_aps);
                let run = match methods[0] {
                    Method::GreedyLower => greedy(&config, p_c, ObjectiveKind::Lower)?,
                    Method::GreedyUpper => greedy(&config, p_c, ObjectiveKind::Upper)?,
                    Method::RandLower => {
                        rand_search(&config, p_c, ObjectiveKind::Lower, search_seed, &schedule)?
                    }
                    Method::RandUpper => {
                        rand_search(&config, p_c, ObjectiveKind::Upper, search_seed, &schedule)?
                    }
                    Method::Exhaustive => exhaustive(&config, p_c, ObjectiveKind::Lower)?,
                    other => {
                        return Err(Error::InvalidConfig(format!(
                            "{} has no search trace",
                            other.label()
                        )))
                    }
                };
                let mut w = BufWriter::new(File::create(path)?);
                run.write_csv(&mut w)?;
                eprintln!(
                    "trace: {} steps, {} evaluations, best total {:.4}",
                    run.steps.len(),
                    run.evaluations,
                    run.best_total
                );
            }
            let plan = ExperimentPlan {
                topology: topology.to_source(),
                p_c_grid: rates,
                methods,
                snr_grid: vec![],
                search_seed,
            };
            let rows = run_plan(&plan)?;
            for row in &rows {
                match row.total_exact {
                    Some(total) => println!(
                        "pc {:<5} {:<12} exact {:>10.4}  surrogate {:>10.4}  powers [{}]",
                        row.p_c,
                        row.method,
                        total,
                        row.total_surrogate.unwrap_or(total),
                        pack(&row.per_ap_power)
                    ),
                    None => println!("pc {:<5} {:<12} {}", row.p_c, row.method, row.status),
                }
            }
            if out.is_some() {
                let mut w = out_writer(&out)?;
                write_csv(&rows, &mut w)?;
            }
        }
        Command::BaselinePhy { topology, pc, out } => {
            let config = topology.load()?;
            warn_standalone(&config);
            let profile = solve_rpphy(&config);
            let exact = utility_total(&config, &profile, pc, ObjectiveKind::Exact)?;
            println!("relaxed PHY solution, exact total {:.4} at pc {pc}", exact.total);
            let mut w = out_writer(&out)?;
            writeln!(w, "ap,power,row_gain,stationary_target")?;
            for i in 0..config.n_aps {
                let row_gain: f64 = (0..config.n_aps)
                    .filter(|&j| j != i)
                    .map(|j| config.gains[i][j])
                    .sum();
                writeln!(
                    w,
                    "{},{},{},{}",
                    i,
                    profile.powers[i],
                    row_gain,
                    config.noise_floor / row_gain
                )?;
            }
        }
        Command::BaselineMac {
            topology,
            pc,
            snr0,
            out,
        } => {
            let config = topology.load()?;
            warn_standalone(&config);
            let floors = parse_f64_list(&snr0)?;
            let mut w = out_writer(&out)?;
            writeln!(w, "snr0,status,total_order,per_ap_power;per_ap_slack")?;
            for &floor in &floors {
                let constraint = RpmacConstraint::new(floor)?;
                match solve_rpmac(&config, pc, &constraint) {
                    Ok(profile) => {
                        let feas = rpmac_feasible(&config, &profile, pc, &constraint)?;
                        let order = contention_view(&config, &profile).total_order();
                        writeln!(
                            w,
                            "{},ok,{},{},{}",
                            floor,
                            order,
                            pack(&profile.powers),
                            pack(&feas.slack)
                        )?;
                    }
                    Err(Error::RpmacInfeasible {
                        best_profile,
                        slack,
                        worst_violation,
                    }) => {
                        writeln!(
                            w,
                            "{},infeasible(worst {worst_violation}),,{},{}",
                            floor,
                            pack(&best_profile),
                            pack(&slack)
                        )?;
                    }
                    Err(other) => return Err(other),
                }
            }
        }
        Command::GameMpm {
            topology,
            mechanism,
            horizon,
            sim_seed,
            deviate,
            out,
        } => {
            let config = topology.load()?;
            warn_standalone(&config);
            let (params, _, _) = MechanismFile::load(&mechanism)?.unpack(&config)?;
            let report = mpm_enforceability(&config, &params)?;
            println!("enforceable: {}", report.enforceable);
            println!(
                "  A1 punishment-hurts {}  A2 phase-order {}  A3 rate-burst {}  deterrence@L={} {}",
                report.a1, report.a2, report.a3, params.punish_len, report.holds_at_len
            );
            if !report.a1_violators.is_empty() {
                println!("  A1 violators: {:?}", report.a1_violators);
            }
            println!("  minimal workable punishment length: {:?}", report.minimal_len);
            for i in 0..config.n_aps {
                println!(
                    "  ap {i}: cooperative {:.4}  punished {:.4}  one-shot cap {:.4}  punish-phase cap {:.4}",
                    report.cooperative[i],
                    report.punishment[i],
                    report.one_shot_cap[i],
                    report.punish_shot_cap[i]
                );
            }
            if horizon > 0 {
                let mut policies = vec![Policy::Compliant; config.n_aps];
                if let Some(descriptor) = &deviate {
                    let parts: Vec<&str> = descriptor.split(':').collect();
                    if parts.len() != 4 {
                        return Err(Error::InvalidConfig(
                            "expected --deviate ap:period:power:rate".into(),
                        ));
                    }
                    let ap: usize = parts[0]
                        .parse()
                        .map_err(|_| Error::InvalidConfig("bad ap index".into()))?;
                    policies[ap] = Policy::OneShot {
                        period: parts[1]
                            .parse()
                            .map_err(|_| Error::InvalidConfig("bad period".into()))?,
                        power: parts[2]
                            .parse()
                            .map_err(|_| Error::InvalidConfig("bad power".into()))?,
                        rate: parts[3]
                            .parse()
                            .map_err(|_| Error::InvalidConfig("bad rate".into()))?,
                    };
                }
                let outcome = simulate_repeated(
                    &config,
                    &params,
                    &policies,
                    horizon,
                    sim_seed,
                    &Monitoring::Perfect,
                )?;
                println!("discounted utilities: {:?}", outcome.discounted);
                if out.is_some() {
                    let mut w = out_writer(&out)?;
                    outcome.write_csv(&mut w)?;
                }
            }
        }
        Command::GameMim {
            topology,
            mechanism,
            horizon,
            seeds,
            out,
            history,
        } => {
            let config = topology.load()?;
            warn_standalone(&config);
            let (params, noise, detection) = MechanismFile::load(&mechanism)?.unpack(&config)?;
            let noise = noise.ok_or_else(|| {
                Error::InvalidMechanism("mechanism file needs a noise section".into())
            })?;
            let detection = detection.ok_or_else(|| {
                Error::InvalidMechanism("mechanism file needs a detection section".into())
            })?;
            for i in 0..config.n_aps {
                for j in 0..config.n_aps {
                    if i < j {
                        match mim_correlation_ok(&noise, &detection, i, j) {
                            Ok(ok) => println!("detection reinforcement ({i},{j}): {ok}"),
                            Err(e) => println!("detection reinforcement ({i},{j}): n/a ({e})"),
                        }
                    }
                }
            }
            let seed_list = parse_u64_list(&seeds)?;
            let report =
                compare_mim_mpm(&config, &params, &noise, &detection, horizon, &seed_list)?;
            println!(
                "discounted social utility: threshold {:.4} vs zero-tolerance {:.4}",
                report.mean_threshold, report.mean_naive
            );
            println!(
                "paired difference {:.4} +/- {:.4} (95% normal CI)",
                report.mean_diff,
                report.diff_ci95()
            );
            if out.is_some() {
                let mut w = out_writer(&out)?;
                writeln!(w, "seed,zero_tolerance,threshold,diff")?;
                for (seed, (naive, thresh)) in seed_list.iter().zip(&report.per_seed) {
                    writeln!(w, "{seed},{naive},{thresh},{}", thresh - naive)?;
                }
            }
            if let Some(path) = history {
                let outcome = simulate_repeated(
                    &config,
                    &params,
                    &vec![Policy::Compliant; config.n_aps],
                    horizon,
                    seed_list.first().copied().unwrap_or(1),
                    &Monitoring::Imperfect {
                        noise: noise.clone(),
                        detection: detection.clone(),
                    },
                )?;
                let mut w = BufWriter::new(File::create(path)?);
                outcome.write_csv(&mut w)?;
            }
        }
        Command::Sweep {
            topology,
            pc,
            method,
            snr0,
            search_seed,
            out,
        } => {
            let plan = ExperimentPlan {
                topology: topology.to_source(),
                p_c_grid: parse_f64_list(&pc)?,
                methods: parse_methods(&method)?,
                snr_grid: parse_f64_list(&snr0)?,
                search_seed,
            };
            let rows = run_plan(&plan)?;
            let mut w = out_writer(&out)?;
            write_csv(&rows, &mut w)?;
            if let Some(path) = &out {
                eprintln!("wrote {} rows to {}", rows.len(), path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
