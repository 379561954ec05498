//! `agco`: scenario generation, single solves and experiment sweeps from
//! the command line. Exit codes: 0 success, 1 solver or simulation
//! failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use agco_bench::{run_experiment, ExperimentSpec, Family};
use agco_core::charging::{simulate, ChargingScenario, SimOptions};
use agco_core::famt::{solve_greedy_pt, solve_mt_mcmf_with, FamtAssignment, FamtConfig};
use agco_core::maft::{solve_w_grd, solve_w_ilp, MaftInstance, WeightConfig};
use agco_core::model::FamtScenario;
use agco_core::scenario::{gen_charging, gen_famt, gen_maft, Distribution, GenConfig, QPolicy};

#[derive(Parser)]
#[command(
    name = "agco",
    about = "Air-ground collaborative task allocation: solvers, charging simulation and benchmarks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    Famt,
    Maft,
    Charging,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistributionArg {
    Compact,
    Scattered,
    Hybrid,
}

impl From<DistributionArg> for Distribution {
    fn from(value: DistributionArg) -> Self {
        match value {
            DistributionArg::Compact => Distribution::Compact,
            DistributionArg::Scattered => Distribution::Scattered,
            DistributionArg::Hybrid => Distribution::Hybrid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamtAlgo {
    Mcmf,
    Greedy,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaftAlgo {
    Wilp,
    Wgrd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChargeAlgo {
    Pctp,
    Static,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonOut {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for tabular results.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario to JSON.
    Gen {
        #[arg(long, value_enum, default_value = "famt")]
        kind: ScenarioKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "hybrid")]
        distribution: DistributionArg,
        /// UAV count (few-agents scenarios).
        #[arg(long, default_value_t = 2)]
        uavs: u32,
        /// UGV count (few-agents scenarios).
        #[arg(long, default_value_t = 2)]
        ugvs: u32,
        #[arg(long, default_value_t = 20)]
        tasks: u32,
        /// Fixed per-agent task quota.
        #[arg(long, default_value_t = 3, conflicts_with = "q_random")]
        q: u32,
        /// Sample each agent's quota uniformly from [2, 7] instead.
        #[arg(long)]
        q_random: bool,
        /// Per-task agent cap (few-agents) — demand is a separate knob.
        #[arg(long, default_value_t = 6)]
        p: u32,
        /// UAVs per support UGV (charging scenarios).
        #[arg(long, default_value_t = 3)]
        uavs_per_ugv: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a few-agents-many-tasks scenario.
    SolveFamt {
        /// Scenario JSON produced by `gen --kind famt`.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "mcmf")]
        algo: FamtAlgo,
        /// Write the flow network in DOT format to this path (mcmf only).
        #[arg(long)]
        dump_network: Option<PathBuf>,
        #[command(flatten)]
        output: CommonOut,
    },
    /// Solve a many-agents-few-tasks instance.
    SolveMaft {
        /// Instance JSON produced by `gen --kind maft`.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "wilp")]
        algo: MaftAlgo,
        /// Weight of travel time in [0, 1]; distance gets the rest.
        #[arg(long, default_value_t = 0.5)]
        kt: f64,
        #[command(flatten)]
        output: CommonOut,
    },
    /// Simulate UAV charging rendezvous.
    SimCharging {
        /// Scenario JSON: one charging scenario or an array of them.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "pctp")]
        algo: ChargeAlgo,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long, default_value_t = 240.0)]
        horizon: f64,
        /// Write the per-step trajectory CSV here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment family over a seeded scenario batch.
    Bench {
        /// Family: vary_tasks, vary_agents, vary_q, vary_distribution,
        /// weight_sweep or charging.
        #[arg(long)]
        family: Option<String>,
        /// Experiment spec JSON; CLI flags override its family.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use seeds 0..N instead of the spec's list.
        #[arg(long)]
        seeds: Option<u64>,
        #[command(flatten)]
        output: CommonOut,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}

fn write_out(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen {
            kind,
            seed,
            distribution,
            uavs,
            ugvs,
            tasks,
            q,
            q_random,
            p,
            uavs_per_ugv,
            out,
        } => {
            let config = GenConfig {
                seed,
                distribution: distribution.into(),
                n_uavs: uavs,
                n_ugvs: ugvs,
                n_tasks: tasks,
                q_policy: if q_random {
                    QPolicy::Uniform(2, 7)
                } else {
                    QPolicy::Fixed(q)
                },
                p,
                uavs_per_ugv,
                ..GenConfig::default()
            };
            let json = match kind {
                ScenarioKind::Famt => gen_famt(&config)?.to_json()?,
                ScenarioKind::Maft => gen_maft(&config)?.to_json()?,
                ScenarioKind::Charging => {
                    serde_json::to_string_pretty(&gen_charging(&config)?)?
                }
            };
            write_out(&out, &(json + "\n"))
        }

        Command::SolveFamt {
            input,
            algo,
            dump_network,
            output,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let scenario = FamtScenario::from_json(&text).map_err(|e| anyhow!(e))?;
            let started = std::time::Instant::now();
            let assignment: FamtAssignment = match algo {
                FamtAlgo::Mcmf => solve_mt_mcmf_with(&scenario, &FamtConfig::default())?,
                FamtAlgo::Greedy => solve_greedy_pt(&scenario)?,
            };
            let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
            if let Some(dot_path) = dump_network {
                let dot = agco_core::famt::network_dot(&scenario, &FamtConfig::default())?;
                std::fs::write(&dot_path, dot)
                    .with_context(|| format!("writing {}", dot_path.display()))?;
            }
            let content = match output.format {
                OutputFormat::Json => assignment.to_json()? + "\n",
                OutputFormat::Csv => format!(
                    "{}\n{}\n",
                    FamtAssignment::csv_header(),
                    assignment.csv_summary(
                        &input.display().to_string(),
                        &scenario,
                        runtime_ms
                    )
                ),
            };
            write_out(&output.out, &content)
        }

        Command::SolveMaft {
            input,
            algo,
            kt,
            output,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let instance = MaftInstance::from_json(&text).map_err(|e| anyhow!(e))?;
            let weights = WeightConfig::new(kt);
            let assignment = match algo {
                MaftAlgo::Wilp => solve_w_ilp(&instance, weights)?,
                MaftAlgo::Wgrd => solve_w_grd(&instance, weights)?,
            };
            let content = match output.format {
                OutputFormat::Json => assignment.to_json()? + "\n",
                OutputFormat::Csv => format!(
                    "algorithm,kt,kd,raw_distance,raw_time,objective,nodes,gap\n{},{},{},{},{},{},{},{}\n",
                    assignment.algorithm,
                    assignment.weights.k_t,
                    assignment.weights.k_d,
                    assignment.raw_distance,
                    assignment.raw_time,
                    assignment.normalized_objective,
                    assignment.nodes_explored,
                    assignment.gap,
                ),
            };
            write_out(&output.out, &content)
        }

        Command::SimCharging {
            input,
            algo,
            dt,
            horizon,
            trajectory,
            out,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let scenarios: Vec<ChargingScenario> = if text.trim_start().starts_with('[') {
                serde_json::from_str(&text).context("parsing charging scenario array")?
            } else {
                vec![ChargingScenario::from_json(&text).map_err(|e| anyhow!(e))?]
            };
            let options = SimOptions {
                dt,
                horizon,
                record_trajectory: trajectory.is_some(),
            };
            let mobile = matches!(algo, ChargeAlgo::Pctp);
            let mut results = Vec::new();
            for scenario in &scenarios {
                results.push(simulate(scenario, options, mobile)?);
            }
            if let Some(traj_path) = &trajectory {
                let mut csv = String::from("scenario,t,entity,x,y,energy,state\n");
                for (i, result) in results.iter().enumerate() {
                    if let Some(block) = result.trajectory_csv() {
                        for line in block.lines().skip(1) {
                            csv.push_str(&format!("{i},{line}\n"));
                        }
                    }
                }
                std::fs::write(traj_path, csv)
                    .with_context(|| format!("writing {}", traj_path.display()))?;
            }
            let incomplete = results.iter().any(|r| !r.complete);
            let summary = serde_json::json!({
                "algorithm": if mobile { "pctp" } else { "static" },
                "dt": dt,
                "horizon": horizon,
                "total_distance": results.iter().map(|r| r.total_distance).sum::<f64>(),
                "time_to_last_charge": results
                    .iter()
                    .map(|r| r.time_to_last_charge)
                    .fold(0.0f64, f64::max),
                "all_complete": !incomplete,
                "results": results.iter().map(|r| {
                    // Per-step logs go to the CSV, not the summary.
                    let mut r = r.clone();
                    r.trajectory = None;
                    r
                }).collect::<Vec<_>>(),
            });
            write_out(&out, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
            if incomplete {
                return Err(anyhow!("at least one simulation did not complete"));
            }
            Ok(())
        }

        Command::Bench {
            family,
            config,
            seeds,
            output,
        } => {
            let mut spec = match (&config, &family) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    ExperimentSpec::from_json(&text).map_err(|e| anyhow!(e))?
                }
                (None, Some(name)) => {
                    let family = Family::parse(name)
                        .ok_or_else(|| anyhow!("unknown experiment family '{name}'"))?;
                    ExperimentSpec::new(family)
                }
                (None, None) => {
                    return Err(anyhow!("either --family or --config is required"));
                }
            };
            if let Some(name) = &family {
                let parsed = Family::parse(name)
                    .ok_or_else(|| anyhow!("unknown experiment family '{name}'"))?;
                if config.is_some() && parsed != spec.family {
                    return Err(anyhow!(
                        "--family {} conflicts with the config file's family {}",
                        name,
                        spec.family.label()
                    ));
                }
                spec.family = parsed;
            }
            if let Some(n) = seeds {
                spec.seeds = (0..n).collect();
            }
            let result = run_experiment(&spec).map_err(|e| anyhow!(e))?;

            match output.format {
                OutputFormat::Csv => {
                    write_out(&output.out, &result.raw_csv())?;
                    if let Some(path) = &output.out {
                        let mut agg_path = path.clone();
                        agg_path.set_extension("agg.csv");
                        std::fs::write(&agg_path, result.aggregate_csv())
                            .with_context(|| format!("writing {}", agg_path.display()))?;
                    } else {
                        print!("{}", result.aggregate_csv());
                    }
                }
                OutputFormat::Json => {
                    write_out(&output.out, &(serde_json::to_string_pretty(&result)? + "\n"))?;
                }
            }
            eprintln!(
                "bench: {} rows, {} aggregate points, {} failed cells",
                result.rows.len(),
                result.aggregates.len(),
                result.failed_cells
            );
            if result.failed_cells > 0 {
                return Err(anyhow!("{} cells failed", result.failed_cells));
            }
            Ok(())
        }
    }
}
