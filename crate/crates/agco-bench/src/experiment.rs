//! Experiment families, cell execution and result tables.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use agco_core::charging::{run_pctp, run_static};
use agco_core::famt::{solve_greedy_pt, solve_mt_mcmf, FamtAssignment};
use agco_core::maft::{
    objective_bounds, pareto_sweep, solve_w_grd_with, MaftSolveConfig, WeightConfig,
};
use agco_core::scenario::{gen_charging, gen_famt, gen_maft, Distribution, GenConfig, QPolicy};

/// Fixed raw result header; the column set is part of the output contract.
pub const RAW_HEADER: &str =
    "family,params,seed,algorithm,scenario_hash,tasks_completed,total_distance,total_time,objective,pareto,error,runtime_ms";

/// Fixed aggregate header (means and sample standard deviations over seeds).
pub const AGG_HEADER: &str = "family,params,algorithm,n,mean_tasks_completed,std_tasks_completed,mean_total_distance,std_total_distance,mean_total_time,std_total_time,mean_objective,std_objective";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    VaryTasks,
    VaryAgents,
    VaryQ,
    VaryDistribution,
    WeightSweep,
    Charging,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::VaryTasks => "vary_tasks",
            Family::VaryAgents => "vary_agents",
            Family::VaryQ => "vary_q",
            Family::VaryDistribution => "vary_distribution",
            Family::WeightSweep => "weight_sweep",
            Family::Charging => "charging",
        }
    }

    pub fn parse(name: &str) -> Option<Family> {
        Some(match name {
            "vary_tasks" => Family::VaryTasks,
            "vary_agents" => Family::VaryAgents,
            "vary_q" => Family::VaryQ,
            "vary_distribution" => Family::VaryDistribution,
            "weight_sweep" => Family::WeightSweep,
            "charging" => Family::Charging,
            _ => return None,
        })
    }

    pub fn default_algorithms(&self) -> Vec<String> {
        let algorithms: &[&str] = match self {
            Family::WeightSweep => &["w-ilp", "w-grd"],
            Family::Charging => &["pctp", "static"],
            _ => &["mt-mcmf", "mt-grdpt"],
        };
        algorithms.iter().map(|s| s.to_string()).collect()
    }

    fn algorithm_is_valid(&self, algorithm: &str) -> bool {
        self.default_algorithms().iter().any(|a| a == algorithm)
    }
}

/// Parameter grid; the family picks the axis it sweeps, everything else is
/// held at the base values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub task_counts: Vec<u32>,
    pub agent_counts: Vec<u32>,
    pub q_values: Vec<u32>,
    pub distributions: Vec<Distribution>,
    pub kt_values: Vec<f64>,
    pub uavs_per_ugv: Vec<u32>,
    /// Base agent count for the few-agents families (split UAV/UGV).
    pub agents: u32,
    /// Base per-agent task quota.
    pub q: u32,
    /// Base task count.
    pub tasks: u32,
    /// Base task distribution when the family does not sweep it.
    pub distribution: Distribution,
    pub charge_regions: u32,
    pub dt: f64,
    pub horizon: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            task_counts: vec![10, 15, 20, 25, 30],
            agent_counts: (3..=11).collect(),
            q_values: vec![2, 3, 4, 5],
            distributions: vec![
                Distribution::Compact,
                Distribution::Scattered,
                Distribution::Hybrid,
            ],
            kt_values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            uavs_per_ugv: vec![1, 2, 3, 4, 5],
            agents: 4,
            q: 3,
            tasks: 20,
            distribution: Distribution::Hybrid,
            charge_regions: 4,
            dt: 0.1,
            horizon: 240.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Empty means the family's full algorithm set.
    #[serde(default)]
    pub algorithms: Vec<String>,
    #[serde(default)]
    pub grid: GridSpec,
}

fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

impl ExperimentSpec {
    pub fn new(family: Family) -> Self {
        ExperimentSpec {
            family,
            seeds: default_seeds(),
            algorithms: family.default_algorithms(),
            grid: GridSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| format!("experiment spec parse error: {e}"))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn algorithms(&self) -> Vec<String> {
        if self.algorithms.is_empty() {
            self.family.default_algorithms()
        } else {
            self.algorithms.clone()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.seeds.is_empty() {
            return Err("at least one seed is required".into());
        }
        for algorithm in self.algorithms() {
            if !self.family.algorithm_is_valid(&algorithm) {
                return Err(format!(
                    "algorithm '{algorithm}' is not valid for family '{}' (expected one of {:?})",
                    self.family.label(),
                    self.family.default_algorithms()
                ));
            }
        }
        let axis_len = match self.family {
            Family::VaryTasks => self.grid.task_counts.len(),
            Family::VaryAgents => self.grid.agent_counts.len(),
            Family::VaryQ => self.grid.q_values.len(),
            Family::VaryDistribution => self.grid.distributions.len(),
            Family::WeightSweep => self.grid.kt_values.len(),
            Family::Charging => self.grid.uavs_per_ugv.len(),
        };
        if axis_len == 0 {
            return Err(format!(
                "parameter grid for family '{}' is empty",
                self.family.label()
            ));
        }
        Ok(())
    }
}

/// One raw result cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: String,
    pub params: String,
    pub seed: u64,
    pub algorithm: String,
    pub scenario_hash: String,
    pub tasks_completed: Option<u64>,
    pub total_distance: Option<f64>,
    pub total_time: Option<f64>,
    pub objective: Option<f64>,
    pub pareto: Option<bool>,
    pub error: Option<String>,
    pub runtime_ms: f64,
}

impl ResultRow {
    pub fn csv_row(&self) -> String {
        fn opt<T: std::fmt::Display>(value: &Option<T>) -> String {
            value.as_ref().map(|v| v.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.params,
            self.seed,
            self.algorithm,
            self.scenario_hash,
            opt(&self.tasks_completed),
            opt(&self.total_distance),
            opt(&self.total_time),
            opt(&self.objective),
            opt(&self.pareto),
            self.error
                .as_deref()
                .map(|e| e.replace(',', ";"))
                .unwrap_or_default(),
            self.runtime_ms,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub family: String,
    pub params: String,
    pub algorithm: String,
    pub n: usize,
    pub mean_tasks_completed: f64,
    pub std_tasks_completed: f64,
    pub mean_total_distance: f64,
    pub std_total_distance: f64,
    pub mean_total_time: f64,
    pub std_total_time: f64,
    pub mean_objective: f64,
    pub std_objective: f64,
}

impl AggregateRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.params,
            self.algorithm,
            self.n,
            self.mean_tasks_completed,
            self.std_tasks_completed,
            self.mean_total_distance,
            self.std_total_distance,
            self.mean_total_time,
            self.std_total_time,
            self.mean_objective,
            self.std_objective,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
    pub failed_cells: usize,
}

impl ExperimentResult {
    pub fn raw_csv(&self) -> String {
        let mut out = String::from(RAW_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from(AGG_HEADER);
        out.push('\n');
        for row in &self.aggregates {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }
}

pub fn scenario_hash(canonical_json: &str) -> String {
    let digest = Sha256::digest(canonical_json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn agent_split(total: u32) -> (u32, u32) {
    let uavs = total.div_ceil(2);
    (uavs, total - uavs)
}

fn famt_gen_config(seed: u64, tasks: u32, agents: u32, q: u32, distribution: Distribution) -> GenConfig {
    let (uavs, ugvs) = agent_split(agents);
    GenConfig {
        seed,
        distribution,
        n_uavs: uavs,
        n_ugvs: ugvs,
        n_tasks: tasks,
        q_policy: QPolicy::Fixed(q),
        p: 6,
        ..GenConfig::default()
    }
}

/// Feasible preset for the weight sweep: inventories above total demand and
/// universally eligible capabilities (documented experiment configuration).
fn maft_gen_config(seed: u64, tasks: u32) -> GenConfig {
    GenConfig {
        seed,
        n_tasks: tasks,
        maft_demand: 5,
        agents_per_region: (35, 45),
        agent_cap_range: (3.1, 5.0),
        task_req_range: (1.0, 3.0),
        ..GenConfig::default()
    }
}

/// One schedulable unit of work. The weight sweep solves its whole grid in
/// one unit (the pareto flags need every point of a seed's sweep).
enum WorkUnit {
    Famt {
        params: String,
        seed: u64,
        algorithm: String,
        config: GenConfig,
    },
    WeightSweep {
        seed: u64,
        algorithm: String,
        kt_values: Vec<f64>,
        config: GenConfig,
    },
    Charging {
        params: String,
        seed: u64,
        algorithm: String,
        config: GenConfig,
        dt: f64,
        horizon: f64,
    },
}

fn build_work_units(spec: &ExperimentSpec) -> Vec<WorkUnit> {
    let grid = &spec.grid;
    let mut units = Vec::new();
    let algorithms = spec.algorithms();
    match spec.family {
        Family::VaryTasks | Family::VaryAgents | Family::VaryQ | Family::VaryDistribution => {
            let points: Vec<(String, u32, u32, u32, Distribution)> = match spec.family {
                Family::VaryTasks => grid
                    .task_counts
                    .iter()
                    .map(|&n| (n, grid.agents, grid.q, grid.distribution))
                    .map(label_point)
                    .collect(),
                Family::VaryAgents => grid
                    .agent_counts
                    .iter()
                    .map(|&m| (grid.tasks, m, grid.q, grid.distribution))
                    .map(label_point)
                    .collect(),
                Family::VaryQ => grid
                    .q_values
                    .iter()
                    .map(|&q| (grid.tasks, grid.agents, q, grid.distribution))
                    .map(label_point)
                    .collect(),
                Family::VaryDistribution => grid
                    .distributions
                    .iter()
                    .map(|&d| (grid.tasks, grid.agents, grid.q, d))
                    .map(label_point)
                    .collect(),
                _ => unreachable!(),
            };
            for (params, tasks, agents, q, distribution) in points {
                for &seed in &spec.seeds {
                    for algorithm in &algorithms {
                        units.push(WorkUnit::Famt {
                            params: params.clone(),
                            seed,
                            algorithm: algorithm.clone(),
                            config: famt_gen_config(seed, tasks, agents, q, distribution),
                        });
                    }
                }
            }
        }
        Family::WeightSweep => {
            for &seed in &spec.seeds {
                for algorithm in &algorithms {
                    units.push(WorkUnit::WeightSweep {
                        seed,
                        algorithm: algorithm.clone(),
                        kt_values: grid.kt_values.clone(),
                        config: maft_gen_config(seed, grid.tasks),
                    });
                }
            }
        }
        Family::Charging => {
            for &count in &grid.uavs_per_ugv {
                let params = format!("regions={};uavs_per_ugv={count}", grid.charge_regions);
                for &seed in &spec.seeds {
                    for algorithm in &algorithms {
                        units.push(WorkUnit::Charging {
                            params: params.clone(),
                            seed,
                            algorithm: algorithm.clone(),
                            config: GenConfig {
                                seed,
                                uavs_per_ugv: count,
                                charge_regions: grid.charge_regions,
                                ..GenConfig::default()
                            },
                            dt: grid.dt,
                            horizon: grid.horizon,
                        });
                    }
                }
            }
        }
    }
    units
}

type Point = (u32, u32, u32, Distribution);
fn label_point((tasks, agents, q, distribution): Point) -> (String, u32, u32, u32, Distribution) {
    (
        format!(
            "M={agents};N={tasks};dist={};q={q}",
            distribution.label()
        ),
        tasks,
        agents,
        q,
        distribution,
    )
}

fn error_row(family: Family, params: &str, seed: u64, algorithm: &str, hash: String, error: String, started: Instant) -> Vec<ResultRow> {
    vec![ResultRow {
        family: family.label().to_string(),
        params: params.to_string(),
        seed,
        algorithm: algorithm.to_string(),
        scenario_hash: hash,
        tasks_completed: None,
        total_distance: None,
        total_time: None,
        objective: None,
        pareto: None,
        error: Some(error),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    }]
}

fn run_famt_cell(family: Family, params: &str, seed: u64, algorithm: &str, config: &GenConfig) -> Vec<ResultRow> {
    let started = Instant::now();
    let scenario = match gen_famt(config) {
        Ok(s) => s,
        Err(e) => return error_row(family, params, seed, algorithm, String::new(), e.to_string(), started),
    };
    let hash = scenario_hash(&scenario.to_json().unwrap_or_default());
    let solved = match algorithm {
        "mt-mcmf" => solve_mt_mcmf(&scenario),
        _ => solve_greedy_pt(&scenario),
    };
    let assignment: FamtAssignment = match solved {
        Ok(a) => a,
        Err(e) => return error_row(family, params, seed, algorithm, hash, e.to_string(), started),
    };
    // Completion-time proxy: per-agent travel time at each agent's speed.
    let total_time: f64 = assignment
        .per_agent
        .iter()
        .map(|entry| {
            let agent = scenario.agents.iter().find(|a| a.id == entry.agent).unwrap();
            entry.distance / agent.speed
        })
        .sum();
    vec![ResultRow {
        family: family.label().to_string(),
        params: params.to_string(),
        seed,
        algorithm: algorithm.to_string(),
        scenario_hash: hash,
        tasks_completed: Some(assignment.tasks_completed),
        total_distance: Some(assignment.total_distance),
        total_time: Some(total_time),
        objective: Some(assignment.total_distance),
        pareto: None,
        error: None,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    }]
}

fn run_weight_sweep_cell(seed: u64, algorithm: &str, kt_values: &[f64], config: &GenConfig) -> Vec<ResultRow> {
    let family = Family::WeightSweep;
    let started = Instant::now();
    let instance = match gen_maft(config) {
        Ok(i) => i,
        Err(e) => return error_row(family, "", seed, algorithm, String::new(), e.to_string(), started),
    };
    let hash = scenario_hash(&instance.to_json().unwrap_or_default());
    let demand = instance.total_demand();
    let solve_config = MaftSolveConfig::default();

    let mut rows = Vec::new();
    match algorithm {
        "w-ilp" => {
            let points = match pareto_sweep(&instance, kt_values, &solve_config) {
                Ok(p) => p,
                Err(e) => {
                    return error_row(family, "", seed, algorithm, hash, e.to_string(), started)
                }
            };
            let sweep_ms = started.elapsed().as_secs_f64() * 1e3 / points.len().max(1) as f64;
            for point in points {
                let params = format!("kt={}", point.k_t);
                rows.push(ResultRow {
                    family: family.label().to_string(),
                    params,
                    seed,
                    algorithm: algorithm.to_string(),
                    scenario_hash: hash.clone(),
                    tasks_completed: point.error.is_none().then_some(demand),
                    total_distance: point.error.is_none().then_some(point.raw_distance),
                    total_time: point.error.is_none().then_some(point.raw_time),
                    objective: point.error.is_none().then_some(point.objective),
                    pareto: point.error.is_none().then_some(point.pareto),
                    error: point.error,
                    runtime_ms: sweep_ms,
                });
            }
        }
        _ => {
            let bounds = match objective_bounds(&instance) {
                Ok(b) => b,
                Err(e) => {
                    return error_row(family, "", seed, algorithm, hash, e.to_string(), started)
                }
            };
            for &k_t in kt_values {
                let params = format!("kt={k_t}");
                let cell_start = Instant::now();
                match solve_w_grd_with(&instance, WeightConfig::new(k_t), &bounds) {
                    Ok(assignment) => rows.push(ResultRow {
                        family: family.label().to_string(),
                        params,
                        seed,
                        algorithm: algorithm.to_string(),
                        scenario_hash: hash.clone(),
                        tasks_completed: Some(demand),
                        total_distance: Some(assignment.raw_distance),
                        total_time: Some(assignment.raw_time),
                        objective: Some(assignment.normalized_objective),
                        pareto: None,
                        error: None,
                        runtime_ms: cell_start.elapsed().as_secs_f64() * 1e3,
                    }),
                    Err(e) => rows.extend(error_row(
                        family,
                        &params,
                        seed,
                        algorithm,
                        hash.clone(),
                        e.to_string(),
                        cell_start,
                    )),
                }
            }
        }
    }

    rows
}

fn run_charging_cell(params: &str, seed: u64, algorithm: &str, config: &GenConfig, dt: f64, horizon: f64) -> Vec<ResultRow> {
    let family = Family::Charging;
    let started = Instant::now();
    let scenarios = match gen_charging(config) {
        Ok(s) => s,
        Err(e) => return error_row(family, params, seed, algorithm, String::new(), e.to_string(), started),
    };
    let hash = scenario_hash(&serde_json::to_string(&scenarios).unwrap_or_default());

    let mut total_distance = 0.0;
    let mut charged = 0u64;
    let mut last_charge = 0.0f64;
    for scenario in &scenarios {
        let result = match algorithm {
            "pctp" => run_pctp(scenario, dt, horizon),
            _ => run_static(scenario, dt, horizon),
        };
        match result {
            Ok(sim) => {
                total_distance += sim.total_distance;
                charged += sim.charge_times.iter().flatten().count() as u64;
                last_charge = last_charge.max(sim.time_to_last_charge);
                if !sim.complete {
                    return error_row(
                        family,
                        params,
                        seed,
                        algorithm,
                        hash,
                        "simulation incomplete (horizon or exhaustion)".into(),
                        started,
                    );
                }
            }
            Err(e) => {
                return error_row(family, params, seed, algorithm, hash, e.to_string(), started)
            }
        }
    }
    vec![ResultRow {
        family: family.label().to_string(),
        params: params.to_string(),
        seed,
        algorithm: algorithm.to_string(),
        scenario_hash: hash,
        tasks_completed: Some(charged),
        total_distance: Some(total_distance),
        total_time: Some(last_charge),
        objective: Some(total_distance),
        pareto: None,
        error: None,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    }]
}

fn run_unit(spec: &ExperimentSpec, unit: &WorkUnit) -> Vec<ResultRow> {
    match unit {
        WorkUnit::Famt {
            params,
            seed,
            algorithm,
            config,
        } => run_famt_cell(spec.family, params, *seed, algorithm, config),
        WorkUnit::WeightSweep {
            seed,
            algorithm,
            kt_values,
            config,
        } => run_weight_sweep_cell(*seed, algorithm, kt_values, config),
        WorkUnit::Charging {
            params,
            seed,
            algorithm,
            config,
            dt,
            horizon,
        } => run_charging_cell(params, *seed, algorithm, config, *dt, *horizon),
    }
}

/// Execute every cell of the spec in a work pool (`AGCO_THREADS` caps the
/// pool size) and return deterministically ordered raw rows plus per-point
/// aggregates.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, String> {
    spec.validate()?;
    let units = build_work_units(spec);

    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(threads) = std::env::var("AGCO_THREADS") {
            if let Ok(threads) = threads.parse::<usize>() {
                builder = builder.num_threads(threads.max(1));
            }
        }
        builder.build().map_err(|e| e.to_string())?
    };

    let mut rows: Vec<ResultRow> = pool.install(|| {
        use rayon::prelude::*;
        units
            .par_iter()
            .flat_map(|unit| run_unit(spec, unit))
            .collect()
    });

    // Merge order is a sort key, not arrival order.
    rows.sort_by(|a, b| {
        (&a.family, &a.params, a.seed, &a.algorithm).cmp(&(
            &b.family,
            &b.params,
            b.seed,
            &b.algorithm,
        ))
    });

    let aggregates = aggregate(&rows);
    let failed_cells = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(ExperimentResult {
        rows,
        aggregates,
        failed_cells,
    })
}

fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, String, String), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.error.is_none()) {
        groups
            .entry((row.family.clone(), row.params.clone(), row.algorithm.clone()))
            .or_default()
            .push(row);
    }

    fn mean_std(values: &[f64]) -> (f64, f64) {
        if values.is_empty() {
            return (0.0, 0.0);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if values.len() < 2 {
            return (mean, 0.0);
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (values.len() - 1) as f64;
        (mean, var.sqrt())
    }

    groups
        .into_iter()
        .map(|((family, params, algorithm), members)| {
            let collect = |get: fn(&ResultRow) -> Option<f64>| -> Vec<f64> {
                members.iter().filter_map(|r| get(r)).collect()
            };
            let tasks = collect(|r| r.tasks_completed.map(|v| v as f64));
            let distance = collect(|r| r.total_distance);
            let time = collect(|r| r.total_time);
            let objective = collect(|r| r.objective);
            let (mean_tasks, std_tasks) = mean_std(&tasks);
            let (mean_distance, std_distance) = mean_std(&distance);
            let (mean_time, std_time) = mean_std(&time);
            let (mean_objective, std_objective) = mean_std(&objective);
            AggregateRow {
                family,
                params,
                algorithm,
                n: members.len(),
                mean_tasks_completed: mean_tasks,
                std_tasks_completed: std_tasks,
                mean_total_distance: mean_distance,
                std_total_distance: std_distance,
                mean_total_time: mean_time,
                std_total_time: std_time,
                mean_objective,
                std_objective,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_labels_roundtrip() {
        for family in [
            Family::VaryTasks,
            Family::VaryAgents,
            Family::VaryQ,
            Family::VaryDistribution,
            Family::WeightSweep,
            Family::Charging,
        ] {
            assert_eq!(Family::parse(family.label()), Some(family));
        }
        assert_eq!(Family::parse("nope"), None);
    }

    #[test]
    fn spec_rejects_bad_algorithm_and_empty_grid() {
        let mut spec = ExperimentSpec::new(Family::VaryQ);
        spec.algorithms = vec!["w-ilp".into()];
        assert!(spec.validate().is_err());

        let mut spec = ExperimentSpec::new(Family::VaryQ);
        spec.grid.q_values.clear();
        assert!(spec.validate().is_err());

        let mut spec = ExperimentSpec::new(Family::Charging);
        spec.seeds.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn minimal_spec_json_fills_defaults() {
        let spec = ExperimentSpec::from_json(r#"{"family": "vary_q"}"#).unwrap();
        assert_eq!(spec.family, Family::VaryQ);
        assert_eq!(spec.seeds.len(), 20);
        assert_eq!(spec.algorithms(), vec!["mt-mcmf", "mt-grdpt"]);
    }

    #[test]
    fn hash_is_stable_and_distinguishes() {
        let a = scenario_hash("alpha");
        assert_eq!(a, scenario_hash("alpha"));
        assert_ne!(a, scenario_hash("beta"));
        assert_eq!(a.len(), 16);
    }
}
