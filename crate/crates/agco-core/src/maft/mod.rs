//! Many-agents-few-tasks allocation at region granularity.
//!
//! Agents are pooled into regions (their privacy-preserving locations);
//! each task demands an exact number of agents. The solver minimizes a
//! weighted blend of normalized travel time and distance over integer
//! counts per (region, kind, task), exactly via branch-and-bound, with a
//! unit-step greedy as the baseline.

pub mod branch_bound;
pub mod kmeans;
pub mod simplex;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    euclidean_distance, is_eligible, AgentKind, CapabilityVector, ModelError, Position, Task,
    TaskId, SCHEMA_VERSION,
};
use branch_bound::{solve_ilp, IlpError};
use simplex::{Constraint, LinearProgram, Relation, SimplexStall};

pub use kmeans::{group_tasks_kmeans, nearest_seed_labels};

#[derive(Debug, Error)]
pub enum MaftError {
    #[error("{0}")]
    BadArgument(String),
    #[error("normalization bounds out of order: min {min} > max {max}")]
    BoundsOrder { min: f64, max: f64 },
    #[error("weights must be in [0, 1] and sum to 1: k_t = {k_t}, k_d = {k_d}")]
    BadWeights { k_t: f64, k_d: f64 },
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("node budget of {budget} exhausted; best incumbent {incumbent:?}, open bound {bound}")]
    NodeBudget {
        budget: u64,
        incumbent: Option<f64>,
        bound: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerical(#[from] SimplexStall),
}

/// Per-kind slice of a region's fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindProfile {
    pub count: u32,
    /// Meters per minute.
    pub speed: f64,
    pub capabilities: CapabilityVector,
}

/// A privacy-preserving agent pool: all members share the region's
/// representative position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: u32,
    pub position: Position,
    pub uav: KindProfile,
    pub ugv: KindProfile,
}

impl Region {
    pub fn profile(&self, kind: AgentKind) -> &KindProfile {
        match kind {
            AgentKind::Uav => &self.uav,
            AgentKind::Ugv => &self.ugv,
        }
    }

    pub fn inventory(&self) -> u32 {
        self.uav.count + self.ugv.count
    }
}

/// The region-level assignment problem. Task `max_agents` is read as the
/// exact demand `p_j` here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaftInstance {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub regions: Vec<Region>,
    pub tasks: Vec<Task>,
    /// `eligibility[r][j] = [uav, ugv]`: strict capability dominance of the
    /// region's kind profile over the task requirements.
    pub eligibility: Vec<Vec<[bool; 2]>>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

pub const KINDS: [AgentKind; 2] = [AgentKind::Uav, AgentKind::Ugv];

impl MaftInstance {
    pub fn new(regions: Vec<Region>, tasks: Vec<Task>) -> Result<Self, ModelError> {
        let eligibility = compute_eligibility(&regions, &tasks)?;
        let instance = MaftInstance {
            schema_version: SCHEMA_VERSION,
            regions,
            tasks,
            eligibility,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(self.schema_version));
        }
        let mut region_ids = std::collections::HashSet::new();
        for region in &self.regions {
            region.position.validate()?;
            if !region_ids.insert(region.id) {
                return Err(ModelError::DuplicateId {
                    kind: "region",
                    id: region.id,
                });
            }
            for kind in KINDS {
                let profile = region.profile(kind);
                if profile.count > 0 && !(profile.speed > 0.0) {
                    return Err(ModelError::InvalidAgent(
                        region.id,
                        format!("{kind} speed must be > 0, got {}", profile.speed),
                    ));
                }
                profile.capabilities.validate()?;
            }
        }
        let mut task_ids = std::collections::HashSet::new();
        for task in &self.tasks {
            task.validate()?;
            if !task_ids.insert(task.id) {
                return Err(ModelError::DuplicateId {
                    kind: "task",
                    id: task.id.0,
                });
            }
        }
        let recomputed = compute_eligibility(&self.regions, &self.tasks)?;
        if recomputed != self.eligibility {
            return Err(ModelError::InvalidTask(
                0,
                "stored eligibility does not match capability vectors".into(),
            ));
        }
        Ok(())
    }

    /// Distance from a region's representative position to a task.
    pub fn distance(&self, region_idx: usize, task_idx: usize) -> f64 {
        euclidean_distance(
            &self.regions[region_idx].position,
            &self.tasks[task_idx].position,
        )
    }

    pub fn total_demand(&self) -> u64 {
        self.tasks.iter().map(|t| t.max_agents as u64).sum()
    }

    pub fn total_inventory(&self) -> u64 {
        self.regions.iter().map(|r| r.inventory() as u64).sum()
    }

    /// Quick necessary conditions for feasibility, with the violated demand
    /// named. The LP layer catches anything joint these checks miss.
    pub fn feasibility_report(&self) -> Result<(), String> {
        if self.total_demand() > self.total_inventory() {
            return Err(format!(
                "total demand {} exceeds total agent inventory {}",
                self.total_demand(),
                self.total_inventory()
            ));
        }
        for (j, task) in self.tasks.iter().enumerate() {
            let eligible_supply: u64 = self
                .regions
                .iter()
                .enumerate()
                .map(|(r, region)| {
                    KINDS
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| self.eligibility[r][j][*k])
                        .map(|(_, &kind)| region.profile(kind).count as u64)
                        .sum::<u64>()
                })
                .sum();
            if eligible_supply < task.max_agents as u64 {
                return Err(format!(
                    "task {} demands {} agents but only {} eligible agents exist",
                    task.id, task.max_agents, eligible_supply
                ));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self) -> bool {
        self.feasibility_report().is_ok()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let instance: MaftInstance =
            serde_json::from_str(text).map_err(|e| format!("instance parse error: {e}"))?;
        instance.validate().map_err(|e| e.to_string())?;
        Ok(instance)
    }
}

fn compute_eligibility(
    regions: &[Region],
    tasks: &[Task],
) -> Result<Vec<Vec<[bool; 2]>>, ModelError> {
    regions
        .iter()
        .map(|region| {
            tasks
                .iter()
                .map(|task| {
                    Ok([
                        region.uav.count > 0
                            && is_eligible(&region.uav.capabilities, &task.requirements)?,
                        region.ugv.count > 0
                            && is_eligible(&region.ugv.capabilities, &task.requirements)?,
                    ])
                })
                .collect()
        })
        .collect()
}

/// Objective weights; time and distance shares must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub k_t: f64,
    pub k_d: f64,
}

impl WeightConfig {
    pub fn new(k_t: f64) -> Self {
        WeightConfig { k_t, k_d: 1.0 - k_t }
    }

    pub fn validate(&self) -> Result<(), MaftError> {
        let in_range = (0.0..=1.0).contains(&self.k_t) && (0.0..=1.0).contains(&self.k_d);
        if !in_range || (self.k_t + self.k_d - 1.0).abs() > 1e-9 {
            return Err(MaftError::BadWeights {
                k_t: self.k_t,
                k_d: self.k_d,
            });
        }
        Ok(())
    }
}

/// Min-max scaling to [0, 1]; a degenerate objective (max = min) maps to 0.
pub fn normalize(value: f64, min: f64, max: f64) -> Result<f64, MaftError> {
    if max < min {
        return Err(MaftError::BoundsOrder { min, max });
    }
    if max == min {
        return Ok(0.0);
    }
    Ok((value - min) / (max - min))
}

/// Exact extremes of raw distance and raw time over the feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBounds {
    pub d_min: f64,
    pub d_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// One positive entry of the assignment matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentCell {
    pub region: u32,
    pub kind: AgentKind,
    pub task: TaskId,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaftAssignment {
    pub schema_version: u32,
    pub algorithm: String,
    pub cells: Vec<AssignmentCell>,
    pub raw_distance: f64,
    pub raw_time: f64,
    /// Weighted blend of the min-max scaled objectives, in [0, 1] for
    /// exact bounds.
    pub normalized_objective: f64,
    pub weights: WeightConfig,
    pub bounds: ObjectiveBounds,
    /// Branch-and-bound nodes (0 for the greedy baseline).
    pub nodes_explored: u64,
    /// Integer optimum minus LP root bound (0 for the greedy baseline).
    pub gap: f64,
}

impl MaftAssignment {
    /// Check region outflow caps, exact task demands and eligibility.
    pub fn validate(&self, instance: &MaftInstance) -> Result<(), String> {
        let region_index: HashMap<u32, usize> = instance
            .regions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id, i))
            .collect();
        let task_index: HashMap<TaskId, usize> = instance
            .tasks
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id, i))
            .collect();

        let mut outflow: HashMap<(usize, AgentKind), u32> = HashMap::new();
        let mut received: HashMap<usize, u32> = HashMap::new();
        for cell in &self.cells {
            let &r = region_index
                .get(&cell.region)
                .ok_or_else(|| format!("unknown region {}", cell.region))?;
            let &j = task_index
                .get(&cell.task)
                .ok_or_else(|| format!("unknown task {}", cell.task))?;
            let kind_idx = KINDS.iter().position(|&k| k == cell.kind).unwrap();
            if cell.count > 0 && !instance.eligibility[r][j][kind_idx] {
                return Err(format!(
                    "region {} {} agents are not eligible for task {}",
                    cell.region, cell.kind, cell.task
                ));
            }
            *outflow.entry((r, cell.kind)).or_default() += cell.count;
            *received.entry(j).or_default() += cell.count;
        }
        for ((r, kind), used) in &outflow {
            let available = instance.regions[*r].profile(*kind).count;
            if *used > available {
                return Err(format!(
                    "region {} sends {} {} agents but has {}",
                    instance.regions[*r].id, used, kind, available
                ));
            }
        }
        for (j, task) in instance.tasks.iter().enumerate() {
            let got = received.get(&j).copied().unwrap_or(0);
            if got != task.max_agents {
                return Err(format!(
                    "task {} received {} agents, demand is {}",
                    task.id, got, task.max_agents
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// One decision variable of the assignment ILP.
#[derive(Debug, Clone)]
struct Variable {
    region_idx: usize,
    kind: AgentKind,
    task_idx: usize,
    distance: f64,
    time: f64,
    upper: f64,
}

fn build_variables(instance: &MaftInstance) -> Vec<Variable> {
    let mut vars = Vec::new();
    for (r, region) in instance.regions.iter().enumerate() {
        for (k, &kind) in KINDS.iter().enumerate() {
            let profile = region.profile(kind);
            if profile.count == 0 {
                continue;
            }
            for (j, task) in instance.tasks.iter().enumerate() {
                if !instance.eligibility[r][j][k] {
                    continue;
                }
                let distance = instance.distance(r, j);
                vars.push(Variable {
                    region_idx: r,
                    kind,
                    task_idx: j,
                    distance,
                    time: distance / profile.speed,
                    upper: profile.count.min(task.max_agents) as f64,
                });
            }
        }
    }
    vars
}

fn build_lp(instance: &MaftInstance, vars: &[Variable], objective: Vec<f64>) -> LinearProgram {
    let mut constraints = Vec::new();
    for (r, _region) in instance.regions.iter().enumerate() {
        for &kind in &KINDS {
            let coeffs: Vec<(usize, f64)> = vars
                .iter()
                .enumerate()
                .filter(|(_, v)| v.region_idx == r && v.kind == kind)
                .map(|(i, _)| (i, 1.0))
                .collect();
            if !coeffs.is_empty() {
                constraints.push(Constraint {
                    coeffs,
                    relation: Relation::Le,
                    rhs: instance.regions[r].profile(kind).count as f64,
                });
            }
        }
    }
    for (j, task) in instance.tasks.iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.task_idx == j)
            .map(|(i, _)| (i, 1.0))
            .collect();
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Eq,
            rhs: task.max_agents as f64,
        });
    }
    LinearProgram {
        objective,
        constraints,
        bounds: vars.iter().map(|v| (0.0, v.upper)).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct MaftSolveConfig {
    pub node_budget: u64,
}

impl Default for MaftSolveConfig {
    fn default() -> Self {
        MaftSolveConfig {
            node_budget: 1_000_000,
        }
    }
}

fn run_ilp(
    instance: &MaftInstance,
    vars: &[Variable],
    objective: Vec<f64>,
    budget: u64,
) -> Result<branch_bound::IlpSolution, MaftError> {
    let lp = build_lp(instance, vars, objective);
    solve_ilp(&lp, budget).map_err(|e| match e {
        IlpError::Infeasible => MaftError::Infeasible(
            instance
                .feasibility_report()
                .err()
                .unwrap_or_else(|| "demands cannot be met jointly by region inventories".into()),
        ),
        IlpError::Unbounded => {
            MaftError::BadArgument("assignment LP reported unbounded; bounded by construction".into())
        }
        IlpError::NodeBudget {
            budget,
            incumbent,
            bound,
        } => MaftError::NodeBudget {
            budget,
            incumbent,
            bound,
        },
        IlpError::Numerical(s) => MaftError::Numerical(s),
    })
}

/// Exact min and max of total distance and total time via four
/// single-objective solves over the same constraint set.
pub fn objective_bounds(instance: &MaftInstance) -> Result<ObjectiveBounds, MaftError> {
    objective_bounds_with(instance, &MaftSolveConfig::default())
}

pub fn objective_bounds_with(
    instance: &MaftInstance,
    config: &MaftSolveConfig,
) -> Result<ObjectiveBounds, MaftError> {
    instance.validate()?;
    instance
        .feasibility_report()
        .map_err(MaftError::Infeasible)?;
    let vars = build_variables(instance);
    let distances: Vec<f64> = vars.iter().map(|v| v.distance).collect();
    let times: Vec<f64> = vars.iter().map(|v| v.time).collect();
    let negate = |v: &[f64]| v.iter().map(|c| -c).collect::<Vec<f64>>();

    let d_min = run_ilp(instance, &vars, distances.clone(), config.node_budget)?.objective;
    let d_max = -run_ilp(instance, &vars, negate(&distances), config.node_budget)?.objective;
    let t_min = run_ilp(instance, &vars, times.clone(), config.node_budget)?.objective;
    let t_max = -run_ilp(instance, &vars, negate(&times), config.node_budget)?.objective;
    Ok(ObjectiveBounds {
        d_min,
        d_max,
        t_min,
        t_max,
    })
}

/// Weighted objective coefficient of one variable under given bounds.
fn weighted_coefficient(v: &Variable, weights: &WeightConfig, bounds: &ObjectiveBounds) -> f64 {
    let mut c = 0.0;
    let t_span = bounds.t_max - bounds.t_min;
    let d_span = bounds.d_max - bounds.d_min;
    if t_span > 1e-12 {
        c += weights.k_t * v.time / t_span;
    }
    if d_span > 1e-12 {
        c += weights.k_d * v.distance / d_span;
    }
    c
}

fn assignment_from_counts(
    instance: &MaftInstance,
    vars: &[Variable],
    counts: &[u32],
    algorithm: &str,
    weights: WeightConfig,
    bounds: ObjectiveBounds,
    nodes_explored: u64,
    gap: f64,
) -> Result<MaftAssignment, MaftError> {
    let mut cells = Vec::new();
    let mut raw_distance = 0.0;
    let mut raw_time = 0.0;
    for (v, &count) in vars.iter().zip(counts) {
        if count == 0 {
            continue;
        }
        raw_distance += v.distance * count as f64;
        raw_time += v.time * count as f64;
        cells.push(AssignmentCell {
            region: instance.regions[v.region_idx].id,
            kind: v.kind,
            task: instance.tasks[v.task_idx].id,
            count,
        });
    }
    let normalized_objective = weights.k_t * normalize(raw_time, bounds.t_min, bounds.t_max)?
        + weights.k_d * normalize(raw_distance, bounds.d_min, bounds.d_max)?;
    let assignment = MaftAssignment {
        schema_version: SCHEMA_VERSION,
        algorithm: algorithm.to_string(),
        cells,
        raw_distance,
        raw_time,
        normalized_objective,
        weights,
        bounds,
        nodes_explored,
        gap,
    };
    assignment
        .validate(instance)
        .map_err(|e| MaftError::BadArgument(format!("{algorithm} produced an invalid assignment: {e}")))?;
    Ok(assignment)
}

/// Exact weighted-sum solve: scale both objectives to [0, 1] with the
/// instance's own extremes, then branch-and-bound on the blended cost.
pub fn solve_w_ilp(
    instance: &MaftInstance,
    weights: WeightConfig,
) -> Result<MaftAssignment, MaftError> {
    let config = MaftSolveConfig::default();
    let bounds = objective_bounds_with(instance, &config)?;
    solve_w_ilp_with(instance, weights, &bounds, &config)
}

pub fn solve_w_ilp_with(
    instance: &MaftInstance,
    weights: WeightConfig,
    bounds: &ObjectiveBounds,
    config: &MaftSolveConfig,
) -> Result<MaftAssignment, MaftError> {
    weights.validate()?;
    let vars = build_variables(instance);
    let objective: Vec<f64> = vars
        .iter()
        .map(|v| weighted_coefficient(v, &weights, bounds))
        .collect();
    let solution = run_ilp(instance, &vars, objective, config.node_budget)?;
    let counts: Vec<u32> = solution.x.iter().map(|&v| v.round() as u32).collect();
    assignment_from_counts(
        instance,
        &vars,
        &counts,
        "w-ilp",
        weights,
        *bounds,
        solution.nodes_explored,
        solution.gap,
    )
}

/// Greedy baseline: one agent at a time to the (region, kind, task) triple
/// with the smallest weighted normalized increment, ties broken by region
/// id, then kind (UAV first), then task id.
pub fn solve_w_grd(
    instance: &MaftInstance,
    weights: WeightConfig,
) -> Result<MaftAssignment, MaftError> {
    let bounds = objective_bounds(instance)?;
    solve_w_grd_with(instance, weights, &bounds)
}

pub fn solve_w_grd_with(
    instance: &MaftInstance,
    weights: WeightConfig,
    bounds: &ObjectiveBounds,
) -> Result<MaftAssignment, MaftError> {
    weights.validate()?;
    instance.validate()?;
    let vars = build_variables(instance);
    let coefficients: Vec<f64> = vars
        .iter()
        .map(|v| weighted_coefficient(v, &weights, bounds))
        .collect();

    let mut inventory: HashMap<(usize, AgentKind), u32> = HashMap::new();
    for (r, region) in instance.regions.iter().enumerate() {
        for &kind in &KINDS {
            inventory.insert((r, kind), region.profile(kind).count);
        }
    }
    let mut demand: Vec<u32> = instance.tasks.iter().map(|t| t.max_agents).collect();
    let mut counts = vec![0u32; vars.len()];

    while demand.iter().any(|&d| d > 0) {
        // Variables are ordered (region, kind, task); strict `<` keeps the
        // first candidate on cost ties, realizing the documented tie-break.
        let mut pick: Option<usize> = None;
        let mut pick_cost = f64::INFINITY;
        for (i, v) in vars.iter().enumerate() {
            if demand[v.task_idx] == 0 || inventory[&(v.region_idx, v.kind)] == 0 {
                continue;
            }
            if coefficients[i] < pick_cost {
                pick_cost = coefficients[i];
                pick = Some(i);
            }
        }
        let Some(i) = pick else {
            let unmet = instance
                .tasks
                .iter()
                .enumerate()
                .find(|(j, _)| demand[*j] > 0)
                .map(|(_, t)| t.id)
                .unwrap();
            return Err(MaftError::Infeasible(format!(
                "greedy ran out of eligible agents with task {unmet} still short"
            )));
        };
        counts[i] += 1;
        demand[vars[i].task_idx] -= 1;
        *inventory.get_mut(&(vars[i].region_idx, vars[i].kind)).unwrap() -= 1;
    }

    assignment_from_counts(instance, &vars, &counts, "w-grd", weights, *bounds, 0, 0.0)
}

/// One point of a weight sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k_t: f64,
    pub k_d: f64,
    pub raw_time: f64,
    pub raw_distance: f64,
    /// Normalized weighted objective at this point (NaN on error).
    pub objective: f64,
    pub pareto: bool,
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn csv_header() -> &'static str {
        "k_t,k_d,time,distance,pareto_flag"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.k_t, self.k_d, self.raw_time, self.raw_distance, self.pareto
        )
    }
}

/// One exact solve per weight in the grid; marks the non-dominated
/// (time, distance) pairs. Per-point solver failures are recorded in the
/// point and the sweep continues.
pub fn pareto_sweep(
    instance: &MaftInstance,
    kt_grid: &[f64],
    config: &MaftSolveConfig,
) -> Result<Vec<SweepPoint>, MaftError> {
    let bounds = objective_bounds_with(instance, config)?;
    let mut points = Vec::with_capacity(kt_grid.len());
    for &k_t in kt_grid {
        let weights = WeightConfig::new(k_t);
        match solve_w_ilp_with(instance, weights, &bounds, config) {
            Ok(assignment) => points.push(SweepPoint {
                k_t,
                k_d: weights.k_d,
                raw_time: assignment.raw_time,
                raw_distance: assignment.raw_distance,
                objective: assignment.normalized_objective,
                pareto: false,
                error: None,
            }),
            Err(e) => points.push(SweepPoint {
                k_t,
                k_d: weights.k_d,
                raw_time: f64::NAN,
                raw_distance: f64::NAN,
                objective: f64::NAN,
                pareto: false,
                error: Some(e.to_string()),
            }),
        }
    }
    flag_pareto(&mut points);
    Ok(points)
}

fn flag_pareto(points: &mut [SweepPoint]) {
    const EPS: f64 = 1e-9;
    for i in 0..points.len() {
        if points[i].error.is_some() {
            continue;
        }
        let dominated = points.iter().enumerate().any(|(o, other)| {
            o != i
                && other.error.is_none()
                && other.raw_time <= points[i].raw_time + EPS
                && other.raw_distance <= points[i].raw_distance + EPS
                && (other.raw_time < points[i].raw_time - EPS
                    || other.raw_distance < points[i].raw_distance - EPS)
        });
        points[i].pareto = !dominated;
    }
}
