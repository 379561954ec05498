//! Few-agents-many-tasks allocation: each agent takes a bundle of `q`
//! tasks, tasks accept at most `p` agents, and every agent is bounded by
//! its endurance `S`. The flow-based solver enumerates task sets, prices
//! them with open-path tours and runs the chunked selection; the baseline
//! walks to the nearest task greedily.

use std::collections::HashMap;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mcmf::{chunked_min_cost_selection, FlowGraph, McmfError};
use crate::model::{
    euclidean_distance, Agent, AgentId, FamtScenario, ModelError, TaskId, SCHEMA_VERSION,
};
use crate::tour::{self, DistanceSemantics};

#[derive(Debug, Error)]
pub enum FamtError {
    #[error("instance too large: C(N, q) = {combinations} task sets exceeds the cap of {cap}")]
    TooLarge { combinations: u128, cap: u128 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Flow(#[from] McmfError),
}

/// Solver knobs. Defaults match the evaluation setups.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamtConfig {
    /// Hard cap on C(N, q); larger instances fail loudly instead of
    /// degrading silently.
    pub enumeration_cap: u64,
    /// How a task set's travel cost is measured.
    pub distance_semantics: DistanceSemantics,
}

impl Default for FamtConfig {
    fn default() -> Self {
        FamtConfig {
            enumeration_cap: 200_000,
            distance_semantics: DistanceSemantics::Path,
        }
    }
}

/// A combination of `q` tasks an agent could execute, priced for that agent.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    /// Member task ids, ascending.
    pub members: Vec<TaskId>,
    /// The agent's visiting order over the members.
    pub order: Vec<TaskId>,
    /// Travel cost of the visiting path from the agent's position.
    pub cost: f64,
}

/// One agent's share of an assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAssignment {
    pub agent: AgentId,
    /// Tasks in visiting order; empty when the agent is unassigned.
    pub tasks: Vec<TaskId>,
    pub distance: f64,
}

/// Full assignment with objective totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamtAssignment {
    pub schema_version: u32,
    pub algorithm: String,
    pub per_agent: Vec<AgentAssignment>,
    /// Total task executions (sum of per-agent list lengths).
    pub tasks_completed: u64,
    /// Number of distinct tasks that received at least one agent.
    pub distinct_tasks: u64,
    pub total_distance: f64,
}

impl FamtAssignment {
    fn from_parts(algorithm: &str, per_agent: Vec<AgentAssignment>) -> Self {
        let tasks_completed = per_agent.iter().map(|a| a.tasks.len() as u64).sum();
        let distinct_tasks = per_agent
            .iter()
            .flat_map(|a| a.tasks.iter())
            .unique()
            .count() as u64;
        let total_distance = per_agent.iter().map(|a| a.distance).sum();
        FamtAssignment {
            schema_version: SCHEMA_VERSION,
            algorithm: algorithm.to_string(),
            per_agent,
            tasks_completed,
            distinct_tasks,
            total_distance,
        }
    }

    /// Check the assignment against the scenario's constraints: per-agent
    /// task count (exactly `q` when `strict_count`, at most `q` otherwise),
    /// the per-task agent cap, the endurance bound, and distance
    /// self-consistency against the reported visiting orders.
    pub fn validate(&self, scenario: &FamtScenario, strict_count: bool) -> Result<(), String> {
        let agents: HashMap<AgentId, &Agent> =
            scenario.agents.iter().map(|a| (a.id, a)).collect();
        let tasks: HashMap<TaskId, &crate::model::Task> =
            scenario.tasks.iter().map(|t| (t.id, t)).collect();
        let mut per_task: HashMap<TaskId, u32> = HashMap::new();

        for entry in &self.per_agent {
            let agent = agents
                .get(&entry.agent)
                .ok_or_else(|| format!("unknown agent {}", entry.agent))?;
            if entry.tasks.iter().unique().count() != entry.tasks.len() {
                return Err(format!("agent {} visits a task twice", entry.agent));
            }
            if !entry.tasks.is_empty() {
                let q = agent.task_limit as usize;
                if strict_count && entry.tasks.len() != q {
                    return Err(format!(
                        "agent {} assigned {} tasks, expected exactly {q}",
                        entry.agent,
                        entry.tasks.len()
                    ));
                }
                if entry.tasks.len() > q {
                    return Err(format!(
                        "agent {} assigned {} tasks, above its limit {q}",
                        entry.agent,
                        entry.tasks.len()
                    ));
                }
            }
            let mut walked = 0.0;
            let mut cursor = agent.position;
            for task_id in &entry.tasks {
                let task = tasks
                    .get(task_id)
                    .ok_or_else(|| format!("unknown task {task_id}"))?;
                walked += euclidean_distance(&cursor, &task.position);
                cursor = task.position;
                *per_task.entry(*task_id).or_default() += 1;
            }
            if (walked - entry.distance).abs() > 1e-6 * walked.abs().max(1.0) {
                return Err(format!(
                    "agent {}: reported distance {} but visiting order walks {}",
                    entry.agent, entry.distance, walked
                ));
            }
            if entry.distance > agent.max_travel + 1e-9 {
                return Err(format!(
                    "agent {} travels {} beyond its endurance {}",
                    entry.agent, entry.distance, agent.max_travel
                ));
            }
        }

        for (task_id, count) in per_task {
            let task = &tasks[&task_id];
            if count > task.max_agents {
                return Err(format!(
                    "task {task_id} received {count} agents, cap is {}",
                    task.max_agents
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Header for [`Self::csv_summary`].
    pub fn csv_header() -> &'static str {
        "scenario_id,algorithm,agents,tasks,q,p,tasks_completed,total_distance,runtime_ms"
    }

    /// One summary row for result tables.
    pub fn csv_summary(&self, scenario_id: &str, scenario: &FamtScenario, runtime_ms: f64) -> String {
        let q = uniform_or_mixed(scenario.agents.iter().map(|a| a.task_limit));
        let p = uniform_or_mixed(scenario.tasks.iter().map(|t| t.max_agents));
        format!(
            "{scenario_id},{},{},{},{q},{p},{},{},{runtime_ms}",
            self.algorithm,
            scenario.agents.len(),
            scenario.tasks.len(),
            self.tasks_completed,
            self.total_distance,
        )
    }
}

fn uniform_or_mixed(values: impl Iterator<Item = u32>) -> String {
    let distinct: Vec<u32> = values.unique().collect();
    match distinct.as_slice() {
        [] => "-".to_string(),
        [one] => one.to_string(),
        _ => "mixed".to_string(),
    }
}

/// Number of q-subsets of an n-set, saturating at u128 bounds.
pub fn combination_count(n: u64, q: u64) -> u128 {
    if q > n {
        return 0;
    }
    let q = q.min(n - q);
    let mut result: u128 = 1;
    for i in 0..q {
        result = result.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    result
}

/// All task sets of size `agent.task_limit` this agent can finish within
/// its endurance, priced by the configured distance semantics, in
/// lexicographic member order.
pub fn enumerate_feasible_sets(
    scenario: &FamtScenario,
    agent: &Agent,
    config: &FamtConfig,
) -> Result<Vec<TaskSet>, FamtError> {
    let n = scenario.tasks.len() as u64;
    let q = agent.task_limit as u64;
    let combinations = combination_count(n, q);
    if combinations > config.enumeration_cap as u128 {
        return Err(FamtError::TooLarge {
            combinations,
            cap: config.enumeration_cap as u128,
        });
    }

    let mut sets = Vec::with_capacity(combinations as usize);
    for combo in (0..scenario.tasks.len()).combinations(q as usize) {
        let stops: Vec<_> = combo.iter().map(|&i| scenario.tasks[i].position).collect();
        let tour = tour::shortest_open_path(&agent.position, &stops);
        let cost = match config.distance_semantics {
            DistanceSemantics::Path => tour.length,
            DistanceSemantics::Star => tour::star_length(&agent.position, &stops),
        };
        if cost <= agent.max_travel {
            sets.push(TaskSet {
                members: combo.iter().map(|&i| scenario.tasks[i].id).collect(),
                order: tour.order.iter().map(|&k| scenario.tasks[combo[k]].id).collect(),
                cost,
            });
        }
    }
    Ok(sets)
}

/// Flow-based solve: enumerate sets, build the layered network and run the
/// chunked minimum-cost selection. Maximizes task executions first and
/// travel distance second; agents with no feasible set stay unassigned.
pub fn solve_mt_mcmf(scenario: &FamtScenario) -> Result<FamtAssignment, FamtError> {
    solve_mt_mcmf_with(scenario, &FamtConfig::default())
}

pub fn solve_mt_mcmf_with(
    scenario: &FamtScenario,
    config: &FamtConfig,
) -> Result<FamtAssignment, FamtError> {
    scenario.validate()?;
    if scenario.agents.is_empty() || scenario.tasks.is_empty() {
        let per_agent = scenario
            .agents
            .iter()
            .map(|a| AgentAssignment {
                agent: a.id,
                tasks: Vec::new(),
                distance: 0.0,
            })
            .collect();
        return Ok(FamtAssignment::from_parts("mt-mcmf", per_agent));
    }

    let network = build_network(scenario, config)?;
    let flow =
        chunked_min_cost_selection(&network.graph, &network.agent_nodes, &network.set_nodes)?;

    let mut chosen: HashMap<usize, &TaskSet> = HashMap::new();
    for (&edge, &(slot, set_pos)) in &network.edge_owner {
        if flow.edge_flows[edge] > 0 {
            chosen.insert(slot, &network.per_agent_sets[slot][set_pos]);
        }
    }
    let agent_order = &network.agent_order;

    let mut by_id: HashMap<AgentId, AgentAssignment> = HashMap::new();
    for (slot, &i) in agent_order.iter().enumerate() {
        let agent = &scenario.agents[i];
        let entry = match chosen.get(&slot) {
            Some(set) => AgentAssignment {
                agent: agent.id,
                tasks: set.order.clone(),
                distance: set.cost,
            },
            None => AgentAssignment {
                agent: agent.id,
                tasks: Vec::new(),
                distance: 0.0,
            },
        };
        by_id.insert(agent.id, entry);
    }
    let per_agent = scenario
        .agents
        .iter()
        .map(|a| by_id.remove(&a.id).unwrap())
        .collect();

    let assignment = FamtAssignment::from_parts("mt-mcmf", per_agent);
    assignment
        .validate(scenario, true)
        .expect("mt-mcmf produced an assignment violating the problem constraints");
    Ok(assignment)
}

struct Network {
    graph: FlowGraph,
    agent_nodes: Vec<usize>,
    set_nodes: Vec<usize>,
    /// Agent-to-set edge id -> (agent slot, index into that slot's sets).
    edge_owner: HashMap<usize, (usize, usize)>,
    per_agent_sets: Vec<Vec<TaskSet>>,
    /// Scenario agent indices in id order; slot i handles agent_order[i].
    agent_order: Vec<usize>,
}

/// Layered network over the union of the agents' feasible sets: source ->
/// agents (cap q) -> set nodes (cost = set travel cost) -> tasks -> sink
/// (cap p). Member edges carry the task cap so distinct agents may share a
/// set node.
fn build_network(scenario: &FamtScenario, config: &FamtConfig) -> Result<Network, FamtError> {
    // Tie-breaks key off agent id, so process agents in id order.
    let mut agent_order: Vec<usize> = (0..scenario.agents.len()).collect();
    agent_order.sort_by_key(|&i| scenario.agents[i].id);

    let per_agent_sets: Vec<Vec<TaskSet>> = agent_order
        .par_iter()
        .map(|&i| enumerate_feasible_sets(scenario, &scenario.agents[i], config))
        .collect::<Result<_, _>>()?;

    // Shared set nodes, deduplicated by (size, members), in lexicographic
    // order so edge insertion order realizes the documented tie-break.
    let mut set_keys: Vec<(usize, Vec<TaskId>)> = per_agent_sets
        .iter()
        .flat_map(|sets| sets.iter().map(|s| (s.members.len(), s.members.clone())))
        .collect();
    set_keys.sort();
    set_keys.dedup();
    let set_index: HashMap<&(usize, Vec<TaskId>), usize> =
        set_keys.iter().enumerate().map(|(i, k)| (k, i)).collect();

    let m = scenario.agents.len();
    let n_sets = set_keys.len();
    let n_tasks = scenario.tasks.len();
    let node_count = 1 + m + n_sets + n_tasks + 1;
    let source = 0;
    let sink = node_count - 1;
    let agent_base = 1;
    let set_base = 1 + m;
    let task_base = set_base + n_sets;
    let task_node: HashMap<TaskId, usize> = scenario
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id, task_base + i))
        .collect();

    let mut graph = FlowGraph::new(node_count, source, sink)?;
    let agent_nodes: Vec<usize> = (0..m).map(|i| agent_base + i).collect();
    for (slot, &i) in agent_order.iter().enumerate() {
        graph.add_edge(source, agent_nodes[slot], scenario.agents[i].task_limit as i64, 0.0)?;
    }
    let mut edge_owner: HashMap<usize, (usize, usize)> = HashMap::new();
    for (slot, sets) in per_agent_sets.iter().enumerate() {
        let q = scenario.agents[agent_order[slot]].task_limit as i64;
        let mut indexed: Vec<(usize, &TaskSet)> = sets.iter().enumerate().collect();
        indexed.sort_by(|a, b| a.1.members.cmp(&b.1.members));
        for (set_pos, set) in indexed {
            let key = (set.members.len(), set.members.clone());
            let node = set_base + set_index[&key];
            let edge = graph.add_edge(agent_nodes[slot], node, q, set.cost)?;
            edge_owner.insert(edge, (slot, set_pos));
        }
    }
    let task_cap: HashMap<TaskId, i64> = scenario
        .tasks
        .iter()
        .map(|t| (t.id, t.max_agents as i64))
        .collect();
    for (idx, key) in set_keys.iter().enumerate() {
        let node = set_base + idx;
        for task_id in &key.1 {
            graph.add_edge(node, task_node[task_id], task_cap[task_id], 0.0)?;
        }
    }
    for (i, task) in scenario.tasks.iter().enumerate() {
        graph.add_edge(task_base + i, sink, task.max_agents as i64, 0.0)?;
    }

    let set_nodes: Vec<usize> = (0..n_sets).map(|i| set_base + i).collect();
    Ok(Network {
        graph,
        agent_nodes,
        set_nodes,
        edge_owner,
        per_agent_sets,
        agent_order,
    })
}

/// DOT dump of the layered network, for debugging.
pub fn network_dot(scenario: &FamtScenario, config: &FamtConfig) -> Result<String, FamtError> {
    scenario.validate()?;
    Ok(build_network(scenario, config)?.graph.to_dot())
}

/// Nearest-task greedy baseline: agents in id order each walk to the
/// closest task that still has capacity, until they hold `q` tasks or the
/// next leg would exceed their endurance.
pub fn solve_greedy_pt(scenario: &FamtScenario) -> Result<FamtAssignment, FamtError> {
    scenario.validate()?;
    let mut remaining_cap: HashMap<TaskId, u32> = scenario
        .tasks
        .iter()
        .map(|t| (t.id, t.max_agents))
        .collect();

    let mut agent_order: Vec<usize> = (0..scenario.agents.len()).collect();
    agent_order.sort_by_key(|&i| scenario.agents[i].id);

    let mut by_id: HashMap<AgentId, AgentAssignment> = HashMap::new();
    for &i in &agent_order {
        let agent = &scenario.agents[i];
        let mut cursor = agent.position;
        let mut walked = 0.0;
        let mut taken: Vec<TaskId> = Vec::new();

        while taken.len() < agent.task_limit as usize {
            let nearest = scenario
                .tasks
                .iter()
                .filter(|t| remaining_cap[&t.id] > 0 && !taken.contains(&t.id))
                .map(|t| (euclidean_distance(&cursor, &t.position), t.id, t.position))
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let Some((leg, task_id, task_pos)) = nearest else {
                break;
            };
            if walked + leg > agent.max_travel {
                break;
            }
            walked += leg;
            cursor = task_pos;
            taken.push(task_id);
            *remaining_cap.get_mut(&task_id).unwrap() -= 1;
        }

        by_id.insert(
            agent.id,
            AgentAssignment {
                agent: agent.id,
                tasks: taken,
                distance: walked,
            },
        );
    }

    let per_agent = scenario
        .agents
        .iter()
        .map(|a| by_id.remove(&a.id).unwrap())
        .collect();
    let assignment = FamtAssignment::from_parts("mt-grdpt", per_agent);
    assignment
        .validate(scenario, false)
        .expect("mt-grdpt produced an assignment violating the problem constraints");
    Ok(assignment)
}
