//! Independent brute-force oracles for the solver test suites. Everything
//! here enumerates exhaustively and never calls the code paths it checks.

use std::collections::HashMap;

use agco_core::maft::{MaftInstance, WeightConfig, KINDS};
use agco_core::model::{
    euclidean_distance, Agent, AgentId, AgentKind, FamtScenario, Position, TaskId,
};

/// Plain edge list description of a flow network.
#[derive(Debug, Clone)]
pub struct RawGraph {
    pub nodes: usize,
    pub source: usize,
    pub sink: usize,
    /// (from, to, capacity, cost)
    pub edges: Vec<(usize, usize, i64, f64)>,
}

/// Exhaustive minimum-cost maximum-flow: try every integer flow vector
/// within capacities, keep those conserving flow, maximize flow then
/// minimize cost.
pub fn brute_force_mcmf(graph: &RawGraph) -> (i64, f64) {
    fn recurse(
        graph: &RawGraph,
        edge: usize,
        flows: &mut Vec<i64>,
        best: &mut (i64, f64),
    ) {
        if edge == graph.edges.len() {
            let mut balance = vec![0i64; graph.nodes];
            for ((from, to, _, _), &flow) in graph.edges.iter().zip(flows.iter()) {
                balance[*from] -= flow;
                balance[*to] += flow;
            }
            for node in 0..graph.nodes {
                if node != graph.source && node != graph.sink && balance[node] != 0 {
                    return;
                }
            }
            let flow = balance[graph.sink];
            let cost: f64 = graph
                .edges
                .iter()
                .zip(flows.iter())
                .map(|((_, _, _, c), &f)| c * f as f64)
                .sum();
            if flow > best.0 || (flow == best.0 && cost < best.1) {
                *best = (flow, cost);
            }
            return;
        }
        for f in 0..=graph.edges[edge].2 {
            flows.push(f);
            recurse(graph, edge + 1, flows, best);
            flows.pop();
        }
    }

    let mut best = (0, 0.0);
    recurse(graph, 0, &mut Vec::new(), &mut best);
    best
}

/// Shortest open path by full permutation enumeration.
pub fn brute_force_open_path(start: &Position, stops: &[Position]) -> f64 {
    fn permute(
        start: &Position,
        stops: &[Position],
        remaining: &mut Vec<usize>,
        prefix_len: f64,
        cursor: &Position,
        best: &mut f64,
    ) {
        if remaining.is_empty() {
            *best = best.min(prefix_len);
            return;
        }
        for i in 0..remaining.len() {
            let stop = remaining.remove(i);
            let leg = euclidean_distance(cursor, &stops[stop]);
            permute(
                start,
                stops,
                remaining,
                prefix_len + leg,
                &stops[stop],
                best,
            );
            remaining.insert(i, stop);
        }
    }

    if stops.is_empty() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut remaining: Vec<usize> = (0..stops.len()).collect();
    permute(start, stops, &mut remaining, 0.0, start, &mut best);
    best
}

/// Exhaustive few-agents-many-tasks optimum: every joint choice of one
/// feasible task set (or none) per agent, honoring per-task caps, ranked
/// by executions first and total distance second. Set costs come from the
/// permutation oracle above, not the production tour solver.
pub fn brute_force_famt(scenario: &FamtScenario) -> (u64, f64) {
    struct Option_ {
        tasks: Vec<usize>,
        cost: f64,
    }

    let combos_per_agent: Vec<Vec<Option_>> = scenario
        .agents
        .iter()
        .map(|agent| {
            let q = agent.task_limit as usize;
            let mut options = Vec::new();
            let n = scenario.tasks.len();
            if q <= n {
                let mut combo: Vec<usize> = Vec::new();
                build_combos(n, q, 0, &mut combo, &mut |combo: &[usize]| {
                    let stops: Vec<Position> = combo
                        .iter()
                        .map(|&i| scenario.tasks[i].position)
                        .collect();
                    let cost = brute_force_open_path(&agent.position, &stops);
                    if cost <= agent.max_travel {
                        options.push(Option_ {
                            tasks: combo.to_vec(),
                            cost,
                        });
                    }
                });
            }
            options
        })
        .collect();

    fn search(
        scenario: &FamtScenario,
        combos: &[Vec<Option_>],
        agent: usize,
        usage: &mut Vec<u32>,
        executions: u64,
        distance: f64,
        best: &mut (u64, f64),
    ) {
        if agent == combos.len() {
            if executions > best.0 || (executions == best.0 && distance < best.1) {
                *best = (executions, distance);
            }
            return;
        }
        // Option: leave this agent unassigned.
        search(scenario, combos, agent + 1, usage, executions, distance, best);
        for option in &combos[agent] {
            if option
                .tasks
                .iter()
                .all(|&t| usage[t] < scenario.tasks[t].max_agents)
            {
                for &t in &option.tasks {
                    usage[t] += 1;
                }
                search(
                    scenario,
                    combos,
                    agent + 1,
                    usage,
                    executions + option.tasks.len() as u64,
                    distance + option.cost,
                    best,
                );
                for &t in &option.tasks {
                    usage[t] -= 1;
                }
            }
        }
    }

    let mut best = (0, 0.0);
    let mut usage = vec![0u32; scenario.tasks.len()];
    search(
        scenario,
        &combos_per_agent,
        0,
        &mut usage,
        0,
        0.0,
        &mut best,
    );
    best
}

fn build_combos(
    n: usize,
    q: usize,
    from: usize,
    combo: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if combo.len() == q {
        visit(combo);
        return;
    }
    for i in from..n {
        combo.push(i);
        build_combos(n, q, i + 1, combo, visit);
        combo.pop();
    }
}

/// Raw distance and time of one full assignment in a MAFT instance.
fn maft_raws(instance: &MaftInstance, counts: &HashMap<(usize, usize, usize), u32>) -> (f64, f64) {
    let mut distance = 0.0;
    let mut time = 0.0;
    for (&(r, k, j), &count) in counts {
        if count == 0 {
            continue;
        }
        let d = euclidean_distance(
            &instance.regions[r].position,
            &instance.tasks[j].position,
        );
        let speed = instance.regions[r].profile(KINDS[k]).speed;
        distance += d * count as f64;
        time += d / speed * count as f64;
    }
    (distance, time)
}

/// Every feasible integer assignment of a MAFT instance, via per-task
/// compositions of the demand over eligible (region, kind) slots.
fn enumerate_maft(instance: &MaftInstance, mut visit: impl FnMut(&HashMap<(usize, usize, usize), u32>)) {
    let slots: Vec<(usize, usize)> = (0..instance.regions.len())
        .flat_map(|r| (0..2).map(move |k| (r, k)))
        .collect();

    fn per_task(
        instance: &MaftInstance,
        slots: &[(usize, usize)],
        task: usize,
        counts: &mut HashMap<(usize, usize, usize), u32>,
        inventory_left: &mut Vec<u32>,
        visit: &mut impl FnMut(&HashMap<(usize, usize, usize), u32>),
    ) {
        if task == instance.tasks.len() {
            visit(counts);
            return;
        }
        let demand = instance.tasks[task].max_agents;
        fn compose(
            instance: &MaftInstance,
            slots: &[(usize, usize)],
            task: usize,
            slot: usize,
            left: u32,
            counts: &mut HashMap<(usize, usize, usize), u32>,
            inventory_left: &mut Vec<u32>,
            visit: &mut impl FnMut(&HashMap<(usize, usize, usize), u32>),
        ) {
            if left == 0 {
                per_task(instance, slots, task + 1, counts, inventory_left, visit);
                return;
            }
            if slot == slots.len() {
                return;
            }
            let (r, k) = slots[slot];
            let eligible = instance.eligibility[r][task][k];
            let max_here = if eligible {
                inventory_left[slot].min(left)
            } else {
                0
            };
            for take in 0..=max_here {
                if take > 0 {
                    counts.insert((r, k, task), take);
                    inventory_left[slot] -= take;
                }
                compose(
                    instance,
                    slots,
                    task,
                    slot + 1,
                    left - take,
                    counts,
                    inventory_left,
                    visit,
                );
                if take > 0 {
                    counts.remove(&(r, k, task));
                    inventory_left[slot] += take;
                }
            }
        }
        compose(
            instance,
            slots,
            task,
            0,
            demand,
            counts,
            inventory_left,
            visit,
        );
    }

    let mut inventory_left: Vec<u32> = slots
        .iter()
        .map(|&(r, k)| instance.regions[r].profile(KINDS[k]).count)
        .collect();
    let mut counts = HashMap::new();
    per_task(
        instance,
        &slots,
        0,
        &mut counts,
        &mut inventory_left,
        &mut visit,
    );
}

/// Exhaustive raw-objective extremes: (d_min, d_max, t_min, t_max), or
/// `None` when no feasible assignment exists.
pub fn brute_force_maft_bounds(instance: &MaftInstance) -> Option<(f64, f64, f64, f64)> {
    let mut bounds: Option<(f64, f64, f64, f64)> = None;
    enumerate_maft(instance, |counts| {
        let (d, t) = maft_raws(instance, counts);
        bounds = Some(match bounds {
            None => (d, d, t, t),
            Some((d_min, d_max, t_min, t_max)) => {
                (d_min.min(d), d_max.max(d), t_min.min(t), t_max.max(t))
            }
        });
    });
    bounds
}

/// Exhaustive weighted optimum using the exhaustive bounds for scaling.
/// Returns (normalized objective, raw distance, raw time).
pub fn brute_force_maft(instance: &MaftInstance, weights: WeightConfig) -> Option<(f64, f64, f64)> {
    let (d_min, d_max, t_min, t_max) = brute_force_maft_bounds(instance)?;
    let scale = |value: f64, min: f64, max: f64| {
        if max > min {
            (value - min) / (max - min)
        } else {
            0.0
        }
    };
    let mut best: Option<(f64, f64, f64)> = None;
    enumerate_maft(instance, |counts| {
        let (d, t) = maft_raws(instance, counts);
        let objective = weights.k_t * scale(t, t_min, t_max) + weights.k_d * scale(d, d_min, d_max);
        if best.map_or(true, |(obj, _, _)| objective < obj) {
            best = Some((objective, d, t));
        }
    });
    best
}

/// Deterministic small scenario for the FAMT oracle suites.
pub fn small_famt_scenario(
    rng: &mut impl rand::Rng,
    agents: usize,
    tasks: usize,
    q: u32,
    p: u32,
    max_travel: f64,
) -> FamtScenario {
    use agco_core::model::{CapabilityVector, Task};
    let agents = (0..agents)
        .map(|i| Agent {
            id: AgentId(i as u32),
            kind: if i % 2 == 0 {
                AgentKind::Uav
            } else {
                AgentKind::Ugv
            },
            position: Position::ground(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)),
            speed: if i % 2 == 0 { 20.0 } else { 5.0 },
            capabilities: CapabilityVector::new(vec![1.0, 1.0]),
            max_travel,
            task_limit: q,
        })
        .collect();
    let tasks = (0..tasks)
        .map(|i| Task {
            id: TaskId(i as u32),
            position: Position::ground(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0)),
            requirements: CapabilityVector::new(vec![1.0, 1.0]),
            max_agents: p,
        })
        .collect();
    FamtScenario::new(agents, tasks)
}
