//! Minimum-cost maximum-flow machinery over directed graphs with integer
//! capacities and real per-unit costs, plus the chunked all-or-nothing
//! selection rule used by the layered task-set network.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum McmfError {
    #[error("node id {0} out of range (graph has {1} nodes)")]
    DanglingNode(usize, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge cost must be finite and >= 0, got {0}")]
    BadCost(f64),
    #[error("source and sink must differ")]
    SourceIsSink,
    #[error("graph does not have the layered source-agent-set-task-sink shape: {0}")]
    Shape(String),
}

/// Index of an edge in insertion order.
pub type EdgeId = usize;

#[derive(Debug, Clone)]
struct HalfEdge {
    to: usize,
    residual: i64,
    cost: f64,
}

/// Directed flow network. Every `add_edge` call internally pairs the
/// forward edge with a zero-capacity reverse edge at negated cost.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    node_count: usize,
    source: usize,
    sink: usize,
    edges: Vec<HalfEdge>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowGraph {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Result<Self, McmfError> {
        if source >= node_count {
            return Err(McmfError::DanglingNode(source, node_count));
        }
        if sink >= node_count {
            return Err(McmfError::DanglingNode(sink, node_count));
        }
        if source == sink {
            return Err(McmfError::SourceIsSink);
        }
        Ok(FlowGraph {
            node_count,
            source,
            sink,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); node_count],
        })
    }

    pub fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        capacity: i64,
        cost: f64,
    ) -> Result<EdgeId, McmfError> {
        if from >= self.node_count {
            return Err(McmfError::DanglingNode(from, self.node_count));
        }
        if to >= self.node_count {
            return Err(McmfError::DanglingNode(to, self.node_count));
        }
        if from == to {
            return Err(McmfError::SelfLoop(from));
        }
        if !cost.is_finite() || cost < 0.0 {
            return Err(McmfError::BadCost(cost));
        }
        let id = self.edges.len() / 2;
        self.adjacency[from].push(self.edges.len());
        self.edges.push(HalfEdge {
            to,
            residual: capacity.max(0),
            cost,
        });
        self.adjacency[to].push(self.edges.len());
        self.edges.push(HalfEdge {
            to: from,
            residual: 0,
            cost: -cost,
        });
        Ok(id)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len() / 2
    }

    /// (from, to, capacity, cost) of a forward edge.
    pub fn edge(&self, id: EdgeId) -> (usize, usize, i64, f64) {
        let fwd = &self.edges[2 * id];
        let rev = &self.edges[2 * id + 1];
        (rev.to, fwd.to, fwd.residual + rev.residual, fwd.cost)
    }

    /// GraphViz DOT dump of the network for debugging.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph flow {\n  rankdir=LR;\n");
        let _ = writeln!(out, "  n{} [label=\"source\"];", self.source);
        let _ = writeln!(out, "  n{} [label=\"sink\"];", self.sink);
        for id in 0..self.edge_count() {
            let (from, to, cap, cost) = self.edge(id);
            let _ = writeln!(
                out,
                "  n{from} -> n{to} [label=\"cap {cap} cost {cost:.3}\"];"
            );
        }
        out.push_str("}\n");
        out
    }
}

/// The outcome of a flow computation.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    /// Units pushed from source to sink.
    pub total_flow: i64,
    /// For [`min_cost_max_flow`], the per-unit cost sum over forward edges.
    /// For [`chunked_min_cost_selection`], each selected set edge is priced
    /// once (its cost is the whole bundle's tour length).
    pub total_cost: f64,
    /// Flow on each forward edge, indexed by [`EdgeId`].
    pub edge_flows: Vec<i64>,
}

impl FlowResult {
    /// Flow conservation check at every interior node.
    fn assert_conservation(&self, graph: &FlowGraph) {
        let mut balance = vec![0i64; graph.node_count];
        for id in 0..graph.edge_count() {
            let (from, to, _, _) = graph.edge(id);
            balance[from] -= self.edge_flows[id];
            balance[to] += self.edge_flows[id];
        }
        for node in 0..graph.node_count {
            if node == graph.source || node == graph.sink {
                continue;
            }
            assert_eq!(
                balance[node], 0,
                "flow conservation violated at node {node}"
            );
        }
        assert_eq!(balance[graph.source], -self.total_flow);
        assert_eq!(balance[graph.sink], self.total_flow);
    }
}

struct DijkstraState {
    dist: Vec<f64>,
    parent_edge: Vec<usize>,
}

const UNSET: usize = usize::MAX;

/// Maximum flow of minimum total cost via successive shortest augmenting
/// paths with node potentials.
pub fn min_cost_max_flow(graph: &FlowGraph) -> Result<FlowResult, McmfError> {
    let n = graph.node_count;
    let mut edges = graph.edges.clone();
    let mut potential = vec![0.0f64; n];
    let mut total_flow = 0i64;

    loop {
        let state = dijkstra(graph, &edges, &potential);
        if state.parent_edge[graph.sink] == UNSET {
            break;
        }

        // Bottleneck along the augmenting path.
        let mut bottleneck = i64::MAX;
        let mut node = graph.sink;
        while node != graph.source {
            let e = state.parent_edge[node];
            bottleneck = bottleneck.min(edges[e].residual);
            node = edges[e ^ 1].to;
        }

        let mut node = graph.sink;
        while node != graph.source {
            let e = state.parent_edge[node];
            edges[e].residual -= bottleneck;
            edges[e ^ 1].residual += bottleneck;
            node = edges[e ^ 1].to;
        }
        total_flow += bottleneck;

        for v in 0..n {
            if state.dist[v].is_finite() {
                potential[v] += state.dist[v];
            }
        }
    }

    let mut edge_flows = vec![0i64; graph.edge_count()];
    let mut total_cost = 0.0;
    for id in 0..graph.edge_count() {
        let flow = edges[2 * id + 1].residual;
        edge_flows[id] = flow;
        total_cost += flow as f64 * graph.edges[2 * id].cost;
    }
    let result = FlowResult {
        total_flow,
        total_cost,
        edge_flows,
    };
    result.assert_conservation(graph);
    Ok(result)
}

fn dijkstra(graph: &FlowGraph, edges: &[HalfEdge], potential: &[f64]) -> DijkstraState {
    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    let n = graph.node_count;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent_edge = vec![UNSET; n];
    let mut heap = BinaryHeap::new();
    dist[graph.source] = 0.0;
    heap.push(Reverse(Entry(0.0, graph.source)));

    while let Some(Reverse(Entry(d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &e in &graph.adjacency[u] {
            if edges[e].residual <= 0 {
                continue;
            }
            let v = edges[e].to;
            // Reduced cost; clamp float dust so Dijkstra stays valid.
            let reduced = (edges[e].cost + potential[u] - potential[v]).max(0.0);
            let candidate = d + reduced;
            if candidate < dist[v] {
                dist[v] = candidate;
                parent_edge[v] = e;
                heap.push(Reverse(Entry(candidate, v)));
            }
        }
    }

    DijkstraState { dist, parent_edge }
}

/// All-or-nothing selection over the layered source -> agents -> task-sets
/// -> tasks -> sink network.
///
/// Repeatedly picks the cheapest feasible (agent, set) pair — the agent is
/// still unassigned and every member task retains both member-edge and
/// sink capacity — then pushes the agent's whole chunk `q` through the set
/// and one unit onto each member task. Agents never get de-assigned. Ties
/// fall to the earliest agent in `agent_nodes`, then the earliest-inserted
/// set edge.
pub fn chunked_min_cost_selection(
    graph: &FlowGraph,
    agent_nodes: &[usize],
    set_nodes: &[usize],
) -> Result<FlowResult, McmfError> {
    let shape = LayeredShape::analyze(graph, agent_nodes, set_nodes)?;

    let mut edge_flows = vec![0i64; graph.edge_count()];
    let mut total_flow = 0i64;
    let mut total_cost = 0.0;
    let mut agent_assigned = vec![false; agent_nodes.len()];
    let mut sink_residual: Vec<i64> = shape
        .task_sink_edge
        .iter()
        .map(|&edge| if edge == UNSET { 0 } else { graph.edge(edge).2 })
        .collect();

    loop {
        let mut best_cost = f64::INFINITY;
        let mut best: Option<(usize, usize)> = None; // (agent index, set edge id)

        for (agent_idx, &agent_node) in agent_nodes.iter().enumerate() {
            if agent_assigned[agent_idx] {
                continue;
            }
            for &half in &graph.adjacency[agent_node] {
                if half % 2 != 0 {
                    continue;
                }
                let edge_id = half / 2;
                let (_, set_node, _, cost) = graph.edge(edge_id);
                if !shape.is_set[set_node] {
                    continue;
                }
                let feasible = shape.set_members[set_node].iter().all(|&(member, task)| {
                    edge_flows[member] < graph.edge(member).2 && sink_residual[task] >= 1
                });
                if feasible && cost < best_cost {
                    best_cost = cost;
                    best = Some((agent_idx, edge_id));
                }
            }
        }

        let Some((agent_idx, set_edge)) = best else {
            break;
        };
        let (agent_node, _, _, cost) = graph.edge(set_edge);
        let q = shape.agent_chunk[agent_node];

        agent_assigned[agent_idx] = true;
        edge_flows[shape.agent_source_edge[agent_node]] = q;
        edge_flows[set_edge] = q;
        for &(member_edge, task) in &shape.set_members[graph.edge(set_edge).1] {
            edge_flows[member_edge] += 1;
            edge_flows[shape.task_sink_edge[task]] += 1;
            sink_residual[task] -= 1;
        }
        total_flow += q;
        total_cost += cost;
    }

    let result = FlowResult {
        total_flow,
        total_cost,
        edge_flows,
    };
    result.assert_conservation(graph);
    Ok(result)
}

/// Precomputed structure of the layered network, with shape validation.
struct LayeredShape {
    is_set: Vec<bool>,
    /// Per agent node: its chunk size q (source edge capacity).
    agent_chunk: Vec<i64>,
    /// Per agent node: the source -> agent forward edge id.
    agent_source_edge: Vec<EdgeId>,
    /// Per set node: (set -> task edge id, task node).
    set_members: Vec<Vec<(EdgeId, usize)>>,
    /// Per task node: the task -> sink forward edge id.
    task_sink_edge: Vec<EdgeId>,
}

impl LayeredShape {
    fn analyze(
        graph: &FlowGraph,
        agent_nodes: &[usize],
        set_nodes: &[usize],
    ) -> Result<Self, McmfError> {
        let n = graph.node_count;
        let mut is_agent = vec![false; n];
        let mut is_set = vec![false; n];
        for &a in agent_nodes {
            if a >= n {
                return Err(McmfError::DanglingNode(a, n));
            }
            if a == graph.source || a == graph.sink {
                return Err(McmfError::Shape(format!(
                    "agent node {a} collides with source or sink"
                )));
            }
            is_agent[a] = true;
        }
        for &s in set_nodes {
            if s >= n {
                return Err(McmfError::DanglingNode(s, n));
            }
            if is_agent[s] || s == graph.source || s == graph.sink {
                return Err(McmfError::Shape(format!(
                    "set node {s} collides with another layer"
                )));
            }
            is_set[s] = true;
        }

        let mut agent_chunk = vec![0i64; n];
        let mut agent_source_edge = vec![UNSET; n];
        let mut set_members: Vec<Vec<(EdgeId, usize)>> = vec![Vec::new(); n];
        let mut task_sink_edge = vec![UNSET; n];

        for id in 0..graph.edge_count() {
            let (from, to, cap, _) = graph.edge(id);
            if from == graph.source {
                if !is_agent[to] {
                    return Err(McmfError::Shape(format!(
                        "source edge targets non-agent node {to}"
                    )));
                }
                if agent_source_edge[to] != UNSET {
                    return Err(McmfError::Shape(format!(
                        "agent node {to} has two source edges"
                    )));
                }
                agent_source_edge[to] = id;
                agent_chunk[to] = cap;
            } else if is_agent[from] {
                if !is_set[to] {
                    return Err(McmfError::Shape(format!(
                        "agent edge targets non-set node {to}"
                    )));
                }
            } else if is_set[from] {
                if is_agent[to] || is_set[to] || to == graph.source || to == graph.sink {
                    return Err(McmfError::Shape(format!(
                        "set edge targets non-task node {to}"
                    )));
                }
                set_members[from].push((id, to));
            } else if to == graph.sink {
                if task_sink_edge[from] != UNSET {
                    return Err(McmfError::Shape(format!(
                        "task node {from} has two sink edges"
                    )));
                }
                task_sink_edge[from] = id;
            } else {
                return Err(McmfError::Shape(format!(
                    "unexpected edge from node {from} to node {to}"
                )));
            }
        }

        for &a in agent_nodes {
            if agent_source_edge[a] == UNSET {
                return Err(McmfError::Shape(format!("agent node {a} has no source edge")));
            }
            if agent_chunk[a] < 1 {
                return Err(McmfError::Shape(format!(
                    "agent node {a} has chunk capacity {} (< 1)",
                    agent_chunk[a]
                )));
            }
        }

        // Every agent edge must point at a set whose member count matches
        // the agent's chunk, and every member task must reach the sink.
        for id in 0..graph.edge_count() {
            let (from, to, cap, _) = graph.edge(id);
            if is_agent[from] {
                let members = set_members[to].len() as i64;
                if members != agent_chunk[from] {
                    return Err(McmfError::Shape(format!(
                        "agent node {from} (chunk {}) linked to set node {to} with {members} members",
                        agent_chunk[from]
                    )));
                }
                if cap < agent_chunk[from] {
                    return Err(McmfError::Shape(format!(
                        "agent-set edge {from}->{to} capacity {cap} below chunk {}",
                        agent_chunk[from]
                    )));
                }
            }
            if is_set[from] && task_sink_edge[to] == UNSET {
                return Err(McmfError::Shape(format!(
                    "task node {to} has no sink edge"
                )));
            }
        }

        Ok(LayeredShape {
            is_set,
            agent_chunk,
            agent_source_edge,
            set_members,
            task_sink_edge,
        })
    }
}
