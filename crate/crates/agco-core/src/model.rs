//! Shared domain types: positions, agents, tasks and capability math.
//!
//! All distances are meters, all speeds meters per minute. UAVs may carry a
//! cruise altitude in `position.h`; UGVs are pinned to the ground plane.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema version written into every scenario document this crate emits.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("capability vectors have different lengths ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },
    #[error("capability vector is empty")]
    EmptyCapabilities,
    #[error("capability component must be > 0, got {0}")]
    NonPositiveCapability(f64),
    #[error("position coordinate is not finite")]
    NonFinitePosition,
    #[error("altitude must be >= 0, got {0}")]
    NegativeAltitude(f64),
    #[error("UGV {0} must sit on the ground plane (h = 0)")]
    UgvAboveGround(u32),
    #[error("agent {0}: {1}")]
    InvalidAgent(u32, String),
    #[error("task {0}: {1}")]
    InvalidTask(u32, String),
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("unsupported schema version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
}

/// A point in the 3D scene, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    /// Altitude above ground; 0 for anything that drives.
    pub h: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, h: f64) -> Self {
        Position { x, y, h }
    }

    /// Ground-plane point.
    pub fn ground(x: f64, y: f64) -> Self {
        Position { x, y, h: 0.0 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.x.is_finite() && self.y.is_finite() && self.h.is_finite()) {
            return Err(ModelError::NonFinitePosition);
        }
        if self.h < 0.0 {
            return Err(ModelError::NegativeAltitude(self.h));
        }
        Ok(())
    }

    /// Planar (x, y) distance, ignoring altitude.
    pub fn planar_distance(&self, other: &Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// 3D Euclidean distance between two positions.
pub fn euclidean_distance(a: &Position, b: &Position) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dh = a.h - b.h;
    (dx * dx + dy * dy + dh * dh).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Uav,
    Ugv,
}

impl AgentKind {
    pub fn label(&self) -> &'static str {
        match self {
            AgentKind::Uav => "uav",
            AgentKind::Ugv => "ugv",
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Ordered capability magnitudes, one per capability type. Agents and tasks
/// in one scenario share the same length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapabilityVector(pub Vec<f64>);

impl CapabilityVector {
    pub fn new(levels: Vec<f64>) -> Self {
        CapabilityVector(levels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.0.is_empty() {
            return Err(ModelError::EmptyCapabilities);
        }
        for &c in &self.0 {
            if !(c > 0.0) || !c.is_finite() {
                return Err(ModelError::NonPositiveCapability(c));
            }
        }
        Ok(())
    }
}

/// Dominance coefficient: 2 when the agent strictly exceeds the task on
/// every capability component, 1/2 otherwise. Ties are not dominance.
pub fn capability_coefficient(
    agent: &CapabilityVector,
    task: &CapabilityVector,
) -> Result<f64, ModelError> {
    if agent.len() != task.len() {
        return Err(ModelError::DimensionMismatch {
            left: agent.len(),
            right: task.len(),
        });
    }
    let dominates = agent.0.iter().zip(&task.0).all(|(a, t)| a > t);
    Ok(if dominates { 2.0 } else { 0.5 })
}

/// Capability effectiveness score: the sum of per-component ratios
/// agent/task, scaled by the dominance coefficient.
pub fn effectiveness(
    agent: &CapabilityVector,
    task: &CapabilityVector,
) -> Result<f64, ModelError> {
    let co = capability_coefficient(agent, task)?;
    let ratio_sum: f64 = agent.0.iter().zip(&task.0).map(|(a, t)| a / t).sum();
    Ok(ratio_sum * co)
}

/// True when the agent may execute the task at all: strict dominance on
/// every capability component.
pub fn is_eligible(agent: &CapabilityVector, task: &CapabilityVector) -> Result<bool, ModelError> {
    Ok(capability_coefficient(agent, task)? == 2.0)
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct AgentId(pub u32);

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub kind: AgentKind,
    pub position: Position,
    /// Meters per minute.
    pub speed: f64,
    pub capabilities: CapabilityVector,
    /// Endurance bound: the total travel distance this agent may cover.
    pub max_travel: f64,
    /// How many tasks this agent executes in one allocation round.
    pub task_limit: u32,
}

impl Agent {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.position.validate()?;
        self.capabilities.validate()?;
        if self.kind == AgentKind::Ugv && self.position.h != 0.0 {
            return Err(ModelError::UgvAboveGround(self.id.0));
        }
        if !(self.speed > 0.0) {
            return Err(ModelError::InvalidAgent(
                self.id.0,
                format!("speed must be > 0, got {}", self.speed),
            ));
        }
        if !(self.max_travel > 0.0) {
            return Err(ModelError::InvalidAgent(
                self.id.0,
                format!("max_travel must be > 0, got {}", self.max_travel),
            ));
        }
        if self.task_limit < 1 {
            return Err(ModelError::InvalidAgent(
                self.id.0,
                "task_limit must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub position: Position,
    pub requirements: CapabilityVector,
    /// Cap on how many agents may be assigned to this task.
    pub max_agents: u32,
}

impl Task {
    pub fn validate(&self) -> Result<(), ModelError> {
        self.position.validate()?;
        // Requirements appear as denominators in the effectiveness ratio.
        self.requirements.validate().map_err(|e| match e {
            ModelError::EmptyCapabilities => {
                ModelError::InvalidTask(self.id.0, "empty requirements".into())
            }
            other => other,
        })?;
        if self.max_agents < 1 {
            return Err(ModelError::InvalidTask(
                self.id.0,
                "max_agents must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Input for the few-agents-many-tasks allocation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamtScenario {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub agents: Vec<Agent>,
    pub tasks: Vec<Task>,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

impl FamtScenario {
    pub fn new(agents: Vec<Agent>, tasks: Vec<Task>) -> Self {
        FamtScenario {
            schema_version: SCHEMA_VERSION,
            agents,
            tasks,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(self.schema_version));
        }
        let mut agent_ids = std::collections::HashSet::new();
        let mut cap_len: Option<usize> = None;
        for agent in &self.agents {
            agent.validate()?;
            if !agent_ids.insert(agent.id) {
                return Err(ModelError::DuplicateId {
                    kind: "agent",
                    id: agent.id.0,
                });
            }
            match cap_len {
                None => cap_len = Some(agent.capabilities.len()),
                Some(n) if n != agent.capabilities.len() => {
                    return Err(ModelError::DimensionMismatch {
                        left: n,
                        right: agent.capabilities.len(),
                    })
                }
                _ => {}
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
            if let Some(n) = cap_len {
                if task.requirements.len() != n {
                    return Err(ModelError::DimensionMismatch {
                        left: n,
                        right: task.requirements.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let scenario: FamtScenario =
            serde_json::from_str(text).map_err(|e| format!("scenario parse error: {e}"))?;
        scenario.validate().map_err(|e| e.to_string())?;
        Ok(scenario)
    }
}
