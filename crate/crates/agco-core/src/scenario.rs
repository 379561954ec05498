//! Seeded scenario generation for both allocation regimes and the charging
//! simulation, plus ingestion of latitude/longitude records into planar
//! coordinates. All randomness flows from the config seed through fixed
//! per-purpose RNG streams, so outputs are bit-reproducible and task lists
//! are prefix-stable when only the task count changes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charging::{ChargingScenario, PlanarPoint, UavState};
use crate::maft::{nearest_seed_labels, KindProfile, MaftInstance, Region};
use crate::model::{
    Agent, AgentId, AgentKind, CapabilityVector, FamtScenario, ModelError, Position, Task, TaskId,
    SCHEMA_VERSION,
};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation config: {0}")]
    BadConfig(String),
    #[error("scattered distribution has empty support: the agent region covers the whole area")]
    EmptySupport,
    #[error("record {row}: {message}")]
    GeoRange { row: usize, message: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Axis-aligned rectangle on the ground plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.min_x..=self.max_x).contains(&x) && (self.min_y..=self.max_y).contains(&y)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.min_x <= other.min_x
            && self.min_y <= other.min_y
            && self.max_x >= other.max_x
            && self.max_y >= other.max_y
    }

    pub fn area(&self) -> f64 {
        (self.max_x - self.min_x) * (self.max_y - self.min_y)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        (
            rng.gen_range(self.min_x..=self.max_x),
            rng.gen_range(self.min_y..=self.max_y),
        )
    }
}

/// Spatial law for task placement relative to the agent region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Tasks inside the agent region.
    Compact,
    /// Tasks in the area but outside the agent region.
    Scattered,
    /// Tasks anywhere in the area.
    #[default]
    Hybrid,
}

impl Distribution {
    pub fn label(&self) -> &'static str {
        match self {
            Distribution::Compact => "compact",
            Distribution::Scattered => "scattered",
            Distribution::Hybrid => "hybrid",
        }
    }
}

/// Per-agent task quota policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy", content = "value")]
pub enum QPolicy {
    Fixed(u32),
    /// Uniform integer per agent, inclusive bounds.
    Uniform(u32, u32),
}

impl Default for QPolicy {
    fn default() -> Self {
        QPolicy::Fixed(3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub seed: u64,
    pub distribution: Distribution,
    pub n_uavs: u32,
    pub n_ugvs: u32,
    pub n_tasks: u32,
    pub area: Rect,
    pub agent_region: Rect,
    pub uav_speed: f64,
    pub ugv_speed: f64,
    /// Cruise altitude written into generated UAV positions.
    pub uav_altitude: f64,
    pub capability_len: usize,
    pub task_req_range: (f64, f64),
    pub agent_cap_range: (f64, f64),
    pub q_policy: QPolicy,
    /// Per-task agent cap for the few-agents regime.
    pub p: u32,
    pub max_travel: f64,
    /// Inclusive range of region counts for the many-agents regime.
    pub region_count_range: (u32, u32),
    /// Inclusive per-region agent count range (split between kinds).
    pub agents_per_region: (u32, u32),
    /// Exact demand per task in the many-agents regime.
    pub maft_demand: u32,
    /// Jitter applied to grid-cell centers, as a fraction of cell size.
    pub region_jitter: f64,
    pub charge_regions: u32,
    pub uavs_per_ugv: u32,
    pub charging_distance: f64,
    pub ugv_max_speed: f64,
    pub speed_constant_k: f64,
    pub consumption_rate: f64,
    /// Reserve factor range for initial UAV energies.
    pub reserve_range: (f64, f64),
    /// Initial UAV-to-UGV distance range, meters.
    pub uav_distance_range: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            distribution: Distribution::Hybrid,
            n_uavs: 2,
            n_ugvs: 2,
            n_tasks: 20,
            area: Rect::new(0.0, 0.0, 1000.0, 1000.0),
            agent_region: Rect::new(300.0, 300.0, 700.0, 700.0),
            uav_speed: 20.0,
            ugv_speed: 5.0,
            uav_altitude: 0.0,
            capability_len: 2,
            task_req_range: (1.0, 3.0),
            agent_cap_range: (1.0, 5.0),
            q_policy: QPolicy::default(),
            p: 6,
            max_travel: 1e9,
            region_count_range: (3, 5),
            agents_per_region: (5, 20),
            maft_demand: 5,
            region_jitter: 0.1,
            charge_regions: 4,
            uavs_per_ugv: 3,
            charging_distance: 5.0,
            ugv_max_speed: 5.0,
            speed_constant_k: 1.0,
            consumption_rate: 0.05,
            reserve_range: (0.3, 0.6),
            uav_distance_range: (30.0, 120.0),
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        GenConfig {
            seed,
            ..GenConfig::default()
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if !self.area.contains_rect(&self.agent_region) {
            return Err(GenError::BadConfig(
                "agent region must lie inside the area".into(),
            ));
        }
        if self.area.area() <= 0.0 {
            return Err(GenError::BadConfig("area must have positive extent".into()));
        }
        if self.p < 1 {
            return Err(GenError::BadConfig("p must be >= 1".into()));
        }
        if self.capability_len == 0 {
            return Err(GenError::BadConfig("capability_len must be >= 1".into()));
        }
        match self.q_policy {
            QPolicy::Fixed(q) if q < 1 => {
                return Err(GenError::BadConfig("fixed q must be >= 1".into()))
            }
            QPolicy::Uniform(lo, hi) if lo < 1 || lo > hi => {
                return Err(GenError::BadConfig(format!(
                    "uniform q range [{lo}, {hi}] is invalid"
                )))
            }
            _ => {}
        }
        let ordered = |(lo, hi): (f64, f64)| lo <= hi && lo > 0.0;
        if !ordered(self.task_req_range) || !ordered(self.agent_cap_range) {
            return Err(GenError::BadConfig(
                "capability ranges must be positive and ordered".into(),
            ));
        }
        if self.region_count_range.0 < 1 || self.region_count_range.0 > self.region_count_range.1 {
            return Err(GenError::BadConfig("region count range is invalid".into()));
        }
        if self.agents_per_region.0 > self.agents_per_region.1 {
            return Err(GenError::BadConfig("agents_per_region range is invalid".into()));
        }
        if self.uav_distance_range.0 > self.uav_distance_range.1
            || self.uav_distance_range.0 <= self.charging_distance
        {
            return Err(GenError::BadConfig(
                "uav_distance_range must be ordered and start beyond the charging distance".into(),
            ));
        }
        Ok(())
    }

    fn stream(&self, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(purpose);
        rng
    }
}

// RNG stream ids per purpose. Tasks own a dedicated stream so that task
// lists are prefix-stable across configs differing only in n_tasks.
const STREAM_AGENTS: u64 = 1;
const STREAM_TASKS: u64 = 2;
const STREAM_REGIONS: u64 = 3;
const STREAM_CHARGING: u64 = 4;

fn sample_capabilities(rng: &mut ChaCha8Rng, len: usize, range: (f64, f64)) -> CapabilityVector {
    CapabilityVector::new((0..len).map(|_| rng.gen_range(range.0..=range.1)).collect())
}

/// Generate a few-agents-many-tasks scenario: agents uniform in the agent
/// region, tasks placed per the configured distribution.
pub fn gen_famt(config: &GenConfig) -> Result<FamtScenario, GenError> {
    config.validate()?;
    if config.distribution == Distribution::Scattered
        && config.agent_region.contains_rect(&config.area)
    {
        return Err(GenError::EmptySupport);
    }

    let mut agent_rng = config.stream(STREAM_AGENTS);
    let mut agents = Vec::with_capacity((config.n_uavs + config.n_ugvs) as usize);
    for i in 0..config.n_uavs + config.n_ugvs {
        let kind = if i < config.n_uavs {
            AgentKind::Uav
        } else {
            AgentKind::Ugv
        };
        let (x, y) = config.agent_region.sample(&mut agent_rng);
        let capabilities =
            sample_capabilities(&mut agent_rng, config.capability_len, config.agent_cap_range);
        let task_limit = match config.q_policy {
            QPolicy::Fixed(q) => q,
            QPolicy::Uniform(lo, hi) => agent_rng.gen_range(lo..=hi),
        };
        agents.push(Agent {
            id: AgentId(i),
            kind,
            position: Position::new(
                x,
                y,
                if kind == AgentKind::Uav {
                    config.uav_altitude
                } else {
                    0.0
                },
            ),
            speed: match kind {
                AgentKind::Uav => config.uav_speed,
                AgentKind::Ugv => config.ugv_speed,
            },
            capabilities,
            max_travel: config.max_travel,
            task_limit,
        });
    }

    let mut task_rng = config.stream(STREAM_TASKS);
    let mut tasks = Vec::with_capacity(config.n_tasks as usize);
    for i in 0..config.n_tasks {
        let (x, y) = match config.distribution {
            Distribution::Compact => config.agent_region.sample(&mut task_rng),
            Distribution::Hybrid => config.area.sample(&mut task_rng),
            Distribution::Scattered => loop {
                let (x, y) = config.area.sample(&mut task_rng);
                if !config.agent_region.contains(x, y) {
                    break (x, y);
                }
            },
        };
        let requirements =
            sample_capabilities(&mut task_rng, config.capability_len, config.task_req_range);
        tasks.push(Task {
            id: TaskId(i),
            position: Position::ground(x, y),
            requirements,
            max_agents: config.p,
        });
    }

    let scenario = FamtScenario::new(agents, tasks);
    scenario.validate()?;
    Ok(scenario)
}

/// Evenly spread `k` centers over the area: centroids of a jittered grid.
fn spread_centers(rng: &mut ChaCha8Rng, area: &Rect, k: usize, jitter: f64) -> Vec<PlanarPoint> {
    let cols = (k as f64).sqrt().ceil() as usize;
    let rows = k.div_ceil(cols);
    let cell_w = (area.max_x - area.min_x) / cols as f64;
    let cell_h = (area.max_y - area.min_y) / rows as f64;
    let mut centers = Vec::with_capacity(k);
    'outer: for r in 0..rows {
        for c in 0..cols {
            if centers.len() == k {
                break 'outer;
            }
            let jx = rng.gen_range(-jitter..=jitter) * cell_w;
            let jy = rng.gen_range(-jitter..=jitter) * cell_h;
            centers.push(PlanarPoint::new(
                area.min_x + (c as f64 + 0.5) * cell_w + jx,
                area.min_y + (r as f64 + 0.5) * cell_h + jy,
            ));
        }
    }
    centers
}

/// Generate a many-agents-few-tasks instance: 3 to 5 agent regions spread
/// over the area, region inventories split between kinds, and `n_tasks`
/// tasks each demanding `maft_demand` agents. The instance may come out
/// infeasible (demand above inventory); callers check `is_feasible`.
pub fn gen_maft(config: &GenConfig) -> Result<MaftInstance, GenError> {
    config.validate()?;
    let mut region_rng = config.stream(STREAM_REGIONS);
    let region_count =
        region_rng.gen_range(config.region_count_range.0..=config.region_count_range.1) as usize;
    let centers = spread_centers(&mut region_rng, &config.area, region_count, config.region_jitter);

    let mut regions = Vec::with_capacity(region_count);
    for (i, center) in centers.iter().enumerate() {
        let total =
            region_rng.gen_range(config.agents_per_region.0..=config.agents_per_region.1);
        let uav_count = region_rng.gen_range(0..=total);
        let uav_caps =
            sample_capabilities(&mut region_rng, config.capability_len, config.agent_cap_range);
        let ugv_caps =
            sample_capabilities(&mut region_rng, config.capability_len, config.agent_cap_range);
        regions.push(Region {
            id: i as u32,
            position: Position::ground(center.x, center.y),
            uav: KindProfile {
                count: uav_count,
                speed: config.uav_speed,
                capabilities: uav_caps,
            },
            ugv: KindProfile {
                count: total - uav_count,
                speed: config.ugv_speed,
                capabilities: ugv_caps,
            },
        });
    }

    let mut task_rng = config.stream(STREAM_TASKS);
    let mut tasks = Vec::with_capacity(config.n_tasks as usize);
    for i in 0..config.n_tasks {
        let (x, y) = config.area.sample(&mut task_rng);
        let requirements =
            sample_capabilities(&mut task_rng, config.capability_len, config.task_req_range);
        tasks.push(Task {
            id: TaskId(i),
            position: Position::ground(x, y),
            requirements,
            max_agents: config.maft_demand,
        });
    }

    Ok(MaftInstance::new(regions, tasks)?)
}

/// Generate one charging scenario per support UGV: UGVs at spread centers,
/// each with `uavs_per_ugv` low-battery UAVs in an annulus around it.
/// Initial energies follow the charging trigger: enough to reach the UGV
/// plus a sampled reserve fraction. UAVs are grouped to their UGV by
/// nearest-seed assignment over the generated positions.
pub fn gen_charging(config: &GenConfig) -> Result<Vec<ChargingScenario>, GenError> {
    config.validate()?;
    let mut rng = config.stream(STREAM_CHARGING);
    let centers = spread_centers(
        &mut rng,
        &config.area,
        config.charge_regions as usize,
        config.region_jitter,
    );

    let mut uavs = Vec::new();
    let mut home = Vec::new();
    for center in &centers {
        for _ in 0..config.uavs_per_ugv {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let radius =
                rng.gen_range(config.uav_distance_range.0..=config.uav_distance_range.1);
            let position =
                PlanarPoint::new(center.x + radius * angle.cos(), center.y + radius * angle.sin());
            let reserve = rng.gen_range(config.reserve_range.0..=config.reserve_range.1);
            let energy = (1.0 + reserve) * config.consumption_rate * radius;
            uavs.push(UavState {
                position,
                speed: config.uav_speed,
                energy,
                consumption_rate: config.consumption_rate,
            });
            home.push(center);
        }
    }

    // Group UAVs to their support UGV by proximity; the annulus radii are
    // small against the center spacing, so this recovers the construction.
    let uav_positions: Vec<Position> = uavs
        .iter()
        .map(|u| Position::ground(u.position.x, u.position.y))
        .collect();
    let seeds: Vec<Position> = centers.iter().map(|c| Position::ground(c.x, c.y)).collect();
    let labels = nearest_seed_labels(&uav_positions, &seeds);

    let mut scenarios: Vec<ChargingScenario> = centers
        .iter()
        .map(|center| ChargingScenario {
            schema_version: SCHEMA_VERSION,
            ugv_position: *center,
            ugv_max_speed: config.ugv_max_speed,
            uavs: Vec::new(),
            k: config.speed_constant_k,
            charging_distance: config.charging_distance,
        })
        .collect();
    for ((uav, label), &center) in uavs.into_iter().zip(labels).zip(&home) {
        debug_assert_eq!(centers[label], *center, "annulus grouping must be pure");
        scenarios[label].uavs.push(uav);
    }
    for scenario in &scenarios {
        scenario
            .validate()
            .map_err(|e| GenError::BadConfig(e.to_string()))?;
    }
    Ok(scenarios)
}

/// A latitude/longitude record, degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoRecord {
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub timestamp: Option<String>,
    #[serde(default)]
    pub site_id: Option<String>,
}

impl GeoRecord {
    pub fn new(latitude: f64, longitude: f64) -> Self {
        GeoRecord {
            latitude,
            longitude,
            timestamp: None,
            site_id: None,
        }
    }

    fn validate(&self, row: usize) -> Result<(), GenError> {
        if !self.latitude.is_finite() || self.latitude.abs() > 90.0 {
            return Err(GenError::GeoRange {
                row,
                message: format!("latitude {} outside [-90, 90]", self.latitude),
            });
        }
        if !self.longitude.is_finite() || self.longitude.abs() > 180.0 {
            return Err(GenError::GeoRange {
                row,
                message: format!("longitude {} outside [-180, 180]", self.longitude),
            });
        }
        Ok(())
    }
}

/// Project records onto a local plane about the reference point using the
/// equirectangular approximation: x = R * dlon * cos(lat_ref), y = R * dlat.
pub fn ingest_geo(records: &[GeoRecord], reference: &GeoRecord) -> Result<Vec<Position>, GenError> {
    reference.validate(0)?;
    let cos_ref = reference.latitude.to_radians().cos();
    records
        .iter()
        .enumerate()
        .map(|(i, record)| {
            record.validate(i + 1)?;
            let dlon = (record.longitude - reference.longitude).to_radians();
            let dlat = (record.latitude - reference.latitude).to_radians();
            Ok(Position::ground(
                EARTH_RADIUS_M * dlon * cos_ref,
                EARTH_RADIUS_M * dlat,
            ))
        })
        .collect()
}

/// Read geo records from CSV with header `lat,lon[,timestamp,site_id]`.
pub fn read_geo_csv<R: std::io::Read>(reader: R) -> Result<Vec<GeoRecord>, GenError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let lat_col = find("lat")
        .or_else(|| find("latitude"))
        .ok_or_else(|| GenError::BadConfig("csv is missing a 'lat' column".into()))?;
    let lon_col = find("lon")
        .or_else(|| find("longitude"))
        .ok_or_else(|| GenError::BadConfig("csv is missing a 'lon' column".into()))?;
    let ts_col = find("timestamp");
    let site_col = find("site_id");

    let mut records = Vec::new();
    for (i, row) in csv_reader.records().enumerate() {
        let row = row?;
        let parse = |col: usize, what: &str| -> Result<f64, GenError> {
            row.get(col)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| GenError::GeoRange {
                    row: i + 1,
                    message: format!("cannot parse {what}"),
                })
        };
        let record = GeoRecord {
            latitude: parse(lat_col, "latitude")?,
            longitude: parse(lon_col, "longitude")?,
            timestamp: ts_col.and_then(|c| row.get(c)).map(str::to_string),
            site_id: site_col.and_then(|c| row.get(c)).map(str::to_string),
        };
        record.validate(i + 1)?;
        records.push(record);
    }
    Ok(records)
}
