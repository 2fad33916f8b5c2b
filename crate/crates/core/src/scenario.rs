//! Generators for the bundled manufacturing example.
//!
//! The example plant has a conveyor belt moving work pieces through the
//! working envelope of robot 2, a ComHub whose links to the plant devices
//! degrade towards the end of the day, a grid of detection sensors, and a
//! two-level site topology (communication between sites, physical
//! influence between machines). Everything here is a pure, deterministic
//! generator; the bundled `.bsd` fixtures are committed prints of these
//! builders and tests assert they stay equal.

use std::collections::BTreeMap;

use crate::geometry::Region;
use crate::model::{AtomValue, Invariant, Tick};
use crate::pipeline::EventRecord;
use crate::temporal::{flatten, TimedFact};
use crate::topology::TimeIndexedGraph;

pub const ROBOT2_OWNER: &str = "Robot2_Space";
pub const WORKPIECE_OWNER: &str = "WorkPiece_Space";
pub const COMM_OWNER: &str = "midlevelcommgraph";
pub const SITE_COMM_OWNER: &str = "site_comm";
pub const INFLUENCE_OWNER: &str = "physical_influence";

pub const COMM_HUB: &str = "ComHub";
pub const MANUFACTURING_SITE: &str = "manufacturing site";
pub const SERVICE_CENTER_1: &str = "service center 1";
pub const SERVICE_CENTER_2: &str = "service center 2";

/// The trigger event name used by the trajectory models: facts are timed
/// relative to the arrival of a work piece on the conveyor belt.
pub const CONVEYOR_EVENT: &str = "ConvAct";

/// Sensor grid layout: `rows x cols` sensors, `spacing` cells apart,
/// each with a circular detection `range`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensorGrid {
    pub rows: u32,
    pub cols: u32,
    pub spacing: i64,
    pub range: i64,
}

/// Parameters of the generated example. The defaults reproduce the
/// bundled fixtures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioConfig {
    /// Belt movement in cells per tick.
    pub belt_speed: i64,
    /// Work piece extent along the belt.
    pub workpiece_width: i64,
    /// The belt band the work piece occupies, as a closed y-interval.
    pub workpiece_y: (i64, i64),
    /// Last trajectory step; facts are generated for `0..=trajectory_ticks`.
    pub trajectory_ticks: u64,
    pub sensor_grid: SensorGrid,
    /// Seed for synthetic event generation.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> ScenarioConfig {
        ScenarioConfig {
            belt_speed: 1,
            workpiece_width: 20,
            workpiece_y: (100, 120),
            trajectory_ticks: 100,
            sensor_grid: SensorGrid { rows: 2, cols: 2, spacing: 10, range: 6 },
            seed: 0,
        }
    }
}

// ============================================================================
// Communication model
// ============================================================================

fn hub_edges(names: &[&str]) -> Invariant {
    Invariant::BigAnd(
        names
            .iter()
            .map(|n| Invariant::Atom(AtomValue::Edge(COMM_HUB.to_string(), n.to_string())))
            .collect(),
    )
}

/// The day-long communication model of the example plant: the ComHub
/// serves all five devices for most of the day, loses the conveyor belt
/// late in the evening, and afterwards also robots 2 and 3 while the
/// belt link returns.
pub fn build_comm_model() -> Invariant {
    let gmt = |h, m, s| Tick::from_gmt(h, m, s).expect("valid clock literal");
    Invariant::owned(
        COMM_OWNER,
        Invariant::BigAnd(vec![
            Invariant::during(
                gmt(0, 0, 0),
                gmt(23, 30, 59),
                hub_edges(&["Robot1", "Robot2", "Robot3", "Store", "ConvBelt"]),
            ),
            Invariant::during(
                gmt(23, 31, 0),
                gmt(23, 45, 59),
                hub_edges(&["Robot1", "Robot2", "Robot3", "Store"]),
            ),
            Invariant::during(
                gmt(23, 46, 0),
                gmt(23, 59, 59),
                hub_edges(&["Robot1", "Store", "ConvBelt"]),
            ),
        ]),
    )
}

// ============================================================================
// Trajectories
// ============================================================================

/// Work piece position on the belt: between ticks 1 and 999 it occupies a
/// `workpiece_width` wide box inside the belt band, advancing by
/// `belt_speed` cells per tick; outside that range the degenerate box at
/// the origin.
pub fn move_work_piece(t: Tick, cfg: &ScenarioConfig) -> Region {
    let time = t.value();
    if time > 0 && time < 1000 {
        let x = cfg.belt_speed * time as i64;
        let (y1, y2) = cfg.workpiece_y;
        Region::Box { x1: x, y1, x2: x + cfg.workpiece_width, y2 }
    } else {
        Region::Box { x1: 0, y1: 0, x2: 0, y2: 0 }
    }
}

/// A three-phase working envelope for robot 2: approach the belt from
/// below (ticks 0..=39), dwell reaching over the belt band (40..=60),
/// then retreat home. The dwell phase overlaps the default work piece
/// band, so the example trajectory has a genuine near miss to detect.
pub fn default_robot_path(t: Tick) -> Region {
    let time = t.value() as i64;
    if time <= 39 {
        Region::Box { x1: 45, y1: 40 + time, x2: 65, y2: 60 + time }
    } else if time <= 60 {
        Region::Box { x1: 45, y1: 80, x2: 65, y2: 115 }
    } else {
        let d = (time - 60).min(40);
        Region::Box { x1: 45, y1: 80 - d, x2: 65, y2: 100 - d }
    }
}

/// The robot / work piece interaction model: for every step `i` in
/// `0..=trajectory_ticks`, both owners get one fact timed relative to the
/// conveyor activation event, robot 2 occupying `robot_path(i)` and the
/// work piece occupying [`move_work_piece`]`(i)`.
pub fn build_trajectory_model<F>(cfg: &ScenarioConfig, robot_path: F) -> Invariant
where
    F: Fn(Tick) -> Region,
{
    let fact = |i: u64, region: Region| {
        let atom = region.to_atom().unwrap_or_else(|| {
            let (x1, y1, x2, y2) = region.bbox();
            AtomValue::OccupyBox(x1, y1, x2, y2)
        });
        Invariant::at_event_offset(CONVEYOR_EVENT, Tick(i), Invariant::Atom(atom))
    };
    let robot: Vec<Invariant> =
        (0..=cfg.trajectory_ticks).map(|i| fact(i, robot_path(Tick(i)))).collect();
    let piece: Vec<Invariant> =
        (0..=cfg.trajectory_ticks).map(|i| fact(i, move_work_piece(Tick(i), cfg))).collect();
    Invariant::BigAnd(vec![
        Invariant::owned(ROBOT2_OWNER, Invariant::BigAnd(robot)),
        Invariant::owned(WORKPIECE_OWNER, Invariant::BigAnd(piece)),
    ])
}

// ============================================================================
// Sensors
// ============================================================================

/// The sensor grid as named circular detection regions: sensor `r_c`
/// sits at `(c*spacing, r*spacing)`.
pub fn build_sensor_grid(cfg: &ScenarioConfig) -> Vec<(String, Region)> {
    let grid = cfg.sensor_grid;
    let mut out = Vec::new();
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            out.push((
                format!("sensor_{r}_{c}"),
                Region::Circle {
                    cx: i64::from(c) * grid.spacing,
                    cy: i64::from(r) * grid.spacing,
                    r: grid.range,
                },
            ));
        }
    }
    out
}

/// The sensor grid as a model: one owner-guarded occupancy circle per
/// sensor, valid at all times.
pub fn build_sensor_model(cfg: &ScenarioConfig) -> Invariant {
    Invariant::BigAnd(
        build_sensor_grid(cfg)
            .into_iter()
            .map(|(owner, region)| {
                let atom = region.to_atom().expect("sensors are circles");
                Invariant::owned(&owner, Invariant::Atom(atom))
            })
            .collect(),
    )
}

// ============================================================================
// Site topology
// ============================================================================

fn edge(a: &str, b: &str) -> Invariant {
    Invariant::Atom(AtomValue::Edge(a.to_string(), b.to_string()))
}

/// The two site-level graphs as one model: the inter-site communication
/// layer (both service centers reach the manufacturing site) and the
/// physical influence layer between machines.
pub fn build_site_model() -> Invariant {
    Invariant::BigAnd(vec![
        Invariant::owned(
            SITE_COMM_OWNER,
            Invariant::BigAnd(vec![
                edge(SERVICE_CENTER_1, MANUFACTURING_SITE),
                edge(SERVICE_CENTER_2, MANUFACTURING_SITE),
            ]),
        ),
        Invariant::owned(
            INFLUENCE_OWNER,
            Invariant::BigAnd(vec![
                edge("robot 1", "conveyor belt"),
                edge("robot 2", "conveyor belt"),
                edge("robot 3", "conveyor belt"),
                edge("robot 1", "store"),
            ]),
        ),
    ])
}

/// The site graphs of [`build_site_model`] as graphs: inter-site
/// communication first, physical influence second.
pub fn build_site_graphs() -> (TimeIndexedGraph, TimeIndexedGraph) {
    let facts = flatten(&build_site_model()).expect("site model flattens");
    let of_owner = |owner: &str| -> Vec<TimedFact> {
        facts.iter().filter(|f| f.owner.as_deref() == Some(owner)).cloned().collect()
    };
    (
        TimeIndexedGraph::from_facts(&of_owner(SITE_COMM_OWNER)),
        TimeIndexedGraph::from_facts(&of_owner(INFLUENCE_OWNER)),
    )
}

// ============================================================================
// Synthetic events
// ============================================================================

/// The bundled demonstration log: a malfunction of robot 2 late in the
/// evening, reported twice so the second report clears a confidence gate
/// of k = 2 within 50 ticks, plus two one-off alarms the gate suppresses.
pub fn demo_event_log() -> String {
    concat!(
        r#"{"id":"evt-001","source_device":"scada","kind":"malfunction","subject_owner":"Robot2_Space","tick":85755,"priority":9}"#,
        "\n",
        r#"{"id":"evt-002","source_device":"scada","kind":"malfunction","subject_owner":"Robot2_Space","tick":85800,"priority":9}"#,
        "\n",
        r#"{"id":"evt-003","source_device":"sensor_1_1","kind":"sensor_alarm","subject_owner":"WorkPiece_Space","tick":85790,"priority":4}"#,
        "\n",
        r#"{"id":"evt-004","source_device":"handheld","kind":"battery_low","subject_owner":"Tablet7","tick":300,"priority":1}"#,
        "\n",
    )
    .to_string()
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, bound: u64) -> u64 {
        self.next() % bound
    }
}

/// A deterministic stream of plausible alarm events for stress and replay
/// tests, fully determined by `cfg.seed`.
pub fn synthetic_events(cfg: &ScenarioConfig, n: usize) -> Vec<EventRecord> {
    let kinds = ["malfunction", "sensor_alarm", "battery_low", "temperature_high"];
    let subjects = [ROBOT2_OWNER, WORKPIECE_OWNER];
    let mut sources: Vec<String> =
        build_sensor_grid(cfg).into_iter().map(|(name, _)| name).collect();
    sources.push("scada".to_string());

    let mut rng = SplitMix64(cfg.seed);
    (0..n)
        .map(|i| EventRecord {
            id: format!("evt-{i:05}"),
            source_device: sources[rng.below(sources.len() as u64) as usize].clone(),
            kind: kinds[rng.below(kinds.len() as u64) as usize].to_string(),
            subject_owner: subjects[rng.below(subjects.len() as u64) as usize].to_string(),
            tick: Tick(rng.below(crate::model::TICKS_PER_DAY)),
            priority: rng.below(10) as u32,
            payload: BTreeMap::new(),
        })
        .collect()
}
