//! Grounding and the safety checkers.
//!
//! Checking works on ground point sets: a model is filtered to one owner,
//! flattened to timed facts, and every fact is discretized at every tick
//! its guard covers within the horizon. Collision absence intersects two
//! owners' over-approximated sets, coverage demands the target's
//! over-approximation stay inside the sensors' under-approximation at
//! every tick, and the proximity check dilates one owner's cells by a
//! Chebyshev radius. Collision queries can also be exported as DIMACS
//! CNF goals, giving an independent route to the same verdict through a
//! SAT solver.
//!
//! All checks are pure: they share no mutable state, and parallel and
//! sequential runs return identical verdicts. With the `parallel` feature
//! (default) the tick/fact loops run on rayon; the `_seq` variants always
//! stay on one thread.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::geometry::{ApproxMode, GridPoint, PointSet4D, Region};
use crate::model::{filter_by_owner, list_owners, AtomValue, Invariant, Tick};
use crate::temporal::{flatten, FlattenError, TimeGuard};

/// Ticks per work unit when splitting long guard intervals for
/// data-parallel grounding.
const BLOCK_TICKS: u64 = 512;

/// A safety question about a set of models.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Query {
    /// Do the over-approximations of two owners ever share a cell?
    CollisionAbsence { owner_a: String, owner_b: String, horizon: Tick, resolution: u32 },
    /// Does the target's over-approximation stay within the sensors'
    /// combined under-approximation at every tick?
    Coverage { sensor_owners: Vec<String>, target: Region, horizon: Tick, resolution: u32 },
    /// Which other owners come within a Chebyshev radius of this owner
    /// at one tick? Informational; always holds.
    NearbyDevices { owner: String, t: Tick, radius: i64 },
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::CollisionAbsence { owner_a, owner_b, horizon, resolution } => write!(
                f,
                "collision_absence(owner_a={owner_a}, owner_b={owner_b}, horizon={horizon}, resolution={resolution})"
            ),
            Query::Coverage { sensor_owners, target, horizon, resolution } => write!(
                f,
                "coverage(sensors=[{}], target={target}, horizon={horizon}, resolution={resolution})",
                sensor_owners.join(", ")
            ),
            Query::NearbyDevices { owner, t, radius } => {
                write!(f, "nearby_devices(owner={owner}, t={t}, radius={radius})")
            }
        }
    }
}

/// The first offending (or anchoring) cell of a check, in `(t, x, y)`
/// order, with a human-readable note.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub t: Tick,
    pub x: i64,
    pub y: i64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CheckStats {
    /// Ground atoms produced while answering.
    pub ground_atoms: u64,
    /// Ticks the check looked at.
    pub ticks_checked: u64,
}

/// The checker's answer: whether the property holds, the first witness
/// when it does not (or an anchor for informational queries), and what
/// the run cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
    pub stats: CheckStats,
}

/// A verdict paired with its query, ready for rendering: `Display` gives
/// the `key: value` text report, `Serialize` the structured form.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub query: &'a Query,
    #[serde(flatten)]
    pub verdict: &'a Verdict,
}

impl fmt::Display for Report<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query: {}", self.query)?;
        writeln!(f, "holds: {}", self.verdict.holds)?;
        match &self.verdict.witness {
            Some(w) => writeln!(f, "witness: t={} x={} y={} detail={}", w.t, w.x, w.y, w.detail)?,
            None => writeln!(f, "witness: none")?,
        }
        write!(
            f,
            "stats: ground_atoms={} ticks_checked={}",
            self.verdict.stats.ground_atoms, self.verdict.stats.ticks_checked
        )
    }
}

/// One occupied cell attributed to an owner, the unit DIMACS variables
/// stand for. Models are planar, so `z` is always zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundAtom {
    pub owner: String,
    pub x: i64,
    pub y: i64,
    pub z: i64,
    pub t: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown owner `{0}`")]
    UnknownOwner(String),
    #[error("cannot ground a fact timed relative to event `{event}`; resolve the trigger first")]
    UnresolvedEventTime { event: String },
    #[error("point (t={t}, x={x}, y={y}) of owner `{owner}` lies outside the declared bounds")]
    PointOutOfBounds { owner: String, t: Tick, x: i64, y: i64 },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Flatten(#[from] FlattenError),
}

// ============================================================================
// Grounding
// ============================================================================

/// The ground point set of one owner: the model is filtered to the owner,
/// flattened, and every occupancy fact is discretized at every tick its
/// guard covers within `[0, horizon]`. Edge facts carry no geometry and
/// are skipped. `mode` selects the safe direction of the discretization.
pub fn ground_points(
    model: &Invariant,
    owner: &str,
    horizon: Tick,
    resolution: u32,
    mode: ApproxMode,
) -> Result<PointSet4D, CheckError> {
    ground_points_impl(model, owner, horizon, resolution, mode, true)
}

/// Sequential twin of [`ground_points`]; same results on one thread.
pub fn ground_points_seq(
    model: &Invariant,
    owner: &str,
    horizon: Tick,
    resolution: u32,
    mode: ApproxMode,
) -> Result<PointSet4D, CheckError> {
    ground_points_impl(model, owner, horizon, resolution, mode, false)
}

struct Block {
    region: Region,
    t_from: u64,
    t_to: u64,
}

fn ground_blocks(
    model: &Invariant,
    owner: &str,
    horizon: Tick,
) -> Result<Vec<Block>, CheckError> {
    let filtered = filter_by_owner(model, owner);
    let facts = flatten(&filtered)?;
    let mut blocks = Vec::new();
    for fact in facts {
        let Some(region) = Region::from_atom(&fact.payload) else {
            continue;
        };
        let (from, to) = match &fact.guard {
            TimeGuard::Point(t) => (t.value(), t.value()),
            TimeGuard::Interval(from, to) => (from.value(), to.value()),
            TimeGuard::Always => (0, horizon.value()),
            TimeGuard::EventRelative(ert) => {
                return Err(CheckError::UnresolvedEventTime { event: ert.event.clone() });
            }
        };
        let to = to.min(horizon.value());
        if from > to {
            continue;
        }
        let mut t = from;
        loop {
            let t_to = t.saturating_add(BLOCK_TICKS - 1).min(to);
            blocks.push(Block { region: region.clone(), t_from: t, t_to });
            if t_to == to {
                break;
            }
            t = t_to + 1;
        }
    }
    Ok(blocks)
}

fn ground_block(block: &Block, resolution: u32, mode: ApproxMode) -> PointSet4D {
    let mut out = PointSet4D::new();
    for t in block.t_from..=block.t_to {
        out.union_with(block.region.discretize(Tick(t), resolution, mode));
    }
    out
}

fn ground_points_impl(
    model: &Invariant,
    owner: &str,
    horizon: Tick,
    resolution: u32,
    mode: ApproxMode,
    parallel: bool,
) -> Result<PointSet4D, CheckError> {
    if resolution == 0 {
        return Err(CheckError::InvalidQuery("resolution must be at least 1".to_string()));
    }
    let blocks = ground_blocks(model, owner, horizon)?;
    #[cfg(feature = "parallel")]
    if parallel {
        return Ok(blocks
            .par_iter()
            .map(|b| ground_block(b, resolution, mode))
            .reduce(PointSet4D::new, |mut acc, set| {
                acc.union_with(set);
                acc
            }));
    }
    let _ = parallel;
    let mut out = PointSet4D::new();
    for block in &blocks {
        out.union_with(ground_block(block, resolution, mode));
    }
    Ok(out)
}

/// Grounds one owner at a single tick. Facts timed relative to an
/// unresolved event are rejected, like in [`ground_points`].
fn ground_at_tick(
    models: &[Invariant],
    owner: &str,
    t: Tick,
    resolution: u32,
    mode: ApproxMode,
) -> Result<PointSet4D, CheckError> {
    let mut out = PointSet4D::new();
    for model in models {
        let filtered = filter_by_owner(model, owner);
        for fact in flatten(&filtered)? {
            if let TimeGuard::EventRelative(ert) = &fact.guard {
                return Err(CheckError::UnresolvedEventTime { event: ert.event.clone() });
            }
            if !fact.guard.contains(t) {
                continue;
            }
            if let Some(region) = Region::from_atom(&fact.payload) {
                out.union_with(region.discretize(t, resolution, mode));
            }
        }
    }
    Ok(out)
}

/// Rewrites every time stamp referring to `event` into the concrete tick
/// `trigger + offset`, leaving everything else untouched. Stamps naming
/// other events stay event-relative.
pub fn resolve_trigger(model: &Invariant, event: &str, trigger: Tick) -> Invariant {
    match model {
        Invariant::Atom(AtomValue::TimeStamp(ert)) if ert.event == event => {
            Invariant::Atom(AtomValue::TimePoint(trigger.saturating_add(ert.offset.value())))
        }
        Invariant::Atom(_) => model.clone(),
        Invariant::Not(t) => Invariant::not(resolve_trigger(t, event, trigger)),
        Invariant::And(l, r) => Invariant::and(
            resolve_trigger(l, event, trigger),
            resolve_trigger(r, event, trigger),
        ),
        Invariant::Or(l, r) => Invariant::or(
            resolve_trigger(l, event, trigger),
            resolve_trigger(r, event, trigger),
        ),
        Invariant::Implies(l, r) => Invariant::implies(
            resolve_trigger(l, event, trigger),
            resolve_trigger(r, event, trigger),
        ),
        Invariant::BigAnd(items) => {
            Invariant::BigAnd(items.iter().map(|i| resolve_trigger(i, event, trigger)).collect())
        }
    }
}

// ============================================================================
// Checking
// ============================================================================

/// Answers a query against a set of models; owners may be spread over
/// several models and their point sets are unioned.
pub fn check(query: &Query, models: &[Invariant]) -> Result<Verdict, CheckError> {
    check_impl(query, models, true)
}

/// Sequential twin of [`check`]; same verdicts on one thread.
pub fn check_seq(query: &Query, models: &[Invariant]) -> Result<Verdict, CheckError> {
    check_impl(query, models, false)
}

fn check_impl(query: &Query, models: &[Invariant], parallel: bool) -> Result<Verdict, CheckError> {
    let mut known = BTreeSet::new();
    for model in models {
        known.extend(list_owners(model));
    }
    let require_known = |owner: &str| {
        if known.contains(owner) {
            Ok(())
        } else {
            Err(CheckError::UnknownOwner(owner.to_string()))
        }
    };

    match query {
        Query::CollisionAbsence { owner_a, owner_b, horizon, resolution } => {
            require_known(owner_a)?;
            require_known(owner_b)?;
            check_collision(models, owner_a, owner_b, *horizon, *resolution, parallel)
        }
        Query::Coverage { sensor_owners, target, horizon, resolution } => {
            if sensor_owners.is_empty() {
                return Err(CheckError::InvalidQuery(
                    "coverage needs at least one sensor owner".to_string(),
                ));
            }
            for owner in sensor_owners {
                require_known(owner)?;
            }
            check_coverage(models, sensor_owners, target, *horizon, *resolution, parallel)
        }
        Query::NearbyDevices { owner, t, radius } => {
            require_known(owner)?;
            if *radius < 0 {
                return Err(CheckError::InvalidQuery("radius must be non-negative".to_string()));
            }
            check_nearby(models, owner, *t, *radius, &known)
        }
    }
}

fn union_ground(
    models: &[Invariant],
    owner: &str,
    horizon: Tick,
    resolution: u32,
    mode: ApproxMode,
    parallel: bool,
) -> Result<PointSet4D, CheckError> {
    let mut out = PointSet4D::new();
    for model in models {
        out.union_with(ground_points_impl(model, owner, horizon, resolution, mode, parallel)?);
    }
    Ok(out)
}

fn check_collision(
    models: &[Invariant],
    owner_a: &str,
    owner_b: &str,
    horizon: Tick,
    resolution: u32,
    parallel: bool,
) -> Result<Verdict, CheckError> {
    let set_a = union_ground(models, owner_a, horizon, resolution, ApproxMode::Over, parallel)?;
    let set_b = union_ground(models, owner_b, horizon, resolution, ApproxMode::Over, parallel)?;
    let shared = set_a.intersection(&set_b);
    let witness = shared.first().map(|p| Witness {
        t: p.t,
        x: p.x,
        y: p.y,
        detail: format!("{owner_a} and {owner_b} both occupy the cell"),
    });
    Ok(Verdict {
        holds: witness.is_none(),
        witness,
        stats: CheckStats {
            ground_atoms: (set_a.len() + set_b.len()) as u64,
            ticks_checked: horizon.value() + 1,
        },
    })
}

/// Per-tick sensor geometry, prepared once so the tick loop only filters
/// guards and discretizes.
struct SensorFacts {
    facts: Vec<(TimeGuard, Region)>,
}

impl SensorFacts {
    fn gather(models: &[Invariant], owner: &str) -> Result<SensorFacts, CheckError> {
        let mut facts = Vec::new();
        for model in models {
            let filtered = filter_by_owner(model, owner);
            for fact in flatten(&filtered)? {
                if let TimeGuard::EventRelative(ert) = &fact.guard {
                    return Err(CheckError::UnresolvedEventTime { event: ert.event.clone() });
                }
                if let Some(region) = Region::from_atom(&fact.payload) {
                    facts.push((fact.guard, region));
                }
            }
        }
        Ok(SensorFacts { facts })
    }

    fn under_cells_at(&self, t: Tick, resolution: u32) -> PointSet4D {
        let mut out = PointSet4D::new();
        for (guard, region) in &self.facts {
            if guard.contains(t) {
                out.union_with(region.discretize(t, resolution, ApproxMode::Under));
            }
        }
        out
    }
}

fn check_coverage(
    models: &[Invariant],
    sensor_owners: &[String],
    target: &Region,
    horizon: Tick,
    resolution: u32,
    parallel: bool,
) -> Result<Verdict, CheckError> {
    if resolution == 0 {
        return Err(CheckError::InvalidQuery("resolution must be at least 1".to_string()));
    }
    let sensors: Vec<SensorFacts> = sensor_owners
        .iter()
        .map(|owner| SensorFacts::gather(models, owner))
        .collect::<Result<_, _>>()?;
    // The target's cells are the same at every tick; only t varies.
    let target_cells: Vec<(i64, i64)> = target
        .discretize(Tick(0), resolution, ApproxMode::Over)
        .iter()
        .map(|p| (p.x, p.y))
        .collect();

    // Each tick yields the first uncovered cell (if any) and the number
    // of ground atoms produced; ticks combine by taking the earliest
    // witness and summing atoms, so the schedule cannot matter.
    let evaluate = |t: u64| -> (Option<GridPoint>, u64) {
        let t = Tick(t);
        let mut covered = PointSet4D::new();
        for sensor in &sensors {
            covered.union_with(sensor.under_cells_at(t, resolution));
        }
        let uncovered = target_cells
            .iter()
            .map(|&(x, y)| GridPoint { t, x, y })
            .find(|p| !covered.contains(p));
        (uncovered, (covered.len() + target_cells.len()) as u64)
    };
    let merge = |a: (Option<GridPoint>, u64), b: (Option<GridPoint>, u64)| {
        let witness = match (a.0, b.0) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        (witness, a.1 + b.1)
    };

    let ticks = 0..=horizon.value();
    #[cfg(feature = "parallel")]
    let (uncovered, ground_atoms) = if parallel {
        ticks.into_par_iter().map(evaluate).reduce(|| (None, 0), merge)
    } else {
        ticks.map(evaluate).fold((None, 0), merge)
    };
    #[cfg(not(feature = "parallel"))]
    let (uncovered, ground_atoms) = {
        let _ = parallel;
        ticks.map(evaluate).fold((None, 0), merge)
    };

    let witness = uncovered.map(|p| Witness {
        t: p.t,
        x: p.x,
        y: p.y,
        detail: "cell not covered by any sensor".to_string(),
    });
    Ok(Verdict {
        holds: witness.is_none(),
        witness,
        stats: CheckStats { ground_atoms, ticks_checked: horizon.value() + 1 },
    })
}

fn check_nearby(
    models: &[Invariant],
    owner: &str,
    t: Tick,
    radius: i64,
    known: &BTreeSet<String>,
) -> Result<Verdict, CheckError> {
    let anchor_set = ground_at_tick(models, owner, t, 1, ApproxMode::Over)?;
    let mut dilated: BTreeSet<(i64, i64)> = BTreeSet::new();
    for p in anchor_set.iter() {
        for dx in -radius..=radius {
            for dy in -radius..=radius {
                dilated.insert((p.x + dx, p.y + dy));
            }
        }
    }

    let mut nearby: Vec<String> = Vec::new();
    let mut others_atoms = 0usize;
    for other in known {
        if other == owner {
            continue;
        }
        let set = ground_at_tick(models, other, t, 1, ApproxMode::Over)?;
        others_atoms += set.len();
        if set.iter().any(|p| dilated.contains(&(p.x, p.y))) {
            nearby.push(other.clone());
        }
    }

    let detail = if nearby.is_empty() { "none".to_string() } else { nearby.join(", ") };
    let anchor = anchor_set.first();
    Ok(Verdict {
        holds: true,
        witness: Some(Witness {
            t,
            x: anchor.map_or(0, |p| p.x),
            y: anchor.map_or(0, |p| p.y),
            detail,
        }),
        stats: CheckStats {
            ground_atoms: (anchor_set.len() + others_atoms) as u64,
            ticks_checked: 1,
        },
    })
}

// ============================================================================
// DIMACS export
// ============================================================================

/// Flattens labelled point sets into ground atoms, in set order.
pub fn to_ground_atoms(sets: &[(String, PointSet4D)]) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for (owner, set) in sets {
        for p in set.iter() {
            out.push(GroundAtom { owner: owner.clone(), x: p.x, y: p.y, z: 0, t: p.t });
        }
    }
    out
}

/// Exports a collision query over ground point sets as a DIMACS CNF goal.
///
/// Every point of every set becomes a unit clause asserting its variable;
/// one final clause lists, for each cell shared by the two queried
/// owners, both owners' variables. The formula is satisfiable exactly
/// when the two owners collide somewhere. `bounds` is the exclusive
/// variable space `(x, y, t)`; the variable for owner index `o` at cell
/// `(x, y)` and tick `t` is `o*x_max*y_max*t_max + (t*y_max + y)*x_max + x + 1`.
/// With no points at all the export degenerates to an empty formula
/// (`p cnf 0 0`).
pub fn export_dimacs(
    sets: &[(String, PointSet4D)],
    query: &Query,
    bounds: (i64, i64, u64),
) -> Result<String, CheckError> {
    let (owner_a, owner_b) = match query {
        Query::CollisionAbsence { owner_a, owner_b, .. } => (owner_a, owner_b),
        other => {
            return Err(CheckError::InvalidQuery(format!(
                "only collision queries can be exported, got {other}"
            )));
        }
    };
    let (x_max, y_max, t_max) = bounds;
    if x_max <= 0 || y_max <= 0 || t_max == 0 {
        return Err(CheckError::InvalidQuery("bounds must be positive".to_string()));
    }
    let index_of = |name: &String| {
        sets.iter()
            .position(|(owner, _)| owner == name)
            .ok_or_else(|| CheckError::UnknownOwner(name.clone()))
    };
    let idx_a = index_of(owner_a)?;
    let idx_b = index_of(owner_b)?;

    let var_id = |owner_idx: usize, p: &GridPoint| -> i64 {
        let space = x_max * y_max * (t_max as i64);
        let offset = ((p.t.value() as i64) * y_max + p.y) * x_max + p.x;
        (owner_idx as i64) * space + offset + 1
    };

    let mut max_var: i64 = 0;
    let mut unit_lines = Vec::new();
    for (owner_idx, (owner, set)) in sets.iter().enumerate() {
        for p in set.iter() {
            if p.x < 0 || p.x >= x_max || p.y < 0 || p.y >= y_max || p.t.value() >= t_max {
                return Err(CheckError::PointOutOfBounds {
                    owner: owner.clone(),
                    t: p.t,
                    x: p.x,
                    y: p.y,
                });
            }
            let id = var_id(owner_idx, p);
            max_var = max_var.max(id);
            unit_lines.push(format!("{id} 0"));
        }
    }

    if unit_lines.is_empty() {
        return Ok("p cnf 0 0\n".to_string());
    }

    let shared = sets[idx_a].1.intersection(&sets[idx_b].1);
    let mut collision = String::new();
    for p in shared.iter() {
        collision.push_str(&format!("{} {} ", var_id(idx_a, p), var_id(idx_b, p)));
    }
    collision.push('0');

    let mut out = format!("p cnf {} {}\n", max_var, unit_lines.len() + 1);
    for line in &unit_lines {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&collision);
    out.push('\n');
    Ok(out)
}
