//! Test-side oracles and generators.
//!
//! Everything here works point by point from definitions and shares no
//! code with the library's algorithms, so agreement is evidence, not
//! tautology.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stmc::geometry::Region;
use stmc::model::{AtomValue, Invariant, Probability, Tick};
use stmc::pipeline::EventRecord;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ============================================================================
// Geometry oracle
// ============================================================================

/// Region membership, restated from the definitions.
pub fn member(region: &Region, x: i64, y: i64) -> bool {
    match region {
        Region::Point { x: px, y: py } => x == *px && y == *py,
        Region::Box { x1, y1, x2, y2 } => {
            let (lo_x, hi_x) = (*x1.min(x2), *x1.max(x2));
            let (lo_y, hi_y) = (*y1.min(y2), *y1.max(y2));
            x >= lo_x && x <= hi_x && y >= lo_y && y <= hi_y
        }
        Region::Circle { cx, cy, r } => {
            let dx = x - cx;
            let dy = y - cy;
            dx * dx + dy * dy <= r * r
        }
        Region::Union(members) => members.iter().any(|m| member(m, x, y)),
    }
}

fn scan_bounds(region: &Region) -> (i64, i64, i64, i64) {
    match region {
        Region::Point { x, y } => (*x, *y, *x, *y),
        Region::Box { x1, y1, x2, y2 } => {
            (*x1.min(x2), *y1.min(y2), *x1.max(x2), *y1.max(y2))
        }
        Region::Circle { cx, cy, r } => (cx - r, cy - r, cx + r, cy + r),
        Region::Union(members) => {
            let parts: Vec<_> = members.iter().map(scan_bounds).collect();
            (
                parts.iter().map(|b| b.0).min().unwrap(),
                parts.iter().map(|b| b.1).min().unwrap(),
                parts.iter().map(|b| b.2).max().unwrap(),
                parts.iter().map(|b| b.3).max().unwrap(),
            )
        }
    }
}

/// Every integer point of the region, by exhaustive scan.
pub fn oracle_points(region: &Region) -> BTreeSet<(i64, i64)> {
    let (x1, y1, x2, y2) = scan_bounds(region);
    let mut out = BTreeSet::new();
    for x in x1..=x2 {
        for y in y1..=y2 {
            if member(region, x, y) {
                out.insert((x, y));
            }
        }
    }
    out
}

pub fn oracle_intersects(a: &Region, b: &Region) -> bool {
    let pa = oracle_points(a);
    oracle_points(b).iter().any(|p| pa.contains(p))
}

/// Whether `a` contains every point of `b`.
pub fn oracle_includes(a: &Region, b: &Region) -> bool {
    oracle_points(b).iter().all(|&(x, y)| member(a, x, y))
}

// ============================================================================
// Graph oracle
// ============================================================================

/// Breadth-first reachability over an explicit undirected edge list.
pub fn oracle_connected(edges: &BTreeSet<(String, String)>, a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (from, to) in edges {
        adjacency.entry(from).or_default().push(to);
        adjacency.entry(to).or_default().push(from);
    }
    let mut queue = VecDeque::from([a]);
    let mut visited = BTreeSet::from([a]);
    while let Some(node) = queue.pop_front() {
        for &next in adjacency.get(node).into_iter().flatten() {
            if next == b {
                return true;
            }
            if visited.insert(next) {
                queue.push_back(next);
            }
        }
    }
    false
}

// ============================================================================
// Generators
// ============================================================================

/// A random region with coordinates in [-64, 64] and radii in [0, 20].
/// Unions stay flat and small.
pub fn random_region(rng: &mut ChaCha8Rng) -> Region {
    random_region_inner(rng, true)
}

fn random_region_inner(rng: &mut ChaCha8Rng, allow_union: bool) -> Region {
    let coord = |rng: &mut ChaCha8Rng| rng.random_range(-64..=64i64);
    match rng.random_range(0..if allow_union { 4 } else { 3 }) {
        0 => Region::Point { x: coord(rng), y: coord(rng) },
        1 => Region::rect(coord(rng), coord(rng), coord(rng), coord(rng)),
        2 => Region::Circle { cx: coord(rng), cy: coord(rng), r: rng.random_range(0..=20) },
        _ => {
            let n = rng.random_range(1..=3);
            Region::Union((0..n).map(|_| random_region_inner(rng, false)).collect())
        }
    }
}

fn random_name(rng: &mut ChaCha8Rng) -> String {
    let alphabet = ["belt", "robot", "store", "hub", "cell\"7\"", "line\\2", "dock 9"];
    alphabet[rng.random_range(0..alphabet.len())].to_string()
}

/// A random term of at most the given depth, exercising every
/// constructor the textual format can express.
pub fn random_term(rng: &mut ChaCha8Rng, depth: u32) -> Invariant {
    if depth == 0 || rng.random_range(0..10) < 3 {
        return Invariant::Atom(random_atom(rng));
    }
    match rng.random_range(0..5) {
        0 => Invariant::and(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        1 => Invariant::or(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        2 => Invariant::not(random_term(rng, depth - 1)),
        3 => Invariant::implies(random_term(rng, depth - 1), random_term(rng, depth - 1)),
        _ => {
            let n = rng.random_range(0..=3);
            Invariant::BigAnd((0..n).map(|_| random_term(rng, depth - 1)).collect())
        }
    }
}

/// A random term guaranteed to contain no `Owner` atom, for building
/// models with disciplined ownership structure.
pub fn random_payload(rng: &mut ChaCha8Rng, depth: u32) -> Invariant {
    loop {
        let candidate = random_term(rng, depth);
        if !contains_owner(&candidate) {
            return candidate;
        }
    }
}

fn contains_owner(term: &Invariant) -> bool {
    match term {
        Invariant::Atom(a) => matches!(a, AtomValue::Owner(_)),
        Invariant::Not(t) => contains_owner(t),
        Invariant::And(a, b) | Invariant::Or(a, b) | Invariant::Implies(a, b) => {
            contains_owner(a) || contains_owner(b)
        }
        Invariant::BigAnd(ts) => ts.iter().any(contains_owner),
    }
}

fn random_atom(rng: &mut ChaCha8Rng) -> AtomValue {
    let tick = |rng: &mut ChaCha8Rng| Tick(rng.random_range(0..200_000u64));
    let coord = |rng: &mut ChaCha8Rng| rng.random_range(-100..=100i64);
    match rng.random_range(0..13) {
        0 => AtomValue::True,
        1 => AtomValue::False,
        2 => AtomValue::TimePoint(tick(rng)),
        3 => AtomValue::TimeInterval(tick(rng), tick(rng)),
        4 => AtomValue::TimeStamp(stmc::model::EventRelativeTime {
            event: random_name(rng),
            offset: Tick(rng.random_range(0..100)),
        }),
        5 => AtomValue::Event(random_name(rng)),
        6 => AtomValue::Owner(random_name(rng)),
        7 => AtomValue::Prob(Probability::new(rng.random_range(0..=100) as f64 / 100.0).unwrap()),
        8 => AtomValue::ComponentState(random_name(rng)),
        9 => AtomValue::OccupyPoint(coord(rng), coord(rng)),
        10 => AtomValue::OccupyBox(coord(rng), coord(rng), coord(rng), coord(rng)),
        11 => AtomValue::OccupyCircle(coord(rng), coord(rng), rng.random_range(0..=30)),
        _ => {
            if rng.random_bool(0.5) {
                AtomValue::Edge(random_name(rng), random_name(rng))
            } else {
                AtomValue::Transition(random_name(rng), random_name(rng), random_name(rng))
            }
        }
    }
}

/// A batch of syntactically valid events with unique ids.
pub fn random_events(rng: &mut ChaCha8Rng, n: usize, horizon: Tick) -> Vec<EventRecord> {
    let kinds = ["malfunction", "sensor_alarm", "battery_low"];
    let owners = ["Robot2_Space", "WorkPiece_Space", "Conveyor_Space"];
    let sources = ["scada", "sensor_0_0", "sensor_1_1", "handheld"];
    (0..n)
        .map(|i| EventRecord {
            id: format!("evt-{i:05}"),
            source_device: sources[rng.random_range(0..sources.len())].to_string(),
            kind: kinds[rng.random_range(0..kinds.len())].to_string(),
            subject_owner: owners[rng.random_range(0..owners.len())].to_string(),
            tick: Tick(rng.random_range(0..=horizon.value())),
            priority: rng.random_range(0..10),
            payload: BTreeMap::new(),
        })
        .collect()
}
