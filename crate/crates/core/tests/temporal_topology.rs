//! Connectivity windows against per-tick reachability, and interval
//! abstraction soundness.

mod common;

use std::collections::BTreeSet;

use common::{member, oracle_connected, oracle_points, rng};
use rand::Rng;
use stmc::geometry::Region;
use stmc::model::{AtomValue, Tick};
use stmc::scenario::{build_comm_model, COMM_HUB, COMM_OWNER};
use stmc::temporal::{flatten, fold_points_to_interval, slice_at, TimeGuard, TimedFact};
use stmc::topology::{TimeIndexedGraph, TopologyError, TransitionSystem};

fn edge_facts() -> Vec<TimedFact> {
    flatten(&build_comm_model()).unwrap()
}

/// Edges in force at one tick, reconstructed from the flat facts without
/// touching the graph type.
fn edges_from_facts(facts: &[TimedFact], t: Tick) -> BTreeSet<(String, String)> {
    facts
        .iter()
        .filter(|f| f.guard.contains(t))
        .filter_map(|f| match &f.payload {
            AtomValue::Edge(a, b) => Some((a.clone(), b.clone())),
            _ => None,
        })
        .collect()
}

#[test]
fn comm_model_flattens_to_twelve_owned_edge_facts() {
    let facts = edge_facts();
    assert_eq!(facts.len(), 12);
    for fact in &facts {
        assert!(matches!(fact.payload, AtomValue::Edge(..)), "{fact:?}");
        assert_eq!(fact.owner.as_deref(), Some(COMM_OWNER));
        assert!(matches!(fact.guard, TimeGuard::Interval(..)));
    }
}

#[test]
fn windows_match_per_tick_reachability() {
    let facts = edge_facts();
    let graph = TimeIndexedGraph::from_facts(&facts);
    let horizon = Tick(86_399);

    for (a, b) in [(COMM_HUB, "Robot2"), (COMM_HUB, "ConvBelt"), ("Robot1", "Store")] {
        let windows = graph.connectivity_windows(a, b, horizon).unwrap();

        let mut expected: Vec<(u64, u64)> = Vec::new();
        for t in 0..=horizon.value() {
            if oracle_connected(&edges_from_facts(&facts, Tick(t)), a, b) {
                match expected.last_mut() {
                    Some(last) if last.1 + 1 == t => last.1 = t,
                    _ => expected.push((t, t)),
                }
            }
        }

        let got: Vec<(u64, u64)> =
            windows.iter().map(|(from, to)| (from.value(), to.value())).collect();
        assert_eq!(got, expected, "pair ({a}, {b})");
    }
}

#[test]
fn robot2_and_convbelt_windows_have_frozen_boundaries() {
    let graph = TimeIndexedGraph::from_facts(&edge_facts());
    let horizon = Tick(86_399);

    let robot2 = graph.connectivity_windows(COMM_HUB, "Robot2", horizon).unwrap();
    assert_eq!(robot2, vec![(Tick(0), Tick(85_559))]);
    let covered: u64 = robot2.iter().map(|(a, b)| b.value() - a.value() + 1).sum();
    assert_eq!(covered, 85_560);

    let belt = graph.connectivity_windows(COMM_HUB, "ConvBelt", horizon).unwrap();
    assert_eq!(belt, vec![(Tick(0), Tick(84_659)), (Tick(85_560), Tick(86_399))]);
    let covered: u64 = belt.iter().map(|(a, b)| b.value() - a.value() + 1).sum();
    assert_eq!(covered, 85_500);
}

#[test]
fn edges_at_unions_overlapping_slices() {
    let mut graph = TimeIndexedGraph::new();
    graph.add_slice(TimeGuard::Interval(Tick(0), Tick(10)), [("a", "b")]);
    graph.add_slice(TimeGuard::Interval(Tick(5), Tick(20)), [("b", "c")]);
    assert_eq!(graph.edges_at(Tick(3)).len(), 1);
    assert_eq!(graph.edges_at(Tick(7)).len(), 2);
    assert_eq!(graph.edges_at(Tick(15)).len(), 1);
    assert!(graph.edges_at(Tick(25)).is_empty());
}

#[test]
fn connected_handles_self_and_unknown_nodes() {
    let graph = TimeIndexedGraph::from_facts(&edge_facts());
    assert!(graph.connected(COMM_HUB, COMM_HUB, Tick(0)).unwrap());
    assert!(matches!(
        graph.connected(COMM_HUB, "Ghost", Tick(0)),
        Err(TopologyError::UnknownNode(name)) if name == "Ghost"
    ));
}

#[test]
fn removing_the_hub_disconnects_the_spokes() {
    let graph = TimeIndexedGraph::from_facts(&edge_facts());
    assert!(graph.connected("Robot1", "Robot2", Tick(0)).unwrap());
    let cut = graph.without_node(COMM_HUB);
    assert!(!cut.connected("Robot1", "Robot2", Tick(0)).unwrap());
}

#[test]
fn slice_at_returns_only_facts_in_force() {
    let facts = edge_facts();
    assert_eq!(slice_at(&facts, Tick(0)).len(), 5);
    assert_eq!(slice_at(&facts, Tick(84_660)).len(), 4);
    assert_eq!(slice_at(&facts, Tick(85_560)).len(), 3);
}

#[test]
fn fold_produces_a_sound_overapproximation() {
    let mut rng = rng(0x0701);
    for case in 0..200 {
        let n = rng.random_range(1..=30);
        let facts: Vec<TimedFact> = (0..n)
            .map(|_| {
                let atom = match rng.random_range(0..3) {
                    0 => AtomValue::OccupyPoint(
                        rng.random_range(-50..=50),
                        rng.random_range(-50..=50),
                    ),
                    1 => AtomValue::OccupyBox(
                        rng.random_range(-50..=50),
                        rng.random_range(-50..=50),
                        rng.random_range(-50..=50),
                        rng.random_range(-50..=50),
                    ),
                    _ => AtomValue::OccupyCircle(
                        rng.random_range(-50..=50),
                        rng.random_range(-50..=50),
                        rng.random_range(0..=10),
                    ),
                };
                TimedFact {
                    guard: TimeGuard::Point(Tick(rng.random_range(0..1_000))),
                    payload: atom,
                    owner: Some("r".to_string()),
                }
            })
            .collect();

        let folded = fold_points_to_interval(&facts, "r").unwrap();
        let folded_region = Region::from_atom(&folded.payload).unwrap();
        for fact in &facts {
            let t = match fact.guard {
                TimeGuard::Point(t) => t,
                _ => unreachable!(),
            };
            assert!(folded.guard.contains(t), "case {case}: folded guard misses {t}");
            let region = Region::from_atom(&fact.payload).unwrap();
            for (x, y) in oracle_points(&region) {
                assert!(
                    member(&folded_region, x, y),
                    "case {case}: ({x}, {y}) escapes the fold"
                );
            }
        }
    }
}

#[test]
fn fold_rejects_bad_selections() {
    let facts = edge_facts();
    assert!(fold_points_to_interval(&facts, "nobody").is_err());
    assert!(fold_points_to_interval(&facts, COMM_OWNER).is_err());
}

#[test]
fn transition_system_runs_event_sequences() {
    let model = stmc::model::Invariant::BigAnd(vec![
        stmc::model::Invariant::Atom(AtomValue::Transition(
            "idle".into(),
            "start".into(),
            "busy".into(),
        )),
        stmc::model::Invariant::Atom(AtomValue::Transition(
            "busy".into(),
            "halt".into(),
            "idle".into(),
        )),
    ]);
    let ts = TransitionSystem::from_model(&model);
    let after = ts.reachable_states("idle", &["start", "halt"]).unwrap();
    assert_eq!(after, BTreeSet::from(["idle".to_string()]));
    let stuck = ts.reachable_states("idle", &["halt"]).unwrap();
    assert_eq!(stuck, BTreeSet::from(["idle".to_string()]));
}
