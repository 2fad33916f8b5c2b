//! Time-indexed communication graphs and transition systems.
//!
//! A [`TimeIndexedGraph`] is an undirected graph whose edge set varies
//! over time: each slice contributes its edges while its time guard
//! holds. Connectivity questions are answered per tick by breadth-first
//! search; [`connectivity_windows`](TimeIndexedGraph::connectivity_windows)
//! sweeps a whole horizon by evaluating only at ticks where some slice
//! begins or ends, so its cost scales with the number of slices rather
//! than the horizon.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::{AtomValue, Invariant, Tick};
use crate::temporal::{TimeGuard, TimedFact};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// Undirected edges valid while one time guard holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSlice {
    pub guard: TimeGuard,
    pub edges: BTreeSet<(String, String)>,
}

/// An undirected graph with time-dependent edges. Nodes persist over
/// time; edge endpoints are registered as nodes automatically.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimeIndexedGraph {
    nodes: BTreeSet<String>,
    slices: Vec<GraphSlice>,
}

fn edge_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl TimeIndexedGraph {
    pub fn new() -> TimeIndexedGraph {
        TimeIndexedGraph::default()
    }

    pub fn add_node(&mut self, name: &str) {
        self.nodes.insert(name.to_string());
    }

    /// Adds a slice of edges valid under `guard`. Edges are stored as
    /// unordered pairs and their endpoints become nodes.
    pub fn add_slice<I, S>(&mut self, guard: TimeGuard, edges: I)
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            self.nodes.insert(a.to_string());
            self.nodes.insert(b.to_string());
            set.insert(edge_key(a, b));
        }
        self.slices.push(GraphSlice { guard, edges: set });
    }

    /// Builds a graph from the edge facts of a flattened model. Runs of
    /// consecutive facts with the same guard merge into one slice, so a
    /// model listing each interval's edges together yields one slice per
    /// interval.
    pub fn from_facts(facts: &[TimedFact]) -> TimeIndexedGraph {
        let mut graph = TimeIndexedGraph::new();
        for fact in facts {
            if let AtomValue::Edge(a, b) = &fact.payload {
                match graph.slices.last_mut() {
                    Some(slice) if slice.guard == fact.guard => {
                        graph.nodes.insert(a.clone());
                        graph.nodes.insert(b.clone());
                        slice.edges.insert(edge_key(a, b));
                    }
                    _ => {
                        let guard = fact.guard.clone();
                        graph.add_slice(guard, [(a.as_str(), b.as_str())]);
                    }
                }
            }
        }
        graph
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn slices(&self) -> &[GraphSlice] {
        &self.slices
    }

    /// The edges valid at tick `t`: the union over matching slices.
    pub fn edges_at(&self, t: Tick) -> BTreeSet<(String, String)> {
        let mut edges = BTreeSet::new();
        for slice in &self.slices {
            if slice.guard.contains(t) {
                edges.extend(slice.edges.iter().cloned());
            }
        }
        edges
    }

    /// Whether `a` can reach `b` over the edges valid at tick `t`. A node
    /// always reaches itself.
    pub fn connected(&self, a: &str, b: &str, t: Tick) -> Result<bool, TopologyError> {
        for name in [a, b] {
            if !self.nodes.contains(name) {
                return Err(TopologyError::UnknownNode(name.to_string()));
            }
        }
        if a == b {
            return Ok(true);
        }
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let edges = self.edges_at(t);
        for (x, y) in &edges {
            adjacency.entry(x).or_default().push(y);
            adjacency.entry(y).or_default().push(x);
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        seen.insert(a);
        queue.push_back(a);
        while let Some(node) = queue.pop_front() {
            if node == b {
                return Ok(true);
            }
            if let Some(next) = adjacency.get(node) {
                for n in next {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        Ok(false)
    }

    /// The maximal closed tick intervals within `[0, horizon]` on which
    /// `a` and `b` are connected. Connectivity only changes where a slice
    /// begins or ends, so it is evaluated at those boundaries and the
    /// results are stitched into maximal intervals.
    pub fn connectivity_windows(
        &self,
        a: &str,
        b: &str,
        horizon: Tick,
    ) -> Result<Vec<(Tick, Tick)>, TopologyError> {
        let mut boundaries: BTreeSet<Tick> = BTreeSet::new();
        boundaries.insert(Tick(0));
        for slice in &self.slices {
            let (from, to) = match slice.guard {
                TimeGuard::Point(p) => (p, p),
                TimeGuard::Interval(from, to) => (from, to),
                TimeGuard::Always | TimeGuard::EventRelative(_) => continue,
            };
            if from <= horizon {
                boundaries.insert(from);
            }
            let after = to.saturating_add(1);
            if after <= horizon {
                boundaries.insert(after);
            }
        }
        let boundaries: Vec<Tick> = boundaries.into_iter().filter(|t| *t <= horizon).collect();

        let mut windows: Vec<(Tick, Tick)> = Vec::new();
        for (i, &start) in boundaries.iter().enumerate() {
            let end = match boundaries.get(i + 1) {
                Some(next) => Tick(next.value() - 1),
                None => horizon,
            };
            if self.connected(a, b, start)? {
                match windows.last_mut() {
                    Some(last) if last.1.value() + 1 == start.value() => last.1 = end,
                    _ => windows.push((start, end)),
                }
            }
        }
        Ok(windows)
    }

    /// The graph with one node and all its incident edges removed.
    /// Useful for single point of failure analysis.
    pub fn without_node(&self, name: &str) -> TimeIndexedGraph {
        let mut nodes = self.nodes.clone();
        nodes.remove(name);
        let slices = self
            .slices
            .iter()
            .map(|slice| GraphSlice {
                guard: slice.guard.clone(),
                edges: slice
                    .edges
                    .iter()
                    .filter(|(a, b)| a != name && b != name)
                    .cloned()
                    .collect(),
            })
            .collect();
        TimeIndexedGraph { nodes, slices }
    }
}

/// A labelled transition system over named states.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionSystem {
    states: BTreeSet<String>,
    transitions: BTreeSet<(String, String, String)>,
}

impl TransitionSystem {
    pub fn new() -> TransitionSystem {
        TransitionSystem::default()
    }

    pub fn add_state(&mut self, name: &str) {
        self.states.insert(name.to_string());
    }

    /// Adds `source --event--> target`, registering both states.
    pub fn add_transition(&mut self, source: &str, event: &str, target: &str) {
        self.states.insert(source.to_string());
        self.states.insert(target.to_string());
        self.transitions.insert((source.to_string(), event.to_string(), target.to_string()));
    }

    /// Collects every `Transition` atom in the model, wherever it occurs.
    pub fn from_model(model: &Invariant) -> TransitionSystem {
        let mut ts = TransitionSystem::new();
        collect_transitions(model, &mut ts);
        ts
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    /// The set of states reachable from `start` after consuming `events`
    /// in order. Transitions are non-deterministic: a state follows every
    /// matching transition, and a state with no matching transition stays
    /// where it is.
    pub fn reachable_states(
        &self,
        start: &str,
        events: &[&str],
    ) -> Result<BTreeSet<String>, TopologyError> {
        if !self.states.contains(start) {
            return Err(TopologyError::UnknownNode(start.to_string()));
        }
        let mut current: BTreeSet<String> = BTreeSet::new();
        current.insert(start.to_string());
        for event in events {
            let mut next: BTreeSet<String> = BTreeSet::new();
            for state in &current {
                let mut moved = false;
                for (source, ev, target) in &self.transitions {
                    if source == state && ev == event {
                        next.insert(target.clone());
                        moved = true;
                    }
                }
                if !moved {
                    next.insert(state.clone());
                }
            }
            current = next;
        }
        Ok(current)
    }
}

fn collect_transitions(term: &Invariant, out: &mut TransitionSystem) {
    match term {
        Invariant::Atom(AtomValue::Transition(source, event, target)) => {
            out.add_transition(source, event, target);
        }
        Invariant::Atom(_) => {}
        Invariant::Not(t) => collect_transitions(t, out),
        Invariant::And(l, r) | Invariant::Or(l, r) | Invariant::Implies(l, r) => {
            collect_transitions(l, out);
            collect_transitions(r, out);
        }
        Invariant::BigAnd(items) => {
            for item in items {
                collect_transitions(item, out);
            }
        }
    }
}
