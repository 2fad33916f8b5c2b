//! Alarm-driven decision support: replaying device event logs against
//! the plant models.
//!
//! The stages mirror a plant collaboration bus. [`ingest`] validates,
//! deduplicates and sorts raw events into a queue; [`confidence_gate`]
//! filters one-off alarms against recent history; [`handle`] runs the
//! checker and topology queries for one event and assembles a
//! [`DisplayCommand`]; [`emit_xml`] serializes a command for the display
//! layer. [`replay`] drives the whole pipeline over a log and its XML
//! output stream is byte-identical across runs, whatever the handler
//! parallelism.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Mutex;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checker::{check, Query};
use crate::model::{normalize, Invariant, Tick};
use crate::scenario::{
    COMM_HUB, COMM_OWNER, MANUFACTURING_SITE, SERVICE_CENTER_1, SERVICE_CENTER_2, SITE_COMM_OWNER,
};
use crate::temporal::{flatten, FlattenError, TimeGuard, TimedFact};
use crate::topology::TimeIndexedGraph;

/// One device event as delivered by the plant log: alarms, malfunction
/// reports, sensor readings. `subject_owner` names the model owner the
/// event is about; `source_device` the reporting device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub id: String,
    pub source_device: String,
    pub kind: String,
    pub subject_owner: String,
    pub tick: Tick,
    pub priority: u32,
    #[serde(default)]
    pub payload: BTreeMap<String, String>,
}

/// An event the pipeline refused, together with the reason. `record` is
/// the event id, or `line <n>` for input that did not parse at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadLetter {
    pub record: String,
    pub reason: String,
}

/// Result of [`ingest`]: the sorted queue plus everything refused.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub queued: Vec<EventRecord>,
    pub dead_letters: Vec<DeadLetter>,
}

/// Parses a newline-delimited event log, one JSON record per line. Blank
/// lines are skipped; lines that do not parse become dead letters keyed
/// by their 1-based line number.
pub fn parse_event_log(text: &str) -> (Vec<EventRecord>, Vec<DeadLetter>) {
    let mut events = Vec::new();
    let mut dead = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match serde_json::from_str::<EventRecord>(line) {
            Ok(event) => events.push(event),
            Err(err) => dead.push(DeadLetter {
                record: format!("line {}", i + 1),
                reason: err.to_string(),
            }),
        }
    }
    (events, dead)
}

/// Validates, deduplicates and sorts a batch of events. Events with an
/// empty field or a tick beyond `horizon` dead-letter with a reason, as
/// does every repeat of an already accepted id. The queue is ordered by
/// priority (highest first), then tick, then id.
pub fn ingest(events: Vec<EventRecord>, horizon: Tick) -> IngestReport {
    let mut report = IngestReport::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for event in events {
        let reason = if event.id.is_empty() {
            Some("empty id".to_string())
        } else if event.source_device.is_empty() {
            Some("empty source_device".to_string())
        } else if event.kind.is_empty() {
            Some("empty kind".to_string())
        } else if event.subject_owner.is_empty() {
            Some("empty subject_owner".to_string())
        } else if event.tick > horizon {
            Some(format!("tick {} beyond horizon {}", event.tick.value(), horizon.value()))
        } else if !seen.insert(event.id.clone()) {
            Some("duplicate".to_string())
        } else {
            None
        };
        match reason {
            Some(reason) => {
                let record = if event.id.is_empty() { "<no id>".to_string() } else { event.id };
                report.dead_letters.push(DeadLetter { record, reason });
            }
            None => report.queued.push(event),
        }
    }
    report.queued.sort_by(|a, b| {
        b.priority.cmp(&a.priority).then(a.tick.cmp(&b.tick)).then(a.id.cmp(&b.id))
    });
    report
}

// ============================================================================
// Shared state
// ============================================================================

/// One processed event with a one-line outcome summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HistoryEntry {
    pub event: EventRecord,
    pub summary: String,
}

/// The state handlers share: an append-only event history and a
/// per-device status board. All reads return snapshots, so concurrent
/// handlers never observe a half-applied update.
#[derive(Debug, Default)]
pub struct SharedState {
    inner: Mutex<StateInner>,
}

#[derive(Debug, Default)]
struct StateInner {
    history: Vec<HistoryEntry>,
    device_status: BTreeMap<String, String>,
}

impl SharedState {
    pub fn new() -> SharedState {
        SharedState::default()
    }

    pub fn append(&self, event: EventRecord, summary: String) {
        self.inner.lock().unwrap().history.push(HistoryEntry { event, summary });
    }

    pub fn set_status(&self, owner: &str, status: String) {
        self.inner.lock().unwrap().device_status.insert(owner.to_string(), status);
    }

    /// Snapshot of the history so far, in append order.
    pub fn history(&self) -> Vec<HistoryEntry> {
        self.inner.lock().unwrap().history.clone()
    }

    /// Snapshot of the status board.
    pub fn device_status(&self) -> BTreeMap<String, String> {
        self.inner.lock().unwrap().device_status.clone()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn count_matching(&self, event: &EventRecord, lo: u64) -> usize {
        self.inner.lock().unwrap().history.iter().filter(|h| matches_gate(event, &h.event, lo)).count()
    }
}

fn matches_gate(event: &EventRecord, prior: &EventRecord, lo: u64) -> bool {
    prior.source_device == event.source_device
        && prior.kind == event.kind
        && prior.tick.value() >= lo
        && prior.tick <= event.tick
}

/// Whether an event clears the confidence threshold: at least `k` events
/// with the same `(source_device, kind)` within the last `window` ticks,
/// counting the event itself.
pub fn confidence_gate(event: &EventRecord, state: &SharedState, k: u32, window: Tick) -> bool {
    let lo = event.tick.value().saturating_sub(window.value());
    (state.count_matching(event, lo) + 1) as u64 >= u64::from(k)
}

fn gate_decision(event: &EventRecord, prior: &[EventRecord], k: u32, window: Tick) -> bool {
    let lo = event.tick.value().saturating_sub(window.value());
    (prior.iter().filter(|h| matches_gate(event, h, lo)).count() + 1) as u64 >= u64::from(k)
}

// ============================================================================
// Display commands
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DisplayTarget {
    Workstation,
    Mobile,
    Wall,
}

impl DisplayTarget {
    /// Routing by urgency: routine events go to the operator workstation,
    /// mid-priority ones page the on-call phone, urgent ones take the
    /// plant wall display.
    pub fn for_priority(priority: u32) -> DisplayTarget {
        match priority {
            0..=3 => DisplayTarget::Workstation,
            4..=7 => DisplayTarget::Mobile,
            _ => DisplayTarget::Wall,
        }
    }
}

impl fmt::Display for DisplayTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DisplayTarget::Workstation => "workstation",
            DisplayTarget::Mobile => "mobile",
            DisplayTarget::Wall => "wall",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Panel {
    pub title: String,
    pub body: String,
    pub related_owners: Vec<String>,
}

/// What one handler run wants shown, as an ordered list of panels.
/// Always has at least one panel; [`emit_xml`] gives the wire form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DisplayCommand {
    pub target: DisplayTarget,
    pub panels: Vec<Panel>,
}

fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(ch),
        }
    }
    out
}

fn escape_attr(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Serializes a display command as one compact XML document: panels in
/// list order, owners sorted and deduplicated, `<owners/>` when a panel
/// relates to none.
pub fn emit_xml(command: &DisplayCommand) -> String {
    let mut out = String::new();
    out.push_str("<display target=\"");
    out.push_str(&escape_attr(&command.target.to_string()));
    out.push_str("\">");
    for panel in &command.panels {
        out.push_str("<panel title=\"");
        out.push_str(&escape_attr(&panel.title));
        out.push_str("\"><body>");
        out.push_str(&escape_text(&panel.body));
        out.push_str("</body>");
        let mut owners: Vec<&String> = panel.related_owners.iter().collect();
        owners.sort();
        owners.dedup();
        if owners.is_empty() {
            out.push_str("<owners/>");
        } else {
            out.push_str("<owners>");
            for owner in owners {
                out.push_str("<owner name=\"");
                out.push_str(&escape_attr(owner));
                out.push_str("\"/>");
            }
            out.push_str("</owners>");
        }
        out.push_str("</panel>");
    }
    out.push_str("</display>");
    out
}

/// The concatenated XML stream for a replay: one document per command in
/// queue order, separated by blank lines.
pub fn emit_stream(commands: &[(EventRecord, DisplayCommand)]) -> String {
    if commands.is_empty() {
        return String::new();
    }
    let docs: Vec<String> = commands.iter().map(|(_, c)| emit_xml(c)).collect();
    let mut out = docs.join("\n\n");
    out.push('\n');
    out
}

// ============================================================================
// Handlers
// ============================================================================

/// The models a handler consults: the merged spatial model for nearby
/// queries, the device communication graph, and the expert graph that
/// extends it with the inter-site layer for reachability of the service
/// centers.
#[derive(Debug, Clone)]
pub struct PlantModels {
    pub spatial: Invariant,
    pub comm: TimeIndexedGraph,
    pub expert: TimeIndexedGraph,
}

impl PlantModels {
    /// Splits a set of parsed models into the handler views. Edge facts
    /// owned by the communication graph owner form `comm`; together with
    /// the inter-site facts they form `expert`, bridged by an always-on
    /// link between the hub and the manufacturing site when both exist.
    pub fn from_invariants(models: &[Invariant]) -> Result<PlantModels, FlattenError> {
        let spatial = normalize(Invariant::BigAnd(models.to_vec()));
        let facts = flatten(&spatial)?;
        let of_owner = |owner: &str| -> Vec<TimedFact> {
            facts.iter().filter(|f| f.owner.as_deref() == Some(owner)).cloned().collect()
        };
        let comm_facts = of_owner(COMM_OWNER);
        let comm = TimeIndexedGraph::from_facts(&comm_facts);
        let mut expert_facts = comm_facts;
        expert_facts.extend(of_owner(SITE_COMM_OWNER));
        let mut expert = TimeIndexedGraph::from_facts(&expert_facts);
        if expert.nodes().contains(COMM_HUB) && expert.nodes().contains(MANUFACTURING_SITE) {
            expert.add_slice(TimeGuard::Always, [(COMM_HUB, MANUFACTURING_SITE)]);
        }
        Ok(PlantModels { spatial, comm, expert })
    }
}

/// Pipeline parameters. The defaults pass every alarm through the gate
/// and look five cells around the subject.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub horizon: Tick,
    pub confidence_k: u32,
    pub confidence_window: Tick,
    pub nearby_radius: i64,
    pub parallel_handlers: bool,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            horizon: Tick(crate::model::TICKS_PER_DAY - 1),
            confidence_k: 1,
            confidence_window: Tick(100),
            nearby_radius: 5,
            parallel_handlers: true,
        }
    }
}

fn device_name(owner: &str) -> &str {
    owner.strip_suffix("_Space").unwrap_or(owner)
}

fn clock_label(t: Tick) -> String {
    match t.as_gmt() {
        Some((h, m, s)) => format!("{h:02}:{m:02}:{s:02}"),
        None => format!("tick {}", t.value()),
    }
}

/// Runs the checks for one gated event and assembles its display
/// command: an incident summary, the devices near the subject, and a
/// connectivity report covering the hub and both service centers. The
/// event is appended to the history either way; a check error produces a
/// single diagnostic panel instead of panels built on missing data.
pub fn handle(
    event: &EventRecord,
    models: &PlantModels,
    state: &SharedState,
    config: &PipelineConfig,
) -> DisplayCommand {
    let target = DisplayTarget::for_priority(event.priority);
    let clock = clock_label(event.tick);

    let query = Query::NearbyDevices {
        owner: event.subject_owner.clone(),
        t: event.tick,
        radius: config.nearby_radius,
    };
    let verdict = match check(&query, std::slice::from_ref(&models.spatial)) {
        Ok(verdict) => verdict,
        Err(err) => {
            state.append(event.clone(), format!("diagnostic: {err}"));
            return DisplayCommand {
                target,
                panels: vec![Panel {
                    title: "diagnostic".to_string(),
                    body: err.to_string(),
                    related_owners: vec![event.subject_owner.clone()],
                }],
            };
        }
    };
    let nearby_detail =
        verdict.witness.map_or_else(|| "none".to_string(), |w| w.detail);
    let nearby_owners: Vec<String> = if nearby_detail == "none" {
        Vec::new()
    } else {
        nearby_detail.split(", ").map(str::to_string).collect()
    };

    let incident = Panel {
        title: "incident".to_string(),
        body: format!(
            "{} from {} for {} at {} (tick {}, priority {})",
            event.kind,
            event.source_device,
            event.subject_owner,
            clock,
            event.tick.value(),
            event.priority
        ),
        related_owners: vec![event.subject_owner.clone()],
    };
    let nearby = Panel {
        title: "nearby devices".to_string(),
        body: format!("within {} cells: {nearby_detail}", config.nearby_radius),
        related_owners: nearby_owners,
    };

    let device = device_name(&event.subject_owner);
    let connectivity_body = if !models.comm.nodes().contains(device) {
        format!("at {clock}: {device} is not on the communication graph")
    } else {
        let status = |graph: &TimeIndexedGraph, to: &str| match graph.connected(device, to, event.tick)
        {
            Ok(true) => "reachable",
            Ok(false) => "unreachable",
            Err(_) => "unknown",
        };
        format!(
            "at {clock}: {COMM_HUB} {}; {SERVICE_CENTER_1} {}; {SERVICE_CENTER_2} {}",
            status(&models.comm, COMM_HUB),
            status(&models.expert, SERVICE_CENTER_1),
            status(&models.expert, SERVICE_CENTER_2),
        )
    };
    let connectivity = Panel {
        title: "connectivity".to_string(),
        body: connectivity_body,
        related_owners: Vec::new(),
    };

    state.append(event.clone(), format!("nearby: {nearby_detail}"));
    state.set_status(&event.subject_owner, format!("{} at {clock}", event.kind));
    DisplayCommand { target, panels: vec![incident, nearby, connectivity] }
}

// ============================================================================
// Replay
// ============================================================================

/// Everything a replay produced. `commands` follows queue order, so the
/// XML stream is reproducible; `history` is deterministic in length and
/// membership while its order reflects handler completion.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub commands: Vec<(EventRecord, DisplayCommand)>,
    pub suppressed: Vec<EventRecord>,
    pub dead_letters: Vec<DeadLetter>,
    pub history: Vec<HistoryEntry>,
    pub device_status: BTreeMap<String, String>,
}

/// Replays an event batch: ingest, gate, handle, collect. Gate decisions
/// are taken in queue order against all earlier queued events, exactly
/// as a fully sequential run would see them; handlers then run
/// concurrently across distinct subject owners (serialized per owner)
/// and their commands are reassembled in queue order.
pub fn replay(events: Vec<EventRecord>, models: &PlantModels, config: &PipelineConfig) -> ReplayOutcome {
    let IngestReport { queued, dead_letters } = ingest(events, config.horizon);
    let state = SharedState::new();

    let mut passed: Vec<(usize, EventRecord)> = Vec::new();
    let mut suppressed: Vec<EventRecord> = Vec::new();
    for (idx, event) in queued.iter().enumerate() {
        if gate_decision(event, &queued[..idx], config.confidence_k, config.confidence_window) {
            passed.push((idx, event.clone()));
        } else {
            state.append(event.clone(), "suppressed by confidence gate".to_string());
            suppressed.push(event.clone());
        }
    }

    let mut groups: BTreeMap<String, Vec<(usize, EventRecord)>> = BTreeMap::new();
    for entry in passed {
        groups.entry(entry.1.subject_owner.clone()).or_default().push(entry);
    }
    let groups: Vec<Vec<(usize, EventRecord)>> = groups.into_values().collect();
    let run_group = |group: &Vec<(usize, EventRecord)>| -> Vec<(usize, EventRecord, DisplayCommand)> {
        group.iter().map(|(idx, e)| (*idx, e.clone(), handle(e, models, &state, config))).collect()
    };

    #[cfg(feature = "parallel")]
    let mut handled: Vec<(usize, EventRecord, DisplayCommand)> = if config.parallel_handlers {
        groups.par_iter().flat_map_iter(run_group).collect()
    } else {
        groups.iter().flat_map(run_group).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut handled: Vec<(usize, EventRecord, DisplayCommand)> =
        groups.iter().flat_map(run_group).collect();

    handled.sort_by_key(|(idx, _, _)| *idx);
    ReplayOutcome {
        commands: handled.into_iter().map(|(_, e, c)| (e, c)).collect(),
        suppressed,
        dead_letters,
        history: state.history(),
        device_status: state.device_status(),
    }
}
