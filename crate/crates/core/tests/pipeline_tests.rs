//! End-to-end replay: golden output, determinism under concurrency, and
//! history integrity under load.

mod common;

use std::collections::BTreeSet;

use common::{random_events, rng};
use stmc::checker::resolve_trigger;
use stmc::dsl::parse_model;
use stmc::model::{Invariant, Tick};
use stmc::pipeline::{
    emit_stream, ingest, parse_event_log, replay, PipelineConfig, PlantModels, ReplayOutcome,
};
use stmc::scenario::demo_event_log;

fn fixture(path: &str) -> String {
    let full = format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), path);
    std::fs::read_to_string(&full).unwrap_or_else(|e| panic!("{full}: {e}"))
}

/// The model set and configuration behind the golden replay: the bundled
/// fixtures with the conveyor activated at tick 85760, and a gate that
/// wants a second confirmation within 50 ticks.
fn demo_setup() -> (PlantModels, PipelineConfig) {
    let invariants: Vec<Invariant> = [
        "trajectory_default.bsd",
        "comm_model.bsd",
        "site_graphs.bsd",
        "sensors.bsd",
    ]
    .iter()
    .map(|name| {
        let model = parse_model(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        resolve_trigger(&model, "ConvAct", Tick(85_760))
    })
    .collect();
    let models = PlantModels::from_invariants(&invariants).unwrap();
    let config = PipelineConfig {
        confidence_k: 2,
        confidence_window: Tick(50),
        ..PipelineConfig::default()
    };
    (models, config)
}

fn demo_replay(config: &PipelineConfig, models: &PlantModels) -> ReplayOutcome {
    let (events, dead) = parse_event_log(&demo_event_log());
    assert!(dead.is_empty(), "{dead:?}");
    replay(events, models, config)
}

#[test]
fn demo_replay_reproduces_the_golden_stream() {
    let (models, config) = demo_setup();
    let outcome = demo_replay(&config, &models);
    assert!(outcome.dead_letters.is_empty());
    assert_eq!(emit_stream(&outcome.commands), fixture("golden/robot2_malfunction.xml"));
}

#[test]
fn demo_gate_passes_only_the_confirmed_malfunction() {
    let (models, config) = demo_setup();
    let outcome = demo_replay(&config, &models);

    let command_ids: Vec<&str> =
        outcome.commands.iter().map(|(e, _)| e.id.as_str()).collect();
    assert_eq!(command_ids, ["evt-002"]);

    let suppressed_ids: Vec<&str> =
        outcome.suppressed.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(suppressed_ids, ["evt-001", "evt-003", "evt-004"]);

    let history_ids: Vec<&str> =
        outcome.history.iter().map(|h| h.event.id.as_str()).collect();
    assert_eq!(history_ids, ["evt-001", "evt-003", "evt-004", "evt-002"]);
    for entry in &outcome.history[..3] {
        assert_eq!(entry.summary, "suppressed by confidence gate");
    }
    assert!(outcome.history[3].summary.starts_with("nearby:"), "{}", outcome.history[3].summary);

    let status = outcome.device_status.get("Robot2_Space").expect("status for the subject");
    assert_eq!(status, "malfunction at 23:50:00");
}

#[test]
fn replay_is_deterministic_across_runs_and_scheduling() {
    let (models, config) = demo_setup();
    let reference = demo_replay(&config, &models);
    let reference_stream = emit_stream(&reference.commands);

    for run in 0..10 {
        for parallel in [true, false] {
            let config = PipelineConfig { parallel_handlers: parallel, ..config.clone() };
            let outcome = demo_replay(&config, &models);
            assert_eq!(
                emit_stream(&outcome.commands),
                reference_stream,
                "run {run}, parallel={parallel}"
            );
            assert_eq!(outcome.history, reference.history, "run {run}, parallel={parallel}");
            assert_eq!(
                outcome.device_status, reference.device_status,
                "run {run}, parallel={parallel}"
            );
        }
    }
}

#[test]
fn thousand_event_stress_loses_nothing() {
    let (models, _) = demo_setup();
    let config = PipelineConfig {
        confidence_k: 2,
        confidence_window: Tick(500),
        ..PipelineConfig::default()
    };
    let mut rng = rng(0x0f01);
    let events = random_events(&mut rng, 1_000, config.horizon);

    let queue_order: Vec<String> = {
        let report = ingest(events.clone(), config.horizon);
        assert!(report.dead_letters.is_empty());
        report.queued.iter().map(|e| e.id.clone()).collect()
    };

    let outcome = replay(events, &models, &config);
    assert!(outcome.dead_letters.is_empty());
    assert_eq!(
        outcome.commands.len() + outcome.suppressed.len(),
        1_000,
        "every queued event is either handled or suppressed"
    );
    assert_eq!(outcome.history.len(), 1_000, "every event appends exactly one history entry");

    let seen: BTreeSet<&str> = outcome.history.iter().map(|h| h.event.id.as_str()).collect();
    assert_eq!(seen.len(), 1_000, "no duplicate history entries");

    let command_ids: Vec<&str> = outcome.commands.iter().map(|(e, _)| e.id.as_str()).collect();
    let mut cursor = queue_order.iter();
    for id in &command_ids {
        assert!(
            cursor.any(|q| q.as_str() == *id),
            "commands must come back in queue order; {id} is out of place"
        );
    }
}

#[test]
fn stress_replay_is_deterministic_across_scheduling() {
    let (models, _) = demo_setup();
    let mut rng = rng(0x0f02);
    let events = random_events(&mut rng, 400, Tick(86_399));

    let streams: BTreeSet<String> = [true, false, true, false]
        .iter()
        .map(|&parallel| {
            let config = PipelineConfig {
                confidence_k: 3,
                confidence_window: Tick(1_000),
                parallel_handlers: parallel,
                ..PipelineConfig::default()
            };
            let outcome = replay(events.clone(), &models, &config);
            emit_stream(&outcome.commands)
        })
        .collect();
    assert_eq!(streams.len(), 1, "one unique stream across schedules");
}

#[test]
fn malformed_and_late_events_dead_letter_without_stopping_the_batch() {
    let (models, config) = demo_setup();
    let log = concat!(
        "{\"id\":\"ok-1\",\"source_device\":\"scada\",\"kind\":\"malfunction\",",
        "\"subject_owner\":\"Robot2_Space\",\"tick\":10,\"priority\":9}\n",
        "not json at all\n",
        "{\"id\":\"late-1\",\"source_device\":\"scada\",\"kind\":\"malfunction\",",
        "\"subject_owner\":\"Robot2_Space\",\"tick\":99999999,\"priority\":9}\n",
        "{\"id\":\"ok-1\",\"source_device\":\"scada\",\"kind\":\"malfunction\",",
        "\"subject_owner\":\"Robot2_Space\",\"tick\":11,\"priority\":9}\n",
    );
    let (events, mut dead) = parse_event_log(log);
    assert_eq!(dead.len(), 1, "the unparseable line dead-letters in parsing");
    assert!(dead[0].record.contains("line 2"), "{:?}", dead[0]);

    let outcome = replay(events, &models, &config);
    dead.extend(outcome.dead_letters);
    assert_eq!(dead.len(), 3, "{dead:?}");
    assert_eq!(outcome.commands.len() + outcome.suppressed.len(), 1);
}
