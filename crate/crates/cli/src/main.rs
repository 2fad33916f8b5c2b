//! Command line front end for the stmc library.
//!
//! Exit codes: 0 when the command succeeds and any checked property
//! holds, 1 when a property is violated or a replay dead-letters events,
//! 2 on usage, parse or IO errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stmc::checker::{check, export_dimacs, ground_points, resolve_trigger, Query, Report};
use stmc::dsl::{parse_model, print_model_with, PrintOptions, TimeStyle};
use stmc::geometry::{ApproxMode, PointSet4D, Region};
use stmc::model::{list_owners, Invariant, Tick};
use stmc::pipeline::{
    emit_stream, emit_xml, parse_event_log, replay, DeadLetter, PipelineConfig, PlantModels,
};
use stmc::scenario::{
    build_comm_model, build_sensor_model, build_site_model, build_trajectory_model,
    default_robot_path, demo_event_log, ScenarioConfig,
};
use stmc::temporal::flatten;
use stmc::topology::TimeIndexedGraph;

#[derive(Parser)]
#[command(
    name = "stmc",
    version,
    about = "Spatio-temporal model checking for industrial plant models"
)]
struct Cli {
    /// Grid cell size for grounding and collision checks.
    #[arg(long, global = true, default_value_t = 1)]
    resolution: u32,
    /// Last tick considered, as a tick count or HH:MM:SS clock literal.
    #[arg(long, global = true, default_value = "23:59:59", value_parser = parse_time)]
    horizon: Tick,
    /// Report style on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Resolve facts timed relative to EVENT as happening at TIME
    /// (EVENT=TIME, repeatable).
    #[arg(long = "trigger", global = true, value_parser = parse_trigger)]
    triggers: Vec<(String, Tick)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Key-value lines.
    Text,
    /// JSON.
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClockStyle {
    /// Plain tick counts.
    Ticks,
    /// TStandardGMTDay clock literals where possible.
    Gmt,
}

#[derive(Subcommand)]
enum Command {
    /// Parse models and summarize their owners and facts.
    Parse {
        /// Model files.
        #[arg(required = true)]
        models: Vec<PathBuf>,
    },
    /// Parse, normalize and reprint one model.
    Print {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = ClockStyle::Ticks)]
        time_style: ClockStyle,
    },
    /// Check a property of the models.
    Check {
        /// Model files.
        #[arg(required = true)]
        models: Vec<PathBuf>,
        /// Collision absence between two owners.
        #[arg(long, num_args = 2, value_names = ["OWNER_A", "OWNER_B"])]
        collision: Option<Vec<String>>,
        /// Coverage of --target by the under-approximated ranges of
        /// --sensors.
        #[arg(long)]
        coverage: bool,
        /// Coverage target box as x1,y1,x2,y2.
        #[arg(long)]
        target: Option<String>,
        /// Sensor owner names (comma separated).
        #[arg(long, value_delimiter = ',')]
        sensors: Vec<String>,
        /// List owners near this owner at --at.
        #[arg(long, value_name = "OWNER")]
        nearby: Option<String>,
        /// Chebyshev radius for --nearby.
        #[arg(long, default_value_t = 5)]
        radius: i64,
        /// Connectivity of two graph nodes at --at.
        #[arg(long, num_args = 2, value_names = ["NODE_A", "NODE_B"])]
        connected: Option<Vec<String>>,
        /// Tick for --nearby and --connected (ticks or HH:MM:SS).
        #[arg(long, value_parser = parse_time)]
        at: Option<Tick>,
    },
    /// Export a collision query as a DIMACS CNF goal.
    Export {
        /// Model files.
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["OWNER_A", "OWNER_B"], required = true)]
        collision: Vec<String>,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
        /// Variable space as X,Y,T; derived from the point sets when
        /// omitted.
        #[arg(long)]
        bounds: Option<String>,
    },
    /// Connectivity windows of a node pair over [0, horizon].
    Windows {
        /// Model files.
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long, num_args = 2, value_names = ["NODE_A", "NODE_B"], required = true)]
        pair: Vec<String>,
    },
    /// Replay an event log against the models and emit display XML.
    Replay {
        /// Newline-delimited JSON event log.
        log: PathBuf,
        /// Model files.
        #[arg(long, value_delimiter = ',', required = true)]
        models: Vec<PathBuf>,
        /// Write one XML file per event into this directory instead of
        /// streaming to standard output.
        #[arg(long, requires = "out_dir")]
        split: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Confidence gate: require this many matching events...
        #[arg(long, default_value_t = 1)]
        confidence_k: u32,
        /// ...within this many ticks of history.
        #[arg(long, value_parser = parse_time, default_value = "100")]
        confidence_window: Tick,
        /// Chebyshev radius of the nearby-devices panel.
        #[arg(long, default_value_t = 5)]
        radius: i64,
        /// Run handlers one at a time.
        #[arg(long)]
        sequential: bool,
    },
    /// Write the bundled example models and event log.
    Scenario {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_time(text: &str) -> Result<Tick, String> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err("clock literals have the form HH:MM:SS".to_string());
        }
        let field = |s: &str| s.parse::<u32>().map_err(|_| format!("bad clock field `{s}`"));
        Tick::from_gmt(field(parts[0])?, field(parts[1])?, field(parts[2])?)
            .ok_or_else(|| format!("`{text}` is not a valid time of day"))
    } else {
        text.parse::<u64>().map(Tick).map_err(|_| format!("`{text}` is not a tick count"))
    }
}

fn parse_trigger(text: &str) -> Result<(String, Tick), String> {
    let (event, time) = text
        .split_once('=')
        .ok_or_else(|| "triggers have the form EVENT=TIME".to_string())?;
    if event.is_empty() {
        return Err("trigger event name is empty".to_string());
    }
    Ok((event.to_string(), parse_time(time)?))
}

fn parse_box(text: &str) -> Result<Region, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err("boxes have the form x1,y1,x2,y2".to_string());
    }
    let mut coords = [0i64; 4];
    for (slot, part) in coords.iter_mut().zip(&parts) {
        *slot = part.trim().parse::<i64>().map_err(|_| format!("bad coordinate `{part}`"))?;
    }
    Ok(Region::rect(coords[0], coords[1], coords[2], coords[3]))
}

fn parse_bounds(text: &str) -> Result<(i64, i64, u64), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err("bounds have the form X,Y,T".to_string());
    }
    let x = parts[0].trim().parse::<i64>().map_err(|_| format!("bad bound `{}`", parts[0]))?;
    let y = parts[1].trim().parse::<i64>().map_err(|_| format!("bad bound `{}`", parts[1]))?;
    let t = parts[2].trim().parse::<u64>().map_err(|_| format!("bad bound `{}`", parts[2]))?;
    Ok((x, y, t))
}

/// Reads and parses one model file, applying any trigger resolutions.
fn load_model(path: &Path, triggers: &[(String, Tick)]) -> Result<Invariant, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut model =
        parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    for (event, tick) in triggers {
        model = resolve_trigger(&model, event, *tick);
    }
    Ok(model)
}

fn load_models(paths: &[PathBuf], triggers: &[(String, Tick)]) -> Result<Vec<Invariant>, String> {
    paths.iter().map(|p| load_model(p, triggers)).collect()
}

/// One merged graph over every edge fact in the models, whatever the
/// owner. Callers pick the model files, so they pick the layer.
fn merged_graph(models: &[Invariant]) -> Result<TimeIndexedGraph, String> {
    let mut facts = Vec::new();
    for model in models {
        facts.extend(flatten(model).map_err(|e| e.to_string())?);
    }
    Ok(TimeIndexedGraph::from_facts(&facts))
}

fn print_report(query: &Query, verdict: &stmc::Verdict, format: Format) {
    let report = Report { query, verdict };
    match format {
        Format::Text => println!("{report}"),
        Format::Structured => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
}

fn run_check(query: Query, models: &[Invariant], format: Format) -> Result<u8, String> {
    let verdict = check(&query, models).map_err(|e| e.to_string())?;
    print_report(&query, &verdict, format);
    Ok(u8::from(!verdict.holds))
}

fn cmd_parse(paths: &[PathBuf], triggers: &[(String, Tick)], format: Format) -> Result<u8, String> {
    for path in paths {
        let model = load_model(path, triggers)?;
        let owners: Vec<String> = list_owners(&model).into_iter().collect();
        let facts = flatten(&model).map(|f| f.len());
        match format {
            Format::Text => {
                let facts = facts.map_or_else(|e| format!("unavailable ({e})"), |n| n.to_string());
                println!("{}: owners [{}], facts {}", path.display(), owners.join(", "), facts);
            }
            Format::Structured => {
                let value = serde_json::json!({
                    "path": path.display().to_string(),
                    "owners": owners,
                    "facts": facts.ok(),
                });
                println!("{value}");
            }
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    cli_format: Format,
    resolution: u32,
    horizon: Tick,
    models: &[Invariant],
    collision: Option<Vec<String>>,
    coverage: bool,
    target: Option<String>,
    sensors: Vec<String>,
    nearby: Option<String>,
    radius: i64,
    connected: Option<Vec<String>>,
    at: Option<Tick>,
) -> Result<u8, String> {
    let modes =
        usize::from(collision.is_some()) + usize::from(coverage) + usize::from(nearby.is_some())
            + usize::from(connected.is_some());
    if modes != 1 {
        return Err(
            "pick exactly one of --collision, --coverage, --nearby, --connected".to_string()
        );
    }

    if let Some(pair) = collision {
        let query = Query::CollisionAbsence {
            owner_a: pair[0].clone(),
            owner_b: pair[1].clone(),
            horizon,
            resolution,
        };
        return run_check(query, models, cli_format);
    }
    if coverage {
        let target = target.ok_or("--coverage needs --target x1,y1,x2,y2")?;
        if sensors.is_empty() {
            return Err("--coverage needs --sensors".to_string());
        }
        let query = Query::Coverage {
            sensor_owners: sensors,
            target: parse_box(&target)?,
            horizon,
            resolution,
        };
        return run_check(query, models, cli_format);
    }
    if let Some(owner) = nearby {
        let query = Query::NearbyDevices { owner, t: at.unwrap_or(Tick(0)), radius };
        return run_check(query, models, cli_format);
    }

    let pair = connected.expect("mode count checked above");
    let t = at.unwrap_or(Tick(0));
    let graph = merged_graph(models)?;
    let holds = graph.connected(&pair[0], &pair[1], t).map_err(|e| e.to_string())?;
    match cli_format {
        Format::Text => {
            println!("query: connected(a={}, b={}, t={})", pair[0], pair[1], t);
            println!("holds: {holds}");
        }
        Format::Structured => {
            let value = serde_json::json!({
                "query": {"kind": "connected", "a": pair[0], "b": pair[1], "t": t.value()},
                "holds": holds,
            });
            println!("{}", serde_json::to_string_pretty(&value).unwrap());
        }
    }
    Ok(u8::from(!holds))
}

fn cmd_export(
    models: &[Invariant],
    pair: &[String],
    out: &Path,
    bounds: Option<String>,
    horizon: Tick,
    resolution: u32,
) -> Result<u8, String> {
    let query = Query::CollisionAbsence {
        owner_a: pair[0].clone(),
        owner_b: pair[1].clone(),
        horizon,
        resolution,
    };
    let mut sets: Vec<(String, PointSet4D)> = Vec::new();
    for owner in pair {
        let mut set = PointSet4D::new();
        for model in models {
            set.union_with(
                ground_points(model, owner, horizon, resolution, ApproxMode::Over)
                    .map_err(|e| e.to_string())?,
            );
        }
        sets.push((owner.clone(), set));
    }

    let bounds = match bounds {
        Some(text) => parse_bounds(&text)?,
        None => {
            let mut x = 1i64;
            let mut y = 1i64;
            let mut t = 1u64;
            for (_, set) in &sets {
                for p in set.iter() {
                    x = x.max(p.x + 1);
                    y = y.max(p.y + 1);
                    t = t.max(p.t.value() + 1);
                }
            }
            (x, y, t)
        }
    };

    let dimacs = export_dimacs(&sets, &query, bounds).map_err(|e| e.to_string())?;
    fs::write(out, &dimacs).map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    let header = dimacs.lines().next().unwrap_or("");
    println!("wrote {} ({header})", out.display());
    Ok(0)
}

fn cmd_windows(models: &[Invariant], pair: &[String], horizon: Tick, format: Format) -> Result<u8, String> {
    let graph = merged_graph(models)?;
    let windows =
        graph.connectivity_windows(&pair[0], &pair[1], horizon).map_err(|e| e.to_string())?;
    match format {
        Format::Text => {
            println!("windows({}, {}) over [0, {}]:", pair[0], pair[1], horizon);
            if windows.is_empty() {
                println!("  never connected");
            }
            for (from, to) in &windows {
                println!("  [{from}, {to}] ({} ticks)", to.value() - from.value() + 1);
            }
        }
        Format::Structured => {
            let value: Vec<[u64; 2]> =
                windows.iter().map(|(a, b)| [a.value(), b.value()]).collect();
            println!("{}", serde_json::to_string(&value).unwrap());
        }
    }
    Ok(0)
}

fn report_dead_letters(dead: &[DeadLetter], format: Format) {
    match format {
        Format::Text => {
            for d in dead {
                eprintln!("dead letter: {}: {}", d.record, d.reason);
            }
        }
        Format::Structured => {
            eprintln!("{}", serde_json::to_string(dead).unwrap());
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_replay(
    log: &Path,
    model_paths: &[PathBuf],
    triggers: &[(String, Tick)],
    split: bool,
    out_dir: Option<&Path>,
    config: PipelineConfig,
    format: Format,
) -> Result<u8, String> {
    let text =
        fs::read_to_string(log).map_err(|e| format!("cannot read {}: {e}", log.display()))?;
    let (events, mut dead) = parse_event_log(&text);
    let invariants = load_models(model_paths, triggers)?;
    let models = PlantModels::from_invariants(&invariants).map_err(|e| e.to_string())?;

    let outcome = replay(events, &models, &config);
    dead.extend(outcome.dead_letters.iter().cloned());

    if split {
        let dir = out_dir.expect("clap enforces --split requires --out-dir");
        fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        for (event, command) in &outcome.commands {
            let path = dir.join(format!("{}.xml", event.id));
            let mut doc = emit_xml(command);
            doc.push('\n');
            fs::write(&path, doc).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        println!("wrote {} display commands to {}", outcome.commands.len(), dir.display());
    } else {
        let stream = emit_stream(&outcome.commands);
        match out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)
                    .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
                let path = dir.join("stream.xml");
                fs::write(&path, &stream)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                println!("wrote {} display commands to {}", outcome.commands.len(), path.display());
            }
            None => print!("{stream}"),
        }
    }

    if !dead.is_empty() {
        report_dead_letters(&dead, format);
        return Ok(1);
    }
    Ok(0)
}

fn cmd_scenario(out_dir: &Path) -> Result<u8, String> {
    fs::create_dir_all(out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let cfg = ScenarioConfig::default();
    let gmt = PrintOptions { time_style: TimeStyle::GmtClock };
    let ticks = PrintOptions { time_style: TimeStyle::Ticks };
    let files: Vec<(&str, String)> = vec![
        ("comm_model.bsd", print_model_with(&build_comm_model(), &gmt)),
        ("trajectory_default.bsd", print_model_with(&build_trajectory_model(&cfg, default_robot_path), &ticks)),
        ("site_graphs.bsd", print_model_with(&build_site_model(), &ticks)),
        ("sensors.bsd", print_model_with(&build_sensor_model(&cfg), &ticks)),
        ("demo_events.ndlog", demo_event_log()),
    ];
    for (name, content) in &files {
        let path = out_dir.join(name);
        let mut content = content.clone();
        if !content.ends_with('\n') {
            content.push('\n');
        }
        fs::write(&path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, String> {
    if cli.resolution == 0 {
        return Err("--resolution must be at least 1".to_string());
    }
    let duplicate_triggers = {
        let mut seen = BTreeSet::new();
        cli.triggers.iter().any(|(event, _)| !seen.insert(event.clone()))
    };
    if duplicate_triggers {
        return Err("the same trigger event was given twice".to_string());
    }

    match cli.command {
        Command::Parse { models } => cmd_parse(&models, &cli.triggers, cli.format),
        Command::Print { model, time_style } => {
            let parsed = load_model(&model, &cli.triggers)?;
            let style = match time_style {
                ClockStyle::Ticks => TimeStyle::Ticks,
                ClockStyle::Gmt => TimeStyle::GmtClock,
            };
            println!("{}", print_model_with(&parsed, &PrintOptions { time_style: style }));
            Ok(0)
        }
        Command::Check {
            models,
            collision,
            coverage,
            target,
            sensors,
            nearby,
            radius,
            connected,
            at,
        } => {
            let parsed = load_models(&models, &cli.triggers)?;
            cmd_check(
                cli.format,
                cli.resolution,
                cli.horizon,
                &parsed,
                collision,
                coverage,
                target,
                sensors,
                nearby,
                radius,
                connected,
                at,
            )
        }
        Command::Export { models, collision, out, bounds } => {
            let parsed = load_models(&models, &cli.triggers)?;
            cmd_export(&parsed, &collision, &out, bounds, cli.horizon, cli.resolution)
        }
        Command::Windows { models, pair } => {
            let parsed = load_models(&models, &cli.triggers)?;
            cmd_windows(&parsed, &pair, cli.horizon, cli.format)
        }
        Command::Replay {
            log,
            models,
            split,
            out_dir,
            confidence_k,
            confidence_window,
            radius,
            sequential,
        } => {
            let config = PipelineConfig {
                horizon: cli.horizon,
                confidence_k,
                confidence_window,
                nearby_radius: radius,
                parallel_handlers: !sequential,
            };
            cmd_replay(&log, &models, &cli.triggers, split, out_dir.as_deref(), config, cli.format)
        }
        Command::Scenario { out_dir } => cmd_scenario(&out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
