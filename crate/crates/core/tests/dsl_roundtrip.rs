//! Parse/print round-trip guarantees, on fixtures and on random terms.

mod common;

use common::{random_term, rng};
use rand::Rng;
use stmc::dsl::{parse_model, print_model, print_model_with, PrintOptions, TimeStyle};
use stmc::model::normalize;

const FIXTURES: &[&str] = &[
    "fixtures/comm_model.bsd",
    "fixtures/trajectory_default.bsd",
    "fixtures/site_graphs.bsd",
    "fixtures/sensors.bsd",
];

fn fixture(path: &str) -> String {
    let full = format!("{}/{}", env!("CARGO_MANIFEST_DIR"), path);
    std::fs::read_to_string(&full).unwrap_or_else(|e| panic!("{full}: {e}"))
}

#[test]
fn fixtures_round_trip_in_both_time_styles() {
    for path in FIXTURES {
        let term = parse_model(&fixture(path)).unwrap_or_else(|e| panic!("{path}: {e}"));
        for style in [TimeStyle::Ticks, TimeStyle::GmtClock] {
            let text = print_model_with(&term, &PrintOptions { time_style: style });
            let back = parse_model(&text).unwrap_or_else(|e| panic!("{path} ({style:?}): {e}"));
            assert_eq!(back, term, "{path} ({style:?})");
        }
    }
}

#[test]
fn printing_a_reparsed_fixture_is_stable() {
    for path in FIXTURES {
        let term = parse_model(&fixture(path)).unwrap();
        let text = print_model(&term);
        let again = print_model(&parse_model(&text).unwrap());
        assert_eq!(text, again, "{path}");
    }
}

#[test]
fn random_normalized_terms_round_trip() {
    let mut rng = rng(0x0501);
    for case in 0..1_000 {
        let term = normalize(random_term(&mut rng, 6));
        for style in [TimeStyle::Ticks, TimeStyle::GmtClock] {
            let text = print_model_with(&term, &PrintOptions { time_style: style });
            let back = parse_model(&text)
                .unwrap_or_else(|e| panic!("case {case} ({style:?}): {e}\n{text}"));
            assert_eq!(back, term, "case {case} ({style:?})");
        }
    }
}

#[test]
fn strings_with_quotes_and_backslashes_survive() {
    let text = r#"IMPLIES(
  Owner("cell\"7\""),
  ComponentState("line\\2 up")
)"#;
    let term = parse_model(text).unwrap();
    let printed = print_model(&term);
    assert_eq!(parse_model(&printed).unwrap(), term);
    assert!(printed.contains(r#"cell\"7\""#));
    assert!(printed.contains(r"line\\2 up"));
}

#[test]
fn parser_survives_mutated_inputs() {
    let mut rng = rng(0x0502);
    for _ in 0..500 {
        let term = normalize(random_term(&mut rng, 5));
        let mut bytes = print_model(&term).into_bytes();
        let flips = rng.random_range(1..=4);
        for _ in 0..flips {
            let i = rng.random_range(0..bytes.len());
            bytes[i] = rng.random_range(0x20..0x7fu8);
        }
        if let Ok(text) = String::from_utf8(bytes) {
            let _ = parse_model(&text);
        }
    }
}

#[test]
fn parser_survives_garbage() {
    let mut rng = rng(0x0503);
    for _ in 0..500 {
        let len = rng.random_range(0..200);
        let garbage: String =
            (0..len).map(|_| rng.random_range(0x20..0x7fu8) as char).collect();
        let _ = parse_model(&garbage);
    }
    assert!(parse_model("").is_err());
    assert!(parse_model("AND(").is_err());
    assert!(parse_model("TRUE extra").is_err());
}

#[test]
fn errors_point_at_the_offending_token() {
    let err = parse_model("AND(\n  TRUE,\n  Frobnicate(1)\n)").unwrap_err();
    assert_eq!(err.span.line, 3);
    assert!(err.message.contains("Frobnicate"));
}

#[test]
fn clock_sugar_and_plain_ticks_denote_the_same_term() {
    let clock = parse_model(r#"TimeInterval(TStandardGMTDay(0, 0, 0), TStandardGMTDay(23, 30, 59))"#)
        .unwrap();
    let ticks = parse_model("TimeInterval(0, 84659)").unwrap();
    assert_eq!(clock, ticks);
}
