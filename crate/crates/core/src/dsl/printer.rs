//! Deterministic pretty printer for model terms.

use crate::model::{AtomValue, Invariant, Tick};

/// How ticks are rendered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TimeStyle {
    /// Plain tick counts.
    #[default]
    Ticks,
    /// `TStandardGMTDay(h, m, s)` for ticks within one day; larger ticks
    /// fall back to plain counts.
    GmtClock,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PrintOptions {
    pub time_style: TimeStyle,
}

/// Prints a term with default options (plain ticks).
pub fn print_model(term: &Invariant) -> String {
    print_model_with(term, &PrintOptions::default())
}

/// Prints a term. Compound connectives are laid out over multiple lines
/// with two-space indentation, atoms stay on one line. The output parses
/// back to the same term (after normalization).
pub fn print_model_with(term: &Invariant, opts: &PrintOptions) -> String {
    let mut out = String::new();
    write_term(&mut out, term, 0, opts);
    out
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_term(out: &mut String, term: &Invariant, indent: usize, opts: &PrintOptions) {
    match term {
        Invariant::Atom(atom) => write_atom(out, atom, opts),
        Invariant::Not(body) => {
            out.push_str("NOT(\n");
            pad(out, indent + 1);
            write_term(out, body, indent + 1, opts);
            out.push('\n');
            pad(out, indent);
            out.push(')');
        }
        Invariant::And(l, r) | Invariant::Or(l, r) | Invariant::Implies(l, r) => {
            out.push_str(match term {
                Invariant::And(..) => "AND(\n",
                Invariant::Or(..) => "OR(\n",
                _ => "IMPLIES(\n",
            });
            pad(out, indent + 1);
            write_term(out, l, indent + 1, opts);
            out.push_str(",\n");
            pad(out, indent + 1);
            write_term(out, r, indent + 1, opts);
            out.push('\n');
            pad(out, indent);
            out.push(')');
        }
        Invariant::BigAnd(items) => {
            if items.is_empty() {
                out.push_str("BIGAND([])");
                return;
            }
            out.push_str("BIGAND([\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_term(out, item, indent + 1, opts);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push_str("])");
        }
    }
}

fn write_atom(out: &mut String, atom: &AtomValue, opts: &PrintOptions) {
    match atom {
        AtomValue::TimePoint(t) => {
            out.push_str("TimePoint(");
            write_tick(out, *t, opts);
            out.push(')');
        }
        AtomValue::TimeInterval(from, to) => {
            out.push_str("TimeInterval(");
            write_tick(out, *from, opts);
            out.push_str(", ");
            write_tick(out, *to, opts);
            out.push(')');
        }
        AtomValue::TimeStamp(ert) => {
            out.push_str("TimeStamp(TERTP(");
            write_string(out, &ert.event);
            out.push_str(&format!(", {}))", ert.offset));
        }
        AtomValue::Event(name) => write_unary_string(out, "Event", name),
        AtomValue::Owner(name) => write_unary_string(out, "Owner", name),
        AtomValue::ComponentState(name) => write_unary_string(out, "ComponentState", name),
        AtomValue::Prob(p) => {
            out.push_str(&format!("Prob({})", p.value()));
        }
        AtomValue::OccupyPoint(x, y) => {
            out.push_str(&format!("OccupyPoint({x}, {y})"));
        }
        AtomValue::OccupyBox(x1, y1, x2, y2) => {
            out.push_str(&format!("OccupyBox({x1}, {y1}, {x2}, {y2})"));
        }
        AtomValue::OccupyCircle(cx, cy, r) => {
            out.push_str(&format!("OccupyCircle({cx}, {cy}, {r})"));
        }
        AtomValue::Edge(a, b) => {
            out.push_str("Edge(");
            write_string(out, a);
            out.push_str(", ");
            write_string(out, b);
            out.push(')');
        }
        AtomValue::Transition(source, event, target) => {
            out.push_str("Transition(");
            write_string(out, source);
            out.push_str(", ");
            write_string(out, event);
            out.push_str(", ");
            write_string(out, target);
            out.push(')');
        }
        AtomValue::True => out.push_str("TRUE"),
        AtomValue::False => out.push_str("FALSE"),
    }
}

fn write_unary_string(out: &mut String, ctor: &str, value: &str) {
    out.push_str(ctor);
    out.push('(');
    write_string(out, value);
    out.push(')');
}

fn write_tick(out: &mut String, t: Tick, opts: &PrintOptions) {
    match (opts.time_style, t.as_gmt()) {
        (TimeStyle::GmtClock, Some((h, m, s))) => {
            out.push_str(&format!("TStandardGMTDay({h}, {m}, {s})"));
        }
        _ => out.push_str(&t.to_string()),
    }
}

fn write_string(out: &mut String, value: &str) {
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out.push('"');
}
