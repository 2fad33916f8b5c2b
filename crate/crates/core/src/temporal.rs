//! Flattening models into time-guarded facts.
//!
//! A [`TimedFact`] is one occupancy or edge atom together with the time
//! guard and owner in force where it appeared. Flattening walks the
//! implication structure of a model; abstraction (widening guards,
//! folding point facts into intervals) then happens on the flat form,
//! where it is safe by construction.

use thiserror::Error;

use crate::geometry::Region;
use crate::model::{AtomValue, EventRelativeTime, Invariant, Tick};

/// When a fact holds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TimeGuard {
    /// At one tick exactly.
    Point(Tick),
    /// At every tick of a closed interval.
    Interval(Tick, Tick),
    /// At every tick.
    Always,
    /// At a tick known only relative to a trigger event; matches no
    /// concrete tick until the trigger is resolved.
    EventRelative(EventRelativeTime),
}

impl TimeGuard {
    /// Whether the guard covers the concrete tick `t`.
    pub fn contains(&self, t: Tick) -> bool {
        match self {
            TimeGuard::Point(p) => *p == t,
            TimeGuard::Interval(from, to) => *from <= t && t <= *to,
            TimeGuard::Always => true,
            TimeGuard::EventRelative(_) => false,
        }
    }
}

/// One atomic fact with its temporal and ownership context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedFact {
    pub guard: TimeGuard,
    pub payload: AtomValue,
    pub owner: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    /// The model places facts under a connective that has no sound flat
    /// form: negation, disjunction, or an implication whose antecedent is
    /// not a time, owner or `TRUE` guard.
    #[error("cannot flatten: {0} above facts has no flat form")]
    UnsupportedFragment(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoldError {
    #[error("no point-timed facts owned by `{0}`")]
    EmptySelection(String),
    #[error("selected facts must be point-timed")]
    NotPointTimed,
    #[error("selected facts must carry occupancy payloads")]
    NotOccupancy,
}

/// Extracts every occupancy and edge fact of the model, each with the
/// innermost time guard and owner above it. Atoms of other kinds carry no
/// spatial information and are skipped. Flattening is stable under
/// [`normalize`](crate::model::normalize).
pub fn flatten(model: &Invariant) -> Result<Vec<TimedFact>, FlattenError> {
    let mut facts = Vec::new();
    flatten_rec(model, &TimeGuard::Always, None, &mut facts)?;
    Ok(facts)
}

fn flatten_rec(
    term: &Invariant,
    guard: &TimeGuard,
    owner: Option<&str>,
    out: &mut Vec<TimedFact>,
) -> Result<(), FlattenError> {
    match term {
        Invariant::Atom(atom) => {
            if atom.is_occupancy() || matches!(atom, AtomValue::Edge(..)) {
                out.push(TimedFact {
                    guard: guard.clone(),
                    payload: atom.clone(),
                    owner: owner.map(str::to_string),
                });
            }
            Ok(())
        }
        Invariant::And(l, r) => {
            flatten_rec(l, guard, owner, out)?;
            flatten_rec(r, guard, owner, out)
        }
        Invariant::BigAnd(items) => {
            for item in items {
                flatten_rec(item, guard, owner, out)?;
            }
            Ok(())
        }
        Invariant::Implies(antecedent, consequent) => match antecedent.as_ref() {
            Invariant::Atom(AtomValue::TimePoint(t)) => {
                flatten_rec(consequent, &TimeGuard::Point(*t), owner, out)
            }
            Invariant::Atom(AtomValue::TimeInterval(from, to)) => {
                flatten_rec(consequent, &TimeGuard::Interval(*from, *to), owner, out)
            }
            Invariant::Atom(AtomValue::TimeStamp(ert)) => {
                flatten_rec(consequent, &TimeGuard::EventRelative(ert.clone()), owner, out)
            }
            Invariant::Atom(AtomValue::Owner(name)) => {
                flatten_rec(consequent, guard, Some(name), out)
            }
            Invariant::Atom(AtomValue::True) => flatten_rec(consequent, guard, owner, out),
            _ => {
                if has_facts(consequent) {
                    Err(FlattenError::UnsupportedFragment(
                        "an implication with a non-guard antecedent".to_string(),
                    ))
                } else {
                    Ok(())
                }
            }
        },
        Invariant::Not(body) => {
            if has_facts(body) {
                Err(FlattenError::UnsupportedFragment("negation".to_string()))
            } else {
                Ok(())
            }
        }
        Invariant::Or(l, r) => {
            if has_facts(l) || has_facts(r) {
                Err(FlattenError::UnsupportedFragment("disjunction".to_string()))
            } else {
                Ok(())
            }
        }
    }
}

fn has_facts(term: &Invariant) -> bool {
    match term {
        Invariant::Atom(atom) => atom.is_occupancy() || matches!(atom, AtomValue::Edge(..)),
        Invariant::Not(t) => has_facts(t),
        Invariant::And(l, r) | Invariant::Or(l, r) | Invariant::Implies(l, r) => {
            has_facts(l) || has_facts(r)
        }
        Invariant::BigAnd(items) => items.iter().any(has_facts),
    }
}

/// The payloads of all facts whose guard covers tick `t`, in fact order.
pub fn slice_at(facts: &[TimedFact], t: Tick) -> Vec<AtomValue> {
    facts.iter().filter(|f| f.guard.contains(t)).map(|f| f.payload.clone()).collect()
}

/// Abstracts the point-timed occupancy facts of one owner into a single
/// interval fact: the guard spans the earliest to the latest tick and the
/// payload is the bounding box of all payloads. The result over-approximates
/// the selection, so safety verdicts on it transfer back.
pub fn fold_points_to_interval(facts: &[TimedFact], owner: &str) -> Result<TimedFact, FoldError> {
    let selected: Vec<&TimedFact> =
        facts.iter().filter(|f| f.owner.as_deref() == Some(owner)).collect();
    if selected.is_empty() {
        return Err(FoldError::EmptySelection(owner.to_string()));
    }
    let mut t_min = Tick::MAX;
    let mut t_max = Tick(0);
    let mut bounds: Option<(i64, i64, i64, i64)> = None;
    for fact in selected {
        let t = match fact.guard {
            TimeGuard::Point(t) => t,
            _ => return Err(FoldError::NotPointTimed),
        };
        t_min = t_min.min(t);
        t_max = t_max.max(t);
        let region = Region::from_atom(&fact.payload).ok_or(FoldError::NotOccupancy)?;
        let (x1, y1, x2, y2) = region.bbox();
        bounds = Some(match bounds {
            None => (x1, y1, x2, y2),
            Some((bx1, by1, bx2, by2)) => {
                (bx1.min(x1), by1.min(y1), bx2.max(x2), by2.max(y2))
            }
        });
    }
    let (x1, y1, x2, y2) = bounds.expect("selection is non-empty");
    Ok(TimedFact {
        guard: TimeGuard::Interval(t_min, t_max),
        payload: AtomValue::OccupyBox(x1, y1, x2, y2),
        owner: Some(owner.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_fact(owner: &str, t: u64, atom: AtomValue) -> TimedFact {
        TimedFact { guard: TimeGuard::Point(Tick(t)), payload: atom, owner: Some(owner.into()) }
    }

    #[test]
    fn flatten_records_innermost_guard_and_owner() {
        let model = Invariant::owned(
            "a",
            Invariant::during(
                Tick(10),
                Tick(20),
                Invariant::BigAnd(vec![
                    Invariant::Atom(AtomValue::OccupyBox(0, 0, 1, 1)),
                    Invariant::at_tick(Tick(15), Invariant::Atom(AtomValue::OccupyPoint(5, 5))),
                    Invariant::owned("b", Invariant::Atom(AtomValue::Edge("x".into(), "y".into()))),
                ]),
            ),
        );
        let facts = flatten(&model).unwrap();
        assert_eq!(facts.len(), 3);
        assert_eq!(facts[0].guard, TimeGuard::Interval(Tick(10), Tick(20)));
        assert_eq!(facts[0].owner.as_deref(), Some("a"));
        assert_eq!(facts[1].guard, TimeGuard::Point(Tick(15)));
        assert_eq!(facts[2].owner.as_deref(), Some("b"));
        assert_eq!(facts[2].guard, TimeGuard::Interval(Tick(10), Tick(20)));
    }

    #[test]
    fn flatten_skips_non_spatial_atoms() {
        let model = Invariant::BigAnd(vec![
            Invariant::Atom(AtomValue::Event("alarm".into())),
            Invariant::Atom(AtomValue::ComponentState("idle".into())),
            Invariant::Atom(AtomValue::TimePoint(Tick(3))),
            Invariant::Atom(AtomValue::True),
        ]);
        assert_eq!(flatten(&model).unwrap(), vec![]);
    }

    #[test]
    fn flatten_rejects_facts_under_negation_or_disjunction() {
        let occupied = Invariant::Atom(AtomValue::OccupyPoint(0, 0));
        assert!(matches!(
            flatten(&Invariant::not(occupied.clone())),
            Err(FlattenError::UnsupportedFragment(_))
        ));
        assert!(matches!(
            flatten(&Invariant::or(occupied.clone(), Invariant::truth())),
            Err(FlattenError::UnsupportedFragment(_))
        ));
        assert!(matches!(
            flatten(&Invariant::implies(Invariant::Atom(AtomValue::Event("e".into())), occupied)),
            Err(FlattenError::UnsupportedFragment(_))
        ));
    }

    #[test]
    fn flatten_tolerates_negation_over_non_facts() {
        let model = Invariant::not(Invariant::Atom(AtomValue::Event("alarm".into())));
        assert_eq!(flatten(&model).unwrap(), vec![]);
    }

    #[test]
    fn event_relative_guards_match_no_tick() {
        let model = Invariant::at_event_offset(
            "ConvAct",
            Tick(5),
            Invariant::Atom(AtomValue::OccupyPoint(1, 1)),
        );
        let facts = flatten(&model).unwrap();
        assert_eq!(facts.len(), 1);
        for t in [0u64, 5, 100] {
            assert!(!facts[0].guard.contains(Tick(t)));
        }
    }

    #[test]
    fn slice_respects_interval_boundaries() {
        let facts = vec![
            TimedFact {
                guard: TimeGuard::Interval(Tick(10), Tick(20)),
                payload: AtomValue::OccupyPoint(0, 0),
                owner: None,
            },
            TimedFact {
                guard: TimeGuard::Always,
                payload: AtomValue::Edge("a".into(), "b".into()),
                owner: None,
            },
        ];
        assert_eq!(slice_at(&facts, Tick(9)).len(), 1);
        assert_eq!(slice_at(&facts, Tick(10)).len(), 2);
        assert_eq!(slice_at(&facts, Tick(20)).len(), 2);
        assert_eq!(slice_at(&facts, Tick(21)).len(), 1);
    }

    #[test]
    fn fold_spans_ticks_and_bounds_payloads() {
        let facts = vec![
            point_fact("w", 1, AtomValue::OccupyBox(0, 0, 2, 2)),
            point_fact("w", 3, AtomValue::OccupyBox(4, 1, 6, 3)),
            point_fact("other", 9, AtomValue::OccupyBox(50, 50, 60, 60)),
        ];
        let folded = fold_points_to_interval(&facts, "w").unwrap();
        assert_eq!(folded.guard, TimeGuard::Interval(Tick(1), Tick(3)));
        assert_eq!(folded.payload, AtomValue::OccupyBox(0, 0, 6, 3));
        assert_eq!(folded.owner.as_deref(), Some("w"));
    }

    #[test]
    fn fold_bounds_circles_by_bounding_box() {
        let facts = vec![point_fact("w", 5, AtomValue::OccupyCircle(10, 10, 3))];
        let folded = fold_points_to_interval(&facts, "w").unwrap();
        assert_eq!(folded.guard, TimeGuard::Interval(Tick(5), Tick(5)));
        assert_eq!(folded.payload, AtomValue::OccupyBox(7, 7, 13, 13));
    }

    #[test]
    fn fold_rejects_bad_selections() {
        assert_eq!(
            fold_points_to_interval(&[], "w"),
            Err(FoldError::EmptySelection("w".to_string()))
        );
        let interval = vec![TimedFact {
            guard: TimeGuard::Interval(Tick(0), Tick(5)),
            payload: AtomValue::OccupyPoint(0, 0),
            owner: Some("w".into()),
        }];
        assert_eq!(fold_points_to_interval(&interval, "w"), Err(FoldError::NotPointTimed));
        let edge = vec![point_fact("w", 1, AtomValue::Edge("a".into(), "b".into()))];
        assert_eq!(fold_points_to_interval(&edge, "w"), Err(FoldError::NotOccupancy));
    }
}
