//! The invariant term language.
//!
//! A plant model is an [`Invariant`]: a tree of logical connectives whose
//! leaves are [`AtomValue`]s describing time, space, ownership, events and
//! component state. Terms are immutable after construction and cheap to
//! share between threads. Structural equality is derived, so two terms are
//! equal exactly when their trees are equal; [`normalize`] brings terms
//! into a canonical shape first.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Seconds in one GMT day; ticks at or above this value have no clock form.
pub const TICKS_PER_DAY: u64 = 86_400;

/// Discrete model time. One tick is one second when the day clock is in
/// use, or one abstract step for trajectory models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tick(pub u64);

impl Tick {
    /// Sentinel used for unbounded interval ends.
    pub const MAX: Tick = Tick(u64::MAX);

    /// Converts a GMT wall-clock time of day into the tick count since
    /// midnight. Returns `None` when a field is out of range.
    pub fn from_gmt(hours: u32, minutes: u32, seconds: u32) -> Option<Tick> {
        if hours > 23 || minutes > 59 || seconds > 59 {
            return None;
        }
        Some(Tick(u64::from(hours) * 3600 + u64::from(minutes) * 60 + u64::from(seconds)))
    }

    /// The (hours, minutes, seconds) clock form, when the tick falls within
    /// one day.
    pub fn as_gmt(self) -> Option<(u32, u32, u32)> {
        if self.0 >= TICKS_PER_DAY {
            return None;
        }
        let h = (self.0 / 3600) as u32;
        let m = (self.0 % 3600 / 60) as u32;
        let s = (self.0 % 60) as u32;
        Some((h, m, s))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn saturating_add(self, rhs: u64) -> Tick {
        Tick(self.0.saturating_add(rhs))
    }
}

impl fmt::Display for Tick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Tick {
    fn from(value: u64) -> Tick {
        Tick(value)
    }
}

/// A probability in `[0, 1]`. The wrapper keeps `AtomValue` hashable and
/// structurally comparable; values are compared bit for bit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    /// Rejects values outside `[0, 1]` and non-finite values.
    pub fn new(p: f64) -> Option<Probability> {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            Some(Probability(p))
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Probability {
    fn eq(&self, other: &Probability) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Probability {}

impl std::hash::Hash for Probability {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

/// A time point given relative to a named trigger event: the moment the
/// event fires plus a non-negative offset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventRelativeTime {
    pub event: String,
    pub offset: Tick,
}

/// Atomic facts: the leaves of an invariant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AtomValue {
    /// A single tick.
    TimePoint(Tick),
    /// A closed tick interval; kept corner-sorted by [`normalize`].
    TimeInterval(Tick, Tick),
    /// A point in time known only relative to a trigger event.
    TimeStamp(EventRelativeTime),
    /// A named event occurrence.
    Event(String),
    /// Names the component the guarded subterm belongs to.
    Owner(String),
    /// A probability annotation.
    Prob(Probability),
    /// A named state of a component.
    ComponentState(String),
    /// Occupancy of a single grid point.
    OccupyPoint(i64, i64),
    /// Occupancy of an axis-aligned box, both boundaries included.
    OccupyBox(i64, i64, i64, i64),
    /// Occupancy of a circle: all integer points within `r` of the centre.
    OccupyCircle(i64, i64, i64),
    /// An undirected graph edge between two named nodes.
    Edge(String, String),
    /// A transition `(source state, event, target state)`.
    Transition(String, String, String),
    True,
    False,
}

impl AtomValue {
    /// True for the three occupancy constructors.
    pub fn is_occupancy(&self) -> bool {
        matches!(
            self,
            AtomValue::OccupyPoint(..) | AtomValue::OccupyBox(..) | AtomValue::OccupyCircle(..)
        )
    }

    /// True for atoms that denote time: points, intervals and event
    /// relative stamps.
    pub fn is_time(&self) -> bool {
        matches!(
            self,
            AtomValue::TimePoint(_) | AtomValue::TimeInterval(..) | AtomValue::TimeStamp(_)
        )
    }
}

/// A plant model term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Invariant {
    And(Box<Invariant>, Box<Invariant>),
    Or(Box<Invariant>, Box<Invariant>),
    Not(Box<Invariant>),
    Implies(Box<Invariant>, Box<Invariant>),
    BigAnd(Vec<Invariant>),
    Atom(AtomValue),
}

impl Invariant {
    pub fn and(left: Invariant, right: Invariant) -> Invariant {
        Invariant::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Invariant, right: Invariant) -> Invariant {
        Invariant::Or(Box::new(left), Box::new(right))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(term: Invariant) -> Invariant {
        Invariant::Not(Box::new(term))
    }

    pub fn implies(antecedent: Invariant, consequent: Invariant) -> Invariant {
        Invariant::Implies(Box::new(antecedent), Box::new(consequent))
    }

    pub fn truth() -> Invariant {
        Invariant::Atom(AtomValue::True)
    }

    /// Guards `body` with ownership by `owner`.
    pub fn owned(owner: &str, body: Invariant) -> Invariant {
        Invariant::implies(Invariant::Atom(AtomValue::Owner(owner.to_string())), body)
    }

    /// Guards `body` with the single tick `t`.
    pub fn at_tick(t: Tick, body: Invariant) -> Invariant {
        Invariant::implies(Invariant::Atom(AtomValue::TimePoint(t)), body)
    }

    /// Guards `body` with the closed interval `[from, to]`.
    pub fn during(from: Tick, to: Tick, body: Invariant) -> Invariant {
        Invariant::implies(Invariant::Atom(AtomValue::TimeInterval(from, to)), body)
    }

    /// Guards `body` with a time known only relative to `event`.
    pub fn at_event_offset(event: &str, offset: Tick, body: Invariant) -> Invariant {
        Invariant::implies(
            Invariant::Atom(AtomValue::TimeStamp(EventRelativeTime {
                event: event.to_string(),
                offset,
            })),
            body,
        )
    }
}

// ============================================================================
// Normalization
// ============================================================================

/// Brings a term into canonical shape.
///
/// Box corners and interval endpoints are sorted, directly nested `BigAnd`s
/// are spliced into their parent in order, `Implies(True, x)` becomes `x`,
/// and `And`/`Or` absorb `True`/`False` children. The function is
/// idempotent and preserves ground semantics.
pub fn normalize(term: Invariant) -> Invariant {
    match term {
        Invariant::Atom(a) => Invariant::Atom(normalize_atom(a)),
        Invariant::Not(t) => Invariant::not(normalize(*t)),
        Invariant::And(l, r) => {
            let l = normalize(*l);
            let r = normalize(*r);
            match (&l, &r) {
                (Invariant::Atom(AtomValue::False), _) | (_, Invariant::Atom(AtomValue::False)) => {
                    Invariant::Atom(AtomValue::False)
                }
                (Invariant::Atom(AtomValue::True), _) => r,
                (_, Invariant::Atom(AtomValue::True)) => l,
                _ => Invariant::and(l, r),
            }
        }
        Invariant::Or(l, r) => {
            let l = normalize(*l);
            let r = normalize(*r);
            match (&l, &r) {
                (Invariant::Atom(AtomValue::True), _) | (_, Invariant::Atom(AtomValue::True)) => {
                    Invariant::Atom(AtomValue::True)
                }
                (Invariant::Atom(AtomValue::False), _) => r,
                (_, Invariant::Atom(AtomValue::False)) => l,
                _ => Invariant::or(l, r),
            }
        }
        Invariant::Implies(a, c) => {
            let a = normalize(*a);
            let c = normalize(*c);
            if a == Invariant::Atom(AtomValue::True) {
                c
            } else {
                Invariant::implies(a, c)
            }
        }
        Invariant::BigAnd(items) => {
            let mut flat = Vec::with_capacity(items.len());
            for item in items {
                match normalize(item) {
                    Invariant::BigAnd(nested) => flat.extend(nested),
                    other => flat.push(other),
                }
            }
            Invariant::BigAnd(flat)
        }
    }
}

fn normalize_atom(atom: AtomValue) -> AtomValue {
    match atom {
        AtomValue::OccupyBox(x1, y1, x2, y2) => {
            AtomValue::OccupyBox(x1.min(x2), y1.min(y2), x1.max(x2), y1.max(y2))
        }
        AtomValue::TimeInterval(a, b) => AtomValue::TimeInterval(a.min(b), a.max(b)),
        other => other,
    }
}

// ============================================================================
// Ownership
// ============================================================================

/// Projects a model onto the parts owned by `owner`.
///
/// An implication whose antecedent is exactly an `Owner` atom transfers
/// ownership of its consequent; nested guards rebind, so the innermost
/// owner wins. Content under no owner guard at all belongs to nobody and
/// is dropped. The result never contains an `Owner` atom. When nothing is
/// owned by `owner` the result is the `True` atom.
pub fn filter_by_owner(term: &Invariant, owner: &str) -> Invariant {
    filter_rec(term, owner, false).unwrap_or(Invariant::Atom(AtomValue::True))
}

fn filter_rec(term: &Invariant, owner: &str, owned: bool) -> Option<Invariant> {
    match term {
        Invariant::Atom(AtomValue::Owner(_)) => None,
        Invariant::Atom(a) => owned.then(|| Invariant::Atom(a.clone())),
        Invariant::Implies(antecedent, consequent) => {
            if let Invariant::Atom(AtomValue::Owner(name)) = antecedent.as_ref() {
                filter_rec(consequent, owner, name == owner)
            } else {
                let body = filter_rec(consequent, owner, owned)?;
                Some(Invariant::implies(antecedent.as_ref().clone(), body))
            }
        }
        Invariant::And(l, r) => {
            combine(filter_rec(l, owner, owned), filter_rec(r, owner, owned), Invariant::and)
        }
        Invariant::Or(l, r) => {
            combine(filter_rec(l, owner, owned), filter_rec(r, owner, owned), Invariant::or)
        }
        Invariant::Not(t) => filter_rec(t, owner, owned).map(Invariant::not),
        Invariant::BigAnd(items) => {
            let kept: Vec<Invariant> =
                items.iter().filter_map(|item| filter_rec(item, owner, owned)).collect();
            match kept.len() {
                0 => None,
                1 => Some(kept.into_iter().next().unwrap()),
                _ => Some(Invariant::BigAnd(kept)),
            }
        }
    }
}

fn combine(
    left: Option<Invariant>,
    right: Option<Invariant>,
    ctor: fn(Invariant, Invariant) -> Invariant,
) -> Option<Invariant> {
    match (left, right) {
        (Some(l), Some(r)) => Some(ctor(l, r)),
        (Some(one), None) | (None, Some(one)) => Some(one),
        (None, None) => None,
    }
}

/// All owner names mentioned anywhere in the term, sorted.
pub fn list_owners(term: &Invariant) -> BTreeSet<String> {
    let mut owners = BTreeSet::new();
    collect_owners(term, &mut owners);
    owners
}

fn collect_owners(term: &Invariant, out: &mut BTreeSet<String>) {
    match term {
        Invariant::Atom(AtomValue::Owner(name)) => {
            out.insert(name.clone());
        }
        Invariant::Atom(_) => {}
        Invariant::Not(t) => collect_owners(t, out),
        Invariant::And(l, r) | Invariant::Or(l, r) | Invariant::Implies(l, r) => {
            collect_owners(l, out);
            collect_owners(r, out);
        }
        Invariant::BigAnd(items) => {
            for item in items {
                collect_owners(item, out);
            }
        }
    }
}
