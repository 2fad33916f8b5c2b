//! Structural properties of terms: normalization, owner filtering,
//! and time conversions.

mod common;

use std::collections::BTreeSet;

use common::{random_payload, random_term, rng};
use proptest::prelude::*;
use stmc::model::{
    filter_by_owner, list_owners, normalize, AtomValue, Invariant, Tick, TICKS_PER_DAY,
};

#[test]
fn normalize_is_idempotent_on_random_terms() {
    let mut rng = rng(0x0d01);
    for case in 0..2_000 {
        let term = random_term(&mut rng, 6);
        let once = normalize(term);
        let twice = normalize(once.clone());
        assert_eq!(once, twice, "case {case}");
    }
}

#[test]
fn normalize_sorts_boxes_and_intervals() {
    let term = Invariant::and(
        Invariant::Atom(AtomValue::OccupyBox(9, 8, 1, 2)),
        Invariant::Atom(AtomValue::TimeInterval(Tick(50), Tick(10))),
    );
    let normalized = normalize(term);
    let atoms = collect_atoms(&normalized);
    assert!(atoms.contains(&AtomValue::OccupyBox(1, 2, 9, 8)));
    assert!(atoms.contains(&AtomValue::TimeInterval(Tick(10), Tick(50))));
}

fn collect_atoms(term: &Invariant) -> Vec<AtomValue> {
    fn walk(term: &Invariant, out: &mut Vec<AtomValue>) {
        match term {
            Invariant::Atom(a) => out.push(a.clone()),
            Invariant::Not(t) => walk(t, out),
            Invariant::And(a, b) | Invariant::Or(a, b) | Invariant::Implies(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Invariant::BigAnd(ts) => ts.iter().for_each(|t| walk(t, out)),
        }
    }
    let mut out = Vec::new();
    walk(term, &mut out);
    out
}

/// Models built as one block per owner: filtering isolates each block
/// (other owners' content never leaks in), and owners the model never
/// mentions get `True`.
#[test]
fn filter_isolates_each_owners_block() {
    let mut rng = rng(0x0d02);
    for case in 0..500 {
        let owners = ["Robot1_Space", "Robot2_Space", "Store_Space"];
        let payloads: Vec<Invariant> =
            owners.iter().map(|_| random_payload(&mut rng, 4)).collect();
        let model = Invariant::BigAnd(
            owners
                .iter()
                .zip(&payloads)
                .map(|(o, p)| Invariant::owned(o, p.clone()))
                .collect(),
        );
        for (owner, payload) in owners.iter().zip(&payloads) {
            let from_model = filter_by_owner(&model, owner);
            let from_block = filter_by_owner(&Invariant::owned(owner, payload.clone()), owner);
            assert_eq!(from_model, from_block, "case {case}, owner {owner}");

            let payload_atoms = collect_atoms(payload);
            for atom in collect_atoms(&from_model) {
                // A vacuous `True` appears when the block melts away
                // entirely; anything else must come from the payload.
                assert!(
                    atom == AtomValue::True || payload_atoms.contains(&atom),
                    "case {case}: {atom:?} not from {owner}'s block"
                );
            }
        }
        assert_eq!(filter_by_owner(&model, "Ghost_Space"), Invariant::truth(), "case {case}");
        assert_eq!(
            list_owners(&model),
            owners.iter().map(|o| o.to_string()).collect::<BTreeSet<_>>(),
            "case {case}"
        );
    }
}

#[test]
fn filter_drops_unowned_content() {
    let mut rng = rng(0x0d03);
    for _ in 0..500 {
        let bare = random_payload(&mut rng, 4);
        assert_eq!(filter_by_owner(&bare, "anyone"), Invariant::truth());
    }
}

#[test]
fn innermost_owner_guard_wins() {
    let inner = Invariant::owned("B", Invariant::Atom(AtomValue::OccupyPoint(1, 1)));
    let term = Invariant::owned("A", inner);

    let for_b = filter_by_owner(&term, "B");
    assert!(collect_atoms(&for_b).contains(&AtomValue::OccupyPoint(1, 1)));

    let for_a = filter_by_owner(&term, "A");
    assert!(!collect_atoms(&for_a).contains(&AtomValue::OccupyPoint(1, 1)));
}

#[test]
fn filtered_result_never_exposes_owner_guards() {
    let mut rng = rng(0x0d04);
    for _ in 0..300 {
        let model = Invariant::BigAnd(vec![
            Invariant::owned("A", random_payload(&mut rng, 3)),
            Invariant::owned("B", random_payload(&mut rng, 3)),
        ]);
        let filtered = filter_by_owner(&model, "A");
        assert!(
            !collect_atoms(&filtered).iter().any(|a| matches!(a, AtomValue::Owner(_))),
            "guards must be consumed: {filtered:?}"
        );
    }
}

proptest! {
    #[test]
    fn gmt_round_trips_for_every_second_of_day(s in 0u64..TICKS_PER_DAY) {
        let tick = Tick(s);
        let (h, m, sec) = tick.as_gmt().unwrap();
        prop_assert_eq!(Tick::from_gmt(h, m, sec), Some(tick));
    }

    #[test]
    fn ticks_at_or_past_midnight_have_no_clock_form(extra in 0u64..1_000_000) {
        prop_assert_eq!(Tick(TICKS_PER_DAY + extra).as_gmt(), None);
    }

    #[test]
    fn gmt_rejects_out_of_range_fields(h in 24u32..100, m in 60u32..100, s in 60u32..100) {
        prop_assert_eq!(Tick::from_gmt(h, 0, 0), None);
        prop_assert_eq!(Tick::from_gmt(0, m, 0), None);
        prop_assert_eq!(Tick::from_gmt(0, 0, s), None);
    }
}

#[test]
fn list_owners_sees_through_all_connectives() {
    let term = Invariant::implies(
        Invariant::Atom(AtomValue::Owner("A".into())),
        Invariant::BigAnd(vec![
            Invariant::not(Invariant::Atom(AtomValue::Owner("B".into()))),
            Invariant::or(
                Invariant::Atom(AtomValue::Owner("C".into())),
                Invariant::truth(),
            ),
        ]),
    );
    assert_eq!(
        list_owners(&term),
        BTreeSet::from(["A".to_string(), "B".to_string(), "C".to_string()])
    );
}
