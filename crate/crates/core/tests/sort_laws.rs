use std::collections::BTreeSet;

use hpsg_selres::sorts::{Sort, SortHierarchy};
use proptest::prelude::*;

/// Ancestors-or-self by walking parent links directly.
fn up_set(h: &SortHierarchy, s: Sort) -> BTreeSet<Sort> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![s];
    while let Some(x) = stack.pop() {
        if seen.insert(x) {
            stack.extend_from_slice(h.parents(x));
        }
    }
    seen
}

/// Maximal common lower bounds by exhaustive enumeration over all sorts.
fn mlb_oracle(h: &SortHierarchy, a: Sort, b: Sort) -> BTreeSet<Sort> {
    let below = |x: Sort, y: Sort| up_set(h, y).contains(&x);
    let common: Vec<Sort> = h.sorts().filter(|&s| below(a, s) && below(b, s)).collect();
    common
        .iter()
        .copied()
        .filter(|&s| !common.iter().any(|&t| t != s && below(t, s)))
        .collect()
}

#[test]
fn frozen_lower_bounds_match_enumeration() {
    let h = SortHierarchy::bundled();
    let s = |n| h.resolve(n).unwrap();
    assert_eq!(
        mlb_oracle(&h, s("man"), s("technician")),
        [s("male_tech")].into()
    );
    assert_eq!(mlb_oracle(&h, s("keybd"), s("edible")), BTreeSet::new());
    // frozen expectation, computed by the oracle above
    assert_eq!(
        h.glb(s("man"), s("technician")).unwrap(),
        Some(s("male_tech"))
    );
}

#[test]
fn subsumption_is_a_partial_order() {
    let h = SortHierarchy::bundled();
    for a in h.sorts() {
        assert!(h.subsumes(a, a));
        for b in h.sorts() {
            assert_eq!(h.subsumes(a, b), up_set(&h, b).contains(&a));
            if a != b && h.subsumes(a, b) {
                assert!(!h.subsumes(b, a), "antisymmetry");
            }
            for c in h.sorts() {
                if h.subsumes(a, b) && h.subsumes(b, c) {
                    assert!(h.subsumes(a, c), "transitivity");
                }
            }
        }
    }
}

#[test]
fn lower_bounds_laws() {
    let h = SortHierarchy::bundled();
    for a in h.sorts() {
        for b in h.sorts() {
            let mlb = h.maximal_lower_bounds(a, b);
            assert_eq!(
                mlb.iter().copied().collect::<BTreeSet<_>>(),
                mlb_oracle(&h, a, b)
            );
            for &m in &mlb {
                assert!(h.subsumes(a, m) && h.subsumes(b, m));
                for &n in &mlb {
                    assert!(m == n || !h.subsumes(m, n));
                }
            }
            assert_eq!(h.glb(a, b).unwrap(), h.glb(b, a).unwrap());
            if h.subsumes(a, b) {
                assert_eq!(h.glb(a, b).unwrap(), Some(b));
            }
        }
    }
}

#[test]
fn glb_fold_order_invariant_on_all_triples() {
    let h = SortHierarchy::bundled();
    let meet = |x: Option<Sort>, y: Option<Sort>| match (x, y) {
        (Some(x), Some(y)) => h.glb(x, y).unwrap(),
        _ => None,
    };
    for a in h.sorts() {
        for b in h.sorts() {
            for c in h.sorts() {
                let left = meet(meet(Some(a), Some(b)), Some(c));
                let right = meet(Some(a), meet(Some(b), Some(c)));
                let mid = meet(meet(Some(a), Some(c)), Some(b));
                assert_eq!(left, right, "{a:?} {b:?} {c:?}");
                assert_eq!(left, mid);
            }
        }
    }
}

/// Random DAG: sort i picks parents among sorts 0..i, sort 0 is the root.
fn random_hierarchy() -> impl Strategy<Value = SortHierarchy> {
    (2usize..14)
        .prop_flat_map(|n| {
            proptest::collection::vec(
                proptest::collection::vec(any::<prop::sample::Index>(), 1..3),
                n - 1,
            )
        })
        .prop_map(|picks| {
            let mut text = String::from("s0:\n");
            for (i, ps) in picks.iter().enumerate() {
                let me = i + 1;
                let mut parents: Vec<usize> = ps.iter().map(|p| p.index(me)).collect();
                parents.sort();
                parents.dedup();
                let names: Vec<String> = parents.iter().map(|p| format!("s{p}")).collect();
                text.push_str(&format!("s{me}: {}\n", names.join(", ")));
            }
            text.parse().expect("generated hierarchy is valid")
        })
}

proptest! {
    #[test]
    fn random_hierarchies_obey_order_laws(h in random_hierarchy()) {
        for a in h.sorts() {
            prop_assert!(h.subsumes(h.root(), a));
            for b in h.sorts() {
                prop_assert_eq!(h.subsumes(a, b), up_set(&h, b).contains(&a));
                let mlb: BTreeSet<Sort> = h.maximal_lower_bounds(a, b).into_iter().collect();
                prop_assert_eq!(&mlb, &mlb_oracle(&h, a, b));
                prop_assert_eq!(mlb, h.maximal_lower_bounds(b, a).into_iter().collect::<BTreeSet<_>>());
            }
        }
        // bcpo check agrees with the definition
        let any_ambiguous = h.sorts().any(|a| h.sorts().any(|b| mlb_oracle(&h, a, b).len() > 1));
        prop_assert_eq!(h.check_bcpo().is_err(), any_ambiguous);
    }
}
