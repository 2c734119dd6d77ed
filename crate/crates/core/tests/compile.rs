use std::collections::BTreeMap;

use hpsg_selres::grammar::{feat, Grammar, Method, Sign};
use hpsg_selres::sorts::{Sort, SortHierarchy};
use hpsg_selres::tfs::NodeId;

/// Index slots of a lexical sign: its own index and each nucleus role.
fn slots(sign: &Sign) -> BTreeMap<String, NodeId> {
    let fs = sign.fs();
    let mut out = BTreeMap::new();
    if let Some(i) = fs.get(&[feat::CONT, feat::INDEX]) {
        out.insert("INDEX".to_string(), i);
    }
    if let Some(nuc) = fs.get(&[feat::CONT, feat::NUC]) {
        for (role, n) in sign.qfpsoa(nuc).unwrap().1 {
            out.insert(role.to_string(), n);
        }
    }
    out
}

/// The sort a slot is held to under the BG method: the meet of every
/// single-role condition on it.
fn bg_restriction(sign: &Sign, node: NodeId, h: &SortHierarchy) -> Sort {
    let mut sort = h.root();
    for q in sign.bg().into_iter().chain(sign.restr()) {
        let (rel, roles) = sign.qfpsoa(q).unwrap();
        if let ([(_, filler)], Some(s)) = (roles.as_slice(), h.get(rel)) {
            if *filler == node {
                sort = h
                    .glb(sort, s)
                    .unwrap()
                    .expect("lexical conditions are consistent");
            }
        }
    }
    sort
}

#[test]
fn both_methods_encode_the_same_restrictions() {
    let g = Grammar::bundled();
    let h = &g.hierarchy;
    for entry in g.lexicon.entries() {
        let bg = g.compile(entry, Method::Bg).unwrap();
        let index = g.compile(entry, Method::Index).unwrap();
        let (bg_slots, index_slots) = (slots(&bg), slots(&index));
        assert_eq!(
            bg_slots.keys().collect::<Vec<_>>(),
            index_slots.keys().collect::<Vec<_>>(),
            "{}",
            entry.key()
        );
        for (slot, &n) in &bg_slots {
            // BG indices are bare, index-method indices carry the sort
            assert_eq!(
                bg.fs().ty(n).as_sort(),
                Some(h.root()),
                "{} {slot}",
                entry.key()
            );
            let want = bg_restriction(&bg, n, h);
            let got = index.fs().ty(index_slots[slot]).as_sort().unwrap();
            assert_eq!(h.name(got), h.name(want), "{} {slot}", entry.key());
        }
        // the index method leaves no sortal conditions behind
        assert!(index
            .bg()
            .iter()
            .chain(index.restr().iter())
            .all(|&q| h.get(sign_rel(&index, q)).is_none()));
    }
}

fn sign_rel(sign: &Sign, q: NodeId) -> &str {
    sign.qfpsoa(q).unwrap().0
}

#[test]
fn proper_noun_conditions_per_method() {
    let g = Grammar::bundled();
    let tom = &g.lexicon.lookup("tom")[0];
    let bg = g.compile(tom, Method::Bg).unwrap();
    let names: Vec<&str> = bg.bg().iter().map(|&q| sign_rel(&bg, q)).collect();
    assert_eq!(names, vec!["naming", "man"]);
    let index = g.compile(tom, Method::Index).unwrap();
    let names: Vec<&str> = index.bg().iter().map(|&q| sign_rel(&index, q)).collect();
    assert_eq!(names, vec!["naming"]);
    let i = index.index().unwrap();
    assert_eq!(index.fs().ty(i).as_sort(), g.hierarchy.get("man"));
}
