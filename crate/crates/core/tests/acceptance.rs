//! Runs each acceptance criterion and prints one PASS/FAIL line per
//! criterion. Exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use hpsg_selres::parser::{ParseCounts, ReadingId};
use hpsg_selres::selres::{self, ConstraintAtom, SolveResult, Var};
use hpsg_selres::sorts::{Sort, SortHierarchy};
use hpsg_selres::tfs::{FeatureStructure, NodeType, Workspace};
use hpsg_selres::{tokenize, Grammar, Method, Parser};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<(), String>;
type Criterion = (&'static str, fn(&Grammar) -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sorts(h: &SortHierarchy, names: &[&str]) -> Vec<Sort> {
    names.iter().map(|n| h.resolve(n).unwrap()).collect()
}

fn assignment(h: &SortHierarchy, pairs: &[(usize, &str)]) -> BTreeMap<Var, Sort> {
    pairs
        .iter()
        .map(|&(v, s)| (Var(v), h.resolve(s).unwrap()))
        .collect()
}

fn counts(p: &Parser, s: &str, m: Method) -> ParseCounts {
    p.count_parses(&tokenize(s), m).unwrap()
}

fn keyboard_rejected_both_ways(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let h = &g.hierarchy;
    let t = tokenize("tom ate a keyboard");
    let bg = p.parse(&t, Method::Bg).unwrap();
    ensure(bg.readings.len() == 1, || {
        format!("bg parses: {}", bg.readings.len())
    })?;
    match selres::check_reading(&bg.readings[0], h) {
        SolveResult::Violation {
            var, conflicting, ..
        } => {
            ensure(var == Var(2), || format!("violation on {var}"))?;
            ensure(conflicting == sorts(h, &["edible", "keybd"]), || {
                format!("conflict {conflicting:?}")
            })?;
        }
        r => return Err(format!("bg check: {r:?}")),
    }
    let index = p.parse(&t, Method::Index).unwrap();
    ensure(index.readings.is_empty(), || {
        format!("index parses: {}", index.readings.len())
    })
}

fn banana_residual_constraints(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let h = &g.hierarchy;
    let out = p.parse(&tokenize("tom ate a banana"), Method::Bg).unwrap();
    ensure(out.readings.len() == 1, || {
        format!("parses: {}", out.readings.len())
    })?;
    let atoms = selres::extract_constraints(&out.readings[0], h);
    let want = SolveResult::Satisfiable {
        assignment: assignment(h, &[(2, "banana"), (1, "man")]),
    };
    let got = selres::solve(&atoms, h);
    ensure(got == want, || format!("{got:?}"))
}

fn repair_examples(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let h = &g.hierarchy;
    let out = p
        .parse(&tokenize("tom repaired the technician"), Method::Bg)
        .unwrap();
    ensure(out.readings.len() == 1, || "technician parses".into())?;
    match selres::check_reading(&out.readings[0], h) {
        SolveResult::Violation { conflicting, .. } => {
            ensure(conflicting == sorts(h, &["artifact", "technician"]), || {
                format!("conflict {conflicting:?}")
            })?
        }
        r => return Err(format!("technician accepted: {r:?}")),
    }
    ensure(
        p.parse(&tokenize("tom repaired the technician"), Method::Index)
            .unwrap()
            .readings
            .is_empty(),
        || "technician parses under index".into(),
    )?;
    for m in [Method::Bg, Method::Index] {
        let c = counts(&p, "tom repaired the keyboard", m);
        ensure(c.post_filter == 1, || format!("keyboard under {m}: {c:?}"))?;
    }
    Ok(())
}

fn printer_senses(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let h = &g.hierarchy;
    for (s, sense) in [
        ("tom repaired the printer", "printer_peripheral"),
        ("the printer called", "printer_person"),
    ] {
        for m in [Method::Bg, Method::Index] {
            let c = counts(&p, s, m);
            ensure(
                c == ParseCounts {
                    pre_filter: 2,
                    post_filter: 1,
                },
                || format!("{s} under {m}: {c:?}"),
            )?;
            let out = p.parse(&tokenize(s), m).unwrap();
            let survivors: Vec<_> = out
                .readings
                .iter()
                .filter(|r| m == Method::Index || selres::check_reading(r, h).is_satisfiable())
                .collect();
            ensure(
                survivors.len() == 1 && survivors[0].senses.iter().any(|x| x == sense),
                || {
                    format!(
                        "{s} under {m}: senses {:?}",
                        survivors.first().map(|r| &r.senses)
                    )
                },
            )?;
        }
    }
    Ok(())
}

fn attachment(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let h = &g.hierarchy;
    let s = "list the employees of the departments that retire";
    let high =
        "(S (VP list (NP (NP (NP the employees) (PP of (NP the departments))) (RelC that (VP retire)))))";
    let bg = p.parse(&tokenize(s), Method::Bg).unwrap();
    ensure(bg.readings.len() == 2, || {
        format!("parses: {}", bg.readings.len())
    })?;
    let survivors: Vec<&str> = bg
        .readings
        .iter()
        .filter(|r| selres::check_reading(r, h).is_satisfiable())
        .map(|r| r.derivation.as_str())
        .collect();
    ensure(survivors == [high], || {
        format!("bg survivors {survivors:?}")
    })?;
    let index = p.parse(&tokenize(s), Method::Index).unwrap();
    let got: Vec<&str> = index
        .readings
        .iter()
        .map(|r| r.derivation.as_str())
        .collect();
    ensure(got == [high], || format!("index readings {got:?}"))
}

const CORPUS: [&str; 8] = [
    "tom ate a keyboard",
    "tom ate a banana",
    "tom repaired the technician",
    "tom repaired the keyboard",
    "tom repaired the printer",
    "the printer called",
    "list the employees of the departments that retire",
    "the printer repaired the printer",
];

fn methods_agree(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let h = &g.hierarchy;
    for s in CORPUS {
        let t = tokenize(s);
        let bg: BTreeSet<ReadingId> = p
            .parse(&t, Method::Bg)
            .unwrap()
            .readings
            .iter()
            .filter(|r| selres::check_reading(r, h).is_satisfiable())
            .map(|r| r.id())
            .collect();
        let index: BTreeSet<ReadingId> = p
            .parse(&t, Method::Index)
            .unwrap()
            .readings
            .iter()
            .map(|r| r.id())
            .collect();
        ensure(bg == index, || format!("{s}: bg {bg:?} index {index:?}"))?;
    }
    Ok(())
}

/// Ancestors-or-self by parent links.
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

fn order_laws(h: &SortHierarchy) -> Check {
    for a in h.sorts() {
        ensure(h.subsumes(a, a), || "reflexivity".into())?;
        for b in h.sorts() {
            ensure(h.subsumes(a, b) == up_set(h, b).contains(&a), || {
                "parent links".into()
            })?;
            ensure(a == b || !(h.subsumes(a, b) && h.subsumes(b, a)), || {
                "antisymmetry".into()
            })?;
            for c in h.sorts() {
                ensure(
                    !(h.subsumes(a, b) && h.subsumes(b, c)) || h.subsumes(a, c),
                    || "transitivity".into(),
                )?;
            }
        }
    }
    Ok(())
}

fn random_fs(rng: &mut StdRng, h: &SortHierarchy) -> FeatureStructure {
    const FEATURES: [&str; 3] = ["F", "G", "H"];
    let all: Vec<Sort> = h.sorts().collect();
    let mut ws = Workspace::new();
    let n = rng.gen_range(1..7);
    let ids: Vec<_> = (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0 => ws.top(),
            1 => ws.atom("x"),
            2 => ws.atom("y"),
            _ => ws.sort(all[rng.gen_range(0..all.len())]),
        })
        .collect();
    for i in 0..n {
        for _ in 0..rng.gen_range(0..3) {
            if i + 1 < n {
                let t = rng.gen_range(i + 1..n);
                ws.set(ids[i], FEATURES[rng.gen_range(0..3)], ids[t]);
            }
        }
    }
    ws.extract(ids[0]).unwrap()
}

fn unification_laws(h: &SortHierarchy) -> Check {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..500 {
        let (a, b) = (random_fs(&mut rng, h), random_fs(&mut rng, h));
        let ab = a.unify(&b, h).ok();
        ensure(ab == b.unify(&a, h).ok(), || "commutativity".into())?;
        ensure(a.unify(&a, h).ok().as_ref() == Some(&a), || {
            "idempotence".into()
        })?;
        if let Some(c) = ab {
            ensure(a.subsumes(&c, h) && b.subsumes(&c, h), || {
                "monotonicity".into()
            })?;
        }
    }
    Ok(())
}

fn glb_fold_order(h: &SortHierarchy) -> Check {
    let meet = |x: Option<Sort>, y: Option<Sort>| match (x, y) {
        (Some(x), Some(y)) => h.glb(x, y).unwrap(),
        _ => None,
    };
    for a in h.sorts() {
        for b in h.sorts() {
            for c in h.sorts() {
                let left = meet(meet(Some(a), Some(b)), Some(c));
                ensure(left == meet(Some(a), meet(Some(b), Some(c))), || {
                    "associativity".into()
                })?;
                ensure(left == meet(meet(Some(a), Some(c)), Some(b)), || {
                    "commutativity".into()
                })?;
            }
        }
    }
    Ok(())
}

fn random_atoms(rng: &mut StdRng, h: &SortHierarchy, max: usize) -> Vec<ConstraintAtom> {
    let all: Vec<Sort> = h.sorts().collect();
    (0..rng.gen_range(1..=max))
        .map(|_| ConstraintAtom::new(all[rng.gen_range(0..all.len())], Var(rng.gen_range(1..=3))))
        .collect()
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

fn outcome(r: SolveResult) -> Result<BTreeMap<Var, Sort>, Var> {
    match r {
        SolveResult::Satisfiable { assignment } => Ok(assignment),
        SolveResult::Violation { var, .. } => Err(var),
    }
}

fn solve_order_invariance(h: &SortHierarchy) -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..50 {
        let atoms = random_atoms(&mut rng, h, 5);
        let reference = outcome(selres::solve(&atoms, h));
        for p in permutations(&atoms) {
            ensure(outcome(selres::solve(&p, h)) == reference, || {
                format!("{atoms:?}")
            })?;
        }
    }
    Ok(())
}

/// Sorts below every constraint, keeping the maximal ones.
fn scan(h: &SortHierarchy, constraints: &[Sort]) -> BTreeSet<Sort> {
    let below: Vec<Sort> = h
        .sorts()
        .filter(|&s| constraints.iter().all(|c| up_set(h, s).contains(c)))
        .collect();
    below
        .iter()
        .copied()
        .filter(|&s| !below.iter().any(|&t| t != s && up_set(h, s).contains(&t)))
        .collect()
}

fn solve_matches_oracle(h: &SortHierarchy) -> Check {
    let mut rng = StdRng::seed_from_u64(200);
    for i in 0..200 {
        let atoms = random_atoms(&mut rng, h, 6);
        let mut groups: BTreeMap<Var, Vec<Sort>> = BTreeMap::new();
        for a in &atoms {
            groups.entry(a.var).or_default().push(a.sort);
        }
        let oracle: BTreeMap<Var, BTreeSet<Sort>> =
            groups.iter().map(|(&v, s)| (v, scan(h, s))).collect();
        match selres::solve(&atoms, h) {
            SolveResult::Satisfiable { assignment } => {
                for (v, ok) in &oracle {
                    ensure(ok.contains(&assignment[v]), || format!("case {i}: var {v}"))?;
                }
            }
            SolveResult::Violation { var, .. } => {
                let first = oracle.iter().find(|(_, s)| s.is_empty()).map(|(&v, _)| v);
                ensure(first == Some(var), || {
                    format!("case {i}: violation on {var}, oracle {first:?}")
                })?;
            }
        }
    }
    Ok(())
}

fn property_suites(g: &Grammar) -> Check {
    let h = &g.hierarchy;
    order_laws(h)?;
    unification_laws(h)?;
    glb_fold_order(h)?;
    solve_order_invariance(h)?;
    solve_matches_oracle(h)?;
    // the untyped index subsumes a typed one
    let r = FeatureStructure::leaf(NodeType::Sort(h.root()));
    let banana = FeatureStructure::leaf(NodeType::Sort(h.resolve("banana").unwrap()));
    ensure(r.subsumes(&banana, h), || "ref subsumes banana".into())
}

fn multiplicative_effect(g: &Grammar) -> Check {
    let p = Parser::new(g);
    let s = "the printer repaired the printer";
    let unfiltered = p.parse(&tokenize(s), Method::Bg).unwrap();
    let index = p.parse(&tokenize(s), Method::Index).unwrap();
    ensure(unfiltered.readings.len() == 4, || {
        format!("pre_filter {}", unfiltered.readings.len())
    })?;
    ensure(index.readings.len() == 1, || {
        format!("post_filter {}", index.readings.len())
    })?;
    ensure(index.edge_count() < unfiltered.edge_count(), || {
        format!(
            "edges {} vs {}",
            index.edge_count(),
            unfiltered.edge_count()
        )
    })?;
    ensure(
        index.saturated_edge_count() < unfiltered.saturated_edge_count(),
        || {
            format!(
                "complete edges {} vs {}",
                index.saturated_edge_count(),
                unfiltered.saturated_edge_count()
            )
        },
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let g = Grammar::bundled();
    let criteria: [Criterion; 8] = [
        (
            "keyboard sentence rejected under both methods",
            keyboard_rejected_both_ways,
        ),
        (
            "banana sentence leaves banana(2) and man(1)",
            banana_residual_constraints,
        ),
        (
            "technician rejected, keyboard repair accepted",
            repair_examples,
        ),
        ("printer senses disambiguated", printer_senses),
        ("relative clause attached to employees", attachment),
        ("methods agree on the corpus", methods_agree),
        ("property suites", property_suites),
        ("index method builds fewer edges", multiplicative_effect),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check(&g) {
            Ok(()) => println!("PASS {}: {name}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {name}: {e}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.2}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
