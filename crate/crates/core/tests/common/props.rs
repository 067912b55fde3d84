//! Properties checked on randomized small instances against brute-force
//! enumeration, shared by the property tests and the acceptance run.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use semfill::denote::{contains, count, enumerate, sample};
use semfill::expr::{eval, Atom, LookupExpr, Predicate, StringExpr};
use semfill::generate::{generate_str_s, generate_str_t, generate_str_u, GenOptions};
use semfill::intersect::intersect;
use semfill::oracle::{consistent_lookups, LookupFilter};
use semfill::position::Position;
use semfill::rank::{score, top_k};
use semfill::space::VersionSpace;
use semfill::table::{InputState, Table, TableCatalog};

pub const CELLS: &[&str] = &["a", "b", "c", "ab"];
pub const ENUM_LIMIT: usize = 10_000;

pub fn arb_table(id: &'static str) -> impl Strategy<Value = Table> {
    (2usize..=3, 1usize..=3).prop_flat_map(move |(cols, rows)| {
        prop::collection::vec(
            prop::collection::vec(prop::sample::select(CELLS), cols),
            rows,
        )
        .prop_map(move |rows| {
            let columns = (1..=cols).map(|c| format!("C{c}")).collect();
            let rows = rows
                .into_iter()
                .map(|r| r.into_iter().map(String::from).collect())
                .collect();
            Table::new(id, columns, rows, Vec::new())
                .unwrap()
                .with_inferred_keys(2, 100)
        })
    })
}

pub fn arb_catalog() -> impl Strategy<Value = Arc<TableCatalog>> {
    prop_oneof![
        arb_table("T").prop_map(|t| vec![t]),
        (arb_table("T"), arb_table("U")).prop_map(|(t, u)| vec![t, u]),
    ]
    .prop_map(super::catalog)
}

pub fn arb_state() -> impl Strategy<Value = InputState> {
    prop::collection::vec(prop::sample::select(CELLS), 1..=2).prop_map(InputState::new)
}

/// Every string the lookup language can produce from `state`.
pub fn values(state: &InputState, cat: &TableCatalog) -> Vec<String> {
    let mut v: BTreeSet<String> = state.values.iter().cloned().collect();
    for t in cat.tables() {
        for row in t.rows() {
            v.extend(row.iter().cloned());
        }
    }
    v.into_iter().collect()
}

pub fn all_programs(vs: &VersionSpace) -> Option<Vec<StringExpr>> {
    let (all, truncated) = enumerate(vs, ENUM_LIMIT);
    (!truncated).then_some(all)
}

/// Checks `a ∩ b` against membership in both operands; returns whether the
/// check was exhaustive.
pub fn check_intersection(
    a: &VersionSpace,
    b: &VersionSpace,
    ab: &VersionSpace,
) -> Result<bool, TestCaseError> {
    let exhaustive = match all_programs(a) {
        Some(all_a) => {
            let want: BTreeSet<_> = all_a.into_iter().filter(|p| contains(b, p)).collect();
            let got = all_programs(ab).expect("smaller than an operand");
            let got: BTreeSet<_> = got.into_iter().collect();
            prop_assert_eq!(got, want);
            true
        }
        None => {
            for p in sample(ab, 200, 11) {
                prop_assert!(contains(a, &p) && contains(b, &p), "{}", p);
            }
            for p in sample(a, 200, 13) {
                if contains(b, &p) {
                    prop_assert!(contains(ab, &p), "{}", p);
                }
            }
            false
        }
    };
    prop_assert!(count(ab) <= count(a).min(count(b)));
    Ok(exhaustive)
}

/// A second example produced by a program drawn from `vs` on `state`.
pub fn follow_up(
    vs: &VersionSpace,
    state: &InputState,
    cat: &TableCatalog,
    seed: u64,
) -> Option<String> {
    let p = sample(vs, 1, seed).pop()?;
    eval(&p, state, cat).ok().filter(|s| !s.is_empty())
}

pub const WORDS: &[&str] = &["a", "b", "ab", "ba", "a1", "b-2", "1"];

pub fn arb_word_table(id: &'static str) -> impl Strategy<Value = Table> {
    (2usize..=3, 1usize..=3).prop_flat_map(move |(cols, rows)| {
        prop::collection::vec(
            prop::collection::vec(prop::sample::select(WORDS), cols),
            rows,
        )
        .prop_map(move |rows| {
            let columns = (1..=cols).map(|c| format!("C{c}")).collect();
            let rows = rows
                .into_iter()
                .map(|r| r.into_iter().map(String::from).collect())
                .collect();
            Table::new(id, columns, rows, Vec::new())
                .unwrap()
                .with_inferred_keys(1, 100)
        })
    })
}

pub fn arb_word_state() -> impl Strategy<Value = InputState> {
    prop::collection::vec(prop::sample::select(WORDS), 1..=2).prop_map(InputState::new)
}

/// Substring atoms of `source` on `value` with constant positions.
pub fn cpos_substrings(source: LookupExpr, value: &str) -> Vec<(Atom, String)> {
    let chars: Vec<char> = value.chars().collect();
    let mut out = Vec::new();
    for i in 0..chars.len() {
        for j in i + 1..=chars.len() {
            out.push((
                Atom::SubStr {
                    source: source.clone(),
                    start: Position::Const(i as i64),
                    end: Position::Const(j as i64),
                },
                chars[i..j].iter().collect(),
            ));
        }
    }
    out
}

/// Atoms of a restricted grammar: inputs, constant-position substrings of
/// inputs, and single-predicate lookups indexed by those or by a pair of
/// inputs, together with their values.
pub fn restricted_atoms(state: &InputState, cat: &TableCatalog) -> Vec<(Atom, String)> {
    let mut keys: Vec<(StringExpr, String)> = Vec::new();
    let mut atoms = Vec::new();
    for (i, v) in state.values.iter().enumerate() {
        atoms.push((Atom::var(i), v.clone()));
        keys.push((StringExpr::var(i), v.clone()));
        for (a, s) in cpos_substrings(LookupExpr::Var(i), v) {
            keys.push((StringExpr::atom(a.clone()), s.clone()));
            atoms.push((a, s));
        }
        for (j, w) in state.values.iter().enumerate() {
            keys.push((
                StringExpr::new(vec![Atom::var(i), Atom::var(j)]),
                format!("{v}{w}"),
            ));
        }
    }
    for t in cat.tables() {
        for (ki, key) in t.candidate_keys().iter().enumerate() {
            let [kc] = t.key_columns(ki) else { continue };
            for (rhs, kv) in &keys {
                let Some(r) = t.lookup(ki, std::slice::from_ref(kv)) else {
                    continue;
                };
                for (c, column) in t.columns().iter().enumerate() {
                    let value = t.cell(c, r);
                    if c == *kc || value.is_empty() {
                        continue;
                    }
                    let sel = LookupExpr::select(
                        column.clone(),
                        t.id(),
                        vec![Predicate::new(key.columns[0].clone(), rhs.clone())],
                    );
                    atoms.push((Atom::Lookup(sel.clone()), value.to_string()));
                    atoms.extend(cpos_substrings(sel, value));
                }
            }
        }
    }
    atoms
}

/// The best score over a fully enumerated space agrees with extraction.
pub fn check_top(vs: &VersionSpace, first: &InputState) -> Result<bool, TestCaseError> {
    let Some(all) = all_programs(vs) else {
        return Ok(false);
    };
    let top = top_k(vs, 3);
    if all.is_empty() {
        prop_assert!(top.is_empty());
        return Ok(true);
    }
    let cat = &vs.catalog;
    let mut scored: Vec<_> = all
        .iter()
        .map(|e| (score(e, first, cat), e.clone()))
        .collect();
    scored.sort();
    prop_assert_eq!(
        top[0].score,
        scored[0].0,
        "top {} vs {}",
        top[0].program,
        scored[0].1
    );
    prop_assert_eq!(top.len(), scored.len().min(3));
    // programs with equal scores may be interchanged
    for (r, (s, _)) in top.iter().zip(&scored) {
        prop_assert_eq!(r.score, *s);
        prop_assert_eq!(r.score, score(&r.program, first, cat));
        prop_assert!(contains(vs, &r.program));
    }
    Ok(true)
}

pub fn lookup_space_is_sound_and_complete_inputs(
) -> impl Strategy<Value = (Arc<TableCatalog>, InputState, prop::sample::Index)> {
    (arb_catalog(), arb_state(), any::<prop::sample::Index>())
}

pub fn lookup_space_is_sound_and_complete(
    cat: Arc<TableCatalog>,
    state: InputState,
    pick: prop::sample::Index,
) -> Result<(), TestCaseError> {
    let vals = values(&state, &cat);
    let s = pick.get(&vals).clone();
    let k = cat.len();
    let vs = generate_str_t(&state, &s, &cat, None);
    for e in sample(&vs, 30, 7) {
        prop_assert_eq!(eval(&e, &state, &cat).unwrap(), s.clone(), "{}", e);
        prop_assert!(e.depth() <= k);
    }
    let grounded = consistent_lookups(&state, &s, &cat, k, LookupFilter { grounded: true });
    for e in &grounded {
        prop_assert!(contains(&vs, e), "missing {}\n{}", e, vs.dump());
    }
    let everything = consistent_lookups(&state, &s, &cat, k, LookupFilter { grounded: false });
    prop_assert!(count(&vs) >= BigUint::from(grounded.len()));
    if let Some(all) = all_programs(&vs) {
        let all: BTreeSet<_> = all.into_iter().collect();
        let oracle: BTreeSet<_> = everything.into_iter().collect();
        prop_assert!(all.is_subset(&oracle), "programs outside the language");
    }
    Ok(())
}

pub fn lookup_intersection_matches_membership_inputs() -> impl Strategy<
    Value = (
        Arc<TableCatalog>,
        InputState,
        InputState,
        prop::sample::Index,
        u64,
    ),
> {
    (
        arb_catalog(),
        arb_state(),
        arb_state(),
        any::<prop::sample::Index>(),
        any::<u64>(),
    )
}

pub fn lookup_intersection_matches_membership(
    cat: Arc<TableCatalog>,
    s1: InputState,
    s2: InputState,
    pick: prop::sample::Index,
    seed: u64,
) -> Result<(), TestCaseError> {
    prop_assume!(s1.arity() == s2.arity());
    let vals = values(&s1, &cat);
    let out1 = pick.get(&vals).clone();
    let a = generate_str_t(&s1, &out1, &cat, None);
    prop_assume!(!a.is_empty());
    let out2 = match follow_up(&a, &s2, &cat, seed) {
        Some(o) => o,
        None => vals[0].clone(),
    };
    let b = generate_str_t(&s2, &out2, &cat, None);
    let ab = intersect(&a, &b);
    for p in sample(&ab, 30, seed) {
        prop_assert_eq!(eval(&p, &s1, &cat).unwrap(), out1.clone());
        prop_assert_eq!(eval(&p, &s2, &cat).unwrap(), out2.clone());
    }
    check_intersection(&a, &b, &ab)?;
    Ok(())
}

pub fn syntactic_intersection_matches_consistency_inputs(
) -> impl Strategy<Value = (String, String, String, usize, u64)> {
    (
        "[ab1A ]{1,3}",
        "[ab1A ]{1,3}",
        "[ab1A ]{1,3}",
        0usize..4,
        any::<u64>(),
    )
}

pub fn syntactic_intersection_matches_consistency(
    v1: String,
    v2: String,
    w: String,
    cut: usize,
    seed: u64,
) -> Result<(), TestCaseError> {
    // the output mixes a piece of the input with a constant
    let cut = cut.min(w.len());
    let out1 = format!("{}{}", &w[..cut], v1);
    let s1 = InputState::new([v1.clone()]);
    let s2 = InputState::new([v2.clone()]);
    let cat = TableCatalog::new();
    let a = generate_str_s(&s1, &out1);
    let out2 = follow_up(&a, &s2, &cat, seed).unwrap_or_else(|| v2.clone());
    let b = generate_str_s(&s2, &out2);
    let ab = intersect(&a, &b);
    if let Some(all_a) = all_programs(&a) {
        // membership in b is consistency with the second example, with
        // every atom contributing a non-empty piece
        let want: BTreeSet<_> = all_a
            .into_iter()
            .filter(|p| eval(p, &s2, &cat).ok().as_deref() == Some(out2.as_str()))
            .filter(|p| {
                p.atoms.iter().all(|a| {
                    eval(&StringExpr::atom(a.clone()), &s2, &cat).is_ok_and(|v| !v.is_empty())
                })
            })
            .collect();
        let got: BTreeSet<_> = all_programs(&ab).unwrap().into_iter().collect();
        prop_assert_eq!(got, want);
    }
    for p in sample(&ab, 50, seed) {
        prop_assert_eq!(eval(&p, &s1, &cat).unwrap(), out1.clone());
        prop_assert_eq!(eval(&p, &s2, &cat).unwrap(), out2.clone());
    }
    check_intersection(&a, &b, &ab)?;
    Ok(())
}

pub fn combined_space_is_sound_and_complete_for_a_restricted_grammar_inputs(
) -> impl Strategy<Value = (Table, InputState, Vec<prop::sample::Index>)> {
    (
        arb_word_table("T"),
        arb_word_state(),
        prop::collection::vec(any::<prop::sample::Index>(), 1..=2),
    )
}

pub fn combined_space_is_sound_and_complete_for_a_restricted_grammar(
    t: Table,
    state: InputState,
    picks: Vec<prop::sample::Index>,
) -> Result<(), TestCaseError> {
    let cat = super::catalog(vec![t]);
    let atoms = restricted_atoms(&state, &cat);
    // an output made from one or two restricted atoms
    let chosen: Vec<&(Atom, String)> = picks.iter().map(|p| p.get(&atoms)).collect();
    let out: String = chosen.iter().map(|a| a.1.as_str()).collect();
    let vs = generate_str_u(&state, &out, &cat, GenOptions::default());
    for e in sample(&vs, 30, 3) {
        prop_assert_eq!(eval(&e, &state, &cat).unwrap(), out.clone(), "{}", e);
    }
    // every restricted program of at most two atoms producing the output is present
    for (a, s) in &atoms {
        if *s == out {
            let e = StringExpr::atom(a.clone());
            prop_assert!(contains(&vs, &e), "missing {}", e);
        }
        for (b, t) in &atoms {
            if format!("{s}{t}") == out {
                let e = StringExpr::new(vec![a.clone(), b.clone()]);
                prop_assert!(contains(&vs, &e), "missing {}", e);
            }
        }
    }
    let top = top_k(&vs, 1);
    prop_assert_eq!(top.len(), 1);
    prop_assert_eq!(eval(&top[0].program, &state, &cat).unwrap(), out);
    Ok(())
}

pub fn combined_intersection_matches_membership_inputs(
) -> impl Strategy<Value = (Table, InputState, InputState, prop::sample::Index, u64)> {
    (
        arb_word_table("T"),
        arb_word_state(),
        arb_word_state(),
        any::<prop::sample::Index>(),
        any::<u64>(),
    )
}

pub fn combined_intersection_matches_membership(
    t: Table,
    s1: InputState,
    s2: InputState,
    pick: prop::sample::Index,
    seed: u64,
) -> Result<(), TestCaseError> {
    prop_assume!(s1.arity() == s2.arity());
    let cat = super::catalog(vec![t]);
    let atoms = restricted_atoms(&s1, &cat);
    let out1 = pick.get(&atoms).1.clone();
    let a = generate_str_u(&s1, &out1, &cat, GenOptions::default());
    let out2 = follow_up(&a, &s2, &cat, seed).unwrap_or_else(|| s2.values[0].clone());
    let b = generate_str_u(&s2, &out2, &cat, GenOptions::default());
    let ab = intersect(&a, &b);
    for p in sample(&ab, 30, seed) {
        prop_assert_eq!(eval(&p, &s1, &cat).unwrap(), out1.clone());
        prop_assert_eq!(eval(&p, &s2, &cat).unwrap(), out2.clone());
    }
    check_intersection(&a, &b, &ab)?;
    Ok(())
}

pub fn extraction_finds_the_best_lookup_inputs(
) -> impl Strategy<Value = (Arc<TableCatalog>, InputState, prop::sample::Index)> {
    (arb_catalog(), arb_state(), any::<prop::sample::Index>())
}

pub fn extraction_finds_the_best_lookup(
    cat: Arc<TableCatalog>,
    state: InputState,
    pick: prop::sample::Index,
) -> Result<(), TestCaseError> {
    let vals = values(&state, &cat);
    let s = pick.get(&vals).clone();
    let vs = generate_str_t(&state, &s, &cat, None);
    check_top(&vs, &state)?;
    Ok(())
}

pub fn extraction_finds_the_best_syntactic_program_inputs(
) -> impl Strategy<Value = (String, String)> {
    ("[ab1A ]{1,3}", "[ab1A ]{0,2}")
}

pub fn extraction_finds_the_best_syntactic_program(
    v: String,
    w: String,
) -> Result<(), TestCaseError> {
    let state = InputState::new([v.clone()]);
    let out = format!("{w}{}", &v[..1]);
    let vs = generate_str_s(&state, &out);
    check_top(&vs, &state)?;
    Ok(())
}

pub fn extraction_finds_the_best_intersected_program_inputs(
) -> impl Strategy<Value = (String, String, u64)> {
    ("[ab1A ]{1,3}", "[ab1A ]{1,3}", any::<u64>())
}

pub fn extraction_finds_the_best_intersected_program(
    v1: String,
    v2: String,
    seed: u64,
) -> Result<(), TestCaseError> {
    let s1 = InputState::new([v1.clone()]);
    let s2 = InputState::new([v2.clone()]);
    let cat = TableCatalog::new();
    let a = generate_str_s(&s1, &v1);
    let out2 = follow_up(&a, &s2, &cat, seed).unwrap_or_else(|| v2.clone());
    let ab = intersect(&a, &generate_str_s(&s2, &out2));
    check_top(&ab, &s1)?;
    Ok(())
}

pub fn extraction_finds_the_best_combined_program_inputs(
) -> impl Strategy<Value = (Table, InputState, prop::sample::Index)> {
    (
        arb_word_table("T"),
        arb_word_state(),
        any::<prop::sample::Index>(),
    )
}

pub fn extraction_finds_the_best_combined_program(
    t: Table,
    state: InputState,
    pick: prop::sample::Index,
) -> Result<(), TestCaseError> {
    let cat = super::catalog(vec![t]);
    let atoms = restricted_atoms(&state, &cat);
    let out = pick.get(&atoms).1.clone();
    let vs = generate_str_u(&state, &out, &cat, GenOptions::default());
    check_top(&vs, &state)?;
    Ok(())
}
