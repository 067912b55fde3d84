//! Brute-force reference enumerators for checking version spaces on small
//! instances.
//!
//! These enumerate programs directly and evaluate them, without any of the
//! sharing used by the learners; they are exponential and meant for tests.

use std::collections::BTreeMap;

use crate::expr::{eval, LookupExpr, Predicate, StringExpr};
use crate::table::{InputState, TableCatalog};

/// Which lookup programs [`lookup_programs`] enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupFilter {
    /// Require every `Select` to have at least one non-constant predicate.
    pub grounded: bool,
}

/// Every lookup program of depth at most `depth`, grouped by its value on
/// `state`, restricted to programs whose `Select`s all find a row and return a
/// non-empty cell, and whose selected column is not part of the key it is
/// selected by.
pub fn lookup_programs(
    state: &InputState,
    catalog: &TableCatalog,
    depth: usize,
    filter: LookupFilter,
) -> BTreeMap<String, Vec<LookupExpr>> {
    // (expression, depth) grouped by value
    let mut by_value: BTreeMap<String, Vec<(LookupExpr, usize)>> = BTreeMap::new();
    for (i, v) in state.values.iter().enumerate() {
        by_value
            .entry(v.clone())
            .or_default()
            .push((LookupExpr::Var(i), 0));
    }
    for d in 1..=depth {
        let mut fresh: Vec<(String, LookupExpr)> = Vec::new();
        for t in catalog.tables() {
            for r in 0..t.row_count() {
                for (ki, key) in t.candidate_keys().iter().enumerate() {
                    let cols = t.key_columns(ki);
                    // options per key column: the constant, or any known program with that value
                    let options: Vec<Vec<(StringExpr, usize, bool)>> = cols
                        .iter()
                        .map(|&kc| {
                            let cell = t.cell(kc, r);
                            let mut o = vec![(StringExpr::constant(cell), 0, true)];
                            for (e, de) in by_value.get(cell).into_iter().flatten() {
                                o.push((StringExpr::lookup(e.clone()), *de, false));
                            }
                            o
                        })
                        .collect();
                    for (c, column) in t.columns().iter().enumerate() {
                        let value = t.cell(c, r);
                        if cols.contains(&c) || value.is_empty() {
                            continue;
                        }
                        for combo in product(&options) {
                            let max_depth = combo.iter().map(|o| o.1).max().unwrap_or(0);
                            if max_depth + 1 != d {
                                continue;
                            }
                            if filter.grounded && combo.iter().all(|o| o.2) {
                                continue;
                            }
                            let predicates = combo
                                .iter()
                                .zip(&key.columns)
                                .map(|(o, col)| Predicate::new(col.clone(), o.0.clone()))
                                .collect();
                            fresh.push((
                                value.to_string(),
                                LookupExpr::select(column.clone(), t.id(), predicates),
                            ));
                        }
                    }
                }
            }
        }
        for (v, e) in fresh {
            by_value.entry(v).or_default().push((e, d));
        }
    }
    by_value
        .into_iter()
        .map(|(v, es)| {
            let mut es: Vec<LookupExpr> = es.into_iter().map(|(e, _)| e).collect();
            es.sort();
            es.dedup();
            (v, es)
        })
        .collect()
}

fn product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for o in options {
        let mut next = Vec::with_capacity(out.len() * o.len());
        for prefix in &out {
            for x in o {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The lookup programs of depth at most `depth` that produce `output`.
pub fn consistent_lookups(
    state: &InputState,
    output: &str,
    catalog: &TableCatalog,
    depth: usize,
    filter: LookupFilter,
) -> Vec<StringExpr> {
    let mut by_value = lookup_programs(state, catalog, depth, filter);
    let out: Vec<StringExpr> = by_value
        .remove(output)
        .unwrap_or_default()
        .into_iter()
        .map(StringExpr::lookup)
        .collect();
    debug_assert!(out
        .iter()
        .all(|e| eval(e, state, catalog).as_deref() == Ok(output)));
    out
}
