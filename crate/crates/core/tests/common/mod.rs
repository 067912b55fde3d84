#![allow(dead_code)]

use std::sync::Arc;

use semfill::table::{CandidateKey, Table, TableCatalog};

pub fn table(id: &str, columns: &[&str], rows: &[&[&str]], keys: &[&[&str]]) -> Table {
    Table::new(
        id,
        columns.iter().map(|c| c.to_string()).collect(),
        rows.iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect(),
        keys.iter()
            .map(|k| CandidateKey::new(k.iter().copied()))
            .collect(),
    )
    .unwrap()
}

pub fn catalog(tables: Vec<Table>) -> Arc<TableCatalog> {
    Arc::new(TableCatalog::from_tables(tables).unwrap())
}

/// Tables T1..Tm with columns C1, C2, C3 keyed by C1, where Ti holds the single
/// row (s_i, s_{i+1}, s_{i+2}).
pub fn chain(m: usize) -> Arc<TableCatalog> {
    let tables = (1..=m)
        .map(|i| {
            let row = [
                format!("s{i}"),
                format!("s{}", i + 1),
                format!("s{}", i + 2),
            ];
            let row: Vec<&str> = row.iter().map(String::as_str).collect();
            table(&format!("T{i}"), &["C1", "C2", "C3"], &[&row], &[&["C1"]])
        })
        .collect();
    catalog(tables)
}

/// One table whose first `n` columns form a key and whose last column holds
/// `t`, with the single row (s, ..., s, t).
pub fn wide_key(n: usize) -> Arc<TableCatalog> {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("C{i}")).collect();
    cols.push(format!("C{}", n + 1));
    let mut row = vec!["s"; n];
    row.push("t");
    let cols_ref: Vec<&str> = cols.iter().map(String::as_str).collect();
    let key: Vec<&str> = cols_ref[..n].to_vec();
    catalog(vec![table("T", &cols_ref, &[&row], &[&key])])
}

/// The currency conversion tables.
pub fn currency() -> Arc<TableCatalog> {
    catalog(vec![
        table(
            "CurrencyRate",
            &["Currency", "Rate"],
            &[
                &["USD", "1.0"],
                &["EUR", "1.3"],
                &["GBP", "1.6"],
                &["INR", "0.018"],
            ],
            &[&["Currency"]],
        ),
        table(
            "Cost",
            &["Item", "Currency"],
            &[
                &["Stroller", "USD"],
                &["Bib", "EUR"],
                &["Diapers", "GBP"],
                &["Wipes", "INR"],
                &["Aspirator", "USD"],
            ],
            &[&["Item"]],
        ),
    ])
}

pub mod props;
