//! Relational tables, candidate keys, and the catalog that lookup programs query.
//!
//! Cells are compared byte-exactly and case-sensitively; nothing is trimmed.
//! The empty string is an ordinary cell value and may be part of a key.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::StoreError;

/// Tables with more rows than this skip key inference.
pub const DEFAULT_INFERENCE_ROW_BOUND: usize = 10_000;
/// Widest key considered by inference.
pub const DEFAULT_MAX_KEY_WIDTH: usize = 3;

/// A set of columns whose values identify at most one row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateKey {
    pub columns: Vec<String>,
}

impl CandidateKey {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        CandidateKey {
            columns: columns.into_iter().map(Into::into).collect(),
        }
    }

    fn sort_key(&self) -> (usize, &[String]) {
        (self.columns.len(), &self.columns)
    }
}

/// Values of the input variables `v1..vm` for one spreadsheet row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputState {
    pub values: Vec<String>,
}

impl InputState {
    pub fn new<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Self {
        InputState {
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, index: usize) -> Option<&str> {
        self.values.get(index).map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for InputState {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        InputState::new(iter)
    }
}

/// An immutable relational table with validated candidate keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    id: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    candidate_keys: Vec<CandidateKey>,
    // per candidate key: column indices and a map from key tuple to row
    key_columns: Vec<Vec<usize>>,
    key_index: Vec<HashMap<Vec<String>, usize>>,
}

impl Table {
    /// Builds a table, checking row widths and the uniqueness of every declared key.
    pub fn new(
        id: impl Into<String>,
        columns: Vec<String>,
        rows: Vec<Vec<String>>,
        keys: Vec<CandidateKey>,
    ) -> Result<Self, StoreError> {
        let id = id.into();
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.as_str()) {
                return Err(StoreError::DuplicateColumn {
                    table: id.clone(),
                    column: c.clone(),
                });
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(StoreError::RaggedRow {
                    table: id,
                    row: r,
                    found: row.len(),
                    expected: columns.len(),
                });
            }
        }
        let mut table = Table {
            id,
            columns,
            rows,
            candidate_keys: Vec::new(),
            key_columns: Vec::new(),
            key_index: Vec::new(),
        };
        table.set_keys(keys)?;
        Ok(table)
    }

    fn set_keys(&mut self, keys: Vec<CandidateKey>) -> Result<(), StoreError> {
        let mut normalized = Vec::new();
        for key in keys {
            if key.columns.is_empty() {
                return Err(StoreError::EmptyKey {
                    table: self.id.clone(),
                });
            }
            let mut idx = Vec::new();
            for c in &key.columns {
                match self.column_index(c) {
                    Some(i) => idx.push(i),
                    None => {
                        return Err(StoreError::UnknownKeyColumn {
                            table: self.id.clone(),
                            column: c.clone(),
                        })
                    }
                }
            }
            // key columns follow table column order
            idx.sort_unstable();
            idx.dedup();
            normalized.push(CandidateKey::new(
                idx.iter().map(|&i| self.columns[i].clone()),
            ));
        }
        normalized.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        normalized.dedup();

        let mut key_columns = Vec::new();
        let mut key_index = Vec::new();
        for key in &normalized {
            let idx: Vec<usize> = key
                .columns
                .iter()
                .map(|c| self.column_index(c).expect("validated above"))
                .collect();
            let mut map: HashMap<Vec<String>, usize> = HashMap::new();
            for (r, row) in self.rows.iter().enumerate() {
                let tuple: Vec<String> = idx.iter().map(|&i| row[i].clone()).collect();
                if let Some(&first) = map.get(&tuple) {
                    return Err(StoreError::KeyViolation {
                        table: self.id.clone(),
                        key: key.columns.clone(),
                        first,
                        second: r,
                    });
                }
                map.insert(tuple, r);
            }
            key_columns.push(idx);
            key_index.push(map);
        }
        self.candidate_keys = normalized;
        self.key_columns = key_columns;
        self.key_index = key_index;
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Candidate keys in canonical order: by width, then by column names.
    pub fn candidate_keys(&self) -> &[CandidateKey] {
        &self.candidate_keys
    }

    /// Column indices of the candidate key at `key`.
    pub fn key_columns(&self, key: usize) -> &[usize] {
        &self.key_columns[key]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `T[C, r]`.
    pub fn cell(&self, column: usize, row: usize) -> &str {
        &self.rows[row][column]
    }

    /// Index of the candidate key made of exactly these columns, in this order.
    pub fn key_for_columns(&self, columns: &[&str]) -> Option<usize> {
        self.candidate_keys.iter().position(|k| {
            k.columns.len() == columns.len() && k.columns.iter().zip(columns).all(|(a, b)| a == b)
        })
    }

    /// The unique row whose key-`key` tuple equals `values`.
    pub fn lookup(&self, key: usize, values: &[String]) -> Option<usize> {
        self.key_index[key].get(values).copied()
    }

    /// Replaces the declared keys with the merge of declared and inferred keys.
    pub fn with_inferred_keys(mut self, max_width: usize, row_bound: usize) -> Self {
        if self.rows.len() <= row_bound {
            let keys = infer_candidate_keys(&self, max_width);
            // inferred keys are unique by construction
            self.set_keys(keys).expect("inferred keys are valid");
        }
        self
    }
}

/// All minimal column sets of width at most `max_width` whose tuples are unique,
/// merged with the table's declared keys and put in canonical order.
pub fn infer_candidate_keys(table: &Table, max_width: usize) -> Vec<CandidateKey> {
    let n = table.columns.len();
    let mut found: Vec<Vec<usize>> = Vec::new();
    for width in 1..=max_width.min(n) {
        for combo in combinations(n, width) {
            if found.iter().any(|k| k.iter().all(|c| combo.contains(c))) {
                continue;
            }
            let mut seen = HashSet::new();
            let unique = table.rows.iter().all(|row| {
                let tuple: Vec<&str> = combo.iter().map(|&i| row[i].as_str()).collect();
                seen.insert(tuple)
            });
            if unique {
                found.push(combo);
            }
        }
    }
    let mut keys: Vec<CandidateKey> = table.candidate_keys.clone();
    keys.extend(
        found
            .into_iter()
            .map(|k| CandidateKey::new(k.into_iter().map(|i| table.columns[i].clone()))),
    );
    keys.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    keys.dedup();
    keys
}

fn combinations(n: usize, width: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, width: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == width {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, width, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, width, &mut Vec::new(), &mut out);
    out
}

/// One table entry of a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TableManifestEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
    #[serde(default)]
    pub candidate_keys: Vec<Vec<String>>,
    #[serde(default)]
    pub infer_keys: bool,
}

/// A JSON document describing the tables of a catalog.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub tables: Vec<TableManifestEntry>,
    /// Adds the built-in tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdlib: Option<crate::stdlib::StdlibOptions>,
}

/// Parses RFC 4180 CSV text (header row first) into a validated table.
pub fn load_table(csv_text: &str, entry: &TableManifestEntry) -> Result<Table, StoreError> {
    let csv_err = |e: csv::Error| StoreError::Csv {
        table: entry.id.clone(),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => {
            return Err(StoreError::MissingHeader {
                table: entry.id.clone(),
            })
        }
    };
    let columns: Vec<String> = header.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (r, record) in records.enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != columns.len() {
            return Err(StoreError::RaggedRow {
                table: entry.id.clone(),
                row: r,
                found: record.len(),
                expected: columns.len(),
            });
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    let keys = entry
        .candidate_keys
        .iter()
        .map(|k| CandidateKey::new(k.iter().cloned()))
        .collect();
    let table = Table::new(entry.id.clone(), columns, rows, keys)?;
    Ok(if entry.infer_keys {
        table.with_inferred_keys(DEFAULT_MAX_KEY_WIDTH, DEFAULT_INFERENCE_ROW_BOUND)
    } else {
        table
    })
}

/// The lookup universe: tables in a fixed order, addressable by identifier.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableCatalog {
    tables: Vec<Table>,
    by_id: HashMap<String, usize>,
}

impl TableCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tables(tables: impl IntoIterator<Item = Table>) -> Result<Self, StoreError> {
        let mut catalog = Self::new();
        for t in tables {
            catalog.insert(t)?;
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, table: Table) -> Result<(), StoreError> {
        if self.by_id.contains_key(table.id()) {
            return Err(StoreError::DuplicateTable(table.id().to_owned()));
        }
        self.by_id.insert(table.id().to_owned(), self.tables.len());
        self.tables.push(table);
        Ok(())
    }

    /// Adds every table of `other` after the tables already present.
    pub fn extend(&mut self, other: TableCatalog) -> Result<(), StoreError> {
        for t in other.tables {
            self.insert(t)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table(&self, index: usize) -> &Table {
        &self.tables[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&Table> {
        self.index_of(id).map(|i| &self.tables[i])
    }

    /// Loads a manifest file; `csv_path`s are resolved relative to the manifest's directory.
    pub fn load_manifest(path: &Path) -> Result<Self, StoreError> {
        let io = |p: &Path, e: std::io::Error| StoreError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        let text = std::fs::read_to_string(path).map_err(|e| io(path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| StoreError::Manifest(e.to_string()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut catalog = Self::new();
        for entry in &manifest.tables {
            let rel = entry.csv_path.as_deref().ok_or_else(|| {
                StoreError::Manifest(format!("table {} has no csv_path", entry.id))
            })?;
            let csv_path = base.join(rel);
            let csv_text = std::fs::read_to_string(&csv_path).map_err(|e| io(&csv_path, e))?;
            catalog.insert(load_table(&csv_text, entry)?)?;
        }
        if let Some(opts) = &manifest.stdlib {
            catalog.extend(crate::stdlib::stdlib_catalog(opts))?;
        }
        Ok(catalog)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, keys: &[&[&str]], infer: bool) -> TableManifestEntry {
        TableManifestEntry {
            id: id.into(),
            csv_path: None,
            candidate_keys: keys
                .iter()
                .map(|k| k.iter().map(|s| s.to_string()).collect())
                .collect(),
            infer_keys: infer,
        }
    }

    const COMP: &str =
        "Id,Name\nc1,Microsoft\nc2,Google\nc3,Apple\nc4,Facebook\nc5,IBM\nc6,Xerox\n";

    #[test]
    fn loads_comp_table() {
        let t = load_table(COMP, &entry("Comp", &[&["Id"]], false)).unwrap();
        assert_eq!(t.row_count(), 6);
        assert_eq!(t.candidate_keys(), &[CandidateKey::new(["Id"])]);
        assert_eq!(t.cell(1, 3), "Facebook");
    }

    #[test]
    fn header_only_is_valid() {
        let t = load_table("Id,Name\n", &entry("Comp", &[&["Id"]], false)).unwrap();
        assert_eq!(t.row_count(), 0);
        assert_eq!(t.candidate_keys().len(), 1);
    }

    #[test]
    fn duplicate_key_value_is_rejected() {
        let csv = "Bike,Price\nDucati100,\"10,000\"\nHonda125,\"11,500\"\nHonda125,\"19,000\"\n";
        let err = load_table(csv, &entry("BikePrices", &[&["Bike"]], false)).unwrap_err();
        assert_eq!(
            err,
            StoreError::KeyViolation {
                table: "BikePrices".into(),
                key: vec!["Bike".into()],
                first: 1,
                second: 2
            }
        );
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = load_table("a,b\n1\n", &entry("T", &[], false)).unwrap_err();
        assert!(matches!(
            err,
            StoreError::RaggedRow {
                row: 0,
                found: 1,
                ..
            }
        ));
    }

    #[test]
    fn whitespace_is_preserved() {
        let t = load_table("a\n x \n", &entry("T", &[], false)).unwrap();
        assert_eq!(t.cell(0, 0), " x ");
    }

    #[test]
    fn infers_month_keys() {
        let mut csv = String::from("MN,MW\n");
        for (i, m) in ["January", "February", "March"].iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, m));
        }
        let t = load_table(&csv, &entry("Month", &[], true)).unwrap();
        assert_eq!(
            t.candidate_keys(),
            &[CandidateKey::new(["MN"]), CandidateKey::new(["MW"])]
        );
    }

    #[test]
    fn infers_time_keys() {
        let mut csv = String::from("24Hour,12Hour,AMPM\n");
        for h in 0..24 {
            let twelve = if h > 12 { h - 12 } else { h };
            let ampm = if h < 12 { "AM" } else { "PM" };
            csv.push_str(&format!("{h},{twelve},{ampm}\n"));
        }
        let t = load_table(&csv, &entry("Time", &[], true)).unwrap();
        assert_eq!(
            t.candidate_keys(),
            &[
                CandidateKey::new(["24Hour"]),
                CandidateKey::new(["12Hour", "AMPM"])
            ]
        );
    }

    #[test]
    fn identical_rows_have_no_key() {
        let t = load_table("a,b\nx,y\nx,y\n", &entry("T", &[], true)).unwrap();
        assert!(t.candidate_keys().is_empty());
    }

    #[test]
    fn declared_keys_merge_with_inferred() {
        let t = load_table("a,b,c\n1,x,p\n2,x,q\n", &entry("T", &[&["b", "a"]], true)).unwrap();
        let keys: Vec<_> = t
            .candidate_keys()
            .iter()
            .map(|k| k.columns.clone())
            .collect();
        assert_eq!(
            keys,
            vec![
                vec!["a".to_string()],
                vec!["c".into()],
                vec!["a".into(), "b".into()]
            ]
        );
    }

    #[test]
    fn catalog_rejects_duplicate_ids() {
        let t = load_table(COMP, &entry("Comp", &[&["Id"]], false)).unwrap();
        let err = TableCatalog::from_tables([t.clone(), t]).unwrap_err();
        assert_eq!(err, StoreError::DuplicateTable("Comp".into()));
    }

    proptest::proptest! {
        #[test]
        fn inferred_keys_are_unique_and_minimal(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..3, 4), 0..7)
        ) {
            let columns: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(|v| v.to_string()).collect())
                .collect();
            let table = Table::new("T", columns, rows, vec![]).unwrap();
            let keys = infer_candidate_keys(&table, 3);
            for key in &keys {
                let idx: Vec<usize> = key.columns.iter().map(|c| table.column_index(c).unwrap()).collect();
                let mut seen = HashSet::new();
                for row in table.rows() {
                    let tuple: Vec<&String> = idx.iter().map(|&i| &row[i]).collect();
                    proptest::prop_assert!(seen.insert(tuple));
                }
                for other in &keys {
                    let strict_superset = other != key
                        && key.columns.iter().all(|c| other.columns.contains(c));
                    proptest::prop_assert!(!strict_superset);
                }
            }
        }
    }
}
