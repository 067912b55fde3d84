//! Built-in tables for times, months and ordinal day numbers.

use serde::{Deserialize, Serialize};

use crate::table::{CandidateKey, Table, TableCatalog};

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StdlibOptions {
    /// Store the numeric key columns (`24Hour`, `MN`, `Num`) zero-padded to two digits.
    pub padded: bool,
    /// Include only these tables; all of them when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<String>>,
}

fn number(n: u32, padded: bool) -> String {
    if padded {
        format!("{n:02}")
    } else {
        n.to_string()
    }
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

/// `Time(24Hour, 12Hour, AMPM)`: (0, 12, AM), (1, 1, AM) .. (11, 11, AM), (12, 12, PM), (13, 1, PM) .. (23, 11, PM).
pub fn time_table(opts: &StdlibOptions) -> Table {
    let rows = (0..24)
        .map(|h| {
            let twelve = match h {
                0 => 12,
                1..=12 => h,
                _ => h - 12,
            };
            let ampm = if h < 12 { "AM" } else { "PM" };
            vec![number(h, opts.padded), twelve.to_string(), ampm.to_string()]
        })
        .collect();
    Table::new(
        "Time",
        strings(&["24Hour", "12Hour", "AMPM"]),
        rows,
        vec![
            CandidateKey::new(["24Hour"]),
            CandidateKey::new(["12Hour", "AMPM"]),
        ],
    )
    .expect("time table is well formed")
}

/// `Month(MN, MW)`: (1, January) .. (12, December).
pub fn month_table(opts: &StdlibOptions) -> Table {
    let rows = MONTHS
        .iter()
        .zip(1..)
        .map(|(m, n)| vec![number(n, opts.padded), m.to_string()])
        .collect();
    Table::new(
        "Month",
        strings(&["MN", "MW"]),
        rows,
        vec![CandidateKey::new(["MN"]), CandidateKey::new(["MW"])],
    )
    .expect("month table is well formed")
}

/// The English ordinal suffix of `n`.
pub fn ordinal_suffix(n: u32) -> &'static str {
    match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    }
}

/// `DateOrd(Num, Ord)`: (1, st), (2, nd), (3, rd) .. (31, st).
pub fn date_ord_table(opts: &StdlibOptions) -> Table {
    let rows = (1..=31)
        .map(|n| vec![number(n, opts.padded), ordinal_suffix(n).to_string()])
        .collect();
    Table::new(
        "DateOrd",
        strings(&["Num", "Ord"]),
        rows,
        vec![CandidateKey::new(["Num"])],
    )
    .expect("ordinal table is well formed")
}

/// The catalog of the selected built-in tables.
pub fn stdlib_catalog(opts: &StdlibOptions) -> TableCatalog {
    let all = [time_table(opts), month_table(opts), date_ord_table(opts)];
    let keep = |t: &Table| {
        opts.tables
            .as_ref()
            .is_none_or(|names| names.iter().any(|n| n == t.id()))
    };
    TableCatalog::from_tables(all.into_iter().filter(keep))
        .expect("built-in table ids are distinct")
}
