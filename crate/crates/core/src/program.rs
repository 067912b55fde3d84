//! Saved programs: the ranked list of a synthesis result together with the
//! tables it reads, so it can be applied without the original catalog.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{StoreError, ValidationError};
use crate::expr::{validate, StringExpr};
use crate::rank::{Ranked, Score};
use crate::synth::{predict, RowPrediction, SynthesisResult};
use crate::table::{CandidateKey, InputState, Table, TableCatalog};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProgramFileError {
    #[error("malformed program file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported program file version {0}")]
    Version(u32),
    #[error("program {rank}: surface text {surface:?} does not match its AST")]
    SurfaceMismatch { rank: usize, surface: String },
    #[error("program {rank}: {source}")]
    Invalid {
        rank: usize,
        source: ValidationError,
    },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("row {row} has {found} inputs, the program expects {expected}")]
    Arity {
        row: usize,
        found: usize,
        expected: usize,
    },
}

/// One program of the ranked list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramEntry {
    /// One-based.
    pub rank: usize,
    pub surface: String,
    pub score: Score,
    pub ast: StringExpr,
}

/// A table in the form stored in program files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableData {
    pub id: String,
    pub columns: Vec<String>,
    pub candidate_keys: Vec<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

impl From<&Table> for TableData {
    fn from(t: &Table) -> Self {
        TableData {
            id: t.id().to_string(),
            columns: t.columns().to_vec(),
            candidate_keys: t
                .candidate_keys()
                .iter()
                .map(|k| k.columns.clone())
                .collect(),
            rows: t.rows().to_vec(),
        }
    }
}

impl TableData {
    pub fn to_table(&self) -> Result<Table, StoreError> {
        Table::new(
            self.id.clone(),
            self.columns.clone(),
            self.rows.clone(),
            self.candidate_keys
                .iter()
                .map(|k| CandidateKey::new(k.iter().cloned()))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramFile {
    pub version: u32,
    /// Number of input columns.
    pub arity: usize,
    /// Distinct outputs collected per row when applying.
    pub top_n: usize,
    /// Best first.
    pub programs: Vec<ProgramEntry>,
    /// The tables referenced by any program, in catalog order.
    pub tables: Vec<TableData>,
}

impl ProgramFile {
    /// The candidate pool of `result`, which includes its ranked list.
    pub fn from_result(result: &SynthesisResult) -> Self {
        let programs: Vec<ProgramEntry> = result
            .pool
            .iter()
            .enumerate()
            .map(|(i, r)| ProgramEntry {
                rank: i + 1,
                surface: r.program.to_string(),
                score: r.score,
                ast: r.program.clone(),
            })
            .collect();
        let used: std::collections::BTreeSet<String> =
            programs.iter().flat_map(|p| p.ast.tables()).collect();
        let tables = result
            .catalog
            .tables()
            .iter()
            .filter(|t| used.contains(t.id()))
            .map(TableData::from)
            .collect();
        ProgramFile {
            version: FORMAT_VERSION,
            arity: result.examples.arity().unwrap_or(0),
            top_n: result.options.top_n,
            programs,
            tables,
        }
    }

    /// Parses and checks a program file.
    pub fn from_json(text: &str) -> Result<Self, ProgramFileError> {
        let file: ProgramFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(ProgramFileError::Version(file.version));
        }
        let catalog = file.catalog()?;
        for p in &file.programs {
            if p.ast.to_string() != p.surface {
                return Err(ProgramFileError::SurfaceMismatch {
                    rank: p.rank,
                    surface: p.surface.clone(),
                });
            }
            validate(&p.ast, &catalog, file.arity).map_err(|source| ProgramFileError::Invalid {
                rank: p.rank,
                source,
            })?;
        }
        Ok(file)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("program files serialize");
        s.push('\n');
        s
    }

    pub fn catalog(&self) -> Result<TableCatalog, StoreError> {
        TableCatalog::from_tables(
            self.tables
                .iter()
                .map(TableData::to_table)
                .collect::<Result<Vec<_>, _>>()?,
        )
    }

    pub fn ranked(&self) -> Vec<Ranked> {
        self.programs
            .iter()
            .map(|p| Ranked {
                program: p.ast.clone(),
                score: p.score,
            })
            .collect()
    }

    /// Predictions for `rows`, as [`crate::synth::apply`] gives for the
    /// result the file was saved from.
    pub fn apply(&self, rows: &[InputState]) -> Result<Vec<RowPrediction>, ProgramFileError> {
        if let Some((row, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.arity() != self.arity)
        {
            return Err(ProgramFileError::Arity {
                row,
                found: r.arity(),
                expected: self.arity,
            });
        }
        let catalog = self.catalog()?;
        Ok(predict(&self.ranked(), self.top_n, &catalog, rows))
    }
}
