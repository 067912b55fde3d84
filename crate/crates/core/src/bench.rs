//! Benchmark tasks: a directory with `manifest.json` and its tables,
//! `examples.csv`, `holdout.csv` and optionally `expected_program.txt`.
//!
//! Example and holdout files have one column per input variable followed by
//! the expected output.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use thiserror::Error;

use crate::denote::count;
use crate::error::{ParseError, StoreError, SynthesisError};
use crate::expr::{eval, StringExpr};
use crate::syntax::parse_program;
use crate::synth::{apply, refine, synthesize, ExampleSet, SynthOptions, SynthesisResult};
use crate::table::{InputState, TableCatalog};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{path}: {source}")]
    Program { path: String, source: ParseError },
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

/// A CSV file with a header row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grid {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Grid {
    /// Parses CSV text; `name` labels errors.
    pub fn parse(text: &str, name: &str) -> Result<Grid, StoreError> {
        let csv_err = |e: csv::Error| StoreError::Csv {
            table: name.to_string(),
            message: e.to_string(),
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();
        let header: Vec<String> = match records.next() {
            Some(r) => r.map_err(csv_err)?.iter().map(str::to_owned).collect(),
            None => return Ok(Grid::default()),
        };
        let mut rows = Vec::new();
        for (r, record) in records.enumerate() {
            let record = record.map_err(csv_err)?;
            if record.len() != header.len() {
                return Err(StoreError::RaggedRow {
                    table: name.to_string(),
                    row: r,
                    found: record.len(),
                    expected: header.len(),
                });
            }
            rows.push(record.iter().map(str::to_owned).collect());
        }
        Ok(Grid { header, rows })
    }

    pub fn read(path: &Path) -> Result<Grid, StoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| StoreError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Grid::parse(&text, &path.display().to_string())
    }

    /// Every row as an input state.
    pub fn inputs(&self) -> Vec<InputState> {
        self.rows
            .iter()
            .map(|r| InputState::new(r.iter().cloned()))
            .collect()
    }

    /// Every row as inputs followed by the output in the last column.
    pub fn pairs(&self) -> Vec<(InputState, String)> {
        self.rows
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| {
                let (out, inputs) = r.split_last().expect("non-empty row");
                (InputState::new(inputs.iter().cloned()), out.clone())
            })
            .collect()
    }

    /// CSV text of the grid.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_writer(Vec::new());
        if !self.header.is_empty() {
            w.write_record(&self.header).expect("in-memory write");
        }
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
    }
}

/// A loaded benchmark task.
#[derive(Debug, Clone)]
pub struct Task {
    pub name: String,
    pub dir: PathBuf,
    pub catalog: Arc<TableCatalog>,
    pub examples: Vec<(InputState, String)>,
    pub holdout: Vec<(InputState, String)>,
    pub expected: Option<StringExpr>,
}

impl Task {
    pub fn load(dir: &Path) -> Result<Task, TaskError> {
        let catalog = TableCatalog::load_manifest(&dir.join("manifest.json"))?;
        let examples = Grid::read(&dir.join("examples.csv"))?.pairs();
        let holdout = Grid::read(&dir.join("holdout.csv"))?.pairs();
        let expected_path = dir.join("expected_program.txt");
        let expected = match std::fs::read_to_string(&expected_path) {
            Ok(text) => Some(
                parse_program(text.trim()).map_err(|source| TaskError::Program {
                    path: expected_path.display().to_string(),
                    source,
                })?,
            ),
            Err(_) => None,
        };
        let name = dir
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        Ok(Task {
            name,
            dir: dir.to_path_buf(),
            catalog: Arc::new(catalog),
            examples,
            holdout,
            expected,
        })
    }

    /// Every task directory under `root`, sorted by name.
    pub fn load_all(root: &Path) -> Result<Vec<Task>, TaskError> {
        let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)
            .map_err(|e| StoreError::Io {
                path: root.display().to_string(),
                message: e.to_string(),
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("manifest.json").exists())
            .collect();
        dirs.sort();
        dirs.iter().map(|d| Task::load(d)).collect()
    }

    /// Learns from the examples one at a time until the best program is
    /// correct on the remaining examples and the holdout rows.
    pub fn run(&self, opts: &SynthOptions) -> Result<TaskReport, TaskError> {
        let start = Instant::now();
        let mut result: Option<SynthesisResult> = None;
        let mut used = 0;
        for (input, output) in &self.examples {
            let next = match &result {
                None => synthesize(
                    &ExampleSet::from_pairs([(input.clone(), output.clone())])?,
                    &self.catalog,
                    opts,
                )?,
                Some(prev) => refine(prev, input.clone(), output.clone())?,
            };
            used += 1;
            let done = self.holdout_correct(&next) == self.holdout.len()
                && self.examples[used..].iter().all(|(i, o)| {
                    next.top().is_some_and(|t| {
                        eval(&t.program, i, &self.catalog).ok().as_ref() == Some(o)
                    })
                });
            result = Some(next);
            if done {
                break;
            }
        }
        let elapsed = start.elapsed();
        let result = result.ok_or(SynthesisError::NoExamples)?;
        Ok(TaskReport {
            name: self.name.clone(),
            examples_used: used,
            holdout_correct: self.holdout_correct(&result),
            holdout_total: self.holdout.len(),
            top: result.top().map(|r| r.program.clone()),
            count: count(&result.version_space),
            first_size: result.first_size,
            final_size: result.version_space.size(),
            elapsed,
        })
    }

    fn holdout_correct(&self, result: &SynthesisResult) -> usize {
        let rows: Vec<InputState> = self.holdout.iter().map(|(i, _)| i.clone()).collect();
        apply(result, &rows)
            .iter()
            .zip(&self.holdout)
            .filter(|(p, (_, want))| p.prediction() == Some(want.as_str()))
            .count()
    }
}

/// Outcome of [`Task::run`].
#[derive(Debug, Clone)]
pub struct TaskReport {
    pub name: String,
    pub examples_used: usize,
    pub holdout_correct: usize,
    pub holdout_total: usize,
    pub top: Option<StringExpr>,
    /// Programs in the final version space.
    pub count: BigUint,
    /// Size of the space learned from the first example.
    pub first_size: u64,
    /// Size of the final space.
    pub final_size: u64,
    pub elapsed: Duration,
}

impl TaskReport {
    pub fn solved(&self) -> bool {
        self.holdout_correct == self.holdout_total
    }
}
