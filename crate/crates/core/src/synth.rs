//! The learning loop: generate per example, intersect, rank, apply.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SynthesisError;
use crate::expr::{eval, eval_strict};
use crate::generate::{generate_str_u, GenOptions};
use crate::intersect::intersect;
use crate::rank::{top_k, Ranked};
use crate::space::VersionSpace;
use crate::table::{InputState, TableCatalog};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub input: InputState,
    pub output: String,
}

/// Input/output examples of a common arity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSet {
    arity: Option<usize>,
    examples: Vec<Example>,
}

impl ExampleSet {
    pub fn new() -> Self {
        ExampleSet::default()
    }

    /// Builds a set from pairs, rejecting arity mismatches and conflicts.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, SynthesisError>
    where
        I: IntoIterator<Item = (InputState, S)>,
        S: Into<String>,
    {
        let mut set = ExampleSet::new();
        for (input, output) in pairs {
            set.push(input, output)?;
        }
        Ok(set)
    }

    /// Adds an example. Returns whether it was new; an exact repeat is ignored.
    pub fn push(
        &mut self,
        input: InputState,
        output: impl Into<String>,
    ) -> Result<bool, SynthesisError> {
        let output = output.into();
        let index = self.examples.len();
        if let Some(expected) = self.arity {
            if input.arity() != expected {
                return Err(SynthesisError::ArityMismatch {
                    index,
                    found: input.arity(),
                    expected,
                });
            }
        }
        if let Some(first) = self.examples.iter().position(|e| e.input == input) {
            if self.examples[first].output != output {
                return Err(SynthesisError::ConflictingExamples {
                    first,
                    second: index,
                });
            }
            return Ok(false);
        }
        self.arity = Some(input.arity());
        self.examples.push(Example { input, output });
        Ok(true)
    }

    pub fn arity(&self) -> Option<usize> {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthOptions {
    /// Maximum `Select` nesting; defaults to the number of tables.
    pub depth: Option<usize>,
    /// Programs kept in the ranked list and consulted for ambiguity.
    pub top_n: usize,
    /// Programs extracted from the version space when collecting distinct
    /// outputs for a row.
    pub pool: usize,
    /// Learn in the combined language; when false only exact lookups are learned.
    pub syntactic: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            depth: None,
            top_n: 10,
            pool: 100,
            syntactic: true,
        }
    }
}

impl SynthOptions {
    fn gen(&self) -> GenOptions {
        GenOptions {
            depth: self.depth,
            syntactic: self.syntactic,
        }
    }
}

/// A learned version space with its best programs.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub version_space: VersionSpace,
    /// The best `top_n` programs, best first.
    pub ranked: Vec<Ranked>,
    /// The best `pool` programs, best first.
    pub pool: Vec<Ranked>,
    pub examples: ExampleSet,
    pub catalog: Arc<TableCatalog>,
    pub options: SynthOptions,
    /// `size()` of the space generated from the first example.
    pub first_size: u64,
}

impl SynthesisResult {
    pub fn top(&self) -> Option<&Ranked> {
        self.ranked.first()
    }
}

/// Learns the programs consistent with every example.
pub fn synthesize(
    examples: &ExampleSet,
    catalog: &Arc<TableCatalog>,
    opts: &SynthOptions,
) -> Result<SynthesisResult, SynthesisError> {
    let list = examples.examples();
    if list.is_empty() {
        return Err(SynthesisError::NoExamples);
    }
    let gen = opts.gen();
    let spaces: Vec<VersionSpace> = std::thread::scope(|s| {
        let handles: Vec<_> = list
            .iter()
            .map(|e| s.spawn(move || generate_str_u(&e.input, &e.output, catalog, gen)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("generation panicked"))
            .collect()
    });
    let first_size = spaces[0].size();
    let mut acc: Option<VersionSpace> = None;
    for (i, vs) in spaces.into_iter().enumerate() {
        let next = match acc {
            None => vs,
            Some(prev) => intersect(&prev, &vs),
        };
        if next.is_empty() {
            return Err(SynthesisError::NoProgramFound { example: i });
        }
        acc = Some(next);
    }
    let vs = acc.expect("at least one example");
    Ok(finish(
        vs,
        examples.clone(),
        catalog.clone(),
        *opts,
        first_size,
    ))
}

/// Adds one example to a previous result, intersecting with the retained space.
pub fn refine(
    prev: &SynthesisResult,
    input: InputState,
    output: impl Into<String>,
) -> Result<SynthesisResult, SynthesisError> {
    let output = output.into();
    let mut examples = prev.examples.clone();
    if !examples.push(input.clone(), output.clone())? {
        return Ok(prev.clone());
    }
    let vs = generate_str_u(&input, &output, &prev.catalog, prev.options.gen());
    let next = intersect(&prev.version_space, &vs);
    if next.is_empty() {
        return Err(SynthesisError::NoProgramFound {
            example: examples.len() - 1,
        });
    }
    Ok(finish(
        next,
        examples,
        prev.catalog.clone(),
        prev.options,
        prev.first_size,
    ))
}

fn finish(
    vs: VersionSpace,
    examples: ExampleSet,
    catalog: Arc<TableCatalog>,
    options: SynthOptions,
    first_size: u64,
) -> SynthesisResult {
    let consistent = |r: &Ranked| {
        examples
            .examples()
            .iter()
            .all(|e| eval(&r.program, &e.input, &catalog).is_ok_and(|o| o == e.output))
    };
    let pool: Vec<Ranked> = top_k(&vs, options.pool.max(options.top_n))
        .into_iter()
        .filter(consistent)
        .collect();
    let ranked = pool.iter().take(options.top_n).cloned().collect();
    SynthesisResult {
        version_space: vs,
        ranked,
        pool,
        examples,
        catalog,
        options,
        first_size,
    }
}

/// Outputs predicted for one row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPrediction {
    /// Distinct outputs of the best programs, best first; the first is the prediction.
    pub outputs: Vec<String>,
    /// At least two distinct outputs.
    pub ambiguous: bool,
    /// The best program could not be evaluated on the row.
    pub failed: bool,
}

impl RowPrediction {
    pub fn prediction(&self) -> Option<&str> {
        if self.failed {
            None
        } else {
            self.outputs.first().map(String::as_str)
        }
    }
}

/// Runs the best programs on each row, collecting up to `top_n` distinct outputs.
pub fn apply(result: &SynthesisResult, rows: &[InputState]) -> Vec<RowPrediction> {
    predict(&result.pool, result.options.top_n, &result.catalog, rows)
}

/// Runs ranked programs, best first, on each row, collecting up to `top_n`
/// distinct outputs per row.
pub fn predict(
    programs: &[Ranked],
    top_n: usize,
    catalog: &TableCatalog,
    rows: &[InputState],
) -> Vec<RowPrediction> {
    rows.iter()
        .map(|row| predict_row(programs, top_n, catalog, row))
        .collect()
}

fn predict_row(
    programs: &[Ranked],
    top_n: usize,
    catalog: &TableCatalog,
    row: &InputState,
) -> RowPrediction {
    let mut outputs: Vec<String> = Vec::new();
    let mut failed = false;
    for (i, r) in programs.iter().enumerate() {
        if outputs.len() >= top_n {
            break;
        }
        match eval_strict(&r.program, row, catalog) {
            Ok(o) => {
                if !outputs.contains(&o) {
                    outputs.push(o);
                }
            }
            Err(_) if i == 0 => failed = true,
            Err(_) => {}
        }
    }
    RowPrediction {
        ambiguous: outputs.len() >= 2,
        outputs,
        failed,
    }
}
