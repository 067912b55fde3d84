//! The `semfill` command line.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use semfill::bench::{Grid, Task};
use semfill::error::SynthesisError;
use semfill::program::ProgramFile;
use semfill::stdlib::{stdlib_catalog, StdlibOptions};
use semfill::synth::{synthesize, ExampleSet, SynthOptions};
use semfill::table::TableCatalog;

#[derive(Debug, Parser)]
#[command(
    name = "semfill",
    version,
    about = "Learn string transformations with table lookups from examples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn ranked programs from examples and write a program file.
    Learn(LearnArgs),
    /// Run a program file on the rows of a CSV file.
    Apply(ApplyArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
    /// Print the ranked programs of a program file.
    Explain(ExplainArgs),
    /// Run the benchmark tasks.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Catalog manifest, or a directory containing manifest.json.
    #[arg(long)]
    pub catalog: PathBuf,
    /// CSV with a header row, input columns and the output last.
    #[arg(long)]
    pub examples: PathBuf,
    /// Maximum lookup nesting.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Programs kept in the ranked list.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Add the built-in Time, Month and DateOrd tables.
    #[arg(long)]
    pub stdlib: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub prog: PathBuf,
    /// CSV with a header row and one column per input.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Add an `ambiguous` column: true, false or failed.
    #[arg(long)]
    pub flag_ambiguous: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub prog: PathBuf,
    /// Programs to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of task directories.
    #[arg(long, default_value = "benchmarks")]
    pub dir: PathBuf,
    /// Run only this task.
    #[arg(long)]
    pub task: Option<String>,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input files; exit 1.
    Input(anyhow::Error),
    /// The examples admit no program; exit 2.
    NoProgram(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::NoProgram(_) => 2,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e:#}"),
            CliError::NoProgram(m) => f.write_str(m),
        }
    }
}

/// Parses the process arguments and runs; returns the exit status.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("semfill: {e}");
            e.code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Learn(a) => learn(&a),
        Command::Apply(a) => apply(&a),
        Command::Serve(a) => serve(&a),
        Command::Explain(a) => explain(&a),
        Command::Bench(a) => bench(&a),
    }
}

fn catalog(path: &Path, stdlib: bool) -> anyhow::Result<TableCatalog> {
    let manifest = if path.is_dir() {
        path.join("manifest.json")
    } else {
        path.to_path_buf()
    };
    let mut catalog = TableCatalog::load_manifest(&manifest)
        .with_context(|| format!("loading {}", manifest.display()))?;
    if stdlib {
        for t in stdlib_catalog(&StdlibOptions::default()).tables() {
            if catalog.get(t.id()).is_none() {
                catalog.insert(t.clone())?;
            }
        }
    }
    Ok(catalog)
}

pub fn learn(a: &LearnArgs) -> Result<(), CliError> {
    let catalog = Arc::new(catalog(&a.catalog, a.stdlib)?);
    let grid =
        Grid::read(&a.examples).with_context(|| format!("reading {}", a.examples.display()))?;
    let pairs = grid.pairs();
    if pairs.is_empty() {
        return Err(anyhow!(
            "{} has no examples\nusage: semfill learn --catalog <manifest> --examples <csv> --out <path>\n\
             the examples CSV needs a header row and at least one row of inputs followed by the output",
            a.examples.display()
        )
        .into());
    }
    let examples = ExampleSet::from_pairs(pairs).map_err(|e| match e {
        SynthesisError::ConflictingExamples { first, second } => anyhow!(
            "conflicting examples: rows {} and {} of {} have the same inputs but different outputs",
            first + 1,
            second + 1,
            a.examples.display()
        ),
        e => anyhow!("{}: {e}", a.examples.display()),
    })?;
    let opts = SynthOptions {
        depth: a.depth,
        top_n: a.top,
        ..SynthOptions::default()
    };
    let result = synthesize(&examples, &catalog, &opts).map_err(|e| match e {
        SynthesisError::NoProgramFound { example } => CliError::NoProgram(format!(
            "no program is consistent with examples 1 to {}",
            example + 1
        )),
        e => CliError::Input(e.into()),
    })?;
    let file = ProgramFile::from_result(&result);
    fs::write(&a.out, file.to_json()).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(top) = result.top() {
        println!("{top}", top = top.program);
    }
    Ok(())
}

fn read_program(path: &Path) -> anyhow::Result<ProgramFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProgramFile::from_json(&text).with_context(|| path.display().to_string())
}

pub fn apply(a: &ApplyArgs) -> Result<(), CliError> {
    let prog = read_program(&a.prog)?;
    let mut grid =
        Grid::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    if grid.header.is_empty() {
        grid.header = (1..=prog.arity).map(|i| format!("v{i}")).collect();
    }
    if grid.header.len() != prog.arity {
        return Err(anyhow!(
            "{} has {} columns but the program reads {} inputs",
            a.input.display(),
            grid.header.len(),
            prog.arity
        )
        .into());
    }
    let predictions = prog.apply(&grid.inputs()).map_err(anyhow::Error::from)?;
    grid.header.push("output".into());
    if a.flag_ambiguous {
        grid.header.push("ambiguous".into());
    }
    for (row, p) in grid.rows.iter_mut().zip(&predictions) {
        row.push(p.prediction().unwrap_or_default().to_string());
        if a.flag_ambiguous {
            let flag = if p.failed {
                "failed"
            } else if p.ambiguous {
                "true"
            } else {
                "false"
            };
            row.push(flag.into());
        }
    }
    fs::write(&a.out, grid.to_csv()).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

pub fn explain(a: &ExplainArgs) -> Result<(), CliError> {
    let prog = read_program(&a.prog)?;
    println!(
        "{} input(s); tables: {}",
        prog.arity,
        prog.tables
            .iter()
            .map(|t| t.id.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    for p in prog.programs.iter().take(a.top) {
        let s = &p.score;
        println!(
            "#{:<3} constants {} const-pos {} constant-chars {} atoms {} depth {} self-joins {} predicates {} match {} size {}",
            p.rank,
            s.constant_weight,
            s.const_pos_penalty,
            s.constant_length,
            s.atoms,
            s.depth,
            s.self_join_penalty,
            s.predicate_count,
            s.match_length_bonus,
            s.size
        );
        println!("     {}", p.surface);
    }
    Ok(())
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let tasks = Task::load_all(&a.dir).with_context(|| format!("loading {}", a.dir.display()))?;
    let mut unsolved = 0;
    for t in tasks
        .iter()
        .filter(|t| a.task.as_ref().is_none_or(|n| *n == t.name))
    {
        let r = t
            .run(&SynthOptions::default())
            .with_context(|| t.name.clone())?;
        if !r.solved() {
            unsolved += 1;
        }
        println!(
            "{:<14} {:>2} example(s)  {}/{} held out  {:>9.2?}  size {} -> {}",
            r.name,
            r.examples_used,
            r.holdout_correct,
            r.holdout_total,
            r.elapsed,
            r.first_size,
            r.final_size
        );
    }
    if unsolved > 0 {
        return Err(anyhow!("{unsolved} task(s) not solved").into());
    }
    Ok(())
}

pub fn serve(a: &ServeArgs) -> Result<(), CliError> {
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(a.addr)
            .await
            .with_context(|| format!("binding {}", a.addr))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, crate::api::router(SynthOptions::default())).await?;
        Ok::<_, anyhow::Error>(())
    })?;
    Ok(())
}
