//! Program ASTs and their evaluator.
//!
//! One AST covers all three languages. A syntactic program uses only `Const`,
//! variable lookups and substrings of variables; a lookup program is a single
//! `Lookup` atom whose predicates are constants or lookups; anything else is a
//! combined program.

use crate::error::{EvalError, ValidationError};
use crate::position::{eval_position, Position};
use crate::table::{InputState, TableCatalog};

/// `Concatenate(f1, ..., fn)`; the empty list denotes `""`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StringExpr {
    pub atoms: Vec<Atom>,
}

/// An atomic expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Const(String),
    Lookup(LookupExpr),
    SubStr {
        source: LookupExpr,
        start: Position,
        end: Position,
    },
}

/// `vi` or `Select(C, T, p1 ∧ ... ∧ pn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LookupExpr {
    /// Zero-based variable index; printed as `v{index+1}`.
    Var(usize),
    Select {
        column: String,
        table: String,
        predicates: Vec<Predicate>,
    },
}

/// `C = e`. A constant predicate `C = "s"` has a single `Const` atom on the right.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub column: String,
    pub rhs: StringExpr,
}

impl StringExpr {
    pub fn new(atoms: Vec<Atom>) -> Self {
        StringExpr { atoms }
    }

    pub fn atom(atom: Atom) -> Self {
        StringExpr { atoms: vec![atom] }
    }

    pub fn constant(s: impl Into<String>) -> Self {
        Self::atom(Atom::Const(s.into()))
    }

    pub fn var(index: usize) -> Self {
        Self::atom(Atom::Lookup(LookupExpr::Var(index)))
    }

    pub fn lookup(e: LookupExpr) -> Self {
        Self::atom(Atom::Lookup(e))
    }

    /// The single constant string, if this expression is one.
    pub fn as_const(&self) -> Option<&str> {
        match self.atoms.as_slice() {
            [Atom::Const(s)] => Some(s),
            _ => None,
        }
    }

    /// The lookup, if this expression is a single lookup atom.
    pub fn as_lookup(&self) -> Option<&LookupExpr> {
        match self.atoms.as_slice() {
            [Atom::Lookup(e)] => Some(e),
            _ => None,
        }
    }

    /// Maximum nesting of `Select`.
    pub fn depth(&self) -> usize {
        self.atoms.iter().map(Atom::depth).max().unwrap_or(0)
    }

    /// Number of AST nodes, counting the concatenation itself.
    pub fn size(&self) -> u32 {
        1 + self.atoms.iter().map(Atom::size).sum::<u32>()
    }

    /// Tables mentioned anywhere in the expression.
    pub fn tables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_tables(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_tables(&self, out: &mut Vec<String>) {
        for a in &self.atoms {
            match a {
                Atom::Const(_) => {}
                Atom::Lookup(e) | Atom::SubStr { source: e, .. } => e.collect_tables(out),
            }
        }
    }
}

impl Atom {
    pub fn var(index: usize) -> Self {
        Atom::Lookup(LookupExpr::Var(index))
    }

    pub fn depth(&self) -> usize {
        match self {
            Atom::Const(_) => 0,
            Atom::Lookup(e) | Atom::SubStr { source: e, .. } => e.depth(),
        }
    }

    pub fn size(&self) -> u32 {
        match self {
            Atom::Const(_) => 1,
            Atom::Lookup(e) => e.size(),
            Atom::SubStr { source, start, end } => 1 + source.size() + start.size() + end.size(),
        }
    }
}

impl LookupExpr {
    pub fn select(
        column: impl Into<String>,
        table: impl Into<String>,
        predicates: Vec<Predicate>,
    ) -> Self {
        LookupExpr::Select {
            column: column.into(),
            table: table.into(),
            predicates,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LookupExpr::Var(_) => 0,
            LookupExpr::Select { predicates, .. } => {
                1 + predicates.iter().map(|p| p.rhs.depth()).max().unwrap_or(0)
            }
        }
    }

    pub fn size(&self) -> u32 {
        match self {
            LookupExpr::Var(_) => 1,
            LookupExpr::Select { predicates, .. } => {
                2 + predicates.iter().map(|p| 1 + p.rhs.size()).sum::<u32>()
            }
        }
    }

    fn collect_tables(&self, out: &mut Vec<String>) {
        if let LookupExpr::Select {
            table, predicates, ..
        } = self
        {
            out.push(table.clone());
            for p in predicates {
                p.rhs.collect_tables(out);
            }
        }
    }
}

impl Predicate {
    pub fn new(column: impl Into<String>, rhs: StringExpr) -> Self {
        Predicate {
            column: column.into(),
            rhs,
        }
    }

    pub fn constant(column: impl Into<String>, s: impl Into<String>) -> Self {
        Self::new(column, StringExpr::constant(s))
    }
}

/// Checks table, column, key and variable references.
pub fn validate(
    e: &StringExpr,
    catalog: &TableCatalog,
    arity: usize,
) -> Result<(), ValidationError> {
    for a in &e.atoms {
        match a {
            Atom::Const(_) => {}
            Atom::Lookup(l) | Atom::SubStr { source: l, .. } => validate_lookup(l, catalog, arity)?,
        }
    }
    Ok(())
}

fn validate_lookup(
    e: &LookupExpr,
    catalog: &TableCatalog,
    arity: usize,
) -> Result<(), ValidationError> {
    match e {
        LookupExpr::Var(i) => {
            if *i >= arity {
                return Err(ValidationError::VarOutOfRange {
                    index: i + 1,
                    arity,
                });
            }
        }
        LookupExpr::Select {
            column,
            table,
            predicates,
        } => {
            resolve_select(column, table, predicates, catalog)?;
            for p in predicates {
                validate(&p.rhs, catalog, arity)?;
            }
        }
    }
    Ok(())
}

/// (table index, column index, key index) of a `Select`.
fn resolve_select(
    column: &str,
    table: &str,
    predicates: &[Predicate],
    catalog: &TableCatalog,
) -> Result<(usize, usize, usize), ValidationError> {
    let ti = catalog
        .index_of(table)
        .ok_or_else(|| ValidationError::UnknownTable(table.to_string()))?;
    let t = catalog.table(ti);
    let unknown = |c: &str| ValidationError::UnknownColumn {
        table: table.to_string(),
        column: c.to_string(),
    };
    let ci = t.column_index(column).ok_or_else(|| unknown(column))?;
    let cols: Vec<&str> = predicates.iter().map(|p| p.column.as_str()).collect();
    for c in &cols {
        t.column_index(c).ok_or_else(|| unknown(c))?;
    }
    let key = t
        .key_for_columns(&cols)
        .ok_or_else(|| ValidationError::NotACandidateKey {
            table: table.to_string(),
            columns: cols.iter().map(|c| c.to_string()).collect(),
        })?;
    Ok((ti, ci, key))
}

/// Evaluates a program on one input state.
pub fn eval(
    e: &StringExpr,
    state: &InputState,
    catalog: &TableCatalog,
) -> Result<String, EvalError> {
    eval_with(e, state, catalog, false)
}

/// Like [`eval`], but a `Select` that matches no row is an error.
pub fn eval_strict(
    e: &StringExpr,
    state: &InputState,
    catalog: &TableCatalog,
) -> Result<String, EvalError> {
    eval_with(e, state, catalog, true)
}

fn eval_with(
    e: &StringExpr,
    state: &InputState,
    catalog: &TableCatalog,
    strict: bool,
) -> Result<String, EvalError> {
    let mut out = String::new();
    for a in &e.atoms {
        eval_atom_into(a, state, catalog, strict, &mut out)?;
    }
    Ok(out)
}

fn eval_atom_into(
    a: &Atom,
    state: &InputState,
    catalog: &TableCatalog,
    strict: bool,
    out: &mut String,
) -> Result<(), EvalError> {
    match a {
        Atom::Const(s) => out.push_str(s),
        Atom::Lookup(l) => out.push_str(&lookup_with(l, state, catalog, strict)?),
        Atom::SubStr { source, start, end } => {
            let subject: Vec<char> = lookup_with(source, state, catalog, strict)?
                .chars()
                .collect();
            let undefined = || EvalError::PositionUndefined {
                subject: subject.iter().collect(),
            };
            let i = eval_position(start, &subject).ok_or_else(undefined)?;
            let j = eval_position(end, &subject).ok_or_else(undefined)?;
            if i > j {
                return Err(EvalError::InvertedRange { start: i, end: j });
            }
            out.extend(&subject[i..j]);
        }
    }
    Ok(())
}

/// Evaluates a lookup; a `Select` whose condition matches no row yields `""`.
pub fn eval_lookup(
    e: &LookupExpr,
    state: &InputState,
    catalog: &TableCatalog,
) -> Result<String, EvalError> {
    lookup_with(e, state, catalog, false)
}

fn lookup_with(
    e: &LookupExpr,
    state: &InputState,
    catalog: &TableCatalog,
    strict: bool,
) -> Result<String, EvalError> {
    match e {
        LookupExpr::Var(i) => state
            .get(*i)
            .map(str::to_string)
            .ok_or(EvalError::VarOutOfRange {
                index: i + 1,
                arity: state.arity(),
            }),
        LookupExpr::Select {
            column,
            table,
            predicates,
        } => {
            let (ti, ci, key) = resolve_select(column, table, predicates, catalog)?;
            let values = predicates
                .iter()
                .map(|p| eval_with(&p.rhs, state, catalog, strict))
                .collect::<Result<Vec<_>, _>>()?;
            let t = catalog.table(ti);
            match t.lookup(key, &values) {
                Some(r) => Ok(t.cell(ci, r).to_string()),
                None if strict => Err(EvalError::NoMatchingRow {
                    table: table.clone(),
                    values,
                }),
                None => Ok(String::new()),
            }
        }
    }
}
