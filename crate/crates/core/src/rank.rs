//! Ranking programs and extracting the best ones from a version space.
//!
//! A [`Score`] is compared lexicographically in field order; smaller is
//! better. Every field except `depth` is a sum over the program's parts, which
//! is what lets [`top_k`] work on the shared structure: for each depth bound it
//! keeps the `k` best partial programs per node and dag, then merges the depth
//! strata by full score.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::expr::{eval, eval_lookup, Atom, LookupExpr, Predicate, StringExpr};
use crate::position::{Position, PositionSet};
use crate::space::{DagId, GenAtom, GenPred, GenProg, NodeId, Root, VersionSpace};
use crate::table::{InputState, TableCatalog};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct Score {
    /// Number of constant strings, in atoms and in predicates.
    pub constant_weight: i64,
    /// Constant positions.
    pub const_pos_penalty: i64,
    /// Total length of the constant strings.
    pub constant_length: i64,
    /// Number of concatenated atoms, counting nested expressions.
    pub atoms: i64,
    /// Maximum `Select` nesting.
    pub depth: i64,
    /// `Select`s nested directly inside a `Select` over the same table.
    pub self_join_penalty: i64,
    pub predicate_count: i64,
    /// Minus the total length of strings produced by non-constant atoms on the
    /// first example.
    pub match_length_bonus: i64,
    /// Number of AST nodes.
    pub size: i64,
}

/// The additive part of a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Cost {
    constant_weight: i64,
    const_pos_penalty: i64,
    constant_length: i64,
    atoms: i64,
    self_join_penalty: i64,
    predicate_count: i64,
    match_length_bonus: i64,
    size: i64,
}

impl std::ops::Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost {
            constant_weight: self.constant_weight + o.constant_weight,
            constant_length: self.constant_length + o.constant_length,
            atoms: self.atoms + o.atoms,
            self_join_penalty: self.self_join_penalty + o.self_join_penalty,
            predicate_count: self.predicate_count + o.predicate_count,
            match_length_bonus: self.match_length_bonus + o.match_length_bonus,
            const_pos_penalty: self.const_pos_penalty + o.const_pos_penalty,
            size: self.size + o.size,
        }
    }
}

impl Cost {
    fn size(n: i64) -> Cost {
        Cost {
            size: n,
            ..Cost::default()
        }
    }

    fn with_depth(self, depth: usize) -> Score {
        Score {
            constant_weight: self.constant_weight,
            constant_length: self.constant_length,
            atoms: self.atoms,
            depth: depth as i64,
            self_join_penalty: self.self_join_penalty,
            predicate_count: self.predicate_count,
            match_length_bonus: self.match_length_bonus,
            const_pos_penalty: self.const_pos_penalty,
            size: self.size,
        }
    }
}

fn position_cost(p: &Position) -> Cost {
    Cost {
        const_pos_penalty: p.is_const() as i64,
        size: p.size() as i64,
        ..Cost::default()
    }
}

fn chars(s: &str) -> i64 {
    s.chars().count() as i64
}

/// Scores a program; atom lengths are measured on `state`.
pub fn score(e: &StringExpr, state: &InputState, catalog: &TableCatalog) -> Score {
    string_cost(e, None, state, catalog).with_depth(e.depth())
}

fn string_cost(
    e: &StringExpr,
    ctx: Option<&str>,
    state: &InputState,
    catalog: &TableCatalog,
) -> Cost {
    let mut c = Cost::size(1);
    for a in &e.atoms {
        c = c + Cost {
            atoms: 1,
            ..Cost::default()
        };
        c = c + match a {
            Atom::Const(s) => Cost {
                constant_weight: 1,
                constant_length: chars(s),
                size: 1,
                ..Cost::default()
            },
            Atom::Lookup(l) => {
                let len = eval_lookup(l, state, catalog)
                    .map(|s| chars(&s))
                    .unwrap_or(0);
                lookup_cost(l, ctx, state, catalog)
                    + Cost {
                        match_length_bonus: -len,
                        ..Cost::default()
                    }
            }
            Atom::SubStr { source, start, end } => {
                let len = eval(&StringExpr::atom(a.clone()), state, catalog)
                    .map(|s| chars(&s))
                    .unwrap_or(0);
                lookup_cost(source, ctx, state, catalog)
                    + position_cost(start)
                    + position_cost(end)
                    + Cost {
                        match_length_bonus: -len,
                        size: 1,
                        ..Cost::default()
                    }
            }
        };
    }
    c
}

fn lookup_cost(
    l: &LookupExpr,
    ctx: Option<&str>,
    state: &InputState,
    catalog: &TableCatalog,
) -> Cost {
    match l {
        LookupExpr::Var(_) => Cost::size(1),
        LookupExpr::Select {
            table, predicates, ..
        } => {
            let mut c = Cost {
                self_join_penalty: (ctx == Some(table.as_str())) as i64,
                predicate_count: predicates.len() as i64,
                size: 2,
                ..Cost::default()
            };
            for p in predicates {
                c = c + Cost::size(1) + string_cost(&p.rhs, Some(table), state, catalog);
            }
            c
        }
    }
}

/// A ranked program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranked {
    pub program: StringExpr,
    pub score: Score,
}

/// The `k` best programs of the space, best first. The scores are exact;
/// among programs with equal scores the choice is deterministic but not
/// otherwise specified.
pub fn top_k(vs: &VersionSpace, k: usize) -> Vec<Ranked> {
    if k == 0 || vs.is_empty() {
        return Vec::new();
    }
    let mut r = Ranker {
        vs,
        k,
        nodes: HashMap::new(),
        dags: HashMap::new(),
        positions: HashMap::new(),
    };
    let mut all: Vec<Ranked> = Vec::new();
    for b in 0..=vs.depth {
        let list: Vec<(Cost, StringExpr)> = match vs.root {
            Root::Empty => Vec::new(),
            Root::Node(n) => {
                let len = chars(&vs.node(n).values[0]);
                let extra = Cost {
                    atoms: 1,
                    match_length_bonus: -len,
                    size: 1,
                    ..Cost::default()
                };
                r.node(n, b, None)
                    .iter()
                    .map(|(c, e)| (*c + extra, StringExpr::lookup(e.clone())))
                    .collect()
            }
            Root::Dag(d) => r.dag(d, b, None)[0].clone(),
        };
        for (c, e) in list {
            let score = c.with_depth(e.depth());
            all.push(Ranked { program: e, score });
        }
    }
    all.sort_by(|x, y| (x.score, &x.program).cmp(&(y.score, &y.program)));
    all.dedup_by(|x, y| x.program == y.program);
    all.truncate(k);
    all
}

type List<T> = Rc<Vec<(Cost, T)>>;
type Suffixes = Rc<Vec<Vec<(Cost, StringExpr)>>>;

struct Ranker<'a> {
    vs: &'a VersionSpace,
    k: usize,
    nodes: HashMap<(NodeId, usize, Option<usize>), List<LookupExpr>>,
    /// Best suffixes from every dag node to the target.
    dags: HashMap<(DagId, usize, Option<usize>), Suffixes>,
    positions: HashMap<usize, List<Position>>,
}

fn best<T>(mut v: Vec<(Cost, T)>, k: usize) -> Vec<(Cost, T)> {
    v.sort_by_key(|x| x.0);
    v.truncate(k);
    v
}

/// The `k` cheapest index pairs of two lists sorted by cost.
fn combine<A, B>(xs: &[(Cost, A)], ys: &[(Cost, B)], k: usize) -> Vec<(Cost, usize, usize)> {
    let mut out = Vec::new();
    if xs.is_empty() || ys.is_empty() {
        return out;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((xs[0].0 + ys[0].0, 0usize, 0usize)));
    while let Some(Reverse((c, i, j))) = heap.pop() {
        out.push((c, i, j));
        if out.len() == k {
            break;
        }
        if j + 1 < ys.len() {
            heap.push(Reverse((xs[i].0 + ys[j + 1].0, i, j + 1)));
        }
        if j == 0 && i + 1 < xs.len() {
            heap.push(Reverse((xs[i + 1].0 + ys[0].0, i + 1, 0)));
        }
    }
    out
}

impl Ranker<'_> {
    fn node(&mut self, n: NodeId, b: usize, ctx: Option<usize>) -> List<LookupExpr> {
        if let Some(l) = self.nodes.get(&(n, b, ctx)) {
            return l.clone();
        }
        let vs = self.vs;
        let mut out: Vec<(Cost, LookupExpr)> = Vec::new();
        for p in &vs.node(n).progs {
            match p {
                GenProg::Var(i) => out.push((Cost::size(1), LookupExpr::Var(*i))),
                GenProg::Select { .. } if b == 0 => {}
                GenProg::Select {
                    table,
                    column,
                    conds,
                } => {
                    let t = vs.catalog.table(*table);
                    for c in conds {
                        let key = &t.candidate_keys()[c.key];
                        let base = Cost {
                            self_join_penalty: (ctx == Some(*table)) as i64,
                            predicate_count: c.preds.len() as i64,
                            size: 2,
                            ..Cost::default()
                        };
                        let mut partial: Vec<(Cost, Vec<Predicate>)> = vec![(base, Vec::new())];
                        for (p, col) in c.preds.iter().zip(&key.columns) {
                            let rhs = self.pred(p, b - 1, Some(*table));
                            partial = combine(&partial, &rhs, self.k)
                                .into_iter()
                                .map(|(c, i, j)| {
                                    let mut ps = partial[i].1.clone();
                                    ps.push(Predicate::new(col.clone(), rhs[j].1.clone()));
                                    (c + Cost::size(1), ps)
                                })
                                .collect();
                        }
                        for (c, ps) in partial {
                            out.push((
                                c,
                                LookupExpr::select(t.columns()[*column].clone(), t.id(), ps),
                            ));
                        }
                    }
                }
            }
        }
        let out = Rc::new(best(out, self.k));
        self.nodes.insert((n, b, ctx), out.clone());
        out
    }

    fn pred(&mut self, p: &GenPred, b: usize, ctx: Option<usize>) -> List<StringExpr> {
        match p {
            GenPred::Lookup { konst, node } => {
                let mut out = Vec::new();
                if let Some(s) = konst {
                    let c = Cost {
                        constant_weight: 1,
                        constant_length: chars(s),
                        atoms: 1,
                        size: 2,
                        ..Cost::default()
                    };
                    out.push((c, StringExpr::constant(s.clone())));
                }
                if let Some(m) = node {
                    let len = chars(&self.vs.node(*m).values[0]);
                    let extra = Cost {
                        atoms: 1,
                        match_length_bonus: -len,
                        size: 1,
                        ..Cost::default()
                    };
                    for (c, e) in self.node(*m, b, ctx).iter() {
                        out.push((*c + extra, StringExpr::lookup(e.clone())));
                    }
                }
                Rc::new(best(out, self.k))
            }
            GenPred::Dag(d) => Rc::new(self.dag(*d, b, ctx)[0].clone()),
        }
    }

    fn position_list(&mut self, set: &std::sync::Arc<PositionSet>) -> List<Position> {
        let key = std::sync::Arc::as_ptr(set) as usize;
        if let Some(l) = self.positions.get(&key) {
            return l.clone();
        }
        let mut v: Vec<(Cost, Position)> = set.iter().map(|p| (position_cost(&p), p)).collect();
        v.sort();
        v.truncate(self.k);
        let l = Rc::new(v);
        self.positions.insert(key, l.clone());
        l
    }

    fn atom(&mut self, a: &GenAtom, len: i64, b: usize, ctx: Option<usize>) -> Vec<(Cost, Atom)> {
        let bonus = Cost {
            atoms: 1,
            match_length_bonus: -len,
            ..Cost::default()
        };
        match a {
            GenAtom::Const(s) => vec![(
                Cost {
                    constant_weight: 1,
                    constant_length: chars(s),
                    atoms: 1,
                    size: 1,
                    ..Cost::default()
                },
                Atom::Const(s.clone()),
            )],
            GenAtom::Whole(n) => self
                .node(*n, b, ctx)
                .iter()
                .map(|(c, e)| (*c + bonus, Atom::Lookup(e.clone())))
                .collect(),
            GenAtom::SubStr { source, start, end } => {
                let sources = self.node(*source, b, ctx);
                let starts = self.position_list(start);
                let ends = self.position_list(end);
                let pos: Vec<(Cost, (usize, usize))> = combine(&starts, &ends, self.k)
                    .into_iter()
                    .map(|(c, i, j)| (c, (i, j)))
                    .collect();
                combine(&sources, &pos, self.k)
                    .into_iter()
                    .map(|(c, s, q)| {
                        let (i, j) = pos[q].1;
                        (
                            c + bonus + Cost::size(1),
                            Atom::SubStr {
                                source: sources[s].1.clone(),
                                start: starts[i].1.clone(),
                                end: ends[j].1.clone(),
                            },
                        )
                    })
                    .collect()
            }
        }
    }

    fn dag(&mut self, d: DagId, b: usize, ctx: Option<usize>) -> Suffixes {
        if let Some(l) = self.dags.get(&(d, b, ctx)) {
            return l.clone();
        }
        let vs = self.vs;
        let dag = vs.dag(d);
        let n = dag.node_count();
        let out_edges = dag.out_edges();
        let mut suffix: Vec<Vec<(Cost, StringExpr)>> = vec![Vec::new(); n];
        suffix[n - 1] = vec![(Cost::size(1), StringExpr::new(Vec::new()))];
        for v in (0..n - 1).rev() {
            let mut cands = Vec::new();
            for &ei in &out_edges[v] {
                let e = &dag.edges[ei];
                if suffix[e.to as usize].is_empty() {
                    continue;
                }
                let len = (dag.positions[e.to as usize] - dag.positions[e.from as usize]) as i64;
                let mut atoms = Vec::new();
                for a in &e.atoms {
                    atoms.extend(self.atom(a, len, b, ctx));
                }
                let atoms = best(atoms, self.k);
                let rest = &suffix[e.to as usize];
                for (c, i, j) in combine(&atoms, rest, self.k) {
                    cands.push((c, ei, i, j, atoms[i].1.clone()));
                }
            }
            cands.sort_by_key(|x| x.0);
            cands.truncate(self.k);
            suffix[v] = cands
                .into_iter()
                .map(|(c, ei, _, j, a)| {
                    let rest = &suffix[dag.edges[ei].to as usize][j].1;
                    let mut list = Vec::with_capacity(rest.atoms.len() + 1);
                    list.push(a);
                    list.extend(rest.atoms.iter().cloned());
                    (c, StringExpr::new(list))
                })
                .collect();
        }
        let out = Rc::new(suffix);
        self.dags.insert((d, b, ctx), out.clone());
        out
    }
}
