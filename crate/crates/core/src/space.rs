//! Version spaces: succinct sets of programs.
//!
//! A [`VersionSpace`] is a node graph plus an arena of string dags. Nodes
//! stand for intermediate strings (one value per example) and carry
//! generalized programs that compute them: input variables or generalized
//! `Select`s. Dags stand for sets of concatenations; their edges carry
//! generalized atoms whose sources are nodes. A generalized predicate's
//! right-hand side is either a constant/node pair or a nested dag.
//!
//! The same structure holds all three languages. A lookup space has a node as
//! its root; syntactic and combined spaces have a dag root.

use std::fmt::Write;
use std::sync::Arc;

use crate::position::PositionSet;
use crate::table::TableCatalog;

pub type NodeId = u32;
pub type DagId = u32;

/// An intermediate string, one value per example, and the programs computing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub values: Vec<String>,
    pub progs: Vec<GenProg>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenProg {
    /// Zero-based input variable.
    Var(usize),
    /// `Select(column, table, B)` with indices into the catalog.
    Select {
        table: usize,
        column: usize,
        conds: Vec<GenCond>,
    },
}

/// One generalized conjunction over the candidate key `key` of the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenCond {
    pub key: usize,
    /// One predicate per key column, in key order.
    pub preds: Vec<GenPred>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenPred {
    /// `C = s`, `C = η` or `C = {s, η}`.
    Lookup {
        konst: Option<String>,
        node: Option<NodeId>,
    },
    /// `C = ẽs`.
    Dag(DagId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenAtom {
    Const(String),
    /// The whole string of a node.
    Whole(NodeId),
    SubStr {
        source: NodeId,
        start: Arc<PositionSet>,
        end: Arc<PositionSet>,
    },
}

impl GenAtom {
    pub fn source(&self) -> Option<NodeId> {
        match self {
            GenAtom::Const(_) => None,
            GenAtom::Whole(n) | GenAtom::SubStr { source: n, .. } => Some(*n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub atoms: Vec<GenAtom>,
}

/// A dag over output positions. Node 0 is the source and the last node is the
/// target; nodes are numbered in topological order and every edge goes from a
/// smaller to a larger index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    /// Position of each dag node in the first example's string.
    pub positions: Vec<u32>,
    /// Sorted by `(from, to)`.
    pub edges: Vec<Edge>,
}

impl Dag {
    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn target(&self) -> u32 {
        self.positions.len() as u32 - 1
    }

    /// Edge indices leaving each node.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from as usize].push(i);
        }
        out
    }
}

/// Counts reported by [`VersionSpace::stats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpaceStats {
    pub nodes: usize,
    pub progs: usize,
    pub conds: usize,
    pub dags: usize,
    pub edges: usize,
    pub atoms: usize,
    pub positions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Root {
    /// No program at all.
    Empty,
    /// A lookup space: the programs of one node.
    Node(NodeId),
    /// A concatenation space.
    Dag(DagId),
}

#[derive(Debug, Clone)]
pub struct VersionSpace {
    pub catalog: Arc<TableCatalog>,
    pub nodes: Vec<Node>,
    pub dags: Vec<Dag>,
    pub root: Root,
    /// Maximum `Select` nesting of denoted programs.
    pub depth: usize,
    /// Number of examples this space was learned from.
    pub examples: usize,
}

impl VersionSpace {
    pub fn empty(catalog: Arc<TableCatalog>, depth: usize, examples: usize) -> Self {
        VersionSpace {
            catalog,
            nodes: Vec::new(),
            dags: Vec::new(),
            root: Root::Empty,
            depth,
            examples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.root == Root::Empty
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n as usize]
    }

    pub fn dag(&self, d: DagId) -> &Dag {
        &self.dags[d as usize]
    }

    /// Number of terminal symbols in the reachable structure.
    pub fn size(&self) -> u64 {
        let (nodes, dags) = self.reachable();
        let mut total = 0u64;
        for (n, keep) in nodes.iter().enumerate() {
            if !keep {
                continue;
            }
            for p in &self.nodes[n].progs {
                total += match p {
                    GenProg::Var(_) => 1,
                    GenProg::Select { conds, .. } => {
                        2 + conds
                            .iter()
                            .flat_map(|c| &c.preds)
                            .map(|p| match p {
                                GenPred::Lookup { konst, node } => {
                                    1 + konst.is_some() as u64 + node.is_some() as u64
                                }
                                GenPred::Dag(_) => 2,
                            })
                            .sum::<u64>()
                    }
                };
            }
        }
        for (d, keep) in dags.iter().enumerate() {
            if !keep {
                continue;
            }
            for e in &self.dags[d].edges {
                for a in &e.atoms {
                    total += match a {
                        GenAtom::Const(_) | GenAtom::Whole(_) => 1,
                        GenAtom::SubStr { start, end, .. } => {
                            1 + start.len() as u64 + end.len() as u64
                        }
                    };
                }
            }
        }
        total
    }

    /// Counts of the reachable parts.
    pub fn stats(&self) -> SpaceStats {
        let (nodes, dags) = self.reachable();
        let mut st = SpaceStats::default();
        for (n, _) in nodes.iter().enumerate().filter(|x| *x.1) {
            st.nodes += 1;
            for p in &self.nodes[n].progs {
                st.progs += 1;
                if let GenProg::Select { conds, .. } = p {
                    st.conds += conds.len();
                }
            }
        }
        for (d, _) in dags.iter().enumerate().filter(|x| *x.1) {
            st.dags += 1;
            for e in &self.dags[d].edges {
                st.edges += 1;
                st.atoms += e.atoms.len();
                for a in &e.atoms {
                    if let GenAtom::SubStr { start, end, .. } = a {
                        st.positions += start.len() + end.len();
                    }
                }
            }
        }
        st
    }

    /// Nodes and dags reachable from the root.
    pub fn reachable(&self) -> (Vec<bool>, Vec<bool>) {
        let mut nodes = vec![false; self.nodes.len()];
        let mut dags = vec![false; self.dags.len()];
        let mut stack: Vec<Root> = vec![self.root];
        while let Some(r) = stack.pop() {
            match r {
                Root::Empty => {}
                Root::Node(n) => {
                    if std::mem::replace(&mut nodes[n as usize], true) {
                        continue;
                    }
                    for p in &self.nodes[n as usize].progs {
                        if let GenProg::Select { conds, .. } = p {
                            for pred in conds.iter().flat_map(|c| &c.preds) {
                                match pred {
                                    GenPred::Lookup { node: Some(m), .. } => {
                                        stack.push(Root::Node(*m))
                                    }
                                    GenPred::Lookup { .. } => {}
                                    GenPred::Dag(d) => stack.push(Root::Dag(*d)),
                                }
                            }
                        }
                    }
                }
                Root::Dag(d) => {
                    if std::mem::replace(&mut dags[d as usize], true) {
                        continue;
                    }
                    for e in &self.dags[d as usize].edges {
                        for a in &e.atoms {
                            if let Some(n) = a.source() {
                                stack.push(Root::Node(n));
                            }
                        }
                    }
                }
            }
        }
        (nodes, dags)
    }

    /// Whether node references form a cycle (self-joins); denotations are then
    /// unrolled to `depth`.
    pub fn is_cyclic(&self) -> bool {
        // node -> nodes its programs reference, directly or through dags
        let succ = |n: usize| -> Vec<usize> {
            let mut out = Vec::new();
            for p in &self.nodes[n].progs {
                if let GenProg::Select { conds, .. } = p {
                    for pred in conds.iter().flat_map(|c| &c.preds) {
                        match pred {
                            GenPred::Lookup { node: Some(m), .. } => out.push(*m as usize),
                            GenPred::Lookup { .. } => {}
                            GenPred::Dag(d) => {
                                for e in &self.dags[*d as usize].edges {
                                    out.extend(
                                        e.atoms
                                            .iter()
                                            .filter_map(|a| a.source())
                                            .map(|m| m as usize),
                                    );
                                }
                            }
                        }
                    }
                }
            }
            out
        };
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, succ(start), 0usize)];
            state[start] = 1;
            while let Some((n, next, i)) = stack.last_mut() {
                if *i < next.len() {
                    let m = next[*i];
                    *i += 1;
                    match state[m] {
                        1 => return true,
                        0 => {
                            state[m] = 1;
                            let s = succ(m);
                            stack.push((m, s, 0));
                        }
                        _ => {}
                    }
                } else {
                    state[*n] = 2;
                    stack.pop();
                }
            }
        }
        false
    }

    /// Removes every part with an empty denotation and everything unreachable
    /// from the root, renumbering nodes and dags.
    pub fn prune(&mut self) {
        let (node_ok, dag_ok) = self.inhabited();
        let root_ok = match self.root {
            Root::Empty => false,
            Root::Node(n) => node_ok[n as usize],
            Root::Dag(d) => dag_ok[d as usize],
        };
        if !root_ok {
            self.nodes.clear();
            self.dags.clear();
            self.root = Root::Empty;
            return;
        }
        // drop dead parts in place, then compact what the root still reaches
        for node in &mut self.nodes {
            node.progs.retain_mut(|p| match p {
                GenProg::Var(_) => true,
                GenProg::Select { conds, .. } => {
                    conds.retain_mut(|c| {
                        c.preds.iter_mut().all(|p| match p {
                            GenPred::Lookup { konst, node } => {
                                if node.is_some_and(|m| !node_ok[m as usize]) {
                                    *node = None;
                                }
                                konst.is_some() || node.is_some()
                            }
                            GenPred::Dag(d) => dag_ok[*d as usize],
                        })
                    });
                    !conds.is_empty()
                }
            });
        }
        for dag in &mut self.dags {
            for e in &mut dag.edges {
                e.atoms
                    .retain(|a| a.source().is_none_or(|n| node_ok[n as usize]));
            }
            dag.edges.retain(|e| !e.atoms.is_empty());
            trim_dag(dag);
        }
        self.compact();
    }

    fn inhabited(&self) -> (Vec<bool>, Vec<bool>) {
        let mut node_ok = vec![false; self.nodes.len()];
        let mut dag_ok = vec![false; self.dags.len()];
        loop {
            let mut changed = false;
            for (n, node) in self.nodes.iter().enumerate() {
                if node_ok[n] {
                    continue;
                }
                let ok = node.progs.iter().any(|p| match p {
                    GenProg::Var(_) => true,
                    GenProg::Select { conds, .. } => conds.iter().any(|c| {
                        c.preds.iter().all(|p| match p {
                            GenPred::Lookup { konst, node } => {
                                konst.is_some() || node.is_some_and(|m| node_ok[m as usize])
                            }
                            GenPred::Dag(d) => dag_ok[*d as usize],
                        })
                    }),
                });
                if ok {
                    node_ok[n] = true;
                    changed = true;
                }
            }
            for (d, dag) in self.dags.iter().enumerate() {
                if dag_ok[d] {
                    continue;
                }
                let mut reach = vec![false; dag.node_count()];
                reach[0] = true;
                for e in &dag.edges {
                    if reach[e.from as usize]
                        && e.atoms
                            .iter()
                            .any(|a| a.source().is_none_or(|n| node_ok[n as usize]))
                    {
                        reach[e.to as usize] = true;
                    }
                }
                if reach[dag.target() as usize] {
                    dag_ok[d] = true;
                    changed = true;
                }
            }
            if !changed {
                return (node_ok, dag_ok);
            }
        }
    }

    /// Keeps only what the root reaches.
    fn compact(&mut self) {
        let (nodes, dags) = self.reachable();
        let node_map = renumber(&nodes);
        let dag_map = renumber(&dags);
        let old_nodes = std::mem::take(&mut self.nodes);
        let old_dags = std::mem::take(&mut self.dags);
        for (n, mut node) in old_nodes.into_iter().enumerate() {
            if !nodes[n] {
                continue;
            }
            for p in &mut node.progs {
                if let GenProg::Select { conds, .. } = p {
                    for pred in conds.iter_mut().flat_map(|c| &mut c.preds) {
                        match pred {
                            GenPred::Lookup { node, .. } => {
                                if let Some(m) = node {
                                    *m = node_map[*m as usize];
                                }
                            }
                            GenPred::Dag(d) => *d = dag_map[*d as usize],
                        }
                    }
                }
            }
            self.nodes.push(node);
        }
        for (d, mut dag) in old_dags.into_iter().enumerate() {
            if !dags[d] {
                continue;
            }
            for e in &mut dag.edges {
                for a in &mut e.atoms {
                    match a {
                        GenAtom::Const(_) => {}
                        GenAtom::Whole(n) | GenAtom::SubStr { source: n, .. } => {
                            *n = node_map[*n as usize]
                        }
                    }
                }
            }
            self.dags.push(dag);
        }
        self.root = match self.root {
            Root::Empty => Root::Empty,
            Root::Node(n) => Root::Node(node_map[n as usize]),
            Root::Dag(d) => Root::Dag(dag_map[d as usize]),
        };
    }

    /// A plain-text description of the reachable structure.
    pub fn dump(&self) -> String {
        let (nodes, dags) = self.reachable();
        let mut out = String::new();
        let _ = writeln!(out, "root: {:?}", self.root);
        let _ = writeln!(
            out,
            "depth: {}  examples: {}  size: {}",
            self.depth,
            self.examples,
            self.size()
        );
        for (n, node) in self.nodes.iter().enumerate() {
            if !nodes[n] {
                continue;
            }
            let _ = writeln!(out, "node η{n} {:?}", node.values);
            for p in &node.progs {
                match p {
                    GenProg::Var(i) => {
                        let _ = writeln!(out, "  v{}", i + 1);
                    }
                    GenProg::Select {
                        table,
                        column,
                        conds,
                    } => {
                        let t = self.catalog.table(*table);
                        let _ = writeln!(out, "  Select({}, {})", t.columns()[*column], t.id());
                        for c in conds {
                            let cols: Vec<&str> = t.candidate_keys()[c.key]
                                .columns
                                .iter()
                                .map(String::as_str)
                                .collect();
                            let preds: Vec<String> = cols
                                .iter()
                                .zip(&c.preds)
                                .map(|(col, p)| match p {
                                    GenPred::Lookup { konst, node } => {
                                        let mut parts = Vec::new();
                                        if let Some(s) = konst {
                                            parts.push(format!("{s:?}"));
                                        }
                                        if let Some(m) = node {
                                            parts.push(format!("η{m}"));
                                        }
                                        format!("{col} = {{{}}}", parts.join(", "))
                                    }
                                    GenPred::Dag(d) => format!("{col} = dag{d}"),
                                })
                                .collect();
                            let _ = writeln!(out, "    {}", preds.join(" ∧ "));
                        }
                    }
                }
            }
        }
        for (d, dag) in self.dags.iter().enumerate() {
            if !dags[d] {
                continue;
            }
            let _ = writeln!(out, "dag{d} nodes {}", dag.node_count());
            for e in &dag.edges {
                let atoms: Vec<String> = e
                    .atoms
                    .iter()
                    .map(|a| match a {
                        GenAtom::Const(s) => format!("ConstStr({s:?})"),
                        GenAtom::Whole(n) => format!("η{n}"),
                        GenAtom::SubStr { source, start, end } => {
                            format!(
                                "SubStr(η{source}, {} positions, {} positions)",
                                start.len(),
                                end.len()
                            )
                        }
                    })
                    .collect();
                let _ = writeln!(out, "  {} -> {}: {}", e.from, e.to, atoms.join(" | "));
            }
        }
        out
    }
}

fn renumber(keep: &[bool]) -> Vec<u32> {
    let mut next = 0u32;
    keep.iter()
        .map(|&k| {
            let id = next;
            if k {
                next += 1;
            }
            id
        })
        .collect()
}

/// Drops dag nodes that lie on no source-to-target path and renumbers the rest.
pub(crate) fn trim_dag(dag: &mut Dag) {
    let n = dag.node_count();
    let mut fwd = vec![false; n];
    fwd[0] = true;
    for e in &dag.edges {
        if fwd[e.from as usize] {
            fwd[e.to as usize] = true;
        }
    }
    let mut bwd = vec![false; n];
    bwd[n - 1] = true;
    for e in dag.edges.iter().rev() {
        if bwd[e.to as usize] {
            bwd[e.from as usize] = true;
        }
    }
    let keep: Vec<bool> = (0..n).map(|i| fwd[i] && bwd[i]).collect();
    if !keep[n - 1] {
        // no path: keep the endpoints so the dag stays well-formed but empty
        dag.positions = vec![dag.positions[0], dag.positions[n - 1]];
        dag.edges.clear();
        if n == 1 {
            dag.positions.truncate(1);
        }
        return;
    }
    let map = renumber(&keep);
    dag.edges
        .retain(|e| keep[e.from as usize] && keep[e.to as usize]);
    for e in &mut dag.edges {
        e.from = map[e.from as usize];
        e.to = map[e.to as usize];
    }
    dag.positions = dag
        .positions
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| *p)
        .collect();
}
