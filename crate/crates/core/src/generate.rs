//! Learning the version space of a single example.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::position::{PositionSet, TokenProfile};
use crate::space::{
    Dag, DagId, Edge, GenAtom, GenCond, GenPred, GenProg, Node, NodeId, Root, VersionSpace,
};
use crate::table::{InputState, TableCatalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    /// Maximum `Select` nesting; defaults to the number of tables.
    pub depth: Option<usize>,
    /// When false, table cells are reachable only by exact equality and
    /// predicates compare with constants or nodes, as in the pure lookup language.
    pub syntactic: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            depth: None,
            syntactic: true,
        }
    }
}

impl GenOptions {
    pub fn depth_for(&self, catalog: &TableCatalog) -> usize {
        self.depth.unwrap_or(catalog.len())
    }
}

/// All syntactic programs (constants and substrings of inputs) producing `s`.
pub fn generate_str_s(state: &InputState, s: &str) -> VersionSpace {
    let catalog = Arc::new(TableCatalog::new());
    let mut b = Builder::new(&catalog, state, true);
    b.seed_inputs();
    let sources = b.sources(b.nodes.len());
    let root = b.build_dag(s, &sources);
    b.finish(catalog.clone(), Root::Dag(root), 0)
}

/// All lookup programs of depth at most `k` producing `s`.
pub fn generate_str_t(
    state: &InputState,
    s: &str,
    catalog: &Arc<TableCatalog>,
    depth: Option<usize>,
) -> VersionSpace {
    let opts = GenOptions {
        depth,
        syntactic: false,
    };
    generate_nodes(state, s, catalog, opts)
}

/// The lookup node graph with reachability relaxed to substring relations and
/// predicates holding nested concatenation dags. The root is the node whose
/// value is `s`, if any.
pub fn generate_str_t_prime(
    state: &InputState,
    s: &str,
    catalog: &Arc<TableCatalog>,
    depth: Option<usize>,
) -> VersionSpace {
    let opts = GenOptions {
        depth,
        syntactic: true,
    };
    generate_nodes(state, s, catalog, opts)
}

fn generate_nodes(
    state: &InputState,
    s: &str,
    catalog: &Arc<TableCatalog>,
    opts: GenOptions,
) -> VersionSpace {
    let k = opts.depth_for(catalog);
    let mut b = Builder::new(catalog, state, opts.syntactic);
    b.seed_inputs();
    b.reach(k);
    let root = b.index.get(s).map_or(Root::Empty, |&n| Root::Node(n));
    b.finish(catalog.clone(), root, k)
}

/// All combined programs of depth at most `k` producing `s`.
pub fn generate_str_u(
    state: &InputState,
    s: &str,
    catalog: &Arc<TableCatalog>,
    opts: GenOptions,
) -> VersionSpace {
    let k = opts.depth_for(catalog);
    let mut b = Builder::new(catalog, state, opts.syntactic);
    b.seed_inputs();
    b.reach(k);
    let root = if opts.syntactic {
        let sources = b.sources(b.nodes.len());
        Root::Dag(b.build_dag(s, &sources))
    } else {
        match b.index.get(s) {
            Some(&n) if !s.is_empty() => Root::Dag(b.whole_dag(s, n)),
            _ => Root::Empty,
        }
    };
    let mut vs = b.finish(catalog.clone(), root, k);
    vs.prune();
    vs
}

struct Builder<'a> {
    catalog: &'a TableCatalog,
    state: &'a InputState,
    syntactic: bool,
    nodes: Vec<Node>,
    dags: Vec<Dag>,
    index: HashMap<String, NodeId>,
    profiles: HashMap<NodeId, TokenProfile>,
    positions: HashMap<(NodeId, usize), Arc<PositionSet>>,
    /// Where the `Select` learned from (table, column, row) lives.
    slots: HashMap<(usize, usize, usize), (NodeId, usize)>,
    /// Columns ever targeted in each (table, row).
    targets: BTreeMap<(usize, usize), BTreeSet<usize>>,
    pred_dags: HashMap<(String, usize), DagId>,
}

impl<'a> Builder<'a> {
    fn new(catalog: &'a TableCatalog, state: &'a InputState, syntactic: bool) -> Self {
        Builder {
            catalog,
            state,
            syntactic,
            nodes: Vec::new(),
            dags: Vec::new(),
            index: HashMap::new(),
            profiles: HashMap::new(),
            positions: HashMap::new(),
            slots: HashMap::new(),
            targets: BTreeMap::new(),
            pred_dags: HashMap::new(),
        }
    }

    fn finish(self, catalog: Arc<TableCatalog>, root: Root, depth: usize) -> VersionSpace {
        VersionSpace {
            catalog,
            nodes: self.nodes,
            dags: self.dags,
            root,
            depth,
            examples: 1,
        }
    }

    fn node_for(&mut self, value: &str) -> NodeId {
        if let Some(&n) = self.index.get(value) {
            return n;
        }
        let n = self.nodes.len() as NodeId;
        self.nodes.push(Node {
            values: vec![value.to_string()],
            progs: Vec::new(),
        });
        self.index.insert(value.to_string(), n);
        n
    }

    fn seed_inputs(&mut self) {
        for (i, v) in self.state.values.iter().enumerate() {
            let n = self.node_for(v);
            self.nodes[n as usize].progs.push(GenProg::Var(i));
        }
    }

    fn value(&self, n: NodeId) -> &str {
        &self.nodes[n as usize].values[0]
    }

    /// Nodes below `limit` with a non-empty value.
    fn sources(&self, limit: usize) -> Vec<NodeId> {
        (0..limit as NodeId)
            .filter(|&n| !self.value(n).is_empty())
            .collect()
    }

    /// Forward reachability over table rows, for at most `k + 1` rounds.
    fn reach(&mut self, k: usize) {
        let mut old = 0usize;
        let mut steps = 0usize;
        while steps <= k && old != self.nodes.len() {
            steps += 1;
            let frontier: Vec<NodeId> = (old as NodeId..self.nodes.len() as NodeId).collect();
            old = self.nodes.len();
            let snapshot = self.nodes.len();
            let mut rows = Vec::new();
            for (ti, t) in self.catalog.tables().iter().enumerate() {
                for r in 0..t.row_count() {
                    let matched: Vec<usize> = (0..t.columns().len())
                        .filter(|&c| self.triggers(t.cell(c, r), &frontier))
                        .collect();
                    if matched.is_empty() {
                        continue;
                    }
                    let entry = self.targets.entry((ti, r)).or_default();
                    for c in 0..t.columns().len() {
                        if matched.len() > 1 || matched[0] != c {
                            entry.insert(c);
                        }
                    }
                    rows.push((ti, r));
                }
            }
            for (ti, r) in rows {
                let cols: Vec<usize> = self.targets[&(ti, r)].iter().copied().collect();
                for c in cols {
                    self.learn_select(ti, c, r, snapshot);
                }
            }
        }
    }

    fn triggers(&self, cell: &str, frontier: &[NodeId]) -> bool {
        if self.syntactic {
            !cell.is_empty()
                && frontier.iter().any(|&n| {
                    let v = self.value(n);
                    !v.is_empty() && (v.contains(cell) || cell.contains(v))
                })
        } else {
            self.index.get(cell).is_some_and(|n| frontier.contains(n))
        }
    }

    /// Records `Select(column, table, B)` for row `r`, with predicates that may
    /// use the first `snapshot` nodes.
    fn learn_select(&mut self, ti: usize, column: usize, r: usize, snapshot: usize) {
        let t = self.catalog.table(ti);
        let value = t.cell(column, r);
        if value.is_empty() {
            return;
        }
        let mut conds = Vec::new();
        for key in 0..t.candidate_keys().len() {
            let key_cols = t.key_columns(key);
            if key_cols.contains(&column) {
                continue;
            }
            let preds = key_cols
                .iter()
                .map(|&kc| self.pred_for(self.catalog.table(ti).cell(kc, r), snapshot))
                .collect();
            conds.push(GenCond { key, preds });
        }
        if conds.is_empty() {
            return;
        }
        let prog = GenProg::Select {
            table: ti,
            column,
            conds,
        };
        let n = self.node_for(value);
        match self.slots.get(&(ti, column, r)) {
            Some(&(m, i)) => self.nodes[m as usize].progs[i] = prog,
            None => {
                let progs = &mut self.nodes[n as usize].progs;
                progs.push(prog);
                self.slots.insert((ti, column, r), (n, progs.len() - 1));
            }
        }
    }

    fn pred_for(&mut self, cell: &str, snapshot: usize) -> GenPred {
        if self.syntactic {
            let key = (cell.to_string(), snapshot);
            if let Some(&d) = self.pred_dags.get(&key) {
                return GenPred::Dag(d);
            }
            let sources = self.sources(snapshot);
            let d = self.build_dag(cell, &sources);
            self.pred_dags.insert(key, d);
            GenPred::Dag(d)
        } else {
            GenPred::Lookup {
                konst: Some(cell.to_string()),
                node: self
                    .index
                    .get(cell)
                    .copied()
                    .filter(|&n| (n as usize) < snapshot),
            }
        }
    }

    fn position_set(&mut self, n: NodeId, index: usize) -> Arc<PositionSet> {
        if let Some(p) = self.positions.get(&(n, index)) {
            return p.clone();
        }
        let value = self.nodes[n as usize].values[0].clone();
        let profile = self
            .profiles
            .entry(n)
            .or_insert_with(|| TokenProfile::new(&value));
        let p = Arc::new(profile.positions(index));
        self.positions.insert((n, index), p.clone());
        p
    }

    /// The dag of every concatenation of constants, whole sources and
    /// substrings of sources that produces `s`.
    fn build_dag(&mut self, s: &str, sources: &[NodeId]) -> DagId {
        let target: Vec<char> = s.chars().collect();
        let len = target.len();
        let mut edges: BTreeMap<(u32, u32), Vec<GenAtom>> = BTreeMap::new();
        for i in 0..len {
            for j in i + 1..=len {
                edges
                    .entry((i as u32, j as u32))
                    .or_default()
                    .push(GenAtom::Const(target[i..j].iter().collect()));
            }
        }
        for &n in sources {
            let v: Vec<char> = self.value(n).chars().collect();
            for i in 0..len {
                for o in 0..v.len() {
                    let common = target[i..]
                        .iter()
                        .zip(&v[o..])
                        .take_while(|(a, b)| a == b)
                        .count();
                    for l in 1..=common {
                        let start = self.position_set(n, o);
                        let end = self.position_set(n, o + l);
                        let atoms = edges
                            .get_mut(&(i as u32, (i + l) as u32))
                            .expect("edge exists");
                        if o == 0 && l == v.len() {
                            atoms.push(GenAtom::Whole(n));
                        }
                        atoms.push(GenAtom::SubStr {
                            source: n,
                            start,
                            end,
                        });
                    }
                }
            }
        }
        let dag = Dag {
            positions: (0..=len as u32).collect(),
            edges: edges
                .into_iter()
                .map(|((from, to), atoms)| Edge { from, to, atoms })
                .collect(),
        };
        self.dags.push(dag);
        (self.dags.len() - 1) as DagId
    }

    /// A single edge holding the whole value of `n`.
    fn whole_dag(&mut self, s: &str, n: NodeId) -> DagId {
        let len = s.chars().count() as u32;
        self.dags.push(Dag {
            positions: vec![0, len],
            edges: vec![Edge {
                from: 0,
                to: 1,
                atoms: vec![GenAtom::Whole(n)],
            }],
        });
        (self.dags.len() - 1) as DagId
    }
}
