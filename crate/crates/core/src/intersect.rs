//! Intersection of version spaces.
//!
//! Node pairs and dag pairs are built on demand from the roots, so only the
//! part of the product that the result can reach is ever materialized.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::position::PositionSet;
use crate::space::{
    Dag, DagId, Edge, GenAtom, GenCond, GenPred, GenProg, Node, NodeId, Root, VersionSpace,
};

/// The space of programs that belong to both `a` and `b`.
pub fn intersect(a: &VersionSpace, b: &VersionSpace) -> VersionSpace {
    let mut x = Intersector {
        a,
        b,
        nodes: Vec::new(),
        dags: Vec::new(),
        node_pairs: HashMap::new(),
        dag_pairs: HashMap::new(),
        positions: HashMap::new(),
        queue: VecDeque::new(),
    };
    let root = match (a.root, b.root) {
        (Root::Node(na), Root::Node(nb)) => x.node_pair(na, nb).map_or(Root::Empty, Root::Node),
        (Root::Dag(da), Root::Dag(db)) => Root::Dag(x.dag_pair(da, db)),
        _ => Root::Empty,
    };
    while let Some(w) = x.queue.pop_front() {
        match w {
            Work::Node(id, na, nb) => x.fill_node(id, na, nb),
            Work::Dag(id, da, db) => x.fill_dag(id, da, db),
        }
    }
    let mut vs = VersionSpace {
        catalog: a.catalog.clone(),
        nodes: x.nodes,
        dags: x.dags,
        root,
        depth: a.depth.min(b.depth),
        examples: a.examples + b.examples,
    };
    vs.prune();
    vs
}

enum Work {
    Node(NodeId, NodeId, NodeId),
    Dag(DagId, DagId, DagId),
}

struct Intersector<'a> {
    a: &'a VersionSpace,
    b: &'a VersionSpace,
    nodes: Vec<Node>,
    dags: Vec<Dag>,
    node_pairs: HashMap<(NodeId, NodeId), Option<NodeId>>,
    dag_pairs: HashMap<(DagId, DagId), DagId>,
    positions: HashMap<(usize, usize), Option<Arc<PositionSet>>>,
    queue: VecDeque<Work>,
}

fn same_head(p: &GenProg, q: &GenProg) -> bool {
    match (p, q) {
        (GenProg::Var(i), GenProg::Var(j)) => i == j,
        (
            GenProg::Select {
                table: t1,
                column: c1,
                ..
            },
            GenProg::Select {
                table: t2,
                column: c2,
                ..
            },
        ) => t1 == t2 && c1 == c2,
        _ => false,
    }
}

impl Intersector<'_> {
    fn node_pair(&mut self, na: NodeId, nb: NodeId) -> Option<NodeId> {
        if let Some(&id) = self.node_pairs.get(&(na, nb)) {
            return id;
        }
        let (a, b) = (self.a.node(na), self.b.node(nb));
        let compatible = a
            .progs
            .iter()
            .any(|p| b.progs.iter().any(|q| same_head(p, q)));
        let id = compatible.then(|| {
            let id = self.nodes.len() as NodeId;
            let mut values = a.values.clone();
            values.extend(b.values.iter().cloned());
            self.nodes.push(Node {
                values,
                progs: Vec::new(),
            });
            self.queue.push_back(Work::Node(id, na, nb));
            id
        });
        self.node_pairs.insert((na, nb), id);
        id
    }

    fn dag_pair(&mut self, da: DagId, db: DagId) -> DagId {
        if let Some(&id) = self.dag_pairs.get(&(da, db)) {
            return id;
        }
        let id = self.dags.len() as DagId;
        self.dags.push(Dag {
            positions: vec![0, 0],
            edges: Vec::new(),
        });
        self.dag_pairs.insert((da, db), id);
        self.queue.push_back(Work::Dag(id, da, db));
        id
    }

    fn fill_node(&mut self, id: NodeId, na: NodeId, nb: NodeId) {
        let (a, b) = (self.a, self.b);
        let mut progs = Vec::new();
        for p in &a.node(na).progs {
            for q in &b.node(nb).progs {
                if !same_head(p, q) {
                    continue;
                }
                match (p, q) {
                    (GenProg::Var(i), _) => progs.push(GenProg::Var(*i)),
                    (
                        GenProg::Select {
                            table,
                            column,
                            conds: ca,
                        },
                        GenProg::Select { conds: cb, .. },
                    ) => {
                        let mut conds = Vec::new();
                        for c in ca {
                            for d in cb.iter().filter(|d| d.key == c.key) {
                                let preds: Option<Vec<GenPred>> = c
                                    .preds
                                    .iter()
                                    .zip(&d.preds)
                                    .map(|(x, y)| self.pred(x, y))
                                    .collect();
                                if let Some(preds) = preds {
                                    conds.push(GenCond { key: c.key, preds });
                                }
                            }
                        }
                        if !conds.is_empty() {
                            progs.push(GenProg::Select {
                                table: *table,
                                column: *column,
                                conds,
                            });
                        }
                    }
                    _ => unreachable!("heads checked"),
                }
            }
        }
        self.nodes[id as usize].progs = progs;
    }

    fn pred(&mut self, x: &GenPred, y: &GenPred) -> Option<GenPred> {
        match (x, y) {
            (
                GenPred::Lookup {
                    konst: k1,
                    node: n1,
                },
                GenPred::Lookup {
                    konst: k2,
                    node: n2,
                },
            ) => {
                let konst = match (k1, k2) {
                    (Some(s), Some(t)) if s == t => Some(s.clone()),
                    _ => None,
                };
                let node = match (n1, n2) {
                    (Some(m1), Some(m2)) => self.node_pair(*m1, *m2),
                    _ => None,
                };
                (konst.is_some() || node.is_some()).then_some(GenPred::Lookup { konst, node })
            }
            (GenPred::Dag(d1), GenPred::Dag(d2)) => Some(GenPred::Dag(self.dag_pair(*d1, *d2))),
            _ => None,
        }
    }

    fn positions(
        &mut self,
        p: &Arc<PositionSet>,
        q: &Arc<PositionSet>,
    ) -> Option<Arc<PositionSet>> {
        let key = (Arc::as_ptr(p) as usize, Arc::as_ptr(q) as usize);
        self.positions
            .entry(key)
            .or_insert_with(|| {
                let r = p.intersect(q);
                (!r.is_empty()).then(|| Arc::new(r))
            })
            .clone()
    }

    fn atoms(&mut self, xs: &[GenAtom], ys: &[GenAtom]) -> Vec<GenAtom> {
        let mut out = Vec::new();
        for x in xs {
            for y in ys {
                match (x, y) {
                    (GenAtom::Const(s), GenAtom::Const(t)) if s == t => {
                        out.push(GenAtom::Const(s.clone()))
                    }
                    (GenAtom::Whole(m), GenAtom::Whole(n)) => {
                        if let Some(p) = self.node_pair(*m, *n) {
                            out.push(GenAtom::Whole(p));
                        }
                    }
                    (
                        GenAtom::SubStr {
                            source: m,
                            start: s1,
                            end: e1,
                        },
                        GenAtom::SubStr {
                            source: n,
                            start: s2,
                            end: e2,
                        },
                    ) => {
                        let Some(start) = self.positions(s1, s2) else {
                            continue;
                        };
                        let Some(end) = self.positions(e1, e2) else {
                            continue;
                        };
                        if let Some(source) = self.node_pair(*m, *n) {
                            out.push(GenAtom::SubStr { source, start, end });
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    fn fill_dag(&mut self, id: DagId, da: DagId, db: DagId) {
        let (a, b) = (self.a.dag(da), self.b.dag(db));
        let (out_a, out_b) = (a.out_edges(), b.out_edges());
        let mut index: HashMap<(u32, u32), usize> = HashMap::new();
        let mut pairs = vec![(0u32, 0u32)];
        index.insert((0, 0), 0);
        let mut edges: Vec<(usize, usize, Vec<GenAtom>)> = Vec::new();
        let mut next = 0;
        while next < pairs.len() {
            let (ia, ib) = pairs[next];
            for &ea in &out_a[ia as usize] {
                for &eb in &out_b[ib as usize] {
                    let (x, y) = (&a.edges[ea], &b.edges[eb]);
                    let atoms = self.atoms(&x.atoms, &y.atoms);
                    if atoms.is_empty() {
                        continue;
                    }
                    let to = (x.to, y.to);
                    let t = *index.entry(to).or_insert_with(|| {
                        pairs.push(to);
                        pairs.len() - 1
                    });
                    edges.push((next, t, atoms));
                }
            }
            next += 1;
        }
        let target = (a.target(), b.target());
        let dag = if !index.contains_key(&target) {
            Dag {
                positions: vec![0, 0],
                edges: Vec::new(),
            }
        } else {
            // lexicographic order on pairs is a topological order
            let mut order: Vec<usize> = (0..pairs.len()).collect();
            order.sort_by_key(|&i| pairs[i]);
            let mut rank = vec![0u32; pairs.len()];
            for (r, &i) in order.iter().enumerate() {
                rank[i] = r as u32;
            }
            let mut edges: Vec<Edge> = edges
                .into_iter()
                .map(|(f, t, atoms)| Edge {
                    from: rank[f],
                    to: rank[t],
                    atoms,
                })
                .collect();
            edges.sort_by_key(|e| (e.from, e.to));
            let mut dag = Dag {
                positions: order
                    .iter()
                    .map(|&i| a.positions[pairs[i].0 as usize])
                    .collect(),
                edges,
            };
            // the target pair is the largest pair once only paths to it are kept
            let t = rank[index[&target]];
            dag.positions.truncate(t as usize + 1);
            dag.edges.retain(|e| e.to <= t);
            crate::space::trim_dag(&mut dag);
            dag
        };
        self.dags[id as usize] = dag;
    }
}
