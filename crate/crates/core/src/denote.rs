//! Counting, enumerating, sampling and membership over version spaces.
//!
//! Denotations are cut at the space's depth bound, so spaces whose node
//! references are cyclic still denote finite sets.

use std::collections::HashMap;

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Atom, LookupExpr, Predicate, StringExpr};
use crate::space::{DagId, GenAtom, GenPred, GenProg, NodeId, Root, VersionSpace};

/// Number of programs denoted by the space.
pub fn count(vs: &VersionSpace) -> BigUint {
    Counter::new(vs).total()
}

/// At most `limit` programs, in a fixed order, and whether more exist.
pub fn enumerate(vs: &VersionSpace, limit: usize) -> (Vec<StringExpr>, bool) {
    let mut c = Counter::new(vs);
    let total = c.total();
    let n = total.to_usize().map_or(limit, |t| t.min(limit));
    let out = (0..n).map(|i| c.unrank(BigUint::from(i))).collect();
    (out, total > BigUint::from(limit))
}

/// `n` programs drawn uniformly at random (with replacement).
pub fn sample(vs: &VersionSpace, n: usize, seed: u64) -> Vec<StringExpr> {
    let mut c = Counter::new(vs);
    let total = c.total();
    if total.is_zero() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| c.unrank(rng.gen_biguint_below(&total)))
        .collect()
}

/// Whether `e` belongs to the denotation.
pub fn contains(vs: &VersionSpace, e: &StringExpr) -> bool {
    let m = Matcher { vs };
    match vs.root {
        Root::Empty => false,
        Root::Node(n) => e.as_lookup().is_some_and(|l| m.node(n, l, vs.depth)),
        Root::Dag(d) => m.dag(d, e, vs.depth),
    }
}

struct Counter<'a> {
    vs: &'a VersionSpace,
    nodes: HashMap<(NodeId, usize), BigUint>,
    /// Paths from each dag node to the target.
    dags: HashMap<(DagId, usize), Vec<BigUint>>,
}

impl<'a> Counter<'a> {
    fn new(vs: &'a VersionSpace) -> Self {
        Counter {
            vs,
            nodes: HashMap::new(),
            dags: HashMap::new(),
        }
    }

    fn total(&mut self) -> BigUint {
        match self.vs.root {
            Root::Empty => BigUint::zero(),
            Root::Node(n) => self.node(n, self.vs.depth),
            Root::Dag(d) => self.dag(d, self.vs.depth),
        }
    }

    fn node(&mut self, n: NodeId, b: usize) -> BigUint {
        if let Some(c) = self.nodes.get(&(n, b)) {
            return c.clone();
        }
        let vs = self.vs;
        let mut total = BigUint::zero();
        for p in &vs.node(n).progs {
            total += self.prog(p, b);
        }
        self.nodes.insert((n, b), total.clone());
        total
    }

    fn prog(&mut self, p: &GenProg, b: usize) -> BigUint {
        match p {
            GenProg::Var(_) => BigUint::one(),
            GenProg::Select { .. } if b == 0 => BigUint::zero(),
            GenProg::Select { conds, .. } => {
                let mut total = BigUint::zero();
                for c in conds {
                    let mut product = BigUint::one();
                    for pred in &c.preds {
                        product *= self.pred(pred, b - 1);
                        if product.is_zero() {
                            break;
                        }
                    }
                    total += product;
                }
                total
            }
        }
    }

    fn pred(&mut self, p: &GenPred, b: usize) -> BigUint {
        match p {
            GenPred::Lookup { konst, node } => {
                let k = BigUint::from(konst.is_some() as u32);
                match node {
                    Some(m) => k + self.node(*m, b),
                    None => k,
                }
            }
            GenPred::Dag(d) => self.dag(*d, b),
        }
    }

    fn atom(&mut self, a: &GenAtom, b: usize) -> BigUint {
        match a {
            GenAtom::Const(_) => BigUint::one(),
            GenAtom::Whole(n) => self.node(*n, b),
            GenAtom::SubStr { source, start, end } => {
                self.node(*source, b) * BigUint::from(start.len()) * BigUint::from(end.len())
            }
        }
    }

    fn paths(&mut self, d: DagId, b: usize) -> Vec<BigUint> {
        if let Some(p) = self.dags.get(&(d, b)) {
            return p.clone();
        }
        let dag = self.vs.dag(d);
        let n = dag.node_count();
        let mut paths = vec![BigUint::zero(); n];
        paths[n - 1] = BigUint::one();
        for e in dag.edges.iter().rev() {
            if paths[e.to as usize].is_zero() {
                continue;
            }
            let mut atoms = BigUint::zero();
            for a in &e.atoms {
                atoms += self.atom(a, b);
            }
            let add = atoms * &paths[e.to as usize];
            paths[e.from as usize] += add;
        }
        self.dags.insert((d, b), paths.clone());
        paths
    }

    fn dag(&mut self, d: DagId, b: usize) -> BigUint {
        self.paths(d, b)[0].clone()
    }

    fn unrank(&mut self, i: BigUint) -> StringExpr {
        match self.vs.root {
            Root::Empty => unreachable!("empty space has no programs"),
            Root::Node(n) => StringExpr::lookup(self.unrank_node(n, self.vs.depth, i)),
            Root::Dag(d) => self.unrank_dag(d, self.vs.depth, i),
        }
    }

    fn unrank_node(&mut self, n: NodeId, b: usize, mut i: BigUint) -> LookupExpr {
        let vs = self.vs;
        for p in &vs.node(n).progs {
            match p {
                GenProg::Var(v) => {
                    if i.is_zero() {
                        return LookupExpr::Var(*v);
                    }
                    i -= 1u32;
                }
                GenProg::Select {
                    table,
                    column,
                    conds,
                } => {
                    if b == 0 {
                        continue;
                    }
                    for c in conds {
                        let counts: Vec<BigUint> =
                            c.preds.iter().map(|p| self.pred(p, b - 1)).collect();
                        let product = counts.iter().fold(BigUint::one(), |acc, x| acc * x);
                        if i >= product {
                            i -= product;
                            continue;
                        }
                        let t = vs.catalog.table(*table);
                        let key = &t.candidate_keys()[c.key];
                        let mut predicates = Vec::new();
                        for ((p, count), col) in c.preds.iter().zip(&counts).zip(&key.columns) {
                            let j = &i % count;
                            i /= count;
                            predicates
                                .push(Predicate::new(col.clone(), self.unrank_pred(p, b - 1, j)));
                        }
                        return LookupExpr::select(
                            t.columns()[*column].clone(),
                            t.id(),
                            predicates,
                        );
                    }
                }
            }
        }
        unreachable!("rank out of range")
    }

    fn unrank_pred(&mut self, p: &GenPred, b: usize, i: BigUint) -> StringExpr {
        match p {
            GenPred::Lookup { konst, node } => match (konst, i.is_zero()) {
                (Some(s), true) => StringExpr::constant(s.clone()),
                (Some(_), false) => {
                    StringExpr::lookup(self.unrank_node(node.expect("node"), b, i - 1u32))
                }
                (None, _) => StringExpr::lookup(self.unrank_node(node.expect("node"), b, i)),
            },
            GenPred::Dag(d) => self.unrank_dag(*d, b, i),
        }
    }

    fn unrank_dag(&mut self, d: DagId, b: usize, mut i: BigUint) -> StringExpr {
        let paths = self.paths(d, b);
        let vs = self.vs;
        let dag = vs.dag(d);
        let out = dag.out_edges();
        let mut v = 0usize;
        let mut atoms = Vec::new();
        'walk: while v != dag.node_count() - 1 {
            for &ei in &out[v] {
                let e = &dag.edges[ei];
                let rest = &paths[e.to as usize];
                if rest.is_zero() {
                    continue;
                }
                for a in &e.atoms {
                    let c = self.atom(a, b) * rest;
                    if i >= c {
                        i -= c;
                        continue;
                    }
                    let (ai, ri) = (&i / rest, &i % rest);
                    atoms.push(self.unrank_atom(a, b, ai));
                    i = ri;
                    v = e.to as usize;
                    continue 'walk;
                }
            }
            unreachable!("rank out of range");
        }
        StringExpr::new(atoms)
    }

    fn unrank_atom(&mut self, a: &GenAtom, b: usize, i: BigUint) -> Atom {
        match a {
            GenAtom::Const(s) => Atom::Const(s.clone()),
            GenAtom::Whole(n) => Atom::Lookup(self.unrank_node(*n, b, i)),
            GenAtom::SubStr { source, start, end } => {
                let per = BigUint::from(start.len() * end.len());
                let (ni, rem) = (&i / &per, &i % &per);
                let rem = rem.to_usize().expect("small");
                Atom::SubStr {
                    source: self.unrank_node(*source, b, ni),
                    start: start.get(rem / end.len()),
                    end: end.get(rem % end.len()),
                }
            }
        }
    }
}

struct Matcher<'a> {
    vs: &'a VersionSpace,
}

impl Matcher<'_> {
    fn node(&self, n: NodeId, e: &LookupExpr, b: usize) -> bool {
        let node = self.vs.node(n);
        match e {
            LookupExpr::Var(i) => node.progs.contains(&GenProg::Var(*i)),
            LookupExpr::Select {
                column,
                table,
                predicates,
            } => {
                if b == 0 {
                    return false;
                }
                let cat = &self.vs.catalog;
                let Some(ti) = cat.index_of(table) else {
                    return false;
                };
                let t = cat.table(ti);
                let Some(ci) = t.column_index(column) else {
                    return false;
                };
                let cols: Vec<&str> = predicates.iter().map(|p| p.column.as_str()).collect();
                let Some(key) = t.key_for_columns(&cols) else {
                    return false;
                };
                node.progs.iter().any(|p| match p {
                    GenProg::Select {
                        table: pt,
                        column: pc,
                        conds,
                    } if *pt == ti && *pc == ci => conds.iter().any(|c| {
                        c.key == key
                            && c.preds
                                .iter()
                                .zip(predicates)
                                .all(|(gp, p)| self.pred(gp, &p.rhs, b - 1))
                    }),
                    _ => false,
                })
            }
        }
    }

    fn pred(&self, p: &GenPred, rhs: &StringExpr, b: usize) -> bool {
        match p {
            GenPred::Lookup { konst, node } => {
                if let Some(s) = rhs.as_const() {
                    return konst.as_deref() == Some(s);
                }
                match (rhs.as_lookup(), node) {
                    (Some(e), Some(m)) => self.node(*m, e, b),
                    _ => false,
                }
            }
            GenPred::Dag(d) => self.dag(*d, rhs, b),
        }
    }

    fn dag(&self, d: DagId, e: &StringExpr, b: usize) -> bool {
        let dag = self.vs.dag(d);
        let out = dag.out_edges();
        let mut current = vec![0usize];
        for atom in &e.atoms {
            let mut next = Vec::new();
            for &v in &current {
                for &ei in &out[v] {
                    let edge = &dag.edges[ei];
                    if !next.contains(&(edge.to as usize))
                        && edge.atoms.iter().any(|g| self.atom(g, atom, b))
                    {
                        next.push(edge.to as usize);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.contains(&(dag.node_count() - 1))
    }

    fn atom(&self, g: &GenAtom, a: &Atom, b: usize) -> bool {
        match (g, a) {
            (GenAtom::Const(s), Atom::Const(t)) => s == t,
            (GenAtom::Whole(n), Atom::Lookup(e)) => self.node(*n, e, b),
            (
                GenAtom::SubStr { source, start, end },
                Atom::SubStr {
                    source: e,
                    start: p1,
                    end: p2,
                },
            ) => start.contains(p1) && end.contains(p2) && self.node(*source, e, b),
            _ => false,
        }
    }
}
