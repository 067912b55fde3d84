//! JSON form of program ASTs.
//!
//! Every node is an object with a `kind` tag: `Concat`, `Const`, `Var`,
//! `SubStr`, `Select`, `Predicate`, `CPos`, `Pos` or `TokenSeq`. Programs and
//! predicate right-hand sides are always `Concat` nodes, so the form is
//! lossless. `Var.index` is one-based, as in the surface syntax.

use serde::{Deserialize, Serialize};

use crate::expr::{Atom, LookupExpr, Predicate, StringExpr};
use crate::position::{PosPattern, Position, RegexSeq, Token};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum Node {
    Concat {
        atoms: Vec<Node>,
    },
    Const {
        value: String,
    },
    Var {
        index: usize,
    },
    SubStr {
        source: Box<Node>,
        start: Box<Node>,
        end: Box<Node>,
    },
    Select {
        column: String,
        table: String,
        predicates: Vec<Node>,
    },
    Predicate {
        column: String,
        rhs: Box<Node>,
    },
    CPos {
        k: i64,
    },
    Pos {
        left: Box<Node>,
        right: Box<Node>,
        c: i64,
    },
    TokenSeq {
        tokens: Vec<Token>,
    },
}

impl Node {
    fn kind(&self) -> &'static str {
        match self {
            Node::Concat { .. } => "Concat",
            Node::Const { .. } => "Const",
            Node::Var { .. } => "Var",
            Node::SubStr { .. } => "SubStr",
            Node::Select { .. } => "Select",
            Node::Predicate { .. } => "Predicate",
            Node::CPos { .. } => "CPos",
            Node::Pos { .. } => "Pos",
            Node::TokenSeq { .. } => "TokenSeq",
        }
    }
}

fn unexpected(expected: &str, found: &Node) -> String {
    format!("expected {expected} node, found {}", found.kind())
}

impl From<StringExpr> for Node {
    fn from(e: StringExpr) -> Node {
        Node::Concat {
            atoms: e.atoms.into_iter().map(atom_node).collect(),
        }
    }
}

fn atom_node(a: Atom) -> Node {
    match a {
        Atom::Const(value) => Node::Const { value },
        Atom::Lookup(l) => lookup_node(l),
        Atom::SubStr { source, start, end } => Node::SubStr {
            source: Box::new(lookup_node(source)),
            start: Box::new(position_node(start)),
            end: Box::new(position_node(end)),
        },
    }
}

fn lookup_node(l: LookupExpr) -> Node {
    match l {
        LookupExpr::Var(i) => Node::Var { index: i + 1 },
        LookupExpr::Select {
            column,
            table,
            predicates,
        } => Node::Select {
            column,
            table,
            predicates: predicates
                .into_iter()
                .map(|p| Node::Predicate {
                    column: p.column,
                    rhs: Box::new(p.rhs.into()),
                })
                .collect(),
        },
    }
}

fn position_node(p: Position) -> Node {
    match p {
        Position::Const(k) => Node::CPos { k },
        Position::Pattern(p) => Node::Pos {
            left: Box::new(Node::TokenSeq { tokens: p.left.0 }),
            right: Box::new(Node::TokenSeq { tokens: p.right.0 }),
            c: p.occurrence,
        },
    }
}

impl TryFrom<Node> for StringExpr {
    type Error = String;

    fn try_from(n: Node) -> Result<StringExpr, String> {
        match n {
            Node::Concat { atoms } => Ok(StringExpr::new(
                atoms.into_iter().map(node_atom).collect::<Result<_, _>>()?,
            )),
            other => Err(unexpected("Concat", &other)),
        }
    }
}

fn node_atom(n: Node) -> Result<Atom, String> {
    match n {
        Node::Const { value } => Ok(Atom::Const(value)),
        Node::SubStr { source, start, end } => Ok(Atom::SubStr {
            source: node_lookup(*source)?,
            start: node_position(*start)?,
            end: node_position(*end)?,
        }),
        other => Ok(Atom::Lookup(node_lookup(other)?)),
    }
}

fn node_lookup(n: Node) -> Result<LookupExpr, String> {
    match n {
        Node::Var { index } if index >= 1 => Ok(LookupExpr::Var(index - 1)),
        Node::Var { .. } => Err("Var index must be at least 1".into()),
        Node::Select {
            column,
            table,
            predicates,
        } => {
            let predicates = predicates
                .into_iter()
                .map(|p| match p {
                    Node::Predicate { column, rhs } => Ok(Predicate {
                        column,
                        rhs: StringExpr::try_from(*rhs)?,
                    }),
                    other => Err(unexpected("Predicate", &other)),
                })
                .collect::<Result<_, String>>()?;
            Ok(LookupExpr::Select {
                column,
                table,
                predicates,
            })
        }
        other => Err(unexpected("Var or Select", &other)),
    }
}

fn node_position(n: Node) -> Result<Position, String> {
    match n {
        Node::CPos { k } => Ok(Position::Const(k)),
        Node::Pos { c: 0, .. } => Err("Pos occurrence must be nonzero".into()),
        Node::Pos { left, right, c } => Ok(Position::Pattern(PosPattern {
            left: node_regex(*left)?,
            right: node_regex(*right)?,
            occurrence: c,
        })),
        other => Err(unexpected("CPos or Pos", &other)),
    }
}

fn node_regex(n: Node) -> Result<RegexSeq, String> {
    match n {
        Node::TokenSeq { tokens } => Ok(RegexSeq(tokens)),
        other => Err(unexpected("TokenSeq", &other)),
    }
}

impl Serialize for StringExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Node::from(self.clone()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StringExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        StringExpr::try_from(Node::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;
    use crate::syntax::tests::arb_expr;
    use proptest::prelude::*;

    #[test]
    fn var_index_is_one_based() {
        let v = serde_json::to_value(StringExpr::var(0)).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"kind": "Concat", "atoms": [{"kind": "Var", "index": 1}]})
        );
    }

    #[test]
    fn substring_shape() {
        let e = parse_program("SubStr(v2, pos(SlashTok, ε, 1), -1)").unwrap();
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(
            v["atoms"][0],
            serde_json::json!({
                "kind": "SubStr",
                "source": {"kind": "Var", "index": 2},
                "start": {"kind": "Pos", "left": {"kind": "TokenSeq", "tokens": ["SlashTok"]},
                          "right": {"kind": "TokenSeq", "tokens": []}, "c": 1},
                "end": {"kind": "CPos", "k": -1}
            })
        );
    }

    #[test]
    fn rejects_misplaced_kinds() {
        let bad = serde_json::json!({"kind": "Concat", "atoms": [{"kind": "CPos", "k": 1}]});
        assert!(serde_json::from_value::<StringExpr>(bad).is_err());
        let bad = serde_json::json!({"kind": "Var", "index": 1});
        assert!(serde_json::from_value::<StringExpr>(bad).is_err());
        let bad = serde_json::json!({"kind": "Concat", "atoms": [{"kind": "Var", "index": 0}]});
        assert!(serde_json::from_value::<StringExpr>(bad).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip(e in arb_expr()) {
            let text = serde_json::to_string(&e).unwrap();
            prop_assert_eq!(serde_json::from_str::<StringExpr>(&text).unwrap(), e);
        }
    }
}
