//! Surface syntax: printing and parsing programs.
//!
//! ```text
//! Select(Price, BikePrices, Bike = Concatenate(v1, v2))
//! Concatenate(SubStr2(v1, AlphTok, 2), ConstStr(" "), SubStr2(v1, UpperTok, 1))
//! SubStr(v2, pos(SlashTok, ε, 1), pos(EndTok, ε, 1))
//! ```
//!
//! Identifiers made of ASCII letters, digits and `_` are printed bare, anything
//! else inside backticks. Predicates are joined with `∧` (`&&` also parses).
//! `ε` may be written `eps`.

use std::fmt::{self, Write};

use crate::error::ParseError;
use crate::expr::{Atom, LookupExpr, Predicate, StringExpr};
use crate::position::{PosPattern, Position, RegexSeq, Token};

impl fmt::Display for StringExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.atoms.as_slice() {
            [a] => write!(f, "{a}"),
            atoms => {
                f.write_str("Concatenate(")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Const(s) => {
                f.write_str("ConstStr(")?;
                write_string(f, s)?;
                f.write_str(")")
            }
            Atom::Lookup(e) => write!(f, "{e}"),
            Atom::SubStr { source, start, end } => {
                if let (Position::Pattern(a), Position::Pattern(b)) = (start, end) {
                    if a.left.is_epsilon()
                        && b.right.is_epsilon()
                        && !a.right.is_epsilon()
                        && a.right == b.left
                        && a.occurrence == b.occurrence
                    {
                        return write!(f, "SubStr2({source}, {}, {})", a.right, a.occurrence);
                    }
                }
                write!(f, "SubStr({source}, {start}, {end})")
            }
        }
    }
}

impl fmt::Display for LookupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LookupExpr::Var(i) => write!(f, "v{}", i + 1),
            LookupExpr::Select {
                column,
                table,
                predicates,
            } => {
                f.write_str("Select(")?;
                write_ident(f, column)?;
                f.write_str(", ")?;
                write_ident(f, table)?;
                f.write_str(", ")?;
                for (i, p) in predicates.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ∧ ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ident(f, &self.column)?;
        f.write_str(" = ")?;
        match self.rhs.as_const() {
            Some(s) => write_string(f, s),
            None => write!(f, "{}", self.rhs),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Const(k) => write!(f, "{k}"),
            Position::Pattern(p) => write!(f, "pos({}, {}, {})", p.left, p.right, p.occurrence),
        }
    }
}

fn is_bare(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn write_ident(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_bare(s) {
        f.write_str(s)
    } else {
        f.write_char('`')?;
        f.write_str(&s.replace('`', "``"))?;
        f.write_char('`')
    }
}

fn write_string(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c if c.is_control() => write!(f, "\\u{{{:x}}}", c as u32)?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// Parses the surface syntax produced by `Display`.
pub fn parse_program(text: &str) -> Result<StringExpr, ParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        at: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.at < p.chars.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    at: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.at,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.at < self.chars.len() && self.chars[self.at].is_whitespace() {
            self.at += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.at).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        let n = s.chars().count();
        if self.at + n <= self.chars.len()
            && self.chars[self.at..self.at + n]
                .iter()
                .copied()
                .eq(s.chars())
        {
            self.at += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{s}`")))
        }
    }

    /// A bare word, without consuming it.
    fn word(&mut self) -> String {
        self.skip_ws();
        self.chars[self.at..]
            .iter()
            .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
            .collect()
    }

    /// Consumes `kw` followed by `(` when it is the next word.
    fn keyword_call(&mut self, kw: &str) -> bool {
        let save = self.at;
        if self.word() == kw {
            self.at += kw.len();
            if self.eat("(") {
                return true;
            }
        }
        self.at = save;
        false
    }

    fn expr(&mut self) -> Result<StringExpr, ParseError> {
        if self.keyword_call("Concatenate") {
            let mut atoms = Vec::new();
            if !self.eat(")") {
                loop {
                    atoms.push(self.atom()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            return Ok(StringExpr::new(atoms));
        }
        Ok(StringExpr::atom(self.atom()?))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        if self.keyword_call("ConstStr") {
            let s = self.string()?;
            self.expect(")")?;
            return Ok(Atom::Const(s));
        }
        if self.keyword_call("SubStr") {
            let source = self.lookup()?;
            self.expect(",")?;
            let start = self.position()?;
            self.expect(",")?;
            let end = self.position()?;
            self.expect(")")?;
            return Ok(Atom::SubStr { source, start, end });
        }
        if self.keyword_call("SubStr2") {
            let source = self.lookup()?;
            self.expect(",")?;
            let r = self.regex()?;
            self.expect(",")?;
            let c = self.integer()?;
            self.expect(")")?;
            if c == 0 {
                return Err(self.error("occurrence must be nonzero"));
            }
            return Ok(Atom::SubStr {
                source,
                start: Position::pattern(RegexSeq::epsilon(), r.clone(), c),
                end: Position::pattern(r, RegexSeq::epsilon(), c),
            });
        }
        Ok(Atom::Lookup(self.lookup()?))
    }

    fn lookup(&mut self) -> Result<LookupExpr, ParseError> {
        if self.keyword_call("Select") {
            let column = self.ident()?;
            self.expect(",")?;
            let table = self.ident()?;
            self.expect(",")?;
            let mut predicates = vec![self.predicate()?];
            while self.eat("∧") || self.eat("&&") {
                predicates.push(self.predicate()?);
            }
            self.expect(")")?;
            return Ok(LookupExpr::Select {
                column,
                table,
                predicates,
            });
        }
        let w = self.word();
        if let Some(digits) = w.strip_prefix('v') {
            if let Ok(i) = digits.parse::<usize>() {
                if i >= 1 && !digits.starts_with('0') {
                    self.at += w.len();
                    return Ok(LookupExpr::Var(i - 1));
                }
            }
        }
        Err(self.error("expected an expression"))
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let column = self.ident()?;
        self.expect("=")?;
        let rhs = if self.peek() == Some('"') {
            StringExpr::constant(self.string()?)
        } else {
            self.expr()?
        };
        Ok(Predicate { column, rhs })
    }

    fn position(&mut self) -> Result<Position, ParseError> {
        if self.keyword_call("pos") {
            let left = self.regex()?;
            self.expect(",")?;
            let right = self.regex()?;
            self.expect(",")?;
            let occurrence = self.integer()?;
            self.expect(")")?;
            if occurrence == 0 {
                return Err(self.error("occurrence must be nonzero"));
            }
            return Ok(Position::Pattern(PosPattern {
                left,
                right,
                occurrence,
            }));
        }
        if self.keyword_call("CPos") {
            let k = self.integer()?;
            self.expect(")")?;
            return Ok(Position::Const(k));
        }
        Ok(Position::Const(self.integer()?))
    }

    fn regex(&mut self) -> Result<RegexSeq, ParseError> {
        if self.eat("ε") {
            return Ok(RegexSeq::epsilon());
        }
        if self.keyword_call("TokenSeq") {
            let mut toks = vec![self.token()?];
            while self.eat(",") {
                toks.push(self.token()?);
            }
            self.expect(")")?;
            return Ok(RegexSeq(toks));
        }
        if self.word() == "eps" {
            self.at += 3;
            return Ok(RegexSeq::epsilon());
        }
        Ok(RegexSeq::token(self.token()?))
    }

    fn token(&mut self) -> Result<Token, ParseError> {
        let w = self.word();
        let t = Token::from_name(&w).ok_or_else(|| self.error(format!("unknown token {w:?}")))?;
        self.at += w.len();
        Ok(t)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.at;
        if matches!(self.chars.get(self.at), Some('-') | Some('−')) {
            self.at += 1;
        }
        let digits: String = self.chars[self.at..]
            .iter()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if digits.is_empty() {
            self.at = start;
            return Err(self.error("expected an integer"));
        }
        self.at += digits.len();
        let value: i64 = digits
            .parse()
            .map_err(|_| self.error("integer out of range"))?;
        Ok(if self.at - digits.len() > start {
            -value
        } else {
            value
        })
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        if self.chars.get(self.at) == Some(&'`') {
            self.at += 1;
            let mut out = String::new();
            loop {
                match self.chars.get(self.at) {
                    None => return Err(self.error("unterminated identifier")),
                    Some('`') if self.chars.get(self.at + 1) == Some(&'`') => {
                        out.push('`');
                        self.at += 2;
                    }
                    Some('`') => {
                        self.at += 1;
                        return Ok(out);
                    }
                    Some(c) => {
                        out.push(*c);
                        self.at += 1;
                    }
                }
            }
        }
        let w = self.word();
        if w.is_empty() {
            return Err(self.error("expected an identifier"));
        }
        self.at += w.len();
        Ok(w)
    }

    fn string(&mut self) -> Result<String, ParseError> {
        self.expect("\"")?;
        let mut out = String::new();
        loop {
            let c = *self
                .chars
                .get(self.at)
                .ok_or_else(|| self.error("unterminated string"))?;
            self.at += 1;
            match c {
                '"' => return Ok(out),
                '\\' => {
                    let e = *self
                        .chars
                        .get(self.at)
                        .ok_or_else(|| self.error("unterminated string"))?;
                    self.at += 1;
                    match e {
                        '"' => out.push('"'),
                        '\\' => out.push('\\'),
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        'u' => {
                            self.expect("{")?;
                            let hex: String = self.chars[self.at..]
                                .iter()
                                .take_while(|c| c.is_ascii_hexdigit())
                                .collect();
                            self.at += hex.len();
                            self.expect("}")?;
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.error("invalid unicode escape"))?;
                            out.push(ch);
                        }
                        _ => return Err(self.error("invalid escape")),
                    }
                }
                c => out.push(c),
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prints_constants() {
        assert_eq!(StringExpr::constant("a").to_string(), "ConstStr(\"a\")");
        assert_eq!(StringExpr::new(vec![]).to_string(), "Concatenate()");
    }

    #[test]
    fn round_trips_fixtures() {
        for text in [
            "Select(Price, Sale, Addr = Select(Addr, CustData, Name = v1) ∧ St = Select(St, CustData, Name = v1))",
            "Select(Price, BikePrices, Bike = Concatenate(v1, v2))",
            "Concatenate(SubStr2(v1, AlphTok, 2), ConstStr(\" \"), SubStr2(v1, UpperTok, 1))",
            "SubStr(v2, pos(SlashTok, ε, 1), pos(EndTok, ε, 1))",
            "SubStr(Select(MW, Month, MN = SubStr(v1, pos(StartTok, ε, 1), pos(ε, HyphenTok, 1))), pos(StartTok, ε, 1), 3)",
            "Select(`12Hour x`, Time, 24Hour = \"a\\\"b\")",
            "SubStr(v1, pos(TokenSeq(NumTok, SlashTok), ε, -1), -1)",
        ] {
            let e = parse_program(text).unwrap();
            assert_eq!(e.to_string(), text);
            assert_eq!(parse_program(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn accepts_alternative_spellings() {
        let a = parse_program("Select(A, T, B = \"x\" && C = v1)").unwrap();
        let b = parse_program("Select(A, T, B = ConstStr(\"x\") ∧ C = v1)").unwrap();
        assert_eq!(a, b);
        let a = parse_program("SubStr(v1, pos(eps, NumTok, 1), CPos(-1))").unwrap();
        let b = parse_program("SubStr(v1, pos(ε, NumTok, 1), -1)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reports_offsets() {
        let err = parse_program("Concatenate(v1, v2").unwrap_err();
        assert_eq!(err.offset, 18);
        assert!(parse_program("v0").is_err());
        assert!(parse_program("SubStr2(v1, NumTok, 0)").is_err());
    }

    fn arb_position() -> impl Strategy<Value = Position> {
        let tok = proptest::sample::select(Token::ALL.to_vec());
        let seq = proptest::collection::vec(tok, 0..3).prop_map(RegexSeq);
        prop_oneof![
            (-5i64..6).prop_map(Position::Const),
            (seq.clone(), seq, prop_oneof![-3i64..0, 1i64..4])
                .prop_map(|(l, r, c)| Position::pattern(l, r, c)),
        ]
    }

    fn arb_ident() -> impl Strategy<Value = String> {
        "[A-Za-z0-9_ `.]{1,6}"
    }

    pub(crate) fn arb_expr() -> impl Strategy<Value = StringExpr> {
        let leaf_lookup = (0usize..3).prop_map(LookupExpr::Var);
        let lookup = leaf_lookup.prop_recursive(2, 8, 2, |inner| {
            let atom = prop_oneof![
                "[ -~é]{0,4}".prop_map(Atom::Const),
                inner.clone().prop_map(Atom::Lookup),
            ];
            let rhs = proptest::collection::vec(atom, 1..3).prop_map(StringExpr::new);
            (
                arb_ident(),
                arb_ident(),
                proptest::collection::vec(
                    (arb_ident(), rhs).prop_map(|(c, r)| Predicate::new(c, r)),
                    1..3,
                ),
            )
                .prop_map(|(c, t, p)| LookupExpr::select(c, t, p))
        });
        let atom = prop_oneof![
            "[ -~\n]{0,4}".prop_map(Atom::Const),
            lookup.clone().prop_map(Atom::Lookup),
            (lookup, arb_position(), arb_position())
                .prop_map(|(source, start, end)| Atom::SubStr { source, start, end }),
        ];
        proptest::collection::vec(atom, 0..4).prop_map(StringExpr::new)
    }

    proptest! {
        #[test]
        fn parse_inverts_print(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(parse_program(&text).unwrap(), e, "{}", text);
        }
    }
}
