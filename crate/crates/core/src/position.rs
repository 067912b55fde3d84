//! Tokens, regular expressions over tokens, and position expressions.
//!
//! A string of `ℓ` characters has positions `0..=ℓ`. Positions count Unicode
//! scalar values, not bytes.
//!
//! Class tokens (`UpperTok`, `NumTok`, ...) match maximal runs only: a run of
//! digits `"2010"` is one `NumTok` match, never `"01"`. Punctuation tokens
//! match a single character, and `StartTok`/`EndTok` match the empty string at
//! the two ends of the subject.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A token of the position language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Token {
    #[serde(rename = "StartTok")]
    Start,
    #[serde(rename = "EndTok")]
    End,
    #[serde(rename = "UpperTok")]
    Upper,
    #[serde(rename = "LowerTok")]
    Lower,
    /// Runs of alphanumeric characters. `AlphNumTok` is accepted as a synonym.
    #[serde(rename = "AlphTok", alias = "AlphNumTok")]
    Alph,
    #[serde(rename = "NumTok")]
    Num,
    /// Runs of digits and decimal points.
    #[serde(rename = "DecNumTok")]
    DecNum,
    #[serde(rename = "WhitespaceTok")]
    Whitespace,
    #[serde(rename = "SlashTok")]
    Slash,
    #[serde(rename = "HyphenTok")]
    Hyphen,
    #[serde(rename = "DotTok")]
    Dot,
    #[serde(rename = "CommaTok")]
    Comma,
    #[serde(rename = "ColonTok")]
    Colon,
}

impl Token {
    pub const ALL: [Token; 13] = [
        Token::Start,
        Token::End,
        Token::Upper,
        Token::Lower,
        Token::Alph,
        Token::Num,
        Token::DecNum,
        Token::Whitespace,
        Token::Slash,
        Token::Hyphen,
        Token::Dot,
        Token::Comma,
        Token::Colon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Token::Start => "StartTok",
            Token::End => "EndTok",
            Token::Upper => "UpperTok",
            Token::Lower => "LowerTok",
            Token::Alph => "AlphTok",
            Token::Num => "NumTok",
            Token::DecNum => "DecNumTok",
            Token::Whitespace => "WhitespaceTok",
            Token::Slash => "SlashTok",
            Token::Hyphen => "HyphenTok",
            Token::Dot => "DotTok",
            Token::Comma => "CommaTok",
            Token::Colon => "ColonTok",
        }
    }

    pub fn from_name(name: &str) -> Option<Token> {
        if name == "AlphNumTok" {
            return Some(Token::Alph);
        }
        Token::ALL.into_iter().find(|t| t.name() == name)
    }

    fn class(self) -> Option<fn(char) -> bool> {
        Some(match self {
            Token::Upper => char::is_uppercase,
            Token::Lower => char::is_lowercase,
            Token::Alph => char::is_alphanumeric,
            Token::Num => |c: char| c.is_ascii_digit(),
            Token::DecNum => |c: char| c.is_ascii_digit() || c == '.',
            Token::Whitespace => char::is_whitespace,
            _ => return None,
        })
    }

    fn literal(self) -> Option<char> {
        Some(match self {
            Token::Slash => '/',
            Token::Hyphen => '-',
            Token::Dot => '.',
            Token::Comma => ',',
            Token::Colon => ':',
            _ => return None,
        })
    }

    /// Start of the match of this token that ends exactly at `end`.
    fn match_ending_at(self, s: &[char], end: usize) -> Option<usize> {
        match self {
            Token::Start => (end == 0).then_some(0),
            Token::End => (end == s.len()).then_some(end),
            _ => {
                if let Some(ch) = self.literal() {
                    return (end > 0 && s[end - 1] == ch).then(|| end - 1);
                }
                let class = self.class().expect("class token");
                if end == 0 || !class(s[end - 1]) || (end < s.len() && class(s[end])) {
                    return None;
                }
                let mut start = end - 1;
                while start > 0 && class(s[start - 1]) {
                    start -= 1;
                }
                Some(start)
            }
        }
    }

    /// End of the match of this token that starts exactly at `start`.
    fn match_starting_at(self, s: &[char], start: usize) -> Option<usize> {
        match self {
            Token::Start => (start == 0).then_some(0),
            Token::End => (start == s.len()).then_some(start),
            _ => {
                if let Some(ch) = self.literal() {
                    return (start < s.len() && s[start] == ch).then(|| start + 1);
                }
                let class = self.class().expect("class token");
                if start >= s.len() || !class(s[start]) || (start > 0 && class(s[start - 1])) {
                    return None;
                }
                let mut end = start + 1;
                while end < s.len() && class(s[end]) {
                    end += 1;
                }
                Some(end)
            }
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sequence of tokens matched back to back; the empty sequence is `ε`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegexSeq(pub Vec<Token>);

impl RegexSeq {
    pub fn epsilon() -> Self {
        RegexSeq(Vec::new())
    }

    pub fn token(t: Token) -> Self {
        RegexSeq(vec![t])
    }

    pub fn is_epsilon(&self) -> bool {
        self.0.is_empty()
    }

    /// Does this sequence match some suffix of `s[0..t]`?
    pub fn matches_ending_at(&self, s: &[char], t: usize) -> bool {
        let mut pos = t;
        for tok in self.0.iter().rev() {
            match tok.match_ending_at(s, pos) {
                Some(start) => pos = start,
                None => return false,
            }
        }
        true
    }

    /// Does this sequence match some prefix of `s[t..]`?
    pub fn matches_starting_at(&self, s: &[char], t: usize) -> bool {
        let mut pos = t;
        for tok in &self.0 {
            match tok.match_starting_at(s, pos) {
                Some(end) => pos = end,
                None => return false,
            }
        }
        true
    }
}

impl fmt::Display for RegexSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => f.write_str("ε"),
            [t] => write!(f, "{t}"),
            ts => {
                f.write_str("TokenSeq(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `pos(left, right, occurrence)`: the `|occurrence|`-th position (from the
/// left if positive, from the right if negative) where `left` matches just
/// before and `right` matches just after.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PosPattern {
    pub left: RegexSeq,
    pub right: RegexSeq,
    pub occurrence: i64,
}

/// A position expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    /// `k ≥ 0` is position `k`; `k < 0` is position `ℓ + 1 + k`.
    Const(i64),
    Pattern(PosPattern),
}

impl Position {
    pub fn pattern(left: RegexSeq, right: RegexSeq, occurrence: i64) -> Self {
        Position::Pattern(PosPattern {
            left,
            right,
            occurrence,
        })
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Position::Const(_))
    }

    /// Number of AST nodes, used by ranking.
    pub fn size(&self) -> u32 {
        match self {
            Position::Const(_) => 1,
            Position::Pattern(p) => 1 + (p.left.0.len() + p.right.0.len()) as u32,
        }
    }
}

/// Resolves a position on `subject`, or `None` if it does not exist.
pub fn eval_position(p: &Position, subject: &[char]) -> Option<usize> {
    let len = subject.len() as i64;
    match p {
        Position::Const(k) => {
            let t = if *k >= 0 { *k } else { len + 1 + k };
            (0..=len).contains(&t).then_some(t as usize)
        }
        Position::Pattern(pat) => {
            if pat.occurrence == 0 {
                return None;
            }
            let hits = pattern_hits(&pat.left, &pat.right, subject);
            let n = pat.occurrence.unsigned_abs() as usize;
            if n > hits.len() {
                return None;
            }
            Some(if pat.occurrence > 0 {
                hits[n - 1]
            } else {
                hits[hits.len() - n]
            })
        }
    }
}

fn pattern_hits(left: &RegexSeq, right: &RegexSeq, s: &[char]) -> Vec<usize> {
    (0..=s.len())
        .filter(|&t| left.matches_ending_at(s, t) && right.matches_starting_at(s, t))
        .collect()
}

/// Every bounded position expression that resolves to one index of a subject.
///
/// Constants hold both the left-counted and the right-counted encoding;
/// patterns hold both signs of the occurrence count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PositionSet {
    consts: Vec<i64>,
    patterns: Vec<PosPattern>,
}

impl PositionSet {
    pub fn new(mut consts: Vec<i64>, mut patterns: Vec<PosPattern>) -> Self {
        consts.sort_unstable();
        consts.dedup();
        patterns.sort();
        patterns.dedup();
        PositionSet { consts, patterns }
    }

    pub fn consts(&self) -> &[i64] {
        &self.consts
    }

    pub fn patterns(&self) -> &[PosPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.consts.len() + self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`-th member, constants first.
    pub fn get(&self, i: usize) -> Position {
        if i < self.consts.len() {
            Position::Const(self.consts[i])
        } else {
            Position::Pattern(self.patterns[i - self.consts.len()].clone())
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    pub fn contains(&self, p: &Position) -> bool {
        match p {
            Position::Const(k) => self.consts.binary_search(k).is_ok(),
            Position::Pattern(pat) => self.patterns.binary_search(pat).is_ok(),
        }
    }

    /// Members present in both sets.
    pub fn intersect(&self, other: &PositionSet) -> PositionSet {
        PositionSet {
            consts: sorted_intersection(&self.consts, &other.consts),
            patterns: sorted_intersection(&self.patterns, &other.patterns),
        }
    }
}

fn sorted_intersection<T: Ord + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Precomputed token boundaries of one subject string, for position generation.
pub struct TokenProfile {
    chars: Vec<char>,
    ends: Vec<Vec<Token>>,
    starts: Vec<Vec<Token>>,
}

impl TokenProfile {
    pub fn new(subject: &str) -> Self {
        let chars: Vec<char> = subject.chars().collect();
        let mut ends = vec![Vec::new(); chars.len() + 1];
        let mut starts = vec![Vec::new(); chars.len() + 1];
        for t in 0..=chars.len() {
            for tok in Token::ALL {
                if tok.match_ending_at(&chars, t).is_some() {
                    ends[t].push(tok);
                }
                if tok.match_starting_at(&chars, t).is_some() {
                    starts[t].push(tok);
                }
            }
        }
        TokenProfile {
            chars,
            ends,
            starts,
        }
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    fn qualifies(&self, left: Option<Token>, right: Option<Token>, t: usize) -> bool {
        left.is_none_or(|l| self.ends[t].contains(&l))
            && right.is_none_or(|r| self.starts[t].contains(&r))
    }

    /// All positions with token sides of length at most one that resolve to `index`.
    pub fn positions(&self, index: usize) -> PositionSet {
        let len = self.chars.len();
        assert!(index <= len, "position {index} outside 0..={len}");
        let consts = vec![index as i64, index as i64 - len as i64 - 1];
        let lefts = std::iter::once(None).chain(self.ends[index].iter().copied().map(Some));
        let mut patterns = Vec::new();
        for left in lefts {
            let rights = std::iter::once(None).chain(self.starts[index].iter().copied().map(Some));
            for right in rights {
                if left.is_none() && right.is_none() {
                    continue;
                }
                let hits: Vec<usize> = (0..=len)
                    .filter(|&t| self.qualifies(left, right, t))
                    .collect();
                let i = hits
                    .iter()
                    .position(|&t| t == index)
                    .expect("index qualifies");
                let seq = |t: Option<Token>| RegexSeq(t.into_iter().collect());
                for occurrence in [i as i64 + 1, -((hits.len() - i) as i64)] {
                    patterns.push(PosPattern {
                        left: seq(left),
                        right: seq(right),
                        occurrence,
                    });
                }
            }
        }
        PositionSet::new(consts, patterns)
    }
}

/// Every bounded position expression that resolves to `index` on `subject`.
pub fn generate_positions(subject: &str, index: usize) -> PositionSet {
    TokenProfile::new(subject).positions(index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn pos(l: &[Token], r: &[Token], c: i64) -> Position {
        Position::pattern(RegexSeq(l.to_vec()), RegexSeq(r.to_vec()), c)
    }

    #[test]
    fn slash_position() {
        let p = pos(&[Token::Slash], &[], 1);
        assert_eq!(eval_position(&p, &chars("10/12/2010")), Some(3));
    }

    #[test]
    fn last_number_end() {
        let p = pos(&[Token::Num], &[], -1);
        assert_eq!(eval_position(&p, &chars("6-3-2008")), Some(8));
    }

    #[test]
    fn const_positions() {
        let s = chars("1453");
        assert_eq!(eval_position(&Position::Const(0), &s), Some(0));
        assert_eq!(eval_position(&Position::Const(-3), &s), Some(2));
        assert_eq!(eval_position(&Position::Const(-1), &s), Some(4));
        assert_eq!(eval_position(&Position::Const(5), &s), None);
        assert_eq!(eval_position(&Position::Const(-6), &s), None);
    }

    #[test]
    fn runs_are_maximal() {
        // NumTok never ends inside "2010"
        let p = pos(&[Token::Num], &[], 2);
        assert_eq!(eval_position(&p, &chars("2010")), None);
        let p = pos(&[], &[Token::Alph], 2);
        assert_eq!(eval_position(&p, &chars("Alan Turing")), Some(5));
    }

    #[test]
    fn missing_occurrence_fails() {
        let p = pos(&[Token::Slash], &[], 3);
        assert_eq!(eval_position(&p, &chars("10/12/2010")), None);
    }

    #[test]
    fn token_sequences() {
        let p = pos(&[Token::Num, Token::Slash], &[], 1);
        assert_eq!(eval_position(&p, &chars("10/12/2010")), Some(3));
        let p = pos(&[], &[Token::Slash, Token::Num], -1);
        assert_eq!(eval_position(&p, &chars("10/12/2010")), Some(5));
    }

    #[test]
    fn generated_example_members() {
        let set = generate_positions("c4 c3 c1", 2);
        assert!(set.contains(&Position::Const(2)));
        assert!(set.contains(&Position::Const(-7)));
        assert!(set.contains(&pos(&[Token::Alph], &[Token::Whitespace], 1)));
        assert!(set.contains(&pos(&[Token::Num], &[], 1)));

        let set = generate_positions("10/12/2010", 3);
        assert!(set.contains(&pos(&[Token::Slash], &[], 1)));
        assert!(set.contains(&pos(&[], &[Token::Num], 2)));

        let set = generate_positions("abc", 0);
        assert!(set.contains(&Position::Const(0)));
        assert!(set.contains(&pos(&[Token::Start], &[], 1)));
    }

    #[test]
    fn alphnum_is_a_synonym() {
        assert_eq!(Token::from_name("AlphNumTok"), Some(Token::Alph));
    }

    proptest::proptest! {
        #[test]
        fn generated_positions_round_trip(s in "[a-cA-C0-9 /.,:-]{0,10}", frac in 0.0f64..=1.0) {
            let cs = chars(&s);
            let index = ((cs.len() as f64) * frac).floor() as usize;
            let set = generate_positions(&s, index);
            for p in set.iter() {
                proptest::prop_assert_eq!(eval_position(&p, &cs), Some(index), "{:?}", p);
            }
        }

        #[test]
        fn negative_const_law(s in "[a-z0-9 ]{0,10}", frac in 0.0f64..=1.0) {
            let cs = chars(&s);
            let k = ((cs.len() as f64) * frac).floor() as i64;
            let neg = k - cs.len() as i64 - 1;
            proptest::prop_assert_eq!(
                eval_position(&Position::Const(k), &cs),
                eval_position(&Position::Const(neg), &cs)
            );
        }
    }
}
