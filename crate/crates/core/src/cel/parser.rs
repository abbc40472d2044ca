//! Concrete syntax for timed CEL.
//!
//! ```text
//! query    := windowed EOF
//! windowed := or ("WITHIN" interval)*
//! or       := and ("OR" and)*
//! and      := seq ("AND" seq)*
//! seq      := postfix ((";" | ":") interval? postfix)*        left-associative
//! postfix  := primary ("AS" ident | "FILTER" filters | "+" interval? | "(+)" interval?)*
//! primary  := ident | "(" windowed ")" | "PROJECT" "[" idents? "]" "(" windowed ")"
//! filters  := ident "[" pred "]" | "(" ident "[" pred "]" ("AND" ident "[" pred "]")* ")"
//! interval := ("[" | "(") num "," (num | "inf") ("]" | ")") | cmp num
//! pred     := pand ("OR" pand)* ;  pand := patom ("AND" patom)*
//! patom    := "NOT" patom | "TRUE" | "TYPE" "=" ident | "(" pred ")" | ident cmp const
//! ```
//!
//! Keywords are case-insensitive. `⊕`, `π`, `∞`, `≤`, `≥`, `≠` are accepted
//! as synonyms. `#` starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

use super::CelFormula;
use crate::model::{Interval, Value, VarSet};
use crate::predicate::{Cmp, Predicate};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownOperator(String),
    MalformedInterval(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownOperator(op) => write!(f, "unknown operator `{op}`"),
            ParseErrorKind::MalformedInterval(m) => write!(f, "malformed interval: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    Plus,
    OPlus,
    Cmp(Cmp),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(s) => write!(f, "number `{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::OPlus => f.write_str("`(+)`"),
            Tok::Cmp(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const KEYWORDS: &[&str] =
    &["AS", "FILTER", "OR", "AND", "WITHIN", "PROJECT", "NOT", "TRUE", "TYPE", "INF"];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! err {
        ($l:expr, $c:expr, $k:expr) => {
            return Err(ParseError { line: $l, col: $c, kind: $k })
        };
    }
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let starts = |s: &str| chars[i..].iter().take(s.chars().count()).copied().eq(s.chars());
        let (tok, len) = if starts("(+)") {
            (Tok::OPlus, 3)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.' || chars[j] == '/') {
                j += 1;
            }
            (Tok::Num(chars[i..j].iter().collect()), j - i)
        } else if c == '"' {
            let mut j = i + 1;
            let mut s = String::new();
            loop {
                match chars.get(j) {
                    None => err!(tl, tc, ParseErrorKind::Syntax("unterminated string".into())),
                    Some('"') => break,
                    Some('\\') => {
                        match chars.get(j + 1) {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(&e) => s.push(e),
                            None => {
                                err!(tl, tc, ParseErrorKind::Syntax("unterminated string".into()))
                            }
                        }
                        j += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        j += 1;
                    }
                }
            }
            (Tok::Str(s), j + 1 - i)
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            match two.as_str() {
                "<=" => (Tok::Cmp(Cmp::Le), 2),
                ">=" => (Tok::Cmp(Cmp::Ge), 2),
                "!=" | "<>" => (Tok::Cmp(Cmp::Ne), 2),
                "==" => (Tok::Cmp(Cmp::Eq), 2),
                _ => match c {
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    '[' => (Tok::LBrack, 1),
                    ']' => (Tok::RBrack, 1),
                    ',' => (Tok::Comma, 1),
                    ';' => (Tok::Semi, 1),
                    ':' => (Tok::Colon, 1),
                    '+' => (Tok::Plus, 1),
                    '⊕' => (Tok::OPlus, 1),
                    '<' => (Tok::Cmp(Cmp::Lt), 1),
                    '>' => (Tok::Cmp(Cmp::Gt), 1),
                    '=' => (Tok::Cmp(Cmp::Eq), 1),
                    '≤' => (Tok::Cmp(Cmp::Le), 1),
                    '≥' => (Tok::Cmp(Cmp::Ge), 1),
                    '≠' => (Tok::Cmp(Cmp::Ne), 1),
                    '∞' => (Tok::Ident("inf".into()), 1),
                    'π' => (Tok::Ident("PROJECT".into()), 1),
                    _ => {
                        let mut j = i + 1;
                        while j < chars.len()
                            && !chars[j].is_alphanumeric()
                            && !chars[j].is_whitespace()
                            && !"()[],;:\"#".contains(chars[j])
                        {
                            j += 1;
                        }
                        let op: String = chars[i..j].iter().collect();
                        err!(tl, tc, ParseErrorKind::UnknownOperator(op))
                    }
                },
            }
        };
        advance(len, &mut i);
        out.push(Spanned { tok, line: tl, col: tc });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, kind }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self.peek().clone();
        if let Tok::Ident(s) = &found {
            if !is_keyword(s) && matches!(wanted, "an operator or end of input") {
                return self.error_here(ParseErrorKind::UnknownOperator(s.clone()));
            }
        }
        self.error_here(ParseErrorKind::Syntax(format!("expected {wanted}, found {found}")))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn windowed(&mut self) -> PResult<CelFormula> {
        let mut f = self.or()?;
        while self.eat_kw("WITHIN") {
            let i = self.interval()?;
            f = f.within(i);
        }
        Ok(f)
    }

    fn or(&mut self) -> PResult<CelFormula> {
        let mut f = self.and()?;
        while self.eat_kw("OR") {
            f = f.or(self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> PResult<CelFormula> {
        let mut f = self.seq()?;
        while self.eat_kw("AND") {
            f = f.and(self.seq()?);
        }
        Ok(f)
    }

    fn seq(&mut self) -> PResult<CelFormula> {
        let mut f = self.postfix()?;
        loop {
            let contiguous = match self.peek() {
                Tok::Semi => false,
                Tok::Colon => true,
                _ => return Ok(f),
            };
            self.bump();
            let interval = self.optional_interval()?;
            let rhs = self.postfix()?;
            f = match (contiguous, interval) {
                (false, None) => f.seq(rhs),
                (true, None) => f.contig_seq(rhs),
                (false, Some(i)) => f.timed_seq(i, rhs),
                (true, Some(i)) => f.timed_contig_seq(i, rhs),
            };
        }
    }

    fn postfix(&mut self) -> PResult<CelFormula> {
        let mut f = self.primary()?;
        loop {
            if self.eat_kw("AS") {
                let x = self.ident("a variable name after AS")?;
                f = f.as_var(&x);
            } else if self.eat_kw("FILTER") {
                for (x, p) in self.filters()? {
                    f = f.filter(&x, p);
                }
            } else if *self.peek() == Tok::Plus {
                self.bump();
                f = match self.optional_interval()? {
                    None => f.plus(),
                    Some(i) => f.timed_iter(i),
                };
            } else if *self.peek() == Tok::OPlus {
                self.bump();
                f = match self.optional_interval()? {
                    None => f.contig_plus(),
                    Some(i) => f.timed_contig_iter(i),
                };
            } else {
                return Ok(f);
            }
        }
    }

    fn primary(&mut self) -> PResult<CelFormula> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.windowed()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("PROJECT") => {
                self.bump();
                self.expect(Tok::LBrack, "`[` after PROJECT")?;
                let mut vars = VarSet::new();
                if *self.peek() != Tok::RBrack {
                    loop {
                        vars.insert(self.ident("a variable name")?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrack, "`]`")?;
                self.expect(Tok::LParen, "`(` after the projection list")?;
                let f = self.windowed()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(CelFormula::Project(vars, Box::new(f)))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(CelFormula::EventType(s))
            }
            Tok::Ident(s) => Err(self.error_here(ParseErrorKind::Syntax(format!(
                "keyword `{s}` cannot start a formula"
            )))),
            _ => Err(self.unexpected("an event type, `(` or PROJECT")),
        }
    }

    fn filters(&mut self) -> PResult<Vec<(String, Predicate)>> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let mut out = vec![self.filter_item()?];
            while self.eat_kw("AND") {
                out.push(self.filter_item()?);
            }
            self.expect(Tok::RParen, "`)` closing the filter list")?;
            Ok(out)
        } else {
            Ok(vec![self.filter_item()?])
        }
    }

    fn filter_item(&mut self) -> PResult<(String, Predicate)> {
        let x = self.ident("a variable name in FILTER")?;
        self.expect(Tok::LBrack, "`[` opening the filter predicate")?;
        let p = self.pred()?;
        self.expect(Tok::RBrack, "`]` closing the filter predicate")?;
        Ok((x, p))
    }

    fn pred(&mut self) -> PResult<Predicate> {
        let mut p = self.pred_and()?;
        while self.eat_kw("OR") {
            p = Predicate::or(p, self.pred_and()?);
        }
        Ok(p)
    }

    fn pred_and(&mut self) -> PResult<Predicate> {
        let mut p = self.pred_atom()?;
        while self.eat_kw("AND") {
            p = Predicate::And(Box::new(p), Box::new(self.pred_atom()?));
        }
        Ok(p)
    }

    fn pred_atom(&mut self) -> PResult<Predicate> {
        if self.eat_kw("NOT") {
            return Ok(Predicate::Not(Box::new(self.pred_atom()?)));
        }
        if self.eat_kw("TRUE") {
            return Ok(Predicate::True);
        }
        if self.eat_kw("TYPE") {
            self.expect(Tok::Cmp(Cmp::Eq), "`=` after TYPE")?;
            let t = self.ident("an event type")?;
            return Ok(Predicate::TypeIs(t));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let p = self.pred()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(p);
        }
        let attr = self.ident("an attribute name")?;
        let cmp = match self.peek() {
            Tok::Cmp(c) => *c,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let value = match self.bump() {
            Tok::Num(s) => self.number_value(&s)?,
            Tok::Str(s) => {
                if !matches!(cmp, Cmp::Eq | Cmp::Ne) {
                    self.pos -= 1;
                    return Err(self.error_here(ParseErrorKind::Syntax(format!(
                        "strings only support = and !=, found `{cmp}`"
                    ))));
                }
                Value::Str(s)
            }
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("a constant"));
            }
        };
        Ok(Predicate::Basic { attr, cmp, value })
    }

    fn number_value(&self, s: &str) -> PResult<Value> {
        if !s.contains('.') && !s.contains('/') {
            if let Ok(i) = s.parse::<i64>() {
                return Ok(Value::Int(i));
            }
        }
        s.parse::<Rational>()
            .map(Value::Rat)
            .map_err(|_| self.error_here(ParseErrorKind::Syntax(format!("bad number `{s}`"))))
    }

    fn rational(&mut self) -> PResult<Rational> {
        match self.peek().clone() {
            Tok::Num(s) => {
                let r = s.parse::<Rational>().map_err(|_| {
                    self.error_here(ParseErrorKind::MalformedInterval(format!("bad bound `{s}`")))
                })?;
                self.bump();
                Ok(r)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    fn interval_starts(&self) -> bool {
        match self.peek() {
            Tok::LBrack | Tok::Cmp(_) => true,
            Tok::LParen => matches!(self.peek_at(1), Tok::Num(_)),
            _ => false,
        }
    }

    fn optional_interval(&mut self) -> PResult<Option<Interval>> {
        if self.interval_starts() {
            self.interval().map(Some)
        } else {
            Ok(None)
        }
    }

    fn interval(&mut self) -> PResult<Interval> {
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let malformed = |m: String| ParseError { line, col, kind: ParseErrorKind::MalformedInterval(m) };
        let (low, high, low_open, high_open) = match self.peek().clone() {
            Tok::Cmp(c) => {
                self.bump();
                let v = self.rational()?;
                match c {
                    Cmp::Le => (Rational::ZERO, Some(v), false, false),
                    Cmp::Lt => (Rational::ZERO, Some(v), false, true),
                    Cmp::Ge => (v, None, false, true),
                    Cmp::Gt => (v, None, true, true),
                    Cmp::Eq => (v, Some(v), false, false),
                    Cmp::Ne => return Err(malformed("`!=` cannot describe an interval".into())),
                }
            }
            Tok::LBrack | Tok::LParen => {
                let low_open = self.bump() == Tok::LParen;
                let low = self.rational()?;
                self.expect(Tok::Comma, "`,` inside the interval")?;
                let high = if self.eat_kw("INF") { None } else { Some(self.rational()?) };
                let high_open = match self.bump() {
                    Tok::RBrack => false,
                    Tok::RParen => true,
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("`]` or `)` closing the interval"));
                    }
                };
                if high.is_none() && !high_open {
                    return Err(malformed("an infinite bound must be open".into()));
                }
                (low, high, low_open, high_open)
            }
            _ => return Err(self.unexpected("an interval")),
        };
        Interval::new(low, high, low_open, high_open).map_err(|e| malformed(e.to_string()))
    }
}

/// Parses one timed CEL formula.
pub fn parse_query(text: &str) -> Result<CelFormula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.windowed()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn single_event_type() {
        assert_eq!(parse_query("T").unwrap(), CelFormula::event("T"));
    }

    #[test]
    fn timed_sequence_under_window() {
        let f = parse_query("A ;[2,∞) B within [0,5]").unwrap();
        let expected = CelFormula::event("A")
            .timed_seq(Interval::at_least(r(2)), CelFormula::event("B"))
            .within(Interval::closed(r(0), r(5)));
        assert_eq!(f, expected);
    }

    #[test]
    fn sequences_are_left_associative() {
        let f = parse_query("A ; B : C").unwrap();
        let expected = CelFormula::event("A").seq(CelFormula::event("B")).contig_seq(CelFormula::event("C"));
        assert_eq!(f, expected);
    }

    #[test]
    fn as_binds_tighter_than_sequence() {
        let f = parse_query("H AS X ; T AS Y").unwrap();
        let expected = CelFormula::event("H").as_var("X").seq(CelFormula::event("T").as_var("Y"));
        assert_eq!(f, expected);
    }

    #[test]
    fn shorthand_intervals() {
        let f = parse_query("A ;<=1 B").unwrap();
        assert_eq!(f, CelFormula::event("A").timed_seq(Interval::at_most(r(1)), CelFormula::event("B")));
        let g = parse_query("A (+)(2,3]").unwrap();
        let i = Interval::new(r(2), Some(r(3)), true, false).unwrap();
        assert_eq!(g, CelFormula::event("A").timed_contig_iter(i));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_query("A ;\n  B &&").unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
        assert!(matches!(e.kind, ParseErrorKind::UnknownOperator(_)));
        let e = parse_query("A ;[3,2] B").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::MalformedInterval(_)));
        let e = parse_query("A ; ").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        let e = parse_query("A FOLLOWEDBY B").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnknownOperator(_)));
    }

    #[test]
    fn comments_are_ignored() {
        let f = parse_query("# leading\nA # trailing\n OR B").unwrap();
        assert_eq!(f, CelFormula::event("A").or(CelFormula::event("B")));
    }
}
