//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := "true" | atom | "!" "(" formula ")"
//!          | "(" formula op formula ")"
//!          | ("F" | "G") "[" bound "," bound "]" "(" formula ")"
//!          | "(" formula "U" "[" bound "," bound "]" formula ")"
//! op      := "&" | "|" | "->"
//! atom    := ident [ "(" arg { "," arg } ")" ] | ident ("<=" | ">=" | "=") number
//! bound   := int | "?" ident
//! arg     := int | ident | "?" ident
//! ```
//!
//! `¬ ∧ ∨ →` are accepted as aliases of `! & | ->`. Positions in errors are
//! byte offsets into the input.

use thiserror::Error;

use super::ast::{Arg, Atom, Bound, Comparator, Formula, Interval, Threshold};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown atom `{name}` at {pos}")]
    UnknownAtom { pos: usize, name: String },
    #[error("atom `{name}` at {pos} takes {expected} argument(s), got {found}")]
    Arity { pos: usize, name: String, expected: usize, found: usize },
    #[error("malformed interval at {pos}: lower bound {lo} exceeds upper bound {hi}")]
    BadInterval { pos: usize, lo: u32, hi: u32 },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownAtom { pos, .. }
            | ParseError::Arity { pos, .. }
            | ParseError::BadInterval { pos, .. } => *pos,
        }
    }
}

/// Names and arities of the environment atoms a parser should accept.
pub trait AtomVocabulary {
    /// `None` when the atom is unknown, otherwise its argument count.
    fn arity(&self, name: &str) -> Option<usize>;
}

/// Parses without checking atom names against any vocabulary.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, None).parse_all()
}

/// Parses and rejects environment atoms the vocabulary does not know.
/// Numeric comparisons are not checked.
pub fn parse_formula_with(text: &str, vocab: &dyn AtomVocabulary) -> Result<Formula, ParseError> {
    Parser::new(text, Some(vocab)).parse_all()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vocab: Option<&'a dyn AtomVocabulary>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, vocab: Option<&'a dyn AtomVocabulary>) -> Self {
        Parser { src, pos: 0, vocab }
    }

    fn parse_all(mut self) -> Result<Formula, ParseError> {
        let f = self.formula()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(f)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    /// Consumes the first matching token among `alts` (after whitespace).
    fn eat_any(&mut self, alts: &[&str]) -> bool {
        self.skip_ws();
        for alt in alts {
            if self.rest().starts_with(alt) {
                self.pos += alt.len();
                return true;
            }
        }
        false
    }

    fn expect(&mut self, tok: &str) -> Result<(), ParseError> {
        if self.eat_any(&[tok]) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('!') | Some('¬') => {
                self.eat_any(&["!", "¬"]);
                self.expect("(")?;
                let inner = self.group_body()?;
                self.expect(")")?;
                Ok(Formula::not(inner))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.group_body()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                if self.at_temporal('F') || self.at_temporal('G') {
                    let always = self.peek() == Some('G');
                    self.pos += 1;
                    let i = self.interval()?;
                    self.expect("(")?;
                    let inner = self.group_body()?;
                    self.expect(")")?;
                    return Ok(if always {
                        Formula::always(i, inner)
                    } else {
                        Formula::eventually(i, inner)
                    });
                }
                let start = self.pos;
                let name = self.ident()?;
                if name == "true" {
                    return Ok(Formula::True);
                }
                self.atom_after_name(start, name)
            }
            Some(c) => Err(self.error(format!("unexpected character `{c}`"))),
        }
    }

    /// Contents of a parenthesised group: a formula, optionally followed by
    /// one binary operator and its right operand.
    fn group_body(&mut self) -> Result<Formula, ParseError> {
        let left = self.formula()?;
        self.skip_ws();
        if self.peek() == Some(')') {
            return Ok(left);
        }
        if self.eat_any(&["&", "∧"]) {
            Ok(Formula::and(left, self.formula()?))
        } else if self.eat_any(&["->", "→"]) {
            Ok(Formula::implies(left, self.formula()?))
        } else if self.eat_any(&["|", "∨"]) {
            Ok(Formula::or(left, self.formula()?))
        } else if self.at_temporal('U') {
            self.pos += 1;
            let i = self.interval()?;
            Ok(Formula::until(i, left, self.formula()?))
        } else {
            Err(self.error("expected a binary operator (`&`, `|`, `->`, `U[a,b]`) or `)`"))
        }
    }

    /// True when the cursor sits on operator letter `op` followed by `[`.
    fn at_temporal(&mut self, op: char) -> bool {
        self.skip_ws();
        let mut chars = self.rest().chars();
        if chars.next() != Some(op) {
            return false;
        }
        chars.as_str().trim_start().starts_with('[')
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(i, c)| !(c.is_ascii_alphanumeric() || c == '_') || (i == 0 && c.is_ascii_digit()))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(self.error("expected identifier"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn atom_after_name(&mut self, start: usize, name: String) -> Result<Formula, ParseError> {
        if self.eat_any(&["<="]) {
            return self.cmp_atom(name, Comparator::Le);
        }
        if self.eat_any(&[">="]) {
            return self.cmp_atom(name, Comparator::Ge);
        }
        if self.eat_any(&["="]) {
            return self.cmp_atom(name, Comparator::Eq);
        }
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                args.push(self.arg()?);
                if self.eat_any(&[","]) {
                    continue;
                }
                self.expect(")")?;
                break;
            }
        }
        if let Some(vocab) = self.vocab {
            match vocab.arity(&name) {
                None => return Err(ParseError::UnknownAtom { pos: start, name }),
                Some(n) if n != args.len() => {
                    return Err(ParseError::Arity { pos: start, name, expected: n, found: args.len() })
                }
                Some(_) => {}
            }
        }
        Ok(Formula::Atom(Atom::Prop { name, args }))
    }

    fn cmp_atom(&mut self, signal: String, op: Comparator) -> Result<Formula, ParseError> {
        self.skip_ws();
        let threshold = if self.eat_any(&["?"]) {
            Threshold::Slot(self.ident()?)
        } else {
            Threshold::Fixed(self.number()?)
        };
        Ok(Formula::Atom(Atom::Cmp { signal, op, threshold }))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || ((c == '-' || c == '+') && (i == 0 || rest[..i].ends_with(['e', 'E']))))
            })
            .map_or(rest.len(), |(i, _)| i);
        let value: f64 = rest[..len].parse().map_err(|_| self.error("expected a number"))?;
        if !value.is_finite() {
            return Err(self.error("threshold must be finite"));
        }
        self.pos += len;
        Ok(value)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let rest = self.rest();
        let neg = rest.starts_with('-');
        let digits = rest[neg as usize..].chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return Err(self.error("expected integer"));
        }
        let len = digits + neg as usize;
        let v = rest[..len].parse().map_err(|_| self.error("integer out of range"))?;
        self.pos += len;
        Ok(v)
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('?') => {
                self.pos += 1;
                Ok(Arg::Slot(self.ident()?))
            }
            Some(c) if c.is_ascii_digit() || c == '-' => Ok(Arg::Int(self.integer()?)),
            _ => Ok(Arg::Name(self.ident()?)),
        }
    }

    fn bound(&mut self) -> Result<Bound, ParseError> {
        self.skip_ws();
        if self.eat_any(&["?"]) {
            return Ok(Bound::Slot(self.ident()?));
        }
        let at = self.pos;
        let v = self.integer()?;
        u32::try_from(v).map(Bound::Fixed).map_err(|_| ParseError::Syntax {
            pos: at,
            msg: "interval bounds must be non-negative integers".into(),
        })
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        self.expect("[")?;
        let at = self.pos;
        let lo = self.bound()?;
        self.expect(",")?;
        let hi = self.bound()?;
        self.expect("]")?;
        if let (Bound::Fixed(l), Bound::Fixed(h)) = (&lo, &hi) {
            if l > h {
                return Err(ParseError::BadInterval { pos: at, lo: *l, hi: *h });
            }
        }
        Ok(Interval { lo, hi })
    }
}
