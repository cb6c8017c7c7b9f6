//! Linear properties over network inputs and outputs.
//!
//! A property is a conjunction of linear atoms, one per line:
//!
//! ```text
//! # comment
//! x0 >= 1.0
//! 2*x0 - y1 <= 0.25
//! y0 = 0.5
//! ```
//!
//! Grammar per line: `<term> (('+'|'-') <term>)* <rel> <number>` with
//! `<term> := [<number> '*'] ('x'|'y')<index>`, `<rel>` one of `<=`, `>=`,
//! `=`. `x` names inputs, `y` names outputs. Blank lines and `#` comments are
//! ignored. Numbers are decimals (or `p/q` fractions) converted exactly to
//! rationals. Only non-strict relations exist; to prove a universal property,
//! encode its negation and read `unsat` as "property holds".

use crate::rat::{format_exact, parse_number, Rat};
use num_traits::{Signed, Zero};
use std::fmt;

/// A variable reference in a property: network input `x<i>` or output `y<j>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarRef {
    Input(usize),
    Output(usize),
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRef::Input(i) => write!(f, "x{i}"),
            VarRef::Output(i) => write!(f, "y{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// One linear constraint `sum(coeff * var) <rel> constant`.
///
/// Terms are combined so each variable appears at most once, in source order
/// of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearAtom {
    pub terms: Vec<(Rat, VarRef)>,
    pub relation: Relation,
    pub constant: Rat,
}

impl LinearAtom {
    /// Combines duplicate variables and drops cancelled terms. Fails if
    /// nothing remains.
    pub fn new(
        raw_terms: Vec<(Rat, VarRef)>,
        relation: Relation,
        constant: Rat,
    ) -> Result<Self, DegenerateAtom> {
        let mut terms: Vec<(Rat, VarRef)> = Vec::new();
        for (c, v) in raw_terms {
            match terms.iter_mut().find(|(_, u)| *u == v) {
                Some((acc, _)) => *acc += c,
                None => terms.push((c, v)),
            }
        }
        terms.retain(|(c, _)| !c.is_zero());
        if terms.is_empty() {
            return Err(DegenerateAtom);
        }
        Ok(LinearAtom {
            terms,
            relation,
            constant,
        })
    }

    /// Exact truth of the atom at concrete input/output values.
    pub fn holds(&self, inputs: &[Rat], outputs: &[Rat]) -> bool {
        let mut lhs = Rat::zero();
        for (c, v) in &self.terms {
            let val = match v {
                VarRef::Input(i) => &inputs[*i],
                VarRef::Output(i) => &outputs[*i],
            };
            lhs += c * val;
        }
        match self.relation {
            Relation::Le => lhs <= self.constant,
            Relation::Ge => lhs >= self.constant,
            Relation::Eq => lhs == self.constant,
        }
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, (c, v)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            let neg = c < &Rat::zero();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag != Rat::from_integer(1.into()) {
                write!(f, "{}*", format_exact(&mag))?;
            }
            write!(f, "{v}")?;
        }
        write!(f, " {} {}", self.relation, format_exact(&self.constant))
    }
}

/// All atoms hold together (conjunction). Atoms keep source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub atoms: Vec<LinearAtom>,
}

impl Property {
    pub fn holds(&self, inputs: &[Rat], outputs: &[Rat]) -> bool {
        self.atoms.iter().all(|a| a.holds(inputs, outputs))
    }

    /// Highest referenced input/output index, for arity checks.
    pub fn max_indices(&self) -> (Option<usize>, Option<usize>) {
        let mut max_in = None;
        let mut max_out = None;
        for atom in &self.atoms {
            for (_, v) in &atom.terms {
                match v {
                    VarRef::Input(i) => max_in = max_in.max(Some(*i)),
                    VarRef::Output(i) => max_out = max_out.max(Some(*i)),
                }
            }
        }
        (max_in, max_out)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for atom in &self.atoms {
            writeln!(f, "{atom}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegenerateAtom;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PropertyError {
    #[error("line {line}, column {col}: {reason}")]
    Syntax {
        line: usize,
        col: usize,
        reason: String,
    },
    #[error("line {line}, column {col}: unknown variable prefix `{found}` (expected `x` or `y`)")]
    UnknownPrefix {
        line: usize,
        col: usize,
        found: char,
    },
    #[error("property has no atoms")]
    EmptyProperty,
}

struct Cursor<'a> {
    line: &'a str,
    lineno: usize,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn syntax(&self, reason: impl Into<String>) -> PropertyError {
        PropertyError::Syntax {
            line: self.lineno,
            col: self.col(),
            reason: reason.into(),
        }
    }

    /// Longest prefix of the rest that looks like a number token.
    fn take_number(&mut self) -> Option<&'a str> {
        let rest = self.rest();
        let mut len = 0;
        let bytes = rest.as_bytes();
        if len < bytes.len() && (bytes[len] == b'+' || bytes[len] == b'-') {
            len += 1;
        }
        let digits_start = len;
        while len < bytes.len()
            && (bytes[len].is_ascii_digit() || bytes[len] == b'.' || bytes[len] == b'/')
        {
            len += 1;
        }
        // exponent part
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut elen = len + 1;
            if elen < bytes.len() && (bytes[elen] == b'+' || bytes[elen] == b'-') {
                elen += 1;
            }
            let estart = elen;
            while elen < bytes.len() && bytes[elen].is_ascii_digit() {
                elen += 1;
            }
            if elen > estart {
                len = elen;
            }
        }
        if len == digits_start {
            return None;
        }
        let tok = &rest[..len];
        self.pos += len;
        Some(tok)
    }

    fn take_index(&mut self) -> Option<usize> {
        let rest = self.rest();
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return None;
        }
        self.pos += digits.len();
        digits.parse().ok()
    }
}

fn parse_term(cur: &mut Cursor<'_>, sign_neg: bool) -> Result<(Rat, VarRef), PropertyError> {
    cur.skip_ws();
    let mut neg = sign_neg;
    if let Some(c @ ('+' | '-')) = cur.peek() {
        cur.bump();
        if c == '-' {
            neg = !neg;
        }
        cur.skip_ws();
    }
    let coeff = match cur.peek() {
        Some(c) if c.is_ascii_digit() || c == '.' => {
            let start_col = cur.col();
            let tok = cur
                .take_number()
                .ok_or_else(|| cur.syntax("expected a number"))?;
            let value = parse_number(tok).map_err(|_| PropertyError::Syntax {
                line: cur.lineno,
                col: start_col,
                reason: format!("invalid number `{tok}`"),
            })?;
            cur.skip_ws();
            if cur.peek() == Some('*') {
                cur.bump();
                cur.skip_ws();
            }
            value
        }
        _ => Rat::from_integer(1.into()),
    };
    let prefix_col = cur.col();
    let var = match cur.bump() {
        Some('x') => VarRef::Input(
            cur.take_index()
                .ok_or_else(|| cur.syntax("expected variable index"))?,
        ),
        Some('y') => VarRef::Output(
            cur.take_index()
                .ok_or_else(|| cur.syntax("expected variable index"))?,
        ),
        Some(other) => {
            return Err(PropertyError::UnknownPrefix {
                line: cur.lineno,
                col: prefix_col,
                found: other,
            })
        }
        None => return Err(cur.syntax("expected a variable")),
    };
    Ok((if neg { -coeff } else { coeff }, var))
}

fn parse_atom(line: &str, lineno: usize) -> Result<LinearAtom, PropertyError> {
    let mut cur = Cursor {
        line,
        lineno,
        pos: 0,
    };
    let mut terms = Vec::new();
    // leading sign on the first term is tolerated
    cur.skip_ws();
    terms.push(parse_term(&mut cur, false)?);
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some('+') => {
                cur.bump();
                terms.push(parse_term(&mut cur, false)?);
            }
            Some('-') => {
                cur.bump();
                terms.push(parse_term(&mut cur, true)?);
            }
            _ => break,
        }
    }
    cur.skip_ws();
    let relation = match (cur.bump(), cur.peek()) {
        (Some('<'), Some('=')) => {
            cur.bump();
            Relation::Le
        }
        (Some('>'), Some('=')) => {
            cur.bump();
            Relation::Ge
        }
        (Some('='), _) => Relation::Eq,
        _ => return Err(cur.syntax("expected relation `<=`, `>=` or `=`")),
    };
    cur.skip_ws();
    let const_col = cur.col();
    let tok = cur
        .take_number()
        .ok_or_else(|| cur.syntax("expected constant"))?;
    let constant = parse_number(tok).map_err(|_| PropertyError::Syntax {
        line: lineno,
        col: const_col,
        reason: format!("invalid number `{tok}`"),
    })?;
    cur.skip_ws();
    if let Some(c) = cur.peek() {
        return Err(cur.syntax(format!("unexpected trailing `{c}`")));
    }
    LinearAtom::new(terms, relation, constant).map_err(|_| PropertyError::Syntax {
        line: lineno,
        col: 1,
        reason: "atom has no terms after combining".to_string(),
    })
}

/// Parses a property file; atoms keep source order.
pub fn parse_property(text: &str) -> Result<Property, PropertyError> {
    let mut atoms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        atoms.push(parse_atom(line, idx + 1)?);
    }
    if atoms.is_empty() {
        return Err(PropertyError::EmptyProperty);
    }
    Ok(Property { atoms })
}
