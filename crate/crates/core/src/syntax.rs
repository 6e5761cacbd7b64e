//! Signatures, formulas, substitution, matching and the text syntax.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a connective inside its [`Signature`].
pub type OpId = u16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("invalid character {ch:?} at position {pos}")]
    Lex { pos: usize, ch: char },
    #[error("unknown symbol `{name}` at position {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("connective `{symbol}` at position {pos} expects {expected} argument(s), found {found}")]
    Arity {
        pos: usize,
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unbalanced parentheses at position {pos}")]
    Unbalanced { pos: usize },
    #[error("unexpected {found} at position {pos}")]
    Unexpected { pos: usize, found: String },
    #[error("variable index must be at least 1 (position {pos})")]
    ZeroVariable { pos: usize },
    #[error("invalid signature: {0}")]
    Signature(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Connective {
    pub symbol: String,
    pub arity: usize,
}

/// The connective alphabet. Connective order is significant: it fixes table
/// layout and enumeration order everywhere downstream.
///
/// Equality ignores the display name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Signature {
    name: String,
    connectives: Vec<Connective>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.connectives == other.connectives
    }
}

impl Eq for Signature {}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Signature {
    pub fn new<S: Into<String>>(name: S, connectives: &[(&str, usize)]) -> Result<Self, SyntaxError> {
        Self::from_connectives(
            name,
            connectives
                .iter()
                .map(|(s, a)| Connective {
                    symbol: s.to_string(),
                    arity: *a,
                })
                .collect(),
        )
    }

    pub fn from_connectives<S: Into<String>>(
        name: S,
        connectives: Vec<Connective>,
    ) -> Result<Self, SyntaxError> {
        if connectives.is_empty() {
            return Err(SyntaxError::Signature("at least one connective is required".into()));
        }
        if connectives.len() > OpId::MAX as usize {
            return Err(SyntaxError::Signature("too many connectives".into()));
        }
        let mut seen = BTreeSet::new();
        for c in &connectives {
            if !is_identifier(&c.symbol) {
                return Err(SyntaxError::Signature(format!("`{}` is not an identifier", c.symbol)));
            }
            if !seen.insert(c.symbol.as_str()) {
                return Err(SyntaxError::Signature(format!("duplicate symbol `{}`", c.symbol)));
            }
        }
        Ok(Signature {
            name: name.into(),
            connectives,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name<S: Into<String>>(mut self, name: S) -> Self {
        self.name = name.into();
        self
    }

    pub fn connectives(&self) -> &[Connective] {
        &self.connectives
    }

    pub fn len(&self) -> usize {
        self.connectives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connectives.is_empty()
    }

    pub fn lookup(&self, symbol: &str) -> Option<OpId> {
        self.connectives
            .iter()
            .position(|c| c.symbol == symbol)
            .map(|i| i as OpId)
    }

    pub fn symbol(&self, op: OpId) -> &str {
        &self.connectives[op as usize].symbol
    }

    pub fn arity(&self, op: OpId) -> usize {
        self.connectives[op as usize].arity
    }

    pub fn ops(&self) -> impl Iterator<Item = OpId> + '_ {
        (0..self.connectives.len()).map(|i| i as OpId)
    }

    pub fn max_arity(&self) -> usize {
        self.connectives.iter().map(|c| c.arity).max().unwrap_or(0)
    }

    /// Renders `name[sym/arity, ...]`, the form used in file headers.
    pub fn header(&self) -> String {
        let list: Vec<String> = self
            .connectives
            .iter()
            .map(|c| format!("{}/{}", c.symbol, c.arity))
            .collect();
        format!("{}[{}]", self.name, list.join(", "))
    }
}

/// The named signatures every tool knows about.
pub fn builtin_signature(name: &str) -> Option<Signature> {
    let conns: &[(&str, usize)] = match name {
        "ipc" => &[("neg", 1), ("and", 2), ("or", 2), ("imp", 2)],
        "int" => &[("neg", 1), ("and", 2), ("or", 2), ("imp", 2), ("bot", 0)],
        "modal" => &[("neg", 1), ("and", 2), ("or", 2), ("imp", 2), ("box", 1), ("diamond", 1)],
        "triangle" => &[("box", 1), ("tri", 2)],
        "neq" => &[("t", 0), ("f", 0), ("neq", 2)],
        "kcalc" => &[("next", 1), ("sim", 2)],
        "impbot" => &[("imp", 2), ("bot", 0)],
        _ => return None,
    };
    Some(Signature::new(name, conns).expect("builtin signatures are well formed"))
}

/// A propositional formula. Subtrees are reference counted, so cloning is cheap
/// and formulas can be shared between threads.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Var(u32),
    App(OpId, Arc<[Formula]>),
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "X{i}"),
            Formula::App(op, args) => {
                write!(f, "#{op}")?;
                if !args.is_empty() {
                    f.debug_list().entries(args.iter()).finish()?;
                }
                Ok(())
            }
        }
    }
}

impl Formula {
    pub fn var(i: u32) -> Formula {
        assert!(i >= 1, "variables are numbered from 1");
        Formula::Var(i)
    }

    pub fn app(op: OpId, args: Vec<Formula>) -> Formula {
        Formula::App(op, args.into())
    }

    pub fn constant(op: OpId) -> Formula {
        Formula::App(op, Arc::from(Vec::new()))
    }

    pub fn as_var(&self) -> Option<u32> {
        match self {
            Formula::Var(i) => Some(*i),
            Formula::App(..) => None,
        }
    }

    pub fn children(&self) -> &[Formula] {
        match self {
            Formula::Var(_) => &[],
            Formula::App(_, args) => args,
        }
    }

    /// Checks that every application matches a connective of `sig`.
    pub fn is_over(&self, sig: &Signature) -> bool {
        match self {
            Formula::Var(i) => *i >= 1,
            Formula::App(op, args) => {
                (*op as usize) < sig.len()
                    && sig.arity(*op) == args.len()
                    && args.iter().all(|a| a.is_over(sig))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) => 0,
            Formula::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Formula::size).sum::<usize>()
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Formula::Var(i) => {
                out.insert(*i);
            }
            Formula::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn max_var(&self) -> u32 {
        match self {
            Formula::Var(i) => *i,
            Formula::App(_, args) => args.iter().map(Formula::max_var).max().unwrap_or(0),
        }
    }

    /// Largest distance from the root to an occurrence of `x`.
    pub fn max_var_depth(&self, x: u32) -> Option<usize> {
        match self {
            Formula::Var(i) => (*i == x).then_some(0),
            Formula::App(_, args) => args.iter().filter_map(|a| a.max_var_depth(x)).map(|d| d + 1).max(),
        }
    }

    pub fn substitute(&self, s: &Substitution) -> Formula {
        match self {
            Formula::Var(i) => s.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Formula::App(op, args) => {
                Formula::App(*op, args.iter().map(|a| a.substitute(s)).collect::<Vec<_>>().into())
            }
        }
    }

    /// Distinct subformulas, children before parents, in first-visit order.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_subformulas(&mut seen, &mut out);
        out
    }

    fn collect_subformulas(&self, seen: &mut BTreeSet<Formula>, out: &mut Vec<Formula>) {
        if seen.contains(self) {
            return;
        }
        for a in self.children() {
            a.collect_subformulas(seen, out);
        }
        seen.insert(self.clone());
        out.push(self.clone());
    }

    /// Renames variables so that they first occur in the order X1, X2, ...
    pub fn canonical_renaming(&self) -> Formula {
        let mut map = BTreeMap::new();
        let mut order = Vec::new();
        self.first_occurrences(&mut order);
        for v in order {
            let next = map.len() as u32 + 1;
            map.entry(v).or_insert(next);
        }
        let s = Substitution::from_iter(map.into_iter().map(|(k, v)| (k, Formula::Var(v))));
        self.substitute(&s)
    }

    fn first_occurrences(&self, order: &mut Vec<u32>) {
        match self {
            Formula::Var(i) => {
                if !order.contains(i) {
                    order.push(*i)
                }
            }
            Formula::App(_, args) => args.iter().for_each(|a| a.first_occurrences(order)),
        }
    }

    pub fn is_canonically_named(&self) -> bool {
        let mut order = Vec::new();
        self.first_occurrences(&mut order);
        order.iter().enumerate().all(|(i, v)| *v == i as u32 + 1)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> Display<'a> {
        Display {
            formula: self,
            sig,
            sugar: false,
        }
    }

    pub fn display_sugared<'a>(&'a self, sig: &'a Signature) -> Display<'a> {
        Display {
            formula: self,
            sig,
            sugar: true,
        }
    }
}

/// One-sided matching: the unique `s` with `pattern.substitute(s) == target`,
/// restricted to the variables of `pattern`.
pub fn match_formula(pattern: &Formula, target: &Formula) -> Option<Substitution> {
    let mut s = Substitution::new();
    match_into(pattern, target, &mut s).then_some(s)
}

/// Extends `s` so that `pattern.substitute(s) == target`. On failure `s` may be
/// partially extended.
pub fn match_into(pattern: &Formula, target: &Formula, s: &mut Substitution) -> bool {
    match pattern {
        Formula::Var(x) => match s.get(*x) {
            Some(bound) => bound == target,
            None => {
                s.insert(*x, target.clone());
                true
            }
        },
        Formula::App(op, args) => match target {
            Formula::App(top, targs) if top == op && targs.len() == args.len() => {
                args.iter().zip(targs.iter()).all(|(p, t)| match_into(p, t, s))
            }
            _ => false,
        },
    }
}

/// A finite map from variables to formulas; unbound variables are fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Substitution(BTreeMap<u32, Formula>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn insert(&mut self, x: u32, f: Formula) {
        self.0.insert(x, f);
    }

    pub fn get(&self, x: u32) -> Option<&Formula> {
        self.0.get(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Formula)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `then`: `f.substitute(&s.compose(&t)) == f.substitute(&s).substitute(&t)`.
    pub fn compose(&self, then: &Substitution) -> Substitution {
        let mut out: BTreeMap<u32, Formula> =
            self.0.iter().map(|(k, v)| (*k, v.substitute(then))).collect();
        for (k, v) in &then.0 {
            out.entry(*k).or_insert_with(|| v.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(u32, Formula)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (u32, Formula)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

// ---------------------------------------------------------------------------
// Printing

pub struct Display<'a> {
    formula: &'a Formula,
    sig: &'a Signature,
    sugar: bool,
}

/// Infix operators available as sugar, by connective name: (token, precedence).
/// Higher precedence binds tighter.
fn infix_of(symbol: &str) -> Option<(&'static str, u8)> {
    match symbol {
        "and" => Some(("&", 3)),
        "or" => Some(("|", 2)),
        "imp" => Some(("->", 1)),
        "sim" => Some(("~", 0)),
        _ => None,
    }
}

const NEG_PREC: u8 = 4;

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sugar {
            write_sugared(self.formula, self.sig, 0, f)
        } else {
            write_prefix(self.formula, self.sig, f)
        }
    }
}

fn write_prefix(formula: &Formula, sig: &Signature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Var(i) => write!(f, "X{i}"),
        Formula::App(op, args) => {
            f.write_str(sig.symbol(*op))?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_prefix(a, sig, f)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

fn write_sugared(formula: &Formula, sig: &Signature, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Var(i) => write!(f, "X{i}"),
        Formula::App(op, args) => {
            let symbol = sig.symbol(*op);
            if symbol == "neg" && args.len() == 1 {
                f.write_str("!")?;
                return write_sugared(&args[0], sig, NEG_PREC, f);
            }
            if let (Some((tok, prec)), 2) = (infix_of(symbol), args.len()) {
                let paren = prec < ctx;
                if paren {
                    f.write_str("(")?;
                }
                // imp is right associative, and/or left associative, ~ not associative
                let (lctx, rctx) = match symbol {
                    "imp" => (prec + 1, prec),
                    "sim" => (prec + 1, prec + 1),
                    _ => (prec, prec + 1),
                };
                write_sugared(&args[0], sig, lctx, f)?;
                write!(f, " {tok} ")?;
                write_sugared(&args[1], sig, rctx, f)?;
                if paren {
                    f.write_str(")")?;
                }
                return Ok(());
            }
            f.write_str(symbol)?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_sugared(a, sig, 0, f)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(u32),
    LParen,
    RParen,
    Comma,
    Infix(&'static str),
    Bang,
}

fn describe(tok: Option<&(usize, Tok)>) -> String {
    match tok {
        None => "end of input".to_string(),
        Some((_, t)) => match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(i) => format!("`X{i}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Infix(s) => format!("`{s}`"),
            Tok::Bang => "`!`".into(),
        },
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1
            }
            ',' => {
                out.push((pos, Tok::Comma));
                i += 1
            }
            '&' | '∧' => {
                out.push((pos, Tok::Infix("and")));
                i += 1
            }
            '|' | '∨' => {
                out.push((pos, Tok::Infix("or")));
                i += 1
            }
            '~' => {
                out.push((pos, Tok::Infix("sim")));
                i += 1
            }
            '→' => {
                out.push((pos, Tok::Infix("imp")));
                i += 1
            }
            '!' | '¬' => {
                out.push((pos, Tok::Bang));
                i += 1
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1].1 == '>' {
                    out.push((pos, Tok::Infix("imp")));
                    i += 2
                } else {
                    return Err(SyntaxError::Lex { pos, ch: c });
                }
            }
            'X' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(SyntaxError::Lex { pos, ch: c });
                }
                let digits: String = chars[i + 1..j].iter().map(|(_, c)| *c).collect();
                let n: u32 = digits.parse().map_err(|_| SyntaxError::Lex { pos, ch: c })?;
                if n == 0 {
                    return Err(SyntaxError::ZeroVariable { pos });
                }
                out.push((pos, Tok::Var(n)));
                i = j;
            }
            c if c.is_ascii_lowercase() => {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].1.is_ascii_lowercase() || chars[j].1.is_ascii_digit() || chars[j].1 == '_')
                {
                    j += 1;
                }
                out.push((pos, Tok::Ident(chars[i..j].iter().map(|(_, c)| *c).collect())));
                i = j;
            }
            _ => return Err(SyntaxError::Lex { pos, ch: c }),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: &'a Signature,
    end: usize,
}

/// Parses a formula over `sig`. Prefix application works for every connective;
/// infix sugar (`!`, `&`, `|`, `->`, `~`) is available for connectives named
/// `neg`, `and`, `or`, `imp` and `sim`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        sig,
        end: text.len(),
    };
    let f = p.expr(0)?;
    match p.toks.get(p.at) {
        None => Ok(f),
        Some((pos, Tok::RParen)) => Err(SyntaxError::Unbalanced { pos: *pos }),
        other => Err(SyntaxError::Unexpected {
            pos: other.map(|t| t.0).unwrap_or(p.end),
            found: describe(other),
        }),
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.at)
    }

    fn pos(&self) -> usize {
        self.peek().map(|t| t.0).unwrap_or(self.end)
    }

    fn op_for(&self, name: &str, pos: usize) -> Result<OpId, SyntaxError> {
        self.sig.lookup(name).ok_or_else(|| SyntaxError::UnknownSymbol {
            pos,
            name: name.to_string(),
        })
    }

    fn expr(&mut self, min_prec: u8) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let (pos, name) = match self.peek() {
                Some((pos, Tok::Infix(name))) => (*pos, *name),
                _ => break,
            };
            let (_, prec) = infix_of(name).expect("lexer only emits known infix operators");
            if prec < min_prec {
                break;
            }
            let op = self.op_for(name, pos)?;
            if self.sig.arity(op) != 2 {
                return Err(SyntaxError::Arity {
                    pos,
                    symbol: name.to_string(),
                    expected: self.sig.arity(op),
                    found: 2,
                });
            }
            self.at += 1;
            let next_min = match name {
                "imp" => prec,
                _ => prec + 1,
            };
            let rhs = self.expr(next_min)?;
            lhs = Formula::app(op, vec![lhs, rhs]);
            if name == "sim" {
                if let Some((pos, Tok::Infix("sim"))) = self.peek() {
                    return Err(SyntaxError::Unexpected {
                        pos: *pos,
                        found: "`~` (not associative)".into(),
                    });
                }
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let pos = self.pos();
        match self.toks.get(self.at).cloned() {
            Some((_, Tok::Bang)) => {
                self.at += 1;
                let op = self.op_for("neg", pos)?;
                if self.sig.arity(op) != 1 {
                    return Err(SyntaxError::Arity {
                        pos,
                        symbol: "neg".into(),
                        expected: self.sig.arity(op),
                        found: 1,
                    });
                }
                let inner = self.unary()?;
                Ok(Formula::app(op, vec![inner]))
            }
            Some((_, Tok::Var(i))) => {
                self.at += 1;
                Ok(Formula::Var(i))
            }
            Some((_, Tok::LParen)) => {
                self.at += 1;
                let inner = self.expr(0)?;
                match self.peek() {
                    Some((_, Tok::RParen)) => {
                        self.at += 1;
                        Ok(inner)
                    }
                    None => Err(SyntaxError::Unbalanced { pos }),
                    other => Err(SyntaxError::Unexpected {
                        pos: other.map(|t| t.0).unwrap_or(self.end),
                        found: describe(other),
                    }),
                }
            }
            Some((_, Tok::Ident(name))) => {
                self.at += 1;
                let op = self.op_for(&name, pos)?;
                let mut args = Vec::new();
                if let Some((_, Tok::LParen)) = self.peek() {
                    let open = self.pos();
                    self.at += 1;
                    loop {
                        args.push(self.expr(0)?);
                        match self.peek() {
                            Some((_, Tok::Comma)) => self.at += 1,
                            Some((_, Tok::RParen)) => {
                                self.at += 1;
                                break;
                            }
                            None => return Err(SyntaxError::Unbalanced { pos: open }),
                            other => {
                                return Err(SyntaxError::Unexpected {
                                    pos: other.map(|t| t.0).unwrap_or(self.end),
                                    found: describe(other),
                                })
                            }
                        }
                    }
                }
                let expected = self.sig.arity(op);
                if expected != args.len() {
                    return Err(SyntaxError::Arity {
                        pos,
                        symbol: name,
                        expected,
                        found: args.len(),
                    });
                }
                Ok(Formula::app(op, args))
            }
            Some((_, Tok::RParen)) => Err(SyntaxError::Unbalanced { pos }),
            other => Err(SyntaxError::Unexpected {
                pos,
                found: describe(other.as_ref()),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Enumeration

/// All formulas over variables `X1..Xvars`, grouped by exact depth `0..=max_depth`.
/// Returns `None` if more than `cap` formulas would be produced.
pub fn formulas_by_depth(
    sig: &Signature,
    max_depth: usize,
    vars: u32,
    cap: usize,
) -> Option<Vec<Vec<Formula>>> {
    let mut levels: Vec<Vec<Formula>> = Vec::new();
    let mut level0: Vec<Formula> = (1..=vars).map(Formula::Var).collect();
    level0.extend(sig.ops().filter(|&op| sig.arity(op) == 0).map(Formula::constant));
    let mut total = level0.len();
    if total > cap {
        return None;
    }
    levels.push(level0);
    for d in 1..=max_depth {
        let below: Vec<Formula> = levels.iter().flatten().cloned().collect();
        let mut level = Vec::new();
        for op in sig.ops() {
            let k = sig.arity(op);
            if k == 0 {
                continue;
            }
            // tuples over `below` with at least one component of depth d-1
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| below[i].depth() == d - 1) {
                    level.push(Formula::app(op, idx.iter().map(|&i| below[i].clone()).collect()));
                    total += 1;
                    if total > cap {
                        return None;
                    }
                }
                if !crate::util::next_tuple(&mut idx, below.len()) {
                    break;
                }
            }
        }
        levels.push(level);
    }
    Some(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new("t", &[("neg", 1), ("and", 2), ("or", 2), ("imp", 2), ("bot", 0)]).unwrap()
    }

    fn p(s: &str) -> Formula {
        parse_formula(s, &sig()).unwrap()
    }

    #[test]
    fn parse_prefix_and_sugar_agree() {
        assert_eq!(p("X1 -> (X2 -> X1)"), p("imp(X1, imp(X2, X1))"));
        assert_eq!(p("X1 -> X2 -> X1"), p("imp(X1, imp(X2, X1))"));
        assert_eq!(p("!X1 & X2 | X3 -> X1"), p("imp(or(and(neg(X1), X2), X3), X1)"));
        assert_eq!(p("X1 & X2 & X3"), p("and(and(X1, X2), X3)"));
        let f = p("imp(X1, X1)");
        assert_eq!(f, Formula::app(3, vec![Formula::Var(1), Formula::Var(1)]));
        assert_eq!(p("bot"), Formula::constant(4));
        assert_eq!(p("bot -> X1"), p("imp(bot, X1)"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let s = Signature::new("n", &[("neg", 1)]).unwrap();
        assert_eq!(
            parse_formula("neg(X1, X2)", &s),
            Err(SyntaxError::Arity {
                pos: 0,
                symbol: "neg".into(),
                expected: 1,
                found: 2
            })
        );
        assert!(matches!(parse_formula("foo(X1)", &s), Err(SyntaxError::UnknownSymbol { pos: 0, .. })));
        assert!(matches!(parse_formula("neg(X1", &s), Err(SyntaxError::Unbalanced { pos: 3 })));
        assert!(matches!(parse_formula("neg(X1))", &s), Err(SyntaxError::Unbalanced { pos: 7 })));
        assert!(matches!(parse_formula("neg(X1) $", &s), Err(SyntaxError::Lex { pos: 8, ch: '$' })));
        assert!(matches!(parse_formula("X0", &s), Err(SyntaxError::ZeroVariable { pos: 0 })));
        assert!(matches!(parse_formula("", &s), Err(SyntaxError::Unexpected { .. })));
    }

    #[test]
    fn sim_is_infix_and_not_associative() {
        let s = Signature::new("k", &[("next", 1), ("sim", 2)]).unwrap();
        let f = parse_formula("next(next(X1)) ~ X1", &s).unwrap();
        assert_eq!(f.to_string_with(&s), "sim(next(next(X1)), X1)");
        assert!(parse_formula("X1 ~ X2 ~ X3", &s).is_err());
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "imp(neg(neg(X1)), X1)",
            "or(imp(X1, X2), imp(X2, X1))",
            "and(X3, bot)",
            "X7",
        ] {
            let f = p(text);
            assert_eq!(f.display(&sig()).to_string(), text);
            assert_eq!(p(&f.display_sugared(&sig()).to_string()), f);
        }
        assert_eq!(p("(X1 -> X2) -> X1").display_sugared(&sig()).to_string(), "(X1 -> X2) -> X1");
        assert_eq!(p("X1 -> X2 -> X1").display_sugared(&sig()).to_string(), "X1 -> X2 -> X1");
    }

    #[test]
    fn depth_and_vars() {
        assert_eq!(Formula::Var(1).depth(), 0);
        assert_eq!(p("imp(X1, X2)").depth(), 1);
        assert_eq!(p("imp(neg(neg(X1)), X1)").depth(), 3);
        assert_eq!(p("bot").depth(), 0);
        assert_eq!(p("imp(X1, imp(X2, X1))").vars(), BTreeSet::from([1, 2]));
        assert!(p("bot").vars().is_empty());
        assert_eq!(p("neg(X3)").vars(), BTreeSet::from([3]));
    }

    #[test]
    fn substitution_is_simultaneous() {
        let s = Substitution::from_iter([(1, p("neg(X2)"))]);
        assert_eq!(p("imp(X1, X1)").substitute(&s), p("imp(neg(X2), neg(X2))"));
        assert_eq!(Formula::Var(1).substitute(&Substitution::new()), Formula::Var(1));
        let swap = Substitution::from_iter([(1, Formula::Var(2)), (2, Formula::Var(1))]);
        assert_eq!(p("imp(X1, X2)").substitute(&swap), p("imp(X2, X1)"));
    }

    #[test]
    fn matching() {
        let a = p("and(X3, X3)");
        let target = Formula::app(3, vec![a.clone(), Formula::app(0, vec![a.clone()])]);
        let s = match_formula(&p("imp(X1, X2)"), &target).unwrap();
        assert_eq!(s.get(1), Some(&a));
        assert_eq!(s.get(2), Some(&Formula::app(0, vec![a.clone()])));
        assert_eq!(match_formula(&p("imp(X1, X1)"), &p("imp(X3, X4)")), None);
        let any = p("or(X1, neg(bot))");
        assert_eq!(match_formula(&Formula::Var(1), &any).unwrap().get(1), Some(&any));
    }

    #[test]
    fn max_var_depth_examples() {
        assert_eq!(p("imp(X1, neg(X1))").max_var_depth(1), Some(2));
        assert_eq!(Formula::Var(1).max_var_depth(1), Some(0));
        assert_eq!(p("neg(X2)").max_var_depth(1), None);
    }

    #[test]
    fn max_var_depth_identity_small_brute_force() {
        let f = p("imp(X1, neg(X1))");
        for g in ["X2", "neg(X2)", "neg(neg(X2))", "neg(neg(neg(X2)))", "imp(bot, neg(neg(X1)))"] {
            let g = p(g);
            let lhs = f.substitute(&Substitution::from_iter([(1, g.clone())])).depth();
            assert_eq!(lhs, f.depth().max(2 + g.depth()));
        }
    }

    #[test]
    fn enumeration_counts() {
        let s = Signature::new("ni", &[("neg", 1), ("imp", 2)]).unwrap();
        let levels = formulas_by_depth(&s, 2, 2, usize::MAX).unwrap();
        let counts: Vec<usize> = levels.iter().map(Vec::len).collect();
        assert_eq!(counts, vec![2, 6, 66]);
        assert!(formulas_by_depth(&s, 2, 2, 50).is_none());
    }

    #[test]
    fn canonical_renaming() {
        let f = p("imp(X3, and(X1, X3))");
        assert_eq!(f.canonical_renaming(), p("imp(X1, and(X2, X1))"));
        assert!(!f.is_canonically_named());
        assert!(f.canonical_renaming().is_canonically_named());
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::new("e", &[]).is_err());
        assert!(Signature::new("d", &[("a", 1), ("a", 2)]).is_err());
        assert!(Signature::new("u", &[("Bad", 1)]).is_err());
    }
}

impl Formula {
    pub fn to_string_with(&self, sig: &Signature) -> String {
        self.display(sig).to_string()
    }
}
