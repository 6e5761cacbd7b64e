//! Line-oriented text formats for matrices, calculi and Kripke models.
//!
//! ```text
//! matrix g2 over ipc
//! values: 0 1
//! designated: 1
//! table neg: 1 0
//! table and:
//!   0 0
//!   0 1
//! ```
//!
//! ```text
//! calculus mini over impbot: imp/2 bot/0
//! axiom: imp(X2, imp(X1, X2))
//! axiom efq: imp(bot, X1)
//! rule mp: X1, imp(X1, X2) |- X2
//! ```
//!
//! ```text
//! kripke tree3 kind int
//! worlds: w1 w2 w3
//! rel: w1->w2 w1->w3
//! assign X1: w2
//! root: w1
//! ```
//!
//! `#` starts a comment. After `over`, a builtin signature may be named
//! without listing its connectives. Unnamed axioms are called `a<position>`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::calculus::{Axiom, Calculus, Rule};
use crate::kripke::{Kind, KripkeModel};
use crate::matrix::{Matrix, Value};
use crate::syntax::{builtin_signature, parse_formula, Formula, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        message: message.into(),
    })
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

/// Splits `key rest` or `key: rest`.
fn keyword(line: &str) -> (&str, &str) {
    let end = line.find(|c: char| c.is_whitespace() || c == ':').unwrap_or(line.len());
    (&line[..end], line[end..].trim_start())
}

fn parse_signature(line: usize, rest: &str) -> Result<Signature, FormatError> {
    let (name, list) = match rest.split_once(':') {
        Some((n, l)) => (n.trim(), Some(l.trim())),
        None => (rest.trim(), None),
    };
    let Some(list) = list else {
        return builtin_signature(name).map_or_else(|| err(line, format!("unknown builtin signature `{name}`")), Ok);
    };
    let mut conns = Vec::new();
    for tok in list.split_whitespace() {
        let Some((sym, ar)) = tok.split_once('/') else {
            return err(line, format!("expected symbol/arity, found `{tok}`"));
        };
        let Ok(ar) = ar.parse::<usize>() else {
            return err(line, format!("bad arity in `{tok}`"));
        };
        conns.push((sym, ar));
    }
    Signature::new(name, &conns).or_else(|e| err(line, e.to_string()))
}

fn write_signature(sig: &Signature) -> String {
    if builtin_signature(sig.name()).as_ref() == Some(sig) {
        return sig.name().to_string();
    }
    let list: Vec<String> = sig
        .connectives()
        .iter()
        .map(|c| format!("{}/{}", c.symbol, c.arity))
        .collect();
    format!("{}: {}", sig.name(), list.join(" "))
}

/// `<name> over <signature>`.
fn header(line: usize, key: &str, rest: &str) -> Result<(String, Signature), FormatError> {
    let mut parts = rest.splitn(3, char::is_whitespace);
    match (parts.next(), parts.next(), parts.next()) {
        (Some(name), Some("over"), Some(sig)) if !name.is_empty() => Ok((name.to_string(), parse_signature(line, sig)?)),
        _ => err(line, format!("expected `{key} <name> over <signature>`")),
    }
}

/// Splits at commas outside parentheses.
fn split_top(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn formula(line: usize, text: &str, sig: &Signature) -> Result<Formula, FormatError> {
    parse_formula(text.trim(), sig).or_else(|e| err(line, format!("{e} in `{}`", text.trim())))
}

// ---------------------------------------------------------------------------
// Matrices

pub fn parse_matrix(text: &str) -> Result<Matrix, FormatError> {
    let ls = lines(text);
    let mut head: Option<(String, Signature)> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut designated: Option<(usize, Vec<String>)> = None;
    // table symbol, its line, its tokens
    let mut tables: Vec<(String, usize, Vec<String>)> = Vec::new();
    for &(no, l) in &ls {
        let (key, rest) = keyword(l);
        match key {
            "matrix" if head.is_none() => head = Some(header(no, key, rest)?),
            "values" => labels = Some(rest.trim_start_matches(':').split_whitespace().map(String::from).collect()),
            "designated" => {
                designated = Some((no, rest.trim_start_matches(':').split_whitespace().map(String::from).collect()))
            }
            "table" => {
                let Some((sym, entries)) = rest.split_once(':') else {
                    return err(no, "expected `table <symbol>: entries`");
                };
                tables.push((
                    sym.trim().to_string(),
                    no,
                    entries.split_whitespace().map(String::from).collect(),
                ));
            }
            _ => match tables.last_mut() {
                Some(t) => t.2.extend(l.split_whitespace().map(String::from)),
                None => return err(no, format!("unexpected `{l}`")),
            },
        }
    }
    let last = ls.last().map_or(1, |l| l.0);
    let Some((name, sig)) = head else { return err(1, "missing `matrix <name> over <signature>` line") };
    let Some(labels) = labels else { return err(last, "missing values line") };
    let index: BTreeMap<&str, Value> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as Value)).collect();
    let m = labels.len();
    let mut des = vec![false; m];
    if let Some((no, ds)) = &designated {
        for d in ds {
            match index.get(d.as_str()) {
                Some(&v) => des[v as usize] = true,
                None => return err(*no, format!("unknown value `{d}`")),
            }
        }
    }
    let mut out: Vec<Option<Vec<Value>>> = vec![None; sig.len()];
    for (sym, no, toks) in &tables {
        let Some(op) = sig.lookup(sym) else {
            return err(*no, format!("`{sym}` is not in the signature"));
        };
        if out[op as usize].is_some() {
            return err(*no, format!("second table for `{sym}`"));
        }
        let expected = m.pow(sig.arity(op) as u32);
        if toks.len() != expected {
            return err(*no, format!("table `{sym}` has {} entries, expected {expected}", toks.len()));
        }
        let mut t = Vec::with_capacity(expected);
        for tok in toks {
            match index.get(tok.as_str()) {
                Some(&v) => t.push(v),
                None => return err(*no, format!("unknown value `{tok}` in table `{sym}`")),
            }
        }
        out[op as usize] = Some(t);
    }
    let mut tabs = Vec::with_capacity(sig.len());
    for (op, t) in out.into_iter().enumerate() {
        match t {
            Some(t) => tabs.push(t),
            None => return err(last, format!("missing table for `{}`", sig.symbol(op as u16))),
        }
    }
    Matrix::new(name, sig, labels, des, tabs).or_else(|e| err(last, e.to_string()))
}

pub fn write_matrix(m: &Matrix) -> String {
    let mut s = format!("matrix {} over {}\n", m.name(), write_signature(m.sig()));
    s += &format!("values: {}\n", m.labels().join(" "));
    let des: Vec<&str> = m.designated_values().into_iter().map(|v| m.label(v)).collect();
    s += &format!("designated: {}\n", des.join(" ")).replace(": \n", ":\n");
    let n = m.size();
    for op in m.sig().ops() {
        let row = |t: &[Value]| t.iter().map(|&v| m.label(v)).collect::<Vec<_>>().join(" ");
        let t = m.table(op);
        if m.sig().arity(op) <= 1 {
            s += &format!("table {}: {}\n", m.sig().symbol(op), row(t));
        } else {
            s += &format!("table {}:\n", m.sig().symbol(op));
            for chunk in t.chunks(n) {
                s += &format!("  {}\n", row(chunk));
            }
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Calculi

pub fn parse_calculus(text: &str) -> Result<Calculus, FormatError> {
    let ls = lines(text);
    let mut head: Option<(String, Signature)> = None;
    let mut axioms = Vec::new();
    let mut rules = Vec::new();
    for &(no, l) in &ls {
        let (key, rest) = keyword(l);
        match key {
            "calculus" if head.is_none() => head = Some(header(no, key, rest)?),
            "axiom" | "rule" => {
                let Some((_, sig)) = &head else { return err(no, "the `calculus` line must come first") };
                let Some((label, body)) = rest.split_once(':') else {
                    return err(no, format!("expected `{key} <name>: ...`"));
                };
                let mut label = label.trim().to_string();
                if key == "axiom" {
                    if label.is_empty() {
                        label = format!("a{}", axioms.len() + 1);
                    }
                    axioms.push(Axiom {
                        name: label,
                        formula: formula(no, body, sig)?,
                    });
                } else {
                    let Some((prem, concl)) = body.rsplit_once("|-") else {
                        return err(no, "a rule needs `premises |- conclusion`");
                    };
                    let premises = split_top(prem)
                        .into_iter()
                        .map(|p| formula(no, p, sig))
                        .collect::<Result<Vec<_>, _>>()?;
                    rules.push(Rule {
                        name: label,
                        premises,
                        conclusion: formula(no, concl, sig)?,
                    });
                }
            }
            _ => return err(no, format!("unexpected `{l}`")),
        }
    }
    let last = ls.last().map_or(1, |l| l.0);
    let Some((name, sig)) = head else { return err(1, "missing `calculus <name> over <signature>` line") };
    Calculus::new(name, sig, axioms, rules).or_else(|e| err(last, e.to_string()))
}

pub fn write_calculus(c: &Calculus) -> String {
    let sig = c.sig();
    let mut s = format!("calculus {} over {}\n", c.name(), write_signature(sig));
    for a in c.axioms() {
        s += &format!("axiom {}: {}\n", a.name, a.formula.display(sig));
    }
    for r in c.rules() {
        let prem: Vec<String> = r.premises.iter().map(|p| p.display(sig).to_string()).collect();
        s += &format!("rule {}: {} |- {}\n", r.name, prem.join(" , "), r.conclusion.display(sig));
    }
    s
}

// ---------------------------------------------------------------------------
// Kripke models

fn parse_var(line: usize, tok: &str) -> Result<u32, FormatError> {
    match tok.strip_prefix('X').and_then(|d| d.parse::<u32>().ok()) {
        Some(x) if x >= 1 => Ok(x),
        _ => err(line, format!("expected a variable, found `{tok}`")),
    }
}

pub fn parse_kripke(text: &str) -> Result<KripkeModel, FormatError> {
    let ls = lines(text);
    let mut head: Option<(String, Kind)> = None;
    let mut worlds: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut assign = Vec::new();
    let mut root = None;
    for &(no, l) in &ls {
        let (key, rest) = keyword(l);
        let rest = rest.trim_start_matches(':').trim();
        match key {
            "kripke" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let kind = match toks.as_slice() {
                    [_, "kind", "modal"] => Kind::Modal,
                    [_, "kind", "int"] => Kind::Intuitionistic,
                    _ => return err(no, "expected `kripke <name> kind modal|int`"),
                };
                head = Some((toks[0].to_string(), kind));
            }
            "worlds" => worlds.extend(rest.split_whitespace().map(String::from)),
            "rel" => {
                for tok in rest.split_whitespace() {
                    let Some((a, b)) = tok.split_once("->") else {
                        return err(no, format!("expected `a->b`, found `{tok}`"));
                    };
                    edges.push((a.to_string(), b.to_string()));
                }
            }
            "assign" => {
                let (var, ws) = rest.split_once(':').unwrap_or((rest, ""));
                assign.push((
                    parse_var(no, var.trim())?,
                    ws.split_whitespace().map(String::from).collect::<Vec<_>>(),
                ));
            }
            "root" => root = Some(rest.to_string()),
            _ => return err(no, format!("unexpected `{l}`")),
        }
    }
    let last = ls.last().map_or(1, |l| l.0);
    let Some((name, kind)) = head else { return err(1, "missing `kripke <name> kind ...` line") };
    KripkeModel::new(name, kind, worlds, &edges, &assign, root).or_else(|e| err(last, e.to_string()))
}

pub fn write_kripke(k: &KripkeModel) -> String {
    let kind = match k.kind() {
        Kind::Modal => "modal",
        Kind::Intuitionistic => "int",
    };
    let w = k.worlds();
    let mut s = format!("kripke {} kind {}\n", k.name(), kind);
    s += &format!("worlds: {}\n", w.join(" "));
    let edges: Vec<String> = k.edges().iter().map(|&(a, b)| format!("{}->{}", w[a], w[b])).collect();
    s += &format!("rel: {}\n", edges.join(" ")).replace(": \n", ":\n");
    for (x, bits) in k.assignments() {
        let ws: Vec<&str> = bits
            .iter()
            .zip(w)
            .filter(|(&b, _)| b)
            .map(|(_, n)| n.as_str())
            .collect();
        s += &format!("assign X{}: {}\n", x, ws.join(" ")).replace(": \n", ":\n");
    }
    if let (Kind::Intuitionistic, Some(r)) = (k.kind(), k.root()) {
        s += &format!("root: {}\n", w[r]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{impbot, ipc, kcalc, neq, triangle};
    use crate::kripke::tree3;
    use crate::matrix::{bernays, godel, godel_with_top};

    #[test]
    fn matrices_round_trip() {
        for m in [godel(3).unwrap(), bernays(), godel_with_top(2).unwrap()] {
            let text = write_matrix(&m);
            let back = parse_matrix(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(write_matrix(&back), text);
        }
    }

    #[test]
    fn calculi_round_trip() {
        for c in [ipc(), triangle(), neq(), kcalc(), impbot()] {
            let text = write_calculus(&c);
            assert_eq!(parse_calculus(&text).unwrap(), c);
        }
    }

    #[test]
    fn kripke_round_trip() {
        let k = tree3();
        let text = write_kripke(&k);
        assert_eq!(parse_kripke(&text).unwrap(), k);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_matrix("matrix x over ipc\n\nvalues: 0 1\ndesignated: 2\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_calculus("calculus c over ipc\n# comment\naxiom a: neg(X1, X2)\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_calculus("calculus c\naxiom: X1\n").unwrap_err();
        assert_eq!(e.line, 1);
    }

    #[test]
    fn unnamed_axioms_and_sugar() {
        let text = "calculus mini over impbot: imp/2 bot/0\naxiom: X2 -> X1 -> X2\naxiom efq: imp(bot, X1)\nrule mp: X1 , imp(X1, X2) |- X2\n";
        let c = parse_calculus(text).unwrap();
        assert_eq!(c.axioms()[0].name, "a1");
        assert_eq!(c.axioms()[1].name, "efq");
        assert_eq!(c.rules()[0].premises.len(), 2);
        assert_eq!(parse_calculus(&write_calculus(&c)).unwrap(), c);
    }
}
