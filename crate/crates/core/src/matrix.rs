//! Finite-valued matrices and the constructions on them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{formulas_by_depth, Formula, OpId, Signature};
use crate::util::{next_tuple, table_index};

/// A truth value, as an index into the value list of its matrix.
pub type Value = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("signature mismatch: `{left}` vs `{right}`")]
    SignatureMismatch { left: String, right: String },
    #[error("variable X{0} is not assigned")]
    Unassigned(u32),
    #[error("value set too large: {required} values required, cap is {cap}")]
    TooLarge { required: usize, cap: usize },
    #[error("invalid matrix: {0}")]
    Invalid(String),
    #[error("`{formula}` is a tautology of the matrix")]
    Tautology { formula: String },
    #[error("connective `{0}` has no Gödel interpretation")]
    Unsupported(String),
}

/// Anything with finitely many values, a designated subset and an operation
/// per connective. [`Matrix`] stores its tables; [`LindenbaumFragment`]
/// computes them on demand.
pub trait Algebra {
    fn signature(&self) -> &Signature;
    fn size(&self) -> usize;
    fn is_designated(&self, v: Value) -> bool;
    fn apply(&self, op: OpId, args: &[Value]) -> Value;
}

/// An assignment of values to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Valuation(pub BTreeMap<u32, Value>);

impl Valuation {
    pub fn new() -> Self {
        Valuation(BTreeMap::new())
    }

    pub fn get(&self, x: u32) -> Option<Value> {
        self.0.get(&x).copied()
    }

    pub fn set(&mut self, x: u32, v: Value) {
        self.0.insert(x, v);
    }
}

impl FromIterator<(u32, Value)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (u32, Value)>>(iter: I) -> Self {
        Valuation(iter.into_iter().collect())
    }
}

/// A formula flattened to postfix code over variable slots, for repeated
/// evaluation.
#[derive(Debug, Clone)]
pub struct Compiled {
    vars: Vec<u32>,
    code: Vec<Instr>,
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Slot(usize),
    Op(OpId, usize),
}

impl Compiled {
    pub fn new(f: &Formula) -> Self {
        let vars: Vec<u32> = f.vars().into_iter().collect();
        let mut code = Vec::new();
        Self::emit(f, &vars, &mut code);
        Compiled { vars, code }
    }

    /// Compiles against a fixed variable list, which must cover `vars(f)`.
    pub fn with_vars(f: &Formula, vars: &[u32]) -> Self {
        let mut code = Vec::new();
        Self::emit(f, vars, &mut code);
        Compiled {
            vars: vars.to_vec(),
            code,
        }
    }

    fn emit(f: &Formula, vars: &[u32], code: &mut Vec<Instr>) {
        match f {
            Formula::Var(x) => code.push(Instr::Slot(
                vars.iter().position(|v| v == x).expect("variable list covers formula"),
            )),
            Formula::App(op, args) => {
                for a in args.iter() {
                    Self::emit(a, vars, code);
                }
                code.push(Instr::Op(*op, args.len()));
            }
        }
    }

    pub fn vars(&self) -> &[u32] {
        &self.vars
    }

    /// Evaluates with `slots[i]` the value of `vars()[i]`.
    pub fn eval<A: Algebra + ?Sized>(&self, alg: &A, slots: &[Value], stack: &mut Vec<Value>) -> Value {
        stack.clear();
        for ins in &self.code {
            match *ins {
                Instr::Slot(i) => stack.push(slots[i]),
                Instr::Op(op, k) => {
                    let base = stack.len() - k;
                    let v = alg.apply(op, &stack[base..]);
                    stack.truncate(base);
                    stack.push(v);
                }
            }
        }
        stack[0]
    }
}

pub fn evaluate_in<A: Algebra + ?Sized>(alg: &A, f: &Formula, v: &Valuation) -> Result<Value, MatrixError> {
    match f {
        Formula::Var(x) => v.get(*x).ok_or(MatrixError::Unassigned(*x)),
        Formula::App(op, args) => {
            let vals = args
                .iter()
                .map(|a| evaluate_in(alg, a, v))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(alg.apply(*op, &vals))
        }
    }
}

/// The lexicographically first falsifying valuation (variables in index
/// order, values in value order), or `None` for a tautology.
pub fn countermodel_in<A: Algebra + ?Sized>(alg: &A, f: &Formula) -> Option<Valuation> {
    let c = Compiled::new(f);
    let m = alg.size();
    let mut idx = vec![0usize; c.vars.len()];
    let mut slots = vec![0 as Value; c.vars.len()];
    let mut stack = Vec::new();
    loop {
        for (s, &i) in slots.iter_mut().zip(&idx) {
            *s = i as Value;
        }
        if !alg.is_designated(c.eval(alg, &slots, &mut stack)) {
            return Some(c.vars.iter().copied().zip(slots.iter().copied()).collect());
        }
        if !next_tuple(&mut idx, m) {
            return None;
        }
    }
}

pub fn is_tautology_in<A: Algebra + ?Sized>(alg: &A, f: &Formula) -> bool {
    countermodel_in(alg, f).is_none()
}

/// A finite matrix: values `0..size`, a designated subset and one flat
/// row-major table per connective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    name: String,
    sig: Signature,
    labels: Vec<String>,
    designated: Vec<bool>,
    tables: Vec<Vec<Value>>,
}

impl Algebra for Matrix {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn size(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    fn is_designated(&self, v: Value) -> bool {
        self.designated[v as usize]
    }

    #[inline]
    fn apply(&self, op: OpId, args: &[Value]) -> Value {
        self.tables[op as usize][table_index(args, self.labels.len())]
    }
}

impl Matrix {
    pub fn new<S: Into<String>>(
        name: S,
        sig: Signature,
        labels: Vec<String>,
        designated: Vec<bool>,
        tables: Vec<Vec<Value>>,
    ) -> Result<Self, MatrixError> {
        let m = labels.len();
        if m == 0 {
            return Err(MatrixError::Invalid("a matrix needs at least one value".into()));
        }
        if designated.len() != m {
            return Err(MatrixError::Invalid("designation vector has the wrong length".into()));
        }
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != m {
            return Err(MatrixError::Invalid("value labels must be distinct".into()));
        }
        if tables.len() != sig.len() {
            return Err(MatrixError::Invalid(format!(
                "{} tables for {} connectives",
                tables.len(),
                sig.len()
            )));
        }
        for op in sig.ops() {
            let expected = m.checked_pow(sig.arity(op) as u32).ok_or(MatrixError::TooLarge {
                required: usize::MAX,
                cap: usize::MAX,
            })?;
            let t = &tables[op as usize];
            if t.len() != expected {
                return Err(MatrixError::Invalid(format!(
                    "table `{}` has {} entries, expected {}",
                    sig.symbol(op),
                    t.len(),
                    expected
                )));
            }
            if t.iter().any(|&v| v as usize >= m) {
                return Err(MatrixError::Invalid(format!("table `{}` leaves the value set", sig.symbol(op))));
            }
        }
        Ok(Matrix {
            name: name.into(),
            sig,
            labels,
            designated,
            tables,
        })
    }

    /// Builds a matrix from a function computing each table entry.
    pub fn from_fn<S: Into<String>>(
        name: S,
        sig: Signature,
        labels: Vec<String>,
        designated: Vec<bool>,
        mut entry: impl FnMut(OpId, &[Value]) -> Value,
    ) -> Result<Self, MatrixError> {
        let m = labels.len();
        let mut tables = Vec::with_capacity(sig.len());
        for op in sig.ops() {
            let k = sig.arity(op);
            let mut idx = vec![0usize; k];
            let mut args = vec![0 as Value; k];
            let mut t = Vec::with_capacity(m.pow(k as u32));
            loop {
                for (a, &i) in args.iter_mut().zip(&idx) {
                    *a = i as Value;
                }
                t.push(entry(op, &args));
                if !next_tuple(&mut idx, m) {
                    break;
                }
            }
            tables.push(t);
        }
        Matrix::new(name, sig, labels, designated, tables)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name<S: Into<String>>(mut self, name: S) -> Self {
        self.name = name.into();
        self
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: Value) -> &str {
        &self.labels[v as usize]
    }

    pub fn value_of(&self, label: &str) -> Option<Value> {
        self.labels.iter().position(|l| l == label).map(|i| i as Value)
    }

    pub fn designation(&self) -> &[bool] {
        &self.designated
    }

    pub fn designated_values(&self) -> Vec<Value> {
        (0..self.size() as Value).filter(|&v| self.designated[v as usize]).collect()
    }

    pub fn is_designated(&self, v: Value) -> bool {
        self.designated[v as usize]
    }

    pub fn table(&self, op: OpId) -> &[Value] {
        &self.tables[op as usize]
    }

    pub fn tables(&self) -> &[Vec<Value>] {
        &self.tables
    }

    pub fn apply(&self, op: OpId, args: &[Value]) -> Value {
        Algebra::apply(self, op, args)
    }

    pub fn evaluate(&self, f: &Formula, v: &Valuation) -> Result<Value, MatrixError> {
        evaluate_in(self, f, v)
    }

    pub fn is_tautology(&self, f: &Formula) -> bool {
        is_tautology_in(self, f)
    }

    pub fn countermodel(&self, f: &Formula) -> Option<Valuation> {
        countermodel_in(self, f)
    }

    /// `true` iff every value is designated, i.e. every formula is a tautology.
    pub fn is_trivial(&self) -> bool {
        self.designated.iter().all(|&d| d)
    }

    pub fn check_signature(&self, sig: &Signature) -> Result<(), MatrixError> {
        if &self.sig == sig {
            Ok(())
        } else {
            Err(MatrixError::SignatureMismatch {
                left: self.sig.header(),
                right: sig.header(),
            })
        }
    }

    /// The isomorphic copy in which old value `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Matrix {
        let m = self.size();
        assert_eq!(perm.len(), m);
        let mut inv = vec![0usize; m];
        for (v, &p) in perm.iter().enumerate() {
            inv[p] = v;
        }
        let labels = (0..m).map(|p| self.labels[inv[p]].clone()).collect();
        let designated = (0..m).map(|p| self.designated[inv[p]]).collect();
        Matrix::from_fn(self.name.clone(), self.sig.clone(), labels, designated, |op, args| {
            let old: Vec<Value> = args.iter().map(|&a| inv[a as usize] as Value).collect();
            perm[self.apply(op, &old) as usize] as Value
        })
        .expect("permutation preserves well-formedness")
    }
}

// ---------------------------------------------------------------------------
// Named matrices

fn numeric_labels(m: usize) -> Vec<String> {
    (0..m).map(|v| v.to_string()).collect()
}

/// The standard connectives {neg, and, or, imp}.
pub fn ipc_signature() -> Signature {
    crate::syntax::builtin_signature("ipc").unwrap()
}

/// The m-valued Gödel matrix: values `0..m`, `m-1` the only designated value,
/// `and` = min, `or` = max, `imp(v, w)` = `m-1` if `v <= w` else `w`,
/// `neg(v)` = `m-1` if `v = 0` else `0`.
pub fn godel(m: usize) -> Result<Matrix, MatrixError> {
    godel_over(m, &ipc_signature())
}

/// Gödel semantics for any signature drawn from neg/and/or/imp/bot/top.
pub fn godel_over(m: usize, sig: &Signature) -> Result<Matrix, MatrixError> {
    if m < 2 {
        return Err(MatrixError::Invalid(format!("Gödel matrices need at least 2 values, got {m}")));
    }
    for c in sig.connectives() {
        let ok = matches!(
            (c.symbol.as_str(), c.arity),
            ("neg", 1) | ("and", 2) | ("or", 2) | ("imp", 2) | ("bot", 0) | ("top", 0)
        );
        if !ok {
            return Err(MatrixError::Unsupported(format!("{}/{}", c.symbol, c.arity)));
        }
    }
    let top = (m - 1) as Value;
    let designated = (0..m).map(|v| v == m - 1).collect();
    Matrix::from_fn(format!("g{m}"), sig.clone(), numeric_labels(m), designated, |op, a| {
        match sig.symbol(op) {
            "neg" => {
                if a[0] == 0 {
                    top
                } else {
                    0
                }
            }
            "and" => a[0].min(a[1]),
            "or" => a[0].max(a[1]),
            "imp" => {
                if a[0] <= a[1] {
                    top
                } else {
                    a[1]
                }
            }
            "bot" => 0,
            "top" => top,
            _ => unreachable!(),
        }
    })
}

/// Two-valued classical tables except that negation is constantly true.
pub fn bernays() -> Matrix {
    let sig = ipc_signature();
    Matrix::from_fn("bernays", sig.clone(), numeric_labels(2), vec![false, true], |op, a| {
        match sig.symbol(op) {
            "neg" => 1,
            "and" => a[0] & a[1],
            "or" => a[0] | a[1],
            "imp" => (1 - a[0]) | a[1],
            _ => unreachable!(),
        }
    })
    .unwrap()
}

/// `godel(m)` with an extra absorbing value `T`, which is designated.
pub fn godel_with_top(m: usize) -> Result<Matrix, MatrixError> {
    let g = godel(m)?;
    let top = m as Value;
    let mut labels = numeric_labels(m);
    labels.push("T".into());
    let designated = (0..=m).map(|v| v >= m - 1).collect();
    Matrix::from_fn(format!("g{m}top"), g.sig.clone(), labels, designated, |op, a| {
        if a.contains(&top) {
            top
        } else {
            g.apply(op, a)
        }
    })
}

// ---------------------------------------------------------------------------
// Constructions

/// The direct product: pairs of values, designated iff both components are,
/// tables componentwise. Pair `(a, b)` has index `a * |M2| + b`.
pub fn product(m1: &Matrix, m2: &Matrix) -> Result<Matrix, MatrixError> {
    m1.check_signature(&m2.sig)?;
    let n2 = m2.size();
    let n = m1
        .size()
        .checked_mul(n2)
        .ok_or(MatrixError::TooLarge {
            required: usize::MAX,
            cap: u32::MAX as usize,
        })?;
    let mut labels = Vec::with_capacity(n);
    let mut designated = Vec::with_capacity(n);
    for a in 0..m1.size() {
        for b in 0..n2 {
            labels.push(format!("({},{})", m1.labels[a], m2.labels[b]));
            designated.push(m1.designated[a] && m2.designated[b]);
        }
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    Matrix::from_fn(
        format!("{}x{}", m1.name, m2.name),
        m1.sig.clone(),
        labels,
        designated,
        |op, args| {
            left.clear();
            right.clear();
            for &p in args {
                left.push(p / n2 as Value);
                right.push(p % n2 as Value);
            }
            m1.apply(op, &left) * n2 as Value + m2.apply(op, &right)
        },
    )
}

/// `ξ` for a single formula: distinct subformulas plus one.
pub fn xi(f: &Formula) -> usize {
    f.subformulas().len() + 1
}

/// Shrinks `m` to the values taken by the subformulas of `f` under its first
/// countermodel, plus an absorbing designated value `T`. The result still
/// falsifies `f` and keeps every tautology of `m`.
pub fn phi_reduce_single(m: &Matrix, f: &Formula) -> Result<Matrix, MatrixError> {
    let v = m.countermodel(f).ok_or_else(|| MatrixError::Tautology {
        formula: f.display(&m.sig).to_string(),
    })?;
    let subs = f.subformulas();
    let vals: Vec<Value> = subs
        .iter()
        .map(|b| m.evaluate(b, &v).expect("countermodel covers the formula"))
        .collect();
    // carrier: distinct subformula values in the order of `m`, then T
    let carrier: Vec<Value> = vals.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let top = carrier.len() as Value;
    let index: HashMap<Value, Value> = carrier.iter().enumerate().map(|(i, &c)| (c, i as Value)).collect();
    // which argument tuples are realised by some subformula, per connective
    let mut realised: HashMap<(OpId, Vec<Value>), Value> = HashMap::new();
    for (b, &t) in subs.iter().zip(&vals) {
        if let Formula::App(op, args) = b {
            let arg_vals: Vec<Value> = args
                .iter()
                .map(|a| index[&vals[subs.iter().position(|s| s == a).unwrap()]])
                .collect();
            realised.insert((*op, arg_vals), index[&t]);
        }
    }
    let mut labels: Vec<String> = carrier.iter().map(|&c| m.labels[c as usize].clone()).collect();
    let mut top_label = "T".to_string();
    while labels.contains(&top_label) {
        top_label.push('\'');
    }
    labels.push(top_label);
    let mut designated: Vec<bool> = carrier.iter().map(|&c| m.designated[c as usize]).collect();
    designated.push(true);
    Matrix::from_fn(format!("phi({})", m.name), m.sig.clone(), labels, designated, |op, args| {
        realised.get(&(op, args.to_vec())).copied().unwrap_or(top)
    })
}

/// `Φ(M, fs)`: the product of the single-formula reductions.
pub fn phi_reduce(m: &Matrix, fs: &[Formula]) -> Result<Matrix, MatrixError> {
    let (first, rest) = fs
        .split_first()
        .ok_or_else(|| MatrixError::Invalid("phi_reduce needs at least one formula".into()))?;
    let mut acc = phi_reduce_single(m, first)?;
    for f in rest {
        acc = product(&acc, &phi_reduce_single(m, f)?)?;
    }
    Ok(acc)
}

/// Searches for an injective map `h` from the values of `small` into `big`
/// that commutes with every table and satisfies `h(v)` designated iff `v`
/// designated. Such a map shows `Taut(big) ⊆ Taut(small)`.
pub fn find_embedding(small: &Matrix, big: &Matrix) -> Option<Vec<Value>> {
    if small.sig != big.sig || small.size() > big.size() {
        return None;
    }
    let mut h: Vec<Option<Value>> = vec![None; small.size()];
    let mut used = vec![false; big.size()];
    // constants are forced
    for op in small.sig.ops().filter(|&op| small.sig.arity(op) == 0) {
        let s = small.apply(op, &[]);
        let b = big.apply(op, &[]);
        if !assign(small, big, &mut h, &mut used, s, b) {
            return None;
        }
    }
    if !propagate(small, big, &mut h, &mut used) {
        return None;
    }
    if search(small, big, &mut h, &mut used) {
        Some(h.into_iter().map(|x| x.unwrap()).collect())
    } else {
        None
    }
}

fn assign(small: &Matrix, big: &Matrix, h: &mut [Option<Value>], used: &mut [bool], s: Value, b: Value) -> bool {
    match h[s as usize] {
        Some(x) => x == b,
        None => {
            if used[b as usize] || small.is_designated(s) != big.is_designated(b) {
                return false;
            }
            h[s as usize] = Some(b);
            used[b as usize] = true;
            true
        }
    }
}

/// Forces images of table entries whose arguments are all mapped.
fn propagate(small: &Matrix, big: &Matrix, h: &mut [Option<Value>], used: &mut [bool]) -> bool {
    let m = small.size();
    loop {
        let mut changed = false;
        for op in small.sig.ops() {
            let k = small.sig.arity(op);
            if k == 0 {
                continue;
            }
            let mapped: Vec<Value> = (0..m as Value).filter(|&v| h[v as usize].is_some()).collect();
            if mapped.is_empty() {
                continue;
            }
            let mut idx = vec![0usize; k];
            let mut args = vec![0 as Value; k];
            let mut bargs = vec![0 as Value; k];
            loop {
                for j in 0..k {
                    args[j] = mapped[idx[j]];
                    bargs[j] = h[args[j] as usize].unwrap();
                }
                let s = small.apply(op, &args);
                let b = big.apply(op, &bargs);
                let was = h[s as usize].is_some();
                if !assign(small, big, h, used, s, b) {
                    return false;
                }
                changed |= !was;
                if !next_tuple(&mut idx, mapped.len()) {
                    break;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(small: &Matrix, big: &Matrix, h: &mut Vec<Option<Value>>, used: &mut Vec<bool>) -> bool {
    let Some(s) = h.iter().position(Option::is_none) else {
        return true;
    };
    for b in 0..big.size() as Value {
        if used[b as usize] || small.is_designated(s as Value) != big.is_designated(b) {
            continue;
        }
        let saved_h = h.clone();
        let saved_used = used.clone();
        h[s] = Some(b);
        used[b as usize] = true;
        if propagate(small, big, h, used) && search(small, big, h, used) {
            return true;
        }
        *h = saved_h;
        *used = saved_used;
    }
    false
}

/// Checks the embedding conditions directly.
pub fn is_embedding(small: &Matrix, big: &Matrix, h: &[Value]) -> bool {
    if small.sig != big.sig || h.len() != small.size() {
        return false;
    }
    let distinct: BTreeSet<&Value> = h.iter().collect();
    if distinct.len() != h.len() || h.iter().any(|&b| b as usize >= big.size()) {
        return false;
    }
    if (0..small.size()).any(|v| small.designated[v] != big.designated[h[v] as usize]) {
        return false;
    }
    small.sig.ops().all(|op| {
        let k = small.sig.arity(op);
        let mut idx = vec![0usize; k];
        loop {
            let args: Vec<Value> = idx.iter().map(|&i| i as Value).collect();
            let bargs: Vec<Value> = args.iter().map(|&a| h[a as usize]).collect();
            if h[small.apply(op, &args) as usize] != big.apply(op, &bargs) {
                return false;
            }
            if !next_tuple(&mut idx, small.size()) {
                return true;
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Lindenbaum fragments

/// The matrix whose values are the formulas of depth at most `depth` over
/// `X1..Xvars`, plus an absorbing designated value. Operations build the
/// formula when it stays inside the fragment and return the extra value
/// otherwise; nothing is tabulated.
pub struct LindenbaumFragment {
    sig: Signature,
    depth: usize,
    formulas: Vec<Formula>,
    index: HashMap<Formula, Value>,
    designated: Vec<bool>,
}

impl LindenbaumFragment {
    pub fn new(
        sig: &Signature,
        depth: usize,
        vars: u32,
        member: impl Fn(&Formula) -> bool,
        cap: usize,
    ) -> Result<Self, MatrixError> {
        let levels = formulas_by_depth(sig, depth, vars, cap.saturating_sub(1)).ok_or_else(|| {
            let required = formulas_by_depth(sig, depth, vars, usize::MAX)
                .map(|l| l.iter().map(Vec::len).sum::<usize>() + 1)
                .unwrap_or(usize::MAX);
            MatrixError::TooLarge { required, cap }
        })?;
        let formulas: Vec<Formula> = levels.into_iter().flatten().collect();
        let index = formulas
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i as Value))
            .collect();
        let mut designated: Vec<bool> = formulas.iter().map(|f| member(f)).collect();
        designated.push(true);
        Ok(LindenbaumFragment {
            sig: sig.clone(),
            depth,
            formulas,
            index,
            designated,
        })
    }

    pub fn top(&self) -> Value {
        self.formulas.len() as Value
    }

    pub fn formula(&self, v: Value) -> Option<&Formula> {
        self.formulas.get(v as usize)
    }

    pub fn value_of(&self, f: &Formula) -> Option<Value> {
        self.index.get(f).copied()
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    /// Tabulates the fragment, refusing if any table would exceed `cap` entries.
    pub fn to_matrix(&self, cap: usize) -> Result<Matrix, MatrixError> {
        let m = self.size();
        for op in self.sig.ops() {
            let entries = m.checked_pow(self.sig.arity(op) as u32).unwrap_or(usize::MAX);
            if entries > cap {
                return Err(MatrixError::TooLarge { required: entries, cap });
            }
        }
        let mut labels: Vec<String> = self
            .formulas
            .iter()
            .map(|f| f.display(&self.sig).to_string().replace(' ', ""))
            .collect();
        labels.push("T".into());
        Matrix::from_fn(
            format!("lindenbaum_{}", self.depth),
            self.sig.clone(),
            labels,
            self.designated.clone(),
            |op, args| self.apply(op, args),
        )
    }
}

impl Algebra for LindenbaumFragment {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn size(&self) -> usize {
        self.formulas.len() + 1
    }

    fn is_designated(&self, v: Value) -> bool {
        self.designated[v as usize]
    }

    fn apply(&self, op: OpId, args: &[Value]) -> Value {
        let top = self.top();
        if args.contains(&top) {
            return top;
        }
        let built = Formula::app(op, args.iter().map(|&a| self.formulas[a as usize].clone()).collect());
        if built.depth() <= self.depth {
            self.index[&built]
        } else {
            top
        }
    }
}

/// Materialised Lindenbaum fragment over `X1..Xvars` up to `depth`.
pub fn lindenbaum_fragment(
    depth: usize,
    vars: u32,
    member: impl Fn(&Formula) -> bool,
    sig: &Signature,
    cap: usize,
) -> Result<Matrix, MatrixError> {
    let frag = LindenbaumFragment::new(sig, depth, vars, member, cap)?;
    frag.to_matrix(cap.saturating_mul(cap))
}
