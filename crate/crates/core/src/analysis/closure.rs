//! Closures of generator vectors under componentwise matrix operations.
//!
//! An element is a vector of values; position `i` lives in matrix
//! `owner[i]`. Closing a set of generators under the connectives yields
//! exactly the vectors realised by formulas over the generators, so a
//! saturated closure answers questions about all formulas at once.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::Hasher;

use crate::analysis::Deadline;
use crate::matrix::{Matrix, Value};
use crate::syntax::{Formula, OpId, Signature};
use crate::util::next_tuple;

/// Values generated by `gens` together with the constants of `m`.
pub fn subalgebra(m: &Matrix, gens: &[Value]) -> Vec<bool> {
    let mut inside = vec![false; m.size()];
    let mut members: Vec<Value> = Vec::new();
    for &g in gens {
        if !inside[g as usize] {
            inside[g as usize] = true;
            members.push(g);
        }
    }
    loop {
        let before = members.len();
        for op in m.sig().ops() {
            let k = m.sig().arity(op);
            if k > 0 && members.is_empty() {
                continue;
            }
            let snapshot = members.clone();
            let mut idx = vec![0usize; k];
            loop {
                let args: Vec<Value> = idx.iter().map(|&i| snapshot[i]).collect();
                let v = m.apply(op, &args);
                if !inside[v as usize] {
                    inside[v as usize] = true;
                    members.push(v);
                }
                if !next_tuple(&mut idx, snapshot.len()) {
                    break;
                }
            }
        }
        if members.len() == before {
            return inside;
        }
    }
}

/// A set of values that generates `m` (with its constants). Minimum size
/// for up to 12 values, greedy beyond that.
pub fn generating_set(m: &Matrix) -> Vec<Value> {
    let n = m.size();
    let full = |g: &[Value]| subalgebra(m, g).iter().all(|&b| b);
    if n <= 12 {
        for size in 0..=n {
            let mut pick: Vec<usize> = (0..size).collect();
            loop {
                let g: Vec<Value> = pick.iter().map(|&i| i as Value).collect();
                if full(&g) {
                    return g;
                }
                // next combination in lexicographic order
                let mut i = size;
                let mut advanced = false;
                while i > 0 {
                    i -= 1;
                    if pick[i] < n - size + i {
                        pick[i] += 1;
                        for j in i + 1..size {
                            pick[j] = pick[j - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        unreachable!("the full value set generates");
    }
    let mut g: Vec<Value> = Vec::new();
    let mut inside = subalgebra(m, &g);
    while let Some(v) = inside.iter().position(|&b| !b) {
        g.push(v as Value);
        inside = subalgebra(m, &g);
    }
    g
}

/// All points of `m^k`, last coordinate fastest.
pub fn points(m: usize, k: usize) -> Vec<Vec<Value>> {
    let mut out = Vec::with_capacity(m.pow(k as u32));
    let mut idx = vec![0usize; k];
    loop {
        out.push(idx.iter().map(|&i| i as Value).collect());
        if !next_tuple(&mut idx, m) {
            return out;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    /// The `j`-th generator, read as variable `X{j+1}`.
    Gen(usize),
    App(OpId, Box<[u32]>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureEnd {
    Saturated,
    Found(u32),
    Cap,
    Timeout,
}

const NONE: u32 = u32::MAX;

pub struct FunctionClosure {
    sig: Signature,
    /// Per matrix, per connective: flat table.
    tables: Vec<Vec<Vec<u8>>>,
    sizes: Vec<usize>,
    owner: Vec<u8>,
    width: usize,
    data: Vec<u8>,
    origin: Vec<Origin>,
    depth: Vec<u16>,
    buckets: HashMap<u64, u32>,
    chain: Vec<u32>,
    /// Start index of each layer.
    layers: Vec<usize>,
    cap: usize,
}

impl FunctionClosure {
    /// `owner[i]` names the matrix used at position `i`. The cap is lowered
    /// so that the arena stays below roughly 256 MiB.
    pub fn new(mats: &[&Matrix], owner: Vec<u8>, cap: usize) -> Option<Self> {
        if mats.iter().any(|m| m.size() > 256) {
            return None;
        }
        let sig = mats[0].sig().clone();
        let tables = mats
            .iter()
            .map(|m| {
                m.tables()
                    .iter()
                    .map(|t| t.iter().map(|&v| v as u8).collect())
                    .collect()
            })
            .collect();
        let width = owner.len().max(1);
        let memory_cap = (1usize << 28) / width;
        Some(FunctionClosure {
            sig,
            tables,
            sizes: mats.iter().map(|m| m.size()).collect(),
            owner,
            width,
            data: Vec::new(),
            origin: Vec::new(),
            depth: Vec::new(),
            buckets: HashMap::new(),
            chain: Vec::new(),
            layers: Vec::new(),
            cap: cap.min(memory_cap).max(1),
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.origin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origin.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, id: u32) -> &[u8] {
        let s = id as usize * self.width;
        &self.data[s..s + self.width]
    }

    pub fn depth(&self, id: u32) -> usize {
        self.depth[id as usize] as usize
    }

    pub fn origin(&self, id: u32) -> &Origin {
        &self.origin[id as usize]
    }

    pub fn is_full(&self) -> bool {
        self.len() >= self.cap
    }

    fn hash(v: &[u8]) -> u64 {
        let mut h = DefaultHasher::new();
        h.write(v);
        h.finish()
    }

    pub fn find(&self, v: &[u8]) -> Option<u32> {
        let mut at = *self.buckets.get(&Self::hash(v))?;
        while at != NONE {
            if self.get(at) == v {
                return Some(at);
            }
            at = self.chain[at as usize];
        }
        None
    }

    /// Adds `v` unless present; returns its id and whether it is new.
    pub fn insert(&mut self, v: &[u8], origin: Origin) -> (u32, bool) {
        let h = Self::hash(v);
        let head = self.buckets.get(&h).copied().unwrap_or(NONE);
        let mut at = head;
        while at != NONE {
            if self.get(at) == v {
                return (at, false);
            }
            at = self.chain[at as usize];
        }
        let id = self.origin.len() as u32;
        let d = match &origin {
            Origin::Gen(_) => 0,
            Origin::App(_, args) => args.iter().map(|&a| self.depth[a as usize] + 1).max().unwrap_or(0),
        };
        self.data.extend_from_slice(v);
        self.origin.push(origin);
        self.depth.push(d);
        self.chain.push(head);
        self.buckets.insert(h, id);
        (id, true)
    }

    /// Applies a connective componentwise.
    pub fn apply_into(&self, op: OpId, args: &[u32], out: &mut Vec<u8>) {
        out.clear();
        let k = args.len();
        match k {
            0 => {
                for i in 0..self.width {
                    let o = self.owner[i] as usize;
                    out.push(self.tables[o][op as usize][0]);
                }
            }
            1 => {
                let a = self.get(args[0]);
                for i in 0..self.width {
                    let o = self.owner[i] as usize;
                    out.push(self.tables[o][op as usize][a[i] as usize]);
                }
            }
            2 => {
                let (a, b) = (self.get(args[0]), self.get(args[1]));
                for i in 0..self.width {
                    let o = self.owner[i] as usize;
                    let m = self.sizes[o];
                    out.push(self.tables[o][op as usize][a[i] as usize * m + b[i] as usize]);
                }
            }
            _ => {
                for i in 0..self.width {
                    let o = self.owner[i] as usize;
                    let m = self.sizes[o];
                    let mut idx = 0usize;
                    for &x in args {
                        idx = idx * m + self.get(x)[i] as usize;
                    }
                    out.push(self.tables[o][op as usize][idx]);
                }
            }
        }
    }

    /// Evaluates a pattern pointwise with variables bound to elements.
    pub fn eval_pattern(&self, f: &Formula, bind: &dyn Fn(u32) -> u32, out: &mut Vec<u8>) {
        match f {
            Formula::Var(x) => {
                out.clear();
                out.extend_from_slice(self.get(bind(*x)));
            }
            Formula::App(op, args) => {
                let vals: Vec<Vec<u8>> = args
                    .iter()
                    .map(|a| {
                        let mut v = Vec::new();
                        self.eval_pattern(a, bind, &mut v);
                        v
                    })
                    .collect();
                out.clear();
                for i in 0..self.width {
                    let o = self.owner[i] as usize;
                    let m = self.sizes[o];
                    let mut idx = 0usize;
                    for v in &vals {
                        idx = idx * m + v[i] as usize;
                    }
                    out.push(self.tables[o][*op as usize][idx]);
                }
            }
        }
    }

    /// The formula recorded for an element.
    pub fn formula(&self, id: u32) -> Formula {
        let mut memo: HashMap<u32, Formula> = HashMap::new();
        self.formula_memo(id, &mut memo)
    }

    fn formula_memo(&self, id: u32, memo: &mut HashMap<u32, Formula>) -> Formula {
        if let Some(f) = memo.get(&id) {
            return f.clone();
        }
        let f = match &self.origin[id as usize] {
            Origin::Gen(j) => Formula::Var(*j as u32 + 1),
            Origin::App(op, args) => Formula::app(*op, args.iter().map(|&a| self.formula_memo(a, memo)).collect()),
        };
        memo.insert(id, f.clone());
        f
    }

    /// Seeds generators and constants as layer 0.
    pub fn seed(&mut self, gens: &[Vec<u8>], goal: &mut dyn FnMut(&[u8]) -> bool) -> Option<ClosureEnd> {
        self.layers.push(0);
        for (j, g) in gens.iter().enumerate() {
            let (id, new) = self.insert(g, Origin::Gen(j));
            if new && goal(self.get(id)) {
                return Some(ClosureEnd::Found(id));
            }
        }
        let mut buf = Vec::with_capacity(self.width);
        for op in self.sig.ops().filter(|&op| self.sig.arity(op) == 0).collect::<Vec<_>>() {
            self.apply_into(op, &[], &mut buf);
            let (id, new) = self.insert(&buf, Origin::App(op, Box::new([])));
            if new && goal(self.get(id)) {
                return Some(ClosureEnd::Found(id));
            }
        }
        None
    }

    /// Number of completed layers.
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Ids in layer `l`.
    pub fn layer(&self, l: usize) -> std::ops::Range<u32> {
        let start = self.layers[l] as u32;
        let end = self.layers.get(l + 1).map_or(self.len(), |&e| e) as u32;
        start..end
    }

    /// Builds one more layer: every application with at least one argument
    /// from the previous layer.
    pub fn step(&mut self, goal: &mut dyn FnMut(&[u8]) -> bool, deadline: Deadline) -> Option<ClosureEnd> {
        let prev_start = *self.layers.last().expect("seeded") as u32;
        let n = self.len() as u32;
        if prev_start == n {
            return Some(ClosureEnd::Saturated);
        }
        self.layers.push(n as usize);
        let mut buf = Vec::with_capacity(self.width);
        let ops: Vec<OpId> = self.sig.ops().filter(|&op| self.sig.arity(op) > 0).collect();
        let mut counter = 0u32;
        for op in ops {
            let k = self.sig.arity(op);
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| i as u32 >= prev_start) {
                    let args: Box<[u32]> = idx.iter().map(|&i| i as u32).collect();
                    self.apply_into(op, &args, &mut buf);
                    let (id, new) = self.insert(&buf, Origin::App(op, args));
                    if new {
                        if goal(self.get(id)) {
                            return Some(ClosureEnd::Found(id));
                        }
                        if self.is_full() {
                            return Some(ClosureEnd::Cap);
                        }
                    }
                    counter = counter.wrapping_add(1);
                    if counter % 4096 == 0 && deadline.passed() {
                        return Some(ClosureEnd::Timeout);
                    }
                }
                if !next_tuple(&mut idx, n as usize) {
                    break;
                }
            }
        }
        if self.len() as u32 == n {
            self.layers.pop();
            return Some(ClosureEnd::Saturated);
        }
        None
    }

    /// Runs to saturation, a goal hit, the cap, or the deadline.
    pub fn run(&mut self, gens: &[Vec<u8>], goal: &mut dyn FnMut(&[u8]) -> bool, deadline: Deadline) -> ClosureEnd {
        if let Some(end) = self.seed(gens, goal) {
            return end;
        }
        if self.is_empty() {
            return ClosureEnd::Saturated;
        }
        loop {
            if let Some(end) = self.step(goal, deadline) {
                return end;
            }
        }
    }
}
