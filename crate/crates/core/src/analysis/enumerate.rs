//! Enumeration of the m-valued covers of a calculus up to isomorphism.
//!
//! Designated sets are normalised to the top `d` values, so the only
//! remaining symmetries are permutations of the undesignated and of the
//! designated values among themselves. Table entries are assigned in
//! signature order, row-major; a candidate is kept only if it is the
//! lexicographically least table vector in its orbit. Every axiom and rule
//! instance is watched on the smallest table entry it still needs.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::Budget;
use crate::calculus::Calculus;
use crate::matrix::{Matrix, Value};
use crate::syntax::{Formula, OpId, Signature};
use crate::util::{next_tuple, permutations};

const UNSET: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumOptions {
    /// Keep covers designating every value.
    pub include_trivial: bool,
    /// Keep covers designating nothing (only possible without axioms).
    pub include_empty: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            include_trivial: true,
            include_empty: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub matrix: Matrix,
    pub trivial: bool,
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverEnumeration {
    pub values: usize,
    pub covers: Vec<Cover>,
    /// The node cap stopped the search early.
    pub truncated: bool,
    pub nodes: u64,
}

/// All m-valued covers of `c`, one per isomorphism class, in canonical
/// order: designated-set size ascending, then tables lexicographically.
pub fn enumerate_covers(c: &Calculus, m: usize, options: EnumOptions, budget: &Budget) -> CoverEnumeration {
    let (covers, truncated, nodes) = search_covers(c, m, options, budget, &|_| true, None);
    CoverEnumeration {
        values: m,
        covers,
        truncated,
        nodes,
    }
}

/// Covers accepted by `keep`, at most `limit` of them. Without a limit the
/// order is canonical; with one the choice is deterministic but need not be
/// the canonical first.
/// Returns the covers, the truncation flag and the number of nodes visited.
pub fn search_covers(
    c: &Calculus,
    m: usize,
    options: EnumOptions,
    budget: &Budget,
    keep: &(dyn Fn(&Matrix) -> bool + Sync),
    limit: Option<usize>,
) -> (Vec<Cover>, bool, u64) {
    assert!(m >= 1 && m < UNSET as usize, "value count out of range");
    let counter = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let mut found: Vec<Cover> = Vec::new();
    let mut truncated = false;
    for d in 0..=m {
        if (d == 0 && !options.include_empty) || (d == m && !options.include_trivial) {
            continue;
        }
        if d == 0 && !c.axioms().is_empty() {
            continue;
        }
        let space = Space::new(c, m, d);
        let tasks = space.tasks();
        // ordered batches keep the output independent of the worker count
        let batch = if limit.is_some() { rayon::current_num_threads().max(1) * 4 } else { tasks.len().max(1) };
        for chunk in tasks.chunks(batch) {
            let want = limit.map(|l| l - found.len());
            let results: Vec<Vec<Vec<u8>>> = chunk
                .par_iter()
                .map(|prefix| {
                    let mut hits = Vec::new();
                    Search::new(&space, prefix, &counter, budget.enumeration_cap, &stop).run(&mut |table| {
                        let mat = space.matrix(table, "");
                        if keep(&mat) {
                            hits.push(table.to_vec());
                        }
                        want.is_some_and(|w| hits.len() >= w)
                    });
                    hits.sort_unstable();
                    hits
                })
                .collect();
            for table in results.into_iter().flatten() {
                if limit.is_some_and(|l| found.len() >= l) {
                    break;
                }
                let name = format!("{}_m{}_{}", c.name(), m, found.len() + 1);
                found.push(Cover {
                    matrix: space.matrix(&table, &name),
                    trivial: d == m,
                    empty: d == 0,
                });
            }
            if stop.load(Ordering::Relaxed) {
                truncated = true;
                break;
            }
            if limit.is_some_and(|l| found.len() >= l) {
                break;
            }
        }
        if truncated || limit.is_some_and(|l| found.len() >= l) {
            break;
        }
    }
    (found, truncated, counter.load(Ordering::Relaxed))
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Slot(u8),
    Op(OpId, u8),
}

struct Constraint {
    /// Premises followed by the conclusion (an axiom has no premises).
    parts: Vec<Vec<Instr>>,
    nvars: usize,
}

struct Perm {
    val: Vec<u8>,
    src: Vec<u32>,
}

/// The search space for one designated-set size.
struct Space {
    m: usize,
    /// Values `>= low` are designated.
    low: u8,
    sig: Signature,
    offsets: Vec<usize>,
    entries: usize,
    constraints: Vec<Constraint>,
    inst_cid: Vec<u32>,
    inst_vals: Vec<u8>,
    stride: usize,
    perms: Vec<Perm>,
}

fn compile(f: &Formula, vars: &[u32], out: &mut Vec<Instr>) {
    match f {
        Formula::Var(x) => out.push(Instr::Slot(vars.iter().position(|v| v == x).unwrap() as u8)),
        Formula::App(op, args) => {
            for a in args.iter() {
                compile(a, vars, out);
            }
            out.push(Instr::Op(*op, args.len() as u8));
        }
    }
}

impl Space {
    fn new(c: &Calculus, m: usize, d: usize) -> Space {
        let sig = c.sig().clone();
        let mut offsets = Vec::with_capacity(sig.len());
        let mut entries = 0;
        for op in sig.ops() {
            offsets.push(entries);
            entries += m.pow(sig.arity(op) as u32);
        }
        let mut constraints = Vec::new();
        for a in c.axioms() {
            let vars: Vec<u32> = a.formula.vars().into_iter().collect();
            let mut code = Vec::new();
            compile(&a.formula, &vars, &mut code);
            constraints.push(Constraint {
                parts: vec![code],
                nvars: vars.len(),
            });
        }
        for r in c.rules() {
            let vars: Vec<u32> = r.vars().into_iter().collect();
            let mut parts = Vec::new();
            for f in r.premises.iter().chain(std::iter::once(&r.conclusion)) {
                let mut code = Vec::new();
                compile(f, &vars, &mut code);
                parts.push(code);
            }
            constraints.push(Constraint {
                parts,
                nvars: vars.len(),
            });
        }
        let stride = constraints.iter().map(|c| c.nvars).max().unwrap_or(0).max(1);
        let mut inst_cid = Vec::new();
        let mut inst_vals = Vec::new();
        for (cid, con) in constraints.iter().enumerate() {
            let mut idx = vec![0usize; con.nvars];
            loop {
                inst_cid.push(cid as u32);
                let mut row = vec![0u8; stride];
                for (r, &i) in row.iter_mut().zip(&idx) {
                    *r = i as u8;
                }
                inst_vals.extend_from_slice(&row);
                if !next_tuple(&mut idx, m) {
                    break;
                }
            }
        }
        let low = (m - d) as u8;
        let mut perms = Vec::new();
        for lo in permutations(m - d) {
            for hi in permutations(d) {
                let val: Vec<u8> = lo
                    .iter()
                    .map(|&v| v as u8)
                    .chain(hi.iter().map(|&v| (v + m - d) as u8))
                    .collect();
                if val.iter().enumerate().all(|(i, &v)| i == v as usize) {
                    continue;
                }
                let mut inv = vec![0u8; m];
                for (i, &v) in val.iter().enumerate() {
                    inv[v as usize] = i as u8;
                }
                let mut src = Vec::with_capacity(entries);
                for op in sig.ops() {
                    let k = sig.arity(op);
                    let mut idx = vec![0usize; k];
                    loop {
                        let at = idx.iter().fold(0usize, |acc, &a| acc * m + inv[a] as usize);
                        src.push((offsets[op as usize] + at) as u32);
                        if !next_tuple(&mut idx, m) {
                            break;
                        }
                    }
                }
                perms.push(Perm { val, src });
            }
        }
        Space {
            m,
            low,
            sig,
            offsets,
            entries,
            constraints,
            inst_cid,
            inst_vals,
            stride,
            perms,
        }
    }

    /// Prefixes of the first few entries; each is searched independently and
    /// their outputs concatenate to the canonical order.
    fn tasks(&self) -> Vec<Vec<u8>> {
        let mut p = 0;
        let mut count = 1usize;
        while p < self.entries && count < 64 {
            p += 1;
            count *= self.m;
        }
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0usize; p];
        loop {
            out.push(idx.iter().map(|&v| v as u8).collect());
            if !next_tuple(&mut idx, self.m) {
                return out;
            }
        }
    }

    fn instances(&self) -> usize {
        self.inst_cid.len()
    }

    fn matrix(&self, table: &[u8], name: &str) -> Matrix {
        let labels = (0..self.m).map(|v| v.to_string()).collect();
        let designated = (0..self.m).map(|v| v as u8 >= self.low).collect();
        let tables = self
            .sig
            .ops()
            .map(|op| {
                let s = self.offsets[op as usize];
                let n = self.m.pow(self.sig.arity(op) as u32);
                table[s..s + n].iter().map(|&v| v as Value).collect()
            })
            .collect();
        Matrix::new(name, self.sig.clone(), labels, designated, tables).expect("complete tables")
    }

    /// Value of one part under the partial table, `UNSET` if some needed
    /// entry is missing; the least missing entry is folded into `missing`.
    fn eval(&self, code: &[Instr], vals: &[u8], table: &[u8], stack: &mut Vec<u8>, missing: &mut usize) -> u8 {
        stack.clear();
        for ins in code {
            match *ins {
                Instr::Slot(i) => stack.push(vals[i as usize]),
                Instr::Op(op, k) => {
                    let base = stack.len() - k as usize;
                    let mut v = UNSET;
                    if stack[base..].iter().all(|&a| a != UNSET) {
                        let at = self.offsets[op as usize]
                            + stack[base..].iter().fold(0usize, |acc, &a| acc * self.m + a as usize);
                        v = table[at];
                        if v == UNSET && at < *missing {
                            *missing = at;
                        }
                    }
                    stack.truncate(base);
                    stack.push(v);
                }
            }
        }
        stack[0]
    }

    fn status(&self, inst: usize, table: &[u8], stack: &mut Vec<u8>) -> Status {
        let con = &self.constraints[self.inst_cid[inst] as usize];
        let vals = &self.inst_vals[inst * self.stride..(inst + 1) * self.stride];
        let mut missing = usize::MAX;
        let n = con.parts.len();
        let mut open = false;
        for (i, code) in con.parts.iter().enumerate() {
            let v = self.eval(code, vals, table, stack, &mut missing);
            if v == UNSET {
                open = true;
            } else if i + 1 < n {
                if v < self.low {
                    return Status::Satisfied;
                }
            } else if v >= self.low {
                return Status::Satisfied;
            }
        }
        if open {
            Status::Blocked(missing)
        } else {
            Status::Conflict
        }
    }
}

enum Status {
    Conflict,
    Satisfied,
    Blocked(usize),
}

struct Search<'a> {
    space: &'a Space,
    prefix: &'a [u8],
    counter: &'a AtomicU64,
    cap: u64,
    stop: &'a AtomicBool,
    table: Vec<u8>,
    watch: Vec<Vec<u32>>,
    stack: Vec<u8>,
    /// Per symmetry: first position not yet known to agree, or `None` once
    /// the candidate is known to be strictly smaller.
    sym: Vec<Option<usize>>,
}

impl<'a> Search<'a> {
    fn new(space: &'a Space, prefix: &'a [u8], counter: &'a AtomicU64, cap: u64, stop: &'a AtomicBool) -> Self {
        Search {
            space,
            prefix,
            counter,
            cap,
            stop,
            table: vec![UNSET; space.entries],
            watch: vec![Vec::new(); space.entries],
            stack: Vec::new(),
            sym: vec![Some(0); space.perms.len()],
        }
    }

    /// Calls `emit` on every surviving complete table until it returns true.
    fn run(mut self, emit: &mut dyn FnMut(&[u8]) -> bool) {
        for inst in 0..self.space.instances() {
            match self.space.status(inst, &self.table, &mut self.stack) {
                Status::Conflict => return,
                Status::Satisfied => {}
                Status::Blocked(e) => self.watch[e].push(inst as u32),
            }
        }
        self.descend(0, emit);
    }

    /// The prefix in order, then the open entry blocking the most instances.
    fn pick(&self, depth: usize) -> usize {
        if depth < self.prefix.len() {
            return depth;
        }
        let mut best = usize::MAX;
        let mut most = 0;
        for e in 0..self.space.entries {
            if self.table[e] == UNSET && (best == usize::MAX || self.watch[e].len() > most) {
                best = e;
                most = self.watch[e].len();
            }
        }
        best
    }

    /// Returns true when the search must end.
    fn descend(&mut self, depth: usize, emit: &mut dyn FnMut(&[u8]) -> bool) -> bool {
        if depth == self.space.entries {
            return emit(&self.table);
        }
        let e = self.pick(depth);
        let values: Vec<u8> = if e < self.prefix.len() {
            vec![self.prefix[e]]
        } else {
            (0..self.space.m as u8).collect()
        };
        let watched = std::mem::take(&mut self.watch[e]);
        let mut quit = false;
        for v in values {
            if self.stop.load(Ordering::Relaxed) {
                quit = true;
                break;
            }
            if self.counter.fetch_add(1, Ordering::Relaxed) >= self.cap {
                self.stop.store(true, Ordering::Relaxed);
                quit = true;
                break;
            }
            self.table[e] = v;
            let mut pushed: Vec<usize> = Vec::new();
            let mut ok = true;
            for &inst in &watched {
                match self.space.status(inst as usize, &self.table, &mut self.stack) {
                    Status::Conflict => {
                        ok = false;
                        break;
                    }
                    Status::Satisfied => {}
                    Status::Blocked(next) => {
                        self.watch[next].push(inst);
                        pushed.push(next);
                    }
                }
            }
            let saved = if ok { self.advance_symmetry() } else { None };
            if let Some(saved) = saved {
                if self.descend(depth + 1, emit) {
                    quit = true;
                }
                self.sym = saved;
            }
            for &next in pushed.iter().rev() {
                self.watch[next].pop();
            }
            if quit {
                break;
            }
        }
        self.table[e] = UNSET;
        self.watch[e] = watched;
        quit
    }

    /// Moves every symmetry check forward; `None` if some permutation gives
    /// a smaller table. Otherwise returns the previous state for undo.
    fn advance_symmetry(&mut self) -> Option<Vec<Option<usize>>> {
        let saved = self.sym.clone();
        for (p, perm) in self.space.perms.iter().enumerate() {
            let Some(mut pos) = self.sym[p] else { continue };
            loop {
                if pos == self.space.entries {
                    break;
                }
                let a = self.table[pos];
                let b = self.table[perm.src[pos] as usize];
                if a == UNSET || b == UNSET {
                    break;
                }
                let b = perm.val[b as usize];
                if a < b {
                    self.sym[p] = None;
                    break;
                }
                if a > b {
                    self.sym = saved;
                    return None;
                }
                pos += 1;
            }
            if self.sym[p].is_some() {
                self.sym[p] = Some(pos);
            }
        }
        Some(saved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::soundness::check_strong_soundness;
    use crate::calculus::{kcalc_without_r2, triangle};

    #[test]
    fn triangle_two_valued_covers_are_trivial() {
        let e = enumerate_covers(&triangle(), 2, EnumOptions::default(), &Budget::default());
        assert!(!e.truncated);
        assert!(!e.covers.is_empty());
        assert!(e.covers.iter().all(|c| c.trivial && c.matrix.is_trivial()));
    }

    #[test]
    fn single_value_has_one_trivial_cover() {
        let e = enumerate_covers(&triangle(), 1, EnumOptions::default(), &Budget::default());
        assert_eq!(e.covers.len(), 1);
        assert!(e.covers[0].trivial);
    }

    #[test]
    fn kcalc_covers_are_covers() {
        let c = kcalc_without_r2();
        let e = enumerate_covers(&c, 2, EnumOptions::default(), &Budget::default());
        assert!(!e.covers.is_empty());
        for cov in &e.covers {
            assert!(check_strong_soundness(&c, &cov.matrix).unwrap().is_cover());
        }
    }

    #[test]
    fn cap_truncates() {
        let e = enumerate_covers(
            &kcalc_without_r2(),
            3,
            EnumOptions::default(),
            &Budget::default().with_enumeration_cap(50),
        );
        assert!(e.truncated);
    }
}
