#![allow(dead_code)]

use std::collections::BTreeSet;

use manyval_core::matrix::{Matrix, Value};
use manyval_core::syntax::{builtin_signature, Formula, Signature, Substitution};
use manyval_core::util::{next_tuple, permutations};
use proptest::prelude::*;

pub fn sig(name: &str) -> Signature {
    builtin_signature(name).unwrap()
}

pub fn neg_imp() -> Signature {
    Signature::new("negimp", &[("neg", 1), ("imp", 2)]).unwrap()
}

/// Random formulas over `X1..Xvars` of depth at most `depth`.
pub fn formula(sig: &Signature, vars: u32, depth: u32) -> BoxedStrategy<Formula> {
    let mut leaves: Vec<Formula> = (1..=vars).map(Formula::var).collect();
    leaves.extend(sig.ops().filter(|&op| sig.arity(op) == 0).map(Formula::constant));
    let ops: Vec<(u16, usize)> = sig.ops().map(|op| (op, sig.arity(op))).filter(|&(_, k)| k > 0).collect();
    proptest::sample::select(leaves)
        .prop_recursive(depth, 96, 3, move |inner| {
            proptest::sample::select(ops.clone()).prop_flat_map(move |(op, k)| {
                proptest::collection::vec(inner.clone(), k).prop_map(move |args| Formula::app(op, args))
            })
        })
        .boxed()
}

pub fn substitution(sig: &Signature, vars: u32, depth: u32) -> BoxedStrategy<Substitution> {
    proptest::collection::btree_map(1..=vars, formula(sig, vars, depth), 0..=vars as usize)
        .prop_map(|m| m.into_iter().collect())
        .boxed()
}

/// Random matrices with between `lo` and `hi` values.
pub fn matrix(sig: &Signature, lo: usize, hi: usize) -> BoxedStrategy<Matrix> {
    let sig = sig.clone();
    (lo..=hi)
        .prop_flat_map(move |m| {
            let sig = sig.clone();
            let sizes: Vec<usize> = sig.ops().map(|op| m.pow(sig.arity(op) as u32)).collect();
            let tables: Vec<_> = sizes
                .iter()
                .map(|&n| proptest::collection::vec(0..m as Value, n))
                .collect();
            (Just(m), proptest::collection::vec(any::<bool>(), m), tables).prop_map(move |(m, des, tables)| {
                Matrix::new("r", sig.clone(), (0..m).map(|v| v.to_string()).collect(), des, tables).unwrap()
            })
        })
        .boxed()
}

/// Every matrix over `sig` with `m` values and any designated set.
pub fn all_matrices(sig: &Signature, m: usize) -> Vec<Matrix> {
    let sizes: Vec<usize> = sig.ops().map(|op| m.pow(sig.arity(op) as u32)).collect();
    let total: usize = sizes.iter().sum();
    let mut out = Vec::new();
    let mut cells = vec![0usize; total];
    loop {
        let mut tables = Vec::new();
        let mut at = 0;
        for &n in &sizes {
            tables.push(cells[at..at + n].iter().map(|&v| v as Value).collect());
            at += n;
        }
        for d in 0..1usize << m {
            let des = (0..m).map(|v| d >> v & 1 == 1).collect();
            let labels = (0..m).map(|v| v.to_string()).collect();
            out.push(Matrix::new("b", sig.clone(), labels, des, tables.clone()).unwrap());
        }
        if !next_tuple(&mut cells, m) {
            return out;
        }
    }
}

/// Designation and tables, minimised over all value permutations.
pub fn iso_key(m: &Matrix) -> (Vec<bool>, Vec<Vec<Value>>) {
    permutations(m.size())
        .iter()
        .map(|p| {
            let q = m.permuted(p);
            (q.designation().to_vec(), q.tables().to_vec())
        })
        .min()
        .unwrap()
}

pub fn vars_of(fs: &[Formula]) -> BTreeSet<u32> {
    fs.iter().flat_map(|f| f.vars()).collect()
}
