mod common;

use std::collections::BTreeSet;

use common::*;
use manyval_core::matrix::{
    find_embedding, is_embedding, is_tautology_in, lindenbaum_fragment, phi_reduce, product, xi, LindenbaumFragment,
    Matrix, Value,
};
use manyval_core::syntax::{formulas_by_depth, Formula, Signature};
use manyval_core::util::next_tuple;
use proptest::prelude::*;

/// Truth-table check over {0, 1} with `neg` and `imp` read classically.
fn classical(f: &Formula, sig: &Signature) -> bool {
    fn ev(f: &Formula, sig: &Signature, v: &[bool]) -> bool {
        match f {
            Formula::Var(x) => v[*x as usize - 1],
            Formula::App(op, args) => match sig.symbol(*op) {
                "neg" => !ev(&args[0], sig, v),
                "imp" => !ev(&args[0], sig, v) || ev(&args[1], sig, v),
                s => panic!("unexpected connective {s}"),
            },
        }
    }
    let n = f.max_var() as usize;
    (0..1usize << n).all(|bits| ev(f, sig, &(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>()))
}

/// The subalgebra of `m` generated by `seed`, as a matrix of its own.
fn subalgebra(m: &Matrix, seed: &BTreeSet<Value>) -> Matrix {
    let sig = m.sig();
    let mut set = seed.clone();
    for op in sig.ops().filter(|&op| sig.arity(op) == 0) {
        set.insert(m.apply(op, &[]));
    }
    loop {
        let cur: Vec<Value> = set.iter().copied().collect();
        let before = set.len();
        for op in sig.ops() {
            let k = sig.arity(op);
            let mut idx = vec![0usize; k];
            loop {
                let args: Vec<Value> = idx.iter().map(|&i| cur[i]).collect();
                set.insert(m.apply(op, &args));
                if !next_tuple(&mut idx, cur.len()) {
                    break;
                }
            }
        }
        if set.len() == before {
            break;
        }
    }
    let vals: Vec<Value> = set.into_iter().collect();
    let pos = |v: Value| vals.iter().position(|&w| w == v).unwrap() as Value;
    Matrix::from_fn(
        "sub",
        sig.clone(),
        vals.iter().map(|&v| m.label(v).to_string()).collect(),
        vals.iter().map(|&v| m.is_designated(v)).collect(),
        |op, args| pos(m.apply(op, &args.iter().map(|&a| vals[a as usize]).collect::<Vec<_>>())),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn product_tautologies_intersect(
        m1 in matrix(&sig("ipc"), 1, 3),
        m2 in matrix(&sig("ipc"), 1, 3),
        fs in proptest::collection::vec(formula(&sig("ipc"), 3, 4), 4),
    ) {
        let p = product(&m1, &m2).unwrap();
        prop_assert_eq!(p.size(), m1.size() * m2.size());
        for f in &fs {
            prop_assert_eq!(p.is_tautology(f), m1.is_tautology(f) && m2.is_tautology(f));
        }
    }

    #[test]
    fn product_lemma_other_signatures(
        (m1, m2, f) in prop_oneof![Just("kcalc"), Just("impbot"), Just("neq")].prop_flat_map(|n| {
            let s = sig(n);
            (matrix(&s, 1, 3), matrix(&s, 1, 3), formula(&s, 2, 4))
        })
    ) {
        let p = product(&m1, &m2).unwrap();
        prop_assert_eq!(p.is_tautology(&f), m1.is_tautology(&f) && m2.is_tautology(&f));
    }

    #[test]
    fn phi_contract(
        m in matrix(&neg_imp(), 1, 4),
        fs in proptest::collection::vec(formula(&neg_imp(), 2, 3), 1..=2),
        sample in proptest::collection::vec(formula(&neg_imp(), 2, 4), 12),
    ) {
        let fs: Vec<Formula> = fs.into_iter().filter(|f| !m.is_tautology(f)).collect();
        if !fs.is_empty() {
            let r = phi_reduce(&m, &fs).unwrap();
            for f in &fs {
                prop_assert!(!r.is_tautology(f));
            }
            for g in sample.iter().filter(|g| m.is_tautology(g)) {
                prop_assert!(r.is_tautology(g));
            }
            prop_assert!(r.size() <= fs.iter().map(xi).product::<usize>());
        }
    }

    #[test]
    fn embeddings_transfer_tautologies(
        (big, seed, perm) in matrix(&neg_imp(), 2, 4).prop_flat_map(|m| {
            let n = m.size();
            (Just(m), proptest::collection::btree_set(0..n as Value, 1..=n), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        }),
        fs in proptest::collection::vec(formula(&neg_imp(), 2, 4), 6),
    ) {
        let sub = subalgebra(&big, &seed);
        let n = sub.size();
        let p: Vec<usize> = perm.into_iter().filter(|&i| i < n).collect();
        let small = sub.permuted(&p);
        let h = find_embedding(&small, &big);
        prop_assert!(h.is_some());
        let h = h.unwrap();
        prop_assert!(is_embedding(&small, &big, &h));
        for f in &fs {
            if big.is_tautology(f) {
                prop_assert!(small.is_tautology(f));
            }
        }
    }

    #[test]
    fn found_embeddings_between_random_matrices_are_sound(
        small in matrix(&neg_imp(), 1, 2),
        big in matrix(&neg_imp(), 2, 3),
        fs in proptest::collection::vec(formula(&neg_imp(), 2, 4), 6),
    ) {
        if let Some(h) = find_embedding(&small, &big) {
            prop_assert!(is_embedding(&small, &big, &h));
            for f in &fs {
                if big.is_tautology(f) {
                    prop_assert!(small.is_tautology(f));
                }
            }
        }
    }

    #[test]
    fn verdicts_ignore_value_order(
        (m, perm) in matrix(&sig("ipc"), 1, 3).prop_flat_map(|m| {
            let n = m.size();
            (Just(m), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        }),
        fs in proptest::collection::vec(formula(&sig("ipc"), 3, 4), 6),
    ) {
        let q = m.permuted(&perm);
        for f in &fs {
            prop_assert_eq!(q.is_tautology(f), m.is_tautology(f));
        }
    }
}

#[test]
fn lindenbaum_fragments_characterise_classical_logic() {
    let s = neg_imp();
    for (i, j) in [(1, 1), (1, 2), (2, 2)] {
        let frag = LindenbaumFragment::new(&s, i, j, |f| classical(f, &s), 1_000).unwrap();
        let levels = formulas_by_depth(&s, i, j, usize::MAX).unwrap();
        for f in levels.iter().flatten() {
            assert_eq!(is_tautology_in(&frag, f), classical(f, &s), "{}", f.display(&s));
        }
        // deeper formulas are always tautologies
        let deeper = formulas_by_depth(&s, i + 1, j, usize::MAX).unwrap();
        for f in &deeper[i + 1] {
            assert!(is_tautology_in(&frag, f));
        }
    }
    let m = lindenbaum_fragment(2, 2, |f| classical(f, &s), &s, 1_000).unwrap();
    assert_eq!(m.size(), 75);
}
