//! Comparing tautology sets.
//!
//! `compare(m1, m2)` asks whether some tautology of `m2` is not a tautology
//! of `m1`. Let `g` be a generating set of `m1` of size `k`. If a formula `A`
//! works, with countermodel `v` in `m1`, then replacing each variable by a
//! term over `X1..Xk` that takes the value `v(X)` at `g` gives another
//! witness: still an `m2`-tautology, still false in `m1` at `g`. So the
//! question is whether the subalgebra of `m2^(m2^k) × m1` generated by the
//! `k` pairs (projection, generator) contains a pair whose first component is
//! everywhere designated and whose second is not.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::analysis::closure::{generating_set, points, ClosureEnd, FunctionClosure};
use crate::analysis::{Answer, Budget, Deadline};
use crate::matrix::{find_embedding, Matrix, MatrixError, Valuation, Value};
use crate::syntax::{formulas_by_depth, Formula, OpId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum CompareMode {
    Exact,
    /// Enumerates formulas up to a depth over `X1..Xvars`; never answers no.
    Bounded { depth: usize, vars: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CompareProof {
    /// A tautology of the right matrix falsified in the left one.
    Witness { formula: Formula, countermodel: Valuation },
    /// The left matrix embeds into the right one.
    Embedding { map: Vec<Value> },
    /// The closure saturated without a witness.
    Closure { size: usize, generators: Vec<Value> },
    /// The left matrix designates every value.
    TrivialLeft,
    /// The right matrix designates nothing.
    EmptyRight,
    Budget { note: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareVerdict {
    /// `Yes` when some tautology of the right matrix is not one of the left.
    pub answer: Answer,
    pub proof: CompareProof,
}

impl CompareVerdict {
    pub fn witness(&self) -> Option<&Formula> {
        match &self.proof {
            CompareProof::Witness { formula, .. } => Some(formula),
            _ => None,
        }
    }
}

/// Decides `Taut(m2) ⊄ Taut(m1)`.
pub fn compare(m1: &Matrix, m2: &Matrix, mode: CompareMode, budget: &Budget) -> Result<CompareVerdict, MatrixError> {
    m1.check_signature(m2.sig())?;
    match mode {
        CompareMode::Exact => Ok(compare_exact(m1, m2, budget)),
        CompareMode::Bounded { depth, vars } => Ok(compare_bounded(m1, m2, depth, vars, budget)),
    }
}

fn no(proof: CompareProof) -> CompareVerdict {
    CompareVerdict {
        answer: Answer::No,
        proof,
    }
}

fn compare_exact(m1: &Matrix, m2: &Matrix, budget: &Budget) -> CompareVerdict {
    if m1.is_trivial() {
        return no(CompareProof::TrivialLeft);
    }
    if m2.designated_values().is_empty() {
        return no(CompareProof::EmptyRight);
    }
    if let Some(map) = find_embedding(m1, m2) {
        return no(CompareProof::Embedding { map });
    }
    let gens = generating_set(m1);
    let k = gens.len();
    let pts = points(m2.size(), k);
    let p = pts.len();
    let mut owner = vec![1u8; p];
    owner.push(0);
    let Some(mut closure) = FunctionClosure::new(&[m1, m2], owner, budget.closure_cap) else {
        return CompareVerdict {
            answer: Answer::Unknown,
            proof: CompareProof::Budget {
                note: "matrices above 256 values are not supported by the closure".into(),
            },
        };
    };
    let gen_vectors: Vec<Vec<u8>> = (0..k)
        .map(|j| {
            let mut v: Vec<u8> = pts.iter().map(|pt| pt[j] as u8).collect();
            v.push(gens[j] as u8);
            v
        })
        .collect();
    let d1: Vec<bool> = m1.designation().to_vec();
    let d2: Vec<bool> = m2.designation().to_vec();
    let mut goal = |v: &[u8]| !d1[v[p] as usize] && v[..p].iter().all(|&x| d2[x as usize]);
    let deadline = budget.deadline();
    let end = closure.run(&gen_vectors, &mut goal, deadline);
    let countermodel: Valuation = gens.iter().enumerate().map(|(j, &g)| (j as u32 + 1, g)).collect();
    let witness = |formula: Formula| CompareVerdict {
        answer: Answer::Yes,
        proof: CompareProof::Witness {
            formula,
            countermodel: countermodel.clone(),
        },
    };
    match end {
        ClosureEnd::Found(id) => witness(closure.formula(id)),
        ClosureEnd::Saturated => no(CompareProof::Closure {
            size: closure.len(),
            generators: gens,
        }),
        ClosureEnd::Cap | ClosureEnd::Timeout => match beam_search(&mut closure, p, &d1, &d2, deadline) {
            Some(id) => witness(closure.formula(id)),
            None => CompareVerdict {
                answer: Answer::Unknown,
                proof: CompareProof::Budget {
                    note: format!(
                        "closure stopped at {} elements ({}) without a witness",
                        closure.len(),
                        if end == ClosureEnd::Cap { "cap" } else { "time" }
                    ),
                },
            },
        },
    }
}

/// Candidate produced during the beam search, ordered best first.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Scored {
    score: usize,
    shallow: std::cmp::Reverse<usize>,
    op: OpId,
    args: std::cmp::Reverse<[u32; 2]>,
}

/// Heuristic continuation once the exact closure stops: repeatedly combines
/// the elements that are false in the left matrix and designated at the
/// most points of the right one. Only ever used to find witnesses.
fn beam_search(closure: &mut FunctionClosure, p: usize, d1: &[bool], d2: &[bool], deadline: Deadline) -> Option<u32> {
    const BEAM: usize = 160;
    const KEEP: usize = 400;
    const ROUNDS: usize = 6;
    let score = |v: &[u8]| v[..p].iter().filter(|&&x| d2[x as usize]).count();
    let is_goal = |v: &[u8]| !d1[v[p] as usize] && v[..p].iter().all(|&x| d2[x as usize]);
    let sig_ops: Vec<(OpId, usize)> = {
        let sig = closure.signature().clone();
        sig.ops().map(|op| (op, sig.arity(op))).filter(|&(_, k)| k == 1 || k == 2).collect()
    };
    let layers = closure.layer_count();
    let base_end = (0..layers.min(3)).map(|l| closure.layer(l).end).max().unwrap_or(0).min(3000);
    let base: Vec<u32> = (0..base_end).collect();
    let mut pool: Vec<u32> = (0..closure.len() as u32).filter(|&id| !d1[closure.get(id)[p] as usize]).collect();
    let mut buf = Vec::with_capacity(closure.width());
    for _ in 0..ROUNDS {
        pool.sort_by_key(|&id| (std::cmp::Reverse(score(closure.get(id))), closure.depth(id), id));
        pool.truncate(BEAM);
        let mut heap: BinaryHeap<std::cmp::Reverse<Scored>> = BinaryHeap::new();
        let mut best_goal: Option<(usize, OpId, [u32; 2], usize)> = None;
        let mut consider = |closure: &FunctionClosure, op: OpId, args: [u32; 2], arity: usize, buf: &mut Vec<u8>| {
            closure.apply_into(op, &args[..arity], buf);
            if d1[buf[p] as usize] {
                return;
            }
            let depth = args[..arity].iter().map(|&a| closure.depth(a)).max().unwrap() + 1;
            if is_goal(buf) {
                if best_goal.is_none_or(|(d, ..)| depth < d) {
                    best_goal = Some((depth, op, args, arity));
                }
                return;
            }
            if closure.find(buf).is_some() {
                return;
            }
            heap.push(std::cmp::Reverse(Scored {
                score: score(buf),
                shallow: std::cmp::Reverse(depth),
                op,
                args: std::cmp::Reverse(args),
            }));
            if heap.len() > KEEP {
                heap.pop();
            }
        };
        for &(op, arity) in &sig_ops {
            for &a in &pool {
                if arity == 1 {
                    consider(closure, op, [a, 0], 1, &mut buf);
                    continue;
                }
                for &b in pool.iter().chain(base.iter()) {
                    consider(closure, op, [a, b], 2, &mut buf);
                    consider(closure, op, [b, a], 2, &mut buf);
                }
                if deadline.passed() {
                    return None;
                }
            }
        }
        if let Some((_, op, args, arity)) = best_goal {
            closure.apply_into(op, &args[..arity], &mut buf);
            let v = buf.clone();
            return Some(closure.insert(&v, crate::analysis::closure::Origin::App(op, args[..arity].into())).0);
        }
        if heap.is_empty() {
            return None;
        }
        for std::cmp::Reverse(s) in heap.into_sorted_vec() {
            let arity = sig_ops.iter().find(|&&(o, _)| o == s.op).unwrap().1;
            let args = s.args.0;
            closure.apply_into(s.op, &args[..arity], &mut buf);
            let v = buf.clone();
            let (id, new) = closure.insert(&v, crate::analysis::closure::Origin::App(s.op, args[..arity].into()));
            if new {
                pool.push(id);
            }
        }
    }
    None
}

fn compare_bounded(m1: &Matrix, m2: &Matrix, depth: usize, vars: u32, budget: &Budget) -> CompareVerdict {
    let Some(levels) = formulas_by_depth(m1.sig(), depth, vars, budget.closure_cap) else {
        return CompareVerdict {
            answer: Answer::Unknown,
            proof: CompareProof::Budget {
                note: format!("more than {} formulas up to depth {depth}", budget.closure_cap),
            },
        };
    };
    for f in levels.iter().flatten() {
        if !f.is_canonically_named() {
            continue;
        }
        if let Some(countermodel) = m1.countermodel(f) {
            if m2.is_tautology(f) {
                return CompareVerdict {
                    answer: Answer::Yes,
                    proof: CompareProof::Witness {
                        formula: f.clone(),
                        countermodel,
                    },
                };
            }
        }
    }
    CompareVerdict {
        answer: Answer::Unknown,
        proof: CompareProof::Budget {
            note: format!("no witness up to depth {depth} over {vars} variables"),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equality {
    Equal,
    Different,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualVerdict {
    pub answer: Equality,
    /// Evidence for `Taut(right) ⊄ Taut(left)`.
    pub forward: CompareVerdict,
    /// Evidence for `Taut(left) ⊄ Taut(right)`.
    pub backward: CompareVerdict,
}

impl EqualVerdict {
    /// A formula in exactly one of the tautology sets.
    pub fn witness(&self) -> Option<&Formula> {
        self.forward.witness().or(self.backward.witness())
    }
}

pub fn taut_equal(m1: &Matrix, m2: &Matrix, budget: &Budget) -> Result<EqualVerdict, MatrixError> {
    let forward = compare(m1, m2, CompareMode::Exact, budget)?;
    let backward = compare(m2, m1, CompareMode::Exact, budget)?;
    let answer = match (forward.answer, backward.answer) {
        (Answer::Yes, _) | (_, Answer::Yes) => Equality::Different,
        (Answer::No, Answer::No) => Equality::Equal,
        _ => Equality::Unknown,
    };
    Ok(EqualVerdict {
        answer,
        forward,
        backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{bernays, godel};
    use crate::syntax::parse_formula;

    fn exact(m1: &Matrix, m2: &Matrix) -> CompareVerdict {
        compare(m1, m2, CompareMode::Exact, &Budget::default()).unwrap()
    }

    fn check_witness(m1: &Matrix, m2: &Matrix, v: &CompareVerdict) {
        let CompareProof::Witness { formula, countermodel } = &v.proof else { panic!("{v:?}") };
        assert!(m2.is_tautology(formula));
        assert!(!m1.is_designated(m1.evaluate(formula, countermodel).unwrap()));
    }

    #[test]
    fn bernays_against_classical() {
        let (b, g2) = (bernays(), godel(2).unwrap());
        let v = exact(&b, &g2);
        assert_eq!(v.answer, Answer::Yes);
        check_witness(&b, &g2, &v);
        let dn = parse_formula("imp(neg(neg(X1)), X1)", g2.sig()).unwrap();
        assert!(g2.is_tautology(&dn) && !b.is_tautology(&dn));
    }

    #[test]
    fn godel_two_and_three() {
        let (g2, g3) = (godel(2).unwrap(), godel(3).unwrap());
        let v = exact(&g2, &g3);
        assert_eq!(v.answer, Answer::No);
        assert_eq!(v.proof, CompareProof::Embedding { map: vec![0, 2] });
        let v = exact(&g3, &g2);
        assert_eq!(v.answer, Answer::Yes);
        check_witness(&g3, &g2, &v);
        assert!(v.witness().unwrap().depth() <= 3);
    }

    #[test]
    fn bounded_mode_finds_or_gives_up() {
        let (g2, g3) = (godel(2).unwrap(), godel(3).unwrap());
        let v = compare(&g3, &g2, CompareMode::Bounded { depth: 3, vars: 1 }, &Budget::default()).unwrap();
        assert_eq!(v.answer, Answer::Yes);
        check_witness(&g3, &g2, &v);
        let v = compare(&g2, &g3, CompareMode::Bounded { depth: 2, vars: 1 }, &Budget::default()).unwrap();
        assert_eq!(v.answer, Answer::Unknown);
    }

    #[test]
    fn equality() {
        let g3 = godel(3).unwrap();
        assert_eq!(taut_equal(&g3, &g3, &Budget::default()).unwrap().answer, Equality::Equal);
        let e = taut_equal(&godel(2).unwrap(), &bernays(), &Budget::default()).unwrap();
        assert_eq!(e.answer, Equality::Different);
        let w = e.witness().unwrap();
        assert!(bernays().is_tautology(w) != godel(2).unwrap().is_tautology(w));
    }
}
