//! Minimal covers, falsification certificates and approximation sequences.

use serde::{Deserialize, Serialize};

use crate::analysis::compare::{compare, CompareMode, CompareProof, CompareVerdict};
use crate::analysis::enumerate::{search_covers, EnumOptions};
use crate::analysis::soundness::{check_strong_soundness, CoverReport};
use crate::analysis::{Answer, Budget};
use crate::calculus::Calculus;
use crate::matrix::{product, Compiled, Matrix, MatrixError, Valuation, Value};
use crate::syntax::{formulas_by_depth, Formula, Signature};
use crate::util::next_tuple;

/// Formulas of depth at most `depth` over `X1..Xvars`, falling back to
/// smaller depths while the list would exceed `cap`.
pub fn probe_formulas(sig: &Signature, depth: usize, vars: u32, cap: usize) -> Vec<Formula> {
    for d in (0..=depth).rev() {
        if let Some(levels) = formulas_by_depth(sig, d, vars, cap) {
            return levels.into_iter().flatten().collect();
        }
    }
    Vec::new()
}

/// Which of `formulas` (all over `X1..Xvars`) are tautologies of `m`.
pub fn bounded_tautologies(m: &Matrix, formulas: &[Formula], vars: u32) -> Vec<bool> {
    let slots_vars: Vec<u32> = (1..=vars).collect();
    let mut points: Vec<Vec<Value>> = Vec::new();
    let mut idx = vec![0usize; vars as usize];
    loop {
        points.push(idx.iter().map(|&i| i as Value).collect());
        if !next_tuple(&mut idx, m.size()) {
            break;
        }
    }
    let mut stack = Vec::new();
    formulas
        .iter()
        .map(|f| {
            let code = Compiled::with_vars(f, &slots_vars);
            points.iter().all(|p| m.is_designated(code.eval(m, p, &mut stack)))
        })
        .collect()
}

fn subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

/// Exact comparison with a bounded fallback when the closure gives up.
fn compare_with_fallback(m1: &Matrix, m2: &Matrix, budget: &Budget) -> Result<CompareVerdict, MatrixError> {
    let v = compare(m1, m2, CompareMode::Exact, budget)?;
    if v.answer != Answer::Unknown || budget.exact_only {
        return Ok(v);
    }
    let b = compare(m1, m2, CompareMode::Bounded { depth: 3, vars: 2 }, budget)?;
    Ok(if b.answer == Answer::Yes { b } else { v })
}

/// Evidence that `below` has strictly fewer tautologies than `above`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domination {
    pub below: usize,
    pub above: usize,
    /// Why `Taut(below) ⊆ Taut(above)`.
    pub inclusion: CompareProof,
    /// A tautology of `above` that `below` falsifies.
    pub strict: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalCovers {
    pub values: usize,
    /// All covers considered, in enumeration order.
    pub covers: Vec<Matrix>,
    /// Indices into `covers` of the minimal ones.
    pub minimal: Vec<usize>,
    /// For each non-minimal cover, one cover strictly below it.
    pub dominated: Vec<Domination>,
    /// Pairs `(i, j)` where it stayed open whether `covers[j]` is strictly
    /// below `covers[i]`.
    pub unknown: Vec<(usize, usize)>,
    pub truncated: bool,
}

impl MinimalCovers {
    /// Minimality holds outright only without open comparisons.
    pub fn modulo_budget(&self) -> bool {
        !self.unknown.is_empty()
    }

    pub fn minimal_matrices(&self) -> Vec<&Matrix> {
        self.minimal.iter().map(|&i| &self.covers[i]).collect()
    }
}

/// The ⊴-minimal m-valued covers. Bounded tautology sets (depth 3, two
/// variables) rule out most pairs; the rest go to `compare`.
pub fn minimal_covers(
    c: &Calculus,
    m: usize,
    options: EnumOptions,
    budget: &Budget,
) -> Result<MinimalCovers, MatrixError> {
    let (found, truncated, _) = search_covers(c, m, options, budget, &|_| true, None);
    let covers: Vec<Matrix> = found.into_iter().map(|cv| cv.matrix).collect();
    let probes = probe_formulas(c.sig(), 3, 2, 200_000);
    let fps: Vec<Vec<bool>> = {
        use rayon::prelude::*;
        covers.par_iter().map(|mat| bounded_tautologies(mat, &probes, 2)).collect()
    };
    let n = covers.len();
    let mut dominated: Vec<Option<Domination>> = vec![None; n];
    let mut unknown = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || dominated[i].is_some() || !subset(&fps[j], &fps[i]) {
                continue;
            }
            // is Taut(covers[j]) a proper subset of Taut(covers[i])?
            let inclusion = compare_with_fallback(&covers[i], &covers[j], budget)?;
            match inclusion.answer {
                Answer::Yes => continue,
                Answer::Unknown => {
                    unknown.push((i, j));
                    continue;
                }
                Answer::No => {}
            }
            let strict = if fps[j] != fps[i] {
                let k = (0..probes.len()).find(|&k| fps[i][k] && !fps[j][k]).unwrap();
                Some(probes[k].clone())
            } else {
                let v = compare_with_fallback(&covers[j], &covers[i], budget)?;
                match v.answer {
                    Answer::Yes => v.witness().cloned(),
                    Answer::No => None,
                    Answer::Unknown => {
                        unknown.push((i, j));
                        None
                    }
                }
            };
            if let Some(strict) = strict {
                dominated[i] = Some(Domination {
                    below: j,
                    above: i,
                    inclusion: inclusion.proof,
                    strict,
                });
            }
        }
    }
    let minimal = (0..n).filter(|&i| dominated[i].is_none()).collect();
    let unknown = unknown.into_iter().filter(|&(i, _)| dominated[i].is_none()).collect();
    Ok(MinimalCovers {
        values: m,
        covers,
        minimal,
        dominated: dominated.into_iter().flatten().collect(),
        unknown,
        truncated,
    })
}

/// A cover of a calculus that falsifies a formula: the formula is not
/// derivable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FalsificationCertificate {
    pub calculus: Calculus,
    pub formula: Formula,
    pub matrix: Matrix,
    pub report: CoverReport,
    pub valuation: Valuation,
}

impl FalsificationCertificate {
    /// Recomputes the cover report and the falsifying value.
    pub fn check(&self) -> Result<(), String> {
        let report = check_strong_soundness(&self.calculus, &self.matrix).map_err(|e| e.to_string())?;
        if !report.is_cover() {
            return Err(format!(
                "not a cover: axioms {:?}, rules {:?}",
                report.failing_axioms(),
                report.failing_rules()
            ));
        }
        if report != self.report {
            return Err("stored cover report differs from the recomputed one".into());
        }
        let v = self.matrix.evaluate(&self.formula, &self.valuation).map_err(|e| e.to_string())?;
        if self.matrix.is_designated(v) {
            return Err(format!("the valuation designates the formula (value {})", self.matrix.label(v)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum FalsifyOutcome {
    Found(Box<FalsificationCertificate>),
    /// Every cover met within the budget validates the formula.
    Unknown { max_values: usize, truncated: bool, nodes: u64 },
}

/// Searches covers with `1..=max_values` values for one falsifying `f`.
pub fn falsify(c: &Calculus, f: &Formula, max_values: usize, budget: &Budget) -> Result<FalsifyOutcome, MatrixError> {
    if !f.is_over(c.sig()) {
        return Err(MatrixError::SignatureMismatch {
            left: c.sig().header(),
            right: "formula".into(),
        });
    }
    let options = EnumOptions {
        include_trivial: false,
        include_empty: true,
    };
    let mut truncated = false;
    let mut nodes = 0;
    for m in 1..=max_values {
        let keep = |mat: &Matrix| !mat.is_tautology(f);
        let (found, trunc, n) = search_covers(c, m, options, budget, &keep, Some(1));
        truncated |= trunc;
        nodes += n;
        if let Some(cover) = found.into_iter().next() {
            let matrix = cover.matrix;
            let valuation = matrix.countermodel(f).expect("kept covers falsify the formula");
            let report = check_strong_soundness(c, &matrix)?;
            return Ok(FalsifyOutcome::Found(Box::new(FalsificationCertificate {
                calculus: c.clone(),
                formula: f.clone(),
                matrix,
                report,
                valuation,
            })));
        }
    }
    Ok(FalsifyOutcome::Unknown {
        max_values,
        truncated,
        nodes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSequence {
    /// Non-trivial covers in enumeration order.
    pub factors: Vec<Matrix>,
    /// Running products of the factors.
    pub elements: Vec<Matrix>,
    /// Fewer than the requested number of covers were found.
    pub short: bool,
    pub truncated: bool,
}

/// Running products of the first `k` non-trivial covers (values ascending
/// up to `max_values`).
pub fn mc_sequence(c: &Calculus, k: usize, max_values: usize, budget: &Budget) -> Result<McSequence, MatrixError> {
    let options = EnumOptions {
        include_trivial: false,
        include_empty: false,
    };
    let mut factors: Vec<Matrix> = Vec::new();
    let mut truncated = false;
    for m in 1..=max_values {
        if factors.len() >= k {
            break;
        }
        let (found, trunc, _) = search_covers(c, m, options, budget, &|_| true, Some(k - factors.len()));
        truncated |= trunc;
        factors.extend(found.into_iter().map(|cv| cv.matrix));
    }
    let mut elements: Vec<Matrix> = Vec::with_capacity(factors.len());
    for f in &factors {
        let next = match elements.last() {
            None => f.clone(),
            Some(prev) => product(prev, f)?.with_name(format!("mc{}", elements.len() + 1)),
        };
        elements.push(next);
    }
    Ok(McSequence {
        short: factors.len() < k,
        factors,
        elements,
        truncated,
    })
}

/// Whether `Taut(next) ⊆ Taut(prev)` for neighbouring matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub index: usize,
    pub included: Answer,
    pub inclusion: CompareProof,
    /// `Yes` when the inclusion is proper; absent unless requested.
    pub strict: Option<Answer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub formula: Formula,
    /// First matrix falsifying the probe, with the valuation.
    pub refuted_by: Option<(usize, Valuation)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequentialReport {
    pub covers: Vec<CoverReport>,
    pub chain: Vec<ChainLink>,
    pub probes: Vec<ProbeResult>,
}

impl SequentialReport {
    pub fn all_covers(&self) -> bool {
        self.covers.iter().all(|r| r.is_cover())
    }

    pub fn chain_holds(&self) -> Answer {
        if self.chain.iter().any(|l| l.included == Answer::No) {
            Answer::No
        } else if self.chain.iter().all(|l| l.included == Answer::Yes) {
            Answer::Yes
        } else {
            Answer::Unknown
        }
    }

    pub fn unrefuted(&self) -> Vec<&Formula> {
        self.probes.iter().filter(|p| p.refuted_by.is_none()).map(|p| &p.formula).collect()
    }
}

/// Checks that every matrix covers `c`, that tautology sets descend along
/// the list, and which probes some matrix refutes.
pub fn sequential_approximation_check(
    c: &Calculus,
    matrices: &[Matrix],
    probes: &[Formula],
    strictness: bool,
    budget: &Budget,
) -> Result<SequentialReport, MatrixError> {
    let covers = matrices
        .iter()
        .map(|m| check_strong_soundness(c, m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut chain = Vec::new();
    for i in 0..matrices.len().saturating_sub(1) {
        let (prev, next) = (&matrices[i], &matrices[i + 1]);
        let v = compare_with_fallback(prev, next, budget)?;
        let included = match v.answer {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
            Answer::Unknown => Answer::Unknown,
        };
        let strict = if strictness {
            Some(compare_with_fallback(next, prev, budget)?.answer)
        } else {
            None
        };
        chain.push(ChainLink {
            index: i,
            included,
            inclusion: v.proof,
            strict,
        });
    }
    let probes = probes
        .iter()
        .map(|f| ProbeResult {
            formula: f.clone(),
            refuted_by: matrices
                .iter()
                .enumerate()
                .find_map(|(i, m)| m.countermodel(f).map(|v| (i, v))),
        })
        .collect();
    Ok(SequentialReport { covers, chain, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{ipc, ipc_minus, kcalc_without_r2};
    use crate::matrix::{bernays, find_embedding, godel};
    use crate::syntax::parse_formula;

    #[test]
    fn bernays_certificate_for_a10() {
        let c = ipc_minus("a10").unwrap();
        let a10 = ipc().axiom("a10").unwrap().formula.clone();
        let FalsifyOutcome::Found(cert) = falsify(&c, &a10, 2, &Budget::default()).unwrap() else {
            panic!("expected a certificate");
        };
        cert.check().unwrap();
        let b = bernays();
        assert!(find_embedding(&cert.matrix, &b).is_some() && cert.matrix.size() == 2);
    }

    #[test]
    fn axioms_are_never_falsified() {
        let c = ipc();
        let a1 = c.axiom("a1").unwrap().formula.clone();
        assert!(matches!(
            falsify(&c, &a1, 2, &Budget::default()).unwrap(),
            FalsifyOutcome::Unknown { truncated: false, .. }
        ));
    }

    #[test]
    fn mc_sequence_sizes_multiply() {
        let s = mc_sequence(&kcalc_without_r2(), 3, 3, &Budget::default()).unwrap();
        assert_eq!(s.elements.len(), 3);
        let mut size = 1;
        for (f, e) in s.factors.iter().zip(&s.elements) {
            size *= f.size();
            assert_eq!(e.size(), size);
        }
    }

    #[test]
    fn godel_chain_keeps_linearity() {
        let ms: Vec<Matrix> = (2..=4).map(|m| godel(m).unwrap()).collect();
        let sig = ms[0].sig().clone();
        let lin = parse_formula("or(imp(X1, X2), imp(X2, X1))", &sig).unwrap();
        let dn = parse_formula("imp(neg(neg(X1)), X1)", &sig).unwrap();
        let r = sequential_approximation_check(&ipc(), &ms, &[lin, dn], false, &Budget::default()).unwrap();
        assert!(r.all_covers());
        assert_eq!(r.chain_holds(), Answer::Yes);
        assert_eq!(r.probes[0].refuted_by, None);
        assert_eq!(r.probes[1].refuted_by.as_ref().unwrap().0, 1);
    }

    #[test]
    fn minimal_two_valued_kcalc_cover_refutes_self_similarity() {
        let c = kcalc_without_r2();
        let mc = minimal_covers(&c, 2, EnumOptions { include_trivial: false, include_empty: false }, &Budget::default()).unwrap();
        assert!(!mc.minimal.is_empty());
        let f = parse_formula("sim(next(X1), X1)", c.sig()).unwrap();
        assert!(mc.minimal_matrices().iter().any(|m| !m.is_tautology(&f)));
    }
}
