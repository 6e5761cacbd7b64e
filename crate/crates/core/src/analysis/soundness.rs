//! Strong soundness (covers) and t-soundness.

use serde::{Deserialize, Serialize};

use crate::analysis::closure::{generating_set, points, ClosureEnd, FunctionClosure};
use crate::analysis::{Answer, Budget};
use crate::calculus::{Calculus, Rule};
use crate::matrix::{Compiled, Matrix, MatrixError, Valuation, Value};
use crate::syntax::{Formula, Substitution};
use crate::util::next_tuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Cover,
    NotCover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomResult {
    pub name: String,
    pub tautology: bool,
    pub countermodel: Option<Valuation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleResult {
    pub name: String,
    /// First valuation designating every premise but not the conclusion.
    pub violation: Option<Valuation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub verdict: Verdict,
    pub axioms: Vec<AxiomResult>,
    pub rules: Vec<RuleResult>,
}

impl CoverReport {
    pub fn is_cover(&self) -> bool {
        self.verdict == Verdict::Cover
    }

    pub fn failing_axioms(&self) -> Vec<&str> {
        self.axioms.iter().filter(|a| !a.tautology).map(|a| a.name.as_str()).collect()
    }

    pub fn failing_rules(&self) -> Vec<&str> {
        self.rules
            .iter()
            .filter(|r| r.violation.is_some())
            .map(|r| r.name.as_str())
            .collect()
    }
}

/// The first valuation (lexicographic over the rule's variables) that
/// designates all premises and not the conclusion.
pub fn rule_violation(m: &Matrix, r: &Rule) -> Option<Valuation> {
    let vars: Vec<u32> = r.vars().into_iter().collect();
    let premises: Vec<Compiled> = r.premises.iter().map(|p| Compiled::with_vars(p, &vars)).collect();
    let conclusion = Compiled::with_vars(&r.conclusion, &vars);
    let mut idx = vec![0usize; vars.len()];
    let mut slots = vec![0 as Value; vars.len()];
    let mut stack = Vec::new();
    loop {
        for (s, &i) in slots.iter_mut().zip(&idx) {
            *s = i as Value;
        }
        if premises.iter().all(|p| m.is_designated(p.eval(m, &slots, &mut stack)))
            && !m.is_designated(conclusion.eval(m, &slots, &mut stack))
        {
            return Some(vars.iter().copied().zip(slots.iter().copied()).collect());
        }
        if !next_tuple(&mut idx, m.size()) {
            return None;
        }
    }
}

/// Truth-table test of strong soundness.
pub fn check_strong_soundness(c: &Calculus, m: &Matrix) -> Result<CoverReport, MatrixError> {
    m.check_signature(c.sig())?;
    let axioms: Vec<AxiomResult> = c
        .axioms()
        .iter()
        .map(|a| {
            let countermodel = m.countermodel(&a.formula);
            AxiomResult {
                name: a.name.clone(),
                tautology: countermodel.is_none(),
                countermodel,
            }
        })
        .collect();
    let rules: Vec<RuleResult> = c
        .rules()
        .iter()
        .map(|r| RuleResult {
            name: r.name.clone(),
            violation: rule_violation(m, r),
        })
        .collect();
    let ok = axioms.iter().all(|a| a.tautology) && rules.iter().all(|r| r.violation.is_none());
    Ok(CoverReport {
        verdict: if ok { Verdict::Cover } else { Verdict::NotCover },
        axioms,
        rules,
    })
}

/// A rule instance whose premises are tautologies and whose conclusion is
/// not, or (with `axiom` set) an axiom that is not a tautology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TViolation {
    pub rule: String,
    pub axiom: bool,
    pub substitution: Substitution,
    /// Falsifies the instantiated conclusion.
    pub valuation: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TSoundness {
    pub answer: Answer,
    pub violation: Option<TViolation>,
    /// Values whose generated functions were closed over.
    pub generators: Vec<Value>,
    pub closure_size: usize,
    pub saturated: bool,
}

/// Decides whether every axiom is a tautology and every rule maps
/// tautological premise instances to tautological conclusions.
///
/// Substitution instances only matter through the functions they define.
/// Any violating instance can be rewritten so that every formula is over
/// `k` variables standing for a generating set of `m` (replace each
/// variable by a term taking its countermodel value at the generators), so
/// it suffices to close the `k` projections of `m^k` under the tables.
pub fn check_t_soundness(c: &Calculus, m: &Matrix, budget: &Budget) -> Result<TSoundness, MatrixError> {
    m.check_signature(c.sig())?;
    let gens = generating_set(m);
    for a in c.axioms() {
        if let Some(valuation) = m.countermodel(&a.formula) {
            return Ok(TSoundness {
                answer: Answer::No,
                violation: Some(TViolation {
                    rule: a.name.clone(),
                    axiom: true,
                    substitution: Substitution::new(),
                    valuation,
                }),
                generators: gens,
                closure_size: 0,
                saturated: false,
            });
        }
    }
    let k = gens.len();
    let pts = points(m.size(), k);
    let unknown = |size| TSoundness {
        answer: Answer::Unknown,
        violation: None,
        generators: gens.clone(),
        closure_size: size,
        saturated: false,
    };
    let width = pts.len();
    let Some(mut closure) = FunctionClosure::new(&[m], vec![0; width], budget.closure_cap) else {
        return Ok(unknown(0));
    };
    let projections: Vec<Vec<u8>> = (0..k).map(|j| pts.iter().map(|p| p[j] as u8).collect()).collect();
    let end = closure.run(&projections, &mut |_| false, budget.deadline());
    let saturated = end == ClosureEnd::Saturated;

    let designated: Vec<bool> = (0..m.size() as Value).map(|v| m.is_designated(v)).collect();
    let taut: Vec<bool> = (0..closure.len() as u32)
        .map(|id| closure.get(id).iter().all(|&v| designated[v as usize]))
        .collect();
    for r in c.rules() {
        if let Some((bind, point)) = find_violation(&closure, r, &taut, &designated) {
            let substitution: Substitution = bind.iter().map(|&(x, id)| (x, closure.formula(id))).collect();
            let valuation: Valuation = (0..k).map(|j| (j as u32 + 1, pts[point][j])).collect();
            return Ok(TSoundness {
                answer: Answer::No,
                violation: Some(TViolation {
                    rule: r.name.clone(),
                    axiom: false,
                    substitution,
                    valuation,
                }),
                generators: gens,
                closure_size: closure.len(),
                saturated,
            });
        }
    }
    if saturated {
        Ok(TSoundness {
            answer: Answer::Yes,
            violation: None,
            generators: gens,
            closure_size: closure.len(),
            saturated,
        })
    } else {
        Ok(unknown(closure.len()))
    }
}

/// Backtracks over assignments of closure elements to the rule variables,
/// checking each premise as soon as its variables are bound.
fn find_violation(
    closure: &FunctionClosure,
    r: &Rule,
    taut: &[bool],
    designated: &[bool],
) -> Option<(Vec<(u32, u32)>, usize)> {
    let vars: Vec<u32> = r.vars().into_iter().collect();
    // premise i becomes checkable once vars[..ready[i]] are bound
    let ready: Vec<usize> = r
        .premises
        .iter()
        .map(|p| {
            p.vars()
                .iter()
                .map(|x| vars.iter().position(|v| v == x).unwrap() + 1)
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut bind: Vec<(u32, u32)> = Vec::new();
    search(closure, r, &vars, &ready, taut, designated, &mut bind)
}

fn premise_is_taut(closure: &FunctionClosure, p: &Formula, bind: &[(u32, u32)], designated: &[bool]) -> bool {
    if let Formula::Var(x) = p {
        let id = bind.iter().find(|(v, _)| v == x).unwrap().1;
        return closure.get(id).iter().all(|&v| designated[v as usize]);
    }
    let mut out = Vec::new();
    closure.eval_pattern(p, &|x| bind.iter().find(|(v, _)| *v == x).unwrap().1, &mut out);
    out.iter().all(|&v| designated[v as usize])
}

fn search(
    closure: &FunctionClosure,
    r: &Rule,
    vars: &[u32],
    ready: &[usize],
    taut: &[bool],
    designated: &[bool],
    bind: &mut Vec<(u32, u32)>,
) -> Option<(Vec<(u32, u32)>, usize)> {
    let level = bind.len();
    // premises that just became fully bound
    for (p, &rd) in r.premises.iter().zip(ready) {
        if rd == level && !premise_is_taut(closure, p, bind, designated) {
            return None;
        }
    }
    if level == vars.len() {
        let mut out = Vec::new();
        closure.eval_pattern(&r.conclusion, &|x| bind.iter().find(|(v, _)| *v == x).unwrap().1, &mut out);
        return out
            .iter()
            .position(|&v| !designated[v as usize])
            .map(|point| (bind.clone(), point));
    }
    let x = vars[level];
    for id in 0..closure.len() as u32 {
        // a variable that is itself a premise must be a tautology
        if r.premises.iter().any(|p| p == &Formula::Var(x)) && !taut[id as usize] {
            continue;
        }
        bind.push((x, id));
        if let Some(found) = search(closure, r, vars, ready, taut, designated, bind) {
            return Some(found);
        }
        bind.pop();
    }
    None
}
