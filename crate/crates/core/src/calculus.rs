//! Hilbert-type calculi: derivations, strict analyticity and a saturation
//! prover.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{builtin_signature, match_formula, parse_formula, Formula, OpId, Signature, Substitution};
use crate::util::next_tuple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("formula `{0}` is not over the calculus signature")]
    IllFormed(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("rule `{0}` has no premises")]
    NoPremises(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub name: String,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl Rule {
    pub fn vars(&self) -> BTreeSet<u32> {
        let mut vs = self.conclusion.vars();
        for p in &self.premises {
            vs.extend(p.vars());
        }
        vs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calculus {
    name: String,
    sig: Signature,
    axioms: Vec<Axiom>,
    rules: Vec<Rule>,
}

impl Calculus {
    pub fn new<S: Into<String>>(
        name: S,
        sig: Signature,
        axioms: Vec<Axiom>,
        rules: Vec<Rule>,
    ) -> Result<Self, CalculusError> {
        let mut names = BTreeSet::new();
        for a in &axioms {
            if !a.formula.is_over(&sig) {
                return Err(CalculusError::IllFormed(format!("{:?}", a.formula)));
            }
            if !names.insert(a.name.clone()) {
                return Err(CalculusError::DuplicateName(a.name.clone()));
            }
        }
        for r in &rules {
            if r.premises.is_empty() {
                return Err(CalculusError::NoPremises(r.name.clone()));
            }
            for f in r.premises.iter().chain([&r.conclusion]) {
                if !f.is_over(&sig) {
                    return Err(CalculusError::IllFormed(format!("{f:?}")));
                }
            }
            if !names.insert(r.name.clone()) {
                return Err(CalculusError::DuplicateName(r.name.clone()));
            }
        }
        Ok(Calculus {
            name: name.into(),
            sig,
            axioms,
            rules,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn axiom(&self, name: &str) -> Option<&Axiom> {
        self.axioms.iter().find(|a| a.name == name)
    }

    /// A copy without the named axiom.
    pub fn without_axiom(&self, name: &str) -> Option<Calculus> {
        self.axiom(name)?;
        let mut c = self.clone();
        c.axioms.retain(|a| a.name != name);
        c.name = format!("{}_minus_{}", self.name, name);
        Some(c)
    }

    /// A copy without the named rule.
    pub fn without_rule(&self, name: &str) -> Option<Calculus> {
        self.rules.iter().find(|r| r.name == name)?;
        let mut c = self.clone();
        c.rules.retain(|r| r.name != name);
        c.name = format!("{}_no_{}", self.name, name);
        Some(c)
    }

    pub fn with_name<S: Into<String>>(mut self, name: S) -> Self {
        self.name = name.into();
        self
    }
}

// ---------------------------------------------------------------------------
// Derivations

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum Justification {
    Axiom { axiom: usize, subst: Substitution },
    Rule { rule: usize, subst: Substitution, premises: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

impl Derivation {
    /// The formula proved by the last step.
    pub fn conclusion(&self) -> Option<&Formula> {
        self.steps.last().map(|s| &s.formula)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {reason}")]
pub struct DerivationError {
    pub step: usize,
    pub reason: String,
}

pub fn check_derivation(c: &Calculus, d: &Derivation) -> Result<(), DerivationError> {
    for (i, step) in d.steps.iter().enumerate() {
        let fail = |reason: String| Err(DerivationError { step: i, reason });
        if !step.formula.is_over(&c.sig) {
            return fail("formula is not over the signature".into());
        }
        match &step.justification {
            Justification::Axiom { axiom, subst } => {
                let Some(a) = c.axioms.get(*axiom) else {
                    return fail(format!("no axiom {axiom}"));
                };
                if a.formula.substitute(subst) != step.formula {
                    return fail(format!("not an instance of axiom {}", a.name));
                }
            }
            Justification::Rule { rule, subst, premises } => {
                let Some(r) = c.rules.get(*rule) else {
                    return fail(format!("no rule {rule}"));
                };
                if premises.len() != r.premises.len() {
                    return fail(format!("rule {} takes {} premises", r.name, r.premises.len()));
                }
                for (pat, &j) in r.premises.iter().zip(premises) {
                    if j >= i {
                        return fail(format!("premise {j} does not precede the step"));
                    }
                    if pat.substitute(subst) != d.steps[j].formula {
                        return fail(format!("step {j} is not the required premise of {}", r.name));
                    }
                }
                if r.conclusion.substitute(subst) != step.formula {
                    return fail(format!("not the conclusion of {}", r.name));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Strict analyticity

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// A premise variable that does not occur in the conclusion.
    MissingVariable { var: u32 },
    Depth { premise: usize, conclusion: usize },
    VariableDepth { var: u32, premise: usize, conclusion: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyticityViolation {
    pub rule: String,
    pub premise: usize,
    pub kind: ViolationKind,
}

/// Checks one premise against the conclusion. Equivalent to requiring
/// `vars(pσ) ⊆ vars(cσ)` and `depth(pσ) <= depth(cσ)` for every substitution σ.
fn premise_violation(p: &Formula, c: &Formula) -> Option<ViolationKind> {
    let cv = c.vars();
    for x in p.vars() {
        if !cv.contains(&x) {
            return Some(ViolationKind::MissingVariable { var: x });
        }
    }
    if p.depth() > c.depth() {
        return Some(ViolationKind::Depth {
            premise: p.depth(),
            conclusion: c.depth(),
        });
    }
    for x in p.vars() {
        let (dp, dc) = (p.max_var_depth(x).unwrap(), c.max_var_depth(x).unwrap());
        if dp > dc {
            return Some(ViolationKind::VariableDepth {
                var: x,
                premise: dp,
                conclusion: dc,
            });
        }
    }
    None
}

pub fn rule_analyticity_violation(r: &Rule) -> Option<AnalyticityViolation> {
    r.premises.iter().enumerate().find_map(|(i, p)| {
        premise_violation(p, &r.conclusion).map(|kind| AnalyticityViolation {
            rule: r.name.clone(),
            premise: i,
            kind,
        })
    })
}

/// The first rule premise breaking strict analyticity, if any.
pub fn analyticity_violation(c: &Calculus) -> Option<AnalyticityViolation> {
    c.rules.iter().find_map(rule_analyticity_violation)
}

pub fn is_strictly_analytic(c: &Calculus) -> bool {
    analyticity_violation(c).is_none()
}

// ---------------------------------------------------------------------------
// Interned terms

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Term {
    Var(u32),
    App(OpId, Box<[u32]>),
}

/// Hash-consed formulas: equal formulas get equal ids.
#[derive(Debug, Default)]
struct TermStore {
    nodes: Vec<Term>,
    depth: Vec<u32>,
    index: HashMap<Term, u32>,
}

impl TermStore {
    fn intern(&mut self, t: Term) -> u32 {
        if let Some(&id) = self.index.get(&t) {
            return id;
        }
        let d = match &t {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|&a| self.depth[a as usize] + 1).max().unwrap_or(0),
        };
        let id = self.nodes.len() as u32;
        self.nodes.push(t.clone());
        self.depth.push(d);
        self.index.insert(t, id);
        id
    }

    fn lookup_formula(&self, f: &Formula) -> Option<u32> {
        let t = match f {
            Formula::Var(x) => Term::Var(*x),
            Formula::App(op, args) => Term::App(
                *op,
                args.iter().map(|a| self.lookup_formula(a)).collect::<Option<Box<[u32]>>>()?,
            ),
        };
        self.index.get(&t).copied()
    }

    fn formula(&self, id: u32) -> Formula {
        match &self.nodes[id as usize] {
            Term::Var(x) => Formula::Var(*x),
            Term::App(op, args) => Formula::app(*op, args.iter().map(|&a| self.formula(a)).collect()),
        }
    }

    fn depth(&self, id: u32) -> usize {
        self.depth[id as usize] as usize
    }

    /// Instantiates a pattern; `None` if a variable is unbound.
    fn instantiate(&mut self, pat: &Formula, b: &Binding) -> Option<u32> {
        match pat {
            Formula::Var(x) => b.get(*x),
            Formula::App(op, args) => {
                let ids = args
                    .iter()
                    .map(|a| self.instantiate(a, b))
                    .collect::<Option<Box<[u32]>>>()?;
                Some(self.intern(Term::App(*op, ids)))
            }
        }
    }

    /// Like `instantiate` but never creates terms.
    fn find_instance(&self, pat: &Formula, b: &Binding) -> Option<u32> {
        match pat {
            Formula::Var(x) => b.get(*x),
            Formula::App(op, args) => {
                let ids = args
                    .iter()
                    .map(|a| self.find_instance(a, b))
                    .collect::<Option<Box<[u32]>>>()?;
                self.index.get(&Term::App(*op, ids)).copied()
            }
        }
    }

    fn matches(&self, pat: &Formula, id: u32, b: &mut Binding) -> bool {
        match pat {
            Formula::Var(x) => match b.get(*x) {
                Some(bound) => bound == id,
                None => {
                    b.0.push((*x, id));
                    true
                }
            },
            Formula::App(op, args) => match &self.nodes[id as usize] {
                Term::App(top, targs) if top == op && targs.len() == args.len() => {
                    args.iter().zip(targs.iter()).all(|(p, &t)| self.matches(p, t, b))
                }
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Binding(Vec<(u32, u32)>);

impl Binding {
    fn get(&self, x: u32) -> Option<u32> {
        self.0.iter().find(|(v, _)| *v == x).map(|&(_, id)| id)
    }
}

/// Extends `levels` (terms over `vars` grouped by exact depth) up to
/// `depth`. Fails when more than `cap` terms would be needed.
fn extend_levels(
    store: &mut TermStore,
    sig: &Signature,
    vars: &[u32],
    levels: &mut Vec<Vec<u32>>,
    depth: usize,
    cap: usize,
) -> bool {
    let mut total: usize = levels.iter().map(Vec::len).sum();
    if levels.is_empty() {
        let mut level0: Vec<u32> = vars.iter().map(|&x| store.intern(Term::Var(x))).collect();
        level0.extend(
            sig.ops()
                .filter(|&op| sig.arity(op) == 0)
                .map(|op| store.intern(Term::App(op, Box::new([])))),
        );
        total = level0.len();
        levels.push(level0);
        if total > cap {
            return false;
        }
    }
    for d in levels.len()..=depth {
        let below: Vec<u32> = levels.iter().flatten().copied().collect();
        let mut level = Vec::new();
        for op in sig.ops() {
            let k = sig.arity(op);
            if k == 0 {
                continue;
            }
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| store.depth(below[i]) == d - 1) {
                    total += 1;
                    if total > cap {
                        return false;
                    }
                    let args: Box<[u32]> = idx.iter().map(|&i| below[i]).collect();
                    level.push(store.intern(Term::App(op, args)));
                }
                if !next_tuple(&mut idx, below.len()) {
                    break;
                }
            }
        }
        levels.push(level);
    }
    true
}

// ---------------------------------------------------------------------------
// Saturation

#[derive(Debug, Clone)]
enum Provenance {
    Axiom { axiom: usize, binding: Binding },
    Rule { rule: usize, binding: Binding, premises: Vec<u32> },
}

/// The depth-bounded closure of a calculus over a fixed set of variables.
#[derive(Debug)]
pub struct Saturation {
    store: TermStore,
    order: Vec<u32>,
    proof: HashMap<u32, Provenance>,
    complete: bool,
    max_depth: usize,
}

/// Bounds for [`saturate_with`].
#[derive(Debug, Clone)]
pub struct SaturationConfig {
    pub max_depth: usize,
    pub vars: Vec<u32>,
    /// Maximum number of derived formulas (and auxiliary terms).
    pub node_cap: usize,
}

impl Saturation {
    /// `false` if the node budget ran out before the fixed point.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.store.lookup_formula(f).is_some_and(|id| self.proof.contains_key(&id))
    }

    /// Derived formulas in the order they were added.
    pub fn formulas(&self) -> Vec<Formula> {
        self.order.iter().map(|&id| self.store.formula(id)).collect()
    }

    /// A derivation ending in `f`, if `f` was derived.
    pub fn derivation(&self, f: &Formula) -> Option<Derivation> {
        let target = self.store.lookup_formula(f)?;
        self.proof.get(&target)?;
        let mut steps = Vec::new();
        let mut at: HashMap<u32, usize> = HashMap::new();
        self.emit(target, &mut steps, &mut at);
        Some(Derivation { steps })
    }

    fn subst(&self, b: &Binding) -> Substitution {
        b.0.iter().map(|&(x, id)| (x, self.store.formula(id))).collect()
    }

    fn emit(&self, id: u32, steps: &mut Vec<Step>, at: &mut HashMap<u32, usize>) -> usize {
        if let Some(&i) = at.get(&id) {
            return i;
        }
        let justification = match &self.proof[&id] {
            Provenance::Axiom { axiom, binding } => Justification::Axiom {
                axiom: *axiom,
                subst: self.subst(binding),
            },
            Provenance::Rule { rule, binding, premises } => {
                let premises = premises.iter().map(|&p| self.emit(p, steps, at)).collect();
                Justification::Rule {
                    rule: *rule,
                    subst: self.subst(binding),
                    premises,
                }
            }
        };
        steps.push(Step {
            formula: self.store.formula(id),
            justification,
        });
        at.insert(id, steps.len() - 1);
        steps.len() - 1
    }
}

/// Saturates over `X1..X{var_pool}`.
pub fn saturate(c: &Calculus, max_depth: usize, var_pool: u32, node_cap: usize) -> Saturation {
    saturate_with(
        c,
        &SaturationConfig {
            max_depth,
            vars: (1..=var_pool).collect(),
            node_cap,
        },
    )
}

struct Saturator<'a> {
    c: &'a Calculus,
    cfg: &'a SaturationConfig,
    sat: Saturation,
    levels: Vec<Vec<u32>>,
    by_root: HashMap<OpId, Vec<u32>>,
    by_first: HashMap<(OpId, u32), Vec<u32>>,
    round_of: HashMap<u32, usize>,
    pending: Vec<(u32, Provenance)>,
    over_budget: bool,
}

/// Where a premise may be matched from during a semi-naive round.
#[derive(Clone, Copy, PartialEq)]
enum Source {
    Delta,
    Any,
}

pub fn saturate_with(c: &Calculus, cfg: &SaturationConfig) -> Saturation {
    let mut s = Saturator {
        c,
        cfg,
        sat: Saturation {
            store: TermStore::default(),
            order: Vec::new(),
            proof: HashMap::new(),
            complete: true,
            max_depth: cfg.max_depth,
        },
        levels: Vec::new(),
        by_root: HashMap::new(),
        by_first: HashMap::new(),
        round_of: HashMap::new(),
        pending: Vec::new(),
        over_budget: false,
    };
    s.run();
    s.sat
}

impl Saturator<'_> {
    fn run(&mut self) {
        for (ai, a) in self.c.axioms.iter().enumerate() {
            self.axiom_instances(ai, &a.formula);
            if self.over_budget {
                break;
            }
        }
        let mut round = 0;
        let mut delta = self.commit(round);
        while !delta.is_empty() && !self.over_budget {
            for (ri, r) in self.c.rules.iter().enumerate() {
                for i in 0..r.premises.len() {
                    let mut order: Vec<usize> = (0..r.premises.len()).filter(|&j| j != i).collect();
                    order.sort_by_key(|&j| r.premises[j].as_var().is_some());
                    order.insert(0, i);
                    self.match_premises(ri, &order, 0, &mut Binding::default(), &mut Vec::new(), round);
                    if self.over_budget {
                        break;
                    }
                }
            }
            round += 1;
            delta = self.commit(round);
        }
        self.sat.complete = !self.over_budget;
    }

    /// Terms that may be substituted for a variable occurring at depth `at`.
    fn candidates_for(&mut self, at: usize) -> Option<Vec<u32>> {
        let room = self.cfg.max_depth.checked_sub(at)?;
        if !extend_levels(
            &mut self.sat.store,
            &self.c.sig,
            &self.cfg.vars,
            &mut self.levels,
            room,
            self.cfg.node_cap,
        ) {
            self.over_budget = true;
            return None;
        }
        Some(self.levels[..=room].iter().flatten().copied().collect())
    }

    fn axiom_instances(&mut self, ai: usize, a: &Formula) {
        if a.depth() > self.cfg.max_depth {
            return;
        }
        let vars: Vec<u32> = a.vars().into_iter().collect();
        let mut pools = Vec::new();
        for &x in &vars {
            match self.candidates_for(a.max_var_depth(x).unwrap()) {
                Some(p) => pools.push(p),
                None => return,
            }
        }
        self.for_each_binding(&vars, &pools, Binding::default(), |s, b| {
            let id = s.sat.store.instantiate(a, &b).unwrap();
            s.add(id, Provenance::Axiom { axiom: ai, binding: b });
        });
    }

    fn for_each_binding(
        &mut self,
        vars: &[u32],
        pools: &[Vec<u32>],
        base: Binding,
        mut f: impl FnMut(&mut Self, Binding),
    ) {
        if pools.iter().any(Vec::is_empty) {
            return;
        }
        let mut idx = vec![0usize; vars.len()];
        loop {
            let mut b = base.clone();
            for (k, &x) in vars.iter().enumerate() {
                b.0.push((x, pools[k][idx[k]]));
            }
            f(self, b);
            if self.over_budget || !advance(&mut idx, pools) {
                return;
            }
        }
    }

    fn candidates(&self, pat: &Formula, b: &Binding) -> Vec<u32> {
        if let Some(id) = self.sat.store.find_instance(pat, b) {
            return if self.round_of.contains_key(&id) { vec![id] } else { vec![] };
        }
        match pat {
            Formula::Var(_) => self.sat.order.clone(),
            Formula::App(op, args) => {
                if let Some(first) = args.first().and_then(|a| self.sat.store.find_instance(a, b)) {
                    self.by_first.get(&(*op, first)).cloned().unwrap_or_default()
                } else if args.first().is_some_and(|a| a.vars().iter().all(|&x| b.get(x).is_some())) {
                    // fully bound first argument that was never built
                    Vec::new()
                } else {
                    self.by_root.get(op).cloned().unwrap_or_default()
                }
            }
        }
    }

    fn match_premises(
        &mut self,
        ri: usize,
        order: &[usize],
        k: usize,
        b: &mut Binding,
        used: &mut Vec<(usize, u32)>,
        round: usize,
    ) {
        let r = &self.c.rules[ri];
        if k == order.len() {
            let mut premises = vec![0u32; r.premises.len()];
            for &(j, id) in used.iter() {
                premises[j] = id;
            }
            self.conclude(ri, b.clone(), premises);
            return;
        }
        let j = order[k];
        let source = if k == 0 { Source::Delta } else { Source::Any };
        for id in self.candidates(&r.premises[j], b) {
            let ok_source = match source {
                Source::Delta => self.round_of.get(&id) == Some(&round),
                Source::Any => self.round_of.contains_key(&id),
            };
            if !ok_source {
                continue;
            }
            let mark = b.0.len();
            if self.sat.store.matches(&r.premises[j], id, b) {
                used.push((j, id));
                self.match_premises(ri, order, k + 1, b, used, round);
                used.pop();
            }
            b.0.truncate(mark);
            if self.over_budget {
                return;
            }
        }
    }

    fn conclude(&mut self, ri: usize, b: Binding, premises: Vec<u32>) {
        let concl = &self.c.rules[ri].conclusion;
        let free: Vec<u32> = concl.vars().into_iter().filter(|&x| b.get(x).is_none()).collect();
        if free.is_empty() {
            let id = self.sat.store.instantiate(concl, &b).unwrap();
            if self.sat.store.depth(id) <= self.cfg.max_depth {
                self.add(id, Provenance::Rule { rule: ri, binding: b, premises });
            }
            return;
        }
        let mut pools = Vec::new();
        for &x in &free {
            match self.candidates_for(concl.max_var_depth(x).unwrap()) {
                Some(p) => pools.push(p),
                None => return,
            }
        }
        self.for_each_binding(&free, &pools, b, |s, full| {
            let id = s.sat.store.instantiate(concl, &full).unwrap();
            if s.sat.store.depth(id) <= s.cfg.max_depth {
                s.add(
                    id,
                    Provenance::Rule {
                        rule: ri,
                        binding: full,
                        premises: premises.clone(),
                    },
                );
            }
        });
    }

    fn add(&mut self, id: u32, p: Provenance) {
        if self.sat.proof.contains_key(&id) || self.pending.iter().any(|(q, _)| *q == id) {
            return;
        }
        if self.sat.order.len() + self.pending.len() >= self.cfg.node_cap {
            self.over_budget = true;
            return;
        }
        self.pending.push((id, p));
    }

    /// Moves pending formulas into the derived set and returns them.
    fn commit(&mut self, round: usize) -> Vec<u32> {
        let pending = std::mem::take(&mut self.pending);
        let mut delta = Vec::with_capacity(pending.len());
        for (id, p) in pending {
            self.sat.proof.insert(id, p);
            self.sat.order.push(id);
            self.round_of.insert(id, round);
            if let Term::App(op, args) = &self.sat.store.nodes[id as usize] {
                self.by_root.entry(*op).or_default().push(id);
                if let Some(&first) = args.first() {
                    self.by_first.entry((*op, first)).or_default().push(id);
                }
            }
            delta.push(id);
        }
        delta
    }
}

fn advance(idx: &mut [usize], pools: &[Vec<u32>]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < pools[k].len() {
            return true;
        }
        idx[k] = 0;
    }
    false
}

// ---------------------------------------------------------------------------
// Bounded derivability

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Derivability {
    Yes { derivation: Derivation },
    No,
    Unknown { reason: String },
}

/// Decides `f` for strictly analytic calculi when `max_depth >= depth(f)`;
/// otherwise searches within the bounds and never answers `No`.
pub fn derivable_bounded(c: &Calculus, f: &Formula, max_depth: usize, node_cap: usize) -> Derivability {
    for (ai, a) in c.axioms.iter().enumerate() {
        if let Some(subst) = match_formula(&a.formula, f) {
            return Derivability::Yes {
                derivation: Derivation {
                    steps: vec![Step {
                        formula: f.clone(),
                        justification: Justification::Axiom { axiom: ai, subst },
                    }],
                },
            };
        }
    }
    let exact = is_strictly_analytic(c) && max_depth >= f.depth();
    // in a strictly analytic calculus every formula of a derivation of f uses
    // only the variables of f and has depth at most depth(f)
    let (depth, vars) = if exact {
        (f.depth(), f.vars().into_iter().collect::<Vec<_>>())
    } else {
        (max_depth.max(f.depth()), (1..=f.max_var().max(1)).collect())
    };
    let sat = saturate_with(
        c,
        &SaturationConfig {
            max_depth: depth,
            vars,
            node_cap,
        },
    );
    if let Some(derivation) = sat.derivation(f) {
        return Derivability::Yes { derivation };
    }
    if exact && sat.is_complete() {
        Derivability::No
    } else if exact {
        Derivability::Unknown {
            reason: format!("node budget {node_cap} exhausted"),
        }
    } else {
        Derivability::Unknown {
            reason: "not found within bounds and the calculus is not strictly analytic".into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Builtin corpus

fn build(name: &str, sig: &str, axioms: &[(&str, &str)], rules: &[(&str, &[&str], &str)]) -> Calculus {
    let sig = builtin_signature(sig).unwrap();
    let p = |s: &str| parse_formula(s, &sig).expect("builtin formula parses");
    let axioms = axioms
        .iter()
        .map(|(n, f)| Axiom {
            name: n.to_string(),
            formula: p(f),
        })
        .collect();
    let rules = rules
        .iter()
        .map(|(n, ps, c)| Rule {
            name: n.to_string(),
            premises: ps.iter().map(|s| p(s)).collect(),
            conclusion: p(c),
        })
        .collect();
    Calculus::new(name, sig.clone(), axioms, rules).expect("builtin calculus is well formed")
}

const MP: (&str, &[&str], &str) = ("mp", &["X1", "imp(X1, X2)"], "X2");

/// Intuitionistic propositional logic: a1..a12 and modus ponens.
pub fn ipc() -> Calculus {
    build(
        "ipc",
        "ipc",
        &[
            ("a1", "imp(X1, and(X1, X1))"),
            ("a2", "imp(and(X1, X2), and(X2, X1))"),
            ("a3", "imp(imp(X1, X2), imp(and(X1, X3), and(X2, X3)))"),
            ("a4", "imp(and(imp(X1, X2), imp(X2, X3)), imp(X1, X3))"),
            ("a5", "imp(X2, imp(X1, X2))"),
            ("a6", "imp(and(X1, imp(X1, X2)), X2)"),
            ("a7", "imp(X1, or(X1, X2))"),
            ("a8", "imp(or(X1, X2), or(X2, X1))"),
            ("a9", "imp(and(imp(X1, X3), imp(X2, X3)), imp(or(X1, X2), X3))"),
            ("a10", "imp(neg(X1), imp(X1, X2))"),
            ("a11", "imp(and(imp(X1, X2), imp(X1, neg(X2))), neg(X1))"),
            ("a12", "imp(X1, imp(X2, and(X1, X2)))"),
        ],
        &[MP],
    )
}

/// `ipc` without one axiom.
pub fn ipc_minus(axiom: &str) -> Option<Calculus> {
    ipc().without_axiom(axiom)
}

/// The triangle calculus: axiom `X ◁ □X`, transitivity, and explosion from `X ◁ X`.
pub fn triangle() -> Calculus {
    build(
        "triangle",
        "triangle",
        &[("a1", "tri(X1, box(X1))")],
        &[
            ("r1", &["tri(X1, X2)", "tri(X2, X3)"], "tri(X1, X3)"),
            ("r2", &["tri(X1, X1)"], "X2"),
        ],
    )
}

/// The inequality calculus: `T ≠ F`, symmetry, and explosion.
pub fn neq() -> Calculus {
    build(
        "neq",
        "neq",
        &[("a1", "neq(t, f)")],
        &[
            ("r1", &["neq(X2, X1)"], "neq(X1, X2)"),
            ("r2", &["neq(X1, t)", "neq(X1, f)"], "X2"),
        ],
    )
}

/// The successor calculus: `X ~ next(X)`, a shifting rule, and explosion
/// from `X ~ X`.
pub fn kcalc() -> Calculus {
    build(
        "kcalc",
        "kcalc",
        &[("a1", "sim(X1, next(X1))")],
        &[
            ("r1", &["sim(X1, X2)"], "sim(X1, next(X2))"),
            ("r2", &["sim(X1, X1)"], "X2"),
        ],
    )
}

pub fn kcalc_without_r2() -> Calculus {
    kcalc().without_rule("r2").unwrap().with_name("kcalc_no_r2")
}

/// The implication/falsum fragment of `ipc`.
pub fn impbot() -> Calculus {
    build(
        "impbot",
        "impbot",
        &[
            ("a5", "imp(X2, imp(X1, X2))"),
            ("s", "imp(imp(X1, imp(X2, X3)), imp(imp(X1, X2), imp(X1, X3)))"),
            ("efq", "imp(bot, X1)"),
        ],
        &[MP],
    )
}

/// The four calculi of the corpus.
pub fn builtin_calculi() -> Vec<Calculus> {
    vec![ipc(), triangle(), neq(), kcalc()]
}

pub fn builtin_calculus(name: &str) -> Option<Calculus> {
    match name {
        "ipc" => Some(ipc()),
        "ipc_minus_a10" => ipc_minus("a10").map(|c| c.with_name("ipc_minus_a10")),
        "triangle" => Some(triangle()),
        "neq" => Some(neq()),
        "kcalc" => Some(kcalc()),
        "kcalc_no_r2" => Some(kcalc_without_r2()),
        "impbot" => Some(impbot()),
        _ => None,
    }
}
