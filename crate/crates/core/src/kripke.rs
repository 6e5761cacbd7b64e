//! Finite Kripke models and the matrices compiled from them.
//!
//! A value of the compiled matrix is a 0-1 vector over the worlds, written
//! as a bit string in world order. Intuitionistic models only use the
//! upward-closed vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{product, Matrix, MatrixError, Valuation, Value};
use crate::syntax::{builtin_signature, Formula, Signature};
use crate::util::next_tuple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("the accessibility relation is not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("assignment of X{var} is not upward closed (`{from}` holds, `{to}` does not)")]
    NotUpwardClosed { var: u32, from: String, to: String },
    #[error("root: {0}")]
    Root(String),
    #[error("formula is not over the {0} signature")]
    Signature(&'static str),
    #[error("{required} values required, cap is {cap}")]
    TooLarge { required: usize, cap: usize },
    #[error("models disagree on their kind")]
    MixedKinds,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Modal,
    #[serde(rename = "int")]
    Intuitionistic,
}

impl Kind {
    /// `modal` = {neg, and, or, imp, box, diamond}; `int` = {neg, and, or, imp, bot}.
    pub fn signature(self) -> Signature {
        match self {
            Kind::Modal => builtin_signature("modal").unwrap(),
            Kind::Intuitionistic => builtin_signature("int").unwrap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeModel {
    name: String,
    kind: Kind,
    worlds: Vec<String>,
    /// `rel[a][b]` iff `a R b`; reflexive-transitively closed for
    /// intuitionistic models.
    rel: Vec<Vec<bool>>,
    assign: BTreeMap<u32, Vec<bool>>,
    root: Option<usize>,
}

impl KripkeModel {
    /// Builds a model. Intuitionistic edges are closed under reflexivity and
    /// transitivity; the root defaults to the unique least world.
    pub fn new<S: Into<String>>(
        name: S,
        kind: Kind,
        worlds: Vec<String>,
        edges: &[(String, String)],
        assign: &[(u32, Vec<String>)],
        root: Option<String>,
    ) -> Result<Self, KripkeError> {
        let n = worlds.len();
        if n == 0 {
            return Err(KripkeError::NoWorlds);
        }
        let mut index = HashMap::new();
        for (i, w) in worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(KripkeError::DuplicateWorld(w.clone()));
            }
        }
        let find = |w: &String| index.get(w).copied().ok_or_else(|| KripkeError::UnknownWorld(w.clone()));
        let mut rel = vec![vec![false; n]; n];
        for (a, b) in edges {
            rel[find(a)?][find(b)?] = true;
        }
        let mut sets: BTreeMap<u32, Vec<bool>> = BTreeMap::new();
        for (x, ws) in assign {
            let mut bits = vec![false; n];
            for w in ws {
                bits[find(w)?] = true;
            }
            sets.insert(*x, bits);
        }
        let mut root_ix = root.as_ref().map(find).transpose()?;
        if kind == Kind::Intuitionistic {
            for (i, row) in rel.iter_mut().enumerate() {
                row[i] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    if rel[i][k] {
                        for j in 0..n {
                            if rel[k][j] {
                                rel[i][j] = true;
                            }
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j && rel[i][j] && rel[j][i] {
                        return Err(KripkeError::NotPartialOrder(format!(
                            "`{}` and `{}` lie on a cycle",
                            worlds[i], worlds[j]
                        )));
                    }
                }
            }
            for (&x, bits) in &sets {
                for i in 0..n {
                    for j in 0..n {
                        if bits[i] && rel[i][j] && !bits[j] {
                            return Err(KripkeError::NotUpwardClosed {
                                var: x,
                                from: worlds[i].clone(),
                                to: worlds[j].clone(),
                            });
                        }
                    }
                }
            }
            let least: Vec<usize> = (0..n).filter(|&r| (0..n).all(|j| rel[r][j])).collect();
            match root_ix {
                Some(r) if !least.contains(&r) => {
                    return Err(KripkeError::Root(format!("`{}` does not see every world", worlds[r])))
                }
                Some(_) => {}
                None => match least.as_slice() {
                    [r] => root_ix = Some(*r),
                    _ => return Err(KripkeError::Root("no unique least world".into())),
                },
            }
        }
        Ok(KripkeModel {
            name: name.into(),
            kind,
            worlds,
            rel,
            assign: sets,
            root: root_ix,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn sees(&self, a: usize, b: usize) -> bool {
        self.rel[a][b]
    }

    /// The covering edges for intuitionistic models, all edges otherwise.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.worlds.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if !self.rel[a][b] {
                    continue;
                }
                if self.kind == Kind::Intuitionistic {
                    let between = (0..n).any(|c| c != a && c != b && self.rel[a][c] && self.rel[c][b]);
                    if a == b || between {
                        continue;
                    }
                }
                out.push((a, b));
            }
        }
        out
    }

    /// Worlds where `X{x}` holds.
    pub fn assignment(&self, x: u32) -> Vec<bool> {
        self.assign.get(&x).cloned().unwrap_or_else(|| vec![false; self.worlds.len()])
    }

    pub fn assignments(&self) -> &BTreeMap<u32, Vec<bool>> {
        &self.assign
    }

    /// The same frame with another assignment.
    pub fn with_assignment(&self, assign: BTreeMap<u32, Vec<bool>>) -> KripkeModel {
        KripkeModel {
            assign,
            ..self.clone()
        }
    }

    pub fn signature(&self) -> Signature {
        self.kind.signature()
    }

    /// Truth of `f` at every world.
    pub fn truth_set(&self, f: &Formula) -> Result<Vec<bool>, KripkeError> {
        let sig = self.signature();
        if !f.is_over(&sig) {
            return Err(KripkeError::Signature(match self.kind {
                Kind::Modal => "modal",
                Kind::Intuitionistic => "int",
            }));
        }
        Ok(self.truth(f, &sig))
    }

    fn truth(&self, f: &Formula, sig: &Signature) -> Vec<bool> {
        let n = self.worlds.len();
        match f {
            Formula::Var(x) => self.assignment(*x),
            Formula::App(op, args) => {
                let a: Vec<Vec<bool>> = args.iter().map(|g| self.truth(g, sig)).collect();
                let above = |i: usize, p: &dyn Fn(usize) -> bool| (0..n).filter(|&j| self.rel[i][j]).all(p);
                (0..n)
                    .map(|i| match (self.kind, sig.symbol(*op)) {
                        (_, "and") => a[0][i] && a[1][i],
                        (_, "or") => a[0][i] || a[1][i],
                        (_, "bot") => false,
                        (Kind::Modal, "neg") => !a[0][i],
                        (Kind::Modal, "imp") => !a[0][i] || a[1][i],
                        (Kind::Modal, "box") => above(i, &|j| a[0][j]),
                        (Kind::Modal, "diamond") => (0..n).any(|j| self.rel[i][j] && a[0][j]),
                        (Kind::Intuitionistic, "neg") => above(i, &|j| !a[0][j]),
                        (Kind::Intuitionistic, "imp") => above(i, &|j| !a[0][j] || a[1][j]),
                        (_, s) => unreachable!("connective {s} outside the kind signature"),
                    })
                    .collect()
            }
        }
    }

    pub fn eval_world(&self, world: &str, f: &Formula) -> Result<bool, KripkeError> {
        let w = self.world(world).ok_or_else(|| KripkeError::UnknownWorld(world.into()))?;
        Ok(self.truth_set(f)?[w])
    }

    /// `Ok(None)` if `f` holds at every world, otherwise the first world
    /// where it fails.
    pub fn refuting_world(&self, f: &Formula) -> Result<Option<usize>, KripkeError> {
        Ok(self.truth_set(f)?.iter().position(|&b| !b))
    }

    pub fn validates(&self, f: &Formula) -> Result<bool, KripkeError> {
        Ok(self.refuting_world(f)?.is_none())
    }

    /// Whether `f` holds at every world under every admissible assignment
    /// of its variables.
    pub fn frame_validates(&self, f: &Formula) -> Result<bool, KripkeError> {
        self.truth_set(f)?;
        let sets = self.admissible_sets();
        let vars: Vec<u32> = f.vars().into_iter().collect();
        let mut idx = vec![0usize; vars.len()];
        loop {
            let assign = vars.iter().zip(&idx).map(|(&x, &i)| (x, sets[i].clone())).collect();
            if !self.with_assignment(assign).validates(f)? {
                return Ok(false);
            }
            if !next_tuple(&mut idx, sets.len()) {
                return Ok(true);
            }
        }
    }

    /// All 0-1 vectors (modal) or the upward-closed ones (intuitionistic),
    /// in lexicographic order of their bit strings.
    pub fn admissible_sets(&self) -> Vec<Vec<bool>> {
        let n = self.worlds.len();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let bits: Vec<bool> = idx.iter().map(|&b| b == 1).collect();
            let ok = self.kind == Kind::Modal
                || (0..n).all(|i| !bits[i] || (0..n).all(|j| !self.rel[i][j] || bits[j]));
            if ok {
                out.push(bits);
            }
            if !next_tuple(&mut idx, 2) {
                return out;
            }
        }
    }
}

pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// The matrix `M_K`: vectors over worlds, the all-ones vector designated.
pub fn matrix_of_model(k: &KripkeModel, cap: usize) -> Result<Matrix, KripkeError> {
    let n = k.worlds.len();
    if n >= usize::BITS as usize || (k.kind == Kind::Modal && 1usize << n > cap) {
        return Err(KripkeError::TooLarge {
            required: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
            cap,
        });
    }
    let sets = k.admissible_sets();
    if sets.len() > cap {
        return Err(KripkeError::TooLarge {
            required: sets.len(),
            cap,
        });
    }
    let index: HashMap<Vec<bool>, Value> = sets.iter().enumerate().map(|(i, s)| (s.clone(), i as Value)).collect();
    let labels: Vec<String> = sets.iter().map(|s| bit_string(s)).collect();
    let designated = sets.iter().map(|s| s.iter().all(|&b| b)).collect();
    let sig = k.signature();
    let arg_formula: Vec<Formula> = (1..=2).map(Formula::var).collect();
    let m = Matrix::from_fn(format!("m_{}", k.name), sig.clone(), labels, designated, |op, args| {
        let assign = args
            .iter()
            .enumerate()
            .map(|(i, &a)| (i as u32 + 1, sets[a as usize].clone()))
            .collect();
        let f = Formula::app(op, arg_formula[..args.len()].to_vec());
        let bits = k.with_assignment(assign).truth(&f, &sig);
        index[&bits]
    })?;
    Ok(m)
}

/// The valuation `v_K` of `M_K` read off the model's assignment, for the
/// given variables.
pub fn model_valuation(k: &KripkeModel, m: &Matrix, vars: &BTreeSet<u32>) -> Valuation {
    vars.iter()
        .map(|&x| (x, m.value_of(&bit_string(&k.assignment(x))).expect("assignments are admissible")))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmpProbe {
    pub formula: Formula,
    /// Valid on every frame of the list.
    pub frame_valid: bool,
    /// Per element of the sequence.
    pub tautology: Vec<bool>,
    /// Models whose assignment refutes the probe.
    pub refuted_by_models: Vec<usize>,
    /// Valid probes are tautologies everywhere, and a probe refuted by model
    /// `i` is undesignated under `v_K` in element `i` and all later ones.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmpReport {
    pub elements: Vec<Matrix>,
    pub probes: Vec<FmpProbe>,
}

impl FmpReport {
    pub fn consistent(&self) -> bool {
        self.probes.iter().all(|p| p.consistent)
    }
}

/// Running products `M_{K_1} × … × M_{K_i}` with probe checks.
pub fn fmp_approximation(models: &[KripkeModel], probes: &[Formula], cap: usize) -> Result<FmpReport, KripkeError> {
    if models.windows(2).any(|w| w[0].kind != w[1].kind) {
        return Err(KripkeError::MixedKinds);
    }
    let factors = models
        .iter()
        .map(|k| matrix_of_model(k, cap))
        .collect::<Result<Vec<_>, _>>()?;
    let mut elements: Vec<Matrix> = Vec::new();
    for f in &factors {
        let next = match elements.last() {
            None => f.clone(),
            Some(prev) => {
                let required = prev.size() * f.size();
                if required > cap {
                    return Err(KripkeError::TooLarge { required, cap });
                }
                product(prev, f)?.with_name(format!("fmp{}", elements.len() + 1))
            }
        };
        elements.push(next);
    }
    let mut out = Vec::new();
    for p in probes {
        let mut frame_valid = true;
        let mut refuted_by_models = Vec::new();
        for (i, k) in models.iter().enumerate() {
            frame_valid &= k.frame_validates(p)?;
            if !k.validates(p)? {
                refuted_by_models.push(i);
            }
        }
        let tautology: Vec<bool> = elements.iter().map(|e| e.is_tautology(p)).collect();
        let mut consistent = !frame_valid || tautology.iter().all(|&t| t);
        let vars = p.vars();
        for &i in &refuted_by_models {
            for j in i..elements.len() {
                // v_K for every factor; the product index is built left to right
                let mut value: Valuation = Valuation::new();
                for &x in &vars {
                    let mut idx: Value = 0;
                    for (k, fm) in models.iter().zip(&factors).take(j + 1) {
                        let v = fm.value_of(&bit_string(&k.assignment(x))).expect("admissible");
                        idx = idx * fm.size() as Value + v;
                    }
                    value.set(x, idx);
                }
                let v = elements[j].evaluate(p, &value)?;
                consistent &= !elements[j].is_designated(v);
            }
        }
        out.push(FmpProbe {
            formula: p.clone(),
            frame_valid,
            tautology,
            refuted_by_models,
            consistent,
        });
    }
    Ok(FmpReport { elements, probes: out })
}

/// The intuitionistic chain `w1 < … < wn` with an empty assignment.
pub fn chain(n: usize) -> KripkeModel {
    let worlds: Vec<String> = (1..=n).map(|i| format!("w{i}")).collect();
    let edges: Vec<(String, String)> = worlds.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    KripkeModel::new(format!("chain{n}"), Kind::Intuitionistic, worlds, &edges, &[], None).expect("chains are trees")
}

/// The three-world tree: `w1` below `w2` and `w3`.
pub fn tree3() -> KripkeModel {
    let w = |s: &str| s.to_string();
    KripkeModel::new(
        "tree3",
        Kind::Intuitionistic,
        vec![w("w1"), w("w2"), w("w3")],
        &[(w("w1"), w("w2")), (w("w1"), w("w3"))],
        &[],
        Some(w("w1")),
    )
    .expect("a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{find_embedding, godel_over};
    use crate::syntax::parse_formula;

    fn int(text: &str) -> Formula {
        parse_formula(text, &Kind::Intuitionistic.signature()).unwrap()
    }

    #[test]
    fn t3_implication_table() {
        let t3 = matrix_of_model(&tree3(), 1 << 12).unwrap();
        let labels: Vec<&str> = t3.labels().iter().map(|s| s.as_str()).collect();
        assert_eq!(labels, ["000", "001", "010", "011", "111"]);
        let imp = t3.sig().lookup("imp").unwrap();
        let at = |a: &str, b: &str| t3.label(t3.apply(imp, &[t3.value_of(a).unwrap(), t3.value_of(b).unwrap()]));
        assert_eq!(at("001", "010"), "010");
        assert_eq!(at("011", "001"), "001");
        assert_eq!(at("111", "000"), "000");
    }

    #[test]
    fn excluded_middle_fails_at_the_root() {
        let w = |s: &str| s.to_string();
        let k = KripkeModel::new(
            "t",
            Kind::Intuitionistic,
            vec![w("w1"), w("w2"), w("w3")],
            &[(w("w1"), w("w2")), (w("w1"), w("w3"))],
            &[(1, vec![w("w2")])],
            None,
        )
        .unwrap();
        assert!(!k.eval_world("w1", &int("or(X1, neg(X1))")).unwrap());
        assert!(k.eval_world("w2", &int("or(X1, neg(X1))")).unwrap());
    }

    #[test]
    fn four_chain_is_g5() {
        let m = matrix_of_model(&chain(4), 64).unwrap();
        let g5 = godel_over(5, m.sig()).unwrap();
        assert_eq!(m.size(), 5);
        assert!(find_embedding(&m, &g5).is_some());
    }

    #[test]
    fn assignments_must_be_upward_closed() {
        let w = |s: &str| s.to_string();
        let e = KripkeModel::new(
            "bad",
            Kind::Intuitionistic,
            vec![w("a"), w("b")],
            &[(w("a"), w("b"))],
            &[(1, vec![w("a")])],
            None,
        );
        assert!(matches!(e, Err(KripkeError::NotUpwardClosed { .. })));
    }

    #[test]
    fn modal_single_world() {
        let w = |s: &str| s.to_string();
        let k = KripkeModel::new("r", Kind::Modal, vec![w("w")], &[(w("w"), w("w"))], &[(1, vec![w("w")])], None)
            .unwrap();
        let sig = Kind::Modal.signature();
        assert!(k.eval_world("w", &parse_formula("box(X1)", &sig).unwrap()).unwrap());
        let m = matrix_of_model(&k, 16).unwrap();
        assert_eq!(m.size(), 2);
        for op in ["box", "diamond"] {
            let o = sig.lookup(op).unwrap();
            assert_eq!(m.table(o), &[0, 1]);
        }
        let irreflexive = KripkeModel::new("i", Kind::Modal, vec![w("w")], &[], &[], None).unwrap();
        assert!(irreflexive.validates(&parse_formula("box(and(X1, neg(X1)))", &sig).unwrap()).unwrap());
    }

    #[test]
    fn chains_refute_double_negation() {
        let dn = int("imp(neg(neg(X1)), X1)");
        let mut models = Vec::new();
        for n in 1..=4 {
            let c = chain(n);
            let top = c.worlds()[n - 1].clone();
            let mut a = BTreeMap::new();
            a.insert(1, c.worlds().iter().map(|w| *w == top).collect());
            models.push(if n >= 2 { c.with_assignment(a) } else { c });
        }
        let r = fmp_approximation(&models, &[dn, int("imp(X1, X1)")], 1 << 12).unwrap();
        assert!(r.consistent());
        assert_eq!(r.probes[0].tautology, vec![true, false, false, false]);
        assert!(r.probes[1].tautology.iter().all(|&t| t));
    }
}
