//! Self-contained JSON evidence that can be re-checked without the search
//! that produced it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::approx::FalsificationCertificate;
use crate::analysis::compare::{CompareProof, CompareVerdict};
use crate::analysis::soundness::{check_strong_soundness, CoverReport};
use crate::analysis::Answer;
use crate::calculus::{Axiom, Calculus, Rule};
use crate::matrix::{is_embedding, Matrix, Valuation, Value};
use crate::syntax::{parse_formula, Formula, Signature};
use crate::text::write_matrix;

pub const SCHEMA: &str = "manyval-certificate/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveDoc {
    pub symbol: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureDoc {
    pub name: String,
    pub connectives: Vec<ConnectiveDoc>,
}

impl SignatureDoc {
    fn of(sig: &Signature) -> Self {
        SignatureDoc {
            name: sig.name().to_string(),
            connectives: sig
                .connectives()
                .iter()
                .map(|c| ConnectiveDoc {
                    symbol: c.symbol.clone(),
                    arity: c.arity,
                })
                .collect(),
        }
    }

    fn signature(&self) -> Result<Signature, String> {
        let conns: Vec<(&str, usize)> = self.connectives.iter().map(|c| (c.symbol.as_str(), c.arity)).collect();
        Signature::new(self.name.clone(), &conns).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDoc {
    pub symbol: String,
    pub entries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub name: String,
    pub signature: SignatureDoc,
    pub values: Vec<String>,
    pub designated: Vec<String>,
    pub tables: Vec<TableDoc>,
}

impl MatrixDoc {
    pub fn of(m: &Matrix) -> Self {
        let sig = m.sig();
        MatrixDoc {
            name: m.name().to_string(),
            signature: SignatureDoc::of(sig),
            values: m.labels().to_vec(),
            designated: m.designated_values().into_iter().map(|v| m.label(v).to_string()).collect(),
            tables: sig
                .ops()
                .map(|op| TableDoc {
                    symbol: sig.symbol(op).to_string(),
                    entries: m.table(op).iter().map(|&v| m.label(v).to_string()).collect(),
                })
                .collect(),
        }
    }

    pub fn matrix(&self) -> Result<Matrix, String> {
        let sig = self.signature.signature()?;
        let index: BTreeMap<&str, Value> =
            self.values.iter().enumerate().map(|(i, l)| (l.as_str(), i as Value)).collect();
        let value = |l: &str| index.get(l).copied().ok_or_else(|| format!("unknown value `{l}`"));
        let mut designated = vec![false; self.values.len()];
        for d in &self.designated {
            designated[value(d)? as usize] = true;
        }
        if self.tables.len() != sig.len() {
            return Err("one table per connective expected".into());
        }
        let mut tables = Vec::new();
        for (op, t) in sig.ops().zip(&self.tables) {
            if t.symbol != sig.symbol(op) {
                return Err(format!("table `{}` out of order", t.symbol));
            }
            tables.push(t.entries.iter().map(|e| value(e)).collect::<Result<Vec<_>, _>>()?);
        }
        Matrix::new(self.name.clone(), sig, self.values.clone(), designated, tables).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomDoc {
    pub name: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDoc {
    pub name: String,
    pub premises: Vec<String>,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalculusDoc {
    pub name: String,
    pub signature: SignatureDoc,
    pub axioms: Vec<AxiomDoc>,
    pub rules: Vec<RuleDoc>,
}

impl CalculusDoc {
    pub fn of(c: &Calculus) -> Self {
        let sig = c.sig();
        let show = |f: &Formula| f.display(sig).to_string();
        CalculusDoc {
            name: c.name().to_string(),
            signature: SignatureDoc::of(sig),
            axioms: c
                .axioms()
                .iter()
                .map(|a| AxiomDoc {
                    name: a.name.clone(),
                    formula: show(&a.formula),
                })
                .collect(),
            rules: c
                .rules()
                .iter()
                .map(|r| RuleDoc {
                    name: r.name.clone(),
                    premises: r.premises.iter().map(show).collect(),
                    conclusion: show(&r.conclusion),
                })
                .collect(),
        }
    }

    pub fn calculus(&self) -> Result<Calculus, String> {
        let sig = self.signature.signature()?;
        let parse = |t: &str| parse_formula(t, &sig).map_err(|e| format!("{e} in `{t}`"));
        let axioms = self
            .axioms
            .iter()
            .map(|a| {
                Ok(Axiom {
                    name: a.name.clone(),
                    formula: parse(&a.formula)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let rules = self
            .rules
            .iter()
            .map(|r| {
                Ok(Rule {
                    name: r.name.clone(),
                    premises: r.premises.iter().map(|p| parse(p)).collect::<Result<_, _>>()?,
                    conclusion: parse(&r.conclusion)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Calculus::new(self.name.clone(), sig.clone(), axioms, rules).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Query {
    /// `matrix` is a cover of `calculus`, per `report`.
    Cover,
    /// `matrix` covers `calculus` and `valuation` falsifies `witness`.
    Falsify,
    /// Answer yes: `witness` is a tautology of `other` falsified in `matrix`
    /// by `valuation`. Answer no: `embedding` maps `matrix` into `other`.
    Compare,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub query: Query,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<Answer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calculus: Option<CalculusDoc>,
    pub matrix: MatrixDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CoverReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<String>>,
    /// sha256 of the matrices in the text format, concatenated.
    pub digest: String,
}

fn digest(ms: &[&Matrix]) -> String {
    let mut h = Sha256::new();
    for m in ms {
        h.update(write_matrix(m).as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn valuation_doc(m: &Matrix, v: &Valuation) -> BTreeMap<String, String> {
    v.0.iter().map(|(&x, &val)| (format!("X{x}"), m.label(val).to_string())).collect()
}

fn valuation_of(m: &Matrix, doc: &BTreeMap<String, String>) -> Result<Valuation, String> {
    let mut v = Valuation::new();
    for (x, l) in doc {
        let i = x
            .strip_prefix('X')
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| format!("bad variable `{x}`"))?;
        v.set(i, m.value_of(l).ok_or_else(|| format!("unknown value `{l}`"))?);
    }
    Ok(v)
}

impl Certificate {
    fn base(query: Query, matrix: &Matrix) -> Self {
        Certificate {
            schema: SCHEMA.into(),
            query,
            answer: None,
            calculus: None,
            matrix: MatrixDoc::of(matrix),
            other: None,
            report: None,
            witness: None,
            valuation: None,
            embedding: None,
            digest: digest(&[matrix]),
        }
    }

    pub fn cover(c: &Calculus, m: &Matrix, report: &CoverReport) -> Self {
        Certificate {
            calculus: Some(CalculusDoc::of(c)),
            report: Some(report.clone()),
            ..Self::base(Query::Cover, m)
        }
    }

    pub fn falsification(f: &FalsificationCertificate) -> Self {
        Certificate {
            calculus: Some(CalculusDoc::of(&f.calculus)),
            report: Some(f.report.clone()),
            witness: Some(f.formula.display(f.calculus.sig()).to_string()),
            valuation: Some(valuation_doc(&f.matrix, &f.valuation)),
            ..Self::base(Query::Falsify, &f.matrix)
        }
    }

    /// Only witnesses and embeddings make checkable certificates.
    pub fn comparison(m1: &Matrix, m2: &Matrix, v: &CompareVerdict) -> Option<Self> {
        let mut cert = Certificate {
            answer: Some(v.answer),
            other: Some(MatrixDoc::of(m2)),
            digest: digest(&[m1, m2]),
            ..Self::base(Query::Compare, m1)
        };
        match &v.proof {
            CompareProof::Witness { formula, countermodel } => {
                cert.witness = Some(formula.display(m1.sig()).to_string());
                cert.valuation = Some(valuation_doc(m1, countermodel));
            }
            CompareProof::Embedding { map } => {
                cert.embedding = Some(map.iter().map(|&v| m2.label(v).to_string()).collect());
            }
            _ => return None,
        }
        Some(cert)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Re-checks every claim; `Err` names the first one that fails.
    pub fn verify(&self) -> Result<(), String> {
        if self.schema != SCHEMA {
            return Err(format!("unsupported schema `{}`", self.schema));
        }
        let m = self.matrix.matrix()?;
        let other = self.other.as_ref().map(|o| o.matrix()).transpose()?;
        let mut ms = vec![&m];
        ms.extend(other.as_ref());
        if digest(&ms) != self.digest {
            return Err("digest does not match the matrices".into());
        }
        match self.query {
            Query::Cover | Query::Falsify => {
                let c = self.calculus.as_ref().ok_or("missing calculus")?.calculus()?;
                let report = check_strong_soundness(&c, &m).map_err(|e| e.to_string())?;
                if Some(&report) != self.report.as_ref() {
                    return Err("cover report does not match a fresh check".into());
                }
                if self.query == Query::Cover {
                    return Ok(());
                }
                let f = parse_formula(self.witness.as_ref().ok_or("missing formula")?, c.sig())
                    .map_err(|e| e.to_string())?;
                let valuation = valuation_of(&m, self.valuation.as_ref().ok_or("missing valuation")?)?;
                FalsificationCertificate {
                    calculus: c,
                    formula: f,
                    matrix: m,
                    report,
                    valuation,
                }
                .check()
            }
            Query::Compare => {
                let m2 = other.ok_or("missing second matrix")?;
                match self.answer {
                    Some(Answer::Yes) => {
                        let f = parse_formula(self.witness.as_ref().ok_or("missing witness")?, m.sig())
                            .map_err(|e| e.to_string())?;
                        let v = valuation_of(&m, self.valuation.as_ref().ok_or("missing valuation")?)?;
                        let val = m.evaluate(&f, &v).map_err(|e| e.to_string())?;
                        if m.is_designated(val) {
                            return Err("the valuation designates the witness".into());
                        }
                        if let Some(cm) = m2.countermodel(&f) {
                            return Err(format!("the witness is not a tautology of the second matrix: {cm:?}"));
                        }
                        Ok(())
                    }
                    Some(Answer::No) => {
                        let labels = self.embedding.as_ref().ok_or("missing embedding")?;
                        let h = labels
                            .iter()
                            .map(|l| m2.value_of(l).ok_or_else(|| format!("unknown value `{l}`")))
                            .collect::<Result<Vec<_>, _>>()?;
                        if h.len() != m.size() || !is_embedding(&m, &m2, &h) {
                            return Err("the map is not an embedding".into());
                        }
                        Ok(())
                    }
                    _ => Err("no checkable answer".into()),
                }
            }
        }
    }
}
