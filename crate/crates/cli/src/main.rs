//! `manyval`: command-line front end.
//!
//! Exit codes: 0 positive answer, 1 negative answer, 2 error, 3 unknown.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use manyval_core::analysis::approx::{bounded_tautologies, probe_formulas};
use manyval_core::analysis::{
    self, check_strong_soundness, check_t_soundness, compare, enumerate_covers, falsify, mc_sequence, minimal_covers,
    taut_equal, Answer, Budget, CompareMode, CompareProof, EnumOptions, FalsifyOutcome,
};
use manyval_core::calculus::{builtin_calculi, builtin_calculus, derivable_bounded, ipc, saturate, Calculus, Derivability};
use manyval_core::certificate::Certificate;
use manyval_core::kripke::{fmp_approximation, matrix_of_model, KripkeModel};
use manyval_core::matrix::{Matrix, Valuation};
use manyval_core::syntax::{parse_formula, Formula};
use manyval_core::text::{parse_calculus, parse_kripke, parse_matrix, write_matrix};

#[derive(Parser)]
#[command(name = "manyval", version, about = "Finite-valued matrices and Hilbert calculi")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Maximum number of elements in a function closure.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    closure_cap: usize,
    /// Maximum number of search nodes while enumerating matrices.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    node_cap: u64,
    /// Wall-clock limit in seconds for closure computations.
    #[arg(long, global = true)]
    time_cap: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Never fall back to bounded formula search.
    #[arg(long, global = true)]
    exact_only: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Strong soundness (cover) check; --t-sound checks t-soundness instead.
    Check {
        calculus: String,
        matrix: PathBuf,
        #[arg(long)]
        t_sound: bool,
        /// Write a cover certificate.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// t-soundness check.
    Tsound { calculus: String, matrix: PathBuf },
    /// Enumerate the covers with a given number of values.
    Covers {
        calculus: String,
        #[arg(long, short = 'm')]
        values: usize,
        #[arg(long)]
        no_trivial: bool,
        /// Directory receiving one matrix file per cover.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// The minimal covers with a given number of values.
    MinimalCovers {
        calculus: String,
        #[arg(long, short = 'm')]
        values: usize,
        #[arg(long)]
        include_trivial: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Does the second matrix have a tautology the first one lacks?
    Compare {
        left: PathBuf,
        right: PathBuf,
        /// Search formulas up to DEPTH over VARS variables instead.
        #[arg(long, num_args = 2, value_names = ["DEPTH", "VARS"])]
        bounded: Option<Vec<usize>>,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Do two matrices have the same tautologies?
    Equal { left: PathBuf, right: PathBuf },
    /// Find a cover falsifying a formula (or an axiom name).
    Falsify {
        calculus: String,
        formula: String,
        #[arg(long, default_value_t = 3)]
        max_values: usize,
        /// Certificate path.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Running products of the first K non-trivial covers.
    McSeq {
        calculus: String,
        #[arg(long, short = 'k')]
        k: usize,
        #[arg(long, default_value_t = 3)]
        max_values: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Forward saturation up to a depth.
    Saturate {
        calculus: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        vars: u32,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
    },
    /// Bounded derivability with a checked derivation.
    Derive {
        calculus: String,
        formula: String,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
    },
    /// Compile a Kripke model into a matrix.
    Kripke2matrix {
        model: PathBuf,
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        cap: usize,
    },
    /// Products of compiled Kripke models, checked on probe formulas.
    FmpApprox {
        models: Vec<PathBuf>,
        #[arg(long = "probe")]
        probes: Vec<String>,
        #[arg(long, default_value_t = 4096)]
        cap: usize,
    },
    /// Re-check a certificate.
    Verify { certificate: PathBuf },
}

struct Outcome {
    code: u8,
    human: String,
    json: Json,
}

fn outcome(code: u8, human: impl Into<String>, json: Json) -> Result<Outcome> {
    Ok(Outcome {
        code,
        human: human.into(),
        json,
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// A calculus file, or `builtin:<name>`.
fn load_calculus(arg: &str) -> Result<Calculus> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return builtin_calculus(name).ok_or_else(|| anyhow!("no builtin calculus `{name}`"));
    }
    let path = Path::new(arg);
    parse_calculus(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_model(path: &Path) -> Result<KripkeModel> {
    parse_kripke(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// A formula over the calculus signature, or the name of an axiom of the
/// calculus or of a builtin calculus over the same signature.
fn resolve_formula(c: &Calculus, text: &str) -> Result<Formula> {
    let parsed = parse_formula(text, c.sig());
    if let Ok(f) = parsed {
        return Ok(f);
    }
    if let Some(a) = c.axiom(text) {
        return Ok(a.formula.clone());
    }
    for b in builtin_calculi().into_iter().chain([ipc()]) {
        if b.sig() == c.sig() {
            if let Some(a) = b.axiom(text) {
                return Ok(a.formula.clone());
            }
        }
    }
    Err(anyhow!("{}", parsed.unwrap_err()))
}

fn show(f: &Formula, m: &Matrix) -> String {
    f.display(m.sig()).to_string()
}

fn show_valuation(m: &Matrix, v: &Valuation) -> String {
    let parts: Vec<String> = v.0.iter().map(|(x, &val)| format!("X{x}={}", m.label(val))).collect();
    parts.join(" ")
}

fn valuation_json(m: &Matrix, v: &Valuation) -> Json {
    v.0.iter().map(|(x, &val)| (format!("X{x}"), json!(m.label(val)))).collect::<serde_json::Map<_, _>>().into()
}

fn answer_code(a: Answer) -> u8 {
    match a {
        Answer::Yes => 0,
        Answer::No => 1,
        Answer::Unknown => 3,
    }
}

fn answer_str(a: Answer) -> &'static str {
    match a {
        Answer::Yes => "yes",
        Answer::No => "no",
        Answer::Unknown => "unknown",
    }
}

fn save_matrices(dir: &Path, ms: &[&Matrix]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for m in ms {
        write(&dir.join(format!("{}.mat", m.name())), &write_matrix(m))?;
    }
    Ok(())
}

fn check(c: &Calculus, m: &Matrix, certificate: Option<&Path>) -> Result<Outcome> {
    let r = check_strong_soundness(c, m)?;
    let mut human = String::new();
    human += if r.is_cover() { "cover\n" } else { "not-cover\n" };
    for a in r.axioms.iter().filter(|a| !a.tautology) {
        let v = a.countermodel.as_ref().unwrap();
        human += &format!("axiom {} fails at {}\n", a.name, show_valuation(m, v));
    }
    for rr in &r.rules {
        if let Some(v) = &rr.violation {
            human += &format!("rule {} fails at {}\n", rr.name, show_valuation(m, v));
        }
    }
    if let Some(p) = certificate {
        write(p, &Certificate::cover(c, m, &r).to_json())?;
    }
    let json = json!({
        "verdict": if r.is_cover() { "cover" } else { "not_cover" },
        "failing_axioms": r.failing_axioms(),
        "failing_rules": r.failing_rules(),
        "axioms": r.axioms.iter().map(|a| json!({
            "name": a.name,
            "tautology": a.tautology,
            "countermodel": a.countermodel.as_ref().map(|v| valuation_json(m, v)),
        })).collect::<Vec<_>>(),
        "rules": r.rules.iter().map(|x| json!({
            "name": x.name,
            "violation": x.violation.as_ref().map(|v| valuation_json(m, v)),
        })).collect::<Vec<_>>(),
    });
    outcome(if r.is_cover() { 0 } else { 1 }, human, json)
}

fn tsound(c: &Calculus, m: &Matrix, budget: &Budget) -> Result<Outcome> {
    let t = check_t_soundness(c, m, budget)?;
    let mut human = format!(
        "t-sound: {} (closure {} elements, {})\n",
        answer_str(t.answer),
        t.closure_size,
        if t.saturated { "saturated" } else { "not saturated" }
    );
    let violation = t.violation.as_ref().map(|v| {
        let subst: Vec<String> = v.substitution.iter().map(|(x, f)| format!("X{x} := {}", show(f, m))).collect();
        if v.axiom {
            human += &format!("axiom {} fails at {}\n", v.rule, show_valuation(m, &v.valuation));
        } else {
            human += &format!(
                "rule {} breaks under {} at {}\n",
                v.rule,
                subst.join(", "),
                show_valuation(m, &v.valuation)
            );
        }
        json!({
            "rule": v.rule,
            "axiom": v.axiom,
            "substitution": v.substitution.iter().map(|(x, f)| (format!("X{x}"), json!(show(f, m)))).collect::<serde_json::Map<_, _>>(),
            "valuation": valuation_json(m, &v.valuation),
        })
    });
    let json = json!({
        "answer": answer_str(t.answer),
        "closure_size": t.closure_size,
        "saturated": t.saturated,
        "violation": violation,
    });
    outcome(answer_code(t.answer), human, json)
}

fn run(cmd: Command, budget: &Budget) -> Result<Outcome> {
    match cmd {
        Command::Check {
            calculus,
            matrix,
            t_sound,
            certificate,
        } => {
            let c = load_calculus(&calculus)?;
            let m = load_matrix(&matrix)?;
            if t_sound {
                tsound(&c, &m, budget)
            } else {
                check(&c, &m, certificate.as_deref())
            }
        }
        Command::Tsound { calculus, matrix } => tsound(&load_calculus(&calculus)?, &load_matrix(&matrix)?, budget),
        Command::Covers {
            calculus,
            values,
            no_trivial,
            out_dir,
        } => {
            let c = load_calculus(&calculus)?;
            if values == 0 {
                bail!("--values must be positive");
            }
            let options = EnumOptions {
                include_trivial: !no_trivial,
                include_empty: true,
            };
            let e = enumerate_covers(&c, values, options, budget);
            let mut human = format!("{:<24} {:>10} {:>8}\n", "cover", "designated", "trivial");
            for cv in &e.covers {
                human += &format!(
                    "{:<24} {:>10} {:>8}\n",
                    cv.matrix.name(),
                    cv.matrix.designated_values().len(),
                    if cv.trivial { "yes" } else { "no" }
                );
            }
            human += &format!(
                "{} covers, {} nodes{}\n",
                e.covers.len(),
                e.nodes,
                if e.truncated { ", truncated" } else { "" }
            );
            if let Some(dir) = out_dir {
                save_matrices(&dir, &e.covers.iter().map(|c| &c.matrix).collect::<Vec<_>>())?;
            }
            let json = json!({
                "values": values,
                "count": e.covers.len(),
                "trivial": e.covers.iter().filter(|c| c.trivial).count(),
                "truncated": e.truncated,
                "nodes": e.nodes,
                "covers": e.covers.iter().map(|c| write_matrix(&c.matrix)).collect::<Vec<_>>(),
            });
            outcome(if e.truncated { 3 } else { 0 }, human, json)
        }
        Command::MinimalCovers {
            calculus,
            values,
            include_trivial,
            out_dir,
        } => {
            let c = load_calculus(&calculus)?;
            let options = EnumOptions {
                include_trivial,
                include_empty: false,
            };
            let r = minimal_covers(&c, values, options, budget)?;
            let mut human = format!("{} covers, {} minimal\n", r.covers.len(), r.minimal.len());
            let probes = probe_formulas(c.sig(), 3, 2, 200_000);
            for &i in &r.minimal {
                let m = &r.covers[i];
                let n = bounded_tautologies(m, &probes, 2).iter().filter(|&&b| b).count();
                human += &format!("{}: {} bounded tautologies\n", m.name(), n);
                human += &write_matrix(m);
            }
            if r.modulo_budget() {
                human += &format!("minimal modulo budget; open pairs: {:?}\n", r.unknown);
            }
            if r.truncated {
                human += "enumeration truncated\n";
            }
            if let Some(dir) = out_dir {
                save_matrices(&dir, &r.minimal_matrices())?;
            }
            let json = json!({
                "values": values,
                "covers": r.covers.len(),
                "minimal": r.minimal_matrices().iter().map(|m| write_matrix(m)).collect::<Vec<_>>(),
                "unknown": r.unknown,
                "truncated": r.truncated,
            });
            outcome(if r.modulo_budget() || r.truncated { 3 } else { 0 }, human, json)
        }
        Command::Compare {
            left,
            right,
            bounded,
            certificate,
        } => {
            let (m1, m2) = (load_matrix(&left)?, load_matrix(&right)?);
            if bounded.is_some() && budget.exact_only {
                bail!("--bounded conflicts with --exact-only");
            }
            let mode = match bounded.as_deref() {
                Some([d, v]) => CompareMode::Bounded {
                    depth: *d,
                    vars: *v as u32,
                },
                Some(_) => bail!("--bounded takes DEPTH VARS"),
                None => CompareMode::Exact,
            };
            let v = compare(&m1, &m2, mode, budget)?;
            let (human, detail) = match &v.proof {
                CompareProof::Witness { formula, countermodel } => (
                    format!(
                        "⊲* holds\nwitness: {}\nfalsified in {} at {}\n",
                        show(formula, &m1),
                        m1.name(),
                        show_valuation(&m1, countermodel)
                    ),
                    json!({"witness": show(formula, &m1), "valuation": valuation_json(&m1, countermodel)}),
                ),
                CompareProof::Embedding { map } => {
                    let pairs: Vec<String> =
                        map.iter().enumerate().map(|(a, &b)| format!("{}->{}", m1.label(a as u32), m2.label(b))).collect();
                    (
                        format!("⊲* fails\nembedding: {}\n", pairs.join(" ")),
                        json!({"embedding": map.iter().map(|&b| m2.label(b)).collect::<Vec<_>>()}),
                    )
                }
                CompareProof::Closure { size, generators } => (
                    format!("⊲* fails\nclosure saturated at {size} elements over generators {generators:?}\n"),
                    json!({"closure_size": size, "generators": generators}),
                ),
                CompareProof::TrivialLeft => (
                    "⊲* fails\nthe left matrix designates every value\n".into(),
                    json!({"trivial_left": true}),
                ),
                CompareProof::EmptyRight => (
                    "⊲* fails\nthe right matrix designates nothing\n".into(),
                    json!({"empty_right": true}),
                ),
                CompareProof::Budget { note } => (format!("⊲* unknown\n{note}\n"), json!({"note": note})),
            };
            if let Some(p) = certificate {
                let cert = Certificate::comparison(&m1, &m2, &v)
                    .ok_or_else(|| anyhow!("this verdict has no checkable certificate"))?;
                write(&p, &cert.to_json())?;
            }
            let json = json!({"relation": "⊲*", "answer": answer_str(v.answer), "proof": detail});
            outcome(answer_code(v.answer), human, json)
        }
        Command::Equal { left, right } => {
            let (m1, m2) = (load_matrix(&left)?, load_matrix(&right)?);
            let e = taut_equal(&m1, &m2, budget)?;
            let word = match e.answer {
                analysis::compare::Equality::Equal => "equal",
                analysis::compare::Equality::Different => "different",
                analysis::compare::Equality::Unknown => "unknown",
            };
            let mut human = format!("{word}\n");
            let side = if e.forward.witness().is_some() { "right" } else { "left" };
            let w = e.witness().map(|f| {
                human += &format!("witness: {} (tautology of the {side} matrix only)\n", show(f, &m1));
                show(f, &m1)
            });
            let code = match e.answer {
                analysis::compare::Equality::Equal => 0,
                analysis::compare::Equality::Different => 1,
                analysis::compare::Equality::Unknown => 3,
            };
            outcome(code, human, json!({"answer": word, "witness": w}))
        }
        Command::Falsify {
            calculus,
            formula,
            max_values,
            output,
        } => {
            let c = load_calculus(&calculus)?;
            let f = resolve_formula(&c, &formula)?;
            match falsify(&c, &f, max_values, budget)? {
                FalsifyOutcome::Found(cert) => {
                    let m = &cert.matrix;
                    let mut human = format!(
                        "falsified by a {}-valued cover at {}\n",
                        m.size(),
                        show_valuation(m, &cert.valuation)
                    );
                    human += &write_matrix(m);
                    let c = Certificate::falsification(&cert);
                    if let Some(p) = output {
                        write(&p, &c.to_json())?;
                    }
                    let json = serde_json::to_value(&c)?;
                    outcome(0, human, json)
                }
                FalsifyOutcome::Unknown {
                    max_values,
                    truncated,
                    nodes,
                } => outcome(
                    3,
                    format!(
                        "unknown: every cover with at most {max_values} values validates the formula{}\n",
                        if truncated { " (search truncated)" } else { "" }
                    ),
                    json!({"answer": "unknown", "max_values": max_values, "truncated": truncated, "nodes": nodes}),
                ),
            }
        }
        Command::McSeq {
            calculus,
            k,
            max_values,
            out_dir,
        } => {
            let c = load_calculus(&calculus)?;
            let s = mc_sequence(&c, k, max_values, budget)?;
            let mut human = String::new();
            for (i, (f, e)) in s.factors.iter().zip(&s.elements).enumerate() {
                human += &format!("{}: factor {} ({} values), product {} values\n", i + 1, f.name(), f.size(), e.size());
            }
            if s.short {
                human += &format!("only {} of {k} covers found\n", s.factors.len());
            }
            if let Some(dir) = out_dir {
                save_matrices(&dir, &s.elements.iter().collect::<Vec<_>>())?;
            }
            let json = json!({
                "factors": s.factors.iter().map(|m| m.name()).collect::<Vec<_>>(),
                "sizes": s.elements.iter().map(|m| m.size()).collect::<Vec<_>>(),
                "short": s.short,
                "truncated": s.truncated,
            });
            outcome(if s.short { 3 } else { 0 }, human, json)
        }
        Command::Saturate {
            calculus,
            depth,
            vars,
            cap,
        } => {
            let c = load_calculus(&calculus)?;
            let s = saturate(&c, depth, vars, cap);
            let fs: Vec<String> = s.formulas().iter().map(|f| f.display(c.sig()).to_string()).collect();
            let mut human = fs.join("\n");
            human += &format!(
                "\n{} formulas{}\n",
                fs.len(),
                if s.is_complete() { "" } else { " (node cap reached)" }
            );
            let json = json!({"complete": s.is_complete(), "formulas": fs});
            outcome(if s.is_complete() { 0 } else { 3 }, human, json)
        }
        Command::Derive {
            calculus,
            formula,
            depth,
            cap,
        } => {
            let c = load_calculus(&calculus)?;
            let f = resolve_formula(&c, &formula)?;
            let d = derivable_bounded(&c, &f, depth.unwrap_or(f.depth()), cap);
            match d {
                Derivability::Yes { derivation } => {
                    let mut human = String::from("derivable\n");
                    let mut steps = Vec::new();
                    for (i, s) in derivation.steps.iter().enumerate() {
                        let why = match &s.justification {
                            manyval_core::calculus::Justification::Axiom { axiom, .. } => {
                                format!("axiom {}", c.axioms()[*axiom].name)
                            }
                            manyval_core::calculus::Justification::Rule { rule, premises, .. } => {
                                let ps: Vec<String> = premises.iter().map(|p| (p + 1).to_string()).collect();
                                format!("{} {}", c.rules()[*rule].name, ps.join(","))
                            }
                        };
                        let text = s.formula.display(c.sig()).to_string();
                        human += &format!("{:>4}. {}    [{}]\n", i + 1, text, why);
                        steps.push(json!({"formula": text, "by": why}));
                    }
                    outcome(0, human, json!({"answer": "yes", "steps": steps}))
                }
                Derivability::No => outcome(1, "not derivable\n", json!({"answer": "no"})),
                Derivability::Unknown { reason } => {
                    outcome(3, format!("unknown: {reason}\n"), json!({"answer": "unknown", "reason": reason}))
                }
            }
        }
        Command::Kripke2matrix { model, output, cap } => {
            let k = load_model(&model)?;
            let m = matrix_of_model(&k, cap)?;
            let text = write_matrix(&m);
            if let Some(p) = output {
                write(&p, &text)?;
            }
            outcome(0, text.clone(), json!({"matrix": text}))
        }
        Command::FmpApprox { models, probes, cap } => {
            let ks = models.iter().map(|p| load_model(p)).collect::<Result<Vec<_>>>()?;
            let Some(first) = ks.first() else { bail!("at least one model is required") };
            let sig = first.signature();
            let fs = probes
                .iter()
                .map(|p| parse_formula(p, &sig).map_err(|e| anyhow!("{e} in `{p}`")))
                .collect::<Result<Vec<_>>>()?;
            let r = fmp_approximation(&ks, &fs, cap)?;
            let mut human = String::new();
            for (i, e) in r.elements.iter().enumerate() {
                human += &format!("element {}: {} values\n", i + 1, e.size());
            }
            let mut out = Vec::new();
            for p in &r.probes {
                let t: Vec<&str> = p.tautology.iter().map(|&b| if b { "T" } else { "-" }).collect();
                let text = p.formula.display(&sig).to_string();
                human += &format!(
                    "{}: frame-valid {}, tautology {}, refuted by models {:?}{}\n",
                    text,
                    p.frame_valid,
                    t.join(""),
                    p.refuted_by_models,
                    if p.consistent { "" } else { " INCONSISTENT" }
                );
                out.push(json!({
                    "formula": text,
                    "frame_valid": p.frame_valid,
                    "tautology": p.tautology,
                    "refuted_by_models": p.refuted_by_models,
                    "consistent": p.consistent,
                }));
            }
            let json = json!({"sizes": r.elements.iter().map(|e| e.size()).collect::<Vec<_>>(), "probes": out});
            outcome(if r.consistent() { 0 } else { 1 }, human, json)
        }
        Command::Verify { certificate } => {
            let cert = Certificate::from_json(&read(&certificate)?).map_err(|e| anyhow!("malformed certificate: {e}"))?;
            match cert.verify() {
                Ok(()) => outcome(0, "valid\n", json!({"valid": true})),
                Err(e) => outcome(1, format!("invalid: {e}\n"), json!({"valid": false, "reason": e})),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.config;
    let mut budget = Budget::default()
        .with_closure_cap(cfg.closure_cap)
        .with_enumeration_cap(cfg.node_cap)
        .with_exact_only(cfg.exact_only);
    if let Some(t) = cfg.time_cap {
        budget = budget.with_time_cap(Duration::from_secs_f64(t));
    }
    let format = cfg.format;
    let result = analysis::with_workers(cfg.workers, || run(cli.command, &budget));
    match result {
        Ok(o) => {
            match format {
                Format::Human => print!("{}", o.human),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"schema": "manyval-cli/1", "result": o.json})).unwrap()
                ),
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
