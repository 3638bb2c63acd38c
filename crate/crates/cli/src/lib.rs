//! Command-line front end for the `stagedtree` library.
//!
//! [`run`] takes the full argument vector and returns the exit status with
//! the text meant for stdout and stderr, so it can be tested without
//! spawning a process.

pub mod document;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};
use stagedtree::error::Error;
use stagedtree::ideals::{self, IdealKind};
use stagedtree::model;
use stagedtree::parametrization;
use stagedtree::poly::Polynomial;
use stagedtree::tree::{StagedTree, VertexId};

use crate::document::{parse_tree_document, DocumentError, TreeDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stagedtree",
    version,
    about = "Algebraic queries on staged tree models"
)]
pub struct Cli {
    /// Print machine-readable JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a tree document and summarise it
    Validate { tree: PathBuf },
    /// List atomic probabilities with their leaves and label products
    Atoms { tree: PathBuf },
    /// Print a generating set of one of the ideals
    Generators {
        tree: PathBuf,
        #[arg(long, value_enum, default_value_t = IdealArg::Model)]
        ideal: IdealArg,
    },
    /// Decide toricity and show failing index pairs
    Toric { tree: PathBuf },
    /// Print the model dimension by both counts
    Dim { tree: PathBuf },
    /// Print stage and position classes
    Positions { tree: PathBuf },
    /// Test a probability vector for membership in the model
    Membership {
        tree: PathBuf,
        /// File with one rational per atom, separated by whitespace or commas
        #[arg(long)]
        point: PathBuf,
    },
    /// Print model points from seeded random parameters
    Sample {
        tree: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Write the tree or an ideal in another format
    Export {
        tree: PathBuf,
        #[arg(long, value_enum, default_value_t = ExportFormat::Text)]
        format: ExportFormat,
        #[arg(long, value_enum, default_value_t = IdealArg::Model)]
        ideal: IdealArg,
        /// Add the computed stage classes as comments or an extra field
        #[arg(long)]
        annotate_stages: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdealArg {
    Model,
    Paths,
    Mpaths,
}

impl From<IdealArg> for IdealKind {
    fn from(a: IdealArg) -> Self {
        match a {
            IdealArg::Model => IdealKind::ModelInvariants,
            IdealArg::Paths => IdealKind::Paths,
            IdealArg::Mpaths => IdealKind::MaximalPaths,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Text,
    M2,
    Tree,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
    details: Value,
}

impl Failure {
    fn usage(kind: &'static str, message: String) -> Self {
        Failure {
            code: EXIT_USAGE,
            kind,
            message,
            details: Value::Null,
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        match &e {
            DocumentError::Syntax { line, column, .. } => Failure {
                code: EXIT_USAGE,
                kind: "parse",
                details: json!({ "line": line, "column": column }),
                message: e.to_string(),
            },
            DocumentError::Field { field, .. } => Failure {
                code: EXIT_USAGE,
                kind: "parse",
                details: json!({ "field": field }),
                message: e.to_string(),
            },
            DocumentError::Invalid(inner) => inner.clone().into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, details) = match &e {
            Error::Validation(report) => (
                "validation",
                json!({ "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>() }),
            ),
            Error::Parse { pos, .. } => ("parse", json!({ "position": pos })),
            Error::LengthMismatch { expected, found } => (
                "length_mismatch",
                json!({ "expected": expected, "found": found }),
            ),
            Error::InvalidSimplexPoint(_) => ("invalid_point", Value::Null),
            _ => ("domain", Value::Null),
        };
        let code = if kind == "parse" {
            EXIT_USAGE
        } else {
            EXIT_DOMAIN
        };
        Failure {
            code,
            kind,
            message: e.to_string(),
            details,
        }
    }
}

/// Text or JSON rendering of one command's result.
struct Report {
    code: i32,
    text: String,
    json: Value,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report {
            code: EXIT_OK,
            text,
            json,
        }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_requested = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: EXIT_OK,
                        stdout: rendered,
                        stderr: String::new(),
                    }
                }
                _ if json_requested => failure_outcome(
                    true,
                    Failure::usage("usage", rendered.trim_end().to_string()),
                ),
                _ => Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: rendered,
                },
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => Outcome {
            code: report.code,
            stdout: if cli.json {
                pretty(&report.json)
            } else {
                report.text
            },
            stderr: String::new(),
        },
        Err(f) => failure_outcome(cli.json, f),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s
}

fn failure_outcome(json: bool, f: Failure) -> Outcome {
    if json {
        let mut err = json!({ "kind": f.kind, "message": f.message });
        if let Value::Object(extra) = f.details {
            err.as_object_mut().expect("object").extend(extra);
        }
        Outcome {
            code: f.code,
            stdout: pretty(&json!({ "error": err })),
            stderr: String::new(),
        }
    } else {
        Outcome {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage("io", format!("cannot read {}: {e}", path.display())))
}

fn load_tree(path: &Path) -> Result<StagedTree, Failure> {
    Ok(parse_tree_document(&read_file(path)?)?)
}

/// Reads rationals such as `1/12` or `3`, separated by whitespace or commas.
pub fn parse_point(text: &str) -> Result<Vec<BigRational>, String> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<BigRational>()
                .map_err(|_| format!("`{s}` is not a rational number"))
        })
        .collect()
}

fn show(t: &StagedTree, p: &Polynomial) -> String {
    p.display(t.symbols()).to_string()
}

fn names(t: &StagedTree, vs: &[VertexId]) -> Vec<String> {
    vs.iter().map(|&v| t.name(v).to_string()).collect()
}

fn join_rationals(xs: &[BigRational]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn execute(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Validate { tree } => validate(tree),
        Command::Atoms { tree } => atoms(&load_tree(tree)?),
        Command::Generators { tree, ideal } => generators(&load_tree(tree)?, (*ideal).into()),
        Command::Toric { tree } => toric(&load_tree(tree)?),
        Command::Dim { tree } => dim(&load_tree(tree)?),
        Command::Positions { tree } => positions(&load_tree(tree)?),
        Command::Membership { tree, point } => {
            let t = load_tree(tree)?;
            let p = parse_point(&read_file(point)?).map_err(|m| Failure::usage("parse", m))?;
            membership(&t, &p)
        }
        Command::Sample { tree, seed, count } => sample(&load_tree(tree)?, *seed, *count),
        Command::Export {
            tree,
            format,
            ideal,
            annotate_stages,
        } => export(
            &load_tree(tree)?,
            *format,
            (*ideal).into(),
            *annotate_stages,
        ),
    }
}

fn validate(path: &Path) -> Result<Report, Failure> {
    let t = match load_tree(path) {
        Ok(t) => t,
        Err(f) if f.kind == "validation" => {
            let violations = match &f.details["violations"] {
                Value::Array(v) => v.clone(),
                _ => Vec::new(),
            };
            let mut text = String::from("invalid\n");
            for v in &violations {
                writeln!(text, "  {}", v.as_str().unwrap_or_default()).unwrap();
            }
            return Ok(Report {
                code: EXIT_DOMAIN,
                text,
                json: json!({ "valid": false, "violations": violations }),
            });
        }
        Err(f) => return Err(f),
    };
    let stages = t.stage_classes();
    let nontrivial = stages.nontrivial().count();
    let text = format!(
        "valid: {} vertices, {} edges, {} atoms, {} stages ({} with more than one vertex)\n",
        t.num_vertices(),
        t.num_edges(),
        t.num_atoms(),
        stages.classes.len(),
        nontrivial
    );
    Ok(Report::ok(
        text,
        json!({
            "valid": true,
            "vertices": t.num_vertices(),
            "edges": t.num_edges(),
            "atoms": t.num_atoms(),
            "stages": stages.classes.len(),
            "nontrivial_stages": nontrivial,
        }),
    ))
}

fn atoms(t: &StagedTree) -> Result<Report, Failure> {
    let mut text = String::new();
    let mut rows = Vec::new();
    for a in t.atoms() {
        let sym = t.symbols().name(a.symbol);
        let path = Polynomial::term(num_traits::One::one(), t.path_monomial(t.root(), a.leaf));
        let path = show(t, &path);
        writeln!(text, "{sym}\t{}\t{path}", t.name(a.leaf)).unwrap();
        rows.push(json!({ "symbol": sym, "leaf": t.name(a.leaf), "path": path }));
    }
    Ok(Report::ok(text, json!({ "atoms": rows })))
}

fn generators(t: &StagedTree, kind: IdealKind) -> Result<Report, Failure> {
    let set = ideals::generators(t, kind);
    let mut text = String::new();
    let mut rows = Vec::new();
    for g in &set.generators {
        let p = show(t, &g.polynomial);
        writeln!(text, "{p}").unwrap();
        rows.push(json!({
            "polynomial": p,
            "origins": g.origins.iter().map(|o| o.describe(t)).collect::<Vec<_>>(),
        }));
    }
    let diagnostics: Vec<Value> = if kind == IdealKind::MaximalPaths {
        ideals::extension_disagreements(t)
            .iter()
            .map(|d| {
                let describe =
                    |v: Vec<ideals::PathPair>| v.iter().map(|p| p.describe(t)).collect::<Vec<_>>();
                json!({
                    "seed": d.seed.describe(t),
                    "missed_by_stepwise": describe(d.missed_by_stepwise()),
                    "stepwise_not_maximal": describe(d.stepwise_not_maximal()),
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut json = json!({ "ideal": kind.to_string(), "generators": rows });
    if !diagnostics.is_empty() {
        json["extension_diagnostics"] = Value::Array(diagnostics);
    }
    Ok(Report::ok(text, json))
}

fn toric(t: &StagedTree) -> Result<Report, Failure> {
    let verdict = parametrization::toric_verdict(t);
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut text = format!(
        "{}\nstages are positions: {}\n",
        if verdict.toric { "toric" } else { "not toric" },
        yes_no(verdict.stages_are_positions)
    );
    let mut witnesses = Vec::new();
    for w in &verdict.failures {
        let (i, j) = (t.symbols().name(w.i), t.symbols().name(w.j));
        let diff = show(t, &w.difference);
        writeln!(
            text,
            "  {} ~ {} at ({i}, {j}): {diff} != 0",
            t.name(w.v),
            t.name(w.w)
        )
        .unwrap();
        witnesses.push(json!({
            "v": t.name(w.v),
            "w": t.name(w.w),
            "i": i,
            "j": j,
            "difference": diff,
        }));
    }
    Ok(Report::ok(
        text,
        json!({
            "toric": verdict.toric,
            "stages_are_positions": verdict.stages_are_positions,
            "witnesses": witnesses,
        }),
    ))
}

fn dim(t: &StagedTree) -> Result<Report, Failure> {
    let d = ideals::dimension_forms(t);
    if d.by_stages != d.by_edges {
        return Err(Failure {
            code: EXIT_DOMAIN,
            kind: "domain",
            message: format!(
                "parameter counts disagree: {} and {}",
                d.by_stages, d.by_edges
            ),
            details: Value::Null,
        });
    }
    Ok(Report::ok(
        format!(
            "{}\n  sum over stages of (edges - 1): {}\n  edges - non-leaf vertices - identified edges: {}\n",
            d.by_stages, d.by_stages, d.by_edges
        ),
        json!({ "dimension": d.by_stages, "by_stages": d.by_stages, "by_edges": d.by_edges }),
    ))
}

fn positions(t: &StagedTree) -> Result<Report, Failure> {
    let positions = t.position_classes();
    let mut text = String::new();
    let mut rows = Vec::new();
    for class in &t.stage_classes().classes {
        let labels: Vec<String> = class.labels.iter().map(|&s| t.symbols().name(s)).collect();
        let groups: Vec<Vec<String>> = positions
            .iter()
            .filter(|g| class.vertices.contains(&g[0]))
            .map(|g| names(t, g))
            .collect();
        let braces = |vs: &[String]| format!("{{{}}}", vs.join(", "));
        writeln!(
            text,
            "stage {} [{}] positions {}",
            braces(&names(t, &class.vertices)),
            labels.join(", "),
            groups
                .iter()
                .map(|g| braces(g))
                .collect::<Vec<_>>()
                .join(" ")
        )
        .unwrap();
        rows.push(json!({
            "vertices": names(t, &class.vertices),
            "labels": labels,
            "positions": groups,
        }));
    }
    Ok(Report::ok(text, json!({ "stages": rows })))
}

fn membership(t: &StagedTree, point: &[BigRational]) -> Result<Report, Failure> {
    let v = model::membership(t, point)?;
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut text = format!(
        "{}\nin simplex: {}\ninvariants vanish: {}\n",
        if v.is_member() {
            "member"
        } else {
            "not a member"
        },
        yes_no(v.in_simplex),
        yes_no(v.invariants_vanish)
    );
    let mut failures = Vec::new();
    for (g, x) in &v.failures {
        let g = show(t, g);
        writeln!(text, "  {g} = {x}").unwrap();
        failures.push(json!({ "generator": g, "value": x.to_string() }));
    }
    Ok(Report {
        code: if v.is_member() { EXIT_OK } else { EXIT_DOMAIN },
        text,
        json: json!({
            "member": v.is_member(),
            "in_simplex": v.in_simplex,
            "invariants_vanish": v.invariants_vanish,
            "paths_vanish": v.paths_vanish,
            "failures": failures,
        }),
    })
}

fn sample(t: &StagedTree, seed: u64, count: u64) -> Result<Report, Failure> {
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut all_members = true;
    for s in seed..seed.saturating_add(count) {
        let p = model::sample_point(t, s);
        let member = model::membership(t, &p)?.is_member();
        all_members &= member;
        writeln!(text, "{s}: {}", join_rationals(&p)).unwrap();
        rows.push(json!({
            "seed": s,
            "point": p.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "member": member,
        }));
    }
    Ok(Report {
        code: if all_members { EXIT_OK } else { EXIT_DOMAIN },
        text,
        json: json!({ "samples": rows }),
    })
}

fn stage_comments(t: &StagedTree, prefix: &str) -> String {
    let mut out = String::new();
    for (n, class) in t.stage_classes().classes.iter().enumerate() {
        let labels: Vec<String> = class.labels.iter().map(|&s| t.symbols().name(s)).collect();
        writeln!(
            out,
            "{prefix} stage {}: {} [{}]",
            n + 1,
            names(t, &class.vertices).join(" "),
            labels.join(", ")
        )
        .unwrap();
    }
    out
}

fn export(
    t: &StagedTree,
    format: ExportFormat,
    kind: IdealKind,
    annotate: bool,
) -> Result<Report, Failure> {
    let atoms: Vec<String> = t.atom_symbols().map(|s| t.symbols().name(s)).collect();
    let gens: Vec<String> = ideals::generators(t, kind)
        .polynomials()
        .map(|p| show(t, p))
        .collect();
    let text = match format {
        ExportFormat::Tree => {
            let mut doc = TreeDocument::from_tree(t);
            if annotate {
                doc = doc.with_stage_annotations(t);
            }
            doc.to_json()
        }
        ExportFormat::Text => {
            let mut s = String::new();
            if annotate {
                s.push_str(&stage_comments(t, "#"));
            }
            writeln!(s, "ring QQ[{}]", atoms.join(", ")).unwrap();
            writeln!(s, "ideal {kind}").unwrap();
            for g in &gens {
                writeln!(s, "  {g}").unwrap();
            }
            s
        }
        ExportFormat::M2 => {
            let mut s = String::new();
            if annotate {
                s.push_str(&stage_comments(t, "--"));
            }
            writeln!(s, "R = QQ[{}];", atoms.join(", ")).unwrap();
            if gens.is_empty() {
                s.push_str("I = ideal(0_R);\n");
            } else {
                s.push_str("I = ideal(\n");
                writeln!(s, "  {}", gens.join(",\n  ")).unwrap();
                s.push_str(");\n");
            }
            s
        }
    };
    let format_name = match format {
        ExportFormat::Text => "text",
        ExportFormat::M2 => "m2",
        ExportFormat::Tree => "tree",
    };
    Ok(Report::ok(
        text.clone(),
        json!({ "format": format_name, "content": text }),
    ))
}
