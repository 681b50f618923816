//! JSON wire format (schema "amv1"), job configuration, and the command
//! entry points with their exit-code contract.
//!
//! The document format is strict: the schema tag must be "amv1" and
//! unknown fields are rejected so fixtures cannot drift silently.
//! Polynomials travel as canonical strings, boundary divisors as
//! coordinate strings tagged with their birth year. Resolution histories
//! are emitted as JSON lines, one node per line; bound reports as a
//! single JSON document.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::chart::{
    compute_data_vector, validate, AffineMarkedIdeal, Chart, CheckStatus, DataVector,
    DivisorEntry, TransitionMap,
};
use crate::driver::{resolve, ResolutionTree, ResolveOptions};
use crate::error::{Error, Result};
use crate::groebner;
use crate::poly::{RationalMapEntry, SparsePoly};
use crate::transform::{blowup_affine_marked_ideal, BlowupRecord, CentreSpec, ChartCentre};

pub const SCHEMA_VERSION: &str = "amv1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_BUDGET_EXCEEDED: i32 = 3;
pub const EXIT_INTERNAL_INCONSISTENCY: i32 = 4;

/// Env var overriding the Groebner step budget for every command.
pub const BUDGET_ENV_VAR: &str = "AMV_BUDGET_GB_STEPS";

// ---------------------------------------------------------------------------
// wire documents
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdealDoc {
    schema: String,
    mu: u32,
    charts: Vec<ChartDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartDoc {
    #[serde(default)]
    alpha: u32,
    #[serde(default)]
    beta: u32,
    nvars: usize,
    /// The chart is the complement of {f_loc = 0}; default 1 (all of A^n).
    #[serde(default)]
    f_loc: Option<String>,
    /// Full parameter system; defaults to the coordinates.
    #[serde(default)]
    params_u: Option<Vec<String>>,
    #[serde(default)]
    num_x_eqns: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    e_list: Vec<DivisorDoc>,
    gens: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DivisorDoc {
    /// Must be a plain coordinate ("x3"): boundary divisors are
    /// coordinate hyperplanes by definition.
    divisor: String,
    #[serde(default)]
    birth: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    source: usize,
    target: usize,
    entries: Vec<RationalEntryDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalEntryDoc {
    num: String,
    #[serde(default)]
    den: Option<String>,
    nvars: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn parse_poly(s: &str, nvars: usize, pointer: &str) -> Result<SparsePoly> {
    SparsePoly::parse(s, nvars)
        .map_err(|e| invalid(format!("at {pointer}: cannot parse polynomial {s:?}: {e}")))
}

/// A boundary divisor must be exactly one coordinate x_k. Anything else
/// (for example "x1+x2") is rejected with the remediation recipe: apply
/// the linear change of coordinates that carries the hypersurface to a
/// coordinate hyperplane, rewrite f_loc, params_u and the generators
/// through that change, and resubmit.
fn parse_divisor(doc: &DivisorDoc, nvars: usize, pointer: &str) -> Result<DivisorEntry> {
    let p = parse_poly(&doc.divisor, nvars, pointer)?;
    let mut terms = p.terms();
    let coordinate = match (terms.next(), terms.next()) {
        (Some((exps, _)), None) => {
            let vars: Vec<usize> =
                exps.iter().enumerate().filter(|(_, &e)| e > 0).map(|(k, _)| k).collect();
            match vars.as_slice() {
                [k] if exps[*k] == 1 => Some(*k),
                _ => None,
            }
        }
        _ => None,
    };
    let Some(var) = coordinate else {
        return Err(invalid(format!(
            "at {pointer}: boundary divisor {:?} is not a coordinate hyperplane; \
             boundary entries must be single coordinates (e.g. \"x2\"). Remedy: change \
             coordinates so the divisor becomes a coordinate hyperplane (for a smooth \
             divisor u, extend u to a coordinate system), rewrite f_loc, params_u and \
             the generators through that change, and list the new coordinate here.",
            doc.divisor
        )));
    };
    Ok(DivisorEntry { var, birth: doc.birth })
}

fn doc_to_ideal(doc: &IdealDoc) -> Result<AffineMarkedIdeal> {
    if doc.schema != SCHEMA_VERSION {
        return Err(invalid(format!(
            "at /schema: unsupported schema {:?}; this tool reads {SCHEMA_VERSION:?}",
            doc.schema
        )));
    }
    let mut charts = Vec::with_capacity(doc.charts.len());
    for (ci, cd) in doc.charts.iter().enumerate() {
        let n = cd.nvars;
        let f_loc = match &cd.f_loc {
            Some(s) => parse_poly(s, n, &format!("/charts/{ci}/f_loc"))?,
            None => SparsePoly::one(n),
        };
        let params_u = match &cd.params_u {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(pi, s)| parse_poly(s, n, &format!("/charts/{ci}/params_u/{pi}")))
                .collect::<Result<Vec<_>>>()?,
            None => (0..n).map(|j| SparsePoly::var(j, n)).collect(),
        };
        let e_list = cd
            .e_list
            .iter()
            .enumerate()
            .map(|(ei, ed)| parse_divisor(ed, n, &format!("/charts/{ci}/e_list/{ei}")))
            .collect::<Result<Vec<_>>>()?;
        let gens = cd
            .gens
            .iter()
            .enumerate()
            .map(|(gi, s)| parse_poly(s, n, &format!("/charts/{ci}/gens/{gi}")))
            .collect::<Result<Vec<_>>>()?;
        charts.push(Chart {
            alpha: cd.alpha,
            beta: cd.beta,
            nvars: n,
            f_loc,
            params_u,
            num_x_eqns: cd.num_x_eqns,
            e_list,
            gens,
        });
    }
    let transitions = doc
        .transitions
        .iter()
        .enumerate()
        .map(|(ti, td)| {
            let entries = td
                .entries
                .iter()
                .enumerate()
                .map(|(ei, ed)| {
                    let ptr = format!("/transitions/{ti}/entries/{ei}");
                    let numerator = parse_poly(&ed.num, ed.nvars, &ptr)?;
                    let denominator = match &ed.den {
                        Some(s) => parse_poly(s, ed.nvars, &ptr)?,
                        None => SparsePoly::one(ed.nvars),
                    };
                    Ok(RationalMapEntry { numerator, denominator })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TransitionMap { source: td.source, target: td.target, entries })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AffineMarkedIdeal { charts, transitions, mu: doc.mu, history: Vec::new() })
}

fn ideal_to_doc(t: &AffineMarkedIdeal) -> IdealDoc {
    IdealDoc {
        schema: SCHEMA_VERSION.to_string(),
        mu: t.mu,
        charts: t
            .charts
            .iter()
            .map(|c| ChartDoc {
                alpha: c.alpha,
                beta: c.beta,
                nvars: c.nvars,
                f_loc: Some(c.f_loc.to_canonical_string()),
                params_u: Some(c.params_u.iter().map(|p| p.to_canonical_string()).collect()),
                num_x_eqns: c.num_x_eqns,
                e_list: c
                    .e_list
                    .iter()
                    .map(|e| DivisorDoc { divisor: format!("x{}", e.var + 1), birth: e.birth })
                    .collect(),
                gens: c.gens.iter().map(|g| g.to_canonical_string()).collect(),
            })
            .collect(),
        transitions: t
            .transitions
            .iter()
            .map(|tr| TransitionDoc {
                source: tr.source,
                target: tr.target,
                entries: tr
                    .entries
                    .iter()
                    .map(|e| RationalEntryDoc {
                        num: e.numerator.to_canonical_string(),
                        den: if e.denominator.is_constant()
                            && !e.denominator.is_zero()
                            && e.denominator.to_canonical_string() == "1"
                        {
                            None
                        } else {
                            Some(e.denominator.to_canonical_string())
                        },
                        nvars: e.numerator.nvars(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Parse and validate a marked-ideal document from a file.
pub fn parse_input(path: &Path) -> Result<AffineMarkedIdeal> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}

/// Parse and validate a marked-ideal document from a string.
pub fn parse_str(text: &str) -> Result<AffineMarkedIdeal> {
    let doc: IdealDoc = serde_json::from_str(text).map_err(|e| {
        invalid(format!("schema violation at line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let t = doc_to_ideal(&doc)?;
    let report = validate(&t, 4, 0)?;
    if !report.all_pass() {
        let mut msgs = Vec::new();
        for (name, status) in &report.items {
            if let CheckStatus::Fail(why) = status {
                msgs.push(format!("{name}: {why}"));
            }
        }
        return Err(invalid(format!("document fails validation: {}", msgs.join("; "))));
    }
    Ok(t)
}

/// Print a marked ideal in the canonical document form (stable field and
/// chart order, two-space indentation, trailing newline). parse and print
/// are mutually inverse on canonical documents.
pub fn print_ideal(t: &AffineMarkedIdeal) -> String {
    let doc = ideal_to_doc(t);
    let mut s = serde_json::to_string_pretty(&doc).expect("document serialization cannot fail");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// history emission
// ---------------------------------------------------------------------------

fn centre_json(c: &CentreSpec) -> serde_json::Value {
    serde_json::Value::Array(
        c.per_chart
            .iter()
            .map(|pc| {
                serde_json::json!({
                    "chart_index": pc.chart_index,
                    "params": pc.params.iter().map(|p| p.to_canonical_string()).collect::<Vec<_>>(),
                    "subcover": pc.subcover.to_canonical_string(),
                })
            })
            .collect(),
    )
}

fn history_node(rec: &BlowupRecord, emit_invariants: bool) -> serde_json::Value {
    let mut node = serde_json::json!({
        "node": "blowup",
        "year": rec.year,
        "step": rec.step,
        "centre": centre_json(&rec.centre),
        "children": rec.children.iter().map(|(parent, kids)| {
            serde_json::json!({ "parent": parent, "charts": kids })
        }).collect::<Vec<_>>(),
    });
    if emit_invariants {
        if let Some(inv) = &rec.invariant {
            node["invariant"] = serde_json::Value::String(inv.to_string());
        }
    }
    node
}

/// Render a finished run as JSON lines: one blow-up node per line followed
/// by a single summary node.
pub fn history_lines(tree: &ResolutionTree, emit_invariants: bool) -> String {
    let mut out = String::new();
    for rec in &tree.final_state.history {
        out.push_str(&history_node(rec, emit_invariants).to_string());
        out.push('\n');
    }
    let final_dv = compute_data_vector(&tree.final_state);
    let summary = serde_json::json!({
        "node": "summary",
        "years": tree.stats.years,
        "blowups": tree.stats.blowups,
        "peak_charts": tree.stats.peak_charts,
        "monotonicity_checks": tree.stats.monotonicity_checks,
        "monotonicity_violations": tree.stats.monotonicity_violations,
        "final_charts": tree.final_state.charts.len(),
        "final_data_vector": data_vector_json(&final_dv),
    });
    out.push_str(&summary.to_string());
    out.push('\n');
    out
}

fn data_vector_json(g: &DataVector) -> serde_json::Value {
    serde_json::json!({
        "r": g.r, "n": g.n, "m": g.m, "d": g.d, "l": g.l, "q": g.q, "mu": g.mu
    })
}

// ---------------------------------------------------------------------------
// job configuration and the run entry point
// ---------------------------------------------------------------------------

/// Description of the bound-report input: a data vector given literally.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaDoc {
    pub r: u64,
    pub n: u64,
    pub m: u64,
    pub d: u64,
    pub l: u64,
    pub q: u64,
    pub mu: u64,
}

impl GammaDoc {
    pub fn to_data_vector(&self) -> DataVector {
        DataVector {
            r: self.r,
            n: self.n,
            m: self.m,
            d: self.d,
            l: self.l,
            q: self.q,
            mu: self.mu,
        }
    }
}

#[derive(Debug, Clone)]
pub enum CommandSpec {
    Resolve { input: PathBuf, output: Option<PathBuf> },
    Bounds { gamma: GammaDoc, output: Option<PathBuf> },
    Transform { input: PathBuf, centre: String, output: Option<PathBuf> },
    Check { input: PathBuf, thorough: bool },
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: CommandSpec,
    pub seed: u64,
    pub groebner_budget: u64,
    pub year_limit: u32,
    pub digit_cap: u64,
    pub emit_invariants: bool,
}

impl JobConfig {
    pub fn new(command: CommandSpec) -> Self {
        JobConfig {
            command,
            seed: 0,
            groebner_budget: groebner::DEFAULT_BUDGET,
            year_limit: 200,
            digit_cap: 1_000_000,
            emit_invariants: true,
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::YearLimit { .. } => EXIT_BUDGET_EXCEEDED,
        Error::Internal(_) | Error::DivisionRemainder => EXIT_INTERNAL_INCONSISTENCY,
        _ => EXIT_INVALID_INPUT,
    }
}

fn effective_budget(cfg: &JobConfig) -> u64 {
    std::env::var(BUDGET_ENV_VAR)
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or(cfg.groebner_budget)
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)
        }
    }
}

/// Parse a centre specification: either inline JSON or a path to a JSON
/// file, with entries {"chart_index", "params": [poly strings], "subcover"?}.
fn parse_centre(text: &str, t: &AffineMarkedIdeal) -> Result<CentreSpec> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct CentreEntryDoc {
        chart_index: usize,
        params: Vec<String>,
        #[serde(default)]
        subcover: Option<String>,
    }
    let body = if text.trim_start().starts_with('[') {
        text.to_string()
    } else {
        std::fs::read_to_string(text)
            .map_err(|e| invalid(format!("cannot read centre file {text:?}: {e}")))?
    };
    let docs: Vec<CentreEntryDoc> = serde_json::from_str(&body)
        .map_err(|e| invalid(format!("centre JSON invalid at line {}: {e}", e.line())))?;
    let mut per_chart = Vec::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        let chart = t
            .charts
            .get(d.chart_index)
            .ok_or_else(|| invalid(format!("centre entry {i}: no chart {}", d.chart_index)))?;
        let n = chart.nvars;
        let params = d
            .params
            .iter()
            .enumerate()
            .map(|(pi, s)| parse_poly(s, n, &format!("centre[{i}].params[{pi}]")))
            .collect::<Result<Vec<_>>>()?;
        let subcover = match &d.subcover {
            Some(s) => parse_poly(s, n, &format!("centre[{i}].subcover"))?,
            None => SparsePoly::one(n),
        };
        per_chart.push(ChartCentre { chart_index: d.chart_index, params, subcover });
    }
    Ok(CentreSpec { per_chart })
}

fn run_inner(cfg: &JobConfig) -> Result<i32> {
    let budget = effective_budget(cfg);
    match &cfg.command {
        CommandSpec::Resolve { input, output } => {
            let t = parse_input(input)?;
            let opts = ResolveOptions {
                year_limit: cfg.year_limit,
                budget,
                seed: cfg.seed,
                monotonicity_samples: if cfg.emit_invariants { 4 } else { 0 },
            };
            let tree = resolve(&t, &opts)?;
            if tree.stats.monotonicity_violations > 0 {
                return Err(Error::Internal(format!(
                    "invariant monotonicity violated at {} sampled points",
                    tree.stats.monotonicity_violations
                )));
            }
            write_output(output, &history_lines(&tree, cfg.emit_invariants))?;
            Ok(EXIT_OK)
        }
        CommandSpec::Bounds { gamma, output } => {
            let dv = gamma.to_data_vector();
            let report = bounds::gamma(dv.m, &dv)?;
            let mut json = report.to_json(12);
            let iter = bounds::iterate_bl(&bounds::BoundVec::from_data(&dv), 6, cfg.digit_cap);
            json["iterated_blowup_law"] = serde_json::json!({
                "t": iter.t,
                "closed_form_matches": iter.entry_match,
                "notes": iter.notes,
            });
            let mut text = serde_json::to_string_pretty(&json).expect("report serialization");
            text.push('\n');
            write_output(output, &text)?;
            Ok(EXIT_OK)
        }
        CommandSpec::Transform { input, centre, output } => {
            let t = parse_input(input)?;
            let spec = parse_centre(centre, &t)?;
            let (out, _maps) = blowup_affine_marked_ideal(&t, &spec, u32::MAX, budget)?;
            write_output(output, &print_ideal(&out))?;
            Ok(EXIT_OK)
        }
        CommandSpec::Check { input, thorough } => {
            let text = std::fs::read_to_string(input)
                .map_err(|e| invalid(format!("cannot read {}: {e}", input.display())))?;
            let doc: IdealDoc = serde_json::from_str(&text).map_err(|e| {
                invalid(format!(
                    "schema violation at line {}, column {}: {e}",
                    e.line(),
                    e.column()
                ))
            })?;
            let t = doc_to_ideal(&doc)?;
            let samples = if *thorough { 25 } else { 4 };
            let report = validate(&t, samples, cfg.seed)?;
            let mut all_ok = true;
            let mut out = String::new();
            for (name, status) in &report.items {
                let line = match status {
                    CheckStatus::Pass => format!("PASS {name}"),
                    CheckStatus::PassSampled(k) => format!("PASS {name} ({k} samples)"),
                    CheckStatus::Fail(why) => {
                        all_ok = false;
                        format!("FAIL {name}: {why}")
                    }
                };
                out.push_str(&line);
                out.push('\n');
            }
            write_output(&None, &out)?;
            Ok(if all_ok { EXIT_OK } else { EXIT_INVALID_INPUT })
        }
    }
}

/// Execute a job; never panics. Exit codes: 0 success, 2 invalid input,
/// 3 budget or year limit exceeded, 4 internal-consistency failure (an
/// invariant the algorithm guarantees was observed violated).
pub fn run(cfg: &JobConfig) -> i32 {
    match run_inner(cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUSP_DOC: &str = r#"{
  "schema": "amv1",
  "mu": 1,
  "charts": [
    { "nvars": 2, "gens": ["x2^2 - x1^3"] }
  ]
}"#;

    #[test]
    fn parse_minimal_document() {
        let t = parse_str(CUSP_DOC).unwrap();
        assert_eq!(t.mu, 1);
        assert_eq!(t.charts.len(), 1);
        assert_eq!(t.charts[0].nvars, 2);
        assert_eq!(t.charts[0].gens[0].to_canonical_string(), "x2^2 + -1*x1^3");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let doc = r#"{ "schema": "amv1", "mu": 1, "charts": [], "extra": 1 }"#;
        let err = parse_str(doc).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn wrong_schema_tag_is_rejected() {
        let doc = r#"{ "schema": "amv0", "mu": 1, "charts": [] }"#;
        let err = parse_str(doc).unwrap_err();
        assert!(err.to_string().contains("amv1"), "{err}");
    }

    #[test]
    fn non_coordinate_divisor_is_rejected_with_recipe() {
        let doc = r#"{
  "schema": "amv1",
  "mu": 1,
  "charts": [
    { "nvars": 2, "gens": ["x1"], "e_list": [ { "divisor": "x1 + x2", "birth": 1 } ] }
  ]
}"#;
        let err = parse_str(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/charts/0/e_list/0"), "{msg}");
        assert!(msg.contains("coordinate hyperplane"), "{msg}");
        assert!(msg.contains("Remedy"), "{msg}");
    }

    #[test]
    fn print_then_parse_round_trips() {
        let t = parse_str(CUSP_DOC).unwrap();
        let printed = print_ideal(&t);
        let t2 = parse_str(&printed).unwrap();
        assert_eq!(t.charts, t2.charts);
        assert_eq!(t.mu, t2.mu);
        // And printing the reparsed object is byte-identical.
        assert_eq!(printed, print_ideal(&t2));
    }

    #[test]
    fn resolve_job_writes_history_lines() {
        let dir = std::env::temp_dir().join(format!("amv-io-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let input = dir.join("cusp.json");
        let output = dir.join("cusp.history.jsonl");
        std::fs::write(&input, CUSP_DOC).unwrap();
        let cfg = JobConfig::new(CommandSpec::Resolve {
            input: input.clone(),
            output: Some(output.clone()),
        });
        assert_eq!(run(&cfg), EXIT_OK);
        let text = std::fs::read_to_string(&output).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines.len() >= 2);
        for line in &lines {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v["node"] == "blowup" || v["node"] == "summary");
        }
        let last: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
        assert_eq!(last["node"], "summary");
        assert_eq!(last["final_charts"], 0);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn resolve_with_tiny_year_limit_exceeds_budget() {
        let dir = std::env::temp_dir().join(format!("amv-io-limit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let input = dir.join("cusp.json");
        std::fs::write(&input, CUSP_DOC).unwrap();
        let mut cfg =
            JobConfig::new(CommandSpec::Resolve { input: input.clone(), output: None });
        cfg.year_limit = 1;
        assert_eq!(run(&cfg), EXIT_BUDGET_EXCEEDED);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn bounds_job_reports_grz_class() {
        let gamma = GammaDoc { r: 0, n: 2, m: 1, d: 3, l: 1, q: 1, mu: 1 };
        let dir = std::env::temp_dir().join(format!("amv-io-bounds-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let output = dir.join("report.json");
        let cfg = JobConfig::new(CommandSpec::Bounds { gamma, output: Some(output.clone()) });
        assert_eq!(run(&cfg), EXIT_OK);
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
        assert_eq!(v["grz_class"], 4);
        std::fs::remove_dir_all(&dir).ok();
    }
}
