//! CSV and JSON renderings of tables, reports and sample batches.
//!
//! CSV output starts with `#` comment lines echoing the resolved run
//! configuration. JSON output is a single object with `schema_version`;
//! every field value is rendered as a string so exact rationals survive a
//! parse/serialize round trip unchanged.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::identities::IdentityReport;
use crate::monomial::Monomial;
use crate::pmf::{ClosedFormCheck, MomentReport, PmfTable, TableMeta};
use crate::sampler::SampleBatch;
use crate::scalar::{Field, Mode, DEFAULT_TOL};

pub const SCHEMA_VERSION: u32 = 1;

/// Resolved run configuration, echoed in every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunInfo {
    pub command: String,
    pub fields: Vec<(String, String)>,
    pub mode: Mode,
}

impl RunInfo {
    pub fn new(command: impl Into<String>, mode: Mode) -> Self {
        RunInfo {
            command: command.into(),
            fields: Vec::new(),
            mode,
        }
    }

    pub fn field(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    fn banner(&self) -> Option<String> {
        (self.mode == Mode::Approximate).then(|| {
            format!("APPROXIMATE: decimal input; binary64 arithmetic, relative tolerance {DEFAULT_TOL:e}")
        })
    }

    fn preamble(&self) -> String {
        let mut line = format!("# rpq-urn schema={SCHEMA_VERSION} command={}", self.command);
        for (k, v) in &self.fields {
            line.push_str(&format!(" {k}={v}"));
        }
        line.push_str(&format!(" mode={}\n", self.mode));
        if let Some(b) = self.banner() {
            line.push_str(&format!("# {b}\n"));
        }
        line
    }

    fn json_header(&self) -> Map<String, Value> {
        let mut config = Map::new();
        for (k, v) in &self.fields {
            config.insert(k.clone(), Value::String(v.clone()));
        }
        config.insert("mode".into(), Value::String(self.mode.to_string()));
        let mut out = Map::new();
        out.insert("schema_version".into(), Value::String(SCHEMA_VERSION.to_string()));
        out.insert("command".into(), Value::String(self.command.clone()));
        if let Some(b) = self.banner() {
            out.insert("banner".into(), Value::String(b));
        }
        out.insert("config".into(), Value::Object(config));
        out
    }
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::invalid("format", format!("csv serialization failed: {e}"))
}

fn write_csv(info: &RunInfo, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(csv_error)?;
    for row in rows {
        w.write_record(&row).map_err(csv_error)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)?;
    Ok(info.preamble() + &body)
}

fn s(v: impl ToString) -> Value {
    Value::String(v.to_string())
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> Value {
    v.as_ref().map_or(Value::Null, s)
}

fn monomial(m: &Option<Monomial>) -> Value {
    m.map_or(Value::Null, |m| json!({ "tau1": s(m.tau1), "tau2": s(m.tau2) }))
}

fn meta_json(meta: &TableMeta) -> Value {
    json!({
        "kind": s(meta.kind),
        "law": s(&meta.law),
        "k": s(meta.k),
        "n": s(meta.n),
        "algebra": {
            "name": s(&meta.algebra.name),
            "p": s(&meta.algebra.p),
            "q": s(&meta.algebra.q),
            "tau1": s(&meta.algebra.tau1),
            "tau2": s(&meta.algebra.tau2),
            "rule": s(&meta.algebra.rule),
        },
        "labels": meta.labels,
    })
}

fn point(x: &[u32]) -> Value {
    Value::Array(x.iter().map(s).collect())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = serde_json::to_string_pretty(v).expect("values built from strings always serialize");
    out.push('\n');
    out
}

/// Columns `labels..., weight, probability[, closed_form]`.
pub fn table_csv<N: Field>(info: &RunInfo, table: &PmfTable<N>) -> Result<String> {
    let mut header = table.meta.labels.clone();
    header.extend(["weight".into(), "probability".into()]);
    if table.closed_form.is_some() {
        header.push("closed_form".into());
    }
    let rows = (0..table.len())
        .map(|i| {
            let mut row: Vec<String> = table.support[i].0.iter().map(u32::to_string).collect();
            row.push(table.weights[i].to_string());
            row.push(table.probabilities[i].to_string());
            if let Some(c) = &table.closed_form {
                row.push(c[i].to_string());
            }
            row
        })
        .collect();
    write_csv(info, header, rows)
}

pub fn table_json<N: Field>(info: &RunInfo, table: &PmfTable<N>, check: Option<&ClosedFormCheck<N>>) -> Value {
    let mut out = info.json_header();
    out.insert("table".into(), meta_json(&table.meta));
    out.insert("z_enumerated".into(), s(&table.z_enumerated));
    out.insert("z_closed_form".into(), opt(&table.z_closed_form));
    out.insert("discrepancy".into(), monomial(&table.discrepancy));
    let rows = (0..table.len())
        .map(|i| {
            let mut row = Map::new();
            row.insert("point".into(), point(&table.support[i].0));
            row.insert("weight".into(), s(&table.weights[i]));
            row.insert("probability".into(), s(&table.probabilities[i]));
            if let Some(c) = &table.closed_form {
                row.insert("closed_form".into(), s(&c[i]));
            }
            Value::Object(row)
        })
        .collect();
    out.insert("rows".into(), Value::Array(rows));
    if let Some(c) = check {
        out.insert("closed_form_check".into(), check_json(c));
    }
    Value::Object(out)
}

fn check_json<N: Field>(c: &ClosedFormCheck<N>) -> Value {
    let mismatches: Vec<Value> = c
        .mismatches()
        .map(|p| {
            json!({
                "point": point(&p.point.0),
                "closed": s(&p.closed),
                "oracle": s(&p.oracle),
                "monomial": monomial(&p.monomial),
            })
        })
        .collect();
    json!({
        "law": s(&c.law),
        "points": s(c.points.len()),
        "all_exact": s(c.all_exact()),
        "mismatches": mismatches,
    })
}

fn exps(m: &Option<Monomial>) -> (String, String) {
    m.map_or((String::new(), String::new()), |m| (m.tau1.to_string(), m.tau2.to_string()))
}

/// Columns `identity,k,n,groups,exact,a,b`; `a,b` are empty when no
/// monomial relates the two sides.
pub fn identities_csv<N: Field>(info: &RunInfo, reports: &[IdentityReport<N>]) -> Result<String> {
    let header = ["identity", "k", "n", "groups", "exact", "a", "b"].map(String::from).to_vec();
    let rows = reports
        .iter()
        .map(|r| {
            let (a, b) = exps(&r.discrepancy);
            vec![
                r.identity.name().to_string(),
                r.k.to_string(),
                r.n.to_string(),
                groups_label(r),
                r.exact_match.to_string(),
                a,
                b,
            ]
        })
        .collect();
    write_csv(info, header, rows)
}

fn groups_label<N>(r: &IdentityReport<N>) -> String {
    match (&r.groups, r.m) {
        (Some(g), _) => g.label(),
        (None, Some(m)) => format!("m={m}"),
        (None, None) => String::new(),
    }
}

pub fn identities_json<N: Field>(info: &RunInfo, reports: &[IdentityReport<N>]) -> Value {
    let mut out = info.json_header();
    let rows = reports
        .iter()
        .map(|r| {
            json!({
                "identity": s(r.identity.name()),
                "k": s(r.k),
                "n": s(r.n),
                "groups": s(groups_label(r)),
                "exact": s(r.exact_match),
                "lhs": s(&r.lhs),
                "rhs": s(&r.rhs),
                "discrepancy": monomial(&r.discrepancy),
            })
        })
        .collect();
    out.insert("all_exact".into(), s(reports.iter().all(|r| r.exact_match)));
    out.insert("rows".into(), Value::Array(rows));
    Value::Object(out)
}

/// Columns `quantity,order,closed_form,oracle,matched,a,b,note`.
pub fn moments_csv<N: Field>(info: &RunInfo, reports: &[MomentReport<N>]) -> Result<String> {
    let header = ["quantity", "order", "closed_form", "oracle", "matched", "a", "b", "note"]
        .map(String::from)
        .to_vec();
    let rows = reports
        .iter()
        .map(|r| {
            let (a, b) = exps(&r.discrepancy);
            vec![
                r.quantity.clone(),
                r.order.map(|o| o.to_string()).unwrap_or_default(),
                r.closed_form.as_ref().map(|c| c.to_string()).unwrap_or_default(),
                r.oracle.to_string(),
                r.matched.to_string(),
                a,
                b,
                r.note.clone(),
            ]
        })
        .collect();
    write_csv(info, header, rows)
}

pub fn moments_json<N: Field>(info: &RunInfo, reports: &[MomentReport<N>]) -> Value {
    let mut out = info.json_header();
    let rows = reports
        .iter()
        .map(|r| {
            json!({
                "quantity": s(&r.quantity),
                "order": opt(&r.order),
                "closed_form": opt(&r.closed_form),
                "oracle": s(&r.oracle),
                "matched": s(r.matched),
                "discrepancy": monomial(&r.discrepancy),
                "note": s(&r.note),
            })
        })
        .collect();
    out.insert("rows".into(), Value::Array(rows));
    Value::Object(out)
}

/// One row per draw: `draw, labels...`.
pub fn sample_csv<N: Field>(info: &RunInfo, batch: &SampleBatch<N>) -> Result<String> {
    let mut header = vec!["draw".to_string()];
    header.extend(batch.meta.labels.iter().cloned());
    let rows = batch
        .draws
        .iter()
        .enumerate()
        .map(|(i, d)| std::iter::once(i.to_string()).chain(d.0.iter().map(u32::to_string)).collect())
        .collect();
    write_csv(info, header, rows)
}

/// Summary with per-point counts, empirical frequencies and exact expected
/// probabilities; individual draws are left to the CSV form.
pub fn sample_json<N: Field>(info: &RunInfo, batch: &SampleBatch<N>) -> Value {
    let mut out = info.json_header();
    out.insert("table".into(), meta_json(&batch.meta));
    out.insert("seed".into(), s(batch.seed));
    out.insert("count".into(), s(batch.count));
    let freqs = batch.empirical_frequencies();
    let rows = (0..batch.support.len())
        .map(|i| {
            json!({
                "point": point(&batch.support[i].0),
                "count": s(batch.counts[i]),
                "frequency": s(&freqs[i]),
                "expected": s(&batch.expected[i]),
            })
        })
        .collect();
    out.insert("rows".into(), Value::Array(rows));
    out.insert("within_3_standard_errors".into(), s(batch.within_standard_errors(3.0)));
    Value::Object(out)
}
