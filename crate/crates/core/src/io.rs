//! File formats: relation CSV, domain declarations, and statistics.
//!
//! A relation file has a header row naming the attributes followed by the
//! column `__annotation`. Values that parse as 64-bit integers are integers,
//! anything else is text.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{AjarError, Result};
use crate::ghd::Statistics;
use crate::relation::{AnnotatedRelation, DomainRegistry};
use crate::semiring::{Annotation, DomainKind, SemiringSpec};
use crate::value::{Attr, Tuple, Value};

pub const ANNOTATION_COLUMN: &str = "__annotation";

fn csv_err(e: csv::Error) -> AjarError {
    AjarError::Parse(format!("csv: {e}"))
}

pub fn read_relation<K: Annotation>(reader: impl Read, semiring: &SemiringSpec<K>) -> Result<AnnotatedRelation<K>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.last() != Some(&ANNOTATION_COLUMN) {
        return Err(AjarError::Parse(format!("last column must be {ANNOTATION_COLUMN}")));
    }
    let schema: Vec<Attr> = cols[..cols.len() - 1].iter().map(|c| Attr::new(c)).collect();
    let mut rel = AnnotatedRelation::empty(schema)?;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != cols.len() {
            return Err(AjarError::Parse(format!("row {}: expected {} fields", line + 2, cols.len())));
        }
        let tuple: Tuple = rec.iter().take(cols.len() - 1).map(Value::parse).collect();
        let text = &rec[cols.len() - 1];
        let k = K::parse_annotation(text).ok_or_else(|| {
            AjarError::Parse(format!("row {}: bad annotation {text:?} for {}", line + 2, semiring.name()))
        })?;
        if semiring.domain() == DomainKind::NonnegReal && k.is_negative() {
            return Err(AjarError::Parse(format!("row {}: negative annotation {text:?}", line + 2)));
        }
        rel.insert(tuple, k, semiring)?;
    }
    Ok(rel)
}

pub fn read_relation_file<K: Annotation>(path: &std::path::Path, semiring: &SemiringSpec<K>) -> Result<AnnotatedRelation<K>> {
    let f = std::fs::File::open(path)
        .map_err(|e| AjarError::Io(format!("{}: {e}", path.display())))?;
    read_relation(f, semiring)
}

/// Write `rel` with columns in `order` (all of its attributes), rows sorted.
pub fn write_relation<K: Annotation>(rel: &AnnotatedRelation<K>, order: &[Attr], writer: impl Write) -> Result<()> {
    let rel = rel.reorder(order)?;
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header: Vec<&str> = order.iter().map(|a| a.as_str()).collect();
    header.push(ANNOTATION_COLUMN);
    w.write_record(&header).map_err(csv_err)?;
    for (t, k) in rel.iter() {
        let mut row: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        row.push(k.render());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn relation_to_string<K: Annotation>(rel: &AnnotatedRelation<K>, order: &[Attr]) -> Result<String> {
    let mut buf = Vec::new();
    write_relation(rel, order, &mut buf)?;
    String::from_utf8(buf).map_err(|e| AjarError::Internal(e.to_string()))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum DomainSpec {
    Values(Vec<Value>),
    /// The literal string `"active"`.
    Keyword(String),
}

/// Parse a domain file. `"active"` entries take the values occurring in
/// `relations`.
pub fn parse_domains<K: Annotation>(text: &str, relations: &[&AnnotatedRelation<K>]) -> Result<DomainRegistry> {
    let raw: BTreeMap<String, DomainSpec> =
        serde_json::from_str(text).map_err(|e| AjarError::Parse(format!("domains: {e}")))?;
    let active = DomainRegistry::active(relations);
    let mut out = DomainRegistry::new();
    for (name, spec) in raw {
        let a = Attr::from(name);
        match spec {
            DomainSpec::Values(vs) => out.declare(a, vs),
            DomainSpec::Keyword(k) if k == "active" => {
                out.declare(a.clone(), active.get(&a).cloned().unwrap_or_default());
            }
            DomainSpec::Keyword(k) => {
                return Err(AjarError::Parse(format!("domains: {a}: expected a list or \"active\", got {k:?}")))
            }
        }
    }
    Ok(out)
}

pub fn parse_stats(text: &str) -> Result<Statistics> {
    serde_json::from_str(text).map_err(|e| AjarError::Parse(format!("stats: {e}")))
}
