//! Bit-exact file formats.
//!
//! All artifacts are JSON (single documents) or JSONL (one object per line),
//! UTF-8, with floats serialized at 17 significant digits so that written
//! values round-trip exactly and goldens stay stable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use lekb_core::entity::{IngestWarning, ValidateError};
use lekb_core::eval::EvalReport;
use lekb_core::{
    Ingestion, KnowledgeBase, LegalEntityRecord, MemberId, RawLegalEntity, Role, RoleConsensus,
    UncheckedRecord,
};

use crate::config::ConfigEcho;
use crate::error::CliError;

/// Compact JSON with every `f64` written as a 17-significant-digit number.
struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buffer = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut buffer, SigDigits17);
    value
        .serialize(&mut serializer)
        .map_err(CliError::internal)?;
    String::from_utf8(buffer).map_err(CliError::internal)
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, lines: &[T]) -> Result<(), CliError> {
    let mut text = String::new();
    for line in lines {
        text.push_str(&to_json_string(line)?);
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

// --- knowledge-base file ---------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbFile {
    pub version: u32,
    pub config: serde_json::Value,
    pub entities: Vec<EntityWire>,
    pub dropped_clusters: BTreeMap<usize, usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityWire {
    pub entity_id: String,
    pub cluster_size: usize,
    pub members: Vec<MemberWire>,
    pub fields: BTreeMap<String, ConsensusWire>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberWire {
    pub doc_id: String,
    pub local_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsensusWire {
    pub value: String,
    pub support: usize,
    pub alternatives: Vec<(String, usize)>,
}

pub const KB_FORMAT_VERSION: u32 = 1;

pub fn kb_to_wire(kb: &KnowledgeBase, echo: &ConfigEcho) -> Result<KbFile, CliError> {
    Ok(KbFile {
        version: KB_FORMAT_VERSION,
        config: serde_json::to_value(echo).map_err(CliError::internal)?,
        entities: kb.records.iter().map(record_to_wire).collect(),
        dropped_clusters: kb.dropped_clusters.clone(),
    })
}

fn record_to_wire(record: &LegalEntityRecord) -> EntityWire {
    EntityWire {
        entity_id: record.entity_id.clone(),
        cluster_size: record.cluster_size,
        members: record
            .members
            .iter()
            .map(|m| MemberWire {
                doc_id: m.doc_id.clone(),
                local_id: m.local_id.clone(),
            })
            .collect(),
        fields: record
            .fields
            .iter()
            .map(|(role, consensus)| {
                (
                    String::from(role.name()),
                    ConsensusWire {
                        value: consensus.value.clone(),
                        support: consensus.support,
                        alternatives: consensus.alternatives.clone(),
                    },
                )
            })
            .collect(),
    }
}

pub fn read_kb_file(path: &Path) -> Result<Vec<LegalEntityRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("missing_file", format!("{}: {e}", path.display())))?;
    let file: KbFile = serde_json::from_str(&text)
        .map_err(|e| CliError::validation("invalid_kb", format!("{}: {e}", path.display())))?;
    if file.version != KB_FORMAT_VERSION {
        return Err(CliError::validation(
            "invalid_kb",
            format!("{}: unsupported version {}", path.display(), file.version),
        ));
    }
    let mut records = Vec::with_capacity(file.entities.len());
    for entity in &file.entities {
        let mut fields = BTreeMap::new();
        for (name, consensus) in &entity.fields {
            let role = Role::parse(name).ok_or_else(|| {
                CliError::validation(
                    "invalid_kb",
                    format!(
                        "{}: entity {}: unknown role \"{name}\"",
                        path.display(),
                        entity.entity_id
                    ),
                )
            })?;
            fields.insert(
                role,
                RoleConsensus {
                    value: consensus.value.clone(),
                    support: consensus.support,
                    alternatives: consensus.alternatives.clone(),
                },
            );
        }
        records.push(LegalEntityRecord {
            entity_id: entity.entity_id.clone(),
            fields,
            cluster_size: entity.cluster_size,
            members: entity
                .members
                .iter()
                .map(|m| MemberId {
                    doc_id: m.doc_id.clone(),
                    local_id: m.local_id.clone(),
                })
                .collect(),
        });
    }
    Ok(records)
}

// --- corpus JSONL ------------------------------------------------------------

/// Field pairs in file order; duplicate keys are preserved so ingestion can
/// warn instead of silently dropping them.
#[derive(Debug)]
pub struct FieldPairs(pub Vec<(String, String)>);

impl<'de> Deserialize<'de> for FieldPairs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairsVisitor;
        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = FieldPairs;

            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a map of role name to string value")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some((key, value)) = map.next_entry::<String, String>()? {
                    pairs.push((key, value));
                }
                Ok(FieldPairs(pairs))
            }
        }
        deserializer.deserialize_map(PairsVisitor)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusLineIn {
    pub doc_id: String,
    pub local_id: String,
    pub fields: FieldPairs,
}

#[derive(Debug, Serialize)]
pub struct CorpusLineOut<'a> {
    pub doc_id: &'a str,
    pub local_id: &'a str,
    pub fields: BTreeMap<&'static str, &'a str>,
}

impl<'a> CorpusLineOut<'a> {
    pub fn of(entity: &'a RawLegalEntity) -> Self {
        CorpusLineOut {
            doc_id: &entity.doc_id,
            local_id: &entity.local_id,
            fields: entity
                .fields()
                .iter()
                .map(|(&role, value)| (role.name(), value.as_str()))
                .collect(),
        }
    }
}

fn validation_code(error: &ValidateError) -> &'static str {
    match error {
        ValidateError::EmptyEntity => "empty_entity",
        ValidateError::UnknownRole { .. } => "unknown_role",
        ValidateError::DuplicateId { .. } => "duplicate_id",
        ValidateError::EmptyValue { .. } => "empty_value",
    }
}

fn warning_line(line: usize, warning: &IngestWarning) -> String {
    serde_json::json!({ "warning": warning.to_string(), "line": line }).to_string()
}

/// Reads and validates an ingestion corpus. Every failure names its line.
pub fn read_corpus(path: &Path) -> Result<Vec<RawLegalEntity>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("missing_file", format!("{}: {e}", path.display())))?;
    let mut ingestion = Ingestion::new();
    let mut entities = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_number = index + 1;
        if line.trim().is_empty() {
            return Err(CliError::validation(
                "malformed_line",
                format!("line {line_number}: empty line"),
            ));
        }
        let parsed: CorpusLineIn = serde_json::from_str(line).map_err(|e| {
            CliError::validation("malformed_line", format!("line {line_number}: {e}"))
        })?;
        let record = UncheckedRecord {
            doc_id: parsed.doc_id,
            local_id: parsed.local_id,
            fields: parsed.fields.0,
        };
        let (entity, warnings) = ingestion.accept(&record).map_err(|e| {
            CliError::validation(validation_code(&e), format!("line {line_number}: {e}"))
        })?;
        for warning in &warnings {
            eprintln!("{}", warning_line(line_number, warning));
        }
        entities.push(entity);
    }
    if entities.is_empty() {
        return Err(CliError::validation(
            "empty_input",
            format!("{}: no records", path.display()),
        ));
    }
    Ok(entities)
}

// --- provenance JSONL --------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceLine {
    pub doc_id: String,
    pub local_id: String,
    pub entity_id: String,
}

// --- evaluation report -------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub version: u32,
    pub buckets: Vec<BucketWire>,
    pub unmatched_generated: usize,
    pub unmatched_truth: usize,
    pub entities: Vec<ScoreWire>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketWire {
    pub label: String,
    pub count: usize,
    pub mean_key: Option<f64>,
    pub mean_all: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWire {
    pub entity_id: String,
    pub matched_truth: Option<String>,
    pub key_correct: bool,
    pub all_fraction: f64,
    pub cluster_size: usize,
}

pub fn report_to_wire(report: &EvalReport) -> ReportFile {
    ReportFile {
        version: KB_FORMAT_VERSION,
        buckets: report
            .buckets
            .iter()
            .map(|b| BucketWire {
                label: String::from(b.label),
                count: b.count,
                mean_key: b.mean_key,
                mean_all: b.mean_all,
            })
            .collect(),
        unmatched_generated: report.unmatched_generated,
        unmatched_truth: report.unmatched_truth,
        entities: report
            .entities
            .iter()
            .map(|s| ScoreWire {
                entity_id: s.entity_id.clone(),
                matched_truth: s.matched_truth.clone(),
                key_correct: s.key_correct,
                all_fraction: s.all_fraction,
                cluster_size: s.cluster_size,
            })
            .collect(),
    }
}

/// Plain-text accuracy table: one column per cluster-size range, rows for
/// `%key`, `%all` and the sample counts.
pub fn render_table(report: &EvalReport) -> String {
    let percent = |v: Option<f64>| match v {
        Some(v) => format!("{:.1}%", v * 100.0),
        None => String::from("-"),
    };
    let mut columns: Vec<[String; 4]> = Vec::new();
    for bucket in &report.buckets {
        columns.push([
            String::from(bucket.label),
            percent(bucket.mean_key),
            percent(bucket.mean_all),
            bucket.count.to_string(),
        ]);
    }
    let head = ["", "%key", "%all", "Nb. of samples"];
    let head_width = head.iter().map(|h| h.len()).max().unwrap_or(0);
    let widths: Vec<usize> = columns
        .iter()
        .map(|c| c.iter().map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in 0..4 {
        let _ = write!(out, "{:<head_width$}", head[row]);
        for (column, width) in columns.iter().zip(&widths) {
            let _ = write!(out, " | {:>width$}", column[row]);
        }
        out.push('\n');
    }
    out
}
