//! Scoring of a generated knowledge base against ground truth.
//!
//! Two metrics per generated entity: `%key` is one when both the corporate
//! name and the registration number match the truth after normalization, and
//! `%all` is the fraction of the truth's fields that were generated
//! correctly. Results are averaged in cluster-size buckets.

use alloc::string::String;
use alloc::vec::Vec;

use crate::entity::{LegalEntityRecord, Role, RoleWeights};
use crate::pipeline::{normalize_field_map, weighted_normalized_sim, KnowledgeBase, SimMode};

/// Generated-truth pairs below this similarity stay unmatched.
pub const MATCHING_THRESHOLD: f64 = 0.3;

/// Score row for one generated entity.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityScore {
    pub entity_id: String,
    /// Truth entity id, when matched.
    pub matched_truth: Option<String>,
    pub key_correct: bool,
    pub all_fraction: f64,
    pub cluster_size: usize,
}

/// One row of the bucketed report. Means are absent when the bucket is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketRow {
    pub label: &'static str,
    pub count: usize,
    pub mean_key: Option<f64>,
    pub mean_all: Option<f64>,
}

/// The full evaluation result: per-entity scores, four cluster-size buckets
/// and unmatched counts on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub entities: Vec<EntityScore>,
    pub buckets: [BucketRow; 4],
    pub unmatched_generated: usize,
    pub unmatched_truth: usize,
}

pub const BUCKET_LABELS: [&str; 4] = ["all", "size>15", "7<size<=15", "3<size<=7"];

fn normalized_equal(generated: Option<&str>, truth: &str, role: Role) -> bool {
    match generated {
        Some(g) => {
            crate::text::normalize_text(g, role).text == crate::text::normalize_text(truth, role).text
        }
        None => false,
    }
}

/// Scores one generated record against one truth record.
///
/// A field is correctly generated when its role-normalized value equals the
/// truth's. `%key` requires both the corporate name and the registration
/// number to be correct; `%all` divides correct fields by the truth's field
/// count, so a missing generated field counts as incorrect.
pub fn score_entity(generated: &LegalEntityRecord, truth: &LegalEntityRecord) -> (bool, f64) {
    let mut correct = 0usize;
    let mut expected = 0usize;
    let mut name_ok = false;
    let mut number_ok = false;
    for role in Role::ALL {
        let Some(truth_value) = truth.elected(role) else {
            continue;
        };
        expected += 1;
        let ok = normalized_equal(generated.elected(role), truth_value, role);
        if ok {
            correct += 1;
        }
        match role {
            Role::CorporateName => name_ok = ok,
            Role::RegistrationNumber => number_ok = ok,
            _ => {}
        }
    }
    let all_fraction = if expected == 0 {
        0.0
    } else {
        correct as f64 / expected as f64
    };
    (name_ok && number_ok, all_fraction)
}

/// Greedy one-to-one matching on descending record similarity (renormalized
/// mode, default weights). Returns, per generated record, the index of its
/// truth record. Pairs below [`MATCHING_THRESHOLD`] stay unmatched; ties are
/// broken by the smaller generated entity id, then the smaller truth id.
pub fn match_generated_to_truth(kb: &KnowledgeBase, truth: &KnowledgeBase) -> Vec<Option<usize>> {
    let weights = RoleWeights::default();
    let generated_normals: Vec<_> = kb
        .records
        .iter()
        .map(|r| normalize_field_map(&r.elected_fields()))
        .collect();
    let truth_normals: Vec<_> = truth
        .records
        .iter()
        .map(|r| normalize_field_map(&r.elected_fields()))
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (g, gn) in generated_normals.iter().enumerate() {
        for (t, tn) in truth_normals.iter().enumerate() {
            let sim = weighted_normalized_sim(gn, tn, &weights, SimMode::Renormalized);
            if sim >= MATCHING_THRESHOLD {
                candidates.push((sim, g, t));
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| kb.records[a.1].entity_id.cmp(&kb.records[b.1].entity_id))
            .then_with(|| truth.records[a.2].entity_id.cmp(&truth.records[b.2].entity_id))
    });

    let mut matched: Vec<Option<usize>> = alloc::vec![None; kb.records.len()];
    let mut truth_taken = alloc::vec![false; truth.records.len()];
    for (_, g, t) in candidates {
        if matched[g].is_none() && !truth_taken[t] {
            matched[g] = Some(t);
            truth_taken[t] = true;
        }
    }
    matched
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        None
    } else {
        Some(sum / count as f64)
    }
}

fn in_bucket(label: &str, size: usize) -> bool {
    match label {
        "all" => true,
        "size>15" => size > 15,
        "7<size<=15" => size > 7 && size <= 15,
        "3<size<=7" => size > 3 && size <= 7,
        _ => false,
    }
}

/// Aggregates per-entity scores into the four cluster-size buckets. Entities
/// with cluster size of three or less appear only in the `all` row.
pub fn bucket_report(scores: Vec<EntityScore>, unmatched_truth: usize) -> EvalReport {
    let unmatched_generated = scores.iter().filter(|s| s.matched_truth.is_none()).count();
    let buckets = BUCKET_LABELS.map(|label| {
        let rows: Vec<&EntityScore> = scores
            .iter()
            .filter(|s| in_bucket(label, s.cluster_size))
            .collect();
        BucketRow {
            label,
            count: rows.len(),
            mean_key: mean(
                rows.iter()
                    .map(|s| if s.key_correct { 1.0 } else { 0.0 }),
            ),
            mean_all: mean(rows.iter().map(|s| s.all_fraction)),
        }
    });
    EvalReport {
        entities: scores,
        buckets,
        unmatched_generated,
        unmatched_truth,
    }
}

/// Matches, scores and buckets a generated knowledge base against truth.
/// Unmatched generated entities score `(false, 0)` and enter the buckets.
pub fn evaluate(kb: &KnowledgeBase, truth: &KnowledgeBase) -> EvalReport {
    let matching = match_generated_to_truth(kb, truth);
    let mut scores = Vec::with_capacity(kb.records.len());
    for (g, record) in kb.records.iter().enumerate() {
        let score = match matching[g] {
            Some(t) => {
                let (key_correct, all_fraction) = score_entity(record, &truth.records[t]);
                EntityScore {
                    entity_id: record.entity_id.clone(),
                    matched_truth: Some(truth.records[t].entity_id.clone()),
                    key_correct,
                    all_fraction,
                    cluster_size: record.cluster_size,
                }
            }
            None => EntityScore {
                entity_id: record.entity_id.clone(),
                matched_truth: None,
                key_correct: false,
                all_fraction: 0.0,
                cluster_size: record.cluster_size,
            },
        };
        scores.push(score);
    }
    let matched_truths = matching.iter().filter(|m| m.is_some()).count();
    bucket_report(scores, truth.records.len() - matched_truths)
}
