//! Two-stage knowledge-base construction.
//!
//! Stage one clusters raw legal entities with affinity propagation over a
//! weighted-sum record similarity. Stage two elects, for every role present
//! in a cluster, a consensus value from the member observations. Clusters
//! with too little support are dropped, and the survivors are assembled into
//! a [`KnowledgeBase`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::ap::{self, ApError, ApParams, SimilarityMatrix};
use crate::entity::{
    LegalEntityRecord, MemberId, RawLegalEntity, Role, RoleConsensus, RoleWeights,
};
use crate::rng;
use crate::text::{normalize_text, normalized_sim, NormalizedValue};

/// How missing roles weigh into the record similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Plain weighted sum over shared roles; missing roles contribute zero,
    /// so sparse records count as weaker identity evidence.
    RawSum,
    /// Weighted sum divided by the weight mass of the shared roles.
    Renormalized,
}

/// Pipeline configuration. `seed` drives every random choice (jitter) made
/// during construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub weights: RoleWeights,
    pub sim_mode: SimMode,
    /// Clusters smaller than this never become records.
    pub min_cluster_size: usize,
    pub ap: ApParams,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            weights: RoleWeights::default(),
            sim_mode: SimMode::RawSum,
            min_cluster_size: 3,
            ap: ApParams::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.min_cluster_size == 0 {
            return Err(PipelineError::InvalidConfig(
                "min_cluster_size must be at least 1",
            ));
        }
        self.ap.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    Ap(ApError),
    InvalidConfig(&'static str),
}

impl From<ApError> for PipelineError {
    fn from(e: ApError) -> Self {
        PipelineError::Ap(e)
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Ap(e) => write!(f, "{e}"),
            PipelineError::InvalidConfig(what) => write!(f, "invalid config: {what}"),
        }
    }
}

impl core::error::Error for PipelineError {}

/// One stage-one cluster: member indices into the input slice (ascending)
/// plus the position of the exemplar member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub members: Vec<usize>,
    /// Position of the stage-one exemplar within `members`.
    pub exemplar: usize,
}

/// The assembled knowledge base: canonical records, the configuration that
/// produced them, and counts of dropped clusters keyed by cluster size.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub records: Vec<LegalEntityRecord>,
    pub config: PipelineConfig,
    pub dropped_clusters: BTreeMap<usize, usize>,
}

fn normalized_fields(entity: &RawLegalEntity) -> BTreeMap<Role, NormalizedValue> {
    entity
        .fields()
        .iter()
        .map(|(&role, value)| (role, normalize_text(value, role)))
        .collect()
}

pub(crate) fn normalize_field_map(fields: &BTreeMap<Role, &str>) -> BTreeMap<Role, NormalizedValue> {
    fields
        .iter()
        .map(|(&role, value)| (role, normalize_text(value, role)))
        .collect()
}

pub(crate) fn weighted_normalized_sim(
    a: &BTreeMap<Role, NormalizedValue>,
    b: &BTreeMap<Role, NormalizedValue>,
    weights: &RoleWeights,
    mode: SimMode,
) -> f64 {
    let mut sum = 0.0;
    let mut shared_weight = 0.0;
    let mut shared = false;
    for role in Role::ALL {
        if let (Some(x), Some(y)) = (a.get(&role), b.get(&role)) {
            let w = weights.get(role);
            sum += w * normalized_sim(x, y);
            shared_weight += w;
            shared = true;
        }
    }
    match mode {
        SimMode::RawSum => sum,
        SimMode::Renormalized => {
            if shared && shared_weight > 0.0 {
                sum / shared_weight
            } else {
                0.0
            }
        }
    }
}

/// Weighted-sum similarity of two raw legal entities over their shared roles.
pub fn legal_entity_sim(
    g1: &RawLegalEntity,
    g2: &RawLegalEntity,
    weights: &RoleWeights,
    mode: SimMode,
) -> f64 {
    weighted_normalized_sim(
        &normalized_fields(g1),
        &normalized_fields(g2),
        weights,
        mode,
    )
}

/// Pairwise record similarities with the preference diagonal already set.
pub fn build_entity_matrix(entities: &[RawLegalEntity], config: &PipelineConfig) -> SimilarityMatrix {
    let normals: Vec<BTreeMap<Role, NormalizedValue>> =
        entities.iter().map(normalized_fields).collect();
    let n = entities.len();
    let mut s = SimilarityMatrix::zeros(n);
    for i in 0..n {
        for k in (i + 1)..n {
            let v = weighted_normalized_sim(&normals[i], &normals[k], &config.weights, config.sim_mode);
            s.set_pair(i, k, v);
        }
    }
    let preference = ap::compute_preference(&s, config.ap.preference);
    s.set_diagonal(&preference);
    s
}

fn stage_params(config: &PipelineConfig, purpose: &str) -> ApParams {
    let mut params = config.ap.clone();
    if params.jitter_seed.is_none() {
        params.jitter_seed = Some(rng::derive_seed(config.seed, purpose));
    }
    params
}

/// Stage one: clusters validated raw entities. Clusters are ordered by
/// descending size, then by smallest member index.
pub fn cluster_raw_entities(
    entities: &[RawLegalEntity],
    config: &PipelineConfig,
) -> Result<Vec<Cluster>, PipelineError> {
    config.validate()?;
    let matrix = build_entity_matrix(entities, config);
    let params = stage_params(config, "ap.stage1");
    let result = ap::ap_cluster(&matrix, &params)?;

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &label) in result.labels.iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(exemplar, members)| {
            let position = members
                .iter()
                .position(|&m| m == exemplar)
                .expect("exemplar labels itself");
            Cluster {
                members,
                exemplar: position,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.members[0].cmp(&b.members[0]))
    });
    Ok(clusters)
}

struct SubCluster {
    exemplar: usize,
    members: Vec<usize>,
    /// Members plus outside occurrences whose token sets are in a containment
    /// relation with the exemplar's token set.
    supporters: BTreeSet<usize>,
    internal_similarity: f64,
}

impl SubCluster {
    fn beats(&self, other: &SubCluster, normals: &[NormalizedValue]) -> bool {
        let by_support = self.supporters.len().cmp(&other.supporters.len());
        if by_support != core::cmp::Ordering::Equal {
            return by_support.is_gt();
        }
        let by_internal = self
            .internal_similarity
            .total_cmp(&other.internal_similarity);
        if by_internal != core::cmp::Ordering::Equal {
            return by_internal.is_gt();
        }
        let by_text = normals[self.exemplar]
            .text
            .cmp(&normals[other.exemplar].text);
        if by_text != core::cmp::Ordering::Equal {
            return by_text.is_lt();
        }
        self.exemplar < other.exemplar
    }
}

/// A suffix variant of a name ("Company ABC" vs "Company ABC Ltd") shows up
/// as token containment. Such occurrences back the shorter and the longer
/// spelling alike, so they count towards a sub-cluster's support even when
/// message passing kept them apart.
fn supporters_of(
    exemplar: usize,
    members: &[usize],
    normals: &[NormalizedValue],
) -> BTreeSet<usize> {
    let mut supporters: BTreeSet<usize> = members.iter().copied().collect();
    let exemplar_tokens = &normals[exemplar].tokens;
    if exemplar_tokens.is_empty() {
        return supporters;
    }
    for (u, normal) in normals.iter().enumerate() {
        if supporters.contains(&u) || normal.tokens.is_empty() {
            continue;
        }
        if normal.tokens.is_subset(exemplar_tokens) || exemplar_tokens.is_subset(&normal.tokens) {
            supporters.insert(u);
        }
    }
    supporters
}

fn internal_similarity(members: &[usize], s: &SimilarityMatrix) -> f64 {
    let mut total = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &k in &members[a + 1..] {
            total += s.get(i, k);
        }
    }
    total
}

fn alternatives_outside(
    normals: &[NormalizedValue],
    counted: &BTreeSet<usize>,
) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, normal) in normals.iter().enumerate() {
        if !counted.contains(&i) {
            *counts.entry(normal.text.as_str()).or_insert(0) += 1;
        }
    }
    let mut alternatives: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(text, count)| (String::from(text), count))
        .collect();
    alternatives.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    alternatives
}

fn elect_unanimous(values: &[&str]) -> RoleConsensus {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let (&value, _) = counts
        .iter()
        .max_by_key(|&(v, &count)| (count, core::cmp::Reverse(v)))
        .expect("values is non-empty");
    RoleConsensus {
        value: String::from(value),
        support: values.len(),
        alternatives: Vec::new(),
    }
}

fn elect_pair(values: &[&str], normals: &[NormalizedValue]) -> RoleConsensus {
    // Two occurrences with different normalized forms: each has frequency
    // one, so the tie rule decides — the lexicographically smaller normalized
    // form wins and its first verbatim occurrence is elected.
    let winner = if normals[0].text <= normals[1].text { 0 } else { 1 };
    let loser = 1 - winner;
    RoleConsensus {
        value: String::from(values[winner]),
        support: 1,
        alternatives: alloc::vec![(normals[loser].text.clone(), 1)],
    }
}

fn elect_by_clustering(
    values: &[&str],
    normals: &[NormalizedValue],
    role: Role,
    config: &PipelineConfig,
) -> RoleConsensus {
    let n = values.len();
    let mut s = SimilarityMatrix::zeros(n);
    for i in 0..n {
        for k in (i + 1)..n {
            s.set_pair(i, k, normalized_sim(&normals[i], &normals[k]));
        }
    }
    let preference = ap::compute_preference(&s, config.ap.preference);
    s.set_diagonal(&preference);
    let params = stage_params(config, &format!("ap.stage2.{}", role.name()));
    let result = ap::ap_cluster(&s, &params).expect("stage-2 matrix is finite and symmetric");

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &label) in result.labels.iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    let mut best: Option<SubCluster> = None;
    for (&exemplar, members) in &groups {
        let candidate = SubCluster {
            exemplar,
            supporters: supporters_of(exemplar, members, normals),
            internal_similarity: internal_similarity(members, &s),
            members: members.clone(),
        };
        let is_better = match &best {
            None => true,
            Some(current) => candidate.beats(current, normals),
        };
        if is_better {
            best = Some(candidate);
        }
    }
    let winner = best.expect("at least one sub-cluster");
    let elected = medoid(&winner.members, &s, values, normals);
    RoleConsensus {
        value: String::from(values[elected]),
        support: winner.supporters.len(),
        alternatives: alternatives_outside(normals, &winner.supporters),
    }
}

/// The member with the greatest total similarity to the rest of its
/// sub-cluster. Message passing can leave a poorly centred point as the
/// exemplar when preferences sit close to the similarity ceiling; the medoid
/// is the representative the cluster actually agrees on. Similarity ties go
/// to the most frequent verbatim spelling, then the smaller normalized form,
/// then the earlier occurrence.
fn medoid(
    members: &[usize],
    s: &SimilarityMatrix,
    values: &[&str],
    normals: &[NormalizedValue],
) -> usize {
    let mut spelling_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &m in members {
        *spelling_counts.entry(values[m]).or_insert(0) += 1;
    }
    let mut best = members[0];
    let mut best_total = f64::NEG_INFINITY;
    for &j in members {
        let mut total = 0.0;
        for &i in members {
            if i != j {
                total += s.get(i, j);
            }
        }
        let better = match total.total_cmp(&best_total) {
            core::cmp::Ordering::Greater => true,
            core::cmp::Ordering::Less => false,
            core::cmp::Ordering::Equal => {
                match spelling_counts[values[j]].cmp(&spelling_counts[values[best]]) {
                    core::cmp::Ordering::Greater => true,
                    core::cmp::Ordering::Less => false,
                    core::cmp::Ordering::Equal => normals[j].text < normals[best].text,
                }
            }
        };
        if better {
            best = j;
            best_total = total;
        }
    }
    best
}

/// Elects the consensus value for one role from the member observations that
/// carry it.
///
/// Occurrences are kept with duplicates so that frequency exerts exemplar
/// pull. If all occurrences share one normalized form the most frequent
/// verbatim spelling wins. Two occurrences with different forms fall back to
/// a direct rule. Anything larger is clustered with affinity propagation
/// over the pairwise similarities, and the best-supported sub-cluster's
/// exemplar is elected.
pub fn select_role_exemplar(values: &[&str], role: Role, config: &PipelineConfig) -> RoleConsensus {
    assert!(!values.is_empty(), "role absent from all members");
    let normals: Vec<NormalizedValue> = values.iter().map(|v| normalize_text(v, role)).collect();
    let forms: BTreeSet<&str> = normals.iter().map(|n| n.text.as_str()).collect();
    if forms.len() == 1 {
        return elect_unanimous(values);
    }
    if values.len() <= 2 {
        return elect_pair(values, &normals);
    }
    elect_by_clustering(values, &normals, role, config)
}

/// Deterministic identifier: first eight bytes of the SHA-256 over the
/// elected role/value pairs, in canonical role order, hex-encoded.
pub(crate) fn entity_id_for<'a>(fields: impl Iterator<Item = (Role, &'a str)>) -> String {
    let mut hasher = Sha256::new();
    for (role, value) in fields {
        hasher.update(role.name().as_bytes());
        hasher.update([0x1f]);
        hasher.update(value.as_bytes());
        hasher.update([0x1e]);
    }
    let digest = hasher.finalize();
    let mut id = String::with_capacity(16);
    for byte in &digest[..8] {
        let _ = fmt::Write::write_fmt(&mut id, format_args!("{byte:02x}"));
    }
    id
}

/// Stage two for one cluster: elects a consensus per present role and builds
/// the canonical record.
pub fn assemble_legal_entity(
    cluster: &Cluster,
    entities: &[RawLegalEntity],
    config: &PipelineConfig,
) -> LegalEntityRecord {
    let mut fields = BTreeMap::new();
    for role in Role::ALL {
        let values: Vec<&str> = cluster
            .members
            .iter()
            .filter_map(|&m| entities[m].get(role))
            .collect();
        if values.is_empty() {
            continue;
        }
        fields.insert(role, select_role_exemplar(&values, role, config));
    }
    let entity_id = entity_id_for(
        fields
            .iter()
            .map(|(&role, consensus)| (role, consensus.value.as_str())),
    );
    let mut members: Vec<MemberId> = cluster.members.iter().map(|&m| entities[m].id()).collect();
    members.sort();
    LegalEntityRecord {
        entity_id,
        fields,
        cluster_size: cluster.members.len(),
        members,
    }
}

/// Runs the full pipeline: cluster, filter by `min_cluster_size`, elect and
/// assemble. Records are ordered by descending cluster size, then entity id.
pub fn build_kb(
    entities: &[RawLegalEntity],
    config: &PipelineConfig,
) -> Result<KnowledgeBase, PipelineError> {
    config.validate()?;
    let mut dropped_clusters: BTreeMap<usize, usize> = BTreeMap::new();
    let mut records = Vec::new();
    if !entities.is_empty() {
        for cluster in cluster_raw_entities(entities, config)? {
            if cluster.members.len() < config.min_cluster_size {
                *dropped_clusters.entry(cluster.members.len()).or_insert(0) += 1;
                continue;
            }
            records.push(assemble_legal_entity(&cluster, entities, config));
        }
    }
    records.sort_by(|a, b| {
        b.cluster_size
            .cmp(&a.cluster_size)
            .then_with(|| a.entity_id.cmp(&b.entity_id))
            .then_with(|| a.members.cmp(&b.members))
    });
    disambiguate_ids(&mut records);
    Ok(KnowledgeBase {
        records,
        config: config.clone(),
        dropped_clusters,
    })
}

/// Two clusters can elect identical field values; suffix later ids so every
/// record keeps a unique identifier.
fn disambiguate_ids(records: &mut [LegalEntityRecord]) {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for record in records.iter_mut() {
        let count = seen.entry(record.entity_id.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            record.entity_id = format!("{}-{}", record.entity_id, *count);
        }
    }
}
