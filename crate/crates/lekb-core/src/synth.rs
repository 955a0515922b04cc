//! Seeded synthetic ground truth and noisy observation corpora.
//!
//! The error taxonomy seen in extracted contract data is reproduced at the
//! string level: typos (substitute / insert / delete / transpose), dropped
//! fields, wrong representative names and corporate-name legal-form
//! variation. All generation is driven by ChaCha8 keyed from the caller's
//! seed, so corpora are bit-reproducible across platforms.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use rand_chacha::ChaCha8Rng;

use crate::entity::{LegalEntityRecord, MemberId, RawLegalEntity, Role, RoleConsensus};
use crate::pipeline::{entity_id_for, KnowledgeBase, PipelineConfig};
use crate::rng;
use crate::text::normalize_text;

/// Which typo operators may fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypoOps {
    pub substitute: bool,
    pub insert: bool,
    pub delete: bool,
    pub transpose: bool,
}

impl Default for TypoOps {
    fn default() -> Self {
        TypoOps {
            substitute: true,
            insert: true,
            delete: true,
            transpose: true,
        }
    }
}

/// String-level noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    /// Per-character probability of each enabled typo operator.
    pub p_char: f64,
    /// Per-field dropout probability.
    pub p_drop: f64,
    /// Probability of corporate-name legal-form variation (append or strip).
    pub p_variant: f64,
    /// Probability of replacing the legal representative with a wrong name.
    pub p_wrong: f64,
    pub typo_ops: TypoOps,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            p_char: 0.01,
            p_drop: 0.15,
            p_variant: 0.2,
            p_wrong: 0.1,
            typo_ops: TypoOps::default(),
        }
    }
}

impl NoiseConfig {
    /// Noise-free configuration; observations reproduce the truth exactly.
    pub fn zero() -> Self {
        NoiseConfig {
            p_char: 0.0,
            p_drop: 0.0,
            p_variant: 0.0,
            p_wrong: 0.0,
            typo_ops: TypoOps::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, p) in [
            ("p_char", self.p_char),
            ("p_drop", self.p_drop),
            ("p_variant", self.p_variant),
            ("p_wrong", self.p_wrong),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::InvalidProbability { name, value: p });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthError {
    InvalidProbability { name: &'static str, value: f64 },
    SizeMismatch { entities: usize, sizes: usize },
    EmptySize { index: usize },
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::InvalidProbability { name, value } => {
                write!(f, "{name} must be in [0,1], got {value}")
            }
            SynthError::SizeMismatch { entities, sizes } => {
                write!(f, "sizes length {sizes} does not match entity count {entities}")
            }
            SynthError::EmptySize { index } => {
                write!(f, "observation count for entity {index} must be at least 1")
            }
        }
    }
}

impl core::error::Error for SynthError {}

const FIRST_NAMES: &[&str] = &[
    "Jean", "Marie", "Pierre", "Sophie", "Luc", "Claire", "Paul", "Anne", "Hugo", "Julie",
    "Marc", "Elise", "Victor", "Camille", "Louis", "Laura", "Antoine", "Nadia", "Tomas", "Ines",
];

const LAST_NAMES: &[&str] = &[
    "Martin", "Bernard", "Dubois", "Moreau", "Laurent", "Simon", "Michel", "Leroy", "Roux",
    "David", "Bertrand", "Morel", "Fournier", "Girard", "Bonnet", "Dupont", "Lambert", "Fontaine",
    "Rousseau", "Vincent",
];

const COMPANY_HEADS: &[&str] = &[
    "Nova", "Alta", "Omni", "Vertex", "Lumen", "Atlas", "Borea", "Cedra", "Delta", "Ferro",
    "Gallia", "Helio", "Iris", "Kappa", "Luna", "Miro", "Orion", "Pyra", "Quanta", "Rhea",
];

const COMPANY_CORES: &[&str] = &[
    "Conseil", "Industrie", "Logistique", "Energie", "Numerique", "Batiment", "Transport",
    "Finance", "Sante", "Edition", "Optique", "Mecanique", "Textile", "Agro", "Chimie",
    "Informatique", "Immobilier", "Maritime", "Securite", "Studio",
];

const LEGAL_FORMS: &[&str] = &["SAS", "SARL", "SA", "SASU", "EURL", "SNC", "SCI"];

/// Forms recognised (case-insensitively) when stripping a trailing legal
/// form, and offered when appending one.
const VARIANT_FORMS: &[&str] = &["SAS", "SARL", "SA", "Ltd", "GmbH", "Inc"];

const NATURES: &[&str] = &[
    "société à actions simplifiées",
    "société à responsabilité limitée",
    "société anonyme",
    "société civile immobilière",
    "société en nom collectif",
    "société par actions simplifiée unipersonnelle",
];

const STREETS: &[&str] = &[
    "Anselme", "Voltaire", "Pasteur", "Lamartine", "Mirabeau", "Vauban", "Colbert", "Danton",
    "Turenne", "Racine", "Moliere", "Rivoli", "Belleville", "Chevreul", "Jaures", "Carnot",
];

const CITIES: &[(&str, &str)] = &[
    ("Saint-Ouen", "93400"),
    ("Bobigny", "93000"),
    ("Paris", "75011"),
    ("Lyon", "69003"),
    ("Marseille", "13006"),
    ("Lille", "59000"),
    ("Nantes", "44000"),
    ("Bordeaux", "33000"),
    ("Toulouse", "31000"),
    ("Rennes", "35000"),
    ("Grenoble", "38000"),
    ("Dijon", "21000"),
    ("Nancy", "54000"),
    ("Tours", "37000"),
    ("Amiens", "80000"),
    ("Reims", "51100"),
];

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    rng::stream(seed)
}

/// Derives an independent sub-seed for a named purpose, so one user-facing
/// seed can drive several generation streams without overlap.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    rng::derive_seed(base, label)
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng::below(rng, pool.len())]
}

/// Generates `n` clean ground-truth entities with all seven roles populated
/// and pairwise-distinct normalized corporate names. Deterministic in
/// `(n, seed)`.
pub fn gen_ground_truth(n: usize, seed: u64) -> KnowledgeBase {
    let mut stream = rng::stream(seed);
    let mut used_names: alloc::collections::BTreeSet<String> = alloc::collections::BTreeSet::new();
    let mut records = Vec::with_capacity(n);
    for index in 0..n {
        let name = loop {
            let head = pick(&mut stream, COMPANY_HEADS);
            let core = pick(&mut stream, COMPANY_CORES);
            let form = pick(&mut stream, LEGAL_FORMS);
            let candidate = format!("{head} {core} {form}");
            let key = normalize_text(&candidate, Role::CorporateName).text;
            if used_names.insert(key) {
                break candidate;
            }
        };
        let nature = String::from(pick(&mut stream, NATURES));
        let euros = rng::between(&mut stream, 1_000, 5_000_000);
        let cents = rng::between(&mut stream, 0, 99);
        let capital = format!("{euros},{cents:02} euros");
        let registration_number = format!(
            "{}{}{} {}{}{} {}{}{}",
            rng::between(&mut stream, 1, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
            rng::between(&mut stream, 0, 9),
        );
        let registration_city = CITIES[rng::below(&mut stream, CITIES.len())].0;
        let (city, zip) = CITIES[rng::below(&mut stream, CITIES.len())];
        let street_number = rng::between(&mut stream, 1, 99);
        let street = pick(&mut stream, STREETS);
        let address = format!("{street_number} rue {street} {zip} {city}");
        let representative = format!(
            "{} {}",
            pick(&mut stream, FIRST_NAMES),
            pick(&mut stream, LAST_NAMES)
        );

        let mut values: BTreeMap<Role, String> = BTreeMap::new();
        values.insert(Role::CorporateName, name);
        values.insert(Role::Nature, nature);
        values.insert(Role::Capital, capital);
        values.insert(Role::RegistrationNumber, registration_number);
        values.insert(Role::RegistrationCity, String::from(registration_city));
        values.insert(Role::HeadquarterAddress, address);
        values.insert(Role::LegalRepresentative, representative);
        records.push(truth_record(index, values));
    }
    KnowledgeBase {
        records,
        config: PipelineConfig {
            seed,
            ..PipelineConfig::default()
        },
        dropped_clusters: BTreeMap::new(),
    }
}

fn truth_record(index: usize, values: BTreeMap<Role, String>) -> LegalEntityRecord {
    let entity_id = entity_id_for(values.iter().map(|(&r, v)| (r, v.as_str())));
    let fields = values
        .into_iter()
        .map(|(role, value)| {
            (
                role,
                RoleConsensus {
                    value,
                    support: 1,
                    alternatives: Vec::new(),
                },
            )
        })
        .collect();
    LegalEntityRecord {
        entity_id,
        fields,
        cluster_size: 1,
        members: alloc::vec![MemberId {
            doc_id: String::from("truth"),
            local_id: format!("t{index}"),
        }],
    }
}

fn random_letter(rng: &mut ChaCha8Rng) -> char {
    (b'a' + rng::below(rng, 26) as u8) as char
}

/// Appends a legal-form suffix, or strips a trailing one when the value
/// already ends with a known form.
fn toggle_legal_form(value: &str, rng: &mut ChaCha8Rng) -> String {
    if let Some((stem, last)) = value.trim_end().rsplit_once(' ') {
        if VARIANT_FORMS
            .iter()
            .any(|form| form.eq_ignore_ascii_case(last))
            && !stem.trim().is_empty()
        {
            return String::from(stem.trim_end());
        }
    }
    format!("{} {}", value.trim_end(), pick(rng, VARIANT_FORMS))
}

/// Applies string-level noise to one value. Each enabled typo operator fires
/// independently per character with probability `p_char`; corporate names
/// may additionally gain or lose a legal-form suffix first.
pub fn perturb_value(
    value: &str,
    role: Role,
    noise: &NoiseConfig,
    rng: &mut ChaCha8Rng,
) -> String {
    let mut work = String::from(value);
    if role == Role::CorporateName && rng::chance(rng, noise.p_variant) {
        work = toggle_legal_form(&work, rng);
    }
    let ops = noise.typo_ops;
    let chars: Vec<char> = work.chars().collect();
    let mut out = String::with_capacity(work.len() + 4);
    let mut i = 0;
    while i < chars.len() {
        if ops.delete && rng::chance(rng, noise.p_char) {
            i += 1;
            continue;
        }
        if ops.transpose && i + 1 < chars.len() && rng::chance(rng, noise.p_char) {
            out.push(chars[i + 1]);
            out.push(chars[i]);
            i += 2;
            continue;
        }
        if ops.substitute && rng::chance(rng, noise.p_char) {
            out.push(random_letter(rng));
        } else {
            out.push(chars[i]);
        }
        i += 1;
        if ops.insert && rng::chance(rng, noise.p_char) {
            out.push(random_letter(rng));
        }
    }
    // Never perturb a value into nothing.
    if out.trim().is_empty() {
        return work;
    }
    out
}

/// Derives one noisy observation of a truth entity. Fields drop independently
/// with `p_drop` (the corporate name is retained if everything dropped), the
/// representative is replaced with a wrong name with `p_wrong`, and surviving
/// values are perturbed.
pub fn gen_observation(
    entity: &LegalEntityRecord,
    noise: &NoiseConfig,
    rng: &mut ChaCha8Rng,
    doc_seq: usize,
) -> RawLegalEntity {
    let mut kept: BTreeMap<Role, String> = BTreeMap::new();
    for role in Role::ALL {
        if let Some(value) = entity.elected(role) {
            if !rng::chance(rng, noise.p_drop) {
                kept.insert(role, String::from(value));
            }
        }
    }
    if kept.is_empty() {
        if let Some(name) = entity.elected(Role::CorporateName) {
            kept.insert(Role::CorporateName, String::from(name));
        }
    }
    if let Some(truth_rep) = kept.get(&Role::LegalRepresentative).cloned() {
        if rng::chance(rng, noise.p_wrong) {
            let truth_norm = normalize_text(&truth_rep, Role::LegalRepresentative).text;
            let wrong = loop {
                let candidate = format!(
                    "{} {}",
                    pick(rng, FIRST_NAMES),
                    pick(rng, LAST_NAMES)
                );
                if normalize_text(&candidate, Role::LegalRepresentative).text != truth_norm {
                    break candidate;
                }
            };
            kept.insert(Role::LegalRepresentative, wrong);
        }
    }
    let mut fields: Vec<(String, String)> = Vec::with_capacity(kept.len());
    for role in Role::ALL {
        if let Some(value) = kept.get(&role) {
            let noisy = perturb_value(value, role, noise, rng);
            fields.push((String::from(role.name()), noisy));
        }
    }
    let record = crate::entity::UncheckedRecord {
        doc_id: format!("d{doc_seq:06}"),
        local_id: String::from("e1"),
        fields,
    };
    let (entity, _warnings) =
        crate::entity::validate_raw_entity(&record).expect("generated observation is valid");
    entity
}

/// Observation-id → truth-entity-id map retained for evaluation.
pub type Provenance = BTreeMap<MemberId, String>;

/// Generates a shuffled corpus of noisy observations: `sizes[i]` observations
/// of `truth.records[i]`. Deterministic in all arguments.
pub fn gen_corpus(
    truth: &KnowledgeBase,
    sizes: &[usize],
    noise: &NoiseConfig,
    seed: u64,
) -> Result<(Vec<RawLegalEntity>, Provenance), SynthError> {
    noise.validate()?;
    if sizes.len() != truth.records.len() {
        return Err(SynthError::SizeMismatch {
            entities: truth.records.len(),
            sizes: sizes.len(),
        });
    }
    if let Some(index) = sizes.iter().position(|&s| s == 0) {
        return Err(SynthError::EmptySize { index });
    }
    let mut stream = rng::stream(seed);
    let mut observations = Vec::with_capacity(sizes.iter().sum());
    let mut provenance = Provenance::new();
    let mut doc_seq = 0usize;
    for (entity, &count) in truth.records.iter().zip(sizes) {
        for _ in 0..count {
            let observation = gen_observation(entity, noise, &mut stream, doc_seq);
            doc_seq += 1;
            provenance.insert(observation.id(), entity.entity_id.clone());
            observations.push(observation);
        }
    }
    rng::shuffle(&mut stream, &mut observations);
    Ok((observations, provenance))
}

/// Seeded per-entity observation counts, uniform in `[lo, hi]`.
pub fn uniform_sizes(n: usize, lo: usize, hi: usize, seed: u64) -> Vec<usize> {
    let mut stream = rng::stream(seed);
    (0..n).map(|_| rng::between(&mut stream, lo, hi)).collect()
}
