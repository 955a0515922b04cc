//! Domain vocabulary: attribute roles, raw observations and canonical records.
//!
//! A *basic entity* is one role-tagged string observed in a contract. A *raw
//! legal entity* groups the basic entities extracted for one party of one
//! contract; it is partial and may carry errors. A [`LegalEntityRecord`] is
//! the canonical consensus built from a cluster of raw legal entities.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// The closed set of attribute roles a legal entity is described by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    CorporateName,
    Nature,
    Capital,
    RegistrationNumber,
    RegistrationCity,
    HeadquarterAddress,
    LegalRepresentative,
}

impl Role {
    /// All roles, in canonical order. This order is used whenever role
    /// iteration must be deterministic.
    pub const ALL: [Role; 7] = [
        Role::CorporateName,
        Role::Nature,
        Role::Capital,
        Role::RegistrationNumber,
        Role::RegistrationCity,
        Role::HeadquarterAddress,
        Role::LegalRepresentative,
    ];

    /// The stable snake_case name used in files and on the wire.
    pub fn name(self) -> &'static str {
        match self {
            Role::CorporateName => "corporate_name",
            Role::Nature => "nature",
            Role::Capital => "capital",
            Role::RegistrationNumber => "registration_number",
            Role::RegistrationCity => "registration_city",
            Role::HeadquarterAddress => "headquarter_address",
            Role::LegalRepresentative => "legal_representative",
        }
    }

    /// Parses the stable snake_case name. Unknown names yield `None`; the
    /// role set is closed.
    pub fn parse(name: &str) -> Option<Role> {
        Role::ALL.iter().copied().find(|r| r.name() == name)
    }

    /// Position within [`Role::ALL`].
    pub fn index(self) -> usize {
        Role::ALL.iter().position(|&r| r == self).unwrap_or(0)
    }

    /// Roles whose values compare digit-run to digit-run: internal spaces in
    /// the normalized text are dropped so that "832 146 237" and "832146237"
    /// normalize identically.
    pub(crate) fn collapses_inner_spaces(self) -> bool {
        matches!(self, Role::RegistrationNumber | Role::Capital)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One role-tagged value as extracted from a contract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicEntity {
    pub role: Role,
    pub value: String,
}

impl BasicEntity {
    /// Errors if `value` is empty after trimming whitespace. The stored value
    /// keeps its original spelling.
    pub fn new(role: Role, value: impl Into<String>) -> Result<Self, ValidateError> {
        let value = value.into();
        if value.trim().is_empty() {
            return Err(ValidateError::EmptyValue { role });
        }
        Ok(BasicEntity { role, value })
    }
}

/// Identifier of one raw observation: `(doc_id, local_id)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemberId {
    pub doc_id: String,
    pub local_id: String,
}

/// The group of basic entities extracted for one party of one contract.
/// At most one value per role; at least one non-empty value overall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLegalEntity {
    pub doc_id: String,
    pub local_id: String,
    fields: BTreeMap<Role, String>,
}

impl RawLegalEntity {
    pub fn id(&self) -> MemberId {
        MemberId {
            doc_id: self.doc_id.clone(),
            local_id: self.local_id.clone(),
        }
    }

    pub fn get(&self, role: Role) -> Option<&str> {
        self.fields.get(&role).map(String::as_str)
    }

    /// Roles present on this record, in canonical order.
    pub fn roles(&self) -> impl Iterator<Item = Role> + '_ {
        Role::ALL.into_iter().filter(|r| self.fields.contains_key(r))
    }

    pub fn fields(&self) -> &BTreeMap<Role, String> {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// A record as parsed from one ingestion line, before any validation.
/// `fields` keeps the key/value pairs in file order so duplicate keys are
/// still observable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncheckedRecord {
    pub doc_id: String,
    pub local_id: String,
    pub fields: Vec<(String, String)>,
}

/// Validation failure for one ingested record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidateError {
    /// No field with a non-empty value.
    EmptyEntity,
    /// A field key is not one of the seven roles.
    UnknownRole { key: String },
    /// `(doc_id, local_id)` was already seen in this batch.
    DuplicateId { doc_id: String, local_id: String },
    /// A single value failed the non-empty invariant.
    EmptyValue { role: Role },
}

impl fmt::Display for ValidateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidateError::EmptyEntity => write!(f, "EmptyEntity: record has no non-empty field"),
            ValidateError::UnknownRole { key } => write!(f, "UnknownRole: {key:?}"),
            ValidateError::DuplicateId { doc_id, local_id } => {
                write!(f, "DuplicateId: ({doc_id:?}, {local_id:?})")
            }
            ValidateError::EmptyValue { role } => write!(f, "EmptyValue: role {role}"),
        }
    }
}

impl core::error::Error for ValidateError {}

/// Non-fatal ingestion observations. The record is still accepted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    /// A role appeared more than once in one record; the first value wins.
    DuplicateRoleKey { role: Role },
    /// A role carried a whitespace-only value and was dropped.
    EmptyFieldValue { role: Role },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::DuplicateRoleKey { role } => {
                write!(f, "duplicate role {role}; keeping the first value")
            }
            IngestWarning::EmptyFieldValue { role } => {
                write!(f, "empty value for role {role}; field dropped")
            }
        }
    }
}

/// Validates one parsed record in isolation (no batch-level checks).
///
/// Every parsed record yields exactly one of: a valid [`RawLegalEntity`]
/// (possibly with warnings) or a specific error. Unknown role keys are
/// rejected, never dropped.
pub fn validate_raw_entity(
    record: &UncheckedRecord,
) -> Result<(RawLegalEntity, Vec<IngestWarning>), ValidateError> {
    let mut fields = BTreeMap::new();
    let mut warnings = Vec::new();
    for (key, value) in &record.fields {
        let role = Role::parse(key).ok_or_else(|| ValidateError::UnknownRole { key: key.clone() })?;
        if value.trim().is_empty() {
            warnings.push(IngestWarning::EmptyFieldValue { role });
            continue;
        }
        if fields.contains_key(&role) {
            warnings.push(IngestWarning::DuplicateRoleKey { role });
            continue;
        }
        fields.insert(role, value.clone());
    }
    if fields.is_empty() {
        return Err(ValidateError::EmptyEntity);
    }
    Ok((
        RawLegalEntity {
            doc_id: record.doc_id.clone(),
            local_id: record.local_id.clone(),
            fields,
        },
        warnings,
    ))
}

/// Batch-level validator enforcing `(doc_id, local_id)` uniqueness on top of
/// [`validate_raw_entity`].
#[derive(Debug, Default)]
pub struct Ingestion {
    seen: BTreeSet<(String, String)>,
}

impl Ingestion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accept(
        &mut self,
        record: &UncheckedRecord,
    ) -> Result<(RawLegalEntity, Vec<IngestWarning>), ValidateError> {
        let out = validate_raw_entity(record)?;
        let key = (record.doc_id.clone(), record.local_id.clone());
        if !self.seen.insert(key) {
            return Err(ValidateError::DuplicateId {
                doc_id: record.doc_id.clone(),
                local_id: record.local_id.clone(),
            });
        }
        Ok(out)
    }
}

/// Per-role weights for the weighted-sum record similarity. Non-negative and
/// summing to one within `1e-9`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleWeights {
    weights: [f64; 7],
}

/// Weight-set construction failure.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightError {
    Negative { role: Role, weight: f64 },
    BadSum { sum: f64 },
}

impl fmt::Display for WeightError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightError::Negative { role, weight } => {
                write!(f, "weight for {role} is negative: {weight}")
            }
            WeightError::BadSum { sum } => write!(f, "weights sum to {sum}, expected 1.0"),
        }
    }
}

impl core::error::Error for WeightError {}

impl RoleWeights {
    pub fn new(weights: [f64; 7]) -> Result<Self, WeightError> {
        for (i, &w) in weights.iter().enumerate() {
            if w.is_nan() || w < 0.0 {
                return Err(WeightError::Negative {
                    role: Role::ALL[i],
                    weight: w,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(WeightError::BadSum { sum });
        }
        Ok(RoleWeights { weights })
    }

    pub fn from_map(map: &BTreeMap<Role, f64>) -> Result<Self, WeightError> {
        let mut weights = [0.0; 7];
        for (role, &w) in map {
            weights[role.index()] = w;
        }
        RoleWeights::new(weights)
    }

    pub fn get(&self, role: Role) -> f64 {
        self.weights[role.index()]
    }
}

impl Default for RoleWeights {
    /// Key-identifying fields dominate: the corporate name and the
    /// registration number together carry more than half the mass.
    fn default() -> Self {
        let mut weights = [0.0; 7];
        weights[Role::CorporateName.index()] = 0.35;
        weights[Role::RegistrationNumber.index()] = 0.25;
        weights[Role::LegalRepresentative.index()] = 0.10;
        weights[Role::HeadquarterAddress.index()] = 0.10;
        weights[Role::RegistrationCity.index()] = 0.08;
        weights[Role::Capital.index()] = 0.07;
        weights[Role::Nature.index()] = 0.05;
        RoleWeights { weights }
    }
}

/// The elected consensus for one role of one canonical entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleConsensus {
    /// Elected value; always one of the member observations, verbatim.
    pub value: String,
    /// Number of member observations backing the elected value.
    pub support: usize,
    /// Non-elected normalized variants with their occurrence counts,
    /// by descending count.
    pub alternatives: Vec<(String, usize)>,
}

/// A canonical legal entity: one consensus value per observed role, plus the
/// membership that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegalEntityRecord {
    /// Deterministic content hash of the elected field values.
    pub entity_id: String,
    pub fields: BTreeMap<Role, RoleConsensus>,
    pub cluster_size: usize,
    pub members: Vec<MemberId>,
}

impl LegalEntityRecord {
    pub fn elected(&self, role: Role) -> Option<&str> {
        self.fields.get(&role).map(|c| c.value.as_str())
    }

    /// Elected values as a plain role → value map.
    pub fn elected_fields(&self) -> BTreeMap<Role, &str> {
        self.fields
            .iter()
            .map(|(&role, consensus)| (role, consensus.value.as_str()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(doc: &str, local: &str, fields: &[(&str, &str)]) -> UncheckedRecord {
        UncheckedRecord {
            doc_id: doc.into(),
            local_id: local.into(),
            fields: fields
                .iter()
                .map(|(k, v)| (String::from(*k), String::from(*v)))
                .collect(),
        }
    }

    #[test]
    fn minimal_record_is_valid() {
        let r = rec("d1", "e1", &[("corporate_name", "Company ABC")]);
        let (entity, warnings) = validate_raw_entity(&r).unwrap();
        assert_eq!(entity.get(Role::CorporateName), Some("Company ABC"));
        assert_eq!(entity.len(), 1);
        assert!(warnings.is_empty());
    }

    #[test]
    fn empty_record_is_rejected() {
        let r = rec("d1", "e2", &[]);
        assert_eq!(validate_raw_entity(&r), Err(ValidateError::EmptyEntity));
    }

    #[test]
    fn whitespace_only_values_do_not_count() {
        let r = rec("d1", "e2", &[("corporate_name", "   ")]);
        assert_eq!(validate_raw_entity(&r), Err(ValidateError::EmptyEntity));
    }

    #[test]
    fn unknown_role_is_named() {
        let r = rec("d1", "e3", &[("ceo_name", "John")]);
        assert_eq!(
            validate_raw_entity(&r),
            Err(ValidateError::UnknownRole {
                key: "ceo_name".into()
            })
        );
    }

    #[test]
    fn duplicate_role_keeps_first_and_warns() {
        let r = rec(
            "d1",
            "e1",
            &[("capital", "100 euros"), ("capital", "200 euros")],
        );
        let (entity, warnings) = validate_raw_entity(&r).unwrap();
        assert_eq!(entity.get(Role::Capital), Some("100 euros"));
        assert_eq!(
            warnings,
            vec![IngestWarning::DuplicateRoleKey { role: Role::Capital }]
        );
    }

    #[test]
    fn batch_rejects_duplicate_ids() {
        let mut batch = Ingestion::new();
        let r = rec("d1", "e1", &[("corporate_name", "A")]);
        batch.accept(&r).unwrap();
        assert_eq!(
            batch.accept(&r),
            Err(ValidateError::DuplicateId {
                doc_id: "d1".into(),
                local_id: "e1".into()
            })
        );
    }

    #[test]
    fn role_names_round_trip() {
        for role in Role::ALL {
            assert_eq!(Role::parse(role.name()), Some(role));
        }
        assert_eq!(Role::parse("ceo_name"), None);
    }

    #[test]
    fn default_weights_sum_to_one() {
        let w = RoleWeights::default();
        let sum: f64 = Role::ALL.iter().map(|&r| w.get(r)).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(w.get(Role::CorporateName) > w.get(Role::Nature));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut weights = [0.0; 7];
        weights[0] = 0.5;
        assert!(matches!(
            RoleWeights::new(weights),
            Err(WeightError::BadSum { .. })
        ));
        weights = [1.0 / 7.0; 7];
        assert!(RoleWeights::new(weights).is_ok());
    }

    #[test]
    fn basic_entity_requires_content() {
        assert!(BasicEntity::new(Role::CorporateName, "  ").is_err());
        assert!(BasicEntity::new(Role::CorporateName, " x ").is_ok());
    }
}
