//! The 14-finding label catalog and per-case label vectors.
//!
//! Catalog order is fixed and is the column order of every label CSV the
//! crate reads or writes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of findings in the catalog.
pub const NUM_FINDINGS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finding {
    NoFinding,
    EnlargedCardiomediastinum,
    Cardiomegaly,
    LungOpacity,
    LungLesion,
    Edema,
    Consolidation,
    Pneumonia,
    Atelectasis,
    Pneumothorax,
    PleuralEffusion,
    PleuralOther,
    Fracture,
    SupportDevices,
}

impl Finding {
    /// All findings in catalog order.
    pub const ALL: [Finding; NUM_FINDINGS] = [
        Finding::NoFinding,
        Finding::EnlargedCardiomediastinum,
        Finding::Cardiomegaly,
        Finding::LungOpacity,
        Finding::LungLesion,
        Finding::Edema,
        Finding::Consolidation,
        Finding::Pneumonia,
        Finding::Atelectasis,
        Finding::Pneumothorax,
        Finding::PleuralEffusion,
        Finding::PleuralOther,
        Finding::Fracture,
        Finding::SupportDevices,
    ];

    /// The 13 findings other than "No Finding".
    pub fn pathologies() -> impl Iterator<Item = Finding> {
        Self::ALL.into_iter().filter(|f| f.is_pathology())
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Finding> {
        Self::ALL.get(index).copied()
    }

    pub fn is_pathology(self) -> bool {
        self != Finding::NoFinding
    }

    /// Canonical ASCII identifier, used as CSV header and JSON key.
    pub fn id(self) -> &'static str {
        match self {
            Finding::NoFinding => "no_finding",
            Finding::EnlargedCardiomediastinum => "enlarged_cardiomediastinum",
            Finding::Cardiomegaly => "cardiomegaly",
            Finding::LungOpacity => "lung_opacity",
            Finding::LungLesion => "lung_lesion",
            Finding::Edema => "edema",
            Finding::Consolidation => "consolidation",
            Finding::Pneumonia => "pneumonia",
            Finding::Atelectasis => "atelectasis",
            Finding::Pneumothorax => "pneumothorax",
            Finding::PleuralEffusion => "pleural_effusion",
            Finding::PleuralOther => "pleural_other",
            Finding::Fracture => "fracture",
            Finding::SupportDevices => "support_devices",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Finding::NoFinding => "No Finding",
            Finding::EnlargedCardiomediastinum => "Enlarged Cardiomediastinum",
            Finding::Cardiomegaly => "Cardiomegaly",
            Finding::LungOpacity => "Lung Opacity",
            Finding::LungLesion => "Lung Lesion",
            Finding::Edema => "Edema",
            Finding::Consolidation => "Consolidation",
            Finding::Pneumonia => "Pneumonia",
            Finding::Atelectasis => "Atelectasis",
            Finding::Pneumothorax => "Pneumothorax",
            Finding::PleuralEffusion => "Pleural Effusion",
            Finding::PleuralOther => "Pleural Other",
            Finding::Fracture => "Fracture",
            Finding::SupportDevices => "Support Devices",
        }
    }

    /// Resolves either the canonical id or the display name, ignoring case
    /// and treating spaces, hyphens and underscores alike.
    pub fn lookup(name: &str) -> Option<Finding> {
        let key = normalize_key(name);
        Self::ALL.into_iter().find(|f| f.id() == key)
    }
}

fn normalize_key(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_sep = false;
    for c in name.trim().chars() {
        if c == ' ' || c == '-' || c == '_' {
            pending_sep = !out.is_empty();
        } else {
            if pending_sep {
                out.push('_');
                pending_sep = false;
            }
            out.extend(c.to_lowercase());
        }
    }
    out
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Finding {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Finding::lookup(s).ok_or_else(|| CatalogError::UnknownFinding(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown finding `{0}`")]
    UnknownFinding(String),
    #[error("expected {NUM_FINDINGS} label values, got {0}")]
    WrongLength(usize),
    #[error("invalid label value `{0}`")]
    InvalidValue(String),
    #[error("missing label for finding `{0}`")]
    MissingFinding(&'static str),
}

/// The catalog plus the two dataset-specific top-5 subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FindingCatalog {
    pub findings: [Finding; NUM_FINDINGS],
    pub top5_mimic: [Finding; 5],
    pub top5_cxr27: [Finding; 5],
}

impl FindingCatalog {
    pub const STANDARD: FindingCatalog = FindingCatalog {
        findings: Finding::ALL,
        top5_mimic: [
            Finding::Atelectasis,
            Finding::Cardiomegaly,
            Finding::Edema,
            Finding::Consolidation,
            Finding::PleuralEffusion,
        ],
        top5_cxr27: [
            Finding::SupportDevices,
            Finding::PleuralEffusion,
            Finding::LungOpacity,
            Finding::Pneumonia,
            Finding::LungLesion,
        ],
    };

    pub fn standard() -> &'static FindingCatalog {
        &Self::STANDARD
    }
}

/// Which findings a label metric is computed over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingSubset {
    All14,
    Top5Mimic,
    Top5Cxr27,
    Custom(Vec<Finding>),
}

impl FindingSubset {
    pub fn findings(&self) -> Vec<Finding> {
        let catalog = FindingCatalog::standard();
        match self {
            FindingSubset::All14 => catalog.findings.to_vec(),
            FindingSubset::Top5Mimic => catalog.top5_mimic.to_vec(),
            FindingSubset::Top5Cxr27 => catalog.top5_cxr27.to_vec(),
            FindingSubset::Custom(list) => {
                let mut out: Vec<Finding> = list.clone();
                out.sort();
                out.dedup();
                out
            }
        }
    }

    /// The name accepted back by `FromStr`.
    pub fn name(&self) -> String {
        match self {
            FindingSubset::All14 => "all14".into(),
            FindingSubset::Top5Mimic => "top5_mimic".into(),
            FindingSubset::Top5Cxr27 => "top5_cxr27".into(),
            FindingSubset::Custom(_) => self.findings().iter().map(|f| f.id()).collect::<Vec<_>>().join(","),
        }
    }
}

impl FromStr for FindingSubset {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all14" | "all_14" | "all" => Ok(FindingSubset::All14),
            "top5_mimic" | "mimic" => Ok(FindingSubset::Top5Mimic),
            "top5_cxr27" | "cxr27" => Ok(FindingSubset::Top5Cxr27),
            other => other.split(',').map(str::parse).collect::<Result<Vec<_>, _>>().map(FindingSubset::Custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelState {
    Positive,
    Negative,
    Uncertain,
    #[default]
    Blank,
}

impl LabelState {
    pub fn letter(self) -> char {
        match self {
            LabelState::Positive => 'P',
            LabelState::Negative => 'N',
            LabelState::Uncertain => 'U',
            LabelState::Blank => 'B',
        }
    }

    pub fn from_letter(c: char) -> Option<LabelState> {
        match c.to_ascii_uppercase() {
            'P' => Some(LabelState::Positive),
            'N' => Some(LabelState::Negative),
            'U' => Some(LabelState::Uncertain),
            'B' => Some(LabelState::Blank),
            _ => None,
        }
    }
}

/// How uncertain mentions map onto the binary labels used by F1 metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertainPolicy {
    #[default]
    UncertainAsPositive,
    UncertainAsNegative,
}

impl FromStr for UncertainPolicy {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uncertain_as_positive" | "positive" => Ok(UncertainPolicy::UncertainAsPositive),
            "uncertain_as_negative" | "negative" => Ok(UncertainPolicy::UncertainAsNegative),
            other => Err(CatalogError::InvalidValue(other.to_string())),
        }
    }
}

/// Four-state labels for one case, one state per catalog finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelVector([LabelState; NUM_FINDINGS]);

impl LabelVector {
    pub fn new(states: [LabelState; NUM_FINDINGS]) -> Self {
        LabelVector(states)
    }

    pub fn blank() -> Self {
        LabelVector::default()
    }

    pub fn get(&self, finding: Finding) -> LabelState {
        self.0[finding.index()]
    }

    pub fn set(&mut self, finding: Finding, state: LabelState) {
        self.0[finding.index()] = state;
    }

    pub fn with(mut self, finding: Finding, state: LabelState) -> Self {
        self.set(finding, state);
        self
    }

    pub fn states(&self) -> &[LabelState; NUM_FINDINGS] {
        &self.0
    }

    /// Binary projection: positive is 1, negative and blank are 0, uncertain
    /// follows `policy`.
    pub fn project_binary(&self, policy: UncertainPolicy) -> BinaryLabels {
        let mut bits = [false; NUM_FINDINGS];
        for (bit, state) in bits.iter_mut().zip(self.0.iter()) {
            *bit = match state {
                LabelState::Positive => true,
                LabelState::Uncertain => policy == UncertainPolicy::UncertainAsPositive,
                LabelState::Negative | LabelState::Blank => false,
            };
        }
        BinaryLabels(bits)
    }

    /// `P`/`N`/`U`/`B` letters in catalog order.
    pub fn to_letters(&self) -> String {
        self.0.iter().map(|s| s.letter()).collect()
    }

    pub fn from_letters(s: &str) -> Result<Self, CatalogError> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != NUM_FINDINGS {
            return Err(CatalogError::WrongLength(chars.len()));
        }
        let mut states = [LabelState::Blank; NUM_FINDINGS];
        for (slot, c) in states.iter_mut().zip(chars) {
            *slot = LabelState::from_letter(c).ok_or_else(|| CatalogError::InvalidValue(c.to_string()))?;
        }
        Ok(LabelVector(states))
    }
}

/// Binary presence labels over the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BinaryLabels([bool; NUM_FINDINGS]);

impl BinaryLabels {
    pub fn new(bits: [bool; NUM_FINDINGS]) -> Self {
        BinaryLabels(bits)
    }

    pub fn from_findings(findings: &[Finding]) -> Self {
        let mut bits = [false; NUM_FINDINGS];
        for f in findings {
            bits[f.index()] = true;
        }
        BinaryLabels(bits)
    }

    pub fn get(&self, finding: Finding) -> bool {
        self.0[finding.index()]
    }

    pub fn set(&mut self, finding: Finding, value: bool) {
        self.0[finding.index()] = value;
    }

    pub fn bits(&self) -> &[bool; NUM_FINDINGS] {
        &self.0
    }

    /// Number of positive findings, not counting "No Finding".
    pub fn complexity_count(&self) -> usize {
        Finding::pathologies().filter(|f| self.get(*f)).count()
    }

    /// Identity projection, so binary vectors can flow through the same
    /// code paths as four-state ones.
    pub fn to_label_vector(&self) -> LabelVector {
        let mut v = LabelVector::blank();
        for f in Finding::ALL {
            v.set(f, if self.get(f) { LabelState::Positive } else { LabelState::Negative });
        }
        v
    }

    pub fn to_ints(&self) -> [u8; NUM_FINDINGS] {
        self.0.map(u8::from)
    }

    /// Comma-separated 0/1 values in catalog order.
    pub fn to_csv_fields(&self) -> Vec<String> {
        self.0.iter().map(|b| if *b { "1" } else { "0" }.to_string()).collect()
    }

    pub fn from_ints<I, S>(values: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = [false; NUM_FINDINGS];
        let mut n = 0;
        for v in values {
            if n >= NUM_FINDINGS {
                n += 1;
                continue;
            }
            bits[n] = match v.as_ref().trim() {
                "1" => true,
                "0" => false,
                other => return Err(CatalogError::InvalidValue(other.to_string())),
            };
            n += 1;
        }
        if n != NUM_FINDINGS {
            return Err(CatalogError::WrongLength(n));
        }
        Ok(BinaryLabels(bits))
    }

    /// Keyed JSON form: `{finding_id: 0|1}`.
    pub fn to_keyed_map(&self) -> BTreeMap<&'static str, u8> {
        Finding::ALL.iter().map(|f| (f.id(), u8::from(self.get(*f)))).collect()
    }

    pub fn from_keyed_map(map: &BTreeMap<String, u8>) -> Result<Self, CatalogError> {
        let mut bits = [false; NUM_FINDINGS];
        let mut seen = [false; NUM_FINDINGS];
        for (key, value) in map {
            let f = Finding::lookup(key).ok_or_else(|| CatalogError::UnknownFinding(key.clone()))?;
            bits[f.index()] = match value {
                0 => false,
                1 => true,
                other => return Err(CatalogError::InvalidValue(other.to_string())),
            };
            seen[f.index()] = true;
        }
        if let Some(missing) = Finding::ALL.iter().find(|f| !seen[f.index()]) {
            return Err(CatalogError::MissingFinding(missing.id()));
        }
        Ok(BinaryLabels(bits))
    }
}

impl Serialize for BinaryLabels {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_keyed_map().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinaryLabels {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, u8>::deserialize(deserializer)?;
        BinaryLabels::from_keyed_map(&map).map_err(serde::de::Error::custom)
    }
}

impl Serialize for LabelVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<&'static str, LabelState> = Finding::ALL.iter().map(|f| (f.id(), self.get(*f))).collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabelVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, LabelState>::deserialize(deserializer)?;
        let mut v = LabelVector::blank();
        let mut seen = [false; NUM_FINDINGS];
        for (key, state) in map {
            let f = Finding::lookup(&key)
                .ok_or_else(|| serde::de::Error::custom(CatalogError::UnknownFinding(key.clone())))?;
            v.set(f, state);
            seen[f.index()] = true;
        }
        if let Some(missing) = Finding::ALL.iter().find(|f| !seen[f.index()]) {
            return Err(serde::de::Error::custom(CatalogError::MissingFinding(missing.id())));
        }
        Ok(v)
    }
}
