//! Probing-accuracy observations: data model, validation and ingestion.
//!
//! The on-disk record format is newline-delimited JSON, one observation per line:
//!
//! ```text
//! {"model":"BERT","datasets":["COLA","SST2"],"seed":42,"dimension":"Tense","accuracy":0.88}
//! ```
//!
//! An empty `datasets` array denotes the initial (reference) state of the model.
//! A CSV variant with header `model,datasets,seed,dimension,accuracy` and
//! pipe-separated datasets is accepted as well.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The five random seeds used for every fine-tuning setting in the reference study.
pub const CANONICAL_SEEDS: [i64; 5] = [42, 1, 1234, 123, 10];

/// Default probe suite: nine SentEval dimensions (WordContent excluded).
pub const DEFAULT_DIMENSIONS: [&str; 9] = [
    "Length",
    "Depth",
    "TopConst",
    "BigramShift",
    "Tense",
    "SubjNumber",
    "ObjNumber",
    "OddManOut",
    "CoordInv",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbeDimension(String);

impl ProbeDimension {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ProbeDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ProbeDimension {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Ordered, duplicate-free list of probe dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionCatalog {
    dims: Vec<ProbeDimension>,
}

impl Default for DimensionCatalog {
    fn default() -> Self {
        Self {
            dims: DEFAULT_DIMENSIONS.iter().map(|d| ProbeDimension::new(*d)).collect(),
        }
    }
}

impl DimensionCatalog {
    pub fn new<I, S>(names: I) -> Result<Self, RecordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut seen = BTreeSet::new();
        let mut dims = Vec::new();
        for name in names {
            let name = name.into();
            if name.is_empty() {
                return Err(RecordError::EmptyIdentifier("dimension"));
            }
            if !seen.insert(name.clone()) {
                return Err(RecordError::DuplicateDimension(name));
            }
            dims.push(ProbeDimension(name));
        }
        Ok(Self { dims })
    }

    /// Parses a catalog file: a JSON array of dimension names.
    pub fn from_json(text: &str) -> Result<Self, RecordError> {
        let names: Vec<String> = serde_json::from_str(text).map_err(|e| RecordError::Json(e.to_string()))?;
        Self::new(names)
    }

    pub fn dims(&self) -> &[ProbeDimension] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.dims.iter().any(|d| d.as_str() == name)
    }

    pub fn position(&self, dim: &ProbeDimension) -> Option<usize> {
        self.dims.iter().position(|d| d == dim)
    }
}

/// A model plus the (unordered) set of datasets it was fine-tuned on.
///
/// Datasets are kept sorted so equality and ordering ignore input order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    model: String,
    datasets: Vec<String>,
}

impl Condition {
    pub fn new<I, S>(model: impl Into<String>, datasets: I) -> Result<Self, RecordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let model = model.into();
        if model.is_empty() {
            return Err(RecordError::EmptyIdentifier("model"));
        }
        let mut sorted: Vec<String> = datasets.into_iter().map(Into::into).collect();
        if sorted.iter().any(String::is_empty) {
            return Err(RecordError::EmptyIdentifier("dataset"));
        }
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(RecordError::DuplicateDataset(w[0].clone()));
        }
        Ok(Self {
            model,
            datasets: sorted,
        })
    }

    /// The untouched model, before any of the studied datasets are applied.
    pub fn initial(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            datasets: Vec::new(),
        }
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn is_initial(&self) -> bool {
        self.datasets.is_empty()
    }

    pub fn contains(&self, dataset: &str) -> bool {
        self.datasets.binary_search_by(|d| d.as_str().cmp(dataset)).is_ok()
    }

    /// This condition with `extra` datasets added. Fails if any is already present.
    pub fn with(&self, extra: &[&str]) -> Result<Self, RecordError> {
        let all = self.datasets.iter().map(String::as_str).chain(extra.iter().copied());
        Self::new(self.model.clone(), all)
    }

    /// Dataset-set label in table style: `I` for the initial state, otherwise the
    /// datasets joined by spaces.
    pub fn label(&self) -> String {
        if self.datasets.is_empty() {
            "I".to_string()
        } else {
            self.datasets.join(" ")
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.model, self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbingRecord {
    pub condition: Condition,
    pub seed: i64,
    pub dimension: ProbeDimension,
    pub accuracy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    model: String,
    datasets: Vec<String>,
    seed: i64,
    dimension: String,
    accuracy: f64,
}

impl ProbingRecord {
    /// Serializes to one JSON line (no trailing newline) in the canonical field order.
    pub fn to_json_line(&self) -> String {
        let raw = RawRecord {
            model: self.condition.model.clone(),
            datasets: self.condition.datasets.clone(),
            seed: self.seed,
            dimension: self.dimension.0.clone(),
            accuracy: self.accuracy,
        };
        serde_json::to_string(&raw).expect("record serializes")
    }

    fn from_raw(raw: RawRecord, catalog: Option<&DimensionCatalog>) -> Result<Self, RecordError> {
        if !raw.accuracy.is_finite() {
            return Err(RecordError::NonFiniteAccuracy(raw.accuracy));
        }
        if raw.dimension.is_empty() {
            return Err(RecordError::EmptyIdentifier("dimension"));
        }
        if let Some(cat) = catalog {
            if !cat.contains(&raw.dimension) {
                return Err(RecordError::UnknownDimension(raw.dimension));
            }
        }
        Ok(Self {
            condition: Condition::new(raw.model, raw.datasets)?,
            seed: raw.seed,
            dimension: ProbeDimension(raw.dimension),
            accuracy: raw.accuracy,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Json(String),
    #[error("malformed CSV record: {0}")]
    Csv(String),
    #[error("unknown dimension `{0}` (not in the pinned catalog)")]
    UnknownDimension(String),
    #[error("accuracy must be finite, got {0}")]
    NonFiniteAccuracy(f64),
    #[error("dataset `{0}` listed more than once")]
    DuplicateDataset(String),
    #[error("dimension `{0}` listed more than once in catalog")]
    DuplicateDimension(String),
    #[error("empty {0} identifier")]
    EmptyIdentifier(&'static str),
}

/// Parses one newline-delimited JSON record.
///
/// When `catalog` is given, dimensions outside it are rejected.
pub fn parse_record(line: &str, catalog: Option<&DimensionCatalog>) -> Result<ProbingRecord, RecordError> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
    ProbingRecord::from_raw(raw, catalog)
}

type RecordKey = (Condition, i64, ProbeDimension);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateKey {
    pub condition: Condition,
    pub seed: i64,
    pub dimension: ProbeDimension,
    pub first_line: usize,
    pub second_line: usize,
}

impl fmt::Display for DuplicateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} seed {} dimension {} on lines {} and {}",
            self.condition, self.seed, self.dimension, self.first_line, self.second_line
        )
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {source}")]
    Record { line: usize, source: RecordError },
    #[error("duplicate observations: {}", join_duplicates(.0))]
    Duplicates(Vec<DuplicateKey>),
    #[error("cannot combine stores with different dimension catalogs")]
    MixedCatalogs,
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

fn join_duplicates(d: &[DuplicateKey]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Immutable collection of validated probing records.
///
/// Equality compares catalog and observations; source digests are provenance only.
#[derive(Debug, Clone, Default)]
pub struct RecordStore {
    // condition -> dimension -> seed -> accuracy
    data: BTreeMap<Condition, BTreeMap<ProbeDimension, BTreeMap<i64, f64>>>,
    pinned: Option<DimensionCatalog>,
    provenance: Vec<String>,
}

impl PartialEq for RecordStore {
    fn eq(&self, other: &Self) -> bool {
        self.pinned == other.pinned && self.data == other.data
    }
}

/// Reads newline-delimited JSON records.
///
/// Blank lines are skipped. Duplicate `(condition, seed, dimension)` keys reject
/// the whole batch, listing every offending pair of line numbers.
pub fn ingest<R: BufRead>(reader: R, catalog: Option<&DimensionCatalog>) -> Result<RecordStore, IngestError> {
    let mut bytes = Vec::new();
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        bytes.extend_from_slice(line.as_bytes());
        bytes.push(b'\n');
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_record(&line, catalog).map_err(|source| IngestError::Record { line: idx + 1, source })?;
        records.push((idx + 1, rec));
    }
    RecordStore::from_numbered(records, catalog.cloned(), vec![digest(&bytes)])
}

/// Reads the CSV interchange format (`model,datasets,seed,dimension,accuracy`,
/// datasets separated by `|`). Line numbers in errors count the header as line 1.
pub fn ingest_csv<R: Read>(reader: R, catalog: Option<&DimensionCatalog>) -> Result<RecordStore, IngestError> {
    let mut buf = Vec::new();
    let mut reader = reader;
    reader.read_to_end(&mut buf)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(buf.as_slice());
    let mut records = Vec::new();
    for (idx, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| IngestError::Record {
            line,
            source: RecordError::Csv(e.to_string()),
        })?;
        let datasets = if row.datasets.trim().is_empty() {
            Vec::new()
        } else {
            row.datasets.split('|').map(|s| s.trim().to_string()).collect()
        };
        let raw = RawRecord {
            model: row.model,
            datasets,
            seed: row.seed,
            dimension: row.dimension,
            accuracy: row.accuracy,
        };
        let rec = ProbingRecord::from_raw(raw, catalog).map_err(|source| IngestError::Record { line, source })?;
        records.push((line, rec));
    }
    RecordStore::from_numbered(records, catalog.cloned(), vec![digest(&buf)])
}

#[derive(Deserialize)]
struct CsvRow {
    model: String,
    datasets: String,
    seed: i64,
    dimension: String,
    accuracy: f64,
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingTriple {
    pub condition: Condition,
    pub seed: i64,
    pub dimension: ProbeDimension,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub complete: bool,
    pub missing: Vec<MissingTriple>,
}

impl RecordStore {
    fn from_numbered(
        records: Vec<(usize, ProbingRecord)>,
        pinned: Option<DimensionCatalog>,
        provenance: Vec<String>,
    ) -> Result<Self, IngestError> {
        let mut first_seen: HashMap<RecordKey, usize> = HashMap::new();
        let mut duplicates = Vec::new();
        let mut data: BTreeMap<Condition, BTreeMap<ProbeDimension, BTreeMap<i64, f64>>> = BTreeMap::new();
        for (line, rec) in records {
            let key = (rec.condition.clone(), rec.seed, rec.dimension.clone());
            if let Some(&first) = first_seen.get(&key) {
                duplicates.push(DuplicateKey {
                    condition: key.0,
                    seed: key.1,
                    dimension: key.2,
                    first_line: first,
                    second_line: line,
                });
                continue;
            }
            first_seen.insert(key, line);
            data.entry(rec.condition)
                .or_default()
                .entry(rec.dimension)
                .or_default()
                .insert(rec.seed, rec.accuracy);
        }
        if !duplicates.is_empty() {
            return Err(IngestError::Duplicates(duplicates));
        }
        Ok(Self {
            data,
            pinned,
            provenance,
        })
    }

    /// Builds a store from in-memory records (e.g. simulator output).
    pub fn from_records<I>(records: I, catalog: Option<&DimensionCatalog>) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = ProbingRecord>,
    {
        let mut numbered = Vec::new();
        for (i, rec) in records.into_iter().enumerate() {
            if let Some(cat) = catalog {
                if !cat.contains(rec.dimension.as_str()) {
                    return Err(IngestError::Record {
                        line: i + 1,
                        source: RecordError::UnknownDimension(rec.dimension.0),
                    });
                }
            }
            if !rec.accuracy.is_finite() {
                return Err(IngestError::Record {
                    line: i + 1,
                    source: RecordError::NonFiniteAccuracy(rec.accuracy),
                });
            }
            numbered.push((i + 1, rec));
        }
        Self::from_numbered(numbered, catalog.cloned(), Vec::new())
    }

    /// Combines two stores. Both must pin the same catalog (or neither).
    pub fn merge(self, other: RecordStore) -> Result<Self, IngestError> {
        if self.pinned != other.pinned {
            return Err(IngestError::MixedCatalogs);
        }
        let pinned = self.pinned.clone();
        let mut provenance = self.provenance.clone();
        provenance.extend(other.provenance.iter().cloned());
        let records: Vec<_> = self
            .records()
            .chain(other.records())
            .enumerate()
            .map(|(i, r)| (i + 1, r))
            .collect();
        Self::from_numbered(records, pinned, provenance)
    }

    pub fn len(&self) -> usize {
        self.data
            .values()
            .flat_map(|dims| dims.values())
            .map(BTreeMap::len)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The pinned catalog, or the observed dimensions in name order if none is pinned.
    pub fn catalog(&self) -> DimensionCatalog {
        if let Some(cat) = &self.pinned {
            return cat.clone();
        }
        let names: BTreeSet<&ProbeDimension> = self.data.values().flat_map(|d| d.keys()).collect();
        DimensionCatalog {
            dims: names.into_iter().cloned().collect(),
        }
    }

    pub fn pinned_catalog(&self) -> Option<&DimensionCatalog> {
        self.pinned.as_ref()
    }

    /// SHA-256 digests of the source files this store was read from.
    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    /// SHA-256 over the canonical (sorted) serialization of every record.
    /// Independent of input order.
    pub fn content_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for rec in self.records() {
            hasher.update(rec.to_json_line().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.data.keys()
    }

    pub fn contains_condition(&self, condition: &Condition) -> bool {
        self.data.contains_key(condition)
    }

    pub fn models(&self) -> BTreeSet<&str> {
        self.data.keys().map(Condition::model).collect()
    }

    /// All seeds observed for `condition` on any dimension, ascending.
    pub fn seeds(&self, condition: &Condition) -> BTreeSet<i64> {
        self.data
            .get(condition)
            .map(|dims| dims.values().flat_map(|s| s.keys().copied()).collect())
            .unwrap_or_default()
    }

    /// Per-seed accuracies for one (condition, dimension), seeds ascending.
    pub fn samples(&self, condition: &Condition, dimension: &ProbeDimension) -> Option<&BTreeMap<i64, f64>> {
        self.data.get(condition)?.get(dimension)
    }

    pub fn get(&self, condition: &Condition, seed: i64, dimension: &ProbeDimension) -> Option<f64> {
        self.samples(condition, dimension)?.get(&seed).copied()
    }

    /// Catalog dimensions with no observation under `condition`.
    pub fn missing_dimensions(&self, condition: &Condition) -> Vec<ProbeDimension> {
        let dims = self.data.get(condition);
        self.catalog()
            .dims
            .into_iter()
            .filter(|d| dims.and_then(|m| m.get(d)).is_none_or(BTreeMap::is_empty))
            .collect()
    }

    /// Records in canonical order: condition, dimension name, seed.
    pub fn records(&self) -> impl Iterator<Item = ProbingRecord> + '_ {
        self.data.iter().flat_map(|(cond, dims)| {
            dims.iter().flat_map(move |(dim, seeds)| {
                seeds.iter().map(move |(seed, acc)| ProbingRecord {
                    condition: cond.clone(),
                    seed: *seed,
                    dimension: dim.clone(),
                    accuracy: *acc,
                })
            })
        })
    }
}

/// Lists every `(condition, seed, dimension)` triple absent from `store`.
pub fn completeness_check(store: &RecordStore, conditions: &[Condition], seeds: &[i64]) -> CompletenessReport {
    let catalog = store.catalog();
    let mut missing = Vec::new();
    for cond in conditions {
        for &seed in seeds {
            for dim in catalog.dims() {
                if store.get(cond, seed, dim).is_none() {
                    missing.push(MissingTriple {
                        condition: cond.clone(),
                        seed,
                        dimension: dim.clone(),
                    });
                }
            }
        }
    }
    CompletenessReport {
        complete: missing.is_empty(),
        missing,
    }
}
