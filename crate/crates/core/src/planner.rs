//! Multitask experiment planning with marker states.
//!
//! Tasks are organized in groups (single-sentence, similarity, inference by
//! default). A training set is only scheduled when it matches one of the marker
//! shapes:
//!
//! | marker | groups | tasks per group |
//! |--------|--------|-----------------|
//! | I      | 0      | 0               |
//! | A      | 1      | 1               |
//! | B      | 1      | 2               |
//! | C      | 2      | 1               |
//! | D      | 3      | 1               |
//! | E      | 2      | 2               |
//! | F      | 3      | 2               |
//!
//! Individual effects are read off transitions between marker states (I→A, A→B,
//! A→C, C→D) and interaction effects off compositions (B = A + A, C = A + A).
//! Training order is ignored, so a state is a set of tasks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::Condition;

/// Largest catalog the subset enumeration accepts.
pub const MAX_TASKS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("task catalog has no groups")]
    EmptyCatalog,
    #[error("task group `{0}` is empty")]
    EmptyGroup(String),
    #[error("dataset `{0}` appears more than once in the task catalog")]
    DuplicateTask(String),
    #[error("task catalog has {0} tasks; at most {MAX_TASKS} are supported")]
    TooManyTasks(usize),
    #[error("unknown marker `{0}` (expected one of I, A, B, C, D, E, F)")]
    UnknownMarker(String),
    #[error("manifest needs at least one {0}")]
    EmptyAxis(&'static str),
    #[error("invalid task catalog: {0}")]
    Parse(String),
    #[error("invalid manifest entry: {0}")]
    Entry(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskGroup {
    pub name: String,
    pub datasets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCatalog {
    groups: Vec<TaskGroup>,
}

impl Default for TaskCatalog {
    fn default() -> Self {
        let group = |name: &str, ds: [&str; 2]| TaskGroup {
            name: name.to_string(),
            datasets: ds.iter().map(|d| d.to_string()).collect(),
        };
        Self {
            groups: vec![
                group("single-sentence", ["COLA", "SST2"]),
                group("similarity", ["MRPC", "STSB"]),
                group("inference", ["QNLI", "RTE"]),
            ],
        }
    }
}

impl TaskCatalog {
    pub fn new(groups: Vec<TaskGroup>) -> Result<Self, PlanError> {
        if groups.is_empty() {
            return Err(PlanError::EmptyCatalog);
        }
        let mut seen = BTreeSet::new();
        for g in &groups {
            if g.datasets.is_empty() {
                return Err(PlanError::EmptyGroup(g.name.clone()));
            }
            for d in &g.datasets {
                if !seen.insert(d.clone()) {
                    return Err(PlanError::DuplicateTask(d.clone()));
                }
            }
        }
        if seen.len() > MAX_TASKS {
            return Err(PlanError::TooManyTasks(seen.len()));
        }
        Ok(Self { groups })
    }

    /// Parses `{"groups": [{"name": ..., "datasets": [...]}, ...]}`.
    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        #[derive(Deserialize)]
        struct Raw {
            groups: Vec<TaskGroup>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
        Self::new(raw.groups)
    }

    pub fn groups(&self) -> &[TaskGroup] {
        &self.groups
    }

    /// All datasets in catalog order.
    pub fn tasks(&self) -> Vec<&str> {
        self.groups
            .iter()
            .flat_map(|g| g.datasets.iter().map(String::as_str))
            .collect()
    }

    pub fn group_of(&self, dataset: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.datasets.iter().any(|d| d == dataset))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Marker {
    I,
    A,
    B,
    C,
    D,
    E,
    F,
}

impl Marker {
    pub const ALL: [Marker; 7] = [
        Marker::I,
        Marker::A,
        Marker::B,
        Marker::C,
        Marker::D,
        Marker::E,
        Marker::F,
    ];

    /// `(groups touched, tasks per group)`.
    pub fn shape(self) -> (usize, usize) {
        match self {
            Marker::I => (0, 0),
            Marker::A => (1, 1),
            Marker::B => (1, 2),
            Marker::C => (2, 1),
            Marker::D => (3, 1),
            Marker::E => (2, 2),
            Marker::F => (3, 2),
        }
    }

    fn from_shape(groups: usize, per_group: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.shape() == (groups, per_group))
    }

    /// Parses a comma-separated list such as `I,A,B,C,D`.
    pub fn parse_list(s: &str) -> Result<Vec<Marker>, PlanError> {
        let mut out: Vec<Marker> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Marker {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| PlanError::UnknownMarker(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkerState {
    pub marker: Marker,
    /// Dataset names, sorted.
    pub datasets: Vec<String>,
}

/// Marker of a task set, or `None` when it matches no marker shape.
pub fn classify(catalog: &TaskCatalog, datasets: &[&str]) -> Option<Marker> {
    let mut per_group: BTreeMap<usize, usize> = BTreeMap::new();
    for d in datasets {
        *per_group.entry(catalog.group_of(d)?).or_default() += 1;
    }
    if per_group.is_empty() {
        return Some(Marker::I);
    }
    let first = *per_group.values().next().expect("non-empty");
    if per_group.values().any(|&c| c != first) {
        return None;
    }
    Marker::from_shape(per_group.len(), first)
}

/// Every task subset matching one of `markers`, ordered by marker, then by the
/// catalog positions of its tasks.
pub fn enumerate_marker_states(catalog: &TaskCatalog, markers: &[Marker]) -> Result<Vec<MarkerState>, PlanError> {
    let tasks = catalog.tasks();
    if tasks.len() > MAX_TASKS {
        return Err(PlanError::TooManyTasks(tasks.len()));
    }
    let wanted: BTreeSet<Marker> = markers.iter().copied().collect();
    let mut found: Vec<(Marker, Vec<usize>)> = Vec::new();
    for mask in 0u32..(1u32 << tasks.len()) {
        let idx: Vec<usize> = (0..tasks.len()).filter(|i| mask & (1 << i) != 0).collect();
        let names: Vec<&str> = idx.iter().map(|&i| tasks[i]).collect();
        if let Some(m) = classify(catalog, &names).filter(|m| wanted.contains(m)) {
            found.push((m, idx));
        }
    }
    found.sort();
    Ok(found
        .into_iter()
        .map(|(marker, idx)| {
            let mut datasets: Vec<String> = idx.iter().map(|&i| tasks[i].to_string()).collect();
            datasets.sort();
            MarkerState { marker, datasets }
        })
        .collect())
}

/// Number of ordered task sequences without repetition: Σₖ n!/(n−k)!.
/// `None` on overflow.
pub fn count_ordered_settings(n_tasks: u32) -> Option<u128> {
    let mut total: u128 = 0;
    let mut falling: u128 = 1;
    for k in 0..=n_tasks {
        if k > 0 {
            falling = falling.checked_mul(u128::from(n_tasks - k + 1))?;
        }
        total = total.checked_add(falling)?;
    }
    Some(total)
}

/// Number of task subsets, 2ⁿ. `None` on overflow.
pub fn count_unordered_settings(n_tasks: u32) -> Option<u128> {
    1u128.checked_shl(n_tasks).filter(|_| n_tasks < 128)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub model: String,
    pub datasets: Vec<String>,
    pub seed: i64,
    pub marker: Marker,
}

impl ManifestEntry {
    pub fn condition(&self) -> Result<Condition, PlanError> {
        Condition::new(self.model.clone(), self.datasets.iter().cloned()).map_err(|e| PlanError::Entry(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub markers: Vec<Marker>,
    pub models: Vec<String>,
    pub seeds: Vec<i64>,
    pub catalog: TaskCatalog,
    /// Marker states per marker (per model, per seed).
    pub counts: BTreeMap<Marker, usize>,
    pub states: Vec<MarkerState>,
    pub entries: Vec<ManifestEntry>,
}

impl ExperimentManifest {
    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        serde_json::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))
    }

    /// Distinct conditions (model × state) the manifest schedules.
    pub fn conditions(&self) -> Vec<Condition> {
        let set: BTreeSet<Condition> = self.entries.iter().filter_map(|e| e.condition().ok()).collect();
        set.into_iter().collect()
    }
}

/// Cross product of marker states × models × seeds. Entries are ordered by model,
/// then state, then seed (in the given seed order).
pub fn build_manifest(
    catalog: &TaskCatalog,
    markers: &[Marker],
    models: &[String],
    seeds: &[i64],
) -> Result<ExperimentManifest, PlanError> {
    if models.is_empty() {
        return Err(PlanError::EmptyAxis("model"));
    }
    if seeds.is_empty() {
        return Err(PlanError::EmptyAxis("seed"));
    }
    let mut markers: Vec<Marker> = markers.to_vec();
    markers.sort();
    markers.dedup();
    let states = enumerate_marker_states(catalog, &markers)?;
    let mut counts: BTreeMap<Marker, usize> = markers.iter().map(|m| (*m, 0)).collect();
    for s in &states {
        *counts.entry(s.marker).or_default() += 1;
    }
    let mut entries = Vec::with_capacity(states.len() * models.len() * seeds.len());
    for model in models {
        for state in &states {
            for &seed in seeds {
                entries.push(ManifestEntry {
                    model: model.clone(),
                    datasets: state.datasets.clone(),
                    seed,
                    marker: state.marker,
                });
            }
        }
    }
    Ok(ExperimentManifest {
        markers,
        models: models.to_vec(),
        seeds: seeds.to_vec(),
        catalog: catalog.clone(),
        counts,
        states,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum TransitionKind {
    #[serde(rename = "I->A")]
    IToA,
    #[serde(rename = "A->B")]
    AToB,
    #[serde(rename = "A->C")]
    AToC,
    #[serde(rename = "C->D")]
    CToD,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 4] = [Self::IToA, Self::AToB, Self::AToC, Self::CToD];

    pub fn markers(self) -> (Marker, Marker) {
        match self {
            Self::IToA => (Marker::I, Marker::A),
            Self::AToB => (Marker::A, Marker::B),
            Self::AToC => (Marker::A, Marker::C),
            Self::CToD => (Marker::C, Marker::D),
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.markers();
        write!(f, "{a}->{b}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CompositionKind {
    #[serde(rename = "B=A+A")]
    BFromAA,
    #[serde(rename = "C=A+A")]
    CFromAA,
}

impl CompositionKind {
    pub const ALL: [CompositionKind; 2] = [Self::BFromAA, Self::CFromAA];

    pub fn target(self) -> Marker {
        match self {
            Self::BFromAA => Marker::B,
            Self::CFromAA => Marker::C,
        }
    }
}

impl fmt::Display for CompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}=A+A", self.target())
    }
}

/// An individual effect the manifest can measure: `dataset` added to `reference`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Transition {
    pub kind: TransitionKind,
    pub dataset: String,
    pub reference: Vec<String>,
}

/// An interaction the manifest can measure, relative to the initial state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Composition {
    pub kind: CompositionKind,
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportedAnalyses {
    pub individual: Vec<Transition>,
    pub interactions: Vec<Composition>,
    /// Analysis kinds with no realizable instance, with the reason.
    pub unavailable: Vec<String>,
}

/// Lists the individual transitions and pairwise compositions realizable from the
/// manifest's marker states.
pub fn supported_analyses(manifest: &ExperimentManifest) -> SupportedAnalyses {
    let by_set: BTreeMap<&[String], Marker> = manifest
        .states
        .iter()
        .map(|s| (s.datasets.as_slice(), s.marker))
        .collect();
    let tasks = manifest.catalog.tasks();
    let with = |base: &[String], extra: &[&str]| -> Vec<String> {
        let mut v: Vec<String> = base
            .iter()
            .cloned()
            .chain(extra.iter().map(|s| s.to_string()))
            .collect();
        v.sort();
        v
    };

    let mut individual = Vec::new();
    for kind in TransitionKind::ALL {
        let (from, to) = kind.markers();
        for state in manifest.states.iter().filter(|s| s.marker == from) {
            for task in tasks.iter().filter(|t| !state.datasets.iter().any(|d| d == *t)) {
                let target = with(&state.datasets, &[task]);
                if by_set.get(target.as_slice()) == Some(&to) {
                    individual.push(Transition {
                        kind,
                        dataset: task.to_string(),
                        reference: state.datasets.clone(),
                    });
                }
            }
        }
    }

    let mut interactions = Vec::new();
    let has_initial = by_set.get([].as_slice()) == Some(&Marker::I);
    for kind in CompositionKind::ALL {
        for state in manifest.states.iter().filter(|s| s.marker == kind.target()) {
            let [x, y] = state.datasets.as_slice() else {
                continue;
            };
            let singles_present = [x, y]
                .iter()
                .all(|d| by_set.get(std::slice::from_ref(*d)) == Some(&Marker::A));
            if has_initial && singles_present {
                interactions.push(Composition {
                    kind,
                    x: x.clone(),
                    y: y.clone(),
                });
            }
        }
    }

    let mut unavailable = Vec::new();
    for kind in TransitionKind::ALL {
        if !individual.iter().any(|t| t.kind == kind) {
            let (from, to) = kind.markers();
            unavailable.push(format!("{kind}: no {from} state with a matching {to} state"));
        }
    }
    for kind in CompositionKind::ALL {
        if !interactions.iter().any(|c| c.kind == kind) {
            unavailable.push(format!("{kind}: needs I, both A states and a {} state", kind.target()));
        }
    }
    SupportedAnalyses {
        individual,
        interactions,
        unavailable,
    }
}
