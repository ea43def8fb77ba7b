//! Synthetic probing records from a known additive-plus-interaction model, and a
//! Monte Carlo harness that measures the interaction test's false-positive rate
//! and power.
//!
//! For a condition with dataset set D the simulated accuracy on dimension k is
//!
//! ```text
//! base[k] + Σ_{d ∈ D} effect_d[k] + Σ_{{a,b} ⊆ D} interaction_{a,b}[k] + ε,   ε ~ N(0, noise_sd²)
//! ```
//!
//! Values are not clipped to [0, 1].
//!
//! Randomness: xoshiro256++ (`rand_xoshiro::Xoshiro256PlusPlus`) seeded through
//! SplitMix64 from a `u64`, with normals drawn by `rand_distr::Normal`
//! (ziggurat). Draw order is manifest entry order, then catalog dimension order,
//! and nothing is drawn when `noise_sd` is 0. Calibration trial `i` uses the
//! stream seeded with `splitmix64(rng_seed + (i + 1) · 0x9E3779B97F4A7C15)`, so
//! trials are reproducible independently of one another.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::effects::{interaction_effect, EffectError, EffectOptions};
use crate::planner::ExperimentManifest;
use crate::records::{Condition, DimensionCatalog, ProbeDimension, ProbingRecord, RecordStore};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("vector for {0} has the wrong number of dimensions")]
    DimensionMismatch(String),
    #[error("unknown dimension `{0}` in simulation config")]
    UnknownDimension(String),
    #[error("base state is missing dimension `{0}`")]
    MissingBase(String),
    #[error("noise_sd must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("interaction pair needs two distinct datasets, got `{0}` twice")]
    SelfInteraction(String),
    #[error("calibration needs at least {min} trials, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("calibration needs at least two seeds")]
    TooFewSeeds,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Effect(#[from] EffectError),
}

/// Ground truth for the generator. All vectors are aligned with `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dims: Vec<ProbeDimension>,
    pub base_state: Vec<f64>,
    pub true_effects: BTreeMap<String, Vec<f64>>,
    /// Keyed by the pair in name order.
    pub true_interactions: BTreeMap<(String, String), Vec<f64>>,
    pub noise_sd: f64,
    pub seeds: Vec<i64>,
    pub rng_seed: u64,
}

fn pair_key(x: &str, y: &str) -> (String, String) {
    if x <= y {
        (x.to_string(), y.to_string())
    } else {
        (y.to_string(), x.to_string())
    }
}

impl SimConfig {
    pub fn new(
        dims: Vec<ProbeDimension>,
        base_state: Vec<f64>,
        noise_sd: f64,
        seeds: Vec<i64>,
        rng_seed: u64,
    ) -> Result<Self, SimError> {
        if base_state.len() != dims.len() {
            return Err(SimError::DimensionMismatch("base_state".into()));
        }
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(SimError::InvalidNoise(noise_sd));
        }
        Ok(Self {
            dims,
            base_state,
            true_effects: BTreeMap::new(),
            true_interactions: BTreeMap::new(),
            noise_sd,
            seeds,
            rng_seed,
        })
    }

    pub fn with_effect(mut self, dataset: &str, effect: Vec<f64>) -> Result<Self, SimError> {
        if effect.len() != self.dims.len() {
            return Err(SimError::DimensionMismatch(dataset.to_string()));
        }
        self.true_effects.insert(dataset.to_string(), effect);
        Ok(self)
    }

    pub fn with_interaction(mut self, x: &str, y: &str, effect: Vec<f64>) -> Result<Self, SimError> {
        if x == y {
            return Err(SimError::SelfInteraction(x.to_string()));
        }
        if effect.len() != self.dims.len() {
            return Err(SimError::DimensionMismatch(format!("{x}×{y}")));
        }
        self.true_interactions.insert(pair_key(x, y), effect);
        Ok(self)
    }

    pub fn effect(&self, dataset: &str) -> Option<&[f64]> {
        self.true_effects.get(dataset).map(Vec::as_slice)
    }

    pub fn interaction(&self, x: &str, y: &str) -> Option<&[f64]> {
        self.true_interactions.get(&pair_key(x, y)).map(Vec::as_slice)
    }

    /// Noise-free accuracy vector for a dataset set.
    pub fn expected_state(&self, datasets: &[String]) -> Vec<f64> {
        let mut v = self.base_state.clone();
        for d in datasets {
            if let Some(e) = self.true_effects.get(d) {
                v.iter_mut().zip(e).for_each(|(a, b)| *a += b);
            }
        }
        for (i, a) in datasets.iter().enumerate() {
            for b in &datasets[i + 1..] {
                if let Some(e) = self.true_interactions.get(&pair_key(a, b)) {
                    v.iter_mut().zip(e).for_each(|(x, y)| *x += y);
                }
            }
        }
        v
    }

    pub fn catalog(&self) -> DimensionCatalog {
        DimensionCatalog::new(self.dims.iter().map(|d| d.as_str().to_string())).expect("dims unique")
    }

    /// Parses the TOML configuration format:
    ///
    /// ```toml
    /// dimensions = ["Length", "Depth"]     # optional; default nine-dimension catalog
    /// noise_sd = 0.01
    /// seeds = [42, 1, 1234, 123, 10]
    /// rng_seed = 7
    /// base_default = 0.5                   # optional fill for dimensions absent below
    ///
    /// [base_state]
    /// Length = 0.8
    ///
    /// [true_effects.COLA]
    /// BigramShift = 0.06
    ///
    /// [[true_interactions]]
    /// pair = ["COLA", "SST2"]
    /// effect = { BigramShift = 0.07 }
    /// ```
    ///
    /// Dimensions omitted from an effect or interaction table are zero.
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let raw: RawSimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        let catalog = match raw.dimensions {
            Some(names) => DimensionCatalog::new(names).map_err(|e| SimError::Config(e.to_string()))?,
            None => DimensionCatalog::default(),
        };
        let dims = catalog.dims().to_vec();
        let dense = |table: &BTreeMap<String, f64>, fill: Option<f64>| -> Result<Vec<f64>, SimError> {
            if let Some(unknown) = table.keys().find(|k| !catalog.contains(k)) {
                return Err(SimError::UnknownDimension(unknown.clone()));
            }
            dims.iter()
                .map(|d| match (table.get(d.as_str()), fill) {
                    (Some(v), _) => Ok(*v),
                    (None, Some(f)) => Ok(f),
                    (None, None) => Err(SimError::MissingBase(d.to_string())),
                })
                .collect()
        };
        let base = dense(&raw.base_state, raw.base_default)?;
        let mut cfg = SimConfig::new(
            dims.clone(),
            base,
            raw.noise_sd,
            raw.seeds.unwrap_or_else(|| crate::records::CANONICAL_SEEDS.to_vec()),
            raw.rng_seed,
        )?;
        for (name, table) in &raw.true_effects {
            cfg = cfg.with_effect(name, dense(table, Some(0.0))?)?;
        }
        for pair in &raw.true_interactions {
            cfg = cfg.with_interaction(&pair.pair[0], &pair.pair[1], dense(&pair.effect, Some(0.0))?)?;
        }
        Ok(cfg)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimConfig {
    dimensions: Option<Vec<String>>,
    noise_sd: f64,
    seeds: Option<Vec<i64>>,
    rng_seed: u64,
    base_default: Option<f64>,
    #[serde(default)]
    base_state: BTreeMap<String, f64>,
    #[serde(default)]
    true_effects: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    true_interactions: Vec<RawInteraction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    pair: [String; 2],
    #[serde(default)]
    effect: BTreeMap<String, f64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for calibration trial `index`.
pub fn trial_rng(rng_seed: u64, index: u64) -> Xoshiro256PlusPlus {
    let mixed = splitmix64(rng_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    Xoshiro256PlusPlus::seed_from_u64(mixed)
}

fn simulate_runs(
    config: &SimConfig,
    runs: impl IntoIterator<Item = (Condition, i64)>,
    rng: &mut Xoshiro256PlusPlus,
) -> Result<Vec<ProbingRecord>, SimError> {
    let normal = Normal::new(0.0, config.noise_sd).map_err(|_| SimError::InvalidNoise(config.noise_sd))?;
    let mut out = Vec::new();
    for (condition, seed) in runs {
        let expected = config.expected_state(condition.datasets());
        for (dim, mu) in config.dims.iter().zip(expected) {
            let noise = if config.noise_sd > 0.0 { normal.sample(rng) } else { 0.0 };
            out.push(ProbingRecord {
                condition: condition.clone(),
                seed,
                dimension: dim.clone(),
                accuracy: mu + noise,
            });
        }
    }
    Ok(out)
}

/// One record per (manifest entry, dimension), deterministic in `config.rng_seed`.
pub fn generate(config: &SimConfig, manifest: &ExperimentManifest) -> Result<Vec<ProbingRecord>, SimError> {
    let runs = manifest
        .entries
        .iter()
        .map(|e| {
            e.condition()
                .map(|c| (c, e.seed))
                .map_err(|err| SimError::Manifest(err.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.rng_seed);
    simulate_runs(config, runs, &mut rng)
}

/// A calibration scenario: the interaction between `x` and `y` (relative to
/// `reference`) is tested under the null (true interaction zeroed) and under
/// `injected`.
#[derive(Debug, Clone)]
pub struct CalibrationFamily {
    pub config: SimConfig,
    pub x: String,
    pub y: String,
    pub reference: Vec<String>,
    pub injected: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionCalibration {
    pub dimension: ProbeDimension,
    pub false_positive_rate: Option<f64>,
    pub power: Option<f64>,
    pub injected: f64,
    /// Mean estimated Int (fraction) across trials under the injected interaction.
    pub mean_estimate: f64,
    /// Standard error of that mean.
    pub estimate_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub trials: usize,
    pub alpha: f64,
    /// Mean of the per-dimension rates; `None` for a degenerate (noise-free) config.
    pub false_positive_rate: Option<f64>,
    /// Mean over dimensions with a non-zero injected interaction; `None` if there are none.
    pub power: Option<f64>,
    pub degenerate: bool,
    pub per_dimension: Vec<DimensionCalibration>,
}

pub const MIN_CALIBRATION_TRIALS: usize = 100;

const CALIBRATION_MODEL: &str = "SIM";

/// Monte Carlo estimate of the interaction test's rejection rates.
///
/// A test rejects when p ≤ alpha, so alpha = 1 rejects every trial.
pub fn calibrate(family: &CalibrationFamily, trials: usize, alpha: f64) -> Result<CalibrationReport, SimError> {
    if trials < MIN_CALIBRATION_TRIALS {
        return Err(SimError::TooFewTrials {
            min: MIN_CALIBRATION_TRIALS,
            got: trials,
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SimError::InvalidAlpha(alpha));
    }
    if family.config.seeds.len() < 2 {
        return Err(SimError::TooFewSeeds);
    }
    let k = family.config.dims.len();
    if family.injected.len() != k {
        return Err(SimError::DimensionMismatch("injected interaction".into()));
    }
    let null_cfg = family
        .config
        .clone()
        .with_interaction(&family.x, &family.y, vec![0.0; k])?;
    let alt_cfg = family
        .config
        .clone()
        .with_interaction(&family.x, &family.y, family.injected.clone())?;

    let reference = Condition::new(CALIBRATION_MODEL, family.reference.iter().cloned())
        .map_err(|e| SimError::Config(e.to_string()))?;
    let cells = [
        reference.clone(),
        reference
            .with(&[&family.x])
            .map_err(|e| SimError::Config(e.to_string()))?,
        reference
            .with(&[&family.y])
            .map_err(|e| SimError::Config(e.to_string()))?,
        reference
            .with(&[&family.x, &family.y])
            .map_err(|e| SimError::Config(e.to_string()))?,
    ];
    let runs: Vec<(Condition, i64)> = cells
        .iter()
        .flat_map(|c| family.config.seeds.iter().map(move |s| (c.clone(), *s)))
        .collect();
    let catalog = family.config.catalog();
    let options = EffectOptions::default();

    let mut null_rejections = vec![0usize; k];
    let mut alt_rejections = vec![0usize; k];
    let mut sum = vec![0.0; k];
    let mut sum_sq = vec![0.0; k];
    for trial in 0..trials as u64 {
        for (cfg, stream, rejections) in [
            (&null_cfg, 2 * trial, &mut null_rejections),
            (&alt_cfg, 2 * trial + 1, &mut alt_rejections),
        ] {
            let mut rng = trial_rng(cfg.rng_seed, stream);
            let records = simulate_runs(cfg, runs.iter().cloned(), &mut rng)?;
            let store =
                RecordStore::from_records(records, Some(&catalog)).map_err(|e| SimError::Config(e.to_string()))?;
            let result = interaction_effect::<f64>(&store, &family.x, &family.y, &reference, &options)?;
            for (i, d) in result.dims.iter().enumerate() {
                if d.p.is_some_and(|p| p <= alpha) {
                    rejections[i] += 1;
                }
                if stream % 2 == 1 {
                    let est = d.int_pp / 100.0;
                    sum[i] += est;
                    sum_sq[i] += est * est;
                }
            }
        }
    }

    let n = trials as f64;
    let degenerate = family.config.noise_sd == 0.0;
    let per_dimension: Vec<DimensionCalibration> = (0..k)
        .map(|i| {
            let mean = sum[i] / n;
            let var = ((sum_sq[i] - n * mean * mean) / (n - 1.0)).max(0.0);
            DimensionCalibration {
                dimension: family.config.dims[i].clone(),
                false_positive_rate: (!degenerate).then(|| null_rejections[i] as f64 / n),
                power: (family.injected[i] != 0.0).then(|| alt_rejections[i] as f64 / n),
                injected: family.injected[i],
                mean_estimate: mean,
                estimate_se: (var / n).sqrt(),
            }
        })
        .collect();
    let fprs: Vec<f64> = per_dimension.iter().filter_map(|d| d.false_positive_rate).collect();
    let powers: Vec<f64> = per_dimension.iter().filter_map(|d| d.power).collect();
    let avg = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok(CalibrationReport {
        trials,
        alpha,
        false_positive_rate: avg(&fprs),
        power: avg(&powers),
        degenerate,
        per_dimension,
    })
}
