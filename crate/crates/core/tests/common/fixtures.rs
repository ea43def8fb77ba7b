use dataset_effects::records::{Condition, DimensionCatalog, ProbeDimension, ProbingRecord, RecordStore};
use rand::Rng;

pub const SEEDS: [i64; 5] = [42, 1, 1234, 123, 10];

pub fn dims() -> Vec<ProbeDimension> {
    DimensionCatalog::default().dims().to_vec()
}

pub fn cond(model: &str, datasets: &[&str]) -> Condition {
    Condition::new(model, datasets.iter().copied()).unwrap()
}

pub fn rec(condition: &Condition, seed: i64, dim: &ProbeDimension, accuracy: f64) -> ProbingRecord {
    ProbingRecord {
        condition: condition.clone(),
        seed,
        dimension: dim.clone(),
        accuracy,
    }
}

/// Records for one condition where `value(seed_index, dim_index)` gives the accuracy.
pub fn condition_records(
    condition: &Condition,
    n_seeds: usize,
    value: impl Fn(usize, usize) -> f64,
) -> Vec<ProbingRecord> {
    let dims = dims();
    let mut out = Vec::new();
    for s in 0..n_seeds {
        for (k, d) in dims.iter().enumerate() {
            out.push(rec(
                condition,
                SEEDS[s % SEEDS.len()] + (s / SEEDS.len()) as i64 * 1000,
                d,
                value(s, k),
            ));
        }
    }
    out
}

pub fn store(records: Vec<ProbingRecord>) -> RecordStore {
    RecordStore::from_records(records, Some(&DimensionCatalog::default())).unwrap()
}

/// The four conditions I, [X,I], [Y,I], [X,Y,I] filled with uniform random
/// accuracies. Returns the store and the reference condition.
pub fn random_four_state(
    rng: &mut impl Rng,
    model: &str,
    reference: &[&str],
    x: &str,
    y: &str,
    n_seeds: usize,
) -> (RecordStore, Condition) {
    let r = cond(model, reference);
    let conds = [
        r.clone(),
        r.with(&[x]).unwrap(),
        r.with(&[y]).unwrap(),
        r.with(&[x, y]).unwrap(),
    ];
    let mut records = Vec::new();
    for c in &conds {
        let vals: Vec<f64> = (0..n_seeds * 9).map(|_| rng.random_range(0.3..0.95)).collect();
        records.extend(condition_records(c, n_seeds, |s, k| vals[s * 9 + k]));
    }
    (store(records), r)
}

/// Zero-mean spread used to give every sample non-zero variance.
pub const PATTERN: [f64; 5] = [-0.02, -0.01, 0.0, 0.01, 0.02];

/// Ten references for COLA (the initial state, five singles, four pairs). On
/// dimension 3 (BigramShift) the first `n_significant` get a +10pp shift with
/// sd ≈ 1.6pp noise; the rest get the same samples in a different order (zero
/// delta). Every other dimension has zero delta.
pub fn persistence_store(model: &str, n_significant: usize, sign: f64) -> (RecordStore, Vec<Condition>) {
    let ref_sets: [&[&str]; 10] = [
        &[],
        &["SST2"],
        &["MRPC"],
        &["STSB"],
        &["QNLI"],
        &["RTE"],
        &["MRPC", "QNLI"],
        &["MRPC", "RTE"],
        &["STSB", "QNLI"],
        &["STSB", "RTE"],
    ];
    let mut records = Vec::new();
    let mut refs = Vec::new();
    for (i, set) in ref_sets.iter().enumerate() {
        let r = cond(model, set);
        let w = r.with(&["COLA"]).unwrap();
        let shift = if i < n_significant { sign * 0.10 } else { 0.0 };
        records.extend(condition_records(&r, 5, |s, k| 0.6 + 0.01 * k as f64 + PATTERN[s]));
        records.extend(condition_records(&w, 5, |s, k| {
            let base = 0.6 + 0.01 * k as f64 + PATTERN[(s + 2) % 5];
            if k == 3 {
                base + shift
            } else {
                base
            }
        }));
        refs.push(r);
    }
    (store(records), refs)
}

/// S(I) and S([X,I]) with zero-mean noise `PATTERN · noise_scale`; dimension
/// `dim` moves by `delta` (a fraction), every other dimension by zero.
pub fn individual_fixture(model: &str, x: &str, dim: usize, delta: f64, noise_scale: f64) -> (RecordStore, Condition) {
    let i = cond(model, &[]);
    let w = i.with(&[x]).unwrap();
    let mut records = condition_records(&i, 5, |s, k| 0.6 + 0.01 * k as f64 + PATTERN[s] * noise_scale);
    records.extend(condition_records(&w, 5, |s, k| {
        let v = 0.6 + 0.01 * k as f64 + PATTERN[(s + 2) % 5] * noise_scale;
        if k == dim {
            v + delta
        } else {
            v
        }
    }));
    (store(records), i)
}

/// The four interaction cells with additive effects of 0.02 (X) and −0.01 (Y)
/// everywhere and interaction `int` on dimension `dim`.
pub fn interaction_fixture(
    model: &str,
    x: &str,
    y: &str,
    dim: usize,
    int: f64,
    noise_scale: f64,
) -> (RecordStore, Condition) {
    let i = cond(model, &[]);
    let cells = [
        (i.clone(), 0.0, 0),
        (i.with(&[x]).unwrap(), 0.02, 1),
        (i.with(&[y]).unwrap(), -0.01, 2),
        (i.with(&[x, y]).unwrap(), 0.01, 3),
    ];
    let mut records = Vec::new();
    for (c, shift, rot) in cells {
        records.extend(condition_records(&c, 5, |s, k| {
            let v = 0.6 + 0.01 * k as f64 + shift + PATTERN[(s + rot) % 5] * noise_scale;
            if rot == 3 && k == dim {
                v + int
            } else {
                v
            }
        }));
    }
    (store(records), i)
}
