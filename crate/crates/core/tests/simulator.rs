mod common;

use std::time::Instant;

use common::fixtures::{dims, SEEDS};
use dataset_effects::effects::{effect_of_set, interaction_formulations, reference_states};
use dataset_effects::planner::{build_manifest, Marker, TaskCatalog};
use dataset_effects::records::{Condition, DimensionCatalog, RecordStore};
use dataset_effects::simulator::{calibrate, generate, CalibrationFamily, SimConfig};

fn truth() -> SimConfig {
    let base: Vec<f64> = (0..9).map(|k| 0.55 + 0.03 * k as f64).collect();
    let ramp = |scale: f64| (0..9).map(|k| scale * (k as f64 - 4.0)).collect::<Vec<f64>>();
    SimConfig::new(dims(), base, 0.0, SEEDS.to_vec(), 17)
        .unwrap()
        .with_effect("COLA", ramp(0.01))
        .unwrap()
        .with_effect("SST2", ramp(-0.007))
        .unwrap()
        .with_effect("MRPC", ramp(0.003))
        .unwrap()
        .with_interaction("COLA", "SST2", ramp(0.002))
        .unwrap()
        .with_interaction("COLA", "MRPC", vec![0.05; 9])
        .unwrap()
}

#[test]
fn noiseless_round_trip_recovers_truth() {
    let cfg = truth();
    let manifest = build_manifest(&TaskCatalog::default(), &Marker::ALL, &["BERT".into()], &SEEDS).unwrap();
    let records = generate(&cfg, &manifest).unwrap();
    assert_eq!(records.len(), 34 * 5 * 9);
    let store = RecordStore::from_records(records, Some(&DimensionCatalog::default())).unwrap();

    for x in ["COLA", "SST2", "MRPC"] {
        let truth = cfg.effect(x).unwrap();
        for r in reference_states(&store, x, "BERT") {
            let e = effect_of_set::<f64>(&store, &[x], &r).unwrap();
            // Reference states that contain a partner of x also pick up that pair's interaction.
            let mut want = truth.to_vec();
            for d in r.datasets() {
                if let Some(int) = cfg.interaction(x, d) {
                    want.iter_mut().zip(int).for_each(|(w, i)| *w += i);
                }
            }
            for (got, w) in e.values().iter().zip(&want) {
                assert!((got - w).abs() <= 1e-12, "{x} on {r}: {got} vs {w}");
            }
        }
    }
    let i = Condition::initial("BERT");
    for (x, y) in [("COLA", "SST2"), ("COLA", "MRPC"), ("SST2", "MRPC")] {
        let forms = interaction_formulations::<f64>(&store, x, y, &i).unwrap();
        let want = cfg.interaction(x, y).map(<[f64]>::to_vec).unwrap_or(vec![0.0; 9]);
        for (got, w) in forms.from_effects.values().iter().zip(&want) {
            assert!((got - w).abs() <= 1e-12);
        }
    }
}

#[test]
fn calibration_is_unbiased_and_powered() {
    let cfg = SimConfig::new(dims(), vec![0.7; 9], 0.01, SEEDS.to_vec(), 2023).unwrap();
    let family = CalibrationFamily {
        config: cfg,
        x: "COLA".into(),
        y: "SST2".into(),
        reference: vec![],
        injected: (0..9).map(|k| if k % 2 == 0 { 0.05 } else { 0.0 }).collect(),
    };
    let start = Instant::now();
    let report = calibrate(&family, 300, 0.05).unwrap();
    eprintln!("300 trials: {:?}", start.elapsed());
    assert!(!report.degenerate);
    for d in &report.per_dimension {
        assert!((d.mean_estimate - d.injected).abs() < 4.0 * d.estimate_se + 1e-12);
        if d.injected != 0.0 {
            assert!(d.power.unwrap() >= 0.99);
        } else {
            assert!(d.power.is_none());
        }
        let fpr = d.false_positive_rate.unwrap();
        assert!((0.0..=0.15).contains(&fpr), "{fpr}");
    }
    assert_eq!(calibrate(&family, 300, 0.05).unwrap(), report);
}
