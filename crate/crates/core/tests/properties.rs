mod common;

use common::fixtures::{dims, random_four_state};
use dataset_effects::effects::{effect_add, effect_neg, effect_zero, interaction_formulations, EffectVector};
use dataset_effects::records::{ingest, DimensionCatalog, RecordStore};
use dataset_effects::report::format_pp;
use dataset_effects::statevector::estimate_state;
use dataset_effects::statkernel::pooled_t_test;
use dataset_effects::Exact;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

fn exact_vector() -> impl Strategy<Value = EffectVector<Exact>> {
    prop::collection::vec((-10_000i64..10_000, 1i64..1_000), 9).prop_map(|parts| {
        let values = parts
            .into_iter()
            .map(|(n, d)| Exact::new(BigInt::from(n), BigInt::from(d)))
            .collect();
        EffectVector::new(dims(), values).unwrap()
    })
}

proptest! {
    #[test]
    fn group_laws_hold_exactly(a in exact_vector(), b in exact_vector(), c in exact_vector()) {
        let zero = effect_zero::<Exact>(&dims());
        prop_assert_eq!(effect_add(&a, &zero).unwrap(), a.clone());
        prop_assert_eq!(effect_add(&a, &effect_neg(&a)).unwrap(), zero);
        prop_assert_eq!(effect_add(&a, &b).unwrap(), effect_add(&b, &a).unwrap());
        prop_assert_eq!(
            effect_add(&effect_add(&a, &b).unwrap(), &c).unwrap(),
            effect_add(&a, &effect_add(&b, &c).unwrap()).unwrap()
        );
    }

    #[test]
    fn rounding_is_within_half_a_cent(v in -500.0f64..500.0) {
        let s = format_pp(v);
        prop_assert!(s != "-0.00");
        let (_, frac) = s.split_once('.').unwrap();
        prop_assert_eq!(frac.len(), 2);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 0.005 + 1e-9);
    }

    #[test]
    fn pooled_t_symmetries(
        xs in prop::collection::vec(0.0f64..1.0, 2..8),
        ys in prop::collection::vec(0.0f64..1.0, 2..8),
        scale in 0.1f64..10.0,
    ) {
        let r = pooled_t_test(&xs, &ys).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.p));
        let flipped = pooled_t_test(&ys, &xs).unwrap();
        prop_assert_eq!(flipped.t, -r.t);
        prop_assert_eq!(flipped.p, r.p);
        if !r.degenerate {
            let sx: Vec<f64> = xs.iter().map(|v| v * scale).collect();
            let sy: Vec<f64> = ys.iter().map(|v| v * scale).collect();
            let s = pooled_t_test(&sx, &sy).unwrap();
            prop_assert!((s.t - r.t).abs() <= 1e-8 * r.t.abs().max(1.0));
            prop_assert!((s.p - r.p).abs() <= 1e-9);
        }
    }

    #[test]
    fn store_is_independent_of_record_order(seed in any::<u64>()) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let (store, reference) = random_four_state(&mut rng, "BERT", &["QNLI"], "COLA", "RTE", 3);
        let mut lines: Vec<String> = store.records().map(|r| r.to_json_line()).collect();
        lines.shuffle(&mut rng);
        let text = lines.join("\n");
        let again = ingest(text.as_bytes(), Some(&DimensionCatalog::default())).unwrap();
        prop_assert_eq!(&again, &store);
        prop_assert_eq!(again.content_digest(), store.content_digest());
        let a = estimate_state::<f64>(&store, &reference).unwrap();
        let b = estimate_state::<f64>(&again, &reference).unwrap();
        prop_assert_eq!(a, b);
        let _: &RecordStore = &again;
    }

    #[test]
    fn formulations_agree(seed in any::<u64>()) {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let (store, reference) = random_four_state(&mut rng, "RoBERTa", &[], "SST2", "MRPC", 5);
        let f = interaction_formulations::<f64>(&store, "SST2", "MRPC", &reference).unwrap();
        for k in 0..9 {
            let e = f.from_effects.values()[k] * 100.0;
            prop_assert!((e - f.four_state.values()[k] * 100.0).abs() <= 1e-9);
            prop_assert!((e - f.regression.values()[k] * 100.0).abs() <= 1e-9);
        }
    }
}
