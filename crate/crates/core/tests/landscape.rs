use proptest::prelude::*;
use tunebench::harness::{landscape_spec_for, sweep_values};
use tunebench::seed::rng;
use tunebench::{Characteristic, Landscape, LandscapeSpec};

use rand::Rng;

/// Exhaustive grid search for the highest point, independent of the stored
/// global index.
fn grid_argmax(l: &Landscape, per_axis: usize) -> Vec<f64> {
    let b = l.boundary();
    let step = b / per_axis as f64;
    let d = l.dimensions();
    let mut best = (f64::NEG_INFINITY, vec![]);
    let total = (per_axis + 1).pow(d as u32);
    for flat in 0..total {
        let mut rest = flat;
        let x: Vec<f64> = (0..d)
            .map(|_| {
                let i = rest % (per_axis + 1);
                rest /= per_axis + 1;
                i as f64 * step
            })
            .collect();
        let direct = l
            .components()
            .iter()
            .map(|c| {
                let q: f64 = x.iter().zip(&c.mean).map(|(a, m)| (a - m) * (a - m)).sum();
                c.weight * (-0.5 * c.curvature * c.curvature * q).exp()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if direct > best.0 {
            best = (direct, x);
        }
    }
    best.1
}

#[test]
fn grid_argmax_finds_the_global_optimum() {
    let mut checked = 0;
    for ch in Characteristic::ALL {
        for value in sweep_values(&ch.spec()) {
            let spec = landscape_spec_for(ch, value, 77 + checked).unwrap();
            if spec.dimensions > 2 {
                continue;
            }
            let l = Landscape::generate(&spec).unwrap();
            let per_axis = if spec.dimensions == 1 { 4000 } else { 200 };
            let cell = l.boundary() / per_axis as f64;
            let found = grid_argmax(&l, per_axis);
            let (mean, value_at_mean) = l.global_optimum();
            assert_eq!(value_at_mean, 1.0);
            let dist = found
                .iter()
                .zip(&mean)
                .map(|(a, m)| (a - m).abs())
                .fold(0.0, f64::max);
            assert!(dist <= cell, "{ch}={value}: grid optimum {found:?} vs {mean:?}");
            checked += 1;
        }
    }
    assert!(checked >= 30, "only {checked} instances");
}

#[test]
fn every_sweep_generates() {
    for ch in Characteristic::ALL {
        for value in sweep_values(&ch.spec()) {
            for seed in 0..5 {
                let l = Landscape::generate(&landscape_spec_for(ch, value, seed).unwrap()).unwrap();
                assert_eq!(l.evaluate(&l.global_optimum().0).unwrap(), 1.0);
            }
        }
    }
}

#[test]
fn text_round_trip_preserves_evaluation() {
    let spec = landscape_spec_for(Characteristic::Dimensions, 7.0, 12).unwrap();
    let l = Landscape::generate(&spec).unwrap();
    let back = Landscape::from_text(&l.to_text()).unwrap();
    assert_eq!(back, l);
    let mut r = rng(4);
    for _ in 0..100 {
        let x: Vec<f64> = (0..7).map(|_| r.random_range(0.0..=30.0)).collect();
        assert_eq!(back.evaluate(&x).unwrap(), l.evaluate(&x).unwrap());
    }
}

/// Table defaults with one characteristic swept, as in the experiment.
fn any_spec() -> impl Strategy<Value = LandscapeSpec> {
    (0usize..5, 0usize..10, any::<u64>()).prop_map(|(ch, i, seed)| {
        let ch = Characteristic::ALL[ch];
        let values = sweep_values(&ch.spec());
        landscape_spec_for(ch, values[i % values.len()], seed).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitness_lies_in_the_unit_interval(spec in any_spec(), probe in any::<u64>()) {
        let l = Landscape::generate(&spec).unwrap();
        prop_assert_eq!(l.evaluate(&l.global_optimum().0).unwrap(), 1.0);
        let mut r = rng(probe);
        for _ in 0..50 {
            let x: Vec<f64> = (0..spec.dimensions).map(|_| r.random_range(0.0..=spec.boundary)).collect();
            let f = l.evaluate(&x).unwrap();
            prop_assert!(f > 0.0 && f <= 1.0);
        }
    }

    #[test]
    fn local_peaks_read_the_ratio(spec in any_spec()) {
        let l = Landscape::generate(&spec).unwrap();
        for (i, c) in l.components().iter().enumerate() {
            let f = l.evaluate(&c.mean).unwrap();
            if i == l.global_index() {
                prop_assert_eq!(f, 1.0);
            } else {
                // another peak may overlap, never exceeding the global height
                prop_assert!(f >= spec.ratio && f <= 1.0);
            }
        }
    }

    #[test]
    fn generation_is_deterministic(spec in any_spec()) {
        prop_assert_eq!(Landscape::generate(&spec).unwrap(), Landscape::generate(&spec).unwrap());
    }
}
