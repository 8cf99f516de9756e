use proptest::prelude::*;
use tunebench::optimizers::random_sampling;
use tunebench::seed::{rng, SeedPath};
use tunebench::{
    default_configuration_for, optimize, optimize_observed, parameter_space, AlgorithmId, Budget, Configuration,
    Landscape, LandscapeSpec, ParameterKind,
};

use rand::Rng;

fn spec(seed: u64) -> LandscapeSpec {
    LandscapeSpec {
        num_local_optima: 3,
        ratio: 0.5,
        dimensions: 2,
        boundary: 30.0,
        smoothness: 15.0,
        seed,
    }
}

/// A uniformly random valid configuration drawn from the descriptor bounds.
fn random_configuration(alg: AlgorithmId, seed: u64) -> Configuration {
    let mut r = rng(seed);
    loop {
        let values = parameter_space(alg)
            .iter()
            .map(|d| {
                let hi = match d.kind {
                    // keep runs short; large counts only lengthen the schedule
                    ParameterKind::Integer => d.upper.min(60.0),
                    ParameterKind::Real => d.upper,
                };
                let v = match d.kind {
                    ParameterKind::Integer => r.random_range(d.lower as i64..=hi as i64) as f64,
                    ParameterKind::Real => r.random_range(d.lower..=hi),
                };
                (d.name.to_string(), v)
            })
            .collect();
        if let Ok(c) = Configuration::new(alg, values) {
            return c;
        }
    }
}

#[test]
fn budget_domain_and_bookkeeping_hold_for_random_configurations() {
    let landscape = Landscape::generate(&spec(11)).unwrap();
    let budget = Budget::new(3_000).unwrap();
    for alg in AlgorithmId::ALL {
        for i in 0..8 {
            let config = random_configuration(alg, SeedPath::root(5).child_str(alg.as_str()).child(i).seed());
            if config.min_evaluations() > budget.max_evaluations {
                continue;
            }
            let mut count = 0usize;
            let mut best = f64::NEG_INFINITY;
            let mut trace_ok = true;
            let record = optimize_observed(&config, &landscape, budget, i, &mut |x, f| {
                count += 1;
                trace_ok &= x.iter().all(|&v| (0.0..=30.0).contains(&v));
                trace_ok &= (landscape.evaluate(x).unwrap() - f).abs() == 0.0;
                best = best.max(f);
            })
            .unwrap();
            assert!(trace_ok, "{alg}: point outside the domain or wrong fitness");
            assert!(count <= budget.max_evaluations, "{alg}: {count} evaluations");
            assert_eq!(count, record.evaluations_used);
            assert_eq!(record.best_fitness, best, "{alg}: best is not the running maximum");
            assert_eq!(landscape.evaluate(&record.best_x).unwrap(), record.best_fitness);
            assert!((0.0..=1.0).contains(&record.error));
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let landscape = Landscape::generate(&spec(3)).unwrap();
    let budget = Budget::new(2_000).unwrap();
    for alg in AlgorithmId::ALL {
        let config = default_configuration_for(alg, 2);
        let a = optimize(&config, &landscape, budget, 17).unwrap();
        let b = optimize(&config, &landscape, budget, 17).unwrap();
        assert_eq!(a, b);
        let c = optimize(&config, &landscape, budget, 18).unwrap();
        assert_ne!(a.best_x, c.best_x);
    }
}

#[test]
fn best_so_far_never_decreases() {
    let landscape = Landscape::generate(&spec(8)).unwrap();
    for alg in AlgorithmId::ALL {
        let mut trace = Vec::new();
        let mut best = f64::NEG_INFINITY;
        optimize_observed(
            &default_configuration_for(alg, 2),
            &landscape,
            Budget::new(2_000).unwrap(),
            1,
            &mut |_, f| {
                best = best.max(f);
                trace.push(best);
            },
        )
        .unwrap();
        assert!(trace.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn budget_below_one_iteration_is_rejected() {
    let landscape = Landscape::generate(&spec(1)).unwrap();
    let config = default_configuration_for(AlgorithmId::Pso, 2);
    assert!(optimize(&config, &landscape, Budget::new(10).unwrap(), 0).is_err());
}

fn shc(nf: f64) -> Configuration {
    Configuration::new(
        AlgorithmId::Shc,
        std::collections::BTreeMap::from([("neighborhood_fraction".to_string(), nf)]),
    )
    .unwrap()
}

#[test]
fn wide_hill_climber_beats_the_default_neighbourhood() {
    let budget = Budget::default();
    let (mut wide, mut narrow, mut baseline) = (0.0, 0.0, 0.0);
    for seed in 0..20u64 {
        let landscape = Landscape::generate(&spec(1000 + seed)).unwrap();
        wide += optimize(&shc(0.5), &landscape, budget, seed).unwrap().error;
        narrow += optimize(&shc(0.05), &landscape, budget, seed).unwrap().error;
        baseline += random_sampling(&landscape, budget, seed);
    }
    assert!(wide < narrow, "wide {wide} vs narrow {narrow}");
    // dense uniform sampling of a 2-D box is hard to beat at this budget
    assert!(baseline < wide, "random {baseline} vs wide {wide}");
}

#[test]
fn defaults_dominate_random_sampling_on_a_single_smooth_peak() {
    let budget = Budget::default();
    for alg in AlgorithmId::ALL {
        let (mut ours, mut baseline) = (0.0, 0.0);
        for seed in 0..20u64 {
            let landscape = Landscape::generate(&LandscapeSpec {
                num_local_optima: 0,
                smoothness: 10.0,
                ..spec(2000 + seed)
            })
            .unwrap();
            ours += optimize(&default_configuration_for(alg, 2), &landscape, budget, seed)
                .unwrap()
                .error;
            baseline += random_sampling(&landscape, budget, seed);
        }
        assert!(ours <= baseline, "{alg}: {ours} vs random {baseline}");
    }
}

#[test]
fn harmony_search_without_memory_consideration_samples_uniformly() {
    let landscape = Landscape::generate(&LandscapeSpec { dimensions: 1, ..spec(4) }).unwrap();
    let mut values: std::collections::BTreeMap<String, f64> = parameter_space(AlgorithmId::Hs)
        .iter()
        .map(|d| (d.name.to_string(), d.default))
        .collect();
    values.insert("consideration".into(), 0.0);
    let hs = Configuration::new(AlgorithmId::Hs, values).unwrap();
    let mut bins = [0usize; 10];
    let mut n = 0usize;
    optimize_observed(&hs, &landscape, Budget::new(10_000).unwrap(), 9, &mut |x, _| {
        bins[((x[0] / 3.0) as usize).min(9)] += 1;
        n += 1;
    })
    .unwrap();
    let expected = n as f64 / 10.0;
    let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
    // 9 degrees of freedom; 27.88 is the 0.999 quantile
    assert!(chi2 < 27.88, "chi2 = {chi2}, bins = {bins:?}");
}

#[test]
fn ga_with_no_crossover_or_mutation_keeps_its_initial_points() {
    let landscape = Landscape::generate(&spec(6)).unwrap();
    let mut values: std::collections::BTreeMap<String, f64> = parameter_space(AlgorithmId::Ga)
        .iter()
        .map(|d| (d.name.to_string(), d.default))
        .collect();
    values.insert("crossover".into(), 0.0);
    values.insert("mutation".into(), 0.0);
    values.insert("population".into(), 20.0);
    let ga = Configuration::new(AlgorithmId::Ga, values).unwrap();
    let mut seen: Vec<Vec<f64>> = Vec::new();
    let mut novel = 0;
    optimize_observed(&ga, &landscape, Budget::new(1_000).unwrap(), 2, &mut |x, _| {
        if seen.len() < 20 {
            seen.push(x.to_vec());
        } else if !seen.iter().any(|s| s == x) {
            novel += 1;
        }
    })
    .unwrap();
    assert_eq!(novel, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn clamping_keeps_every_point_in_bounds(
        alg_index in 0usize..7,
        boundary in 10.0f64..100.0,
        dims in 1usize..5,
        seed in any::<u64>(),
    ) {
        let alg = AlgorithmId::ALL[alg_index];
        let landscape = Landscape::generate(&LandscapeSpec { boundary, dimensions: dims, ..spec(seed) }).unwrap();
        let mut inside = true;
        optimize_observed(&default_configuration_for(alg, dims), &landscape, Budget::new(1_500).unwrap(), seed, &mut |x, f| {
            inside &= x.len() == dims && x.iter().all(|&v| (0.0..=boundary).contains(&v)) && f > 0.0 && f <= 1.0;
        }).unwrap();
        prop_assert!(inside);
    }
}
