use bfoseg::bfo::{
    optimize, optimize_with_observer, swarm_cost, BfoConfig, Bounds, Event, SwarmCoefficients,
};
use bfoseg::imagecore::Histogram;
use bfoseg::otsu::{exhaustive_search, ThresholdObjective};
use bfoseg::pipeline::{optimize_thresholds, THRESHOLD_BOUNDS};
use proptest::prelude::*;

#[test]
fn concave_objective_found_for_almost_every_seed() {
    let f = |x: &[f64]| -(x[0] - 50.0).powi(2);
    let bounds = Bounds::new(1.0, 255.0).unwrap();
    let cfg = BfoConfig { population: 10, chemotactic_steps: 50, ..Default::default() };
    let hits = (0..100)
        .filter(|&seed| {
            let r = optimize(&f, 1, bounds, &cfg.clone().with_seed(seed)).unwrap();
            (r.best_position[0] - 50.0).abs() <= 1.0
        })
        .count();
    assert!(hits >= 95, "only {hits}/100 seeds within 1 of the maximizer");
}

#[test]
fn small_histogram_seed_42_rounds_to_two() {
    let hist = Histogram::from_slice(&[4, 1, 0, 5]).unwrap();
    let r = optimize_thresholds(&hist, 1, &BfoConfig::default().with_seed(42)).unwrap();
    let (oracle, j) = exhaustive_search(&hist, 1).unwrap();
    assert_eq!(r.thresholds, oracle);
    assert!((r.objective - 1.96).abs() < 1e-12 && (j - 1.96).abs() < 1e-12);
}

#[test]
fn without_swarming_the_search_sees_the_raw_objective() {
    // with all coefficients zero the swarm term vanishes identically
    for d in [0.0, 1.0, 1e3] {
        assert_eq!(swarm_cost(&[0.0], &[d], &SwarmCoefficients::NONE), 0.0);
    }
    let hist = Histogram::from_slice(&[0, 5, 9, 0, 0, 0, 0, 7, 3]).unwrap();
    let cfg = BfoConfig { swarm: SwarmCoefficients::NONE, ..BfoConfig::default().with_seed(5) };
    let r = optimize_thresholds(&hist, 2, &cfg).unwrap();
    let (_, j) = exhaustive_search(&hist, 2).unwrap();
    assert!((r.objective - j).abs() < 1e-12);
}

fn check_invariants(cfg: &BfoConfig, dim: usize) -> Result<(), TestCaseError> {
    let bounds = THRESHOLD_BOUNDS;
    let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (v * (i + 1) as f64 / 40.0).sin()).sum::<f64>();
    let mut violations = Vec::new();
    let r = optimize_with_observer(&f, dim, bounds, cfg, |ev, pop| {
        if pop.len() != cfg.population {
            violations.push(format!("{ev:?}: population {}", pop.len()));
        }
        if let Event::Moved(i) = ev {
            if !bounds.contains(&pop.positions[i]) {
                violations.push(format!("bacterium {i} left the box: {:?}", pop.positions[i]));
            }
        }
        if matches!(ev, Event::Reproduced | Event::Dispersed | Event::Initialized)
            && !pop.positions.iter().all(|p| bounds.contains(p))
        {
            violations.push(format!("{ev:?}: position outside bounds"));
        }
    })
    .unwrap();
    prop_assert!(violations.is_empty(), "{:?}", violations);
    prop_assert_eq!(r.trace.len(), cfg.total_chemotactic_steps());
    prop_assert!(r.trace.windows(2).all(|w| w[0] <= w[1]));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_invariants_hold(
        seed in any::<u64>(),
        half in 1usize..6,
        dim in 1usize..4,
        ped in 0.0f64..=1.0,
        step in 0.5f64..40.0,
    ) {
        let cfg = BfoConfig {
            population: 2 * half,
            chemotactic_steps: 6,
            swim_length: 3,
            reproduction_steps: 2,
            dispersal_events: 2,
            dispersal_probability: ped,
            step_size: bfoseg::bfo::StepSize::Uniform(step),
            seed,
            ..Default::default()
        };
        check_invariants(&cfg, dim)?;
    }

    #[test]
    fn identical_seeds_are_bit_identical(seed in any::<u64>()) {
        let hist = Histogram::from_slice(&[3, 0, 0, 8, 1, 0, 0, 0, 6, 6, 2]).unwrap();
        let objective = ThresholdObjective::new(&hist);
        let cfg = BfoConfig { chemotactic_steps: 10, ..BfoConfig::default().with_seed(seed) };
        let a = optimize(&objective, 2, THRESHOLD_BOUNDS, &cfg).unwrap();
        let b = optimize(&objective, 2, THRESHOLD_BOUNDS, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
