use ihtc_core::inverse::{synthesize_experiment, ExperimentDesign, FitnessSpec, ForwardModel};
use ihtc_core::mcmc::log_likelihood;
use ihtc_core::{Alloy, Boundary, Ihtc, Mesh};

fn model() -> ForwardModel<f64> {
    ForwardModel {
        alloy: Alloy::al_7si(),
        mesh: Mesh::new(0.05, 20, 0.05, 60.0),
        boundary: Boundary {
            t_env: 300.0,
            t_init: 930.0,
        },
    }
}

fn truth() -> Ihtc {
    Ihtc::new(6301.0, -0.147)
}

#[test]
fn noise_free_grid_has_minimum_at_truth() {
    let exp =
        synthesize_experiment(&truth(), &model(), &ExperimentDesign::default(), 0.0, 0).unwrap();
    let spec = FitnessSpec::new(model(), exp).unwrap();
    let at_truth = spec.fitness(&truth());
    assert!(at_truth < 1e-6, "{at_truth}");
    for i in 0..20 {
        for j in 0..20 {
            let a = 6301.0 * (0.8 + 0.4 * i as f64 / 19.0);
            let b = -0.147 * (0.8 + 0.4 * j as f64 / 19.0);
            let f = spec.fitness(&Ihtc::new(a, b));
            assert!(f >= at_truth, "({a}, {b}) scores {f}");
            assert!(f.is_finite() && f >= 0.0);
        }
    }
}

#[test]
fn noise_has_requested_spread() {
    let design = ExperimentDesign {
        probes: (1..=9).map(|k| 0.004 * k as f64).collect(),
        sample_interval: 0.05,
    };
    let clean = synthesize_experiment(&truth(), &model(), &design, 0.0, 3).unwrap();
    let noisy = synthesize_experiment(&truth(), &model(), &design, 5.0, 3).unwrap();
    let d: Vec<f64> = noisy
        .history
        .temperatures
        .iter()
        .flatten()
        .zip(clean.history.temperatures.iter().flatten())
        .map(|(n, c)| n - c)
        .collect();
    assert!(d.len() >= 10_000, "{}", d.len());
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let std = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
    assert!((std / 5.0 - 1.0).abs() < 0.05, "{std}");
}

#[test]
fn fitness_at_truth_sits_on_noise_floor() {
    // E[RMSD] of 60 N(0, 25) residuals is 5 (1 - 1/240) to leading order.
    let expected = 3.0 * 5.0 * (1.0 - 1.0 / 240.0);
    let draws: Vec<f64> = (0..100)
        .map(|seed| {
            let exp =
                synthesize_experiment(&truth(), &model(), &ExperimentDesign::default(), 5.0, seed)
                    .unwrap();
            FitnessSpec::new(model(), exp).unwrap().fitness(&truth())
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((mean - expected).abs() < 0.3, "{mean} vs {expected}");
}

#[test]
fn log_likelihood_matches_fitness_residuals() {
    let exp =
        synthesize_experiment(&truth(), &model(), &ExperimentDesign::default(), 5.0, 9).unwrap();
    let spec = FitnessSpec::new(model(), exp).unwrap();
    let theta = [6000.0, -0.14];
    let p = Ihtc::new(theta[0], theta[1]);
    let n = spec.experiment.history.n_samples() as f64;
    let via_rmsd: f64 = spec
        .probe_deviations(&p)
        .unwrap()
        .iter()
        .map(|d| -0.5 * n * d * d / 25.0)
        .sum();
    let ll = log_likelihood(&theta, &spec, 5.0).unwrap();
    assert!(
        (ll - via_rmsd).abs() < 1e-9 * ll.abs(),
        "{ll} vs {via_rmsd}"
    );
    let ll2 = log_likelihood(&theta, &spec, 10.0).unwrap();
    assert!((ll2 - 0.25 * ll).abs() < 1e-12 * ll.abs());
    assert_eq!(
        log_likelihood(&[-5.0, -0.1], &spec, 5.0).unwrap(),
        f64::NEG_INFINITY
    );
    assert!(log_likelihood(&theta, &spec, 0.0).is_err());

    let clean =
        synthesize_experiment(&truth(), &model(), &ExperimentDesign::default(), 0.0, 0).unwrap();
    let clean_spec = FitnessSpec::new(model(), clean).unwrap();
    assert!(
        log_likelihood(&[6301.0, -0.147], &clean_spec, 5.0)
            .unwrap()
            .abs()
            < 1e-9
    );
}
