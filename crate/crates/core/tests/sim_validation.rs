//! Monte Carlo estimates against Lyapunov values on the five-bus case study.

use freqh2::models::{assemble, Controller, GridParameters, StateSpaceModel};
use freqh2::sim::{
    estimate_steady_state_variance, simulate_with, EstimatorConfig, Integrator, SimOptions,
};
use freqh2::{h2_norm, NetworkGraph};

fn case(controller: Controller) -> StateSpaceModel {
    let g = NetworkGraph::build_path(5, 1.0).unwrap();
    let params = match controller {
        Controller::PrimalDual { .. } => GridParameters::case_study(5).with_gamma(1.0),
        _ => GridParameters::case_study(5),
    };
    assemble(controller, &g, &params).unwrap()
}

/// Euler-Maruyama at `dt = fraction / radius` over `time_constants`
/// slowest time constants.
fn shortened(
    model: &StateSpaceModel,
    seed: u64,
    fraction: f64,
    time_constants: f64,
) -> EstimatorConfig {
    let base = EstimatorConfig::defaults_for(model, seed);
    let horizon = time_constants / model.max_real_eigenvalue().abs();
    EstimatorConfig {
        dt: fraction / model.spectral_radius(),
        horizon,
        burn_in: 0.2 * horizon,
        ..base
    }
}

#[test]
fn broadcast_trace_average_matches_norm() {
    let model = case(Controller::Broadcast);
    let target = h2_norm(&model).unwrap().value;
    let dt = 0.02 / model.spectral_radius();
    let horizon = 2000.0 / model.max_real_eigenvalue().abs();
    let options = SimOptions {
        record_every: 10,
        ..SimOptions::default()
    };
    let trace = simulate_with(&model, 21, dt, horizon, &options).unwrap();
    let avg = trace.mean_output_power(0.1 * horizon);
    assert!((avg - target).abs() / target < 0.1, "{avg} vs {target}");
    assert!(trace.outputs.iter().flatten().all(|v| v.is_finite()));
    assert_eq!(trace.outputs[0].len(), 5);
}

#[test]
fn exact_intervals_cover_the_case_study_norms() {
    for (controller, seed) in [
        (Controller::PrimalDual { alpha: 0.0 }, 7),
        (Controller::Dapi { gamma: 5.0 }, 8),
    ] {
        let model = case(controller);
        let target = h2_norm(&model).unwrap().value;
        let est = estimate_steady_state_variance(
            &model,
            &EstimatorConfig::exact_defaults_for(&model, seed),
        )
        .unwrap();
        assert!(est.contains(target), "{controller:?}: {est:?} vs {target}");
        assert!(est.half_width() / target < 0.05);
    }
}

#[test]
fn euler_maruyama_interval_covers_the_norm() {
    for (controller, seed) in [
        (Controller::Broadcast, 3),
        (Controller::Dapi { gamma: 5.0 }, 4),
    ] {
        let model = case(controller);
        let target = h2_norm(&model).unwrap().value;
        let est =
            estimate_steady_state_variance(&model, &shortened(&model, seed, 0.01, 100.0)).unwrap();
        assert!(est.contains(target), "{controller:?}: {est:?} vs {target}");
    }
}

#[test]
fn halving_the_step_moves_the_estimate_less_than_the_interval() {
    let model = case(Controller::Broadcast);
    let coarse =
        estimate_steady_state_variance(&model, &shortened(&model, 5, 0.01, 100.0)).unwrap();
    let fine = estimate_steady_state_variance(&model, &shortened(&model, 5, 0.005, 100.0)).unwrap();
    let shift = (coarse.mean_sq - fine.mean_sq).abs();
    assert!(
        shift < coarse.half_width().max(fine.half_width()),
        "shift {shift}, {coarse:?}, {fine:?}"
    );
}

#[test]
fn estimates_are_reproducible() {
    let model = case(Controller::Dapi { gamma: 5.0 });
    let config = EstimatorConfig {
        n_seeds: 4,
        ..EstimatorConfig::exact_defaults_for(&model, 99)
    };
    let a = estimate_steady_state_variance(&model, &config).unwrap();
    let b = estimate_steady_state_variance(&model, &config).unwrap();
    assert_eq!(a, b);
    let other = estimate_steady_state_variance(
        &model,
        &EstimatorConfig {
            master_seed: 100,
            ..config
        },
    )
    .unwrap();
    assert_ne!(a.per_seed, other.per_seed);
}

#[test]
fn exact_traces_accept_steps_beyond_the_explicit_limit() {
    let model = case(Controller::Broadcast);
    let dt = 2.0 / model.spectral_radius();
    let explicit = SimOptions::default();
    assert!(simulate_with(&model, 1, dt, 100.0, &explicit).is_err());
    let exact = SimOptions {
        integrator: Integrator::ExactGaussian,
        ..SimOptions::default()
    };
    let trace = simulate_with(&model, 1, dt, 100.0, &exact).unwrap();
    assert_eq!(trace.times.len(), (100.0 / dt).round() as usize + 1);
}

/// The full protocol at default Euler-Maruyama settings: 20 batches of 20
/// seeds per controller. Takes hours on a single core.
#[test]
#[ignore]
fn euler_maruyama_default_protocol() {
    for controller in [
        Controller::Broadcast,
        Controller::PrimalDual { alpha: 0.0 },
        Controller::PrimalDual { alpha: 5.0 },
        Controller::Dapi { gamma: 5.0 },
    ] {
        let model = case(controller);
        let target = h2_norm(&model).unwrap().value;
        let covered = (0..20u64)
            .filter(|&batch| {
                let est = estimate_steady_state_variance(
                    &model,
                    &EstimatorConfig::defaults_for(&model, 1000 + batch),
                )
                .unwrap();
                est.contains(target)
            })
            .count();
        println!("{}: {covered}/20", controller.label());
        assert!(covered >= 18);
    }
}
