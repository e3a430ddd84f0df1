//! Stochastic validation: the stationary output power estimated from
//! white-noise simulations brackets the Lyapunov value.
//!
//! cargo run --release --example monte_carlo

use std::time::Instant;

use freqh2::models::{assemble, Controller, GridParameters};
use freqh2::sim::{estimate_steady_state_variance, EstimatorConfig};
use freqh2::{h2_norm, NetworkGraph};

fn main() -> freqh2::Result<()> {
    let g = NetworkGraph::build_path(5, 1.0)?;
    let cases = [
        (Controller::Broadcast, GridParameters::case_study(5)),
        (
            Controller::PrimalDual { alpha: 0.0 },
            GridParameters::case_study(5).with_gamma(1.0),
        ),
        (
            Controller::Dapi { gamma: 5.0 },
            GridParameters::case_study(5),
        ),
    ];
    for (controller, params) in cases {
        let model = assemble(controller, &g, &params)?;
        let target = h2_norm(&model)?.value;

        let exact = EstimatorConfig::exact_defaults_for(&model, 1);
        let start = Instant::now();
        let est = estimate_steady_state_variance(&model, &exact)?;
        println!(
            "{:<22} H2^2 = {target:.4}  exact transitions: {:.4} [{:.4}, {:.4}] in {:.2} s",
            controller.label(),
            est.mean_sq,
            est.ci_low,
            est.ci_high,
            start.elapsed().as_secs_f64()
        );

        // Euler-Maruyama with a 10x coarser step and a 5x shorter horizon
        // than the defaults, to keep the example quick.
        let defaults = EstimatorConfig::defaults_for(&model, 1);
        let em = EstimatorConfig {
            dt: 10.0 * defaults.dt,
            horizon: defaults.horizon / 5.0,
            burn_in: defaults.burn_in / 5.0,
            ..defaults
        };
        let start = Instant::now();
        let est = estimate_steady_state_variance(&model, &em)?;
        println!(
            "{:<22}                 Euler-Maruyama:    {:.4} [{:.4}, {:.4}] in {:.2} s",
            "",
            est.mean_sq,
            est.ci_low,
            est.ci_high,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
