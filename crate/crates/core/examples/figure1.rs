//! Non-uniform inertia, damping and cost: simulated output power of
//! primal-dual with frequency feedback versus distributed averaging and
//! broadcast, over several random parameter draws. Writes one trace to
//! `figure1_trace.csv` for plotting.
//!
//! cargo run --release --example figure1

use freqh2::cli::config::Heterogeneity;
use freqh2::models::{assemble, Controller, GridParameters};
use freqh2::sim::{
    estimate_steady_state_variance, simulate_with, EstimatorConfig, Integrator, SimOptions,
};
use freqh2::{h2_norm, NetworkGraph};

fn main() -> freqh2::Result<()> {
    let g = NetworkGraph::build_path(5, 1.0)?;
    let controllers = [
        Controller::PrimalDual { alpha: 1.0 },
        Controller::Dapi { gamma: 1.0 },
        Controller::Broadcast,
    ];
    for draw in 1..=5 {
        let mut params = GridParameters::case_study(5).with_gamma(1.0);
        Heterogeneity {
            seed: draw,
            spread: 0.5,
        }
        .apply(&mut params)?;
        let mut line = format!("draw {draw}:");
        for c in controllers {
            let model = assemble(c, &g, &params)?;
            let est = estimate_steady_state_variance(
                &model,
                &EstimatorConfig::exact_defaults_for(&model, draw),
            )?;
            line += &format!(
                "  {} {:.4} (H2^2 {:.4})",
                c.label(),
                est.mean_sq,
                h2_norm(&model)?.value
            );
        }
        println!("{line}");
    }

    let mut params = GridParameters::case_study(5).with_gamma(1.0);
    Heterogeneity {
        seed: 1,
        spread: 0.5,
    }
    .apply(&mut params)?;
    let mut csv = String::from("t,controller,yty\n");
    for c in controllers {
        let model = assemble(c, &g, &params)?;
        let options = SimOptions {
            integrator: Integrator::ExactGaussian,
            ..SimOptions::default()
        };
        let trace = simulate_with(&model, 7, 0.1, 200.0, &options)?;
        for (t, p) in trace.times.iter().zip(trace.output_power()) {
            csv += &format!("{t:.1},{},{p:.6}\n", c.tag().as_str());
        }
    }
    std::fs::write("figure1_trace.csv", csv)?;
    println!("wrote figure1_trace.csv");
    Ok(())
}
