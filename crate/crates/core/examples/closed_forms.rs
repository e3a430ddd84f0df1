//! Lyapunov-based squared H2 norms against the closed forms, and what
//! happens when the uniformity assumptions break.
//!
//! cargo run --example closed_forms

use freqh2::analytic::closed_form;
use freqh2::models::{assemble, check_assumptions, Controller, GridParameters};
use freqh2::{h2_norm, NetworkGraph};

fn main() -> freqh2::Result<()> {
    let g = NetworkGraph::build_path(5, 1.0)?;
    let params = GridParameters::case_study(5);
    let controllers = [
        Controller::Broadcast,
        Controller::PrimalDual { alpha: 0.0 },
        Controller::PrimalDual { alpha: 2.0 },
        Controller::Dapi { gamma: 5.0 },
    ];

    println!(
        "{:<22} {:>12} {:>12} {:>12}",
        "controller", "Lyapunov", "closed form", "kind"
    );
    for c in controllers {
        let numerical = h2_norm(&assemble(c, &g, &params)?)?;
        let (_, analytic) = closed_form(c, &g, &params)?;
        println!(
            "{:<22} {:>12.6} {:>12.6} {:>12?}",
            c.label(),
            numerical.value,
            analytic.value,
            analytic.method
        );
    }

    let mut skewed = params.clone();
    skewed.m[0] = 3.0;
    let report = check_assumptions(&skewed, &g);
    println!(
        "\nwith m_1 = 3: uniform = {}, valid formulas = {:?}",
        report.uniform, report.valid_formulas
    );
    let numerical = h2_norm(&assemble(Controller::Broadcast, &g, &skewed)?)?.value;
    match closed_form(Controller::Broadcast, &g, &skewed) {
        Ok(_) => unreachable!(),
        Err(e) => println!("broadcast Lyapunov value {numerical:.6}; {e}"),
    }
    Ok(())
}
