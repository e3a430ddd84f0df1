//! Deterministic steady state: after a step in the injections, every
//! secondary controller restores nominal frequency and reaches the
//! economic-dispatch optimum; without secondary control the frequency
//! settles at a common offset.
//!
//! cargo run --example dispatch

use nalgebra::DVector;

use freqh2::models::{
    assemble, injection_forcing, optimal_dispatch, reserves, BlockKind, Controller, GridParameters,
};
use freqh2::sim::integrate_forced;
use freqh2::NetworkGraph;

fn fmt(v: impl IntoIterator<Item = f64>) -> String {
    let parts: Vec<String> = v.into_iter().map(|x| format!("{x:+.4}")).collect();
    format!("[{}]", parts.join(" "))
}

fn main() -> freqh2::Result<()> {
    let g =
        NetworkGraph::build_from_edges(4, &[(1, 2, 1.0), (2, 3, 1.5), (3, 4, 1.0), (4, 1, 0.7)])?;
    let mut params = GridParameters::case_study(4).with_gamma(2.0);
    params.k = DVector::from_vec(vec![2.0, 3.0, 4.0, 5.0]);
    let p_star = DVector::from_vec(vec![0.3, -0.1, 0.25, 0.05]);

    let target = optimal_dispatch(&p_star, &params, &g)?;
    println!("optimal reserves {}", fmt(target.p_opt.iter().copied()));
    println!("uncontrolled frequency offset {:.4}", target.omega_ss);

    for c in [
        Controller::Swing,
        Controller::Broadcast,
        Controller::PrimalDual { alpha: 1.0 },
        Controller::Dapi { gamma: 2.0 },
    ] {
        let model = assemble(c, &g, &params)?;
        let forcing = injection_forcing(&model, &params, &p_star)?;
        let x = integrate_forced(
            &model,
            &forcing,
            &DVector::zeros(model.state_dim()),
            0.1,
            2000.0,
        )?;
        let omega = model.block(BlockKind::Frequency).expect("frequency block");
        let p = reserves(&model, &params, &x)?;
        println!(
            "{:<22} omega {}  reserves {}  |p - p_opt| = {:.1e}",
            c.label(),
            fmt(x.rows(omega.offset, omega.len).iter().copied()),
            fmt(p.iter().copied()),
            (&p - &target.p_opt).amax()
        );
    }
    Ok(())
}
