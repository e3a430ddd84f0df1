//! Distributed averaging: the norm falls monotonically with the averaging
//! gain toward the broadcast value, and approaches the overdamped formula
//! as inertia vanishes.
//!
//! cargo run --example averaging_gain

use freqh2::analytic::{dapi_h2, dapi_h2_highgain, dapi_h2_overdamped};
use freqh2::models::{assemble, Controller, GridParameters};
use freqh2::{h2_norm, NetworkGraph};

fn main() -> freqh2::Result<()> {
    let g = NetworkGraph::build_path(5, 1.0)?;
    let spectrum = g.spectrum();
    let params = GridParameters::case_study(5);
    let limit = dapi_h2_highgain(&params)?;

    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "gamma", "modal sum", "Lyapunov", "excess"
    );
    for gamma in [0.1, 1.0, 5.0, 10.0, 100.0, 1e3, 1e4] {
        let p = params.clone().with_gamma(gamma);
        let (value, terms) = dapi_h2(&p, &spectrum)?;
        let numerical = h2_norm(&assemble(Controller::Dapi { gamma }, &g, &p)?)?.value;
        println!(
            "{gamma:>8} {value:>12.6} {numerical:>12.6} {:>9.3}%  (z1 = {:.1}, z2 = {:.1})",
            100.0 * (value / limit - 1.0),
            terms.z1,
            terms.z2
        );
    }
    println!("high-gain limit b^2/(2 tau d) = {limit:.6}");

    for m in [1.0, 1e-2, 1e-4, 1e-6] {
        let mut light = params.clone();
        light.m.fill(m);
        let numerical = h2_norm(&assemble(Controller::Dapi { gamma: 5.0 }, &g, &light)?)?.value;
        println!(
            "m = {m:e}: Lyapunov {numerical:.8}, overdamped {:.8}",
            dapi_h2_overdamped(&light, &spectrum)?
        );
    }
    Ok(())
}
