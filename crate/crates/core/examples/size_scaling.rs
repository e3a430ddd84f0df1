//! How the three controllers scale with network size on path graphs:
//! broadcast is size independent, feed-forward primal-dual grows linearly,
//! distributed averaging grows sub-linearly.
//!
//! cargo run --release --example size_scaling

use freqh2::models::{assemble, Controller, GridParameters};
use freqh2::{h2_norm, NetworkGraph};

fn main() -> freqh2::Result<()> {
    let controllers = [
        Controller::Broadcast,
        Controller::PrimalDual { alpha: 0.0 },
        Controller::Dapi { gamma: 5.0 },
    ];
    println!(
        "{:>4} {:>12} {:>12} {:>12}",
        "n", "broadcast", "primal-dual", "averaging"
    );
    for n in [2, 5, 10, 20, 40, 80] {
        let g = NetworkGraph::build_path(n, 1.0)?;
        let params = GridParameters::case_study(n);
        let values = controllers
            .iter()
            .map(|&c| Ok(h2_norm(&assemble(c, &g, &params)?)?.value))
            .collect::<freqh2::Result<Vec<f64>>>()?;
        println!(
            "{n:>4} {:>12.6} {:>12.6} {:>12.6}",
            values[0], values[1], values[2]
        );
    }
    Ok(())
}
