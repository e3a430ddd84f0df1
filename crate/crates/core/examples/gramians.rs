//! The explicit observability Gramian of the broadcast loop against the
//! numerical one.
//!
//! cargo run --example gramians

use freqh2::h2::{
    closed_form_broadcast_gramian, gramian_residual, gramian_trace, observability_gramian,
};
use freqh2::models::{assemble_broadcast, GridParameters};
use freqh2::NetworkGraph;

fn main() -> freqh2::Result<()> {
    let g = NetworkGraph::build_path(5, 1.0)?;
    let params = GridParameters::case_study(5);
    let model = assemble_broadcast(&g, &params)?;

    let explicit = closed_form_broadcast_gramian(&g, &params)?;
    let numerical = observability_gramian(&model)?;
    println!("explicit Gramian:{explicit:.4}");
    println!(
        "residual |XA + A^T X + C^T C|_max = {:.2e}",
        gramian_residual(&explicit, &model.a, &model.c)?
    );
    println!(
        "|X_explicit - X_numerical|_max    = {:.2e}",
        (&explicit - &numerical).amax()
    );
    println!(
        "Tr(B^T X B) = {:.12} (b^2 / (2 tau_mu d) = {:.12})",
        gramian_trace(&explicit, &model.b),
        1.0 / 12.0
    );
    Ok(())
}
