//! Frequency feedback in the primal-dual controller: the exact norm, the
//! generalized-Gramian bound and the matrix inequality behind it.
//!
//! cargo run --example primal_dual_bound

use freqh2::analytic::pd_h2_upper_bound;
use freqh2::h2::verify_generalized_gramian;
use freqh2::models::{assemble, Controller, GridParameters};
use freqh2::{h2_norm, NetworkGraph};

fn main() -> freqh2::Result<()> {
    let g = NetworkGraph::build_path(5, 1.0)?;
    println!(
        "{:>6} {:>10} {:>10} {:>14}",
        "alpha", "H2^2", "bound", "max eig(LMI)"
    );
    for alpha in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let params = GridParameters::case_study(5)
            .with_gamma(1.0)
            .with_alpha(alpha);
        let model = assemble(Controller::PrimalDual { alpha }, &g, &params)?;
        let value = h2_norm(&model)?.value;
        let bound = pd_h2_upper_bound(&params, g.n(), alpha)?;
        let lmi = if alpha > 0.0 {
            format!(
                "{:.2e}",
                verify_generalized_gramian(&model, &params)?.max_eigenvalue
            )
        } else {
            "-".into()
        };
        println!("{alpha:>6} {value:>10.6} {bound:>10.4} {lmi:>14}");
    }
    Ok(())
}
