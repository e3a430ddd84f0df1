//! Incidence matrix, Laplacian and spectrum of a tree and a meshed network.
//!
//! cargo run --example network_spectrum

use freqh2::models::DeflationStrategy;
use freqh2::NetworkGraph;

fn describe(name: &str, g: &NetworkGraph) {
    println!(
        "{name}: n = {}, edges = {}, acyclic = {}",
        g.n(),
        g.edge_count(),
        g.is_acyclic()
    );
    println!("  angle coordinates: {:?}", DeflationStrategy::for_graph(g));
    let spectrum: Vec<String> = g.spectrum().iter().map(|l| format!("{l:.4}")).collect();
    println!("  Laplacian spectrum: [{}]", spectrum.join(", "));
    let e = g.incidence();
    let l = g.laplacian();
    println!(
        "  |E E^T - L|_max = {:.1e}",
        (&e * e.transpose() - &l).amax()
    );
}

fn main() -> freqh2::Result<()> {
    let path = NetworkGraph::build_path(5, 1.0)?;
    describe("five-bus path", &path);
    println!("{}", path.laplacian());

    // 1-based edge list (tail, head, susceptance)
    let mesh = NetworkGraph::build_from_edges(
        4,
        &[
            (1, 2, 1.0),
            (2, 3, 2.0),
            (3, 4, 1.0),
            (4, 1, 0.5),
            (1, 3, 1.5),
        ],
    )?;
    describe("meshed four-bus", &mesh);

    match NetworkGraph::build_from_edges(4, &[(1, 2, 1.0), (3, 4, 1.0)]) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
