//! Squared H2 norms of the five-bus case study with a growing frequency
//! penalty, next to the published table.
//!
//! cargo run --example table1

use freqh2::cli::{cmd_table1, Table1};

fn main() -> freqh2::Result<()> {
    let table: Table1 = cmd_table1()?;
    println!(
        "{:>7} | {:>22} | {:>22} | {:>22} | {:>22}",
        "sqrt_pi", "PD a=0", "PD a=5", "DAPI g=5", "broadcast"
    );
    for row in &table.rows {
        let cells: Vec<String> = (0..4)
            .map(|j| {
                format!(
                    "{:.4} ({:.3}, {:+.4})",
                    row.computed[j], row.published[j], row.deviation[j]
                )
            })
            .collect();
        println!("{:>7.1} | {}", row.sqrt_pi, cells.join(" | "));
    }
    println!(
        "largest relative deviation: {:.2}%",
        100.0 * table.max_relative_deviation()
    );
    if let Some(note) = table.topology_note() {
        println!("note: {note}");
    }
    Ok(())
}
